//! Named scenarios modelled on the failure modes of onboard CCTV counting.
//!
//! Frames are 704x576 (PAL CCTV) at 4 fps, 600 frames (2.5 minutes). Seat
//! rows sit in the lower half of the image; window bands span the top strip,
//! where passers-by outside the vehicle are seen.

use super::{MergeEvent, PassengerSpec, PersistentFp, Region, ScenarioConfig, SynthError};

const FRAMES: u64 = 600;

/// Two rows of four seats, 160 px apart.
fn bus_seats() -> Vec<[f64; 2]> {
    [300.0, 460.0].into_iter().flat_map(|y| [120.0, 280.0, 440.0, 600.0].map(|x| [x, y])).collect()
}

fn window_band() -> Vec<Region> {
    vec![Region { x: 40.0, y: 60.0, w: 620.0, h: 80.0 }]
}

fn whole_journey(seats: impl IntoIterator<Item = usize>, p_detect: f64) -> Vec<PassengerSpec> {
    seats.into_iter().map(|seat| PassengerSpec { seat, board_frame: 0, alight_frame: FRAMES, p_detect }).collect()
}

fn base(video_id: &str, seed: u64) -> ScenarioConfig {
    ScenarioConfig { video_id: video_id.into(), seed, frame_count: FRAMES, ..ScenarioConfig::default() }
}

/// Six seated passengers, light dropout, no false positives.
fn clean_bus() -> ScenarioConfig {
    ScenarioConfig {
        seats: bus_seats(),
        passengers: whole_journey(0..6, 0.95),
        jitter_px: 2.0,
        tp_score_min: 0.8,
        ..base("clean_bus", 7)
    }
}

/// Five always-visible passengers plus pedestrians glimpsed through the
/// windows for one to three frames each.
fn window_fps() -> ScenarioConfig {
    ScenarioConfig {
        seats: bus_seats(),
        passengers: whole_journey(0..5, 1.0),
        jitter_px: 2.0,
        tp_score_min: 0.8,
        transient_fp_rate: 0.05,
        transient_fp_duration: [1, 3],
        window_bands: window_band(),
        ..base("window_fps", 11)
    }
}

/// Four seated passengers plus one visible only for 12 frames while walking
/// to an obscured seat.
fn boarding_blip() -> ScenarioConfig {
    let mut passengers = whole_journey(0..4, 1.0);
    passengers.push(PassengerSpec { seat: 4, board_frame: 100, alight_frame: 112, p_detect: 1.0 });
    ScenarioConfig { seats: bus_seats(), passengers, jitter_px: 2.0, tp_score_min: 0.8, ..base("boarding_blip", 3) }
}

/// Two neighbours detected as a single box for 30 seconds.
fn occlusion_merge() -> ScenarioConfig {
    ScenarioConfig {
        seats: vec![[200.0, 320.0], [270.0, 320.0], [480.0, 320.0], [480.0, 470.0]],
        passengers: whole_journey(0..4, 0.97),
        merge_events: vec![MergeEvent { passengers: [0, 1], start_frame: 200, end_frame: 320 }],
        jitter_px: 2.0,
        tp_score_min: 0.8,
        ..base("occlusion_merge", 5)
    }
}

/// Side-by-side train seating, 45 px between neighbours.
fn crowded_train() -> ScenarioConfig {
    let seats =
        [300.0, 460.0].into_iter().flat_map(|y| [100.0, 145.0, 330.0, 375.0, 560.0, 605.0].map(|x| [x, y])).collect();
    ScenarioConfig {
        seats,
        passengers: whole_journey(0..8, 0.97),
        jitter_px: 1.0,
        tp_score_min: 0.8,
        ..base("crowded_train", 13)
    }
}

/// Clean bus where an empty seat is persistently detected as a person.
fn seat_false_positive() -> ScenarioConfig {
    ScenarioConfig {
        persistent_fp: Some(PersistentFp { centroid: [600.0, 460.0], width: 50.0, height: 70.0, p_detect: 0.9 }),
        ..ScenarioConfig { video_id: "seat_false_positive".into(), seed: 17, ..clean_bus() }
    }
}

type Builder = fn() -> ScenarioConfig;

const PRESETS: [(&str, Builder); 6] = [
    ("clean_bus", clean_bus),
    ("window_fps", window_fps),
    ("boarding_blip", boarding_blip),
    ("occlusion_merge", occlusion_merge),
    ("crowded_train", crowded_train),
    ("seat_false_positive", seat_false_positive),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset(name: &str) -> Result<ScenarioConfig, SynthError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, build)| build())
        .ok_or_else(|| SynthError::UnknownPreset(name.to_owned()))
}

/// Every preset, in catalogue order.
pub fn scenario_presets() -> Vec<(&'static str, ScenarioConfig)> {
    PRESETS.iter().map(|(name, build)| (*name, build())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, ProvenanceTag};

    #[test]
    fn catalogue_is_valid() {
        for (name, cfg) in scenario_presets() {
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(preset("nope"), Err(SynthError::UnknownPreset(_))));
        for required in ["clean_bus", "window_fps", "boarding_blip", "occlusion_merge", "crowded_train"] {
            assert!(preset_names().any(|n| n == required));
        }
    }

    #[test]
    fn window_fps_transients_are_short() {
        let s = generate(&preset("window_fps").unwrap()).unwrap();
        let mut lifetimes = vec![0u32; s.transient_events];
        for t in &s.tags {
            match t {
                ProvenanceTag::TransientFp(id) => lifetimes[*id] += 1,
                ProvenanceTag::TruePositive(_) => {}
                other => panic!("unexpected tag {other}"),
            }
        }
        assert!(s.transient_events >= 10, "only {} events", s.transient_events);
        assert!(lifetimes.iter().all(|&n| (1..=3).contains(&n)));
    }

    #[test]
    fn boarding_blip_has_one_short_passenger() {
        let cfg = preset("boarding_blip").unwrap();
        let short: Vec<_> = cfg.passengers.iter().filter(|p| p.alight_frame - p.board_frame < 40).collect();
        assert_eq!(short.len(), 1);
    }

    #[test]
    fn clean_bus_is_clean() {
        let s = generate(&preset("clean_bus").unwrap()).unwrap();
        assert!(s.tags.iter().all(|t| t.is_true_positive()));
    }
}
