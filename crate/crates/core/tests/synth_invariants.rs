mod common;

use sdtransit::ingest::{parse_detections, write_tagged_ndjson};
use sdtransit::synth::PassengerSpec;
use sdtransit::synth::{generate, preset, preset_names, ProvenanceTag, ScenarioConfig, SynthError};
use sdtransit::Format;

#[test]
fn same_seed_same_scenario() {
    let mut r = common::rng(21);
    for _ in 0..30 {
        let cfg = common::random_scenario(&mut r);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    }
    let a = generate(&preset("window_fps").unwrap()).unwrap();
    let b = generate(&ScenarioConfig { seed: 12, ..preset("window_fps").unwrap() }).unwrap();
    assert_ne!(a.noisy, b.noisy);
}

#[test]
fn tags_and_headcounts_line_up() {
    let mut r = common::rng(22);
    for _ in 0..50 {
        let s = generate(&common::random_scenario(&mut r)).unwrap();
        assert_eq!(s.tags.len(), s.noisy.len());
        assert_eq!(s.headcounts.len() as u64, s.noisy.frame_count());
        let gt = common::counts(&s.ground_truth);
        let noisy = common::counts(&s.noisy);
        for e in s.headcounts.entries() {
            assert_eq!(e.ground_truth, gt[e.frame as usize]);
            assert_eq!(e.predicted, Some(noisy[e.frame as usize]));
        }
        // Only merges and dropouts lower the count; only false positives raise it.
        let tp_only = common::counts(&s.true_positives());
        assert!(tp_only.iter().zip(&gt).all(|(t, g)| t <= g));
    }
}

#[test]
fn noiseless_passenger_is_ground_truth() {
    let cfg = ScenarioConfig {
        frame_count: 600,
        seats: vec![[200.0, 300.0]],
        passengers: vec![PassengerSpec { seat: 0, board_frame: 0, alight_frame: 600, p_detect: 1.0 }],
        ..ScenarioConfig::default()
    };
    let s = generate(&cfg).unwrap();
    assert_eq!(s.noisy, s.ground_truth);
    assert_eq!(s.noisy.len(), 600);
}

#[test]
fn empty_scenario_is_empty() {
    let s = generate(&ScenarioConfig { frame_count: 20, ..ScenarioConfig::default() }).unwrap();
    assert!(s.noisy.is_empty() && s.ground_truth.is_empty());
    assert!(s.headcounts.entries().iter().all(|e| e.ground_truth == 0 && e.predicted == Some(0)));
}

#[test]
fn boarding_after_alighting_is_rejected() {
    let cfg = ScenarioConfig {
        frame_count: 100,
        seats: vec![[200.0, 300.0]],
        passengers: vec![PassengerSpec { seat: 0, board_frame: 50, alight_frame: 40, p_detect: 1.0 }],
        ..ScenarioConfig::default()
    };
    assert!(matches!(generate(&cfg), Err(SynthError::InvalidConfig(_))));
}

#[test]
fn presets_show_their_failure_mode() {
    for name in preset_names() {
        let s = generate(&preset(name).unwrap()).unwrap();
        let has = |f: fn(&ProvenanceTag) -> bool| s.tags.iter().any(f);
        match name {
            "clean_bus" | "crowded_train" | "boarding_blip" => assert!(has(|t| t.is_true_positive())),
            "window_fps" => assert!(has(|t| matches!(t, ProvenanceTag::TransientFp(_)))),
            "occlusion_merge" => assert!(has(|t| matches!(t, ProvenanceTag::MergedPair(0, 1)))),
            "seat_false_positive" => assert!(has(|t| matches!(t, ProvenanceTag::PersistentFp))),
            other => panic!("untested preset {other}"),
        }
    }
}

#[test]
fn merged_box_spans_both_passengers() {
    let s = generate(&preset("occlusion_merge").unwrap()).unwrap();
    let (i, _) = s.tags.iter().enumerate().find(|(_, t)| matches!(t, ProvenanceTag::MergedPair(..))).unwrap();
    let d = &s.noisy.detections()[i];
    assert!((200..320).contains(&d.frame_index));
    assert!(d.bbox.width() > 100.0, "{:?}", d.bbox);
}

#[test]
fn tagged_output_parses_as_plain_stream() {
    let s = generate(&preset("window_fps").unwrap()).unwrap();
    let bytes = write_tagged_ndjson(&s.noisy, &s.tag_strings());
    assert_eq!(parse_detections(&bytes, Format::Ndjson).unwrap(), s.noisy);
    let tags: Vec<ProvenanceTag> = s.tag_strings().iter().map(|t| t.parse().unwrap()).collect();
    assert_eq!(tags, s.tags);
}

#[test]
fn scenario_toml_round_trips() {
    let cfg = preset("occlusion_merge").unwrap();
    assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    assert!(matches!(ScenarioConfig::from_toml("bogus = 1"), Err(SynthError::Parse(_))));
}
