//! Generate every built-in scenario, or a custom one from TOML.
//!
//! ```text
//! cargo run --example simulate_scenarios
//! ```

use std::collections::BTreeMap;

use sdtransit::synth::{generate, scenario_presets, ScenarioConfig};

const CUSTOM: &str = r#"
video_id = "tram-3"
seed = 42
frame_count = 240
jitter_px = 3.0
tp_score_min = 0.7
transient_fp_rate = 0.1
seats = [[150.0, 400.0], [210.0, 400.0], [500.0, 380.0]]
window_bands = [{ x = 0.0, y = 40.0, w = 704.0, h = 90.0 }]

[[passengers]]
seat = 0
board_frame = 0
alight_frame = 240

[[passengers]]
seat = 1
board_frame = 80
alight_frame = 200
p_detect = 0.9

[[merge_events]]
passengers = [0, 1]
start_frame = 100
end_frame = 140
"#;

fn main() {
    for (name, cfg) in scenario_presets() {
        let s = generate(&cfg).unwrap();
        let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
        for tag in s.tag_strings() {
            *kinds.entry(tag.split(':').next().unwrap().to_owned()).or_default() += 1;
        }
        println!("{name:<20} gt {:>5}  noisy {:>5}  {kinds:?}", s.ground_truth.len(), s.noisy.len());
    }

    let cfg = ScenarioConfig::from_toml(CUSTOM).unwrap();
    let s = generate(&cfg).unwrap();
    println!("\n{}: {} noisy detections, first tags {:?}", cfg.video_id, s.noisy.len(), &s.tag_strings()[..4]);
    assert_eq!(generate(&cfg).unwrap(), s, "same seed, same scenario");
}
