//! Remove window reflections and passers-by with the persistence filter and
//! check the result against the generator's provenance tags.
//!
//! ```text
//! cargo run --example persistence_filter
//! ```

use sdtransit::filter::build_tracks;
use sdtransit::synth::{generate, preset};
use sdtransit::{apply_filter, FilterConfig};

fn main() {
    let scenario = generate(&preset("window_fps").unwrap()).unwrap();
    println!(
        "window_fps: {} detections, {} injected transient events",
        scenario.noisy.len(),
        scenario.transient_events
    );

    for k in [4, 40, 300] {
        let cfg = FilterConfig { min_persistence_frames: k, ..FilterConfig::default() };
        let (kept, report) = apply_filter(&scenario.noisy, &cfg);
        println!(
            "K = {k:>3}: {} tracks, {} suppressed, {} detections removed, exact = {}",
            report.tracks.len(),
            report.suppressed.len(),
            report.removed_detections,
            kept == scenario.true_positives()
        );
    }

    // Tolerance decides how much jitter a track absorbs.
    for tol in [2.0, 10.0, 15.0] {
        let cfg = FilterConfig { tolerance_px: tol, ..FilterConfig::default() };
        println!("tolerance ±{tol} px: {} tracks", build_tracks(&scenario.noisy, &cfg).len());
    }

    let cfg = FilterConfig { min_persistence_frames: 2, ..FilterConfig::default() };
    if let Err(e) = cfg.validate(false) {
        println!("K = 2 without override: {e}");
    }
}
