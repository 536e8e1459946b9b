//! Headcount accuracy as relative change, per journey and before/after
//! filtering.
//!
//! ```text
//! cargo run --example headcount_evaluation
//! ```

use sdtransit::metrics::{evaluate_series, RelativeChangeSeries};
use sdtransit::synth::{generate, preset};
use sdtransit::{apply_filter, compare_filtered, mean_abs_rc, relative_change, FilterConfig, HeadcountSeries};

fn main() {
    // (ground truth, predicted) over a stretch where the true count is constant.
    let journeys = [(13, 7), (7, 3), (4, 3), (8, 5), (8, 4), (3, 2), (3, 3), (3, 2), (4, 3), (5, 4)];
    let mut all = RelativeChangeSeries::default();
    for (i, &(y, x)) in journeys.iter().enumerate() {
        let rc = relative_change(y, x).unwrap();
        println!("journey {:>2}: {y:>2} counted as {x:>2}, RC = {:+.4}", i + 1, rc);
        all = all.concat(&RelativeChangeSeries::from_counts([(i as u64, y, x)]));
    }
    println!("mean |RC| = {:.2}%", mean_abs_rc(&all).unwrap());

    // Frame-level series with a constant stretch.
    let gt = HeadcountSeries::from_pairs((0..40).map(|f| (13, Some(if f % 10 == 0 { 8 } else { 7 }))));
    let summary = evaluate_series("V01", &gt, Some("0..40".parse().unwrap())).unwrap();
    println!(
        "V01: {:.2}% over {} frames, segments {:?}",
        summary.mean_abs_rc_pct, summary.frames_evaluated, summary.constant_segments
    );

    // The filter helps with transients and hurts a short-lived real passenger.
    for name in ["window_fps", "boarding_blip"] {
        let s = generate(&preset(name).unwrap()).unwrap();
        let k = if name == "window_fps" { 4 } else { 40 };
        let (after, _) = apply_filter(&s.noisy, &FilterConfig { min_persistence_frames: k, ..Default::default() });
        let cmp = compare_filtered(&s.headcounts, &s.noisy, &after, None).unwrap();
        println!(
            "{name} (K = {k}): {:.3}% -> {:.3}%, {} frames lost a true positive",
            cmp.before.mean_abs_rc_pct,
            cmp.after.mean_abs_rc_pct,
            cmp.true_positive_removal_frames.len()
        );
    }
}
