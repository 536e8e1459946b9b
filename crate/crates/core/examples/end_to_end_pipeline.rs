//! simulate -> filter -> assess -> evaluate through the `sdtransit` command
//! line, on every preset. Each step's summary goes to stderr.
//!
//! ```text
//! cargo run --example end_to_end_pipeline
//! ```

use sdtransit::synth::preset_names;

fn run(args: &[&str]) {
    // Same entry point as the binary, in-process.
    let code = sdtransit::cli::run_from(std::iter::once("sdtransit").chain(args.iter().copied()));
    assert_eq!(code, 0, "sdtransit {}", args.join(" "));
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    for name in preset_names() {
        let dir = root.path().join(name);
        let d = |f: &str| dir.join(f).to_string_lossy().into_owned();
        println!("== {name}");
        run(&["simulate", "--preset", name, "--out-dir", &d("")]);
        run(&[
            "filter",
            &d("noisy.ndjson"),
            "-o",
            &d("filtered.ndjson"),
            "--min-frames",
            "4",
            "--report",
            &d("report.json"),
        ]);
        run(&["assess", &d("filtered.ndjson"), "-o", &d("assessment.ndjson")]);
        run(&[
            "evaluate",
            "--ground-truth",
            &d("headcounts.csv"),
            "--predictions",
            &d("noisy.ndjson"),
            "--after",
            &d("filtered.ndjson"),
            "-o",
            &d("comparison.json"),
        ]);
    }
}
