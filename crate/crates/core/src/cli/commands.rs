use std::path::Path;

use log::info;
use serde::Serialize;

use super::config::{self, ConfigFile, Selection};
use super::{
    format_for, read_input, write_output, AssessArgs, CliError, EvaluateArgs, FilterArgs, ReportFormat, SimulateArgs,
    ValidateArgs,
};
use crate::distancing::{assess_stream, DistancingConfig, StreamAssessment};
use crate::filter::{apply_filter, FilterConfig, FilterReport};
use crate::ingest::{
    filter_by_label, filter_by_score, parse_detection_streams, parse_detections, parse_headcounts,
    write_detection_streams, write_detections, write_headcounts, write_tagged_ndjson, DetectionStream, Format,
    IngestError,
};
use crate::metrics::{self, MetricsError};
use crate::overlay::{overlay_file_name, render_frame_svg, Canvas};
use crate::synth::{self, SynthError};

fn data_error(path: &Path, e: IngestError) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::InvalidRange(_) => CliError::Config(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

fn load_streams(path: &Path, format: Option<Format>) -> Result<Vec<DetectionStream>, CliError> {
    let bytes = read_input(path)?;
    parse_detection_streams(&bytes, format_for(path, format)).map_err(|e| data_error(path, e))
}

fn select(stream: &DetectionStream, sel: &Selection) -> DetectionStream {
    filter_by_score(&filter_by_label(stream, &sel.label), sel.score_threshold)
}

/// Runs `f` over every stream on its own thread, returning results in input order.
fn per_video<T, F>(streams: &[DetectionStream], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&DetectionStream) -> T + Sync,
{
    if streams.len() <= 1 {
        return streams.iter().map(&f).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = streams.iter().map(|s| scope.spawn(|| f(s))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Serialize)]
struct ValidationSummary {
    videos: usize,
    frames: u64,
    detections: usize,
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let mut first_error: Option<CliError> = None;
    let mut failed = 0;
    for path in &args.inputs {
        let outcome = read_input(path).and_then(|bytes| {
            parse_detection_streams(&bytes, format_for(path, args.format)).map_err(|e| data_error(path, e))
        });
        match outcome {
            Ok(streams) => {
                let summary = ValidationSummary {
                    videos: streams.len(),
                    frames: streams.iter().map(|s| s.frame_count()).sum(),
                    detections: streams.iter().map(|s| s.len()).sum(),
                };
                println!(
                    "{}: ok, {} videos, {} frames, {} detections",
                    path.display(),
                    summary.videos,
                    summary.frames,
                    summary.detections
                );
            }
            Err(e) => {
                eprintln!("error: {e}");
                failed += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        None => Ok(()),
        Some(e) => Err(e.with_message(format!("{failed} of {} inputs failed validation", args.inputs.len()))),
    }
}

pub fn filter(args: &FilterArgs, file: &ConfigFile) -> Result<(), CliError> {
    let sel = config::resolve_selection(file, args.selection.label.as_deref(), args.selection.score_threshold)?;
    let cfg: FilterConfig =
        config::resolve_filter(file, args.tolerance_px, args.min_frames, args.gap_frames, args.allow_out_of_range)?;
    let format = format_for(&args.input, args.format);
    let streams = load_streams(&args.input, Some(format))?;
    let results: Vec<(DetectionStream, FilterReport)> = per_video(&streams, |s| apply_filter(&select(s, &sel), &cfg));

    let out_format = if super::is_std(&args.output) { format } else { format_for(&args.output, args.format) };
    let filtered: Vec<DetectionStream> = results.iter().map(|(s, _)| s.clone()).collect();
    write_output(&args.output, &write_detection_streams(&filtered, out_format))?;

    if let Some(report_path) = &args.report {
        let json = if results.len() == 1 {
            results[0].1.to_json()
        } else {
            let by_video: serde_json::Map<String, serde_json::Value> = streams
                .iter()
                .zip(&results)
                .map(|(s, (_, r))| (s.video_id().to_owned(), serde_json::to_value(r).expect("report serializes")))
                .collect();
            serde_json::to_string_pretty(&by_video).expect("report serializes")
        };
        write_output(report_path, format!("{json}\n").as_bytes())?;
    }
    for (s, (_, r)) in streams.iter().zip(&results) {
        eprintln!(
            "{}: removed {} detections ({} of {} tracks suppressed)",
            s.video_id(),
            r.removed_detections,
            r.suppressed.len(),
            r.tracks.len()
        );
    }
    Ok(())
}

fn assessment_lines(stream: &DetectionStream, assessment: &StreamAssessment) -> String {
    let mut out = String::new();
    for frame in &assessment.frames {
        out.push_str(&frame.to_json(Some(stream.video_id())));
        out.push('\n');
    }
    out
}

pub fn assess(args: &AssessArgs, file: &ConfigFile) -> Result<(), CliError> {
    let sel = config::resolve_selection(file, args.selection.label.as_deref(), args.selection.score_threshold)?;
    let cfg: DistancingConfig = config::resolve_distancing(file, args.danger_px, args.warn_px, args.eps, args.min_pts)?;
    let canvas: Canvas = config::resolve_canvas(file, args.frame_width, args.frame_height)?;
    let streams: Vec<DetectionStream> =
        load_streams(&args.input, args.format)?.iter().map(|s| select(s, &sel)).collect();

    let assessments = per_video(&streams, |s| assess_stream(s, &cfg))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let body: String = streams.iter().zip(&assessments).map(|(s, a)| assessment_lines(s, a)).collect();
    write_output(&args.output, body.as_bytes())?;

    if let Some(dir) = &args.overlay_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (stream, assessment) in streams.iter().zip(&assessments) {
            for (slice, frame) in stream.frames().zip(&assessment.frames) {
                debug_assert_eq!(slice.frame_index, frame.frame_index);
                let svg = render_frame_svg(stream.video_id(), slice.detections, frame, canvas);
                write_output(&dir.join(overlay_file_name(stream.video_id(), frame.frame_index)), svg.as_bytes())?;
            }
        }
    }
    for (s, a) in streams.iter().zip(&assessments) {
        eprintln!(
            "{}: {} frames assessed, {} empty; safe {}, warning {}, danger {}",
            s.video_id(),
            a.frames.len(),
            a.empty_frames,
            a.tiers.safe,
            a.tiers.warning,
            a.tiers.danger
        );
    }
    Ok(())
}

fn load_single(path: &Path, format: Option<Format>, sel: &Selection) -> Result<DetectionStream, CliError> {
    let bytes = read_input(path)?;
    let stream = parse_detections(&bytes, format_for(path, format)).map_err(|e| data_error(path, e))?;
    Ok(select(&stream, sel))
}

#[derive(Serialize)]
struct ComparisonRow {
    frame: u64,
    gt: u64,
    before: u64,
    after: u64,
    rc_before: Option<f64>,
    rc_after: Option<f64>,
}

pub fn evaluate(args: &EvaluateArgs, file: &ConfigFile) -> Result<(), CliError> {
    let sel = config::resolve_selection(file, args.selection.label.as_deref(), args.selection.score_threshold)?;
    let gt_bytes = read_input(&args.ground_truth)?;
    let gt = parse_headcounts(&gt_bytes).map_err(|e| data_error(&args.ground_truth, e))?;

    let report: Vec<u8> = match (&args.predictions, &args.after) {
        (None, _) => {
            let summary = metrics::evaluate_series("", &gt, args.frames).map_err(metrics_error)?;
            render_summary(&summary, args.report_format)
        }
        (Some(pred_path), None) => {
            let stream = load_single(pred_path, args.format, &sel)?;
            let summary = metrics::evaluate(stream.video_id(), &gt, &metrics::headcount(&stream), args.frames)
                .map_err(metrics_error)?;
            render_summary(&summary, args.report_format)
        }
        (Some(before_path), Some(after_path)) => {
            let before = load_single(before_path, args.format, &sel)?;
            let after = load_single(after_path, args.format, &sel)?;
            let cmp = metrics::compare_filtered(&gt, &before, &after, args.frames).map_err(metrics_error)?;
            eprintln!(
                "mean abs RC before {:.2}%, after {:.2}% ({:+.2} pp); {} frames lost true positives",
                cmp.before.mean_abs_rc_pct,
                cmp.after.mean_abs_rc_pct,
                cmp.delta_mean_abs_rc_pct,
                cmp.true_positive_removal_frames.len()
            );
            match args.report_format {
                ReportFormat::Json => format!("{}\n", cmp.to_json()).into_bytes(),
                ReportFormat::Csv => {
                    let mut w =
                        csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                    for (b, a) in cmp.before.per_frame.iter().zip(&cmp.after.per_frame) {
                        w.serialize(ComparisonRow {
                            frame: b.frame,
                            gt: b.gt,
                            before: b.pred,
                            after: a.pred,
                            rc_before: b.rc,
                            rc_after: a.rc,
                        })
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    }
                    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?
                }
            }
        }
    };
    match &args.output {
        Some(path) => write_output(path, &report),
        None => write_output(Path::new("-"), &report),
    }
}

fn render_summary(summary: &metrics::EvaluationSummary, format: ReportFormat) -> Vec<u8> {
    eprintln!(
        "mean abs RC {:.2}% over {} frames ({} excluded)",
        summary.mean_abs_rc_pct, summary.frames_evaluated, summary.frames_excluded
    );
    match format {
        ReportFormat::Json => format!("{}\n", summary.to_json()).into_bytes(),
        ReportFormat::Csv => summary.to_csv(),
    }
}

fn synth_error(e: SynthError) -> CliError {
    CliError::Config(e.to_string())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.list {
        for name in synth::preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let mut cfg = match (&args.preset, &args.scenario) {
        (Some(name), _) => synth::preset(name).map_err(|e| {
            let known: Vec<_> = synth::preset_names().collect();
            CliError::Config(format!("{e}; known presets: {}", known.join(", ")))
        })?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            synth::ScenarioConfig::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError::Config("either --preset or --scenario is required".into())),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let scenario = synth::generate(&cfg).map_err(synth_error)?;
    let dir = args.out_dir.as_deref().ok_or_else(|| CliError::Config("--out-dir is required".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let ext = args.format.extension();
    write_output(&dir.join(format!("ground_truth.{ext}")), &write_detections(&scenario.ground_truth, args.format))?;
    let noisy = match args.format {
        Format::Ndjson => write_tagged_ndjson(&scenario.noisy, &scenario.tag_strings()),
        Format::Csv => write_detections(&scenario.noisy, Format::Csv),
    };
    write_output(&dir.join(format!("noisy.{ext}")), &noisy)?;
    write_output(&dir.join("tags.ndjson"), &scenario.tags_ndjson())?;
    write_output(&dir.join("headcounts.csv"), &write_headcounts(&scenario.headcounts))?;
    write_output(&dir.join("scenario.toml"), cfg.to_toml().as_bytes())?;
    info!("wrote scenario `{}` to {}", cfg.video_id, dir.display());
    eprintln!(
        "{}: {} frames, {} ground-truth and {} noisy detections, {} transient false-positive events",
        cfg.video_id,
        cfg.frame_count,
        scenario.ground_truth.len(),
        scenario.noisy.len(),
        scenario.transient_events
    );
    Ok(())
}
