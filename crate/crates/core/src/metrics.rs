//! Headcount accuracy.
//!
//! The per-frame relative change is `RC = (y - x) / y` for ground truth `y`
//! and predicted count `x`: positive values mean under-counting, negative
//! values mean over-counting (false positives). Frames with `y = 0` are
//! defined as `RC = 0` when `x = 0` and excluded otherwise. RC is kept as a
//! fraction and only scaled to percent in reports.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{DetectionStream, HeadcountSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no frame has a defined relative change")]
    EmptySeries,
    #[error("frame domains differ: {0}")]
    FrameDomainMismatch(String),
    #[error("frame {0} has no predicted count")]
    MissingPrediction(u64),
    #[error("invalid frame range `{0}` (expected START..END with START < END)")]
    InvalidRange(String),
}

/// `(y - x) / y`, `0` when both are zero, `None` when only `y` is zero.
pub fn relative_change(y: u64, x: u64) -> Option<f64> {
    match (y, x) {
        (0, 0) => Some(0.0),
        (0, _) => None,
        _ => Some((y as f64 - x as f64) / y as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RcEntry {
    pub frame: u64,
    pub gt: u64,
    pub pred: u64,
    pub rc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelativeChangeSeries {
    entries: Vec<RcEntry>,
}

impl RelativeChangeSeries {
    /// Builds the series from `(frame, ground_truth, predicted)` triples.
    pub fn from_counts(counts: impl IntoIterator<Item = (u64, u64, u64)>) -> Self {
        let entries = counts
            .into_iter()
            .map(|(frame, gt, pred)| RcEntry { frame, gt, pred, rc: relative_change(gt, pred) })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[RcEntry] {
        &self.entries
    }

    pub fn frames_evaluated(&self) -> usize {
        self.entries.iter().filter(|e| e.rc.is_some()).count()
    }

    /// Frames with zero ground truth but a positive prediction.
    pub fn frames_excluded(&self) -> usize {
        self.entries.len() - self.frames_evaluated()
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self { entries: self.entries.iter().chain(&other.entries).copied().collect() }
    }
}

/// Mean of `|RC|` over defined frames, in percent.
pub fn mean_abs_rc(series: &RelativeChangeSeries) -> Result<f64, MetricsError> {
    let (sum, n) = series.entries.iter().filter_map(|e| e.rc).fold((0.0, 0usize), |(s, n), rc| (s + rc.abs(), n + 1));
    if n == 0 {
        return Err(MetricsError::EmptySeries);
    }
    Ok(sum / n as f64 * 100.0)
}

/// Detections per frame over `0..frame_count`.
pub fn headcount(stream: &DetectionStream) -> Vec<u64> {
    let mut counts = vec![0u64; stream.frame_count() as usize];
    for d in stream.detections() {
        counts[d.frame_index as usize] += 1;
    }
    counts
}

/// Half-open frame interval `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRange {
    pub start: u64,
    pub end: u64,
}

impl FrameRange {
    pub fn new(start: u64, end: u64) -> Result<Self, MetricsError> {
        if start >= end {
            return Err(MetricsError::InvalidRange(format!("{start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, frame: u64) -> bool {
        (self.start..self.end).contains(&frame)
    }
}

impl fmt::Display for FrameRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for FrameRange {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MetricsError::InvalidRange(s.to_owned());
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        Self::new(start, end).map_err(|_| bad())
    }
}

/// A maximal run of frames with constant ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConstantSegment {
    pub start: u64,
    /// Exclusive.
    pub end: u64,
    pub ground_truth: u64,
    /// Most frequent prediction in the run; ties go to the smaller count.
    pub modal_prediction: u64,
}

pub fn constant_segments(entries: &[RcEntry]) -> Vec<ConstantSegment> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let gt = entries[i].gt;
        let mut j = i + 1;
        while j < entries.len() && entries[j].gt == gt && entries[j].frame == entries[j - 1].frame + 1 {
            j += 1;
        }
        let mut preds: Vec<u64> = entries[i..j].iter().map(|e| e.pred).collect();
        preds.sort_unstable();
        let mut best = (0usize, preds[0]);
        let mut k = 0;
        while k < preds.len() {
            let run = preds[k..].iter().take_while(|&&p| p == preds[k]).count();
            if run > best.0 {
                best = (run, preds[k]);
            }
            k += run;
        }
        out.push(ConstantSegment {
            start: entries[i].frame,
            end: entries[j - 1].frame + 1,
            ground_truth: gt,
            modal_prediction: best.1,
        });
        i = j;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub video_id: String,
    pub mean_abs_rc_pct: f64,
    pub frames_evaluated: usize,
    pub frames_excluded: usize,
    pub constant_segments: Vec<ConstantSegment>,
    pub per_frame: Vec<RcEntry>,
}

impl EvaluationSummary {
    pub fn from_series(video_id: impl Into<String>, series: &RelativeChangeSeries) -> Result<Self, MetricsError> {
        Ok(Self {
            video_id: video_id.into(),
            mean_abs_rc_pct: mean_abs_rc(series)?,
            frames_evaluated: series.frames_evaluated(),
            frames_excluded: series.frames_excluded(),
            constant_segments: constant_segments(series.entries()),
            per_frame: series.entries().to_vec(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// `frame,gt,pred,rc` rows; `rc` is blank where undefined.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["video_id", "frame", "gt", "pred", "rc"]).expect("in-memory write");
        for e in &self.per_frame {
            w.write_record([
                self.video_id.clone(),
                e.frame.to_string(),
                e.gt.to_string(),
                e.pred.to_string(),
                e.rc.map_or(String::new(), |rc| rc.to_string()),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

fn check_dense(gt: &HeadcountSeries, frame_count: u64) -> Result<(), MetricsError> {
    if gt.covers_dense(frame_count) {
        return Ok(());
    }
    let span = match (gt.entries().first(), gt.entries().last()) {
        (Some(a), Some(b)) => format!("frames {}..{} ({} entries)", a.frame, b.frame + 1, gt.len()),
        _ => "no frames".to_owned(),
    };
    Err(MetricsError::FrameDomainMismatch(format!(
        "ground truth covers {span}, predictions cover frames 0..{frame_count}"
    )))
}

fn restrict(gt: &HeadcountSeries, range: Option<FrameRange>) -> impl Iterator<Item = &crate::ingest::HeadcountEntry> {
    gt.entries().iter().filter(move |e| range.is_none_or(|r| r.contains(e.frame)))
}

/// Scores per-frame predicted counts against ground truth. `predicted` is
/// indexed by frame and must cover the same frames as `gt`.
pub fn evaluate(
    video_id: &str,
    gt: &HeadcountSeries,
    predicted: &[u64],
    range: Option<FrameRange>,
) -> Result<EvaluationSummary, MetricsError> {
    check_dense(gt, predicted.len() as u64)?;
    let series = RelativeChangeSeries::from_counts(
        restrict(gt, range).map(|e| (e.frame, e.ground_truth, predicted[e.frame as usize])),
    );
    EvaluationSummary::from_series(video_id, &series)
}

/// Scores the `predicted` column carried by the headcount series itself.
pub fn evaluate_series(
    video_id: &str,
    gt: &HeadcountSeries,
    range: Option<FrameRange>,
) -> Result<EvaluationSummary, MetricsError> {
    let triples = restrict(gt, range)
        .map(|e| e.predicted.map(|p| (e.frame, e.ground_truth, p)).ok_or(MetricsError::MissingPrediction(e.frame)))
        .collect::<Result<Vec<_>, _>>()?;
    EvaluationSummary::from_series(video_id, &RelativeChangeSeries::from_counts(triples))
}

/// Before/after evaluation of the persistence filter against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterComparison {
    pub before: EvaluationSummary,
    pub after: EvaluationSummary,
    /// `after - before`, percentage points. Negative means the filter helped.
    pub delta_mean_abs_rc_pct: f64,
    /// Frames where the filtered count fell below both the raw count and the
    /// ground truth, i.e. the filter removed true positives.
    pub true_positive_removal_frames: Vec<u64>,
    /// Frames counted exactly before filtering and under-counted after.
    pub regressed_frames: Vec<u64>,
}

impl FilterComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}

pub fn compare_filtered(
    gt: &HeadcountSeries,
    before: &DetectionStream,
    after: &DetectionStream,
    range: Option<FrameRange>,
) -> Result<FilterComparison, MetricsError> {
    if before.frame_count() != after.frame_count() {
        return Err(MetricsError::FrameDomainMismatch(format!(
            "before covers frames 0..{}, after covers frames 0..{}",
            before.frame_count(),
            after.frame_count()
        )));
    }
    let before_counts = headcount(before);
    let after_counts = headcount(after);
    let before_summary = evaluate(before.video_id(), gt, &before_counts, range)?;
    let after_summary = evaluate(after.video_id(), gt, &after_counts, range)?;

    let mut removal = Vec::new();
    let mut regressed = Vec::new();
    for e in restrict(gt, range) {
        let (b, a) = (before_counts[e.frame as usize], after_counts[e.frame as usize]);
        if a < b.min(e.ground_truth) {
            removal.push(e.frame);
        }
        if b == e.ground_truth && a < e.ground_truth {
            regressed.push(e.frame);
        }
    }
    Ok(FilterComparison {
        delta_mean_abs_rc_pct: after_summary.mean_abs_rc_pct - before_summary.mean_abs_rc_pct,
        before: before_summary,
        after: after_summary,
        true_positive_removal_frames: removal,
        regressed_frames: regressed,
    })
}
