use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Frame rate assumed when a stream does not declare one.
pub const DEFAULT_FPS: f64 = 4.0;

/// A domain value failed one of its construction invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("{axis} coordinate must be non-negative, got {value}")]
    NegativeCoordinate { axis: &'static str, value: f64 },
    #[error("{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("score must lie in [0, 1], got {0}")]
    ScoreOutOfRange(f64),
    #[error("label must not be empty")]
    EmptyLabel,
    #[error("fps must be positive, got {0}")]
    NonPositiveFps(f64),
    #[error("frame {frame} lies outside frame_count {frame_count}")]
    FrameOutOfRange { frame: u64, frame_count: u64 },
    #[error("detections are not sorted by frame index")]
    Unsorted,
}

/// A point in image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned box in pixels, stored as top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    width: f64,
    height: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, width: f64, height: f64) -> Result<Self, ValidationError> {
        for (field, v) in [("x", x_min), ("y", y_min), ("w", width), ("h", height)] {
            if !v.is_finite() {
                return Err(ValidationError::NonFinite { field });
            }
        }
        if width <= 0.0 {
            return Err(ValidationError::NonPositiveWidth(width));
        }
        if height <= 0.0 {
            return Err(ValidationError::NonPositiveHeight(height));
        }
        if x_min < 0.0 {
            return Err(ValidationError::NegativeCoordinate { axis: "x", value: x_min });
        }
        if y_min < 0.0 {
            return Err(ValidationError::NegativeCoordinate { axis: "y", value: y_min });
        }
        Ok(Self { x_min, y_min, width, height })
    }

    /// Builds a box from its top-left and bottom-right corners.
    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, ValidationError> {
        Self::new(x1, y1, x2 - x1, y2 - y1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.width
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.height
    }

    pub fn centroid(&self) -> Point {
        Point::new(self.x_min + self.width / 2.0, self.y_min + self.height / 2.0)
    }

    /// Smallest box covering both `self` and `other`.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        let x1 = self.x_min.min(other.x_min);
        let y1 = self.y_min.min(other.y_min);
        let x2 = self.x_max().max(other.x_max());
        let y2 = self.y_max().max(other.y_max());
        BoundingBox { x_min: x1, y_min: y1, width: x2 - x1, height: y2 - y1 }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max() && p.y >= self.y_min && p.y <= self.y_max()
    }
}

/// One bounding box reported by a detector for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    pub bbox: BoundingBox,
    score: f64,
    label: String,
}

impl Detection {
    pub fn new(
        frame_index: u64,
        bbox: BoundingBox,
        score: f64,
        label: impl Into<String>,
    ) -> Result<Self, ValidationError> {
        let label = label.into();
        if !(0.0..=1.0).contains(&score) {
            return Err(ValidationError::ScoreOutOfRange(score));
        }
        if label.is_empty() {
            return Err(ValidationError::EmptyLabel);
        }
        Ok(Self { frame_index, bbox, score, label })
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn centroid(&self) -> Point {
        self.bbox.centroid()
    }
}

/// All detections of one video, sorted by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionStream {
    video_id: String,
    fps: f64,
    frame_count: u64,
    detections: Vec<Detection>,
}

impl Default for DetectionStream {
    fn default() -> Self {
        Self { video_id: String::new(), fps: DEFAULT_FPS, frame_count: 0, detections: Vec::new() }
    }
}

impl DetectionStream {
    /// Builds a stream from already sorted detections.
    pub fn new(
        video_id: impl Into<String>,
        fps: f64,
        frame_count: u64,
        detections: Vec<Detection>,
    ) -> Result<Self, ValidationError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(ValidationError::NonPositiveFps(fps));
        }
        if detections.windows(2).any(|w| w[0].frame_index > w[1].frame_index) {
            return Err(ValidationError::Unsorted);
        }
        if let Some(last) = detections.last() {
            if last.frame_index >= frame_count {
                return Err(ValidationError::FrameOutOfRange { frame: last.frame_index, frame_count });
            }
        }
        Ok(Self { video_id: video_id.into(), fps, frame_count, detections })
    }

    /// Sorts `detections` stably by frame and sizes `frame_count` to fit them.
    pub fn from_unsorted(
        video_id: impl Into<String>,
        fps: f64,
        frame_count: Option<u64>,
        mut detections: Vec<Detection>,
    ) -> Result<Self, ValidationError> {
        detections.sort_by_key(|d| d.frame_index);
        let needed = detections.last().map_or(0, |d| d.frame_index + 1);
        Self::new(video_id, fps, frame_count.unwrap_or(needed), detections)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    pub fn detections(&self) -> &[Detection] {
        &self.detections
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    /// Same metadata, different detections. The caller keeps the order sorted.
    pub(crate) fn with_detections(&self, detections: Vec<Detection>) -> Self {
        debug_assert!(detections.windows(2).all(|w| w[0].frame_index <= w[1].frame_index));
        Self { video_id: self.video_id.clone(), fps: self.fps, frame_count: self.frame_count, detections }
    }

    /// Keeps the detections for which `keep` returns true, preserving order.
    pub fn retain(&self, mut keep: impl FnMut(&Detection) -> bool) -> Self {
        self.with_detections(self.detections.iter().filter(|d| keep(d)).cloned().collect())
    }

    /// Iterates `(frame_index, detections)` over frames that hold at least one detection.
    pub fn frames(&self) -> FrameGroups<'_> {
        FrameGroups { rest: &self.detections, offset: 0 }
    }
}

/// Iterator over per-frame slices of a [`DetectionStream`].
pub struct FrameGroups<'a> {
    rest: &'a [Detection],
    offset: usize,
}

/// Detections of a single frame, plus the stream index of the first one.
#[derive(Debug, Clone, Copy)]
pub struct FrameSlice<'a> {
    pub frame_index: u64,
    pub first_index: usize,
    pub detections: &'a [Detection],
}

impl<'a> Iterator for FrameGroups<'a> {
    type Item = FrameSlice<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let first = self.rest.first()?;
        let frame_index = first.frame_index;
        let len = self.rest.iter().take_while(|d| d.frame_index == frame_index).count();
        let (head, tail) = self.rest.split_at(len);
        let slice = FrameSlice { frame_index, first_index: self.offset, detections: head };
        self.rest = tail;
        self.offset += len;
        Some(slice)
    }
}

/// Ground-truth and (optionally) predicted count for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadcountEntry {
    pub frame: u64,
    pub ground_truth: u64,
    pub predicted: Option<u64>,
}

/// Per-frame headcounts keyed by frame index, ascending and unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HeadcountSeries {
    entries: Vec<HeadcountEntry>,
}

impl HeadcountSeries {
    /// Returns `None` when two entries share a frame.
    pub fn from_entries(mut entries: Vec<HeadcountEntry>) -> Option<Self> {
        entries.sort_by_key(|e| e.frame);
        if entries.windows(2).any(|w| w[0].frame == w[1].frame) {
            return None;
        }
        Some(Self { entries })
    }

    /// Dense series over frames `0..n` built from paired counts.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Option<u64>)>) -> Self {
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (ground_truth, predicted))| HeadcountEntry { frame: i as u64, ground_truth, predicted })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[HeadcountEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, frame: u64) -> Option<&HeadcountEntry> {
        self.entries.binary_search_by_key(&frame, |e| e.frame).ok().map(|i| &self.entries[i])
    }

    /// Replaces the predicted column with counts indexed by frame.
    /// Frames beyond `counts` get `None`.
    pub fn with_predictions(&self, counts: &[u64]) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| HeadcountEntry { predicted: counts.get(e.frame as usize).copied(), ..*e })
            .collect();
        Self { entries }
    }

    /// True when the series covers exactly the frames `0..frame_count`.
    pub fn covers_dense(&self, frame_count: u64) -> bool {
        self.entries.len() as u64 == frame_count && self.entries.iter().enumerate().all(|(i, e)| e.frame == i as u64)
    }
}
