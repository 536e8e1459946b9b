//! Per-frame social-distancing assessment.
//!
//! Each detection is reduced to its box centroid. The nearest-neighbour
//! centroid distance within the frame decides the risk tier; DBSCAN cluster
//! labels are reported alongside as grouping context. All distances are in
//! raw image pixels.

mod dbscan;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dbscan::{dbscan, ClusterLabel};

use crate::ingest::{BoundingBox, Detection, DetectionStream, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistancingError {
    #[error("invalid distancing config: {0}")]
    InvalidConfig(String),
    #[error("detections span more than one frame ({0} and {1})")]
    MixedFrames(u64, u64),
    #[error("no detections to assess")]
    EmptyFrame,
}

pub fn centroid(bbox: &BoundingBox) -> Point {
    bbox.centroid()
}

/// Dense symmetric matrix of Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

pub fn pairwise_distances(points: &[Point]) -> DistanceMatrix {
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].distance(points[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistancingConfig {
    /// DBSCAN neighbourhood radius in pixels.
    pub eps: f64,
    pub min_pts: usize,
    pub danger_distance: f64,
    pub warn_distance: f64,
}

impl Default for DistancingConfig {
    fn default() -> Self {
        Self::with_thresholds(60.0, 120.0)
    }
}

impl DistancingConfig {
    /// Config with the given tier thresholds, `eps = warn_distance` and `min_pts = 2`.
    pub fn with_thresholds(danger_distance: f64, warn_distance: f64) -> Self {
        Self { eps: warn_distance, min_pts: 2, danger_distance, warn_distance }
    }

    pub fn validate(&self) -> Result<(), DistancingError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.danger_distance) {
            return Err(DistancingError::InvalidConfig(format!(
                "danger distance must be positive, got {}",
                self.danger_distance
            )));
        }
        if !(positive(self.warn_distance) && self.danger_distance < self.warn_distance) {
            return Err(DistancingError::InvalidConfig(format!(
                "warn distance ({}) must exceed danger distance ({})",
                self.warn_distance, self.danger_distance
            )));
        }
        if !positive(self.eps) {
            return Err(DistancingError::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.min_pts < 1 {
            return Err(DistancingError::InvalidConfig("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskTier {
    Safe,
    Warning,
    Danger,
}

impl RiskTier {
    /// Tier for a nearest-neighbour distance; `None` (alone in frame) is safe.
    pub fn from_nearest(distance: Option<f64>, config: &DistancingConfig) -> Self {
        match distance {
            Some(d) if d < config.danger_distance => RiskTier::Danger,
            Some(d) if d < config.warn_distance => RiskTier::Warning,
            _ => RiskTier::Safe,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RiskTier::Safe => "safe",
            RiskTier::Warning => "warning",
            RiskTier::Danger => "danger",
        }
    }

    /// Overlay stroke colour: green, amber or red.
    pub fn color(self) -> &'static str {
        match self {
            RiskTier::Safe => "#2e7d32",
            RiskTier::Warning => "#ffb300",
            RiskTier::Danger => "#d32f2f",
        }
    }
}

impl fmt::Display for RiskTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Assessment of every detection in one frame, in detection order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAssessment {
    pub frame_index: u64,
    pub centroids: Vec<Point>,
    pub cluster_labels: Vec<ClusterLabel>,
    pub nearest_neighbor_distance: Vec<Option<f64>>,
    pub tiers: Vec<RiskTier>,
}

#[derive(Serialize)]
struct DetectionRecord {
    index: usize,
    centroid: [f64; 2],
    cluster: ClusterLabel,
    nn_distance: Option<f64>,
    tier: RiskTier,
}

#[derive(Serialize)]
struct FrameRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    video_id: Option<&'a str>,
    frame: u64,
    detections: Vec<DetectionRecord>,
}

impl FrameAssessment {
    pub fn len(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    /// JSON object `{"frame":..,"detections":[..]}`; `video_id` is added
    /// as an extra key when given.
    pub fn to_json(&self, video_id: Option<&str>) -> String {
        let detections = (0..self.len())
            .map(|i| DetectionRecord {
                index: i,
                centroid: [self.centroids[i].x, self.centroids[i].y],
                cluster: self.cluster_labels[i],
                nn_distance: self.nearest_neighbor_distance[i],
                tier: self.tiers[i],
            })
            .collect();
        serde_json::to_string(&FrameRecord { video_id, frame: self.frame_index, detections })
            .expect("assessment serializes")
    }
}

/// Nearest-neighbour distance of each point to any other point.
pub fn nearest_neighbor_distances(points: &[Point]) -> Vec<Option<f64>> {
    let dist = pairwise_distances(points);
    (0..points.len())
        .map(|i| dist.row(i).iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).min_by(f64::total_cmp))
        .collect()
}

/// Grades every detection of a single frame.
pub fn classify_risk(detections: &[Detection], config: &DistancingConfig) -> Result<FrameAssessment, DistancingError> {
    config.validate()?;
    let first = detections.first().ok_or(DistancingError::EmptyFrame)?;
    if let Some(other) = detections.iter().find(|d| d.frame_index != first.frame_index) {
        return Err(DistancingError::MixedFrames(first.frame_index, other.frame_index));
    }
    let centroids: Vec<Point> = detections.iter().map(|d| centroid(&d.bbox)).collect();
    let nearest = nearest_neighbor_distances(&centroids);
    let tiers = nearest.iter().map(|&d| RiskTier::from_nearest(d, config)).collect();
    let cluster_labels = dbscan(&centroids, config.eps, config.min_pts)?;
    Ok(FrameAssessment {
        frame_index: first.frame_index,
        centroids,
        cluster_labels,
        nearest_neighbor_distance: nearest,
        tiers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TierCounts {
    pub safe: usize,
    pub warning: usize,
    pub danger: usize,
}

impl TierCounts {
    fn add(&mut self, tier: RiskTier) {
        match tier {
            RiskTier::Safe => self.safe += 1,
            RiskTier::Warning => self.warning += 1,
            RiskTier::Danger => self.danger += 1,
        }
    }
}

/// Assessments of the non-empty frames of a stream, plus a summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamAssessment {
    pub frames: Vec<FrameAssessment>,
    pub frame_count: u64,
    /// Frames in `0..frame_count` with no detection (omitted from `frames`).
    pub empty_frames: u64,
    pub tiers: TierCounts,
}

pub fn assess_stream(stream: &DetectionStream, config: &DistancingConfig) -> Result<StreamAssessment, DistancingError> {
    config.validate()?;
    let mut tiers = TierCounts::default();
    let frames = stream
        .frames()
        .map(|f| {
            let a = classify_risk(f.detections, config)?;
            a.tiers.iter().for_each(|&t| tiers.add(t));
            Ok(a)
        })
        .collect::<Result<Vec<_>, DistancingError>>()?;
    Ok(StreamAssessment {
        frame_count: stream.frame_count(),
        empty_frames: stream.frame_count() - frames.len() as u64,
        frames,
        tiers,
    })
}
