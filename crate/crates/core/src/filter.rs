//! Temporal persistence filter.
//!
//! Detections are first associated into tracks by centroid proximity, sweeping
//! frames in ascending order. A track stays open while it has been seen within
//! the last `gap_frames` frames; a detection may join an open track when its
//! centroid lies within `tolerance_px` of the track's last centroid on both
//! axes. Tracks observed fewer than `min_persistence_frames` times are treated
//! as false positives and their detections are dropped.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{DetectionStream, Point};

/// Lower end of the studied persistence window.
pub const MIN_STUDIED_PERSISTENCE: u32 = 4;
/// Upper end of the studied persistence window.
pub const MAX_STUDIED_PERSISTENCE: u32 = 300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("tolerance_px must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("min_persistence_frames must be at least 1")]
    ZeroPersistence,
    #[error("gap_frames must be at least 1")]
    ZeroGap,
    #[error("min_persistence_frames {0} is outside the studied range [{MIN_STUDIED_PERSISTENCE}, {MAX_STUDIED_PERSISTENCE}]")]
    PersistenceOutOfRange(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Per-axis centroid tolerance in pixels.
    pub tolerance_px: f64,
    /// Appearances a track needs to be kept (inclusive).
    pub min_persistence_frames: u32,
    /// Longest unseen interval, in frames, before a track is closed.
    pub gap_frames: u32,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { tolerance_px: 10.0, min_persistence_frames: 40, gap_frames: 8 }
    }
}

impl FilterConfig {
    /// Checks the config. A persistence threshold outside the studied
    /// 4..=300 window is an error unless `allow_out_of_range` is set, in
    /// which case it is logged as a warning.
    pub fn validate(&self, allow_out_of_range: bool) -> Result<(), FilterError> {
        if !(self.tolerance_px.is_finite() && self.tolerance_px > 0.0) {
            return Err(FilterError::InvalidTolerance(self.tolerance_px));
        }
        if self.min_persistence_frames == 0 {
            return Err(FilterError::ZeroPersistence);
        }
        if self.gap_frames == 0 {
            return Err(FilterError::ZeroGap);
        }
        let k = self.min_persistence_frames;
        if !(MIN_STUDIED_PERSISTENCE..=MAX_STUDIED_PERSISTENCE).contains(&k) {
            if !allow_out_of_range {
                return Err(FilterError::PersistenceOutOfRange(k));
            }
            warn!("min_persistence_frames {k} is outside the studied range [4, 300]");
        }
        Ok(())
    }
}

/// Detections of one putative object across frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub track_id: usize,
    /// `(frame_index, index into the stream's detections)`, frames strictly increasing.
    pub observations: Vec<(u64, usize)>,
    pub last_centroid: Point,
}

impl Track {
    pub fn appearance_count(&self) -> usize {
        self.observations.len()
    }

    pub fn first_frame(&self) -> u64 {
        self.observations[0].0
    }

    pub fn last_frame(&self) -> u64 {
        self.observations[self.observations.len() - 1].0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub id: usize,
    pub first: u64,
    pub last: u64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FilterReport {
    pub confirmed: Vec<usize>,
    pub suppressed: Vec<usize>,
    pub removed_detections: usize,
    pub tracks: Vec<TrackSummary>,
}

impl FilterReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Associates every detection of `stream` with exactly one track.
///
/// Per frame, all `(track, detection)` pairs within tolerance are ranked by
/// Euclidean centroid distance, then track id, then detection order, and
/// matched greedily one-to-one. Unmatched detections open new tracks.
pub fn build_tracks(stream: &DetectionStream, config: &FilterConfig) -> Vec<Track> {
    let tol = config.tolerance_px;
    let gap = u64::from(config.gap_frames);
    let mut tracks: Vec<Track> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut det_taken: Vec<bool> = Vec::new();

    for frame in stream.frames() {
        let t = frame.frame_index;
        open.retain(|&id| t - tracks[id].last_frame() <= gap);

        let centroids: Vec<Point> = frame.detections.iter().map(|d| d.centroid()).collect();
        candidates.clear();
        for &id in &open {
            let last = tracks[id].last_centroid;
            for (j, c) in centroids.iter().enumerate() {
                if (c.x - last.x).abs() <= tol && (c.y - last.y).abs() <= tol {
                    candidates.push((c.distance(last), id, j));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        det_taken.clear();
        det_taken.resize(centroids.len(), false);
        let mut track_taken: Vec<usize> = Vec::new();
        for &(_, id, j) in &candidates {
            if det_taken[j] || track_taken.contains(&id) {
                continue;
            }
            det_taken[j] = true;
            track_taken.push(id);
            let track = &mut tracks[id];
            track.observations.push((t, frame.first_index + j));
            track.last_centroid = centroids[j];
        }

        for (j, taken) in det_taken.iter().enumerate() {
            if !taken {
                let id = tracks.len();
                tracks.push(Track {
                    track_id: id,
                    observations: vec![(t, frame.first_index + j)],
                    last_centroid: centroids[j],
                });
                open.push(id);
            }
        }
    }
    tracks
}

/// Splits tracks into confirmed (`count >= min_persistence_frames`) and suppressed.
pub fn confirm_tracks(tracks: &[Track], config: &FilterConfig) -> FilterReport {
    let k = config.min_persistence_frames as usize;
    let mut report = FilterReport::default();
    for track in tracks {
        let count = track.appearance_count();
        if count >= k {
            report.confirmed.push(track.track_id);
        } else {
            report.suppressed.push(track.track_id);
            report.removed_detections += count;
        }
        report.tracks.push(TrackSummary {
            id: track.track_id,
            first: track.first_frame(),
            last: track.last_frame(),
            count,
        });
    }
    report
}

/// Runs the two-pass filter: build and confirm tracks over the whole stream,
/// then keep only detections that belong to confirmed tracks.
pub fn apply_filter(stream: &DetectionStream, config: &FilterConfig) -> (DetectionStream, FilterReport) {
    let tracks = build_tracks(stream, config);
    let report = confirm_tracks(&tracks, config);
    let mut keep = vec![false; stream.len()];
    for &id in &report.confirmed {
        for &(_, i) in &tracks[id].observations {
            keep[i] = true;
        }
    }
    let mut flags = keep.into_iter();
    let filtered = stream.retain(|_| flags.next().unwrap_or(false));
    (filtered, report)
}
