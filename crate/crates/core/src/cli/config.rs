//! `--config` file and flag resolution.
//!
//! The config file is TOML; every key is optional and flags win over it:
//!
//! ```toml
//! score_threshold = 0.5
//! label = "person"
//! allow_out_of_range = false
//! frame_width = 704
//! frame_height = 576
//!
//! [filter]
//! tolerance_px = 10.0
//! min_persistence_frames = 40
//! gap_frames = 8
//!
//! [distancing]
//! danger_distance = 60.0
//! warn_distance = 120.0
//! eps = 120.0        # defaults to warn_distance
//! min_pts = 2
//! ```

use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::distancing::DistancingConfig;
use crate::filter::FilterConfig;
use crate::overlay::Canvas;

pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_LABEL: &str = "person";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub tolerance_px: Option<f64>,
    pub min_persistence_frames: Option<u32>,
    pub gap_frames: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistancingSection {
    pub danger_distance: Option<f64>,
    pub warn_distance: Option<f64>,
    pub eps: Option<f64>,
    pub min_pts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub score_threshold: Option<f64>,
    pub label: Option<String>,
    pub allow_out_of_range: Option<bool>,
    pub frame_width: Option<f64>,
    pub frame_height: Option<f64>,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub distancing: DistancingSection,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Pre-analytics selection: label match then minimum score.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub label: String,
    pub score_threshold: f64,
}

pub fn resolve_selection(
    file: &ConfigFile,
    label: Option<&str>,
    threshold: Option<f64>,
) -> Result<Selection, CliError> {
    let score_threshold = threshold.or(file.score_threshold).unwrap_or(DEFAULT_SCORE_THRESHOLD);
    if !(0.0..=1.0).contains(&score_threshold) {
        return Err(CliError::Config(format!("--score-threshold must lie in [0, 1], got {score_threshold}")));
    }
    let label = label.map(str::to_owned).or_else(|| file.label.clone()).unwrap_or_else(|| DEFAULT_LABEL.to_owned());
    if label.is_empty() {
        return Err(CliError::Config("--label must not be empty".into()));
    }
    Ok(Selection { label, score_threshold })
}

pub fn resolve_filter(
    file: &ConfigFile,
    tolerance_px: Option<f64>,
    min_frames: Option<u32>,
    gap_frames: Option<u32>,
    allow_out_of_range: bool,
) -> Result<FilterConfig, CliError> {
    let d = FilterConfig::default();
    let cfg = FilterConfig {
        tolerance_px: tolerance_px.or(file.filter.tolerance_px).unwrap_or(d.tolerance_px),
        min_persistence_frames: min_frames.or(file.filter.min_persistence_frames).unwrap_or(d.min_persistence_frames),
        gap_frames: gap_frames.or(file.filter.gap_frames).unwrap_or(d.gap_frames),
    };
    let allow = allow_out_of_range || file.allow_out_of_range.unwrap_or(false);
    cfg.validate(allow).map_err(|e| {
        let flag = match e {
            crate::filter::FilterError::InvalidTolerance(_) => "--tolerance-px",
            crate::filter::FilterError::ZeroGap => "--gap-frames",
            _ => "--min-frames",
        };
        let hint = if matches!(e, crate::filter::FilterError::PersistenceOutOfRange(_)) {
            " (add --allow-out-of-range to accept it)"
        } else {
            ""
        };
        CliError::Config(format!("{flag}: {e}{hint}"))
    })?;
    Ok(cfg)
}

pub fn resolve_distancing(
    file: &ConfigFile,
    danger_px: Option<f64>,
    warn_px: Option<f64>,
    eps: Option<f64>,
    min_pts: Option<usize>,
) -> Result<DistancingConfig, CliError> {
    let d = DistancingConfig::default();
    let s = &file.distancing;
    let danger = danger_px.or(s.danger_distance).unwrap_or(d.danger_distance);
    let warn = warn_px.or(s.warn_distance).unwrap_or(d.warn_distance);
    let eps = eps.or(s.eps).unwrap_or(warn);
    let min_pts = min_pts.or(s.min_pts).unwrap_or(d.min_pts);
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(danger) {
        return Err(CliError::Config(format!("--danger-px must be positive, got {danger}")));
    }
    if !positive(warn) || warn <= danger {
        return Err(CliError::Config(format!("--warn-px ({warn}) must exceed --danger-px ({danger})")));
    }
    if !positive(eps) {
        return Err(CliError::Config(format!("--eps must be positive, got {eps}")));
    }
    if min_pts < 1 {
        return Err(CliError::Config("--min-pts must be at least 1".into()));
    }
    let cfg = DistancingConfig { eps, min_pts, danger_distance: danger, warn_distance: warn };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn resolve_canvas(file: &ConfigFile, width: Option<f64>, height: Option<f64>) -> Result<Canvas, CliError> {
    let d = Canvas::default();
    let canvas = Canvas {
        width: width.or(file.frame_width).unwrap_or(d.width),
        height: height.or(file.frame_height).unwrap_or(d.height),
    };
    if !(canvas.width > 0.0 && canvas.height > 0.0) {
        return Err(CliError::Config("--frame-width and --frame-height must be positive".into()));
    }
    Ok(canvas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigFile = toml::from_str(
            "score_threshold = 0.3\n[filter]\nmin_persistence_frames = 4\n[distancing]\nwarn_distance = 200.0\n",
        )
        .unwrap();
        let sel = resolve_selection(&file, None, None).unwrap();
        assert_eq!(sel, Selection { label: "person".into(), score_threshold: 0.3 });
        assert_eq!(resolve_selection(&file, Some("car"), Some(0.9)).unwrap().score_threshold, 0.9);

        let f = resolve_filter(&file, None, None, None, false).unwrap();
        assert_eq!(f.min_persistence_frames, 4);
        assert_eq!(resolve_filter(&file, None, Some(50), None, false).unwrap().min_persistence_frames, 50);

        let d = resolve_distancing(&file, None, None, None, None).unwrap();
        assert_eq!((d.danger_distance, d.warn_distance, d.eps), (60.0, 200.0, 200.0));
        assert_eq!(resolve_distancing(&file, None, None, Some(80.0), None).unwrap().eps, 80.0);
    }

    #[test]
    fn errors_name_the_flag() {
        let file = ConfigFile::default();
        let err = resolve_filter(&file, None, Some(1), None, false).unwrap_err().to_string();
        assert!(err.contains("--min-frames") && err.contains("--allow-out-of-range"), "{err}");
        assert!(resolve_filter(&file, None, Some(1), None, true).is_ok());
        let err = resolve_distancing(&file, Some(100.0), Some(50.0), None, None).unwrap_err().to_string();
        assert!(err.contains("--warn-px"), "{err}");
        let err = resolve_distancing(&file, None, None, None, Some(0)).unwrap_err().to_string();
        assert!(err.contains("--min-pts"), "{err}");
        assert!(resolve_selection(&file, None, Some(1.5)).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ConfigFile>("[filter]\nwindow = 3\n").is_err());
    }
}
