//! Batch analytics for person detections from onboard public-transport CCTV.
//!
//! The pipeline takes per-frame detection streams (see [`ingest`]), removes
//! short-lived false positives with a temporal persistence filter
//! ([`filter`]), grades inter-passenger distancing per frame
//! ([`distancing`]) and scores headcount accuracy against ground truth
//! ([`metrics`]). [`synth`] generates seeded scenarios with provenance tags
//! for testing, [`overlay`] draws tier-coloured SVGs, and [`cli`] wires
//! everything into the `sdtransit` binary.

pub mod cli;
pub mod distancing;
pub mod filter;
pub mod ingest;
pub mod metrics;
pub mod overlay;
pub mod synth;

pub use distancing::{assess_stream, classify_risk, DistancingConfig, FrameAssessment, RiskTier};
pub use filter::{apply_filter, FilterConfig, FilterReport};
pub use ingest::{BoundingBox, Detection, DetectionStream, Format, HeadcountSeries, Point};
pub use metrics::{compare_filtered, mean_abs_rc, relative_change, EvaluationSummary};
pub use synth::{generate, ScenarioConfig};
