//! Seeded synthetic scenarios.
//!
//! A scenario places passengers on fixed seats and produces two streams: the
//! ground truth (one box per onboard passenger per frame) and a noisy
//! "detector" stream with dropout, centroid jitter, short-lived false
//! positives in window regions, occlusion merges and an optional stationary
//! false positive. Every noisy detection carries a [`ProvenanceTag`].
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(config.seed)`, so output is identical on every platform.
//! Draw order per frame: passengers in index order (detect, jitter x/y,
//! score), then the persistent false positive, then continuing transient
//! false positives, then spawns of new ones.

mod presets;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use presets::{preset, preset_names, scenario_presets};

use crate::ingest::{BoundingBox, Detection, DetectionStream, HeadcountSeries, Point, DEFAULT_FPS};

/// A new transient false positive is not placed within this many pixels
/// (per axis) of another one seen in the last [`TRANSIENT_SEPARATION_FRAMES`].
pub const TRANSIENT_SEPARATION_PX: f64 = 40.0;
pub const TRANSIENT_SEPARATION_FRAMES: u64 = 32;
const SPAWN_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot parse scenario file: {0}")]
    Parse(String),
}

/// Axis-aligned region of the frame in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassengerSpec {
    pub seat: usize,
    pub board_frame: u64,
    /// Exclusive.
    pub alight_frame: u64,
    #[serde(default = "one")]
    pub p_detect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeEvent {
    pub passengers: [usize; 2],
    pub start_frame: u64,
    /// Exclusive.
    pub end_frame: u64,
}

/// A stationary non-person detected as a person, such as an empty seat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistentFp {
    pub centroid: [f64; 2],
    pub width: f64,
    pub height: f64,
    #[serde(default = "one")]
    pub p_detect: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub video_id: String,
    pub seed: u64,
    pub frame_count: u64,
    pub fps: f64,
    pub frame_width: f64,
    pub frame_height: f64,
    pub label: String,
    /// Passenger box size in pixels.
    pub box_width: f64,
    pub box_height: f64,
    /// Seat centroids in pixels.
    pub seats: Vec<[f64; 2]>,
    pub passengers: Vec<PassengerSpec>,
    /// Centroid noise, uniform in `±jitter_px` per axis.
    pub jitter_px: f64,
    /// Noisy true-positive scores are uniform in `[tp_score_min, 1]`.
    pub tp_score_min: f64,
    /// Expected new transient false positives per frame.
    pub transient_fp_rate: f64,
    /// Inclusive `[min, max]` lifetime of a transient false positive, in frames.
    pub transient_fp_duration: [u32; 2],
    /// Regions transient false-positive centroids are drawn from.
    pub window_bands: Vec<Region>,
    pub merge_events: Vec<MergeEvent>,
    pub persistent_fp: Option<PersistentFp>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            video_id: "SYN".into(),
            seed: 0,
            frame_count: 0,
            fps: DEFAULT_FPS,
            frame_width: 704.0,
            frame_height: 576.0,
            label: "person".into(),
            box_width: 60.0,
            box_height: 100.0,
            seats: Vec::new(),
            passengers: Vec::new(),
            jitter_px: 0.0,
            tp_score_min: 1.0,
            transient_fp_rate: 0.0,
            transient_fp_duration: [1, 3],
            window_bands: Vec::new(),
            merge_events: Vec::new(),
            persistent_fp: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidConfig(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        toml::from_str(text).map_err(|e| SynthError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !finite_pos(self.fps) {
            return Err(invalid(format!("fps must be positive, got {}", self.fps)));
        }
        if !(finite_pos(self.box_width) && finite_pos(self.box_height)) {
            return Err(invalid("box size must be positive"));
        }
        if !(finite_pos(self.frame_width) && finite_pos(self.frame_height)) {
            return Err(invalid("frame size must be positive"));
        }
        if self.label.is_empty() {
            return Err(invalid("label must not be empty"));
        }
        if !(self.jitter_px.is_finite() && self.jitter_px >= 0.0) {
            return Err(invalid(format!("jitter_px must be non-negative, got {}", self.jitter_px)));
        }
        if !prob(self.tp_score_min) {
            return Err(invalid(format!("tp_score_min must lie in [0, 1], got {}", self.tp_score_min)));
        }
        if self.seats.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("seat coordinates must be finite"));
        }
        for (i, p) in self.passengers.iter().enumerate() {
            if p.seat >= self.seats.len() {
                return Err(invalid(format!("passenger {i}: seat {} does not exist", p.seat)));
            }
            if p.board_frame >= p.alight_frame {
                return Err(invalid(format!(
                    "passenger {i}: board_frame {} must be before alight_frame {}",
                    p.board_frame, p.alight_frame
                )));
            }
            if p.alight_frame > self.frame_count {
                return Err(invalid(format!(
                    "passenger {i}: alight_frame {} exceeds frame_count {}",
                    p.alight_frame, self.frame_count
                )));
            }
            if !prob(p.p_detect) {
                return Err(invalid(format!("passenger {i}: p_detect must lie in [0, 1], got {}", p.p_detect)));
            }
        }
        if !(self.transient_fp_rate.is_finite() && self.transient_fp_rate >= 0.0) {
            return Err(invalid("transient_fp_rate must be non-negative"));
        }
        let [dmin, dmax] = self.transient_fp_duration;
        if dmin == 0 || dmin > dmax {
            return Err(invalid(format!("transient_fp_duration [{dmin}, {dmax}] must satisfy 1 <= min <= max")));
        }
        if self.transient_fp_rate > 0.0 && self.window_bands.is_empty() {
            return Err(invalid("transient false positives need at least one window band"));
        }
        if self.window_bands.iter().any(|r| !(finite_pos(r.w) && finite_pos(r.h) && r.x >= 0.0 && r.y >= 0.0)) {
            return Err(invalid("window bands need non-negative origin and positive size"));
        }
        for (i, m) in self.merge_events.iter().enumerate() {
            let [a, b] = m.passengers;
            if a == b || a >= self.passengers.len() || b >= self.passengers.len() {
                return Err(invalid(format!("merge event {i}: needs two distinct existing passengers")));
            }
            if m.start_frame >= m.end_frame {
                return Err(invalid(format!("merge event {i}: start_frame must be before end_frame")));
            }
        }
        if let Some(fp) = &self.persistent_fp {
            if !(finite_pos(fp.width) && finite_pos(fp.height) && prob(fp.p_detect)) {
                return Err(invalid("persistent false positive needs positive size and p_detect in [0, 1]"));
            }
        }
        Ok(())
    }

    fn onboard(&self, passenger: usize, frame: u64) -> bool {
        let p = &self.passengers[passenger];
        (p.board_frame..p.alight_frame).contains(&frame)
    }
}

/// Where a noisy detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProvenanceTag {
    TruePositive(usize),
    /// Carries the id of the injected event; all frames of one event share it.
    TransientFp(usize),
    PersistentFp,
    MergedPair(usize, usize),
}

impl ProvenanceTag {
    pub fn is_true_positive(self) -> bool {
        matches!(self, ProvenanceTag::TruePositive(_))
    }
}

impl fmt::Display for ProvenanceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProvenanceTag::TruePositive(p) => write!(f, "tp:{p}"),
            ProvenanceTag::TransientFp(e) => write!(f, "transient_fp:{e}"),
            ProvenanceTag::PersistentFp => f.write_str("persistent_fp"),
            ProvenanceTag::MergedPair(a, b) => write!(f, "merged:{a}+{b}"),
        }
    }
}

impl FromStr for ProvenanceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown provenance tag `{s}`");
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad());
        if s == "persistent_fp" {
            return Ok(ProvenanceTag::PersistentFp);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "tp" => Ok(ProvenanceTag::TruePositive(num(rest)?)),
            "transient_fp" => Ok(ProvenanceTag::TransientFp(num(rest)?)),
            "merged" => {
                let (a, b) = rest.split_once('+').ok_or_else(bad)?;
                Ok(ProvenanceTag::MergedPair(num(a)?, num(b)?))
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for ProvenanceTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProvenanceTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Generator output. `tags[i]` describes `noisy.detections()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ground_truth: DetectionStream,
    pub noisy: DetectionStream,
    pub tags: Vec<ProvenanceTag>,
    pub headcounts: HeadcountSeries,
    /// Number of injected transient false-positive events.
    pub transient_events: usize,
}

impl Scenario {
    /// `tags` as strings, for [`crate::ingest::write_tagged_ndjson`].
    pub fn tag_strings(&self) -> Vec<String> {
        self.tags.iter().map(ToString::to_string).collect()
    }

    /// One `{"index":..,"frame":..,"tag":..}` line per noisy detection.
    pub fn tags_ndjson(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Line {
            index: usize,
            frame: u64,
            tag: ProvenanceTag,
        }
        let mut out = Vec::new();
        for (i, (d, &tag)) in self.noisy.detections().iter().zip(&self.tags).enumerate() {
            serde_json::to_writer(&mut out, &Line { index: i, frame: d.frame_index, tag }).expect("tag serializes");
            out.push(b'\n');
        }
        out
    }

    /// The noisy stream restricted to detections tagged as true positives.
    pub fn true_positives(&self) -> DetectionStream {
        let mut tags = self.tags.iter();
        self.noisy.retain(|_| tags.next().is_some_and(|t| t.is_true_positive()))
    }
}

struct Transient {
    id: usize,
    centre: Point,
    width: f64,
    height: f64,
    remaining: u32,
}

struct Generator<'a> {
    cfg: &'a ScenarioConfig,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn jitter(&mut self) -> (f64, f64) {
        let j = self.cfg.jitter_px;
        if j == 0.0 {
            return (0.0, 0.0);
        }
        (self.rng.random_range(-j..=j), self.rng.random_range(-j..=j))
    }

    fn tp_score(&mut self) -> f64 {
        let lo = self.cfg.tp_score_min;
        if lo >= 1.0 {
            1.0
        } else {
            self.rng.random_range(lo..=1.0)
        }
    }

    fn seat_centre(&self, passenger: usize) -> Point {
        let [x, y] = self.cfg.seats[self.cfg.passengers[passenger].seat];
        Point::new(x, y)
    }
}

/// Box of the given size centred on `c`, shifted right/down if it would
/// cross the top-left image border.
fn box_at(c: Point, w: f64, h: f64) -> BoundingBox {
    BoundingBox::new((c.x - w / 2.0).max(0.0), (c.y - h / 2.0).max(0.0), w, h).expect("positive size")
}

fn person(cfg: &ScenarioConfig, frame: u64, bbox: BoundingBox, score: f64) -> Detection {
    Detection::new(frame, bbox, score, cfg.label.clone()).expect("valid generated detection")
}

pub fn generate(config: &ScenarioConfig) -> Result<Scenario, SynthError> {
    config.validate()?;
    let cfg = config;
    let mut g = Generator { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed) };
    let (bw, bh) = (cfg.box_width, cfg.box_height);

    let mut truth = Vec::new();
    let mut noisy = Vec::new();
    let mut tags = Vec::new();
    let mut pairs = Vec::with_capacity(cfg.frame_count as usize);
    let mut transients: Vec<Transient> = Vec::new();
    // (centre, last frame) of every transient event, for spacing new ones.
    let mut history: Vec<(Point, u64)> = Vec::new();
    let [dmin, dmax] = cfg.transient_fp_duration;

    for t in 0..cfg.frame_count {
        let before = noisy.len();
        let onboard: Vec<usize> = (0..cfg.passengers.len()).filter(|&p| cfg.onboard(p, t)).collect();
        for &p in &onboard {
            truth.push(person(cfg, t, box_at(g.seat_centre(p), bw, bh), 1.0));
        }

        // partner[p] = Some(q) when p is merged with q this frame.
        let mut partner: Vec<Option<usize>> = vec![None; cfg.passengers.len()];
        for m in &cfg.merge_events {
            let [a, b] = m.passengers;
            let active = (m.start_frame..m.end_frame).contains(&t) && cfg.onboard(a, t) && cfg.onboard(b, t);
            if active && partner[a].is_none() && partner[b].is_none() {
                partner[a] = Some(b);
                partner[b] = Some(a);
            }
        }

        for &p in &onboard {
            match partner[p] {
                Some(q) if q < p => continue,
                Some(q) => {
                    let (dx, dy) = g.jitter();
                    let shift = |c: Point| Point::new(c.x + dx, c.y + dy);
                    let merged =
                        box_at(shift(g.seat_centre(p)), bw, bh).union(&box_at(shift(g.seat_centre(q)), bw, bh));
                    let score = g.tp_score();
                    noisy.push(person(cfg, t, merged, score));
                    tags.push(ProvenanceTag::MergedPair(p, q));
                }
                None => {
                    let detected = g.rng.random::<f64>() < cfg.passengers[p].p_detect;
                    let (dx, dy) = g.jitter();
                    let score = g.tp_score();
                    if detected {
                        let c = g.seat_centre(p);
                        noisy.push(person(cfg, t, box_at(Point::new(c.x + dx, c.y + dy), bw, bh), score));
                        tags.push(ProvenanceTag::TruePositive(p));
                    }
                }
            }
        }

        if let Some(fp) = &cfg.persistent_fp {
            let detected = g.rng.random::<f64>() < fp.p_detect;
            let (dx, dy) = g.jitter();
            if detected {
                let c = Point::new(fp.centroid[0] + dx, fp.centroid[1] + dy);
                noisy.push(person(cfg, t, box_at(c, fp.width, fp.height), g.rng.random_range(0.5..=0.9)));
                tags.push(ProvenanceTag::PersistentFp);
            }
        }

        transients.retain(|tr| tr.remaining > 0);
        for tr in &mut transients {
            let (dx, dy) = g.jitter();
            let c = Point::new(tr.centre.x + dx, tr.centre.y + dy);
            let score = g.rng.random_range(0.5..=0.9);
            noisy.push(person(cfg, t, box_at(c, tr.width, tr.height), score));
            tags.push(ProvenanceTag::TransientFp(tr.id));
            tr.remaining -= 1;
            history[tr.id].1 = t;
        }

        let rate = cfg.transient_fp_rate;
        let spawns = rate.floor() as usize + usize::from(rate.fract() > 0.0 && g.rng.random::<f64>() < rate.fract());
        for _ in 0..spawns {
            let mut placed = None;
            for _ in 0..SPAWN_ATTEMPTS {
                let band = cfg.window_bands[g.rng.random_range(0..cfg.window_bands.len())];
                let c = Point::new(band.x + g.rng.random::<f64>() * band.w, band.y + g.rng.random::<f64>() * band.h);
                let crowded = history.iter().any(|&(h, last)| {
                    last + TRANSIENT_SEPARATION_FRAMES >= t
                        && (h.x - c.x).abs() <= TRANSIENT_SEPARATION_PX
                        && (h.y - c.y).abs() <= TRANSIENT_SEPARATION_PX
                });
                if !crowded {
                    placed = Some(c);
                    break;
                }
            }
            let Some(centre) = placed else { continue };
            let duration = g.rng.random_range(dmin..=dmax).min((cfg.frame_count - t) as u32);
            let scale = g.rng.random_range(0.6..=1.0);
            let id = history.len();
            history.push((centre, t));
            let (dx, dy) = g.jitter();
            let (w, h) = (bw * scale, bh * scale);
            noisy.push(person(
                cfg,
                t,
                box_at(Point::new(centre.x + dx, centre.y + dy), w, h),
                g.rng.random_range(0.5..=0.9),
            ));
            tags.push(ProvenanceTag::TransientFp(id));
            transients.push(Transient { id, centre, width: w, height: h, remaining: duration - 1 });
        }

        pairs.push((onboard.len() as u64, Some((noisy.len() - before) as u64)));
    }

    let stream =
        |dets| DetectionStream::new(cfg.video_id.clone(), cfg.fps, cfg.frame_count, dets).expect("frames ascend");
    Ok(Scenario {
        ground_truth: stream(truth),
        noisy: stream(noisy),
        tags,
        headcounts: HeadcountSeries::from_pairs(pairs),
        transient_events: history.len(),
    })
}
