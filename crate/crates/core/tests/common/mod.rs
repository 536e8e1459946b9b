#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdtransit::distancing::ClusterLabel;
use sdtransit::synth::{MergeEvent, PassengerSpec, PersistentFp, Region};
use sdtransit::{BoundingBox, Detection, DetectionStream, Point, ScenarioConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LABELS: [&str; 4] = ["person", "bag", "bus \"stop\", 2", "ünïcode"];

/// Arbitrary valid stream: full-precision coordinates and scores, awkward labels.
pub fn random_stream(r: &mut impl Rng, video_id: &str, max_frames: u64, max_dets: usize) -> DetectionStream {
    let frame_count = r.random_range(1..=max_frames);
    let n = r.random_range(0..=max_dets);
    let dets = (0..n)
        .map(|_| {
            let bbox = BoundingBox::new(
                r.random::<f64>() * 700.0,
                r.random::<f64>() * 570.0,
                r.random::<f64>() * 200.0 + 1e-3,
                r.random::<f64>() * 300.0 + 1e-3,
            )
            .unwrap();
            let label = LABELS[r.random_range(0..LABELS.len())];
            Detection::new(r.random_range(0..frame_count), bbox, r.random::<f64>(), label).unwrap()
        })
        .collect();
    let fps = if r.random_bool(0.5) { 4.0 } else { r.random_range(0.5..60.0) };
    let explicit = if r.random_bool(0.5) { Some(frame_count) } else { None };
    DetectionStream::from_unsorted(video_id, fps, explicit, dets).unwrap()
}

/// Small random scenario: stationary passengers, optional transients, merges and a seat FP.
pub fn random_scenario(r: &mut impl Rng) -> ScenarioConfig {
    let frame_count = r.random_range(20..=200);
    let n_seats = r.random_range(1..=8);
    let seats: Vec<[f64; 2]> =
        (0..n_seats).map(|_| [r.random_range(60.0..640.0), r.random_range(200.0..520.0)]).collect();
    let passengers: Vec<PassengerSpec> = (0..r.random_range(0..=n_seats))
        .map(|seat| {
            let board_frame = r.random_range(0..frame_count - 1);
            let alight_frame = r.random_range(board_frame + 1..=frame_count);
            PassengerSpec { seat, board_frame, alight_frame, p_detect: r.random_range(0.6..=1.0) }
        })
        .collect();
    let merge_events = if passengers.len() >= 2 && r.random_bool(0.3) {
        let start = r.random_range(0..frame_count - 1);
        vec![MergeEvent { passengers: [0, 1], start_frame: start, end_frame: r.random_range(start + 1..=frame_count) }]
    } else {
        Vec::new()
    };
    let with_transients = r.random_bool(0.7);
    ScenarioConfig {
        video_id: "rand".into(),
        seed: r.random(),
        frame_count,
        seats,
        passengers,
        jitter_px: r.random_range(0.0..6.0),
        tp_score_min: 0.6,
        transient_fp_rate: if with_transients { r.random_range(0.0..0.3) } else { 0.0 },
        transient_fp_duration: [1, r.random_range(1..=6)],
        window_bands: vec![Region { x: 20.0, y: 40.0, w: 660.0, h: 100.0 }],
        merge_events,
        persistent_fp: r.random_bool(0.2).then_some(PersistentFp {
            centroid: [350.0, 550.0],
            width: 40.0,
            height: 40.0,
            p_detect: 0.8,
        }),
        ..ScenarioConfig::default()
    }
}

/// Reference DBSCAN by explicit transitive closure over the core graph.
///
/// Clusters are numbered by lowest member index; a border point joins the
/// cluster of its lowest-index core neighbour.
pub fn dbscan_reference(points: &[Point], eps: f64, min_pts: usize) -> Vec<ClusterLabel> {
    let n = points.len();
    let near = |i: usize, j: usize| points[i].distance(points[j]) <= eps;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();

    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && (i == j || near(i, j));
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    // Representative of a core point: lowest core index it reaches.
    let rep = |i: usize| (0..n).find(|&j| reach[i][j]).unwrap();
    let owner: Vec<Option<usize>> =
        (0..n).map(|i| if core[i] { Some(rep(i)) } else { (0..n).find(|&j| core[j] && near(i, j)).map(rep) }).collect();

    // Number clusters by lowest member index (which may be a border point).
    let mut lowest: Vec<(usize, usize)> = Vec::new();
    for (i, o) in owner.iter().enumerate() {
        if let Some(o) = *o {
            if !lowest.iter().any(|&(r, _)| r == o) {
                lowest.push((o, i));
            }
        }
    }
    owner
        .iter()
        .map(|o| match o {
            None => ClusterLabel::Noise,
            Some(o) => ClusterLabel::Cluster(lowest.iter().position(|&(r, _)| r == *o).unwrap()),
        })
        .collect()
}

/// Integer-grid points so distance ties with `eps` actually occur.
pub fn random_points(r: &mut impl Rng, max_n: usize) -> Vec<Point> {
    let n = r.random_range(0..=max_n);
    let span = r.random_range(5..=60) as f64;
    (0..n).map(|_| Point::new(r.random_range(0..=span as i64) as f64, r.random_range(0..=span as i64) as f64)).collect()
}

/// Per-frame counts over `0..frame_count`.
pub fn counts(stream: &DetectionStream) -> Vec<u64> {
    sdtransit::metrics::headcount(stream)
}

/// True when `sub` is `sup` with some detections removed, order preserved.
pub fn is_subsequence(sub: &DetectionStream, sup: &DetectionStream) -> bool {
    let mut it = sup.detections().iter();
    sub.detections().iter().all(|d| it.any(|e| e == d))
}
