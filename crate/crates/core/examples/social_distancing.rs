//! Grade distancing per frame: nearest-neighbour tiers and DBSCAN groups.
//!
//! ```text
//! cargo run --example social_distancing
//! ```

use sdtransit::distancing::{dbscan, DistancingConfig};
use sdtransit::synth::{generate, preset};
use sdtransit::{assess_stream, classify_risk, BoundingBox, Detection, Point};

fn person(cx: f64, cy: f64) -> Detection {
    Detection::new(0, BoundingBox::new(cx - 20.0, cy - 40.0, 40.0, 80.0).unwrap(), 0.9, "person").unwrap()
}

fn main() {
    // Three passengers on a line: 100 px, then 200 px apart.
    let cfg = DistancingConfig::with_thresholds(50.0, 150.0);
    let frame = [person(100.0, 300.0), person(200.0, 300.0), person(400.0, 300.0)];
    let a = classify_risk(&frame, &cfg).unwrap();
    for i in 0..a.len() {
        println!("passenger {i}: nearest {:?} px -> {}", a.nearest_neighbor_distance[i], a.tiers[i]);
    }
    println!("{}", a.to_json(Some("demo")));

    let points = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(10.0, 0.0)];
    println!("dbscan eps=2 min_pts=2: {:?}", dbscan(&points, 2.0, 2).unwrap());

    let scenario = generate(&preset("crowded_train").unwrap()).unwrap();
    let summary = assess_stream(&scenario.noisy, &DistancingConfig::default()).unwrap();
    let t = summary.tiers;
    println!(
        "crowded_train: {} frames, safe {}, warning {}, danger {}",
        summary.frames.len(),
        t.safe,
        t.warning,
        t.danger
    );
}
