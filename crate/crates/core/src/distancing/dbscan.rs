//! Density-based clustering over 2-D centroids.
//!
//! A point is a core point when at least `min_pts` points, itself included,
//! lie within `eps` (inclusive). Core points within `eps` of each other share
//! a cluster. A non-core point within `eps` of a core point is a border point
//! and joins the cluster of its lowest-index core neighbour. Everything else
//! is noise. Cluster ids are numbered by their lowest member index.

use serde::{Serialize, Serializer};

use super::{pairwise_distances, DistancingError};
use crate::ingest::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClusterLabel {
    Cluster(usize),
    Noise,
}

impl ClusterLabel {
    pub fn cluster(self) -> Option<usize> {
        match self {
            ClusterLabel::Cluster(id) => Some(id),
            ClusterLabel::Noise => None,
        }
    }

    pub fn is_noise(self) -> bool {
        self == ClusterLabel::Noise
    }
}

impl Serialize for ClusterLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.cluster().serialize(s)
    }
}

pub fn dbscan(points: &[Point], eps: f64, min_pts: usize) -> Result<Vec<ClusterLabel>, DistancingError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(DistancingError::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    if min_pts < 1 {
        return Err(DistancingError::InvalidConfig("min_pts must be at least 1".into()));
    }
    let n = points.len();
    let dist = pairwise_distances(points);
    let neighbours: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| dist.get(i, j) <= eps).collect()).collect();
    let is_core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    // Expand clusters from core points in ascending index order.
    let mut raw: Vec<Option<usize>> = vec![None; n];
    let mut clusters = 0usize;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !is_core[seed] || raw[seed].is_some() {
            continue;
        }
        let id = clusters;
        clusters += 1;
        raw[seed] = Some(id);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbours[p] {
                if is_core[q] && raw[q].is_none() {
                    raw[q] = Some(id);
                    stack.push(q);
                }
            }
        }
    }
    for p in 0..n {
        if !is_core[p] {
            raw[p] = neighbours[p].iter().find(|&&q| is_core[q]).and_then(|&q| raw[q]);
        }
    }

    // Renumber by lowest member index.
    let mut remap = vec![usize::MAX; clusters];
    let mut next = 0;
    Ok(raw
        .into_iter()
        .map(|label| match label {
            Some(id) => {
                if remap[id] == usize::MAX {
                    remap[id] = next;
                    next += 1;
                }
                ClusterLabel::Cluster(remap[id])
            }
            None => ClusterLabel::Noise,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClusterLabel::{Cluster, Noise};

    fn pts(xy: &[(f64, f64)]) -> Vec<Point> {
        xy.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn empty_input() {
        assert!(dbscan(&[], 1.0, 2).unwrap().is_empty());
    }

    #[test]
    fn pair_and_outlier() {
        let labels = dbscan(&pts(&[(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)]), 2.0, 2).unwrap();
        assert_eq!(labels, vec![Cluster(0), Cluster(0), Noise]);
    }

    #[test]
    fn eps_is_inclusive() {
        let labels = dbscan(&pts(&[(0.0, 0.0), (3.0, 4.0)]), 5.0, 2).unwrap();
        assert_eq!(labels, vec![Cluster(0), Cluster(0)]);
    }

    #[test]
    fn min_pts_one_makes_every_point_core() {
        let labels = dbscan(&pts(&[(0.0, 0.0), (100.0, 0.0)]), 1.0, 1).unwrap();
        assert_eq!(labels, vec![Cluster(0), Cluster(1)]);
        let labels = dbscan(&pts(&[(0.0, 0.0), (5.0, 5.0), (9.0, 1.0)]), 1000.0, 1).unwrap();
        assert!(labels.iter().all(|&l| l == Cluster(0)));
    }

    #[test]
    fn chain_is_density_connected() {
        let labels = dbscan(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]), 1.0, 2).unwrap();
        assert!(labels.iter().all(|&l| l == Cluster(0)));
    }

    #[test]
    fn border_point_takes_lowest_core_neighbour() {
        // Index 0 sits between two clusters and is within eps of the cores at
        // index 1 (x=4) and index 6 (x=1); the lower index wins.
        let p = pts(&[(2.5, 0.0), (4.0, 0.0), (4.5, 0.0), (5.0, 0.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        let labels = dbscan(&p, 1.5, 4).unwrap();
        assert_eq!(labels, vec![Cluster(0), Cluster(0), Cluster(0), Cluster(0), Cluster(1), Cluster(1), Cluster(1)]);
    }

    #[test]
    fn ids_follow_lowest_member() {
        // The cluster seeded second (core at index 4) owns border point 0,
        // so it is numbered first.
        let p = pts(&[(99.5, 0.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (101.0, 0.0), (101.5, 0.0), (102.0, 0.0)]);
        let labels = dbscan(&p, 1.5, 3).unwrap();
        assert_eq!(labels, vec![Cluster(0), Cluster(1), Cluster(1), Cluster(1), Cluster(0), Cluster(0), Cluster(0)]);
    }

    #[test]
    fn invalid_config() {
        assert!(dbscan(&[], 0.0, 2).is_err());
        assert!(dbscan(&[], -1.0, 2).is_err());
        assert!(dbscan(&[], f64::NAN, 2).is_err());
        assert!(dbscan(&[], 1.0, 0).is_err());
    }

    #[test]
    fn label_serializes_as_nullable_id() {
        assert_eq!(serde_json::to_string(&Cluster(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Noise).unwrap(), "null");
    }
}
