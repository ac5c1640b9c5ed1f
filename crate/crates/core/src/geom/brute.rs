//! Brute-force reference scans for the neighbor queries and FPS.
//!
//! These define the correctness contract for the grid-accelerated paths:
//! same distance arithmetic, same (distance, index) ordering, so results
//! must match bit for bit.

use super::{NeighborList, Point3};

pub fn knn(points: &[Point3], query: &Point3, k: usize) -> NeighborList {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| ((p - query).norm_squared(), i))
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.truncate(k.min(points.len()));
    NeighborList {
        indices: all.iter().map(|&(_, i)| i).collect(),
        distances: all.iter().map(|&(d2, _)| d2.sqrt()).collect(),
    }
}

pub fn radius_neighbors(
    points: &[Point3],
    query: &Point3,
    r: f64,
    max_count: usize,
) -> NeighborList {
    let r2 = r * r;
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let d2 = (p - query).norm_squared();
            (d2 <= r2).then_some((d2, i))
        })
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.truncate(max_count);
    NeighborList {
        indices: all.iter().map(|&(_, i)| i).collect(),
        distances: all.iter().map(|&(d2, _)| d2.sqrt()).collect(),
    }
}

pub fn farthest_point_sample(points: &[Point3], m: usize, seed_index: usize) -> Vec<usize> {
    let mut chosen = vec![seed_index];
    let mut min_d2: Vec<f64> = points
        .iter()
        .map(|p| (p - points[seed_index]).norm_squared())
        .collect();
    while chosen.len() < m {
        let mut best = 0usize;
        let mut best_d2 = f64::NEG_INFINITY;
        for (i, &d2) in min_d2.iter().enumerate() {
            if d2 > best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        chosen.push(best);
        for (i, d2) in min_d2.iter_mut().enumerate() {
            *d2 = d2.min((points[i] - points[best]).norm_squared());
        }
    }
    chosen
}
