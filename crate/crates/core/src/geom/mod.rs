//! Point-cloud primitives shared by every pipeline stage: nearest-neighbor
//! queries, farthest-point downsampling, local-PCA normals and curvature,
//! and centering.
//!
//! Neighbor queries are grid-accelerated internally; their correctness
//! contract is exact index equality (tie rules included) with the
//! brute-force scans in [`brute`].

mod grid;
mod io;
mod normals;

pub mod brute;

pub use grid::PointGrid;
pub use io::{read_aopc, write_aopc, write_ply};
pub use normals::estimate_normals_curvature;

use crate::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Coordinate frame a cloud lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    World,
    Camera,
}

/// Triangle hit record: triangle index within the hit link plus barycentric
/// coordinates of the hit point (third coordinate implied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceId {
    pub triangle: u32,
    pub bary: [f64; 2],
}

/// Positions plus optional per-point attributes. The universal exchange type.
///
/// All optional attribute arrays, when present, match `points` in length;
/// normals are unit within 1e-9 and curvature lies in `[0, 1]`
/// (checked by [`PointCloud::validate`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub normals: Option<Vec<Vec3>>,
    pub curvature: Option<Vec<f64>>,
    pub link_id: Option<Vec<u32>>,
    pub surface_id: Option<Vec<SurfaceId>>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn from_points(points: Vec<Point3>) -> Self {
        PointCloud {
            points,
            normals: None,
            curvature: None,
            link_id: None,
            surface_id: None,
            frame: Frame::World,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::invalid("non-finite point coordinate"));
            }
        }
        let n = self.points.len();
        if let Some(ns) = &self.normals {
            if ns.len() != n {
                return Err(Error::LengthMismatch(ns.len(), n));
            }
            for v in ns {
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("normal is not unit length"));
                }
            }
        }
        if let Some(cs) = &self.curvature {
            if cs.len() != n {
                return Err(Error::LengthMismatch(cs.len(), n));
            }
            if cs.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::invalid("curvature outside [0, 1]"));
            }
        }
        if let Some(ls) = &self.link_id {
            if ls.len() != n {
                return Err(Error::LengthMismatch(ls.len(), n));
            }
        }
        if let Some(ss) = &self.surface_id {
            if ss.len() != n {
                return Err(Error::LengthMismatch(ss.len(), n));
            }
        }
        Ok(())
    }

    /// Keep only the listed indices, in the listed order, across all attributes.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let pick = |idx: &[usize]| idx.iter().map(|&i| self.points[i]).collect::<Vec<_>>();
        PointCloud {
            points: pick(indices),
            normals: self
                .normals
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            curvature: self
                .curvature
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            link_id: self
                .link_id
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            surface_id: self
                .surface_id
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            frame: self.frame,
        }
    }
}

/// Result of a neighbor query: indices into the queried cloud with their
/// distances in meters, ascending, ties broken by lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `min(k, |cloud|)` nearest points to `query` by Euclidean distance,
/// ties broken by smaller index.
pub fn knn(cloud: &PointCloud, query: &Point3, k: usize) -> Result<NeighborList> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let grid = PointGrid::build(&cloud.points);
    Ok(grid.knn(&cloud.points, query, k))
}

/// All points within distance `r` of `query` (inclusive), truncated to the
/// nearest `max_count`, ascending distance.
pub fn radius_neighbors(
    cloud: &PointCloud,
    query: &Point3,
    r: f64,
    max_count: usize,
) -> Result<NeighborList> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    if r < 0.0 {
        return Err(Error::invalid("radius must be >= 0"));
    }
    let grid = PointGrid::build(&cloud.points);
    Ok(grid.radius_neighbors(&cloud.points, query, r, max_count))
}

/// Deterministic greedy farthest-point sampling starting at `seed_index`.
///
/// The first element is `seed_index`; each subsequent element maximizes the
/// minimum distance to the chosen set, ties to lower index.
pub fn farthest_point_sample(cloud: &PointCloud, m: usize, seed_index: usize) -> Result<Vec<usize>> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "m must be in 1..={} (got {})",
            n, m
        )));
    }
    if seed_index >= n {
        return Err(Error::invalid("seed_index out of range"));
    }
    let pts = &cloud.points;
    let mut chosen = Vec::with_capacity(m);
    chosen.push(seed_index);
    let mut min_d2: Vec<f64> = pts
        .iter()
        .map(|p| (p - pts[seed_index]).norm_squared())
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
        let pb = pts[best];
        for (i, d2) in min_d2.iter_mut().enumerate() {
            let cand = (pts[i] - pb).norm_squared();
            if cand < *d2 {
                *d2 = cand;
            }
        }
    }
    Ok(chosen)
}

/// Translate the cloud so its centroid sits at the origin; returns the
/// translated cloud and the removed centroid.
pub fn center_at_mean(cloud: &PointCloud) -> Result<(PointCloud, Point3)> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = Vec3::zeros();
    for p in &cloud.points {
        sum += p.coords;
    }
    let centroid = Point3::from(sum / cloud.len() as f64);
    let mut out = cloud.clone();
    for p in &mut out.points {
        *p -= centroid.coords;
    }
    Ok((out, centroid))
}

/// Inverse of [`center_at_mean`]: add a translation back to every point.
pub fn translate(cloud: &PointCloud, offset: &Vec3) -> PointCloud {
    let mut out = cloud.clone();
    for p in &mut out.points {
        *p += offset;
    }
    out
}
