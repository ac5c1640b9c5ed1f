//! Local-PCA normal and curvature estimation.

use super::{Mat3, Point3, PointCloud, PointGrid, Vec3};
use crate::{Error, Result};

/// Unit vector in the null space of `m` (assumed rank <= 2).
///
/// Uses the largest cross product of row pairs; falls back to any direction
/// perpendicular to the largest row (rank 1), then to +x (rank 0).
fn null_space_dir(m: &Mat3, scale: f64) -> Vec3 {
    let r0 = Vec3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let r1 = Vec3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]);
    let r2 = Vec3::new(m[(2, 0)], m[(2, 1)], m[(2, 2)]);
    let crosses = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = crosses
        .iter()
        .max_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap())
        .unwrap();
    if best.norm() > 1e-12 * scale * scale {
        return best.normalize();
    }
    let rows = [r0, r1, r2];
    let big = rows
        .iter()
        .max_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap())
        .unwrap();
    if big.norm() > 1e-12 * scale {
        let mut perp = big.cross(&Vec3::x());
        if perp.norm() < 1e-12 * scale {
            perp = big.cross(&Vec3::y());
        }
        return perp.normalize();
    }
    Vec3::x()
}

/// Eigenvalues (ascending) and matching eigenvectors of a symmetric 3x3
/// matrix, computed analytically.
///
/// The trigonometric closed form gives the eigenvalues; eigenvectors come
/// from null spaces with degenerate-multiplicity fallbacks. Deterministic,
/// and immune to the eigenvalue/eigenvector pairing instabilities iterative
/// solvers show on near-diagonal input.
pub(crate) fn sorted_eigen(m: &Mat3) -> ([f64; 3], [Vec3; 3]) {
    let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if scale == 0.0 {
        return ([0.0; 3], [Vec3::x(), Vec3::y(), Vec3::z()]);
    }
    let a = m / scale;
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = a.trace() / 3.0;
    let (l0, l1, l2);
    if p1 <= 1e-30 {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        [l0, l1, l2] = d;
    } else {
        let p2 = (a[(0, 0)] - q).powi(2)
            + (a[(1, 1)] - q).powi(2)
            + (a[(2, 2)] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = (a - Mat3::identity() * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
        l0 = lo;
        l2 = hi;
        l1 = 3.0 * q - hi - lo;
    }
    let v0 = null_space_dir(&(a - Mat3::identity() * l0), 1.0);
    let mut v2 = null_space_dir(&(a - Mat3::identity() * l2), 1.0);
    v2 -= v0 * v0.dot(&v2);
    if v2.norm() < 1e-9 {
        v2 = v0.cross(&Vec3::x());
        if v2.norm() < 1e-9 {
            v2 = v0.cross(&Vec3::y());
        }
    }
    let v2 = v2.normalize();
    let v1 = v2.cross(&v0);
    ([l0 * scale, l1 * scale, l2 * scale], [v0, v1, v2])
}

/// Covariance of a neighborhood (normalized by the neighbor count).
pub(crate) fn neighborhood_covariance(points: &[Point3], indices: &[usize]) -> Mat3 {
    let mut mean = Vec3::zeros();
    for &i in indices {
        mean += points[i].coords;
    }
    mean /= indices.len() as f64;
    let mut cov = Mat3::zeros();
    for &i in indices {
        let d = points[i].coords - mean;
        cov += d * d.transpose();
    }
    cov / indices.len() as f64
}

/// Estimate per-point normals and curvature via local PCA over the `k_nbrs`
/// nearest neighbors of each point.
///
/// The normal is the eigenvector of the smallest eigenvalue, oriented toward
/// `viewpoint`; curvature is the surface variation `l0 / (l0 + l1 + l2)`,
/// clamped into `[0, 1]`. Degenerate neighborhoods (all neighbors coincident)
/// fall back to the viewpoint direction with curvature 0 and are counted in
/// the returned warning count.
pub fn estimate_normals_curvature(
    cloud: &PointCloud,
    k_nbrs: usize,
    viewpoint: &Point3,
) -> Result<(PointCloud, usize)> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k_nbrs < 3 {
        return Err(Error::invalid("k_nbrs must be >= 3"));
    }
    let pts = &cloud.points;
    let grid = PointGrid::build(pts);
    let mut normals = Vec::with_capacity(pts.len());
    let mut curvature = Vec::with_capacity(pts.len());
    let mut warnings = 0usize;
    for p in pts.iter() {
        let nl = grid.knn(pts, p, k_nbrs);
        let cov = neighborhood_covariance(pts, &nl.indices);
        let (vals, vecs) = sorted_eigen(&cov);
        let l0 = vals[0].max(0.0);
        let total = l0 + vals[1].max(0.0) + vals[2].max(0.0);
        if total <= 1e-24 {
            let dir = viewpoint - p;
            let n = if dir.norm() > 0.0 {
                dir.normalize()
            } else {
                Vec3::z()
            };
            normals.push(n);
            curvature.push(0.0);
            warnings += 1;
            continue;
        }
        let mut n = vecs[0].normalize();
        if n.dot(&(viewpoint - p)) < 0.0 {
            n = -n;
        }
        normals.push(n);
        curvature.push((l0 / total).clamp(0.0, 1.0));
    }
    let mut out = cloud.clone();
    out.normals = Some(normals);
    out.curvature = Some(curvature);
    Ok((out, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::from_points(
            (0..n)
                .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0))
                .collect(),
        )
    }

    pub(crate) fn sphere_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::from_points(
            (0..n)
                .map(|_| {
                    // uniform on the unit sphere
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let r = (1.0 - z * z).sqrt();
                    Point3::new(r * phi.cos(), r * phi.sin(), z)
                })
                .collect(),
        )
    }

    #[test]
    fn plane_has_z_normals_and_flat_curvature() {
        let cloud = plane_cloud(500, 1);
        let vp = Point3::new(0.0, 0.0, 5.0);
        let (out, warn) = estimate_normals_curvature(&cloud, 12, &vp).unwrap();
        assert_eq!(warn, 0);
        for n in out.normals.as_ref().unwrap() {
            assert!((n - Vec3::z()).norm() < 1e-9, "normal {n:?}");
        }
        for &c in out.curvature.as_ref().unwrap() {
            assert!(c < 1e-6);
        }
    }

    #[test]
    fn sphere_curvature_roughly_uniform() {
        for seed in [3u64, 4, 5] {
            let cloud = sphere_cloud(2000, seed);
            let (out, _) = estimate_normals_curvature(&cloud, 20, &Point3::new(0.0, 0.0, 10.0))
                .unwrap();
            let cs = out.curvature.as_ref().unwrap();
            let mean = cs.iter().sum::<f64>() / cs.len() as f64;
            let var = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / cs.len() as f64;
            let cv = var.sqrt() / mean;
            assert!(mean > 0.0);
            assert!(cv < 0.5, "seed {seed}: cv = {cv}");
        }
    }

    #[test]
    fn degenerate_neighborhood_flagged() {
        let cloud = PointCloud::from_points(vec![Point3::new(1.0, 2.0, 3.0); 8]);
        let (out, warn) = estimate_normals_curvature(&cloud, 4, &Point3::origin()).unwrap();
        assert_eq!(warn, 8);
        for &c in out.curvature.as_ref().unwrap() {
            assert_eq!(c, 0.0);
        }
        let expect = (Point3::origin() - Point3::new(1.0, 2.0, 3.0)).normalize();
        for n in out.normals.as_ref().unwrap() {
            assert!((n - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_equivariance() {
        use nalgebra::Rotation3;
        let cloud = sphere_cloud(300, 9);
        let vp = Point3::new(0.3, -4.0, 2.0);
        let (base, _) = estimate_normals_curvature(&cloud, 16, &vp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let axis = Vec3::new(rng.gen(), rng.gen(), rng.gen()).normalize();
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
            let rotated = PointCloud::from_points(
                cloud.points.iter().map(|p| rot * p).collect(),
            );
            let (got, _) = estimate_normals_curvature(&rotated, 16, &(rot * vp)).unwrap();
            let base_n = base.normals.as_ref().unwrap();
            let got_n = got.normals.as_ref().unwrap();
            for i in 0..cloud.len() {
                assert!((got_n[i] - rot * base_n[i]).norm() < 1e-9);
                let dc = (got.curvature.as_ref().unwrap()[i]
                    - base.curvature.as_ref().unwrap()[i])
                    .abs();
                assert!(dc < 1e-12);
            }
        }
    }
}
