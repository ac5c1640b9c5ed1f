//! Camera-viewpoint sampling, ray-cast depth rendering of posed objects
//! into partial point clouds, and cross-view point correspondences for
//! Siamese training.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{self, Frame, Point3, PointCloud, PointGrid, SurfaceId, Vec3};
use crate::object::{forward_kinematics, ArticulatedObject, JointState};
use crate::{Error, Result};

/// Pinhole camera: pose plus intrinsics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    pub width: u32,
    pub height: u32,
    /// Vertical field of view in radians.
    pub vfov: f64,
}

impl Camera {
    pub fn position(&self) -> Point3 {
        Point3::new(self.position[0], self.position[1], self.position[2])
    }

    pub fn look_at(&self) -> Point3 {
        Point3::new(self.look_at[0], self.look_at[1], self.look_at[2])
    }

    pub fn validate(&self) -> Result<()> {
        if self.position == self.look_at {
            return Err(Error::invalid("camera position equals look_at"));
        }
        if !(self.vfov > 0.0 && self.vfov < std::f64::consts::PI) {
            return Err(Error::invalid("vfov outside (0, pi)"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("zero-resolution camera"));
        }
        Ok(())
    }

    /// Orthonormal (right, up, forward) basis.
    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let up_hint = Vec3::new(self.up[0], self.up[1], self.up[2]);
        let f = (self.look_at() - self.position()).normalize();
        let mut r = f.cross(&up_hint);
        if r.norm() < 1e-12 {
            // forward parallel to the up hint; pick any perpendicular
            r = f.cross(&Vec3::x());
            if r.norm() < 1e-12 {
                r = f.cross(&Vec3::y());
            }
        }
        let r = r.normalize();
        let u = r.cross(&f);
        (r, u, f)
    }

    /// World-space direction of the primary ray through pixel center (px, py).
    pub fn ray_direction(&self, px: u32, py: u32) -> Vec3 {
        let (r, u, f) = self.basis();
        let tan_half = (self.vfov / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        let x = ((px as f64 + 0.5) / self.width as f64) * 2.0 - 1.0;
        let y = 1.0 - ((py as f64 + 0.5) / self.height as f64) * 2.0;
        (f + r * (x * tan_half * aspect) + u * (y * tan_half)).normalize()
    }

    /// Project a world point back to pixel coordinates.
    pub fn project(&self, p: &Point3) -> Option<(f64, f64)> {
        let (r, u, f) = self.basis();
        let d = p - self.position();
        let z = d.dot(&f);
        if z <= 0.0 {
            return None;
        }
        let tan_half = (self.vfov / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        let x = d.dot(&r) / z / (tan_half * aspect);
        let y = d.dot(&u) / z / tan_half;
        let px = (x + 1.0) / 2.0 * self.width as f64 - 0.5;
        let py = (1.0 - y) / 2.0 * self.height as f64 - 0.5;
        Some((px, py))
    }
}

/// Ranges the viewpoint sampler draws from. Yaw is centered on the
/// object's front (+x); pitch on the horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewpointRange {
    pub yaw_span_deg: f64,
    pub pitch_span_deg: f64,
    pub dist_range: [f64; 2],
}

impl Default for ViewpointRange {
    fn default() -> Self {
        ViewpointRange {
            yaw_span_deg: 120.0,
            pitch_span_deg: 10.0,
            dist_range: [0.8, 1.4],
        }
    }
}

/// Matched point pairs between two views of one joint state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceSet {
    /// (index in view A, index in view B)
    pub pairs: Vec<(u32, u32)>,
    pub state_id: u32,
}

/// Render settings independent of the camera pose.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub vfov_deg: f64,
    pub max_points: usize,
    /// Neighborhood size for normal/curvature estimation.
    pub normals_k: usize,
    /// Optional Gaussian depth jitter in meters (0 disables).
    pub depth_noise_sigma: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 160,
            height: 120,
            vfov_deg: 50.0,
            max_points: 4096,
            normals_k: 20,
            depth_noise_sigma: 0.0,
        }
    }
}

/// Draw `n` cameras looking at the object's bounding-box center.
///
/// Yaw, pitch, and distance are drawn uniformly (in that order per camera)
/// from the configured spans; deterministic per seed.
pub fn sample_viewpoints(
    obj: &ArticulatedObject,
    range: &ViewpointRange,
    cfg: &RenderConfig,
    n: usize,
    rng_seed: u64,
) -> Result<Vec<Camera>> {
    if n == 0 {
        return Err(Error::invalid("need at least one viewpoint"));
    }
    if range.yaw_span_deg < 0.0 || range.pitch_span_deg < 0.0 {
        return Err(Error::invalid("negative span"));
    }
    let center = bounding_box_center(obj)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut cams = Vec::with_capacity(n);
    for _ in 0..n {
        let half_yaw = range.yaw_span_deg.to_radians() / 2.0;
        let half_pitch = range.pitch_span_deg.to_radians() / 2.0;
        let yaw = if half_yaw > 0.0 {
            rng.gen_range(-half_yaw..half_yaw)
        } else {
            0.0
        };
        let pitch = if half_pitch > 0.0 {
            rng.gen_range(-half_pitch..half_pitch)
        } else {
            0.0
        };
        let dist = if range.dist_range[1] > range.dist_range[0] {
            rng.gen_range(range.dist_range[0]..range.dist_range[1])
        } else {
            range.dist_range[0]
        };
        let dir = Vec3::new(
            pitch.cos() * yaw.cos(),
            pitch.cos() * yaw.sin(),
            pitch.sin(),
        );
        let pos = center + dir * dist;
        cams.push(Camera {
            position: [pos.x, pos.y, pos.z],
            look_at: [center.x, center.y, center.z],
            up: [0.0, 0.0, 1.0],
            width: cfg.width,
            height: cfg.height,
            vfov: cfg.vfov_deg.to_radians(),
        });
    }
    Ok(cams)
}

pub fn bounding_box_center(obj: &ArticulatedObject) -> Result<Point3> {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for l in &obj.links {
        for t in &l.mesh {
            for p in t {
                lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
                hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
                any = true;
            }
        }
    }
    if !any {
        return Err(Error::EmptyInput);
    }
    Ok(Point3::from((lo.coords + hi.coords) / 2.0))
}

/// Moeller-Trumbore ray/triangle intersection; returns (t, u, v).
fn ray_triangle(origin: &Point3, dir: &Vec3, tri: &[Point3; 3]) -> Option<(f64, f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    (t > 1e-9).then_some((t, u, v))
}

/// Ray-cast the posed object into a world-frame partial point cloud.
///
/// One primary ray per pixel (pixel-major order), nearest hit wins, ties to
/// the lower (link, triangle) index. Hits carry link id and surface id;
/// clouds larger than `max_points` are FPS-downsampled; normals and
/// curvature are estimated with the camera position as the viewpoint.
pub fn render_partial_cloud(
    obj: &ArticulatedObject,
    state: &JointState,
    cam: &Camera,
    cfg: &RenderConfig,
) -> Result<PointCloud> {
    cam.validate()?;
    let fk = forward_kinematics(obj, state)?;
    let mut posed: Vec<(u32, Vec<[Point3; 3]>)> = Vec::new();
    for (li, link) in obj.links.iter().enumerate() {
        let t = fk[&link.name];
        let tris = link
            .mesh
            .iter()
            .map(|tri| [t * tri[0], t * tri[1], t * tri[2]])
            .collect();
        posed.push((li as u32, tris));
    }
    let origin = cam.position();
    let mut noise_rng = (cfg.depth_noise_sigma > 0.0).then(|| {
        let mix = cam.position[0].to_bits() ^ cam.position[1].to_bits().rotate_left(21);
        ChaCha8Rng::seed_from_u64(mix)
    });

    let mut points = Vec::new();
    let mut link_ids = Vec::new();
    let mut surface_ids = Vec::new();
    for py in 0..cam.height {
        for px in 0..cam.width {
            let dir = cam.ray_direction(px, py);
            let mut best: Option<(f64, u32, u32, f64, f64)> = None;
            for (li, tris) in &posed {
                for (ti, tri) in tris.iter().enumerate() {
                    if let Some((t, u, v)) = ray_triangle(&origin, &dir, tri) {
                        if best.map_or(true, |b| t < b.0) {
                            best = Some((t, *li, ti as u32, u, v));
                        }
                    }
                }
            }
            if let Some((mut t, li, ti, u, v)) = best {
                if let Some(rng) = noise_rng.as_mut() {
                    t += rng.sample::<f64, _>(rand_distr::StandardNormal) * cfg.depth_noise_sigma;
                }
                points.push(origin + dir * t);
                link_ids.push(li);
                surface_ids.push(SurfaceId {
                    triangle: ti,
                    bary: [u, v],
                });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::ObjectNotVisible);
    }
    let mut cloud = PointCloud {
        points,
        normals: None,
        curvature: None,
        link_id: Some(link_ids),
        surface_id: Some(surface_ids),
        frame: Frame::World,
    };
    if cloud.len() > cfg.max_points {
        let keep = geom::farthest_point_sample(&cloud, cfg.max_points, 0)?;
        cloud = cloud.select(&keep);
    }
    let k = cfg.normals_k.clamp(3, cloud.len().max(3));
    let (with_attrs, _warn) = geom::estimate_normals_curvature(&cloud, k, &origin)?;
    Ok(with_attrs)
}

/// Match points across two views of the same joint state.
///
/// A pair (i, j) is kept when the two points are mutual nearest neighbors,
/// lie within `eps_corr` of each other in world space, and share a link id.
/// Mutual matching keeps the result symmetric under swapping the views.
pub fn extract_correspondences(
    view_a: &PointCloud,
    view_b: &PointCloud,
    eps_corr: f64,
    state_id: u32,
) -> Result<CorrespondenceSet> {
    let la = view_a
        .link_id
        .as_ref()
        .ok_or(Error::MissingAttribute("link_id"))?;
    let lb = view_b
        .link_id
        .as_ref()
        .ok_or(Error::MissingAttribute("link_id"))?;
    if view_a.is_empty() || view_b.is_empty() {
        return Ok(CorrespondenceSet {
            pairs: Vec::new(),
            state_id,
        });
    }
    let grid_b = PointGrid::build(&view_b.points);
    let grid_a = PointGrid::build(&view_a.points);
    let mut pairs = Vec::new();
    for (i, p) in view_a.points.iter().enumerate() {
        let nb = grid_b.knn(&view_b.points, p, 1);
        let j = nb.indices[0];
        if nb.distances[0] >= eps_corr || la[i] != lb[j] {
            continue;
        }
        let na = grid_a.knn(&view_a.points, &view_b.points[j], 1);
        if na.indices[0] == i {
            pairs.push((i as u32, j as u32));
        }
    }
    Ok(CorrespondenceSet { pairs, state_id })
}

// ---------------------------------------------------------------------------
// AOCR correspondence file
// ---------------------------------------------------------------------------

const CORR_MAGIC: &[u8; 4] = b"AOCR";

pub fn write_aocr<W: Write>(mut w: W, set: &CorrespondenceSet) -> Result<()> {
    w.write_all(CORR_MAGIC)?;
    w.write_u32::<LittleEndian>(set.pairs.len() as u32)?;
    for &(a, b) in &set.pairs {
        w.write_u32::<LittleEndian>(a)?;
        w.write_u32::<LittleEndian>(b)?;
    }
    w.write_u32::<LittleEndian>(set.state_id)?;
    Ok(())
}

pub fn read_aocr<R: Read>(mut r: R) -> Result<CorrespondenceSet> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CORR_MAGIC {
        return Err(Error::BadFormat("not an AOCR file".into()));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let a = r.read_u32::<LittleEndian>()?;
        let b = r.read_u32::<LittleEndian>()?;
        pairs.push((a, b));
    }
    let state_id = r.read_u32::<LittleEndian>()?;
    Ok(CorrespondenceSet { pairs, state_id })
}
