//! Procedural articulated objects: hinged cabinets, drawers, hinged box
//! lids, and swing-lid bins. Generated assets use the same document format
//! as hand-authored ones, so the two are interchangeable.
//!
//! Conventions: the object faces +x, up is +z. Handles are separate
//! actionable links attached to their movable link through a zero-range
//! prismatic joint (a fixed mount).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArticulatedObject, Joint, JointType, Link, SemanticTag, Triangle};
use crate::geom::{Point3, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProceduralKind {
    BoxLid,
    CabinetDoor,
    Drawer,
    BinSwingLid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeSide {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandleKind {
    Bar,
    Knob,
    Lip,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProceduralParams {
    /// Overall size in meters (0.2 to 1.0).
    pub size: f64,
    /// Handle bar/knob radius in meters (0.005 to 0.03).
    pub handle_radius: f64,
    pub hinge: HingeSide,
    pub handle_kind: HandleKind,
}

impl Default for ProceduralParams {
    fn default() -> Self {
        ProceduralParams {
            size: 0.45,
            handle_radius: 0.011,
            hinge: HingeSide::Right,
            handle_kind: HandleKind::Bar,
        }
    }
}

impl ProceduralParams {
    fn validate(&self) -> Result<()> {
        if !(0.2..=1.0).contains(&self.size) {
            return Err(Error::invalid(format!(
                "size {} outside [0.2, 1.0]",
                self.size
            )));
        }
        if !(0.005..=0.03).contains(&self.handle_radius) {
            return Err(Error::invalid(format!(
                "handle_radius {} outside [0.005, 0.03]",
                self.handle_radius
            )));
        }
        Ok(())
    }
}

/// Axis-aligned box as 12 outward-wound triangles.
fn box_mesh(center: Point3, half: Vec3) -> Vec<Triangle> {
    let c = center;
    let h = half;
    let v = |sx: f64, sy: f64, sz: f64| Point3::new(c.x + sx * h.x, c.y + sy * h.y, c.z + sz * h.z);
    let p = [
        v(-1.0, -1.0, -1.0), // 0
        v(1.0, -1.0, -1.0),  // 1
        v(1.0, 1.0, -1.0),   // 2
        v(-1.0, 1.0, -1.0),  // 3
        v(-1.0, -1.0, 1.0),  // 4
        v(1.0, -1.0, 1.0),   // 5
        v(1.0, 1.0, 1.0),    // 6
        v(-1.0, 1.0, 1.0),   // 7
    ];
    let quad = |a: usize, b: usize, c2: usize, d: usize| [[p[a], p[b], p[c2]], [p[a], p[c2], p[d]]];
    let mut tris = Vec::with_capacity(12);
    tris.extend(quad(1, 2, 6, 5)); // +x
    tris.extend(quad(3, 0, 4, 7)); // -x
    tris.extend(quad(2, 3, 7, 6)); // +y
    tris.extend(quad(0, 1, 5, 4)); // -y
    tris.extend(quad(4, 5, 6, 7)); // +z
    tris.extend(quad(1, 0, 3, 2)); // -z
    tris
}

struct Builder {
    links: Vec<Link>,
    joints: Vec<Joint>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            links: Vec::new(),
            joints: Vec::new(),
        }
    }

    fn link(&mut self, name: &str, tag: SemanticTag, mesh: Vec<Triangle>) {
        self.links.push(Link {
            name: name.into(),
            mesh,
            tag,
        });
    }

    fn joint(
        &mut self,
        name: &str,
        joint_type: JointType,
        parent: &str,
        child: &str,
        axis: Vec3,
        origin: Point3,
        limits: [f64; 2],
    ) {
        self.joints.push(Joint {
            name: name.into(),
            joint_type,
            parent_link: parent.into(),
            child_link: child.into(),
            axis,
            origin,
            limits,
            closed_value: limits[0],
        });
    }

    /// Fixed mount: zero-range prismatic joint.
    fn mount(&mut self, name: &str, parent: &str, child: &str) {
        self.joint(
            name,
            JointType::Prismatic,
            parent,
            child,
            Vec3::x(),
            Point3::origin(),
            [0.0, 0.0],
        );
    }
}

/// Handle geometry attached in front of a panel whose outer face contains
/// `face_center` with outward normal +x. `along` is the bar direction.
fn handle_mesh(kind: HandleKind, face_center: Point3, along: Vec3, r: f64, length: f64) -> Vec<Triangle> {
    let x = Vec3::x();
    match kind {
        HandleKind::Bar => {
            let gap = 0.05 + r; // bar center to panel face
            let center = face_center + x * gap;
            let cross = x.cross(&along).normalize();
            // bar cross-section is a 2r square; bar runs along `along`
            let h = x * r + cross * r + along * (length / 2.0);
            let mut mesh = box_mesh(center, Vec3::new(h.x.abs(), h.y.abs(), h.z.abs()));
            // two mounting posts from panel to bar
            for s in [-1.0, 1.0] {
                let post_center = face_center + along * (s * (length / 2.0 - r)) + x * (gap / 2.0);
                let ph = x * (gap / 2.0) + cross * (0.8 * r) + along * (0.8 * r);
                mesh.extend(box_mesh(
                    post_center,
                    Vec3::new(ph.x.abs(), ph.y.abs(), ph.z.abs()),
                ));
            }
            mesh
        }
        HandleKind::Knob => {
            let stem_len = 0.04;
            let knob_half = 1.6 * r;
            let mut mesh = Vec::new();
            mesh.extend(box_mesh(
                face_center + x * (stem_len / 2.0),
                Vec3::new(stem_len / 2.0, 0.7 * r, 0.7 * r),
            ));
            mesh.extend(box_mesh(
                face_center + x * (stem_len + knob_half),
                Vec3::new(knob_half, knob_half, knob_half),
            ));
            mesh
        }
        HandleKind::Lip => {
            // thin plate protruding from the face, graspable across its thickness
            let protrude = 0.045;
            let cross = x.cross(&along).normalize();
            let h = x * (protrude / 2.0) + along * (length / 2.0) + cross * r.min(0.008);
            box_mesh(
                face_center + x * (protrude / 2.0),
                Vec3::new(h.x.abs(), h.y.abs(), h.z.abs()),
            )
        }
    }
}

fn cabinet(params: &ProceduralParams, rng: &mut ChaCha8Rng, drawer: bool) -> ArticulatedObject {
    let s = params.size;
    let w = s * rng.gen_range(0.9..1.1);
    let h = s * rng.gen_range(0.9..1.1);
    let d = 0.6 * s;
    let t = (0.04 * s).clamp(0.01, 0.03);
    let mut b = Builder::new();

    // body: back, left, right, top, bottom panels (front open)
    let mut body = Vec::new();
    body.extend(box_mesh(
        Point3::new(-d / 2.0 + t / 2.0, 0.0, 0.0),
        Vec3::new(t / 2.0, w / 2.0, h / 2.0),
    ));
    for sy in [-1.0, 1.0] {
        body.extend(box_mesh(
            Point3::new(0.0, sy * (w / 2.0 - t / 2.0), 0.0),
            Vec3::new(d / 2.0, t / 2.0, h / 2.0),
        ));
    }
    for sz in [-1.0, 1.0] {
        body.extend(box_mesh(
            Point3::new(0.0, 0.0, sz * (h / 2.0 - t / 2.0)),
            Vec3::new(d / 2.0, w / 2.0 - t, t / 2.0),
        ));
    }
    b.link("body", SemanticTag::Base, body);

    let front_x = d / 2.0;
    if drawer {
        // sliding drawer: front panel plus a shallow tray
        let mut mesh = box_mesh(
            Point3::new(front_x - t / 2.0, 0.0, 0.0),
            Vec3::new(t / 2.0, w / 2.0, h / 2.0),
        );
        let inset = 1.5 * t;
        mesh.extend(box_mesh(
            Point3::new(-t, 0.0, -h / 2.0 + inset),
            Vec3::new(d / 2.0 - 1.5 * t, w / 2.0 - inset, t / 2.0),
        ));
        b.link("drawer", SemanticTag::Movable, mesh);
        b.joint(
            "slide",
            JointType::Prismatic,
            "body",
            "drawer",
            Vec3::x(),
            Point3::new(front_x, 0.0, 0.0),
            [0.0, 0.3],
        );
        let bar_len = (0.3 * w).clamp((6.0 * params.handle_radius).max(0.08), 0.8 * w);
        let face = Point3::new(front_x, 0.0, 0.0);
        let mesh = handle_mesh(params.handle_kind, face, Vec3::y(), params.handle_radius, bar_len);
        b.link("handle", SemanticTag::Actionable, mesh);
        b.mount("handle_mount", "drawer", "handle");
    } else {
        let door = box_mesh(
            Point3::new(front_x - t / 2.0, 0.0, 0.0),
            Vec3::new(t / 2.0, w / 2.0, h / 2.0),
        );
        b.link("door", SemanticTag::Movable, door);
        // hinge on the named side, opening outward (+x)
        let (axis, origin, handle_center, along) = match params.hinge {
            HingeSide::Right => (
                Vec3::z(),
                Point3::new(front_x - t / 2.0, w / 2.0, 0.0),
                Point3::new(front_x, -w / 2.0 + 0.15 * w, 0.0),
                Vec3::z(),
            ),
            HingeSide::Left => (
                -Vec3::z(),
                Point3::new(front_x - t / 2.0, -w / 2.0, 0.0),
                Point3::new(front_x, w / 2.0 - 0.15 * w, 0.0),
                Vec3::z(),
            ),
            HingeSide::Top => (
                -Vec3::y(),
                Point3::new(front_x - t / 2.0, 0.0, h / 2.0),
                Point3::new(front_x, 0.0, -h / 2.0 + 0.15 * h),
                Vec3::y(),
            ),
            HingeSide::Bottom => (
                Vec3::y(),
                Point3::new(front_x - t / 2.0, 0.0, -h / 2.0),
                Point3::new(front_x, 0.0, h / 2.0 - 0.15 * h),
                Vec3::y(),
            ),
        };
        b.joint(
            "hinge",
            JointType::Revolute,
            "body",
            "door",
            axis,
            origin,
            [0.0, std::f64::consts::FRAC_PI_2],
        );
        let edge = if along == Vec3::z() { h } else { w };
        let bar_len = (0.3 * edge).clamp((6.0 * params.handle_radius).max(0.08), 0.8 * edge);
        let mesh = handle_mesh(params.handle_kind, handle_center, along, params.handle_radius, bar_len);
        b.link("handle", SemanticTag::Actionable, mesh);
        b.mount("handle_mount", "door", "handle");
    }

    ArticulatedObject {
        name: if drawer { "drawer_unit" } else { "cabinet" }.into(),
        links: b.links,
        joints: b.joints,
    }
}

fn lidded_box(params: &ProceduralParams, rng: &mut ChaCha8Rng, swing: bool) -> ArticulatedObject {
    let s = params.size;
    let l = s * rng.gen_range(0.9..1.1); // along x
    let w = s * rng.gen_range(0.9..1.1); // along y
    let h = 0.6 * s;
    let t = (0.04 * s).clamp(0.01, 0.03);
    let mut b = Builder::new();

    // open-top box: bottom plus 4 walls
    let mut body = Vec::new();
    body.extend(box_mesh(
        Point3::new(0.0, 0.0, -h / 2.0 + t / 2.0),
        Vec3::new(l / 2.0, w / 2.0, t / 2.0),
    ));
    for sx in [-1.0, 1.0] {
        body.extend(box_mesh(
            Point3::new(sx * (l / 2.0 - t / 2.0), 0.0, 0.0),
            Vec3::new(t / 2.0, w / 2.0, h / 2.0),
        ));
    }
    for sy in [-1.0, 1.0] {
        body.extend(box_mesh(
            Point3::new(0.0, sy * (w / 2.0 - t / 2.0), 0.0),
            Vec3::new(l / 2.0 - t, t / 2.0, h / 2.0),
        ));
    }
    b.link("body", SemanticTag::Base, body);

    let top_z = h / 2.0;
    let lid_inset = if swing { 0.004 } else { 0.0 };
    let lid = box_mesh(
        Point3::new(0.0, 0.0, top_z + t / 2.0),
        Vec3::new(l / 2.0 - lid_inset, w / 2.0 - lid_inset, t / 2.0),
    );
    b.link("lid", SemanticTag::Movable, lid);
    let origin = if swing {
        // swing lid rotates about its centerline
        Point3::new(0.0, 0.0, top_z + t / 2.0)
    } else {
        // hinged at the back top edge
        Point3::new(-l / 2.0, 0.0, top_z + t / 2.0)
    };
    b.joint(
        "hinge",
        JointType::Revolute,
        "body",
        "lid",
        -Vec3::y(),
        origin,
        [0.0, std::f64::consts::FRAC_PI_2],
    );

    // lip or bar on the lid front edge, protruding forward (+x)
    let face = Point3::new(l / 2.0, 0.0, top_z + t / 2.0);
    let kind = match params.handle_kind {
        HandleKind::Knob => HandleKind::Knob,
        _ if swing => HandleKind::Bar,
        other => other,
    };
    let bar_len = (0.3 * w).clamp((6.0 * params.handle_radius).max(0.08), 0.8 * w);
    let mesh = handle_mesh(kind, face, Vec3::y(), params.handle_radius, bar_len);
    b.link("handle", SemanticTag::Actionable, mesh);
    b.mount("handle_mount", "lid", "handle");

    ArticulatedObject {
        name: if swing { "swing_bin" } else { "lidded_box" }.into(),
        links: b.links,
        joints: b.joints,
    }
}

/// Generate a procedural articulated object. Deterministic per
/// `(kind, params, rng_seed)`.
pub fn generate_procedural(
    kind: ProceduralKind,
    params: &ProceduralParams,
    rng_seed: u64,
) -> Result<ArticulatedObject> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let obj = match kind {
        ProceduralKind::CabinetDoor => cabinet(params, &mut rng, false),
        ProceduralKind::Drawer => cabinet(params, &mut rng, true),
        ProceduralKind::BoxLid => lidded_box(params, &mut rng, false),
        ProceduralKind::BinSwingLid => lidded_box(params, &mut rng, true),
    };
    obj.validate()?;
    Ok(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_kinds_validate_and_have_actionable_link() {
        for kind in [
            ProceduralKind::BoxLid,
            ProceduralKind::CabinetDoor,
            ProceduralKind::Drawer,
            ProceduralKind::BinSwingLid,
        ] {
            let obj = generate_procedural(kind, &ProceduralParams::default(), 3).unwrap();
            assert!(obj.links.iter().any(|l| l.tag == SemanticTag::Actionable));
            assert!(obj.links.iter().any(|l| l.tag == SemanticTag::Movable));
            assert_eq!(obj.actuated_joints().count(), 1);
        }
    }

    #[test]
    fn hinge_right_axis_is_vertical_edge_opposite_handle() {
        let params = ProceduralParams {
            hinge: HingeSide::Right,
            ..Default::default()
        };
        let obj = generate_procedural(ProceduralKind::CabinetDoor, &params, 5).unwrap();
        let hinge = obj.joint("hinge").unwrap();
        assert_eq!(hinge.axis, Vec3::z());
        assert!(hinge.origin.y > 0.0);
        // handle sits on the opposite side
        let handle = obj.links.iter().find(|l| l.name == "handle").unwrap();
        let mean_y: f64 = handle
            .mesh
            .iter()
            .flatten()
            .map(|p| p.y)
            .sum::<f64>()
            / (handle.mesh.len() * 3) as f64;
        assert!(mean_y < 0.0);
    }

    #[test]
    fn drawer_axis_is_outward_face_normal() {
        let obj =
            generate_procedural(ProceduralKind::Drawer, &ProceduralParams::default(), 5).unwrap();
        let slide = obj.joint("slide").unwrap();
        assert_eq!(slide.joint_type, JointType::Prismatic);
        assert_eq!(slide.axis, Vec3::x());
    }

    #[test]
    fn same_seed_same_vertices() {
        let a = generate_procedural(ProceduralKind::CabinetDoor, &ProceduralParams::default(), 9)
            .unwrap();
        let b = generate_procedural(ProceduralKind::CabinetDoor, &ProceduralParams::default(), 9)
            .unwrap();
        for (la, lb) in a.links.iter().zip(b.links.iter()) {
            assert_eq!(la.mesh, lb.mesh);
        }
    }

    #[test]
    fn out_of_range_params_rejected() {
        let params = ProceduralParams {
            size: 1.5,
            ..Default::default()
        };
        assert!(generate_procedural(ProceduralKind::BoxLid, &params, 0).is_err());
    }
}
