//! Forward kinematics, joint-state sampling, and axis distance.

use std::collections::BTreeMap;

use nalgebra::{Isometry3, Translation3, UnitQuaternion, UnitVector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ArticulatedObject, Joint, JointState, JointType};
use crate::geom::Point3;
use crate::{Error, Result};

pub type Transform = Isometry3<f64>;

/// Screw motion of a single joint at value `q`, in the zero-state frame.
fn joint_transform(joint: &Joint, q: f64) -> Transform {
    match joint.joint_type {
        JointType::Revolute => {
            let rot = UnitQuaternion::from_axis_angle(
                &UnitVector3::new_normalize(joint.axis),
                q,
            );
            // rotate around the line through `origin`
            let t = joint.origin.coords - rot * joint.origin.coords;
            Transform::from_parts(Translation3::from(t), rot)
        }
        JointType::Prismatic => Transform::from_parts(
            Translation3::from(joint.axis * q),
            UnitQuaternion::identity(),
        ),
    }
}

/// World transform per link for the given joint state. The base link gets
/// identity; each child's transform composes its parent's with the joint
/// screw motion.
pub fn forward_kinematics(
    obj: &ArticulatedObject,
    state: &JointState,
) -> Result<BTreeMap<String, Transform>> {
    for j in &obj.joints {
        if state.get(&j.name).is_none() {
            return Err(Error::MissingJoint(j.name.clone()));
        }
    }
    let root = obj.root_link()?;
    let mut out: BTreeMap<String, Transform> = BTreeMap::new();
    out.insert(root.name.clone(), Transform::identity());
    // tree is small; fixed-point iteration over joints avoids an explicit sort
    loop {
        let before = out.len();
        for j in &obj.joints {
            if out.contains_key(&j.child_link) {
                continue;
            }
            if let Some(parent) = out.get(&j.parent_link) {
                let q = state.get(&j.name).unwrap();
                let q = q.clamp(j.limits[0], j.limits[1]);
                let t = parent * joint_transform(j, q);
                out.insert(j.child_link.clone(), t);
            }
        }
        if out.len() == before {
            break;
        }
    }
    if out.len() != obj.links.len() {
        return Err(Error::invalid("disconnected link in kinematic tree"));
    }
    Ok(out)
}

/// The closed state followed by `n_open` random open states.
///
/// Open values are drawn uniformly from the open side of the range, offset
/// from the closed value by 2% of the range so every sampled state is
/// actually open. Zero-range joints stay fixed at their single value.
pub fn sample_states(obj: &ArticulatedObject, n_open: usize, rng_seed: u64) -> Vec<JointState> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut states = Vec::with_capacity(n_open + 1);
    states.push(obj.closed_state());
    for _ in 0..n_open {
        let mut q = BTreeMap::new();
        for j in &obj.joints {
            let range = j.range();
            let value = if range <= 0.0 {
                j.limits[0]
            } else {
                let open = j.open_limit();
                let delta = 0.02 * range;
                let lo = (j.closed_value + j.opening_sign() * delta).min(open.max(j.closed_value));
                let hi = open;
                if j.opening_sign() > 0.0 {
                    rng.gen_range(lo..=hi)
                } else {
                    rng.gen_range(hi..=lo)
                }
            };
            q.insert(j.name.clone(), value);
        }
        states.push(JointState(q));
    }
    states
}

/// Distance from a point to the joint's axis line (revolute), or the
/// constant travel potential 1.0 (prismatic): every point on a prismatic
/// part moves equally, so the sampling prior is flat there.
pub fn distance_to_joint_axis(point: &Point3, joint: &Joint) -> f64 {
    match joint.joint_type {
        JointType::Revolute => {
            let d = point - joint.origin;
            (d - joint.axis * d.dot(&joint.axis)).norm()
        }
        JointType::Prismatic => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::object::{generate_procedural, ProceduralKind, ProceduralParams};

    fn hinge_object() -> ArticulatedObject {
        generate_procedural(ProceduralKind::CabinetDoor, &ProceduralParams::default(), 4).unwrap()
    }

    #[test]
    fn zero_state_is_identity() {
        let obj = hinge_object();
        let state = JointState(obj.joints.iter().map(|j| (j.name.clone(), 0.0)).collect());
        let fk = forward_kinematics(&obj, &state).unwrap();
        for (_, t) in fk {
            assert!((t.to_homogeneous() - nalgebra::Matrix4::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn half_turn_about_z() {
        let j = Joint {
            name: "j".into(),
            joint_type: JointType::Revolute,
            parent_link: "a".into(),
            child_link: "b".into(),
            axis: Vec3::z(),
            origin: Point3::origin(),
            limits: [0.0, std::f64::consts::PI],
            closed_value: 0.0,
        };
        let t = joint_transform(&j, std::f64::consts::PI);
        let p = t * Point3::new(1.0, 0.0, 0.0);
        assert!((p - Point3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn prismatic_translates_along_axis() {
        let j = Joint {
            name: "j".into(),
            joint_type: JointType::Prismatic,
            parent_link: "a".into(),
            child_link: "b".into(),
            axis: Vec3::y(),
            origin: Point3::origin(),
            limits: [0.0, 0.3],
            closed_value: 0.0,
        };
        let t = joint_transform(&j, 0.1);
        let p = t * Point3::new(0.5, 0.0, 0.0);
        assert!((p - Point3::new(0.5, 0.1, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn missing_joint_errors() {
        let obj = hinge_object();
        let state = JointState::default();
        assert!(matches!(
            forward_kinematics(&obj, &state),
            Err(Error::MissingJoint(_))
        ));
    }

    #[test]
    fn fk_is_rigid_per_link() {
        let obj = hinge_object();
        let states = sample_states(&obj, 3, 11);
        let link = obj
            .links
            .iter()
            .find(|l| l.tag == super::super::SemanticTag::Movable)
            .unwrap();
        let probe: Vec<Point3> = link.mesh.iter().flatten().copied().take(12).collect();
        for state in &states {
            let fk = forward_kinematics(&obj, state).unwrap();
            let t = fk[&link.name];
            for a in 0..probe.len() {
                for b in (a + 1)..probe.len() {
                    let d0 = (probe[a] - probe[b]).norm();
                    let d1 = (t * probe[a] - t * probe[b]).norm();
                    assert!((d0 - d1).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn axis_distance_is_invariant_under_revolute_motion() {
        let obj = hinge_object();
        let joint = obj.actuated_joints().next().unwrap().clone();
        let link = obj.link_index(&joint.child_link).unwrap();
        let probe = obj.links[link].mesh[0][0];
        let d0 = distance_to_joint_axis(&probe, &joint);
        for q in [0.2, 0.7, 1.3] {
            let mut state = obj.closed_state();
            state.0.insert(joint.name.clone(), q);
            let fk = forward_kinematics(&obj, &state).unwrap();
            let moved = fk[&joint.child_link] * probe;
            let d1 = distance_to_joint_axis(&moved, &joint);
            assert!((d0 - d1).abs() < 1e-9, "q={q}: {d0} vs {d1}");
        }
    }

    #[test]
    fn axis_distance_pythagoras() {
        let j = Joint {
            name: "j".into(),
            joint_type: JointType::Revolute,
            parent_link: "a".into(),
            child_link: "b".into(),
            axis: Vec3::z(),
            origin: Point3::origin(),
            limits: [0.0, 1.0],
            closed_value: 0.0,
        };
        assert!((distance_to_joint_axis(&Point3::new(3.0, 4.0, 0.0), &j) - 5.0).abs() < 1e-12);
        assert_eq!(distance_to_joint_axis(&Point3::new(0.0, 0.0, 9.0), &j), 0.0);
    }

    #[test]
    fn prismatic_axis_distance_is_constant_one() {
        let j = Joint {
            name: "j".into(),
            joint_type: JointType::Prismatic,
            parent_link: "a".into(),
            child_link: "b".into(),
            axis: Vec3::x(),
            origin: Point3::origin(),
            limits: [0.0, 0.3],
            closed_value: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = Point3::new(rng.gen(), rng.gen(), rng.gen());
            assert_eq!(distance_to_joint_axis(&p, &j), 1.0);
        }
    }

    #[test]
    fn sample_states_counts_and_determinism() {
        let obj = hinge_object();
        assert_eq!(sample_states(&obj, 0, 1).len(), 1);
        let a = sample_states(&obj, 9, 42);
        assert_eq!(a.len(), 10);
        let b = sample_states(&obj, 9, 42);
        assert_eq!(a, b);
        // first is closed, the rest strictly open
        for j in &obj.joints {
            if j.range() <= 0.0 {
                continue;
            }
            assert_eq!(a[0].get(&j.name).unwrap(), j.closed_value);
            for s in &a[1..] {
                let q = s.get(&j.name).unwrap();
                assert!((q - j.closed_value).abs() >= 0.02 * j.range() - 1e-12);
                assert!(q >= j.limits[0] && q <= j.limits[1]);
            }
        }
    }
}
