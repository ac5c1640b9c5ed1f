//! Articulated-object representation: links with triangle meshes,
//! revolute/prismatic joints, forward kinematics, joint-state sampling,
//! and procedural object generation.

mod kinematics;
mod procedural;

pub use kinematics::{distance_to_joint_axis, forward_kinematics, sample_states};
pub use procedural::{generate_procedural, HandleKind, HingeSide, ProceduralKind, ProceduralParams};

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geom::{Point3, Vec3};
use crate::{Error, Result};

/// Semantic role of a link's geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticTag {
    Base,
    Movable,
    Actionable,
}

pub type Triangle = [Point3; 3];

#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub mesh: Vec<Triangle>,
    pub tag: SemanticTag,
}

impl Link {
    pub fn validate(&self) -> Result<()> {
        if self.mesh.is_empty() {
            return Err(Error::invalid(format!("link {}: empty mesh", self.name)));
        }
        for (i, t) in self.mesh.iter().enumerate() {
            let area = 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
            if !(area > 1e-12) {
                return Err(Error::invalid(format!(
                    "link {}: degenerate triangle {i} (area {area})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub joint_type: JointType,
    pub parent_link: String,
    pub child_link: String,
    /// Unit direction of the axis, in the zero-state object frame.
    pub axis: Vec3,
    /// A point on the axis (revolute) or the anchor (prismatic).
    pub origin: Point3,
    /// `[lower, upper]` in radians or meters.
    pub limits: [f64; 2],
    /// Joint value that counts as "closed"; the opening direction is the
    /// displacement away from it toward the opposite limit.
    pub closed_value: f64,
}

impl Joint {
    pub fn range(&self) -> f64 {
        self.limits[1] - self.limits[0]
    }

    /// The limit the joint moves toward when opening.
    pub fn open_limit(&self) -> f64 {
        if (self.closed_value - self.limits[0]).abs() <= (self.closed_value - self.limits[1]).abs()
        {
            self.limits[1]
        } else {
            self.limits[0]
        }
    }

    /// +1 or -1: sign of displacement from closed toward open.
    pub fn opening_sign(&self) -> f64 {
        if self.open_limit() >= self.closed_value {
            1.0
        } else {
            -1.0
        }
    }
}

/// Joint configuration: joint name to scalar value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointState(pub BTreeMap<String, f64>);

impl JointState {
    pub fn get(&self, joint: &str) -> Option<f64> {
        self.0.get(joint).copied()
    }
}

#[derive(Debug, Clone)]
pub struct ArticulatedObject {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
}

impl ArticulatedObject {
    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// The root of the kinematic tree (the unique link that is nobody's child).
    pub fn root_link(&self) -> Result<&Link> {
        let children: HashSet<&str> = self.joints.iter().map(|j| j.child_link.as_str()).collect();
        let mut roots = self.links.iter().filter(|l| !children.contains(l.name.as_str()));
        let root = roots.next().ok_or_else(|| Error::invalid("no root link"))?;
        if roots.next().is_some() {
            return Err(Error::invalid("multiple root links"));
        }
        Ok(root)
    }

    /// Joints that actually articulate (nonzero limit range).
    pub fn actuated_joints(&self) -> impl Iterator<Item = &Joint> {
        self.joints.iter().filter(|j| j.range() > 0.0)
    }

    /// Names of `joint`'s child link and every link below it.
    pub fn movable_subtree(&self, joint: &Joint) -> HashSet<String> {
        let mut subtree = HashSet::new();
        subtree.insert(joint.child_link.clone());
        loop {
            let before = subtree.len();
            for j in &self.joints {
                if subtree.contains(&j.parent_link) {
                    subtree.insert(j.child_link.clone());
                }
            }
            if subtree.len() == before {
                break;
            }
        }
        subtree
    }

    /// The state with every joint at its closed value.
    pub fn closed_state(&self) -> JointState {
        JointState(
            self.joints
                .iter()
                .map(|j| (j.name.clone(), j.closed_value))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.is_empty() {
            return Err(Error::invalid("object has no links"));
        }
        let mut names = HashSet::new();
        for l in &self.links {
            l.validate()?;
            if !names.insert(l.name.as_str()) {
                return Err(Error::invalid(format!("duplicate link name {}", l.name)));
            }
        }
        let mut child_of: HashMap<&str, &str> = HashMap::new();
        for j in &self.joints {
            if (j.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("joint {}: non-unit axis", j.name)));
            }
            if j.limits[0] > j.limits[1] {
                return Err(Error::invalid(format!(
                    "joint {}: lower limit above upper",
                    j.name
                )));
            }
            if j.closed_value < j.limits[0] || j.closed_value > j.limits[1] {
                return Err(Error::invalid(format!(
                    "joint {}: closed_value outside limits",
                    j.name
                )));
            }
            if !names.contains(j.parent_link.as_str()) || !names.contains(j.child_link.as_str()) {
                return Err(Error::invalid(format!(
                    "joint {}: unknown parent or child link",
                    j.name
                )));
            }
            if child_of.insert(&j.child_link, &j.parent_link).is_some() {
                return Err(Error::invalid(format!(
                    "link {} has multiple parent joints",
                    j.child_link
                )));
            }
        }
        // cycle check: walk up from every link; a walk longer than the link
        // count means a loop
        for j in &self.joints {
            let mut cur = j.child_link.as_str();
            let mut steps = 0;
            while let Some(&parent) = child_of.get(cur) {
                cur = parent;
                steps += 1;
                if steps > self.links.len() {
                    return Err(Error::KinematicCycle(j.name.clone()));
                }
            }
        }
        self.root_link()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON object-spec document
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    name: String,
    tag: SemanticTag,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

#[derive(Serialize, Deserialize)]
struct JointDoc {
    name: String,
    #[serde(rename = "type")]
    joint_type: JointType,
    parent: String,
    child: String,
    axis: [f64; 3],
    origin: [f64; 3],
    limits: [f64; 2],
    closed_value: f64,
}

#[derive(Serialize, Deserialize)]
struct ObjectDoc {
    name: String,
    links: Vec<LinkDoc>,
    joints: Vec<JointDoc>,
}

/// Parse an object-spec JSON document into a validated [`ArticulatedObject`].
///
/// Axes within 1e-3 of unit length are normalized with a warning; anything
/// further off is an error.
pub fn parse_object(text: &str) -> Result<ArticulatedObject> {
    let doc: ObjectDoc = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("$:{}:{}", e.line(), e.column()), e.to_string()))?;
    let mut links = Vec::with_capacity(doc.links.len());
    for (li, ld) in doc.links.iter().enumerate() {
        let verts: Vec<Point3> = ld
            .vertices
            .iter()
            .map(|v| Point3::new(v[0], v[1], v[2]))
            .collect();
        let mut mesh = Vec::with_capacity(ld.triangles.len());
        for (ti, t) in ld.triangles.iter().enumerate() {
            let path = format!("$.links[{li}].triangles[{ti}]");
            let idx = |k: u32| -> Result<Point3> {
                verts
                    .get(k as usize)
                    .copied()
                    .ok_or_else(|| Error::parse(path.clone(), format!("vertex index {k} out of range")))
            };
            mesh.push([idx(t[0])?, idx(t[1])?, idx(t[2])?]);
        }
        links.push(Link {
            name: ld.name.clone(),
            mesh,
            tag: ld.tag,
        });
    }
    let mut joints = Vec::with_capacity(doc.joints.len());
    for (ji, jd) in doc.joints.iter().enumerate() {
        let axis = Vec3::new(jd.axis[0], jd.axis[1], jd.axis[2]);
        let norm = axis.norm();
        if (norm - 1.0).abs() > 1e-3 {
            return Err(Error::parse(
                format!("$.joints[{ji}].axis"),
                format!("axis norm {norm} too far from 1"),
            ));
        }
        if (norm - 1.0).abs() > 1e-9 {
            log::warn!("joint {}: normalizing axis (norm {norm})", jd.name);
        }
        joints.push(Joint {
            name: jd.name.clone(),
            joint_type: jd.joint_type,
            parent_link: jd.parent.clone(),
            child_link: jd.child.clone(),
            axis: axis / norm,
            origin: Point3::new(jd.origin[0], jd.origin[1], jd.origin[2]),
            limits: jd.limits,
            closed_value: jd.closed_value,
        });
    }
    let obj = ArticulatedObject {
        name: doc.name,
        links,
        joints,
    };
    obj.validate()?;
    Ok(obj)
}

/// Serialize to the same JSON document format [`parse_object`] reads.
pub fn serialize_object(obj: &ArticulatedObject) -> Result<String> {
    let links = obj
        .links
        .iter()
        .map(|l| {
            // rebuild an indexed vertex list, deduplicating exact positions
            let mut verts: Vec<[f64; 3]> = Vec::new();
            let mut index: HashMap<[u64; 3], u32> = HashMap::new();
            let mut triangles = Vec::with_capacity(l.mesh.len());
            for t in &l.mesh {
                let mut tri = [0u32; 3];
                for (k, p) in t.iter().enumerate() {
                    let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
                    let id = *index.entry(key).or_insert_with(|| {
                        verts.push([p.x, p.y, p.z]);
                        (verts.len() - 1) as u32
                    });
                    tri[k] = id;
                }
                triangles.push(tri);
            }
            LinkDoc {
                name: l.name.clone(),
                tag: l.tag,
                vertices: verts,
                triangles,
            }
        })
        .collect();
    let joints = obj
        .joints
        .iter()
        .map(|j| JointDoc {
            name: j.name.clone(),
            joint_type: j.joint_type,
            parent: j.parent_link.clone(),
            child: j.child_link.clone(),
            axis: [j.axis.x, j.axis.y, j.axis.z],
            origin: [j.origin.x, j.origin.y, j.origin.z],
            limits: j.limits,
            closed_value: j.closed_value,
        })
        .collect();
    let doc = ObjectDoc {
        name: obj.name.clone(),
        links,
        joints,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_link_doc() -> String {
        r#"{
            "name": "slab",
            "links": [{
                "name": "base",
                "tag": "base",
                "vertices": [[0,0,0],[1,0,0],[0,1,0]],
                "triangles": [[0,1,2]]
            }],
            "joints": []
        }"#
        .to_string()
    }

    #[test]
    fn minimal_document_parses() {
        let obj = parse_object(&one_link_doc()).unwrap();
        assert_eq!(obj.links.len(), 1);
        assert_eq!(obj.joints.len(), 0);
        assert_eq!(obj.root_link().unwrap().name, "base");
    }

    #[test]
    fn inverted_limits_rejected() {
        let doc = r#"{
            "name": "bad",
            "links": [
              {"name": "a", "tag": "base",
               "vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]},
              {"name": "b", "tag": "movable",
               "vertices": [[0,0,1],[1,0,1],[0,1,1]], "triangles": [[0,1,2]]}
            ],
            "joints": [{
                "name": "j", "type": "revolute", "parent": "a", "child": "b",
                "axis": [0,0,1], "origin": [0,0,0],
                "limits": [1.0, 0.0], "closed_value": 0.0
            }]
        }"#;
        assert!(parse_object(doc).is_err());
    }

    #[test]
    fn cycle_detected() {
        let doc = r#"{
            "name": "loop",
            "links": [
              {"name": "a", "tag": "base",
               "vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]},
              {"name": "b", "tag": "movable",
               "vertices": [[0,0,1],[1,0,1],[0,1,1]], "triangles": [[0,1,2]]}
            ],
            "joints": [
              {"name": "j1", "type": "revolute", "parent": "a", "child": "b",
               "axis": [0,0,1], "origin": [0,0,0], "limits": [0,1], "closed_value": 0},
              {"name": "j2", "type": "revolute", "parent": "b", "child": "a",
               "axis": [0,0,1], "origin": [0,0,0], "limits": [0,1], "closed_value": 0}
            ]
        }"#;
        let err = parse_object(doc).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("cycle") || msg.contains("root"),
            "unexpected error: {msg}"
        );
    }

    #[test]
    fn round_trip_reparses_equal() {
        let obj = generate_procedural(
            ProceduralKind::CabinetDoor,
            &ProceduralParams::default(),
            7,
        )
        .unwrap();
        let text = serialize_object(&obj).unwrap();
        let back = parse_object(&text).unwrap();
        assert_eq!(back.name, obj.name);
        assert_eq!(back.links.len(), obj.links.len());
        assert_eq!(back.joints.len(), obj.joints.len());
        for (a, b) in obj.links.iter().zip(back.links.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.tag, b.tag);
            assert_eq!(a.mesh, b.mesh);
        }
        for (a, b) in obj.joints.iter().zip(back.joints.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.axis, b.axis);
            assert_eq!(a.limits, b.limits);
        }
        // serialize -> parse -> serialize is idempotent
        assert_eq!(text, serialize_object(&back).unwrap());
    }

    #[test]
    fn non_unit_axis_close_is_normalized() {
        let doc = r#"{
            "name": "near",
            "links": [
              {"name": "a", "tag": "base",
               "vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]},
              {"name": "b", "tag": "movable",
               "vertices": [[0,0,1],[1,0,1],[0,1,1]], "triangles": [[0,1,2]]}
            ],
            "joints": [{
                "name": "j", "type": "revolute", "parent": "a", "child": "b",
                "axis": [0,0,1.0000005], "origin": [0,0,0],
                "limits": [0,1], "closed_value": 0
            }]
        }"#;
        let obj = parse_object(doc).unwrap();
        assert!((obj.joints[0].axis.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_from_unit_axis_rejected() {
        let doc = r#"{
            "name": "far",
            "links": [
              {"name": "a", "tag": "base",
               "vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]},
              {"name": "b", "tag": "movable",
               "vertices": [[0,0,1],[1,0,1],[0,1,1]], "triangles": [[0,1,2]]}
            ],
            "joints": [{
                "name": "j", "type": "revolute", "parent": "a", "child": "b",
                "axis": [0,0,1.5], "origin": [0,0,0],
                "limits": [0,1], "closed_value": 0
            }]
        }"#;
        assert!(parse_object(doc).is_err());
    }
}
