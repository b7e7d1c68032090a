//! Compiled multibody models in SI units.
//!
//! A [`MultibodyModel`] is a kinematic tree of one-degree-of-freedom joints,
//! ordered so that every parent precedes its children. Each joint moves the
//! rigid body attached after it. The tree is rooted at a base frame whose
//! translation may be prescribed by the caller.

use crate::chain::BeamChainSpec;
use crate::spatial::{axis_angle, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointType {
    Revolute,
    Prismatic,
}

/// Mass properties in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub mass: f64,
    pub com: Vec3,
    pub inertia_com: Mat3,
}

impl Body {
    pub const EMPTY: Body = Body {
        mass: 0.0,
        com: Vec3::new(0.0, 0.0, 0.0),
        inertia_com: Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    };

    /// Merge another rigid piece (same frame) into this body.
    pub fn merge(&self, other: &Body) -> Body {
        let mass = self.mass + other.mass;
        if mass == 0.0 {
            return Body::EMPTY;
        }
        let com = (self.com * self.mass + other.com * other.mass) / mass;
        let shift = |b: &Body| {
            let d = b.com - com;
            b.inertia_com + (Mat3::identity() * d.dot(&d) - d * d.transpose()) * b.mass
        };
        Body {
            mass,
            com,
            inertia_com: shift(self) + shift(other),
        }
    }

    pub fn point_mass(mass: f64, at: Vec3) -> Body {
        Body {
            mass,
            com: at,
            inertia_com: Mat3::zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelJoint {
    pub name: String,
    pub parent: Option<usize>,
    /// Joint frame relative to the parent body frame (or the base frame for roots).
    pub placement_rot: Mat3,
    pub placement_pos: Vec3,
    pub joint_type: JointType,
    /// Unit axis in the joint frame.
    pub axis: Vec3,
    pub stiffness: f64,
    pub damping: f64,
    /// Built-in angle (or offset) of the unloaded joint; coordinates are deflections from it.
    pub rest: f64,
    pub armature: f64,
    pub body: Body,
}

/// A point rigidly attached to a body, offset given in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRef {
    pub body: usize,
    pub offset: Vec3,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultibodyModel {
    pub joints: Vec<ModelJoint>,
}

impl MultibodyModel {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.joints.iter().map(|j| j.body.mass).sum()
    }

    /// Push a joint, returning its index.
    pub fn push(&mut self, joint: ModelJoint) -> usize {
        if let Some(p) = joint.parent {
            assert!(p < self.joints.len(), "parent must precede child");
        }
        self.joints.push(joint);
        self.joints.len() - 1
    }

    /// Attach extra mass to an existing body.
    pub fn add_mass(&mut self, body: usize, piece: &Body) {
        let b = &mut self.joints[body].body;
        *b = b.merge(piece);
    }
}

/// Handles to the interesting points of a beam inside a model.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamHandles {
    pub first_joint: usize,
    pub last_body: usize,
    /// Distal end of the last link.
    pub tip: PointRef,
    pub foot_corner: Option<PointRef>,
    pub markers: [PointRef; 3],
}

impl BeamHandles {
    /// The tracked end point: the foot corner when a foot is present, otherwise the tip.
    pub fn end_point(&self) -> PointRef {
        self.foot_corner.unwrap_or(self.tip)
    }
}

/// Marker triad spacing along the distal link's width direction, mm.
pub const DEFAULT_MARKER_SPACING_MM: f64 = 5.0;

/// Append a beam chain to `model`, hanging from `parent` (or the base when `None`).
///
/// `mount_rot`/`mount_pos` place the beam's base frame in the parent frame.
pub fn append_beam(
    model: &mut MultibodyModel,
    spec: &BeamChainSpec,
    parent: Option<usize>,
    mount_rot: Mat3,
    mount_pos: Vec3,
    marker_spacing_mm: f64,
) -> BeamHandles {
    let mm = 1e-3;
    let first = model.joints.len();
    let mut prev_station = 0.0;
    let mut natural_rot = Mat3::identity();
    let n = spec.joints.len();

    for (i, js) in spec.joints.iter().enumerate() {
        let axis = Vec3::new(js.axis[0], js.axis[1], js.axis[2]);
        let (placement_rot, placement_pos) = if i == 0 {
            (mount_rot, mount_pos + mount_rot * Vec3::new(js.station_mm * mm, 0.0, 0.0))
        } else {
            (Mat3::identity(), Vec3::new((js.station_mm - prev_station) * mm, 0.0, 0.0))
        };
        let next_station = spec.joints.get(i + 1).map(|j| j.station_mm);
        let mut body = Body::EMPTY;
        for link in &spec.links {
            let owned = link.start_mm >= js.station_mm - 1e-9
                && next_station.map_or(true, |s| link.start_mm < s - 1e-9);
            if owned {
                let c = link.com_offset_mm;
                let piece = Body {
                    mass: link.mass_g * 1e-3,
                    com: Vec3::new((link.start_mm - js.station_mm + c[0]) * mm, c[1] * mm, c[2] * mm),
                    inertia_com: Mat3::from_fn(|r, k| link.inertia_kg_m2[r][k]),
                };
                body = body.merge(&piece);
            }
        }
        model.push(ModelJoint {
            name: js.name.clone(),
            parent: if i == 0 { parent } else { Some(first + i - 1) },
            placement_rot,
            placement_pos,
            joint_type: JointType::Revolute,
            axis,
            stiffness: js.stiffness_nm_per_rad,
            damping: js.damping_nms_per_rad,
            rest: js.rest_angle_rad(),
            armature: js.armature_kg_m2,
            body,
        });
        natural_rot *= axis_angle(&axis, js.rest_angle_rad());
        prev_station = js.station_mm;
    }

    let last_body = first + n - 1;
    let tip_local = Vec3::new((spec.geometry.length_mm - prev_station) * mm, 0.0, 0.0);
    let tip = PointRef {
        body: last_body,
        offset: tip_local,
    };
    let foot_corner = spec.foot.as_ref().map(|foot| {
        let corner = Vec3::new(foot.corner_offset_mm[0], foot.corner_offset_mm[1], foot.corner_offset_mm[2]) * mm;
        let offset = tip_local + natural_rot.transpose() * corner;
        model.add_mass(last_body, &Body::point_mass(foot.mass_g * 1e-3, offset));
        PointRef { body: last_body, offset }
    });
    let w = Vec3::new(0.0, marker_spacing_mm * mm, 0.0);
    let markers = [
        PointRef { body: last_body, offset: tip_local + w },
        tip,
        PointRef { body: last_body, offset: tip_local - w },
    ];
    BeamHandles {
        first_joint: first,
        last_body,
        tip,
        foot_corner,
        markers,
    }
}

/// A single beam driven at its base.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamModel {
    pub model: MultibodyModel,
    pub handles: BeamHandles,
}

impl BeamModel {
    pub fn new(spec: &BeamChainSpec) -> Self {
        Self::with_marker_spacing(spec, DEFAULT_MARKER_SPACING_MM)
    }

    pub fn with_marker_spacing(spec: &BeamChainSpec, spacing_mm: f64) -> Self {
        let mut model = MultibodyModel::default();
        let handles = append_beam(&mut model, spec, None, Mat3::identity(), Vec3::zeros(), spacing_mm);
        Self { model, handles }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{paper_fit_beam, FootSpec};

    #[test]
    fn beam_bodies_carry_the_link_masses() {
        let spec = paper_fit_beam(90.0, None).unwrap();
        let bm = BeamModel::new(&spec);
        let m: Vec<f64> = bm.model.joints.iter().map(|j| j.body.mass).collect();
        assert_eq!(m[0], 0.0);
        assert_eq!(m[1], 0.0);
        assert!((m[2] - 2.446444e-3).abs() < 1e-15);
        assert_eq!(m[3], 0.0);
        assert!((m[4] - 2.723556e-3).abs() < 1e-15);
        assert!((bm.model.total_mass() - 5.17e-3).abs() < 1e-15);
        // R3 sits at the end of link 2
        assert!((bm.model.joints[3].placement_pos.x - 0.02366).abs() < 1e-15);
        assert!((bm.handles.tip.offset.x - 0.02634).abs() < 1e-15);
    }

    #[test]
    fn foot_corner_is_expressed_in_the_twisted_link_frame() {
        let spec = paper_fit_beam(90.0, Some(FootSpec::contact_rig())).unwrap();
        let bm = BeamModel::new(&spec);
        let corner = bm.handles.foot_corner.unwrap();
        // link 3 is rotated +90° about X at rest, so world −Z maps to local −Y
        assert!((corner.offset - Vec3::new(0.02634 + 0.06, -0.0665, 0.0)).norm() < 1e-12);
        assert!((bm.model.total_mass() - 25.17e-3).abs() < 1e-15);
    }

    #[test]
    fn merge_uses_parallel_axis() {
        let a = Body::point_mass(1.0, Vec3::new(1.0, 0.0, 0.0));
        let b = Body::point_mass(1.0, Vec3::new(-1.0, 0.0, 0.0));
        let m = a.merge(&b);
        assert_eq!(m.com, Vec3::zeros());
        assert!((m.inertia_com[(1, 1)] - 2.0).abs() < 1e-15);
        assert!((m.inertia_com[(0, 0)]).abs() < 1e-15);
    }
}
