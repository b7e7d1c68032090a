//! Pseudo-rigid-body description of a twisted beam.
//!
//! A beam is a serial chain rooted at the driven base. Bending joints rotate
//! about an axis perpendicular to the local beam direction (local +X), twist
//! joints rotate about the local beam direction itself. Joint rest angles
//! encode the natural (unloaded) shape, so a pre-twisted beam is a chain whose
//! twist joints rest at a nonzero angle.
//!
//! Everything in this module is expressed in the units used by the JSON
//! documents (mm, g, degrees, N·m/rad). [`crate::model`] converts to SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag written into serialized chain documents.
pub const CHAIN_FORMAT_VERSION: u32 = 1;

/// Fitted bending stiffness of the prototype beam, N·m/rad.
pub const PAPER_FIT_STIFFNESS: f64 = 0.340;
/// Fitted joint damping of the prototype beam, N·m·s/rad.
pub const PAPER_FIT_DAMPING: f64 = 0.0029;
/// Fitted distance between the second and third bending joints, mm.
pub const PAPER_FIT_L2_MM: f64 = 23.66;
/// Fitted distance between the third bending joint and the tip, mm.
pub const PAPER_FIT_L3_MM: f64 = 26.34;

/// Reflected rotor inertia added to every joint of a built beam, kg·m².
///
/// With `l1 = 0` the first two bending joints share a pivot; for an untwisted
/// beam their axes coincide and the mass matrix would be singular without it.
pub const DEFAULT_ARMATURE: f64 = 1e-8;

const LENGTH_TOL_MM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub length_mm: f64,
    pub width_mm: f64,
    pub thickness_mm: f64,
    /// Total twist, signed. Positive is right-handed.
    pub twist_deg: f64,
    /// Twist carried by each twist joint (magnitude).
    pub segment_twist_deg: f64,
    pub density_kg_per_m3: f64,
    pub mass_g: f64,
}

impl BeamGeometry {
    /// The 50 mm TPU prototype with a right-handed 90° twist.
    pub fn prototype() -> Self {
        Self {
            length_mm: 50.0,
            width_mm: 20.0,
            thickness_mm: 3.0,
            twist_deg: 90.0,
            segment_twist_deg: 45.0,
            density_kg_per_m3: 1210.0,
            mass_g: 5.17,
        }
    }

    /// Same beam with a different total twist, split evenly over two twist joints.
    pub fn with_twist(&self, twist_deg: f64) -> Self {
        Self {
            twist_deg,
            segment_twist_deg: twist_deg.abs() / 2.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length_mm),
            ("mass", self.mass_g),
            ("density", self.density_kg_per_m3),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        if self.width_mm < 0.0 || self.thickness_mm < 0.0 {
            return Err(Error::Geometry("width and thickness must be non-negative".into()));
        }
        if !(self.twist_deg.abs() <= 180.0) {
            return Err(Error::Geometry(format!(
                "total twist {} deg outside [-180, 180]",
                self.twist_deg
            )));
        }
        if self.segment_twist_deg < 0.0 || !self.segment_twist_deg.is_finite() {
            return Err(Error::Geometry("segment twist must be a non-negative magnitude".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Bending,
    Twist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    /// Unit axis in the parent link frame (local +X runs along the beam).
    pub axis: [f64; 3],
    pub stiffness_nm_per_rad: f64,
    pub damping_nms_per_rad: f64,
    pub rest_angle_deg: f64,
    /// Axial station measured from the base.
    pub station_mm: f64,
    #[serde(default)]
    pub armature_kg_m2: f64,
}

impl JointSpec {
    pub fn rest_angle_rad(&self) -> f64 {
        self.rest_angle_deg.to_radians()
    }
}

/// A rigid beam segment. Mass properties follow a uniform rectangular bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub start_mm: f64,
    pub length_mm: f64,
    pub mass_g: f64,
    /// Centre of mass relative to the link start, link frame.
    pub com_offset_mm: [f64; 3],
    /// Inertia about the centre of mass, link frame.
    pub inertia_kg_m2: [[f64; 3]; 3],
}

impl LinkSpec {
    /// Uniform bar along local X with the cross-section's width on Y and thickness on Z.
    pub fn uniform_bar(start_mm: f64, length_mm: f64, mass_g: f64, width_mm: f64, thickness_mm: f64) -> Self {
        let m = mass_g * 1e-3;
        let (l, w, t) = (length_mm * 1e-3, width_mm * 1e-3, thickness_mm * 1e-3);
        let ixx = m * (w * w + t * t) / 12.0;
        let iyy = m * (l * l + t * t) / 12.0;
        let izz = m * (l * l + w * w) / 12.0;
        Self {
            start_mm,
            length_mm,
            mass_g,
            com_offset_mm: [length_mm / 2.0, 0.0, 0.0],
            inertia_kg_m2: [[ixx, 0.0, 0.0], [0.0, iyy, 0.0], [0.0, 0.0, izz]],
        }
    }

    pub fn end_mm(&self) -> f64 {
        self.start_mm + self.length_mm
    }
}

/// Rigid foot carried by the distal link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootSpec {
    pub length_mm: f64,
    /// Point load attached at the contact corner.
    pub mass_g: f64,
    /// Contact corner relative to the beam tip, in base-frame axes at the natural pose.
    pub corner_offset_mm: [f64; 3],
}

/// Reach of the contact rig's load frame along the beam axis beyond the tip, mm.
pub const CONTACT_RIG_REACH_MM: f64 = 60.0;

impl FootSpec {
    /// 66.5 mm foot whose lower load corner (20 g) sits ahead of the tip, as on the contact rig.
    ///
    /// The reach puts the static sag of the fitted beam beyond the 5.5 mm rig gap
    /// plus the 2 mm drive amplitude, so the foot rests on the plate at low frequency.
    pub fn contact_rig() -> Self {
        Self {
            length_mm: 66.5,
            mass_g: 20.0,
            corner_offset_mm: [CONTACT_RIG_REACH_MM, 0.0, -66.5],
        }
    }

    /// Foot hanging straight below the tip.
    pub fn hanging(length_mm: f64, mass_g: f64) -> Self {
        Self {
            length_mm,
            mass_g,
            corner_offset_mm: [0.0, 0.0, -length_mm],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamChainSpec {
    pub geometry: BeamGeometry,
    pub joints: Vec<JointSpec>,
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub foot: Option<FootSpec>,
}

/// Optional knobs for [`build_twisted_beam_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamOptions {
    /// Twist joint stiffness; defaults to the bending stiffness.
    pub twist_stiffness: Option<f64>,
    /// Twist joint damping; defaults to the bending damping.
    pub twist_damping: Option<f64>,
    pub armature_kg_m2: f64,
}

impl Default for BeamOptions {
    fn default() -> Self {
        Self {
            twist_stiffness: None,
            twist_damping: None,
            armature_kg_m2: DEFAULT_ARMATURE,
        }
    }
}

/// Split a total mass over segments in proportion to their lengths.
///
/// The last segment absorbs the rounding remainder so the masses sum to `mass`.
pub fn distribute_mass(mass: f64, length: f64, segments: &[f64]) -> Result<Vec<f64>> {
    if segments.is_empty() {
        return Err(Error::Chain("no segments to distribute mass over".into()));
    }
    if let Some(bad) = segments.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::Chain(format!("segment length must be positive, got {bad}")));
    }
    let total: f64 = segments.iter().sum();
    if (total - length).abs() > LENGTH_TOL_MM.max(1e-12 * length.abs()) {
        return Err(Error::Chain(format!(
            "segments sum to {total}, expected {length}"
        )));
    }
    let mut masses: Vec<f64> = segments[..segments.len() - 1]
        .iter()
        .map(|s| mass * s / length)
        .collect();
    let assigned: f64 = masses.iter().sum();
    masses.push(mass - assigned);
    Ok(masses)
}

/// Build the simplified twisted beam with default options.
pub fn build_twisted_beam(
    geometry: &BeamGeometry,
    stiffness: f64,
    damping: f64,
    l2_mm: f64,
    l3_mm: f64,
    foot: Option<FootSpec>,
) -> Result<BeamChainSpec> {
    build_twisted_beam_with(geometry, stiffness, damping, l2_mm, l3_mm, foot, &BeamOptions::default())
}

/// Build the simplified (`l1 = 0`) twisted beam.
///
/// Layout from the base: R1 (bend) → R4 (twist) → R2 (bend) at station 0,
/// link 2, then R5 (twist) → R3 (bend) at station `l2`, link 3 up to the tip.
pub fn build_twisted_beam_with(
    geometry: &BeamGeometry,
    stiffness: f64,
    damping: f64,
    l2_mm: f64,
    l3_mm: f64,
    foot: Option<FootSpec>,
    options: &BeamOptions,
) -> Result<BeamChainSpec> {
    geometry.validate()?;
    if stiffness < 0.0 || !stiffness.is_finite() {
        return Err(Error::Negative { what: "stiffness", value: stiffness });
    }
    if damping < 0.0 || !damping.is_finite() {
        return Err(Error::Negative { what: "damping", value: damping });
    }
    if !(l2_mm > 0.0 && l3_mm > 0.0)
        || (l2_mm + l3_mm - geometry.length_mm).abs() > LENGTH_TOL_MM
    {
        return Err(Error::SegmentMismatch {
            l2_mm,
            l3_mm,
            length_mm: geometry.length_mm,
        });
    }
    let twist_k = options.twist_stiffness.unwrap_or(stiffness);
    let twist_b = options.twist_damping.unwrap_or(damping);
    if twist_k < 0.0 || twist_b < 0.0 {
        return Err(Error::Negative { what: "twist stiffness/damping", value: twist_k.min(twist_b) });
    }
    let rest_twist = signum_or_zero(geometry.twist_deg) * geometry.segment_twist_deg;
    if (2.0 * rest_twist - geometry.twist_deg).abs() > 1e-9 {
        return Err(Error::Geometry(format!(
            "two twist joints of {} deg do not add up to the total twist {} deg",
            geometry.segment_twist_deg, geometry.twist_deg
        )));
    }

    let bend = |name: &str, station: f64| JointSpec {
        name: name.into(),
        kind: JointKind::Bending,
        axis: [0.0, 1.0, 0.0],
        stiffness_nm_per_rad: stiffness,
        damping_nms_per_rad: damping,
        rest_angle_deg: 0.0,
        station_mm: station,
        armature_kg_m2: options.armature_kg_m2,
    };
    let twist = |name: &str, station: f64| JointSpec {
        name: name.into(),
        kind: JointKind::Twist,
        axis: [1.0, 0.0, 0.0],
        stiffness_nm_per_rad: twist_k,
        damping_nms_per_rad: twist_b,
        rest_angle_deg: rest_twist,
        station_mm: station,
        armature_kg_m2: options.armature_kg_m2,
    };
    let joints = vec![
        bend("R1", 0.0),
        twist("R4", 0.0),
        bend("R2", 0.0),
        twist("R5", l2_mm),
        bend("R3", l2_mm),
    ];

    let masses = distribute_mass(geometry.mass_g, geometry.length_mm, &[l2_mm, l3_mm])?;
    let links = vec![
        LinkSpec::uniform_bar(0.0, l2_mm, masses[0], geometry.width_mm, geometry.thickness_mm),
        LinkSpec::uniform_bar(l2_mm, l3_mm, masses[1], geometry.width_mm, geometry.thickness_mm),
    ];

    let spec = BeamChainSpec {
        geometry: geometry.clone(),
        joints,
        links,
        foot,
    };
    spec.validate()?;
    Ok(spec)
}

/// The beam with the fitted constants, optionally carrying a foot.
pub fn paper_fit_beam(twist_deg: f64, foot: Option<FootSpec>) -> Result<BeamChainSpec> {
    build_twisted_beam(
        &BeamGeometry::prototype().with_twist(twist_deg),
        PAPER_FIT_STIFFNESS,
        PAPER_FIT_DAMPING,
        PAPER_FIT_L2_MM,
        PAPER_FIT_L3_MM,
        foot,
    )
}

/// Opposite-handed copy: total twist and every twist rest angle change sign.
pub fn mirror_chirality(spec: &BeamChainSpec) -> BeamChainSpec {
    let mut out = spec.clone();
    out.geometry.twist_deg = negate(out.geometry.twist_deg);
    for joint in out.joints.iter_mut().filter(|j| j.kind == JointKind::Twist) {
        joint.rest_angle_deg = negate(joint.rest_angle_deg);
    }
    out
}

fn negate(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x
    }
}

fn signum_or_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

impl BeamChainSpec {
    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn link_masses_g(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.mass_g).collect()
    }

    /// Check the structural invariants of the chain.
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.joints.is_empty() {
            return Err(Error::Chain("chain has no joints".into()));
        }
        if self.links.is_empty() {
            return Err(Error::Chain("chain has no links".into()));
        }
        let l = self.geometry.length_mm;
        let mut last_station = 0.0;
        for j in &self.joints {
            let norm = (j.axis[0].powi(2) + j.axis[1].powi(2) + j.axis[2].powi(2)).sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Chain(format!("joint {} axis is not unit length", j.name)));
            }
            match j.kind {
                JointKind::Bending if j.axis[0].abs() > 1e-9 => {
                    return Err(Error::Chain(format!(
                        "bending joint {} axis is not perpendicular to the beam",
                        j.name
                    )))
                }
                JointKind::Twist if (j.axis[0].abs() - 1.0).abs() > 1e-9 => {
                    return Err(Error::Chain(format!(
                        "twist joint {} axis is not along the beam",
                        j.name
                    )))
                }
                _ => {}
            }
            if j.stiffness_nm_per_rad < 0.0 || j.damping_nms_per_rad < 0.0 || j.armature_kg_m2 < 0.0 {
                return Err(Error::Negative {
                    what: "joint stiffness/damping/armature",
                    value: j.stiffness_nm_per_rad.min(j.damping_nms_per_rad).min(j.armature_kg_m2),
                });
            }
            if j.station_mm < last_station || j.station_mm > l + LENGTH_TOL_MM {
                return Err(Error::Chain(format!(
                    "joint {} station {} mm is out of order or beyond the tip",
                    j.name, j.station_mm
                )));
            }
            last_station = j.station_mm;
        }
        if self.joints[0].station_mm != 0.0 {
            return Err(Error::Chain("the first joint must sit at the base".into()));
        }

        let mut cursor = 0.0;
        for link in &self.links {
            if (link.start_mm - cursor).abs() > LENGTH_TOL_MM || !(link.length_mm > 0.0) {
                return Err(Error::Chain(format!(
                    "links must tile the beam contiguously (gap at {cursor} mm)"
                )));
            }
            if link.mass_g < 0.0 {
                return Err(Error::Negative { what: "link mass", value: link.mass_g });
            }
            if let Some(j) = self
                .joints
                .iter()
                .find(|j| j.station_mm > link.start_mm + LENGTH_TOL_MM && j.station_mm < link.end_mm() - LENGTH_TOL_MM)
            {
                return Err(Error::Chain(format!(
                    "joint {} lies inside a link; split the link at {} mm",
                    j.name, j.station_mm
                )));
            }
            cursor = link.end_mm();
        }
        if (cursor - l).abs() > LENGTH_TOL_MM {
            return Err(Error::Chain(format!("links cover {cursor} mm of a {l} mm beam")));
        }
        let total_mass: f64 = self.links.iter().map(|k| k.mass_g).sum();
        if (total_mass - self.geometry.mass_g).abs() > 1e-9 * self.geometry.mass_g.max(1.0) {
            return Err(Error::Chain(format!(
                "link masses sum to {total_mass} g, beam mass is {} g",
                self.geometry.mass_g
            )));
        }
        let twist_sum: f64 = self
            .joints
            .iter()
            .filter(|j| j.kind == JointKind::Twist)
            .map(|j| j.rest_angle_deg)
            .sum();
        if (twist_sum - self.geometry.twist_deg).abs() > 1e-9 {
            return Err(Error::Chain(format!(
                "twist joints carry {twist_sum} deg, geometry says {} deg",
                self.geometry.twist_deg
            )));
        }
        if let Some(foot) = &self.foot {
            if foot.mass_g < 0.0 || foot.length_mm < 0.0 {
                return Err(Error::Negative { what: "foot mass/length", value: foot.mass_g.min(foot.length_mm) });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ChainDocument {
            version: CHAIN_FORMAT_VERSION,
            chain: self.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse {
            what: "chain document".into(),
            message: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChainDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "chain document".into(),
            message: e.to_string(),
        })?;
        if doc.version != CHAIN_FORMAT_VERSION {
            return Err(Error::Parse {
                what: "chain document".into(),
                message: format!("unsupported version {}", doc.version),
            });
        }
        doc.chain.validate()?;
        Ok(doc.chain)
    }
}

#[derive(Serialize, Deserialize)]
struct ChainDocument {
    version: u32,
    #[serde(flatten)]
    chain: BeamChainSpec,
}
