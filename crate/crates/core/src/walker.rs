//! Two-legged vibration walker on a planar floating body.
//!
//! The body slides along X, rises along Z and pitches about Y; both legs are
//! twisted beams cantilevered sideways from the plate, mirrored across the
//! sagittal (X–Z) plane. A rotating imbalance force drives the plate, and a
//! tail point with its own friction carries the cart load.

use serde::{Deserialize, Serialize};

use crate::chain::{mirror_chirality, paper_fit_beam, BeamChainSpec, FootSpec};
use crate::contact::{contact_force_planar, friction_damping, ContactConfig};
use crate::dynamics::{ChainState, DriveSignal, Integrator, PointLoad, SimConfig, Stepper, STANDARD_GRAVITY};
use crate::error::{Error, Result};
use crate::model::{append_beam, Body, JointType, ModelJoint, MultibodyModel, PointRef, DEFAULT_MARKER_SPACING_MM};
use crate::spatial::{axis_angle, Mat3, Vec3};

const MM: f64 = 1e-3;
const G: f64 = 1e-3;

/// One leg: a beam spec and its root pose on the plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerLeg {
    pub beam: BeamChainSpec,
    /// Beam root in the body frame.
    pub mount_mm: [f64; 3],
    /// Rotation of the beam axis about body Z; +90 points the beam along +Y.
    pub yaw_deg: f64,
}

impl WalkerLeg {
    /// Reflection across the sagittal plane.
    pub fn mirrored(&self) -> WalkerLeg {
        WalkerLeg {
            beam: mirror_chirality(&self.beam),
            mount_mm: [self.mount_mm[0], -self.mount_mm[1], self.mount_mm[2]],
            yaw_deg: -self.yaw_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkerSpec {
    /// Plate, motor and payload, excluding the imbalance mass.
    pub body_mass_g: f64,
    /// Pitch inertia of the body about its centre of mass.
    pub body_pitch_inertia_kg_m2: f64,
    pub legs: [WalkerLeg; 2],
    pub imbalance_mass_g: f64,
    pub eccentricity_mm: f64,
    pub motor_mount_mm: [f64; 3],
    /// Tail support point in the body frame; the cart load sits on it.
    pub tail_point_mm: [f64; 3],
    pub tail_load_g: f64,
    pub tail_friction: f64,
    /// Normal law and foot friction; the ground is the plane z = 0.
    pub contact: ContactConfig,
    /// Foot clearance at release, before settling.
    pub initial_clearance_mm: f64,
}

impl Default for WalkerSpec {
    fn default() -> Self {
        let leg = paper_fit_beam(90.0, Some(FootSpec::hanging(40.0, 5.0))).expect("preset beam is valid");
        let left = WalkerLeg {
            beam: leg,
            mount_mm: [40.0, 30.0, 0.0],
            yaw_deg: 90.0,
        };
        let right = left.mirrored();
        Self {
            body_mass_g: 80.0,
            body_pitch_inertia_kg_m2: 2e-4,
            legs: [left, right],
            imbalance_mass_g: 40.0,
            eccentricity_mm: 1.0,
            motor_mount_mm: [0.0, 0.0, 15.0],
            tail_point_mm: [-215.0, 0.0, -40.0],
            tail_load_g: 100.0,
            tail_friction: 0.05,
            contact: ContactConfig {
                natural_gap_m: 0.0,
                ground_height_m: Some(0.0),
                ..ContactConfig::default()
            },
            initial_clearance_mm: 0.5,
        }
    }
}

impl WalkerSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("walker: {m}")));
        for (what, v) in [
            ("body mass", self.body_mass_g),
            ("body pitch inertia", self.body_pitch_inertia_kg_m2),
            ("imbalance mass", self.imbalance_mass_g),
            ("eccentricity", self.eccentricity_mm),
            ("tail load", self.tail_load_g),
            ("tail friction", self.tail_friction),
            ("initial clearance", self.initial_clearance_mm),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{what} must be non-negative, got {v}"));
            }
        }
        if !(self.body_mass_g > 0.0) {
            return bad("body mass must be positive".into());
        }
        for leg in &self.legs {
            leg.beam.validate()?;
            if leg.beam.foot.is_none() {
                return bad("every leg needs a foot".into());
            }
        }
        if self.legs[1] != self.legs[0].mirrored() {
            return bad("legs must be exact mirror images across the sagittal plane".into());
        }
        self.contact.validate()
    }

    /// The walker reflected across its sagittal plane: each leg flips chirality and side.
    pub fn mirrored(&self) -> WalkerSpec {
        WalkerSpec {
            legs: [self.legs[1].mirrored(), self.legs[0].mirrored()],
            motor_mount_mm: [self.motor_mount_mm[0], -self.motor_mount_mm[1], self.motor_mount_mm[2]],
            tail_point_mm: [self.tail_point_mm[0], -self.tail_point_mm[1], self.tail_point_mm[2]],
            ..self.clone()
        }
    }

    pub fn total_mass_kg(&self) -> f64 {
        let legs: f64 = self
            .legs
            .iter()
            .map(|l| l.beam.links.iter().map(|k| k.mass_g).sum::<f64>() + l.beam.foot.as_ref().map_or(0.0, |f| f.mass_g))
            .sum();
        (self.body_mass_g + self.imbalance_mass_g + self.tail_load_g + legs) * G
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Compiled walker: joint 0 slides X, 1 slides Z, 2 pitches the plate.
#[derive(Debug, Clone)]
pub struct WalkerModel {
    pub model: MultibodyModel,
    pub feet: [PointRef; 2],
    pub tail: PointRef,
    pub motor: PointRef,
    /// Body height at q = 0.
    pub release_height_m: f64,
}

pub const BODY_X: usize = 0;
pub const BODY_Z: usize = 1;
pub const BODY_PITCH: usize = 2;

impl WalkerModel {
    pub fn new(spec: &WalkerSpec) -> Result<Self> {
        spec.validate()?;
        let armature = spec.legs[0].beam.joints[0].armature_kg_m2;
        let slider = |name: &str, parent, axis| ModelJoint {
            name: name.into(),
            parent,
            placement_rot: Mat3::identity(),
            placement_pos: Vec3::zeros(),
            joint_type: JointType::Prismatic,
            axis,
            stiffness: 0.0,
            damping: 0.0,
            rest: 0.0,
            armature,
            body: Body::EMPTY,
        };
        let mut model = MultibodyModel::default();
        model.push(slider("body_x", None, Vec3::x()));
        model.push(slider("body_z", Some(BODY_X), Vec3::z()));
        let mut plate = Body {
            mass: spec.body_mass_g * G,
            com: Vec3::zeros(),
            inertia_com: Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 1.0)) * spec.body_pitch_inertia_kg_m2,
        };
        plate = plate.merge(&Body::point_mass(spec.imbalance_mass_g * G, v3(spec.motor_mount_mm) * MM));
        plate = plate.merge(&Body::point_mass(spec.tail_load_g * G, v3(spec.tail_point_mm) * MM));
        model.push(ModelJoint {
            name: "body_pitch".into(),
            parent: Some(BODY_Z),
            joint_type: JointType::Revolute,
            axis: Vec3::y(),
            body: plate,
            ..slider("", None, Vec3::y())
        });
        let mut feet = [PointRef { body: 0, offset: Vec3::zeros() }; 2];
        let mut lowest = f64::INFINITY;
        for (k, leg) in spec.legs.iter().enumerate() {
            let rot = axis_angle(&Vec3::z(), leg.yaw_deg.to_radians());
            let mount = v3(leg.mount_mm) * MM;
            let h = append_beam(&mut model, &leg.beam, Some(BODY_PITCH), rot, mount, DEFAULT_MARKER_SPACING_MM);
            feet[k] = h.end_point();
            let corner = leg.beam.foot.as_ref().map_or(Vec3::zeros(), |f| v3(f.corner_offset_mm) * MM);
            let tip = rot * Vec3::new(leg.beam.geometry.length_mm * MM, 0.0, 0.0);
            lowest = lowest.min((mount + tip + rot * corner).z);
        }
        let tail = PointRef {
            body: BODY_PITCH,
            offset: v3(spec.tail_point_mm) * MM,
        };
        lowest = lowest.min(tail.offset.z);
        let release_height_m = spec.initial_clearance_mm * MM - lowest;
        model.joints[BODY_Z].rest = release_height_m;
        Ok(Self {
            model,
            feet,
            tail,
            motor: PointRef {
                body: BODY_PITCH,
                offset: v3(spec.motor_mount_mm) * MM,
            },
            release_height_m,
        })
    }
}

/// Run settings shared by every frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkerRun {
    pub duration_s: f64,
    pub dt_s: f64,
    /// Fraction of the run (from the start) excluded from the displacement measure.
    pub discard_fraction: f64,
    pub integrator: Integrator,
    /// Samples per gait snapshot.
    pub snapshot_samples: usize,
}

impl Default for WalkerRun {
    fn default() -> Self {
        Self {
            duration_s: 5.0,
            dt_s: 1e-4,
            discard_fraction: 0.5,
            integrator: Integrator::SemiImplicitEuler,
            snapshot_samples: 64,
        }
    }
}

impl WalkerRun {
    pub fn validate(&self) -> Result<()> {
        if !(self.discard_fraction >= 0.0 && self.discard_fraction < 1.0) {
            return Err(Error::Config("walker: discard fraction must be in [0, 1)".into()));
        }
        if self.snapshot_samples < 2 {
            return Err(Error::Config("walker: snapshots need at least 2 samples".into()));
        }
        self.sim().validate()
    }

    fn sim(&self) -> SimConfig {
        SimConfig {
            dt_s: self.dt_s,
            duration_s: self.duration_s,
            gravity_m_per_s2: [0.0, 0.0, -STANDARD_GRAVITY],
            integrator: self.integrator,
            record_stride: 1,
        }
    }
}

/// Outcome of one walker run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkerRow {
    pub frequency_hz: f64,
    /// Body X travel over the measured window.
    pub net_displacement_m: f64,
    pub mean_speed_m_per_s: f64,
    /// Peak |Y| of each foot relative to its settled position over the window.
    pub foot_lateral_m: [f64; 2],
    /// Reason the run was cut short, if it was.
    pub flag: Option<String>,
    /// Left-foot path over the last drive period, body-relative (x, z).
    pub snapshot: Vec<[f64; 2]>,
}

impl WalkerRow {
    pub fn sign(&self) -> i8 {
        if self.flag.is_some() || self.net_displacement_m.abs() < 1e-6 {
            0
        } else if self.net_displacement_m > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Contact loads on feet and tail; returns the lowest point height.
fn contact_loads(wm: &WalkerModel, spec: &WalkerSpec, stepper: &Stepper, friction: bool, out: &mut Vec<PointLoad>) -> f64 {
    let kin = &stepper.dynamics.kin;
    let mut lowest = f64::INFINITY;
    let mut foot_cfg = spec.contact.clone();
    let mut tail_cfg = spec.contact.clone();
    tail_cfg.friction_coefficient = spec.tail_friction;
    if !friction {
        foot_cfg.friction_coefficient = 0.0;
        tail_cfg.friction_coefficient = 0.0;
    }
    let ground = spec.contact.ground_height_m.unwrap_or(0.0);
    let points = [(wm.feet[0], &foot_cfg), (wm.feet[1], &foot_cfg), (wm.tail, &tail_cfg)];
    for (p, cfg) in points {
        let x = kin.point_position(&p);
        let v = kin.point_velocity(&p);
        let gap = x.z - ground;
        lowest = lowest.min(gap);
        let (f_n, f_t) = contact_force_planar(gap, v.z, v, cfg);
        if f_n > 0.0 {
            out.push(PointLoad {
                point: p,
                force: Vec3::new(f_t.x, f_t.y, f_n),
                tangential_damping: friction_damping(f_n, v, cfg),
            });
        }
    }
    lowest
}

/// Drop the walker onto the ground and let it come to rest, first without friction, then with it.
pub fn settle_walker(wm: &WalkerModel, spec: &WalkerSpec, run: &WalkerRun) -> Result<ChainState> {
    // Body joints get their own settling damping; the beam-sized default would take minutes.
    let mut damped = wm.model.clone();
    damped.joints[BODY_X].damping = 5.0;
    damped.joints[BODY_Z].damping = 5.0;
    damped.joints[BODY_PITCH].damping = 0.05;
    let model = &damped;
    let drive = DriveSignal::still();
    let sim = run.sim();
    let mut state = ChainState::natural(model, &drive, 0.0);
    let mut stepper = Stepper::new(model);
    stepper.extra_damping = 2e-3;
    let mut loads = Vec::new();
    for friction in [false, true] {
        let mut residual = f64::INFINITY;
        let mut settled = false;
        for k in 0..400_000 {
            loads.clear();
            stepper.dynamics.update(model, &state, &drive);
            contact_loads(wm, spec, &stepper, friction, &mut loads);
            stepper.advance(model, &mut state, &drive, &loads, &sim)?;
            residual = state.v.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if k > 100 && residual < 1e-7 {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(Error::SettleFailed { steps: 400_000, residual });
        }
    }
    state.t = 0.0;
    state.v.iter_mut().for_each(|v| *v = 0.0);
    Ok(state)
}

/// Drive the settled walker at `frequency_hz` (0 leaves the motor off).
pub fn run_walker_at(
    wm: &WalkerModel,
    spec: &WalkerSpec,
    settled: &ChainState,
    frequency_hz: f64,
    run: &WalkerRun,
) -> Result<WalkerRow> {
    if !(frequency_hz >= 0.0) {
        return Err(Error::Config(format!("walker frequency must be non-negative, got {frequency_hz}")));
    }
    let model = &wm.model;
    let drive = DriveSignal::still();
    let sim = run.sim();
    let omega = 2.0 * std::f64::consts::PI * frequency_hz;
    let magnitude = spec.imbalance_mass_g * G * spec.eccentricity_mm * MM * omega * omega;
    let mut state = settled.clone();
    let mut stepper = Stepper::new(model);
    let mut loads = Vec::new();
    let steps = sim.steps();
    let start = (steps as f64 * run.discard_fraction).round() as usize;
    let snapshot_from = if frequency_hz > 0.0 {
        steps.saturating_sub((1.0 / (frequency_hz * run.dt_s)).round() as usize)
    } else {
        steps
    };

    stepper.dynamics.update(model, &state, &drive);
    let foot_rest = wm.feet.map(|f| stepper.dynamics.kin.point_position(&f).y);
    let mut lateral = [0.0_f64; 2];
    let mut x_start = state.q[BODY_X];
    let mut path = Vec::new();
    let mut flag = None;
    for k in 0..=steps {
        loads.clear();
        stepper.dynamics.update(model, &state, &drive);
        contact_loads(wm, spec, &stepper, true, &mut loads);
        let kin = &stepper.dynamics.kin;
        if k == start {
            x_start = state.q[BODY_X];
        }
        if k >= start {
            for (s, f) in wm.feet.iter().enumerate() {
                lateral[s] = lateral[s].max((kin.point_position(f).y - foot_rest[s]).abs());
            }
        }
        if k >= snapshot_from {
            let foot = kin.point_position(&wm.feet[0]);
            let body = kin.origin[BODY_PITCH];
            path.push([foot.x - body.x, foot.z - body.z]);
        }
        let body_z = kin.origin[BODY_PITCH].z;
        if body_z < spec.contact.ground_height_m.unwrap_or(0.0) {
            flag = Some(format!("body below ground at t = {:.4} s", state.t));
            break;
        }
        if k == steps {
            break;
        }
        if magnitude > 0.0 {
            let phase = omega * state.t;
            loads.push(PointLoad::new(wm.motor, Vec3::new(phase.cos(), 0.0, phase.sin()) * magnitude));
        }
        if let Err(e) = stepper.advance(model, &mut state, &drive, &loads, &sim) {
            if !e.is_simulation_failure() {
                return Err(e);
            }
            flag = Some(e.to_string());
            break;
        }
    }
    let window = run.duration_s * (1.0 - run.discard_fraction);
    let (net, speed) = if flag.is_some() {
        (f64::NAN, f64::NAN)
    } else {
        let d = state.q[BODY_X] - x_start;
        (d, d / window)
    };
    Ok(WalkerRow {
        frequency_hz,
        net_displacement_m: net,
        mean_speed_m_per_s: speed,
        foot_lateral_m: lateral,
        flag,
        snapshot: resample(&path, run.snapshot_samples),
    })
}

fn resample(path: &[[f64; 2]], n: usize) -> Vec<[f64; 2]> {
    if path.len() <= n {
        return path.to_vec();
    }
    (0..n).map(|i| path[i * (path.len() - 1) / (n - 1)]).collect()
}

/// Frequencies where the displacement sign differs from the previous unflagged, nonzero row.
pub fn sign_changes(rows: &[WalkerRow]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last = 0;
    for r in rows {
        let s = r.sign();
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            out.push(r.frequency_hz);
        }
        last = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_walker_is_symmetric_and_valid() {
        let spec = WalkerSpec::default();
        spec.validate().unwrap();
        assert_eq!(spec.mirrored(), spec);
        let mut broken = spec.clone();
        broken.legs[1].mount_mm[1] = -25.0;
        assert!(broken.validate().is_err());
    }

    #[test]
    fn release_height_puts_lowest_point_at_the_clearance() {
        let spec = WalkerSpec::default();
        let wm = WalkerModel::new(&spec).unwrap();
        let mut st = Stepper::new(&wm.model);
        let s = ChainState::natural(&wm.model, &DriveSignal::still(), 0.0);
        st.dynamics.update(&wm.model, &s, &DriveSignal::still());
        let kin = &st.dynamics.kin;
        let low = wm
            .feet
            .iter()
            .chain(std::iter::once(&wm.tail))
            .map(|p| kin.point_position(p).z)
            .fold(f64::INFINITY, f64::min);
        assert!((low - 0.5e-3).abs() < 1e-12);
        let y: Vec<f64> = wm.feet.iter().map(|p| kin.point_position(p).y).collect();
        assert!((y[0] + y[1]).abs() < 1e-12 && y[0] > 0.05);
    }

    #[test]
    fn undriven_walker_stays_put() {
        let spec = WalkerSpec::default();
        let wm = WalkerModel::new(&spec).unwrap();
        let run = WalkerRun {
            duration_s: 1.0,
            ..WalkerRun::default()
        };
        let rest = settle_walker(&wm, &spec, &run).unwrap();
        let row = run_walker_at(&wm, &spec, &rest, 0.0, &run).unwrap();
        assert!(row.flag.is_none());
        assert!(row.net_displacement_m.abs() < 1e-6, "{}", row.net_displacement_m);
        assert_eq!(row.sign(), 0);
    }

    #[test]
    fn sign_changes_skip_flagged_rows() {
        let row = |f: f64, d: f64, flag: bool| WalkerRow {
            frequency_hz: f,
            net_displacement_m: d,
            mean_speed_m_per_s: d,
            foot_lateral_m: [0.0; 2],
            flag: flag.then(|| "x".to_string()),
            snapshot: vec![],
        };
        let rows = [row(1.0, 1e-3, false), row(2.0, -1e-3, true), row(3.0, 1e-3, false), row(4.0, -1e-3, false)];
        assert_eq!(sign_changes(&rows), vec![4.0]);
    }
}
