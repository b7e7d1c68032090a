//! Forward dynamics of a kinematic tree with a kinematically driven base.
//!
//! Joint coordinates are deflections from the natural shape, so the natural
//! pose is `q = 0` and rest angles only enter the reference kinematics.
//!
//! Joint-space quantities use the composite-rigid-body method for the mass
//! matrix and recursive Newton–Euler for the velocity and gravity terms, both
//! in world-frame Plücker coordinates. Joint damping is integrated implicitly
//! in the default stepper, which keeps the light twist joints stable at the
//! standard 0.1 ms step.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JointType, MultibodyModel, PointRef};
use crate::spatial::{axis_angle, Force, Mat3, Motion, SpatialInertia, Vec3};

pub const STANDARD_GRAVITY: f64 = 9.81;

/// Prescribed base motion `x = A sin(2π f t + phase)` along `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    pub amplitude_m: f64,
    pub frequency_hz: f64,
    #[serde(default = "z_axis")]
    pub axis: [f64; 3],
    #[serde(default)]
    pub phase_rad: f64,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl DriveSignal {
    pub fn new(amplitude_m: f64, frequency_hz: f64) -> Self {
        Self {
            amplitude_m,
            frequency_hz,
            axis: z_axis(),
            phase_rad: 0.0,
        }
    }

    /// A base that never moves.
    pub fn still() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_m >= 0.0) || !(self.frequency_hz >= 0.0) {
            return Err(Error::Config("drive amplitude and frequency must be non-negative".into()));
        }
        let n = self.axis_vec().norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::Config("drive axis must be a unit vector".into()));
        }
        Ok(())
    }

    pub fn axis_vec(&self) -> Vec3 {
        Vec3::new(self.axis[0], self.axis[1], self.axis[2])
    }

    fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }

    pub fn position(&self, t: f64) -> f64 {
        self.amplitude_m * (self.omega() * t + self.phase_rad).sin()
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let w = self.omega();
        self.amplitude_m * w * (w * t + self.phase_rad).cos()
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        let w = self.omega();
        -self.amplitude_m * w * w * (w * t + self.phase_rad).sin()
    }
}

pub fn drive_position(signal: &DriveSignal, t: f64) -> f64 {
    signal.position(t)
}

pub fn drive_velocity(signal: &DriveSignal, t: f64) -> f64 {
    signal.velocity(t)
}

/// Restoring torque of a linear spring-damper joint.
pub fn joint_torque(stiffness: f64, damping: f64, angle: f64, rate: f64, rest: f64) -> f64 {
    -(stiffness * (angle - rest) + damping * rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    SemiImplicitEuler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_s: f64,
    pub duration_s: f64,
    pub gravity_m_per_s2: [f64; 3],
    pub integrator: Integrator,
    /// Record every n-th step.
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_s: 1e-4,
            duration_s: 4.0,
            gravity_m_per_s2: [0.0, 0.0, -STANDARD_GRAVITY],
            integrator: Integrator::SemiImplicitEuler,
            record_stride: 5,
        }
    }
}

impl SimConfig {
    /// Gravity-free settings used for free-vibration sweeps.
    pub fn free_vibration() -> Self {
        Self {
            gravity_m_per_s2: [0.0; 3],
            ..Self::default()
        }
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::new(self.gravity_m_per_s2[0], self.gravity_m_per_s2[1], self.gravity_m_per_s2[2])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.duration_s >= self.dt_s) {
            return Err(Error::Config("duration must be at least one step".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration_s / self.dt_s).round() as usize
    }
}

/// Generalized coordinates of a model plus the prescribed base travel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub base_position_m: f64,
    pub base_velocity_m_per_s: f64,
}

impl ChainState {
    /// Natural pose (all deflections zero), base following `drive` at time `t`.
    pub fn natural(model: &MultibodyModel, drive: &DriveSignal, t: f64) -> Self {
        Self {
            t,
            q: vec![0.0; model.dof()],
            v: vec![0.0; model.dof()],
            base_position_m: drive.position(t),
            base_velocity_m_per_s: drive.velocity(t),
        }
    }

    pub fn check(&self, model: &MultibodyModel) -> Result<()> {
        if self.q.len() != model.dof() || self.v.len() != model.dof() {
            return Err(Error::Dimension {
                expected: model.dof(),
                got: self.q.len().max(self.v.len()),
            });
        }
        Ok(())
    }

    fn first_non_finite(&self) -> Option<usize> {
        self.q
            .iter()
            .zip(&self.v)
            .position(|(q, v)| !q.is_finite() || !v.is_finite())
    }
}

/// A force applied at a body-fixed point, world components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub point: PointRef,
    pub force: Vec3,
    /// Linear ground-plane (world X/Y) damping already contained in `force`, N·s/m.
    /// The semi-implicit integrator treats this part implicitly.
    pub tangential_damping: f64,
}

impl PointLoad {
    pub fn new(point: PointRef, force: Vec3) -> Self {
        Self { point, force, tangential_damping: 0.0 }
    }
}

/// World-frame kinematics of every body for one configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub rot: Vec<Mat3>,
    pub origin: Vec<Vec3>,
    /// Joint motion subspace `S_i`.
    pub subspace: Vec<Motion>,
    pub velocity: Vec<Motion>,
    pub inertia: Vec<SpatialInertia>,
    pub base_origin: Vec3,
    pub base_velocity: Vec3,
}

impl Kinematics {
    pub fn new(n: usize) -> Self {
        Self {
            rot: vec![Mat3::identity(); n],
            origin: vec![Vec3::zeros(); n],
            subspace: vec![Motion::ZERO; n],
            velocity: vec![Motion::ZERO; n],
            inertia: vec![SpatialInertia::ZERO; n],
            base_origin: Vec3::zeros(),
            base_velocity: Vec3::zeros(),
        }
    }

    pub fn update(&mut self, model: &MultibodyModel, q: &[f64], v: &[f64], base_origin: Vec3, base_velocity: Vec3) {
        self.base_origin = base_origin;
        self.base_velocity = base_velocity;
        let base_motion = Motion::new(Vec3::zeros(), base_velocity);
        for (i, j) in model.joints.iter().enumerate() {
            let (prot, porig, pvel) = match j.parent {
                Some(p) => (self.rot[p], self.origin[p], self.velocity[p]),
                None => (Mat3::identity(), base_origin, base_motion),
            };
            let jrot = prot * j.placement_rot;
            let jorig = porig + prot * j.placement_pos;
            let axis = jrot * j.axis;
            let (rot, orig, s) = match j.joint_type {
                JointType::Revolute => (
                    jrot * axis_angle(&j.axis, q[i] + j.rest),
                    jorig,
                    Motion::new(axis, jorig.cross(&axis)),
                ),
                JointType::Prismatic => (jrot, jorig + axis * (q[i] + j.rest), Motion::new(Vec3::zeros(), axis)),
            };
            self.rot[i] = rot;
            self.origin[i] = orig;
            self.subspace[i] = s;
            self.velocity[i] = pvel.add(&s.scale(v[i]));
            let b = &j.body;
            self.inertia[i] = if b.mass == 0.0 && b.inertia_com == Mat3::zeros() {
                SpatialInertia::ZERO
            } else {
                SpatialInertia::from_centroidal(b.mass, &(orig + rot * b.com), &(rot * b.inertia_com * rot.transpose()))
            };
        }
    }

    pub fn point_position(&self, p: &PointRef) -> Vec3 {
        self.origin[p.body] + self.rot[p.body] * p.offset
    }

    pub fn point_velocity(&self, p: &PointRef) -> Vec3 {
        self.velocity[p.body].point_velocity(&self.point_position(p))
    }

    /// Centre of mass of one body in world coordinates.
    pub fn body_com(&self, model: &MultibodyModel, body: usize) -> Vec3 {
        self.origin[body] + self.rot[body] * model.joints[body].body.com
    }
}

/// Reusable buffers for joint-space dynamics of one model.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub kin: Kinematics,
    composite: Vec<SpatialInertia>,
    acc: Vec<Motion>,
    force: Vec<Force>,
    /// Row-major `n × n` mass matrix, armature included.
    pub mass: Vec<f64>,
    pub bias: Vec<f64>,
    rhs: Vec<f64>,
    factor: Vec<f64>,
    n: usize,
}

impl Dynamics {
    pub fn new(model: &MultibodyModel) -> Self {
        let n = model.dof();
        Self {
            kin: Kinematics::new(n),
            composite: vec![SpatialInertia::ZERO; n],
            acc: vec![Motion::ZERO; n],
            force: vec![Force::ZERO; n],
            mass: vec![0.0; n * n],
            bias: vec![0.0; n],
            rhs: vec![0.0; n],
            factor: vec![0.0; n * n],
            n,
        }
    }

    /// Update kinematics for `state` with the base placed by `drive`.
    pub fn update(&mut self, model: &MultibodyModel, state: &ChainState, drive: &DriveSignal) {
        let axis = drive.axis_vec();
        self.kin.update(
            model,
            &state.q,
            &state.v,
            axis * state.base_position_m,
            axis * state.base_velocity_m_per_s,
        );
    }

    /// Composite-rigid-body mass matrix for the current kinematics.
    pub fn compute_mass_matrix(&mut self, model: &MultibodyModel) {
        let n = self.n;
        self.composite.copy_from_slice(&self.kin.inertia);
        for i in (0..n).rev() {
            if let Some(p) = model.joints[i].parent {
                let c = self.composite[i];
                self.composite[p].add_assign(&c);
            }
        }
        self.mass.iter_mut().for_each(|m| *m = 0.0);
        for i in 0..n {
            let f = self.composite[i].mul(&self.kin.subspace[i]);
            self.mass[i * n + i] = self.kin.subspace[i].dot(&f) + model.joints[i].armature;
            let mut j = model.joints[i].parent;
            while let Some(a) = j {
                let m = self.kin.subspace[a].dot(&f);
                self.mass[a * n + i] = m;
                self.mass[i * n + a] = m;
                j = model.joints[a].parent;
            }
        }
    }

    /// Velocity-product and gravity terms by recursive Newton–Euler with zero joint acceleration.
    pub fn compute_bias(&mut self, model: &MultibodyModel, base_acceleration: Vec3, gravity: Vec3) {
        let base_acc = Motion::new(Vec3::zeros(), base_acceleration - gravity);
        let base_vel = Motion::new(Vec3::zeros(), self.kin.base_velocity);
        for i in 0..self.n {
            let (pa, pv) = match model.joints[i].parent {
                Some(p) => (self.acc[p], self.kin.velocity[p]),
                None => (base_acc, base_vel),
            };
            let v_joint = self.kin.velocity[i];
            let sq = Motion::new(
                self.kin.velocity[i].ang - pv.ang,
                self.kin.velocity[i].lin - pv.lin,
            );
            self.acc[i] = pa.add(&v_joint.cross_motion(&sq));
            let inertia = &self.kin.inertia[i];
            let momentum = inertia.mul(&v_joint);
            let mut f = inertia.mul(&self.acc[i]);
            f.add_assign(&v_joint.cross_force(&momentum));
            self.force[i] = f;
        }
        for i in (0..self.n).rev() {
            self.bias[i] = self.kin.subspace[i].dot(&self.force[i]);
            if let Some(p) = model.joints[i].parent {
                let f = self.force[i];
                self.force[p].add_assign(&f);
            }
        }
    }

    /// Add `Jᵀ F` of point loads into `tau`.
    pub fn accumulate_loads(&self, model: &MultibodyModel, loads: &[PointLoad], tau: &mut [f64]) {
        for load in loads {
            let p = self.kin.point_position(&load.point);
            let wrench = Force::at_point(&p, &load.force);
            let mut j = Some(load.point.body);
            while let Some(a) = j {
                tau[a] += self.kin.subspace[a].dot(&wrench);
                j = model.joints[a].parent;
            }
        }
    }

    /// Kinetic energy of the current kinematics, rotor armature included.
    pub fn kinetic_energy(&self, model: &MultibodyModel, v: &[f64]) -> f64 {
        let bodies: f64 = self
            .kin
            .velocity
            .iter()
            .zip(&self.kin.inertia)
            .map(|(vel, inertia)| vel.dot(&inertia.mul(vel)))
            .sum();
        let rotors: f64 = model.joints.iter().zip(v).map(|(j, w)| j.armature * w * w).sum();
        0.5 * (bodies + rotors)
    }

    /// Joint forcing for the current kinematics: springs, dampers, loads, minus bias.
    /// Damping is scaled by `damping_scale` (0 when it is treated implicitly).
    fn forcing(&mut self, model: &MultibodyModel, state_q: &[f64], state_v: &[f64], loads: &[PointLoad], extra_damping: f64, damping_scale: f64) {
        for (i, j) in model.joints.iter().enumerate() {
            let damping = (j.damping + extra_damping) * damping_scale;
            self.rhs[i] = joint_torque(j.stiffness, damping, state_q[i], state_v[i], 0.0) - self.bias[i];
        }
        let mut tau = std::mem::take(&mut self.rhs);
        self.accumulate_loads(model, loads, &mut tau);
        self.rhs = tau;
    }

    /// Solve `(M + diag(extra)) x = rhs` in place of `rhs`.
    fn solve(&mut self, diagonal_shift: impl Fn(usize) -> f64) -> bool {
        let n = self.n;
        self.factor.copy_from_slice(&self.mass);
        for i in 0..n {
            self.factor[i * n + i] += diagonal_shift(i);
        }
        cholesky_solve(&mut self.factor, n, &mut self.rhs)
    }

    /// As [`Self::solve`], plus `scale · c Jₜᵀ Jₜ` for every load with tangential damping.
    fn solve_with_contact_damping(
        &mut self,
        model: &MultibodyModel,
        loads: &[PointLoad],
        scale: f64,
        diagonal_shift: impl Fn(usize) -> f64,
    ) -> bool {
        let n = self.n;
        self.factor.copy_from_slice(&self.mass);
        for i in 0..n {
            self.factor[i * n + i] += diagonal_shift(i);
        }
        let mut chain: Vec<(usize, f64, f64)> = Vec::new();
        for load in loads.iter().filter(|l| l.tangential_damping > 0.0) {
            let p = self.kin.point_position(&load.point);
            chain.clear();
            let mut j = Some(load.point.body);
            while let Some(a) = j {
                let s = &self.kin.subspace[a];
                let col = s.lin + s.ang.cross(&p);
                chain.push((a, col.x, col.y));
                j = model.joints[a].parent;
            }
            let c = scale * load.tangential_damping;
            for &(a, ax, ay) in &chain {
                for &(b, bx, by) in &chain {
                    self.factor[a * n + b] += c * (ax * bx + ay * by);
                }
            }
        }
        cholesky_solve(&mut self.factor, n, &mut self.rhs)
    }
}

/// In-place Cholesky factorization and solve of a row-major SPD matrix.
pub(crate) fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// Joint accelerations for `state` under the drive, gravity and point loads.
pub fn forward_dynamics(
    model: &MultibodyModel,
    state: &ChainState,
    drive: &DriveSignal,
    gravity: Vec3,
    loads: &[PointLoad],
) -> Result<Vec<f64>> {
    state.check(model)?;
    let mut d = Dynamics::new(model);
    d.update(model, state, drive);
    d.compute_mass_matrix(model);
    d.compute_bias(model, drive.axis_vec() * drive.acceleration(state.t), gravity);
    d.forcing(model, &state.q, &state.v, loads, 0.0, 1.0);
    assert!(d.solve(|_| 0.0), "mass matrix is not positive definite");
    Ok(d.rhs)
}

/// Joint-space mass matrix at `state`.
pub fn mass_matrix(model: &MultibodyModel, state: &ChainState, drive: &DriveSignal) -> Result<DMatrix<f64>> {
    state.check(model)?;
    let mut d = Dynamics::new(model);
    d.update(model, state, drive);
    d.compute_mass_matrix(model);
    let n = model.dof();
    Ok(DMatrix::from_row_slice(n, n, &d.mass))
}

/// Kinetic plus gravitational plus joint-spring energy.
pub fn mechanical_energy(model: &MultibodyModel, state: &ChainState, drive: &DriveSignal, gravity: Vec3) -> f64 {
    let mut d = Dynamics::new(model);
    d.update(model, state, drive);
    energy_of(&d, model, state, gravity)
}

fn energy_of(d: &Dynamics, model: &MultibodyModel, state: &ChainState, gravity: Vec3) -> f64 {
    let kinetic = d.kinetic_energy(model, &state.v);
    let potential: f64 = (0..model.dof())
        .map(|i| {
            let b = &model.joints[i].body;
            -b.mass * gravity.dot(&d.kin.body_com(model, i))
        })
        .sum();
    let spring: f64 = model
        .joints
        .iter()
        .zip(&state.q)
        .map(|(j, q)| 0.5 * j.stiffness * q * q)
        .sum();
    kinetic + potential + spring
}

/// Fixed-step integrator with reusable buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub dynamics: Dynamics,
    /// Additional viscous damping on every joint (used for quasi-static settling).
    pub extra_damping: f64,
    stage_q: Vec<f64>,
    stage_v: Vec<f64>,
    k_q: [Vec<f64>; 4],
    k_v: [Vec<f64>; 4],
}

impl Stepper {
    pub fn new(model: &MultibodyModel) -> Self {
        let n = model.dof();
        Self {
            dynamics: Dynamics::new(model),
            extra_damping: 0.0,
            stage_q: vec![0.0; n],
            stage_v: vec![0.0; n],
            k_q: std::array::from_fn(|_| vec![0.0; n]),
            k_v: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn energy(&mut self, model: &MultibodyModel, state: &ChainState, drive: &DriveSignal, gravity: Vec3) -> f64 {
        self.dynamics.update(model, state, drive);
        energy_of(&self.dynamics, model, state, gravity)
    }

    /// Advance `state` by one step of `sim.dt_s` with loads held constant over the step.
    pub fn advance(
        &mut self,
        model: &MultibodyModel,
        state: &mut ChainState,
        drive: &DriveSignal,
        loads: &[PointLoad],
        sim: &SimConfig,
    ) -> Result<()> {
        let dt = sim.dt_s;
        let gravity = sim.gravity();
        match sim.integrator {
            Integrator::SemiImplicitEuler => {
                let d = &mut self.dynamics;
                d.update(model, state, drive);
                d.compute_mass_matrix(model);
                d.compute_bias(model, drive.axis_vec() * drive.acceleration(state.t), gravity);
                d.forcing(model, &state.q, &state.v, loads, self.extra_damping, 1.0);
                let extra = self.extra_damping;
                let ok = d.solve_with_contact_damping(model, loads, dt, |i| dt * (model.joints[i].damping + extra));
                assert!(ok, "mass matrix is not positive definite");
                for i in 0..state.q.len() {
                    state.v[i] += dt * d.rhs[i];
                    state.q[i] += dt * state.v[i];
                }
            }
            Integrator::Rk4 => self.rk4(model, state, drive, loads, gravity, dt),
        }
        state.t += dt;
        state.base_position_m = drive.position(state.t);
        state.base_velocity_m_per_s = drive.velocity(state.t);
        if let Some(joint) = state.first_non_finite() {
            return Err(Error::NonFinite { time: state.t, joint });
        }
        Ok(())
    }

    fn rk4(&mut self, model: &MultibodyModel, state: &mut ChainState, drive: &DriveSignal, loads: &[PointLoad], gravity: Vec3, dt: f64) {
        let n = state.q.len();
        let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
        for stage in 0..4 {
            let t = state.t + offsets[stage];
            for i in 0..n {
                let (dq, dv) = if stage == 0 {
                    (0.0, 0.0)
                } else {
                    (self.k_q[stage - 1][i], self.k_v[stage - 1][i])
                };
                self.stage_q[i] = state.q[i] + offsets[stage] * dq;
                self.stage_v[i] = state.v[i] + offsets[stage] * dv;
            }
            let stage_state = ChainState {
                t,
                q: std::mem::take(&mut self.stage_q),
                v: std::mem::take(&mut self.stage_v),
                base_position_m: drive.position(t),
                base_velocity_m_per_s: drive.velocity(t),
            };
            let d = &mut self.dynamics;
            d.update(model, &stage_state, drive);
            d.compute_mass_matrix(model);
            d.compute_bias(model, drive.axis_vec() * drive.acceleration(t), gravity);
            d.forcing(model, &stage_state.q, &stage_state.v, loads, self.extra_damping, 1.0);
            assert!(d.solve(|_| 0.0), "mass matrix is not positive definite");
            self.k_q[stage].copy_from_slice(&stage_state.v);
            self.k_v[stage].copy_from_slice(&d.rhs);
            self.stage_q = stage_state.q;
            self.stage_v = stage_state.v;
        }
        for i in 0..n {
            let dq = (self.k_q[0][i] + 2.0 * self.k_q[1][i] + 2.0 * self.k_q[2][i] + self.k_q[3][i]) / 6.0;
            let dv = (self.k_v[0][i] + 2.0 * self.k_v[1][i] + 2.0 * self.k_v[2][i] + self.k_v[3][i]) / 6.0;
            state.q[i] += dt * dq;
            state.v[i] += dt * dv;
        }
    }
}

/// One integration step returning a new state.
pub fn step(
    model: &MultibodyModel,
    state: &ChainState,
    drive: &DriveSignal,
    loads: &[PointLoad],
    sim: &SimConfig,
) -> Result<ChainState> {
    state.check(model)?;
    let mut stepper = Stepper::new(model);
    let mut next = state.clone();
    stepper.advance(model, &mut next, drive, loads, sim)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{mirror_chirality, paper_fit_beam};
    use crate::model::{BeamModel, Body, ModelJoint};

    fn single_joint(k: f64, b: f64, mass: f64, length: f64) -> MultibodyModel {
        let mut m = MultibodyModel::default();
        m.push(ModelJoint {
            name: "hinge".into(),
            parent: None,
            placement_rot: Mat3::identity(),
            placement_pos: Vec3::zeros(),
            joint_type: JointType::Revolute,
            axis: Vec3::y(),
            stiffness: k,
            damping: b,
            rest: 0.1,
            armature: 0.0,
            body: Body::point_mass(mass, Vec3::new(length, 0.0, 0.0)),
        });
        m
    }

    fn beam_state(bm: &BeamModel, seed: u64) -> ChainState {
        let mut s = ChainState::natural(&bm.model, &DriveSignal::still(), 0.0);
        let mut x = seed as f64;
        for (q, v) in s.q.iter_mut().zip(s.v.iter_mut()) {
            x = (x * 1.7 + 0.31).fract();
            *q += 0.4 * (x - 0.5);
            *v = 3.0 * (x - 0.3);
        }
        s
    }

    #[test]
    fn drive_and_torque_examples() {
        let d = DriveSignal::new(2e-3, 1.0);
        assert_eq!(d.position(0.0), 0.0);
        assert!((d.position(0.25) - 2e-3).abs() < 1e-15);
        assert!(DriveSignal::new(2e-3, 10.0).position(0.05).abs() < 1e-15);
        let h = 1e-6;
        let fd = (d.position(0.3 + h) - d.position(0.3 - h)) / (2.0 * h);
        assert!((fd - d.velocity(0.3)).abs() < 1e-9);
        assert_eq!(joint_torque(0.34, 0.0029, 0.2, 0.0, 0.2), 0.0);
        assert!((joint_torque(0.34, 0.0, 1.5, 0.0, 0.5) + 0.34).abs() < 1e-15);
        assert!((joint_torque(0.0, 0.0029, 0.0, 2.0, 0.0) + 0.0058).abs() < 1e-15);
    }

    #[test]
    fn energy_examples() {
        let model = single_joint(0.34, 0.0, 5e-3, 0.05);
        let still = DriveSignal::still();
        let mut s = ChainState::natural(&model, &still, 0.0);
        assert_eq!(mechanical_energy(&model, &s, &still, Vec3::zeros()), 0.0);
        s.q[0] = 0.3;
        let e = mechanical_energy(&model, &s, &still, Vec3::zeros());
        assert!((e - 0.5 * 0.34 * 0.09).abs() < 1e-15);
    }

    #[test]
    fn zero_dynamics_only_advance_time() {
        let model = single_joint(0.0, 0.0, 1e-3, 0.01);
        let still = DriveSignal::still();
        let s = ChainState::natural(&model, &still, 0.0);
        let next = step(&model, &s, &still, &[], &SimConfig::free_vibration()).unwrap();
        assert_eq!(next.q, s.q);
        assert_eq!(next.v, s.v);
        assert_eq!(next.t, 1e-4);
    }

    #[test]
    fn natural_pose_is_an_equilibrium_without_gravity() {
        let bm = BeamModel::new(&paper_fit_beam(90.0, None).unwrap());
        let s = ChainState::natural(&bm.model, &DriveSignal::still(), 0.0);
        let a = forward_dynamics(&bm.model, &s, &DriveSignal::still(), Vec3::zeros(), &[]).unwrap();
        assert!(a.iter().all(|x| x.abs() < 1e-12), "{a:?}");
    }

    #[test]
    fn single_joint_matches_hookes_law() {
        let (k, m, l) = (0.34, 5e-3, 0.05);
        let model = single_joint(k, 0.0, m, l);
        let mut s = ChainState::natural(&model, &DriveSignal::still(), 0.0);
        s.q[0] = 0.35;
        let a = forward_dynamics(&model, &s, &DriveSignal::still(), Vec3::zeros(), &[]).unwrap();
        let expected = -(k / (m * l * l)) * 0.35;
        assert!(((a[0] - expected) / expected).abs() < 1e-9);
    }

    #[test]
    fn mass_matrix_is_symmetric_positive_definite() {
        for phi in [0.0, 45.0, 90.0, -120.0] {
            let bm = BeamModel::new(&paper_fit_beam(phi, None).unwrap());
            let s = beam_state(&bm, 3);
            let m = mass_matrix(&bm.model, &s, &DriveSignal::still()).unwrap();
            assert!((&m - m.transpose()).norm() < 1e-18);
            assert!(m.clone().cholesky().is_some(), "phi = {phi}");
        }
    }

    #[test]
    fn crba_agrees_with_rnea_columns() {
        // RNEA with unit joint acceleration e_i minus RNEA with zero acceleration gives column i of M
        let bm = BeamModel::new(&paper_fit_beam(60.0, None).unwrap());
        let model = &bm.model;
        let s = beam_state(&bm, 5);
        let still = DriveSignal::still();
        let mut d = Dynamics::new(model);
        d.update(model, &s, &still);
        d.compute_mass_matrix(model);
        let n = model.dof();
        // Equivalent check via forward dynamics: M a = tau - bias for a random load
        let load = [PointLoad::new(bm.handles.tip, Vec3::new(0.01, -0.02, 0.03))];
        let a = forward_dynamics(model, &s, &still, Vec3::zeros(), &load).unwrap();
        d.compute_bias(model, Vec3::zeros(), Vec3::zeros());
        let mut tau = vec![0.0; n];
        d.accumulate_loads(model, &load, &mut tau);
        for i in 0..n {
            let j = &model.joints[i];
            let spring = joint_torque(j.stiffness, j.damping, s.q[i], s.v[i], 0.0);
            let ma: f64 = (0..n).map(|c| d.mass[i * n + c] * a[c]).sum();
            let rhs = spring + tau[i] - d.bias[i];
            assert!((ma - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "row {i}: {ma} vs {rhs}");
        }
        // Finite-difference check of kinetic energy against ½ vᵀ M v
        let ke = d.kinetic_energy(model, &s.v);
        let quad: f64 = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| 0.5 * s.v[r] * d.mass[r * n + c] * s.v[c])
            .sum();
        assert!((ke - quad).abs() < 1e-12 * ke.max(1e-12));
    }

    #[test]
    fn undamped_oscillator_conserves_energy() {
        // about 10 Hz
        let model = single_joint(0.05, 0.0, 5e-3, 0.05);
        let still = DriveSignal::still();
        let sim = SimConfig {
            dt_s: 1e-4,
            ..SimConfig::free_vibration()
        };
        let mut s = ChainState::natural(&model, &still, 0.0);
        s.q[0] += 0.2;
        let mut st = Stepper::new(&model);
        let e0 = st.energy(&model, &s, &still, Vec3::zeros());
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            st.advance(&model, &mut s, &still, &[], &sim).unwrap();
            worst = worst.max((st.energy(&model, &s, &still, Vec3::zeros()) - e0).abs());
        }
        assert!(worst / e0 < 5e-3, "relative drift {}", worst / e0);
    }

    #[test]
    fn damped_energy_never_increases() {
        let bm = BeamModel::new(&paper_fit_beam(90.0, None).unwrap());
        let model = &bm.model;
        let still = DriveSignal::still();
        let sim = SimConfig {
            gravity_m_per_s2: [0.0, 0.0, -STANDARD_GRAVITY],
            ..SimConfig::default()
        };
        let mut s = beam_state(&bm, 11);
        let mut st = Stepper::new(model);
        let mut e = st.energy(model, &s, &still, sim.gravity());
        for _ in 0..20_000 {
            st.advance(model, &mut s, &still, &[], &sim).unwrap();
            let e1 = st.energy(model, &s, &still, sim.gravity());
            assert!(e1 <= e + 1e-9, "energy rose by {}", e1 - e);
            e = e1;
        }
    }

    #[test]
    fn rk4_agrees_with_semi_implicit_euler() {
        let bm = BeamModel::new(&paper_fit_beam(90.0, None).unwrap());
        let drive = DriveSignal::new(2e-3, 20.0);
        let mut a = ChainState::natural(&bm.model, &drive, 0.0);
        let mut b = a.clone();
        let euler = SimConfig {
            dt_s: 2e-6,
            ..SimConfig::free_vibration()
        };
        let rk4 = SimConfig {
            dt_s: 1e-5,
            integrator: Integrator::Rk4,
            ..SimConfig::free_vibration()
        };
        let mut sa = Stepper::new(&bm.model);
        let mut sb = Stepper::new(&bm.model);
        for _ in 0..25_000 {
            sa.advance(&bm.model, &mut a, &drive, &[], &euler).unwrap();
        }
        for _ in 0..5_000 {
            sb.advance(&bm.model, &mut b, &drive, &[], &rk4).unwrap();
        }
        for (x, y) in a.q.iter().zip(&b.q) {
            assert!((x - y).abs() < 1e-4, "{x} vs {y}");
        }
    }

    #[test]
    fn stepping_is_deterministic_and_mirror_symmetric() {
        let spec = paper_fit_beam(90.0, None).unwrap();
        let mirror = mirror_chirality(&spec);
        let (bm, bmm) = (BeamModel::new(&spec), BeamModel::new(&mirror));
        let drive = DriveSignal::new(2e-3, 25.0);
        let sim = SimConfig::free_vibration();
        let run = |bm: &BeamModel| {
            let mut s = ChainState::natural(&bm.model, &drive, 0.0);
            let mut st = Stepper::new(&bm.model);
            let mut y = Vec::new();
            for _ in 0..5000 {
                st.advance(&bm.model, &mut s, &drive, &[], &sim).unwrap();
                y.push(st.dynamics.kin.point_position(&bm.handles.tip));
            }
            y
        };
        let (a, b, c) = (run(&bm), run(&bm), run(&bmm));
        assert_eq!(a, b);
        for (p, m) in a.iter().zip(&c) {
            assert!((p.y + m.y).abs() < 1e-12 && (p.z - m.z).abs() < 1e-12);
        }
    }

    #[test]
    fn blow_up_reports_time_and_joint() {
        let model = single_joint(1e9, 0.0, 1e-6, 0.05);
        let sim = SimConfig {
            dt_s: 1e-3,
            ..SimConfig::free_vibration()
        };
        let still = DriveSignal::still();
        let mut s = ChainState::natural(&model, &still, 0.0);
        s.q[0] = 1.0;
        let mut st = Stepper::new(&model);
        let err = (0..10_000)
            .find_map(|_| st.advance(&model, &mut s, &still, &[], &sim).err())
            .expect("explicit spring at this step must diverge");
        assert!(matches!(err, Error::NonFinite { joint: 0, time } if time > 0.0));
    }

    #[test]
    fn state_dimension_is_checked() {
        let model = single_joint(1.0, 0.0, 1.0, 1.0);
        let mut s = ChainState::natural(&model, &DriveSignal::still(), 0.0);
        s.q.push(0.0);
        assert!(matches!(
            forward_dynamics(&model, &s, &DriveSignal::still(), Vec3::zeros(), &[]),
            Err(Error::Dimension { expected: 1, .. })
        ));
    }
}
