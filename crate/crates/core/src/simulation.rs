//! Driven-beam simulation with optional ground contact.

use crate::chain::BeamChainSpec;
use crate::contact::{contact_force_planar, friction_damping, ContactConfig, ContactPoint, ContactRecord};
use crate::dynamics::{ChainState, DriveSignal, PointLoad, SimConfig, Stepper};
use crate::error::{Error, Result};
use crate::model::{BeamModel, PointRef};
use crate::spatial::Vec3;
use crate::trajectory::Trajectory;

/// Names of the tracked points in every beam trajectory.
pub const TRACKED_POINTS: [&str; 4] = ["tip", "m1", "m2", "m3"];

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub contact: Option<ContactRecord>,
    pub final_state: ChainState,
    pub ground_height_m: Option<f64>,
    pub steps: usize,
}

/// Resolved contact geometry for one beam model.
#[derive(Debug, Clone)]
pub struct Ground {
    pub config: ContactConfig,
    pub height: f64,
    pub points: Vec<PointRef>,
}

impl Ground {
    /// Place the plane `natural_gap` below the first contact point in the undeformed pose, base at rest.
    pub fn for_beam(beam: &BeamModel, config: &ContactConfig) -> Result<Ground> {
        config.validate()?;
        let h = &beam.handles;
        let points: Vec<PointRef> = config
            .contact_points
            .iter()
            .map(|p| match p {
                ContactPoint::EndPoint => h.end_point(),
                ContactPoint::Tip => h.tip,
                ContactPoint::TipOffset { offset_mm } => PointRef {
                    body: h.last_body,
                    offset: h.tip.offset + Vec3::new(offset_mm[0], offset_mm[1], offset_mm[2]) * 1e-3,
                },
            })
            .collect();
        let mut stepper = Stepper::new(&beam.model);
        let state = ChainState::natural(&beam.model, &DriveSignal::still(), 0.0);
        stepper.dynamics.update(&beam.model, &state, &DriveSignal::still());
        let z = stepper.dynamics.kin.point_position(&points[0]).z;
        Ok(Ground {
            config: config.clone(),
            height: config.ground_height_for(z),
            points,
        })
    }

    /// Contact loads at the current kinematics; returns (min gap, total normal, total Y friction).
    pub fn loads(&self, stepper: &Stepper, out: &mut Vec<PointLoad>) -> (f64, f64, f64) {
        let kin = &stepper.dynamics.kin;
        let mut gap_min = f64::INFINITY;
        let (mut fn_sum, mut ft_sum) = (0.0, 0.0);
        for p in &self.points {
            let x = kin.point_position(p);
            let v = kin.point_velocity(p);
            let gap = x.z - self.height;
            gap_min = gap_min.min(gap);
            let (f_n, f_t) = contact_force_planar(gap, v.z, v, &self.config);
            if f_n > 0.0 {
                out.push(PointLoad {
                    point: *p,
                    force: Vec3::new(f_t.x, f_t.y, f_n),
                    tangential_damping: friction_damping(f_n, v, &self.config),
                });
            }
            fn_sum += f_n;
            ft_sum += f_t.y;
        }
        (gap_min, fn_sum, ft_sum)
    }
}

/// Simulate a beam from `initial` (or its natural pose) under `drive`.
pub fn simulate_from(
    beam: &BeamModel,
    initial: Option<ChainState>,
    drive: &DriveSignal,
    ground: Option<&Ground>,
    sim: &SimConfig,
) -> Result<SimOutput> {
    sim.validate()?;
    drive.validate()?;
    let model = &beam.model;
    let mut state = match initial {
        Some(s) => {
            s.check(model)?;
            s
        }
        None => ChainState::natural(model, drive, 0.0),
    };
    state.base_position_m = drive.position(state.t);
    state.base_velocity_m_per_s = drive.velocity(state.t);
    let mut stepper = Stepper::new(model);
    let tracked = [
        beam.handles.end_point(),
        beam.handles.markers[0],
        beam.handles.markers[1],
        beam.handles.markers[2],
    ];
    let steps = sim.steps();
    let cap = steps / sim.record_stride + 1;
    let mut traj = Trajectory::new(TRACKED_POINTS);
    traj.time.reserve(cap);
    let mut record = ground.map(|_| ContactRecord::default());
    let mut loads = Vec::with_capacity(4);
    for k in 0..=steps {
        loads.clear();
        stepper.dynamics.update(model, &state, drive);
        let contact = ground.map(|g| g.loads(&stepper, &mut loads));
        if k % sim.record_stride == 0 {
            let kin = &stepper.dynamics.kin;
            let p = tracked.map(|r| kin.point_position(&r));
            traj.push(state.t, &p);
            if let (Some(rec), Some((gap, f_n, f_t))) = (record.as_mut(), contact) {
                rec.push(state.t, gap, f_n, f_t);
            }
        }
        if k == steps {
            break;
        }
        stepper.advance(model, &mut state, drive, &loads, sim)?;
    }
    Ok(SimOutput {
        trajectory: traj,
        contact: record,
        final_state: state,
        ground_height_m: ground.map(|g| g.height),
        steps,
    })
}

/// Simulate `spec` from its natural pose.
pub fn simulate(
    spec: &BeamChainSpec,
    drive: &DriveSignal,
    contact: Option<&ContactConfig>,
    sim: &SimConfig,
) -> Result<SimOutput> {
    spec.validate()?;
    let beam = BeamModel::new(spec);
    let ground = contact.map(|c| Ground::for_beam(&beam, c)).transpose()?;
    simulate_from(&beam, None, drive, ground.as_ref(), sim)
}

/// Settings for quasi-static settling.
#[derive(Debug, Clone, PartialEq)]
pub struct SettleOptions {
    /// Added joint damping during settling, N·m·s/rad.
    pub extra_damping: f64,
    /// Stop when every joint rate is below this, rad/s.
    pub rate_tolerance: f64,
    pub max_steps: usize,
}

impl Default for SettleOptions {
    fn default() -> Self {
        Self {
            extra_damping: 2e-3,
            rate_tolerance: 1e-6,
            max_steps: 400_000,
        }
    }
}

/// Let a beam come to rest with the base held still, under gravity, extra loads and optional ground.
pub fn settle(
    beam: &BeamModel,
    start: ChainState,
    ground: Option<&Ground>,
    fixed_loads: &[PointLoad],
    sim: &SimConfig,
    opts: &SettleOptions,
) -> Result<ChainState> {
    let model = &beam.model;
    let drive = DriveSignal::still();
    let mut state = start;
    state.check(model)?;
    state.base_position_m = 0.0;
    state.base_velocity_m_per_s = 0.0;
    let mut stepper = Stepper::new(model);
    stepper.extra_damping = opts.extra_damping;
    let mut loads = Vec::new();
    let mut residual = f64::INFINITY;
    let t0 = state.t;
    for k in 0..opts.max_steps {
        loads.clear();
        loads.extend_from_slice(fixed_loads);
        stepper.dynamics.update(model, &state, &drive);
        if let Some(g) = ground {
            g.loads(&stepper, &mut loads);
        }
        stepper.advance(model, &mut state, &drive, &loads, sim)?;
        residual = state.v.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if k > 10 && residual < opts.rate_tolerance {
            state.t = t0;
            state.v.iter_mut().for_each(|v| *v = 0.0);
            return Ok(state);
        }
    }
    Err(Error::SettleFailed {
        steps: opts.max_steps,
        residual,
    })
}
