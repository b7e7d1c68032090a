//! Identification of joint stiffness, damping and joint placement from drop tests.

use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_twisted_beam, BeamChainSpec, BeamGeometry};
use crate::dynamics::{ChainState, DriveSignal, Dynamics, PointLoad, SimConfig, Stepper, STANDARD_GRAVITY};
use crate::error::{Error, Result};
use crate::model::BeamModel;
use crate::simulation::{settle, SettleOptions};
use crate::spatial::Vec3;
use crate::trajectory::{read_text, write_text, Trajectory};

pub const MARKER_NAMES: [&str; 3] = ["m1", "m2", "m3"];

/// Three tracked markers sampled at common times, metres.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSet {
    pub time: Vec<f64>,
    pub markers: [Vec<[f64; 3]>; 3],
}

impl MarkerSet {
    pub fn new(time: Vec<f64>, markers: [Vec<[f64; 3]>; 3]) -> Result<MarkerSet> {
        if time.len() < 2 {
            return Err(Error::MarkerMismatch(format!("need at least 2 samples, got {}", time.len())));
        }
        if markers.iter().any(|m| m.len() != time.len()) {
            return Err(Error::MarkerMismatch("markers differ in length from the time base".into()));
        }
        Ok(MarkerSet { time, markers })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        (self.len() - 1) as f64 / (self.time[self.len() - 1] - self.time[0])
    }

    pub fn from_trajectory(traj: &Trajectory) -> Result<MarkerSet> {
        let get = |name: &str| {
            traj.series(name)
                .map(<[_]>::to_vec)
                .ok_or_else(|| Error::MarkerMismatch(format!("trajectory lacks marker {name}")))
        };
        MarkerSet::new(traj.time.clone(), [get("m1")?, get("m2")?, get("m3")?])
    }

    pub fn to_trajectory(&self) -> Trajectory {
        let mut t = Trajectory::new(MARKER_NAMES);
        for (s, &time) in self.time.iter().enumerate() {
            let p = self.markers.each_ref().map(|m| Vec3::new(m[s][0], m[s][1], m[s][2]));
            t.push(time, &p);
        }
        t
    }

    pub fn to_csv(&self, metadata: &[(String, String)]) -> String {
        self.to_trajectory().to_csv(metadata, &[])
    }

    pub fn from_csv(text: &str) -> Result<MarkerSet> {
        MarkerSet::from_trajectory(&Trajectory::from_csv(text)?)
    }

    pub fn read(path: &Path) -> Result<MarkerSet> {
        MarkerSet::from_csv(&read_text(path)?)
    }

    pub fn write(&self, path: &Path, metadata: &[(String, String)]) -> Result<()> {
        write_text(path, &self.to_csv(metadata))
    }

    /// Copy with independent Gaussian noise of standard deviation `sigma_m` on every coordinate.
    pub fn with_noise(&self, sigma_m: f64, seed: u64) -> Result<MarkerSet> {
        let normal = Normal::new(0.0, sigma_m).map_err(|e| Error::Config(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for m in out.markers.iter_mut() {
            for p in m.iter_mut() {
                for c in p.iter_mut() {
                    *c += normal.sample(&mut rng);
                }
            }
        }
        Ok(out)
    }

    /// Copy with isotropic Gaussian noise whose 3-D marker error has RMS `rms_m`.
    pub fn with_marker_noise(&self, rms_m: f64, seed: u64) -> Result<MarkerSet> {
        self.with_noise(rms_m / 3f64.sqrt(), seed)
    }

    fn check_compatible(&self, other: &MarkerSet) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::MarkerMismatch(format!("{} vs {} samples", self.len(), other.len())));
        }
        Ok(())
    }

    fn distances(&self, other: &MarkerSet) -> impl Iterator<Item = f64> + '_ {
        let other = other.markers.clone();
        (0..3).flat_map(move |i| {
            let o = other[i].clone();
            self.markers[i].iter().zip(o).map(|(a, b)| {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            })
        })
    }
}

/// Root-mean-square marker deviation over all 3n marker samples, mm.
pub fn objective(sim: &MarkerSet, reference: &MarkerSet) -> Result<f64> {
    sim.check_compatible(reference)?;
    let mut sum = 0.0;
    for i in 0..3 {
        for (a, b) in sim.markers[i].iter().zip(&reference.markers[i]) {
            sum += (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
        }
    }
    Ok((sum / (3 * sim.len()) as f64).sqrt() * 1e3)
}

/// Mean absolute marker deviation, mm.
pub fn mean_absolute_error(sim: &MarkerSet, reference: &MarkerSet) -> Result<f64> {
    sim.check_compatible(reference)?;
    Ok(sim.distances(reference).sum::<f64>() / (3 * sim.len()) as f64 * 1e3)
}

/// Drop-test protocol: deflect the tip with a hanging load, release, record the decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DropTest {
    pub load_g: f64,
    /// Unit direction of the load's weight.
    pub load_direction: [f64; 3],
    pub record_s: f64,
    pub sample_rate_hz: f64,
    pub dt_s: f64,
    /// Include the beam's own weight (otherwise the natural shape is the unloaded reference).
    pub beam_gravity: bool,
    pub marker_spacing_mm: f64,
    pub settle_damping_nms_per_rad: f64,
    pub settle_tolerance_rad_per_s: f64,
    pub settle_max_steps: usize,
}

impl Default for DropTest {
    fn default() -> Self {
        Self {
            load_g: 200.0,
            load_direction: [0.0, 0.0, -1.0],
            record_s: 0.5,
            sample_rate_hz: 1000.0,
            dt_s: 1e-4,
            beam_gravity: false,
            marker_spacing_mm: crate::model::DEFAULT_MARKER_SPACING_MM,
            settle_damping_nms_per_rad: 2e-3,
            settle_tolerance_rad_per_s: 1e-6,
            settle_max_steps: 400_000,
        }
    }
}

impl DropTest {
    pub fn validate(&self) -> Result<()> {
        if !(self.load_g >= 0.0) {
            return Err(Error::Negative {
                what: "drop-test load",
                value: self.load_g,
            });
        }
        if !(self.record_s > 0.0 && self.sample_rate_hz > 0.0 && self.dt_s > 0.0) {
            return Err(Error::Config("drop test needs positive record length, sample rate and dt".into()));
        }
        if self.stride() == 0 {
            return Err(Error::Config("sample interval is shorter than dt".into()));
        }
        Ok(())
    }

    fn stride(&self) -> usize {
        (1.0 / (self.sample_rate_hz * self.dt_s)).round() as usize
    }

    fn sim(&self) -> SimConfig {
        SimConfig {
            dt_s: self.dt_s,
            duration_s: self.record_s,
            gravity_m_per_s2: if self.beam_gravity {
                [0.0, 0.0, -STANDARD_GRAVITY]
            } else {
                [0.0; 3]
            },
            record_stride: self.stride(),
            ..SimConfig::default()
        }
    }
}

/// Static equilibrium by Newton iteration on the joint forces (finite-difference Jacobian).
fn static_equilibrium(bm: &BeamModel, loads: &[PointLoad], sim: &SimConfig) -> Option<ChainState> {
    let model = &bm.model;
    let n = model.dof();
    let still = DriveSignal::still();
    let mut state = ChainState::natural(model, &still, 0.0);
    let mut d = Dynamics::new(model);
    let residual = |q: &[f64], d: &mut Dynamics| -> Vec<f64> {
        let s = ChainState {
            q: q.to_vec(),
            ..state.clone()
        };
        d.update(model, &s, &still);
        d.compute_bias(model, Vec3::zeros(), sim.gravity());
        let mut r: Vec<f64> = (0..n).map(|i| -model.joints[i].stiffness * q[i] - d.bias[i]).collect();
        d.accumulate_loads(model, loads, &mut r);
        r
    };
    let mut q = state.q.clone();
    for _ in 0..50 {
        let r = residual(&q, &mut d);
        let norm = r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if norm < 1e-13 {
            break;
        }
        let h = 1e-7;
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for c in 0..n {
            let mut qp = q.clone();
            qp[c] += h;
            let rp = residual(&qp, &mut d);
            for r_ in 0..n {
                jac[(r_, c)] = (rp[r_] - r[r_]) / h;
            }
        }
        let dq = jac.lu().solve(&nalgebra::DVector::from_vec(r.iter().map(|x| -x).collect()))?;
        let step = dq.amax();
        let scale = if step > 0.2 { 0.2 / step } else { 1.0 };
        for i in 0..n {
            q[i] += scale * dq[i];
        }
        if q.iter().any(|x| !x.is_finite()) {
            return None;
        }
    }
    state.q = q;
    Some(state)
}

/// Run a drop test on `spec` and return the marker decay.
pub fn simulate_drop_test(spec: &BeamChainSpec, protocol: &DropTest) -> Result<MarkerSet> {
    protocol.validate()?;
    spec.validate()?;
    let bm = BeamModel::with_marker_spacing(spec, protocol.marker_spacing_mm);
    let sim = protocol.sim();
    let dir = Vec3::new(protocol.load_direction[0], protocol.load_direction[1], protocol.load_direction[2]);
    let load = [PointLoad::new(
        bm.handles.tip,
        dir.normalize() * (protocol.load_g * 1e-3 * STANDARD_GRAVITY),
    )];
    let loads: &[PointLoad] = if protocol.load_g > 0.0 { &load } else { &[] };
    let start = static_equilibrium(&bm, loads, &sim)
        .unwrap_or_else(|| ChainState::natural(&bm.model, &DriveSignal::still(), 0.0));
    let opts = SettleOptions {
        extra_damping: protocol.settle_damping_nms_per_rad,
        rate_tolerance: protocol.settle_tolerance_rad_per_s,
        max_steps: protocol.settle_max_steps,
    };
    let held = settle(&bm, start, None, loads, &sim, &opts)?;

    let model = &bm.model;
    let still = DriveSignal::still();
    let mut stepper = Stepper::new(model);
    let mut state = held;
    let steps = sim.steps();
    let stride = sim.record_stride;
    let mut time = Vec::with_capacity(steps / stride + 1);
    let mut markers: [Vec<[f64; 3]>; 3] = Default::default();
    for k in 0..=steps {
        if k % stride == 0 {
            stepper.dynamics.update(model, &state, &still);
            time.push(state.t);
            for (m, r) in markers.iter_mut().zip(&bm.handles.markers) {
                let p = stepper.dynamics.kin.point_position(r);
                m.push([p.x, p.y, p.z]);
            }
        }
        if k < steps {
            stepper.advance(model, &mut state, &still, &[], &sim)?;
        }
    }
    MarkerSet::new(time, markers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeSettings {
    /// Population size; 0 means 15 × dimension.
    pub population: usize,
    pub differential_weight: f64,
    pub crossover_rate: f64,
    pub max_generations: usize,
    pub seed: u64,
    /// Stop when the best value improves by less than `stall_tolerance` over this many generations (0 disables).
    pub stall_generations: usize,
    pub stall_tolerance: f64,
    /// Evaluate a generation's trial vectors in parallel.
    pub parallel: bool,
}

impl Default for DeSettings {
    fn default() -> Self {
        Self {
            population: 0,
            differential_weight: 0.8,
            crossover_rate: 0.9,
            max_generations: 300,
            seed: 0,
            stall_generations: 50,
            stall_tolerance: 1e-3,
            parallel: true,
        }
    }
}

impl DeSettings {
    fn population_for(&self, dim: usize) -> usize {
        if self.population == 0 {
            15 * dim
        } else {
            self.population
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.population_for(dim) < 4 {
            return Err(Error::Optimizer("population must be at least 4".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::Optimizer(format!("crossover rate {} is outside [0, 1]", self.crossover_rate)));
        }
        if !(self.differential_weight > 0.0 && self.differential_weight <= 2.0) {
            return Err(Error::Optimizer("differential weight must be in (0, 2]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub value: f64,
    /// Best value after initialisation and after every generation.
    pub trace: Vec<f64>,
    pub generations: usize,
    pub evaluations: usize,
}

/// DE/rand/1/bin minimisation of `f` over the box `bounds`.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], settings: &DeSettings) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::Optimizer("no variables".into()));
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Optimizer(format!("bounds of variable {k} must be finite with lo < hi")));
        }
    }
    settings.validate(dim)?;
    let np = settings.population_for(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let eval = |xs: &[Vec<f64>]| -> Vec<f64> {
        let g = |x: &Vec<f64>| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if settings.parallel {
            xs.par_iter().map(g).collect()
        } else {
            xs.iter().map(g).collect()
        }
    };

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let mut cost = eval(&pop);
    let mut evaluations = np;
    let best_of = |cost: &[f64]| {
        cost.iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty population")
    };
    let mut trace = vec![cost[best_of(&cost)]];
    let mut generations = 0;

    for _ in 0..settings.max_generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let forced = rng.random_range(0..dim);
                (0..dim)
                    .map(|j| {
                        let cross = j == forced || rng.random::<f64>() < settings.crossover_rate;
                        let v = if cross {
                            pop[r1][j] + settings.differential_weight * (pop[r2][j] - pop[r3][j])
                        } else {
                            pop[i][j]
                        };
                        v.clamp(bounds[j].0, bounds[j].1)
                    })
                    .collect()
            })
            .collect();
        let trial_cost = eval(&trials);
        evaluations += np;
        for (i, (t, c)) in trials.into_iter().zip(trial_cost).enumerate() {
            if c <= cost[i] {
                pop[i] = t;
                cost[i] = c;
            }
        }
        generations += 1;
        trace.push(cost[best_of(&cost)]);
        let s = settings.stall_generations;
        if s > 0 && generations >= s && trace[generations - s] - trace[generations] < settings.stall_tolerance {
            break;
        }
    }
    let b = best_of(&cost);
    Ok(DeResult {
        best: pop[b].clone(),
        value: cost[b],
        trace,
        generations,
        evaluations,
    })
}

/// Search box for the identified parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitBounds {
    pub k_nm_per_rad: (f64, f64),
    pub b_nms_per_rad: (f64, f64),
    pub l2_mm: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self {
            k_nm_per_rad: (0.05, 1.0),
            b_nms_per_rad: (1e-4, 0.05),
            l2_mm: (5.0, 45.0),
        }
    }
}

impl FitBounds {
    fn as_vec(&self) -> Vec<(f64, f64)> {
        vec![self.k_nm_per_rad, self.b_nms_per_rad, self.l2_mm]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub reference: MarkerSet,
    pub geometry: BeamGeometry,
    pub bounds: FitBounds,
    pub protocol: DropTest,
    pub settings: DeSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedParameters {
    pub k_nm_per_rad: f64,
    pub b_nms_per_rad: f64,
    pub l2_mm: f64,
    pub l3_mm: f64,
}

impl FittedParameters {
    pub fn spec(&self, geometry: &BeamGeometry) -> Result<BeamChainSpec> {
        build_twisted_beam(geometry, self.k_nm_per_rad, self.b_nms_per_rad, self.l2_mm, self.l3_mm, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub parameters: FittedParameters,
    /// RMS marker error, mm.
    pub objective_mm: f64,
    pub mean_absolute_error_mm: f64,
    /// Best RMS error per generation, mm.
    pub trace: Vec<f64>,
    pub generations: usize,
    pub evaluations: usize,
    pub seed: u64,
    /// Excluded from the serialized report so reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            what: "fit report".into(),
            message: e.to_string(),
        })
    }
}

fn candidate(geometry: &BeamGeometry, x: &[f64]) -> FittedParameters {
    FittedParameters {
        k_nm_per_rad: x[0],
        b_nms_per_rad: x[1],
        l2_mm: x[2],
        l3_mm: geometry.length_mm - x[2],
    }
}

/// Objective value of one parameter vector `(k, b, l2)`.
pub fn evaluate_candidate(problem: &FitProblem, x: &[f64]) -> Result<f64> {
    let spec = candidate(&problem.geometry, x).spec(&problem.geometry)?;
    let sim = simulate_drop_test(&spec, &problem.protocol)?;
    objective(&sim, &problem.reference)
}

/// Fit `(k, b, l2)` to the reference drop test.
pub fn fit(problem: &FitProblem) -> Result<FitReport> {
    problem.protocol.validate()?;
    problem.geometry.validate()?;
    let started = Instant::now();
    let hard_error: Mutex<Option<Error>> = Mutex::new(None);
    let f = |x: &[f64]| match evaluate_candidate(problem, x) {
        Ok(v) => v,
        Err(e) if e.is_simulation_failure() => f64::INFINITY,
        Err(e) => {
            let mut slot = hard_error.lock().expect("error slot");
            slot.get_or_insert(e);
            f64::INFINITY
        }
    };
    let de = differential_evolution(f, &problem.bounds.as_vec(), &problem.settings)?;
    if let Some(e) = hard_error.into_inner().expect("error slot") {
        return Err(e.annotate("fit objective"));
    }
    let parameters = candidate(&problem.geometry, &de.best);
    let best = simulate_drop_test(&parameters.spec(&problem.geometry)?, &problem.protocol)?;
    Ok(FitReport {
        parameters,
        objective_mm: de.value,
        mean_absolute_error_mm: mean_absolute_error(&best, &problem.reference)?,
        trace: de.trace,
        generations: de.generations,
        evaluations: de.evaluations,
        seed: problem.settings.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::paper_fit_beam;

    fn sample_set(seed: u64, n: usize) -> MarkerSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let time = (0..n).map(|k| k as f64 * 0.01).collect();
        let markers = std::array::from_fn(|_| (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect());
        MarkerSet::new(time, markers).unwrap()
    }

    #[test]
    fn objective_identity_offset_and_symmetry() {
        let a = sample_set(1, 40);
        assert_eq!(objective(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        let d = [0.003, -0.004, 0.0];
        for m in b.markers.iter_mut() {
            for p in m.iter_mut() {
                p[0] += d[0];
                p[1] += d[1];
            }
        }
        assert!((objective(&a, &b).unwrap() - 5.0).abs() < 1e-9);
        assert!((mean_absolute_error(&a, &b).unwrap() - 5.0).abs() < 1e-9);
        let c = sample_set(2, 40);
        assert_eq!(objective(&a, &c).unwrap(), objective(&c, &a).unwrap());
        assert!(objective(&a, &sample_set(3, 39)).is_err());
    }

    #[test]
    fn objective_matches_direct_double_sum() {
        let (a, b) = (sample_set(4, 17), sample_set(5, 17));
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..17 {
                for c in 0..3 {
                    sum += (a.markers[i][j][c] - b.markers[i][j][c]).powi(2);
                }
            }
        }
        let direct = (sum / 51.0).sqrt() * 1e3;
        assert!((objective(&a, &b).unwrap() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn marker_csv_round_trip() {
        let a = sample_set(6, 10);
        assert_eq!(MarkerSet::from_csv(&a.to_csv(&[])).unwrap(), a);
        assert!(MarkerSet::new(vec![0.0], Default::default()).is_err());
    }

    #[test]
    fn de_minimises_sphere_and_rosenbrock() {
        let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let settings = DeSettings {
            population: 30,
            max_generations: 200,
            stall_generations: 0,
            seed: 3,
            ..DeSettings::default()
        };
        let r = differential_evolution(sphere, &[(-5.0, 5.0); 5], &settings).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = differential_evolution(
            rosen,
            &[(-2.0, 2.0); 2],
            &DeSettings {
                max_generations: 1000,
                stall_generations: 0,
                ..DeSettings::default()
            },
        )
        .unwrap();
        assert!((r.best[0] - 1.0).abs() < 1e-3 && (r.best[1] - 1.0).abs() < 1e-3, "{:?}", r.best);
    }

    #[test]
    fn de_is_deterministic_and_respects_bounds() {
        let seen = Mutex::new(Vec::new());
        let f = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            (x[0] - 3.0).powi(2) + x[1].abs()
        };
        let bounds = [(-1.0, 2.0), (-0.5, 0.5)];
        let s = DeSettings {
            max_generations: 60,
            seed: 11,
            ..DeSettings::default()
        };
        let a = differential_evolution(f, &bounds, &s).unwrap();
        let b = differential_evolution(f, &bounds, &s).unwrap();
        assert_eq!(a, b);
        assert!((a.best[0] - 2.0).abs() < 1e-9, "active bound: {:?}", a.best);
        for x in seen.into_inner().unwrap() {
            assert!(x.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi));
        }
    }

    #[test]
    fn de_rejects_bad_settings() {
        let f = |x: &[f64]| x[0];
        let bad = |s: DeSettings| differential_evolution(f, &[(0.0, 1.0)], &s).is_err();
        assert!(bad(DeSettings {
            population: 3,
            ..DeSettings::default()
        }));
        assert!(bad(DeSettings {
            crossover_rate: 1.5,
            ..DeSettings::default()
        }));
        assert!(differential_evolution(f, &[(1.0, 0.0)], &DeSettings::default()).is_err());
    }

    #[test]
    fn unloaded_drop_test_stays_at_natural_pose() {
        let spec = paper_fit_beam(90.0, None).unwrap();
        let m = simulate_drop_test(
            &spec,
            &DropTest {
                load_g: 0.0,
                ..DropTest::default()
            },
        )
        .unwrap();
        let tip = m.markers[1][0];
        assert!((tip[0] - 0.05).abs() < 1e-15 && tip[1].abs() < 1e-15 && tip[2].abs() < 1e-15);
        assert!(m.markers.iter().all(|s| s.iter().all(|p| *p == s[0])));
    }

    #[test]
    fn loaded_drop_test_deflects_down_and_decays() {
        let spec = paper_fit_beam(90.0, None).unwrap();
        let protocol = DropTest::default();
        let a = simulate_drop_test(&spec, &protocol).unwrap();
        let z: Vec<f64> = a.markers[1].iter().map(|p| p[2]).collect();
        assert!(z[0] < -1e-3, "initial tip z {}", z[0]);
        assert!(z.last().unwrap().abs() < 1e-4 * z[0].abs().max(1.0));
        assert_eq!(a, simulate_drop_test(&spec, &protocol).unwrap());
        assert!(simulate_drop_test(
            &spec,
            &DropTest {
                load_g: -1.0,
                ..protocol
            }
        )
        .is_err());
    }
}
