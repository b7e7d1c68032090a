//! Reproducible experiment harness.
//!
//! An [`ExperimentConfig`] fully determines every artifact a run writes:
//! tables are CSV with `#` metadata lines carrying the config hash and time
//! step, reports are JSON, and figures are SVG. Independent sweep points may
//! run concurrently; results are always assembled in sweep order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    contact_frequency, extract_closed_orbit, extract_orbit, summarize_orbit, tangential_direction_for, Orbit, OrbitSummary,
    DEFAULT_DISCARD_FRACTION,
};
use crate::chain::{
    build_twisted_beam, BeamChainSpec, BeamGeometry, FootSpec, PAPER_FIT_DAMPING, PAPER_FIT_L2_MM, PAPER_FIT_STIFFNESS,
};
use crate::contact::{detect_contact_events, ContactConfig};
use crate::dynamics::{DriveSignal, Integrator, SimConfig, STANDARD_GRAVITY};
use crate::error::{Error, Result};
use crate::model::BeamModel;
use crate::simulation::{settle, simulate_from, Ground, SettleOptions};
use crate::svg::{line_plot, orbit_gallery, Series, Style};
use crate::sysid::{fit, simulate_drop_test, DeSettings, DropTest, FitBounds, FitProblem, FitReport, MarkerSet};
use crate::trajectory::{read_text, write_text, CsvTable, Trajectory};
use crate::walker::{run_walker_at, settle_walker, sign_changes, WalkerModel, WalkerRow, WalkerRun, WalkerSpec};

/// Relative axis change that marks a sweep point as transient-sensitive.
pub const TRANSIENT_TOLERANCE: f64 = 0.02;
/// Contact duty above which a run counts as never leaving the ground.
pub const CONTINUOUS_DUTY: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FreeSweep,
    TwistSweep,
    ContactSweep,
    Fit,
    Walker,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::FreeSweep => "free-sweep",
            ExperimentKind::TwistSweep => "twist-sweep",
            ExperimentKind::ContactSweep => "contact-sweep",
            ExperimentKind::Fit => "fit",
            ExperimentKind::Walker => "walker",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PaperFit,
}

/// Swept drive frequencies and amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveRange {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub f_step_hz: f64,
    pub amplitude_mm: f64,
    /// Explicit frequency list; replaces the range when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies_hz: Option<Vec<f64>>,
}

impl DriveRange {
    pub fn span(f_lo_hz: f64, f_hi_hz: f64, f_step_hz: f64) -> Self {
        Self {
            f_lo_hz,
            f_hi_hz,
            f_step_hz,
            amplitude_mm: 2.0,
            frequencies_hz: None,
        }
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        if let Some(list) = &self.frequencies_hz {
            if list.is_empty() || list.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
                return Err(Error::Config("frequencies_hz must be a non-empty list of non-negative values".into()));
            }
            return Ok(list.clone());
        }
        if !(self.f_lo_hz >= 0.0 && self.f_lo_hz <= self.f_hi_hz && self.f_hi_hz.is_finite()) {
            return Err(Error::Config(format!(
                "drive range needs 0 <= f_lo <= f_hi, got {} .. {}",
                self.f_lo_hz, self.f_hi_hz
            )));
        }
        if !(self.f_step_hz > 0.0) {
            return Err(Error::Config(format!("drive step must be positive, got {}", self.f_step_hz)));
        }
        let n = ((self.f_hi_hz - self.f_lo_hz) / self.f_step_hz + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.f_lo_hz + k as f64 * self.f_step_hz).collect())
    }

    pub fn amplitude_m(&self) -> Result<f64> {
        if !(self.amplitude_mm >= 0.0) {
            return Err(Error::Config(format!("amplitude must be non-negative, got {}", self.amplitude_mm)));
        }
        Ok(self.amplitude_mm * 1e-3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwistRange {
    pub phi_lo_deg: f64,
    pub phi_hi_deg: f64,
    pub phi_step_deg: f64,
    pub frequency_hz: f64,
}

impl Default for TwistRange {
    fn default() -> Self {
        Self {
            phi_lo_deg: 0.0,
            phi_hi_deg: 180.0,
            phi_step_deg: 5.0,
            frequency_hz: 15.0,
        }
    }
}

impl TwistRange {
    pub fn angles(&self) -> Result<Vec<f64>> {
        let range = DriveRange {
            frequencies_hz: None,
            ..DriveRange::span(0.0, self.phi_hi_deg - self.phi_lo_deg, self.phi_step_deg)
        };
        if !(self.phi_lo_deg <= self.phi_hi_deg) || !(self.phi_step_deg > 0.0) {
            return Err(Error::Config("twist range needs phi_lo <= phi_hi and a positive step".into()));
        }
        Ok(range.frequencies()?.into_iter().map(|d| self.phi_lo_deg + d).collect())
    }
}

/// Simulation settings shared by every sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub dt_s: f64,
    pub duration_s: f64,
    /// Runs are stretched to at least this many drive periods.
    pub min_periods: f64,
    /// Gravity on/off; by default off for free and twist sweeps, on for contact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity: Option<bool>,
    pub integrator: Integrator,
    pub record_stride: usize,
    pub discard_fraction: f64,
    /// Longest orbit (in drive periods) searched for closure.
    pub max_orbit_periods: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt_s: 1e-4,
            duration_s: 4.0,
            min_periods: 10.0,
            gravity: None,
            integrator: Integrator::SemiImplicitEuler,
            record_stride: 2,
            discard_fraction: DEFAULT_DISCARD_FRACTION,
            max_orbit_periods: 4,
        }
    }
}

impl SimSettings {
    fn validate(&self) -> Result<()> {
        if !(self.discard_fraction >= 0.0 && self.discard_fraction < 1.0) {
            return Err(Error::Config("discard_fraction must be in [0, 1)".into()));
        }
        if self.max_orbit_periods == 0 {
            return Err(Error::Config("max_orbit_periods must be at least 1".into()));
        }
        self.sim_for(1.0, false).validate()
    }

    fn sim_for(&self, frequency_hz: f64, gravity_default: bool) -> SimConfig {
        let g = if self.gravity.unwrap_or(gravity_default) { -STANDARD_GRAVITY } else { 0.0 };
        let duration_s = if frequency_hz > 0.0 {
            self.duration_s.max(self.min_periods / frequency_hz)
        } else {
            self.duration_s
        };
        SimConfig {
            dt_s: self.dt_s,
            duration_s,
            gravity_m_per_s2: [0.0, 0.0, g],
            integrator: self.integrator,
            record_stride: self.record_stride,
        }
    }
}

/// Identified beam constants used when no inline chain is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamParameters {
    pub k_nm_per_rad: f64,
    pub b_nms_per_rad: f64,
    pub l2_mm: f64,
}

impl Default for BeamParameters {
    fn default() -> Self {
        Self {
            k_nm_per_rad: PAPER_FIT_STIFFNESS,
            b_nms_per_rad: PAPER_FIT_DAMPING,
            l2_mm: PAPER_FIT_L2_MM,
        }
    }
}

impl BeamParameters {
    pub fn build(&self, twist_deg: f64, foot: Option<FootSpec>) -> Result<BeamChainSpec> {
        let g = BeamGeometry::prototype().with_twist(twist_deg);
        build_twisted_beam(&g, self.k_nm_per_rad, self.b_nms_per_rad, self.l2_mm, g.length_mm - self.l2_mm, foot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    /// Marker CSV to fit; a synthetic drop test at `synthetic` is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_csv: Option<PathBuf>,
    pub synthetic: BeamParameters,
    /// RMS 3-D marker noise added to the synthetic reference.
    pub noise_rms_mm: f64,
    pub bounds: FitBounds,
    pub drop_test: DropTest,
    /// Optimizer settings; the seed comes from the top-level `seed`.
    pub optimizer: DeSettings,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            reference_csv: None,
            synthetic: BeamParameters::default(),
            noise_rms_mm: 0.0,
            bounds: FitBounds::default(),
            drop_test: DropTest::default(),
            optimizer: DeSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct WalkerSettings {
    pub spec: WalkerSpec,
    pub run: WalkerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Inline chain; overrides the preset for free and contact sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamChainSpec>,
    #[serde(default)]
    pub beam_parameters: BeamParameters,
    #[serde(default = "default_twist")]
    pub twist_deg: f64,
    /// Foot for contact sweeps; the contact rig's foot by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foot: Option<FootSpec>,
    /// Drive range; 1–45 Hz (1–80 Hz for the walker) by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveRange>,
    #[serde(default)]
    pub twist_sweep: TwistRange,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact: Option<ContactConfig>,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub walker: WalkerSettings,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Does not affect results.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Does not affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_twist() -> f64 {
    90.0
}

fn default_jobs() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind: Some(kind),
            preset: Some(Preset::PaperFit),
            beam: None,
            beam_parameters: BeamParameters::default(),
            twist_deg: default_twist(),
            foot: None,
            drive: None,
            twist_sweep: TwistRange::default(),
            sim: SimSettings::default(),
            contact: None,
            fit: FitSettings::default(),
            walker: WalkerSettings::default(),
            seed: 0,
            jobs: default_jobs(),
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "experiment config".into(),
            message: e.to_string(),
        })
    }

    /// Load a config file; a relative `reference_csv` is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&read_text(path)?).map_err(|e| e.annotate(path.display().to_string()))?;
        if let Some(reference) = &cfg.fit.reference_csv {
            if reference.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.fit.reference_csv = Some(dir.join(reference));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            what: "experiment config".into(),
            message: e.to_string(),
        })
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind.ok_or_else(|| Error::Config("experiment kind is not set".into()))
    }

    /// SHA-256 of the canonical config with the result-neutral fields (jobs, out_dir) cleared.
    pub fn hash(&self) -> String {
        let mut neutral = self.clone();
        neutral.jobs = 0;
        neutral.out_dir = None;
        let text = serde_json::to_string(&neutral).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn drive(&self) -> DriveRange {
        self.drive.clone().unwrap_or_else(|| match self.kind {
            Some(ExperimentKind::Walker) => DriveRange::span(1.0, 80.0, 1.0),
            _ => DriveRange::span(1.0, 45.0, 1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        self.sim.validate()?;
        if let Some(beam) = &self.beam {
            beam.validate()?;
        }
        match kind {
            ExperimentKind::FreeSweep => {
                if self.contact.is_some() {
                    return Err(Error::Config("free sweeps run without contact; remove the contact section".into()));
                }
                self.drive().frequencies()?;
            }
            ExperimentKind::TwistSweep => {
                if self.contact.is_some() {
                    return Err(Error::Config("twist sweeps run without contact; remove the contact section".into()));
                }
                if self.beam.is_some() {
                    return Err(Error::Config("twist sweeps build beams from beam_parameters; remove the inline beam".into()));
                }
                self.twist_sweep.angles()?;
                if !(self.twist_sweep.frequency_hz > 0.0) {
                    return Err(Error::Config("twist sweep frequency must be positive".into()));
                }
            }
            ExperimentKind::ContactSweep => {
                self.contact_config().validate()?;
                self.drive().frequencies()?;
            }
            ExperimentKind::Fit => {
                self.fit.drop_test.validate()?;
                self.fit.optimizer.validate(3)?;
                if !(self.fit.noise_rms_mm >= 0.0) {
                    return Err(Error::Config("noise_rms_mm must be non-negative".into()));
                }
            }
            ExperimentKind::Walker => {
                self.walker.spec.validate()?;
                self.walker.run.validate()?;
                self.drive().frequencies()?;
            }
        }
        Ok(())
    }

    fn contact_config(&self) -> ContactConfig {
        self.contact.clone().unwrap_or_default()
    }

    /// The beam for frequency sweeps, with `foot` attached when given.
    pub fn sweep_beam(&self, foot: Option<FootSpec>) -> Result<BeamChainSpec> {
        let mut spec = match &self.beam {
            Some(b) => b.clone(),
            None => self.beam_parameters.build(self.twist_deg, None)?,
        };
        if foot.is_some() {
            spec.foot = foot;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn metadata(&self, kind: ExperimentKind, dt_s: f64) -> Vec<(String, String)> {
        vec![
            ("generator".into(), format!("twistbeam {}", env!("CARGO_PKG_VERSION"))),
            ("kind".into(), kind.name().into()),
            ("config_sha256".into(), self.hash()),
            ("dt_s".into(), dt_s.to_string()),
        ]
    }
}

/// Map `f` over `items` on `jobs` threads (0 = all cores), keeping input order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Contact behaviour of one steady-state run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactSummary {
    pub contact_frequency_hz: f64,
    /// "continuous", "none", "1", "1/2", ...
    pub ratio: String,
    pub duty: f64,
    pub tangential_sign: i8,
}

/// One sweep point: the steady orbit and its analytics.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow {
    /// Swept variable: drive frequency in Hz, or twist angle in degrees.
    pub key: f64,
    pub frequency_hz: f64,
    pub summary: OrbitSummary,
    pub y_span_m: f64,
    pub closure_gap_m: f64,
    pub transient_sensitive: bool,
    pub contact: Option<ContactSummary>,
    pub orbit: Orbit,
}

/// Rows of a frequency or twist sweep, in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub kind: ExperimentKind,
    pub key_name: &'static str,
    pub rows: Vec<OrbitRow>,
}

/// A maximal band of consecutive frequencies with the same contact ratio and tangential sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regime {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub ratio: String,
    pub tangential_sign: i8,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactSweep {
    pub table: SweepTable,
    pub regimes: Vec<Regime>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerReport {
    pub rows: Vec<WalkerRow>,
    pub sign_changes_hz: Vec<f64>,
}

fn span(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Samples with `t <= t_end`.
fn head_until(traj: &Trajectory, t_end: f64) -> Trajectory {
    let n = traj.time.partition_point(|&t| t <= t_end);
    Trajectory {
        time: traj.time[..n].to_vec(),
        names: traj.names.clone(),
        points: traj.points.iter().map(|s| s[..n].to_vec()).collect(),
    }
}

/// Orbit analytics for one run: the final closed loop plus the transient check.
fn orbit_row(key: f64, frequency_hz: f64, traj: &Trajectory, settings: &SimSettings) -> Result<OrbitRow> {
    let duration = traj.time.last().copied().unwrap_or(0.0) - traj.time.first().copied().unwrap_or(0.0);
    let discard = settings.discard_fraction * duration;
    let orbit = extract_closed_orbit(traj, "tip", frequency_hz, Some(discard), settings.max_orbit_periods)?;
    let summary = summarize_orbit(&orbit)?;
    // the same loop length taken right after half the discard
    let loop_s = orbit.period_s;
    let early_end = traj.time[0] + 0.5 * discard + loop_s;
    let transient_sensitive = if early_end + 1e-12 < traj.time[traj.len() - 1] && 0.5 * discard + loop_s > 3.0 / frequency_hz {
        let head = head_until(traj, early_end);
        let early = summarize_orbit(&extract_orbit(&head, "tip", frequency_hz, Some(0.0), orbit.period_multiple())?)?;
        let scale = summary.major_m.max(f64::MIN_POSITIVE);
        let change = (early.major_m - summary.major_m).abs().max((early.minor_m - summary.minor_m).abs()) / scale;
        change > TRANSIENT_TOLERANCE
    } else {
        false
    };
    Ok(OrbitRow {
        key,
        frequency_hz,
        y_span_m: span(orbit.points.iter().map(|p| p[0])),
        closure_gap_m: orbit.closure_gap_m,
        summary,
        transient_sensitive,
        contact: None,
        orbit,
    })
}

fn free_run(spec: &BeamChainSpec, amplitude_m: f64, frequency_hz: f64, key: f64, settings: &SimSettings) -> Result<OrbitRow> {
    let beam = BeamModel::new(spec);
    let sim = settings.sim_for(frequency_hz, false);
    let out = simulate_from(&beam, None, &DriveSignal::new(amplitude_m, frequency_hz), None, &sim)?;
    orbit_row(key, frequency_hz, &out.trajectory, settings)
}

/// Free-vibration frequency sweep.
pub fn run_free_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    let drive = cfg.drive();
    let freqs = drive.frequencies()?;
    let amplitude = drive.amplitude_m()?;
    if freqs.iter().any(|f| *f <= 0.0) {
        return Err(Error::Config("sweep frequencies must be positive".into()));
    }
    let spec = cfg.sweep_beam(None)?;
    let rows = par_map(cfg.jobs, &freqs, |&f| {
        free_run(&spec, amplitude, f, f, &cfg.sim).map_err(|e| e.annotate(format!("free sweep at {f} Hz")))
    })?;
    Ok(SweepTable {
        kind: ExperimentKind::FreeSweep,
        key_name: "f_hz",
        rows,
    })
}

/// Axis lengths against twist angle at a fixed drive frequency.
pub fn run_twist_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    let angles = cfg.twist_sweep.angles()?;
    let f = cfg.twist_sweep.frequency_hz;
    let amplitude = cfg.drive().amplitude_m()?;
    let rows = par_map(cfg.jobs, &angles, |&phi| {
        let spec = cfg.beam_parameters.build(phi, None)?;
        free_run(&spec, amplitude, f, phi, &cfg.sim).map_err(|e| e.annotate(format!("twist sweep at {phi} deg")))
    })?;
    Ok(SweepTable {
        kind: ExperimentKind::TwistSweep,
        key_name: "phi_deg",
        rows,
    })
}

/// Contact analytics over whole drive periods at the end of the run.
pub fn summarize_contact(record: &crate::contact::ContactRecord, threshold_n: f64, frequency_hz: f64, discard_s: f64) -> Result<ContactSummary> {
    let t_end = *record.time.last().ok_or(Error::EmptyRecord)?;
    let t_start = record.time[0] + discard_s;
    let periods = (((t_end - t_start) * frequency_hz).floor()).max(1.0);
    let t0 = t_end - periods / frequency_hz;
    let window = record.tail_from(t0);
    let duty = window.duty();
    let events = detect_contact_events(record, threshold_n)?;
    let cf = contact_frequency(&events, (t0, t_end), frequency_hz);
    let window_events = if window.is_empty() { Vec::new() } else { detect_contact_events(&window, threshold_n)? };
    let tangential = tangential_direction_for(&window, &window_events);
    let ratio = if duty >= CONTINUOUS_DUTY {
        "continuous".to_string()
    } else if cf.ratio_denominator == 0 {
        "none".to_string()
    } else {
        cf.ratio_label()
    };
    Ok(ContactSummary {
        contact_frequency_hz: cf.frequency_hz,
        ratio,
        duty,
        tangential_sign: tangential.aggregate,
    })
}

/// Maximal runs of equal (ratio, tangential sign).
pub fn segment_regimes(rows: &[OrbitRow]) -> Vec<Regime> {
    let mut out: Vec<Regime> = Vec::new();
    for r in rows {
        let Some(c) = &r.contact else { continue };
        match out.last_mut() {
            Some(last) if last.ratio == c.ratio && last.tangential_sign == c.tangential_sign => {
                last.f_hi_hz = r.frequency_hz;
                last.points += 1;
            }
            _ => out.push(Regime {
                f_lo_hz: r.frequency_hz,
                f_hi_hz: r.frequency_hz,
                ratio: c.ratio.clone(),
                tangential_sign: c.tangential_sign,
                points: 1,
            }),
        }
    }
    out
}

/// Single-beam contact sweep: settle on the plate, then drive at each frequency.
pub fn run_contact_sweep(cfg: &ExperimentConfig) -> Result<ContactSweep> {
    let drive = cfg.drive();
    let freqs = drive.frequencies()?;
    if freqs.iter().any(|f| *f <= 0.0) {
        return Err(Error::Config("sweep frequencies must be positive".into()));
    }
    let amplitude = drive.amplitude_m()?;
    let contact = cfg.contact_config();
    let foot = match (&cfg.beam, &cfg.foot) {
        (_, Some(f)) => Some(f.clone()),
        (Some(b), None) if b.foot.is_some() => b.foot.clone(),
        _ => Some(FootSpec::contact_rig()),
    };
    let spec = cfg.sweep_beam(foot)?;
    let beam = BeamModel::new(&spec);
    let ground = Ground::for_beam(&beam, &contact)?;
    let settle_sim = cfg.sim.sim_for(1.0, true);
    let start = crate::dynamics::ChainState::natural(&beam.model, &DriveSignal::still(), 0.0);
    let rest = settle(&beam, start, Some(&ground), &[], &settle_sim, &SettleOptions::default())
        .map_err(|e| e.annotate("settling on the ground"))?;
    let rows = par_map(cfg.jobs, &freqs, |&f| {
        let run = || -> Result<OrbitRow> {
            let sim = cfg.sim.sim_for(f, true);
            let out = simulate_from(&beam, Some(rest.clone()), &DriveSignal::new(amplitude, f), Some(&ground), &sim)?;
            let mut row = orbit_row(f, f, &out.trajectory, &cfg.sim)?;
            let record = out.contact.as_ref().ok_or(Error::EmptyRecord)?;
            row.contact = Some(summarize_contact(record, contact.event_threshold_n, f, cfg.sim.discard_fraction * sim.duration_s)?);
            Ok(row)
        };
        run().map_err(|e| e.annotate(format!("contact sweep at {f} Hz")))
    })?;
    let regimes = segment_regimes(&rows);
    Ok(ContactSweep {
        table: SweepTable {
            kind: ExperimentKind::ContactSweep,
            key_name: "f_hz",
            rows,
        },
        regimes,
    })
}

/// Reference markers for a fit: the configured file, or a synthetic drop test.
pub fn fit_reference(cfg: &ExperimentConfig) -> Result<MarkerSet> {
    match &cfg.fit.reference_csv {
        Some(path) => MarkerSet::read(path),
        None => {
            let spec = cfg.fit.synthetic.build(0.0, None)?;
            let clean = simulate_drop_test(&spec, &cfg.fit.drop_test)?;
            if cfg.fit.noise_rms_mm > 0.0 {
                clean.with_marker_noise(cfg.fit.noise_rms_mm * 1e-3, cfg.seed.wrapping_add(1))
            } else {
                Ok(clean)
            }
        }
    }
}

pub fn run_fit(cfg: &ExperimentConfig) -> Result<(FitReport, MarkerSet)> {
    let reference = fit_reference(cfg)?;
    let mut settings = cfg.fit.optimizer.clone();
    settings.seed = cfg.seed;
    let problem = FitProblem {
        reference: reference.clone(),
        geometry: BeamGeometry::prototype().with_twist(0.0),
        bounds: cfg.fit.bounds.clone(),
        protocol: cfg.fit.drop_test.clone(),
        settings,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let report = pool.install(|| fit(&problem))?;
    Ok((report, reference))
}

/// Walker sweep; a motor-off row at 0 Hz comes first.
pub fn run_walker(cfg: &ExperimentConfig) -> Result<WalkerReport> {
    let spec = &cfg.walker.spec;
    let run = &cfg.walker.run;
    let wm = WalkerModel::new(spec)?;
    let rest = settle_walker(&wm, spec, run).map_err(|e| e.annotate("settling the walker"))?;
    let mut freqs = vec![0.0];
    freqs.extend(cfg.drive().frequencies()?.into_iter().filter(|f| *f > 0.0));
    let rows = par_map(cfg.jobs, &freqs, |&f| {
        run_walker_at(&wm, spec, &rest, f, run).map_err(|e| e.annotate(format!("walker at {f} Hz")))
    })?;
    let sign_changes_hz = sign_changes(&rows[1..]);
    Ok(WalkerReport { rows, sign_changes_hz })
}

// ---- artifacts ----

fn meta_lines(meta: &[(String, String)]) -> String {
    meta.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// The sweep table as CSV.
pub fn sweep_csv(table: &SweepTable, meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    let keyed = table.key_name != "f_hz";
    if keyed {
        let _ = write!(out, "{},", table.key_name);
    }
    out.push_str("f_hz,major_m,minor_m,tilt_rad,area_m2,crossings,class,orientation,y_span_m,orbit_periods,closure_gap_m,transient_sensitive,contact_f_hz,ratio,tangential_sign,duty\n");
    for r in &table.rows {
        let s = &r.summary;
        if keyed {
            let _ = write!(out, "{},", num(r.key));
        }
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.frequency_hz),
            num(s.major_m),
            num(s.minor_m),
            num(s.tilt_rad),
            num(s.signed_area_m2),
            s.self_intersections,
            s.classification,
            s.orientation,
            num(r.y_span_m),
            r.orbit.period_multiple(),
            num(r.closure_gap_m),
            r.transient_sensitive
        );
        match &r.contact {
            Some(c) => {
                let _ = writeln!(out, ",{},{},{},{}", num(c.contact_frequency_hz), c.ratio, c.tangential_sign, num(c.duty));
            }
            None => out.push_str(",,,,\n"),
        }
    }
    out
}

/// Every orbit in long form: one row per sample.
pub fn orbits_csv(table: &SweepTable, meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    let _ = writeln!(out, "# run_key: {}", table.key_name);
    out.push_str("run,f_hz,period_s,t_s,y_m,z_m\n");
    for r in &table.rows {
        for (p, t) in r.orbit.points.iter().zip(&r.orbit.times) {
            let _ = writeln!(out, "{},{},{},{},{},{}", num(r.key), num(r.frequency_hz), num(r.orbit.period_s), num(*t), num(p[0]), num(p[1]));
        }
    }
    out
}

pub fn regimes_csv(regimes: &[Regime], meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    out.push_str("f_lo_hz,f_hi_hz,ratio,tangential_sign,points\n");
    for g in regimes {
        let _ = writeln!(out, "{},{},{},{},{}", num(g.f_lo_hz), num(g.f_hi_hz), g.ratio, g.tangential_sign, g.points);
    }
    out
}

pub fn walker_csv(report: &WalkerReport, meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    let changes: Vec<String> = report.sign_changes_hz.iter().map(|f| f.to_string()).collect();
    let _ = writeln!(out, "# sign_changes_hz: {}", if changes.is_empty() { "none".into() } else { changes.join(" ") });
    out.push_str("# model: planar body (x, z, pitch); lateral, roll and yaw motion of the hardware are not modelled\n");
    out.push_str("f_hz,net_displacement_m,mean_speed_m_per_s,sign,sign_change,foot_lateral_left_m,foot_lateral_right_m,flag\n");
    for r in &report.rows {
        let change = report.sign_changes_hz.contains(&r.frequency_hz) && r.frequency_hz > 0.0;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.frequency_hz),
            num(r.net_displacement_m),
            num(r.mean_speed_m_per_s),
            r.sign(),
            change,
            num(r.foot_lateral_m[0]),
            num(r.foot_lateral_m[1]),
            r.flag.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    out
}

pub fn walker_snapshots_csv(report: &WalkerReport, meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    out.push_str("f_hz,sample,foot_x_rel_m,foot_z_rel_m\n");
    for r in &report.rows {
        for (k, p) in r.snapshot.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", num(r.frequency_hz), k, num(p[0]), num(p[1]));
        }
    }
    out
}

pub fn convergence_csv(report: &FitReport, meta: &[(String, String)]) -> String {
    let mut out = meta_lines(meta);
    out.push_str("generation,best_rms_mm\n");
    for (g, v) in report.trace.iter().enumerate() {
        let _ = writeln!(out, "{g},{}", num(*v));
    }
    out
}

/// Fit report with the run metadata.
#[derive(Debug, Clone, Serialize)]
pub struct FitArtifact<'a> {
    pub generator: String,
    pub config_sha256: String,
    pub dt_s: f64,
    pub report: &'a FitReport,
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    write_text(&path, text)?;
    written.push(path);
    Ok(())
}

/// Run the configured experiment and write its tables and figures into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let mut written = Vec::new();
    match kind {
        ExperimentKind::FreeSweep | ExperimentKind::TwistSweep | ExperimentKind::ContactSweep => {
            let meta = cfg.metadata(kind, cfg.sim.dt_s);
            let stem = kind.name().replace('-', "_");
            let (table, regimes) = match kind {
                ExperimentKind::FreeSweep => (run_free_sweep(cfg)?, None),
                ExperimentKind::TwistSweep => (run_twist_sweep(cfg)?, None),
                _ => {
                    let s = run_contact_sweep(cfg)?;
                    (s.table, Some(s.regimes))
                }
            };
            write(out, &format!("{stem}.csv"), &sweep_csv(&table, &meta), &mut written)?;
            write(out, &format!("{stem}_orbits.csv"), &orbits_csv(&table, &meta), &mut written)?;
            if let Some(regimes) = regimes {
                write(out, "contact_regimes.csv", &regimes_csv(&regimes, &meta), &mut written)?;
            }
        }
        ExperimentKind::Fit => {
            let meta = cfg.metadata(kind, cfg.fit.drop_test.dt_s);
            let (report, reference) = run_fit(cfg)?;
            let artifact = FitArtifact {
                generator: meta[0].1.clone(),
                config_sha256: cfg.hash(),
                dt_s: cfg.fit.drop_test.dt_s,
                report: &report,
            };
            let json = serde_json::to_string_pretty(&artifact).map_err(|e| Error::Parse {
                what: "fit report".into(),
                message: e.to_string(),
            })?;
            write(out, "fit_report.json", &(json + "\n"), &mut written)?;
            write(out, "fit_convergence.csv", &convergence_csv(&report, &meta), &mut written)?;
            write(out, "fit_reference.csv", &reference.to_csv(&meta), &mut written)?;
            let fitted = simulate_drop_test(&report.parameters.spec(&BeamGeometry::prototype().with_twist(0.0))?, &cfg.fit.drop_test)?;
            write(out, "fit_markers.csv", &fitted.to_csv(&meta), &mut written)?;
        }
        ExperimentKind::Walker => {
            let meta = cfg.metadata(kind, cfg.walker.run.dt_s);
            let report = run_walker(cfg)?;
            write(out, "walker.csv", &walker_csv(&report, &meta), &mut written)?;
            write(out, "walker_snapshots.csv", &walker_snapshots_csv(&report, &meta), &mut written)?;
        }
    }
    written.extend(plot_dir(out)?);
    Ok(written)
}

// ---- stored tables ----

/// A CSV table with text cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TextTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = TextTable::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    t.metadata.push((k.trim().into(), v.trim().into()));
                }
                continue;
            }
            let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if t.header.is_empty() {
                t.header = cells;
            } else if cells.len() != t.header.len() {
                return Err(Error::Parse {
                    what: "csv".into(),
                    message: format!("expected {} columns, found {}", t.header.len(), cells.len()),
                });
            } else {
                t.rows.push(cells);
            }
        }
        if t.header.is_empty() {
            return Err(Error::Parse {
                what: "csv".into(),
                message: "missing header row".into(),
            });
        }
        Ok(t)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?).map_err(|e| e.annotate(path.display().to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            what: "csv".into(),
            message: format!("missing column {name}"),
        })?;
        Ok(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    /// Numeric column; empty cells become NaN.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(f64::NAN)
                } else {
                    c.parse::<f64>().map_err(|e| Error::Parse {
                        what: "csv".into(),
                        message: format!("column {name}: {e}"),
                    })
                }
            })
            .collect()
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Orbits stored by [`orbits_csv`], grouped by run key.
pub fn read_orbits(path: &Path) -> Result<(String, Vec<(f64, Orbit)>)> {
    let table = CsvTable::parse(&read_text(path)?).map_err(|e| e.annotate(path.display().to_string()))?;
    let key_name = table.meta("run_key").unwrap_or("run").to_string();
    let [run, f, period, t, y, z] = ["run", "f_hz", "period_s", "t_s", "y_m", "z_m"].map(|c| table.column_index(c));
    let (run, f, period, t, y, z) = (run?, f?, period?, t?, y?, z?);
    let mut groups: Vec<(f64, Orbit)> = Vec::new();
    let mut i = 0;
    while i < table.rows.len() {
        let key = table.rows[i][run];
        let j = i + table.rows[i..].iter().take_while(|r| r[run] == key).count();
        let rows = &table.rows[i..j];
        let mut orbit = Orbit::new(rows.iter().map(|r| [r[y], r[z]]).collect(), rows[0][period], rows[0][f])
            .map_err(|e| e.annotate(format!("{} run {key}", path.display())))?;
        orbit.times = rows.iter().map(|r| r[t]).collect();
        groups.push((key, orbit));
        i = j;
    }
    Ok((key_name, groups))
}

fn provenance(table_meta: &[(String, String)]) -> Vec<(String, String)> {
    table_meta
        .iter()
        .filter(|(k, _)| k == "generator" || k == "kind" || k == "config_sha256" || k == "dt_s")
        .cloned()
        .collect()
}

/// Recompute orbit analytics from every `*_orbits.csv` in `dir`.
pub fn analyze_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for path in list_dir(dir)? {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let Some(stem) = name.strip_suffix("_orbits.csv") else { continue };
        let meta = CsvTable::parse(&read_text(&path)?)?.metadata;
        let (_, orbits) = read_orbits(&path)?;
        let mut out = meta_lines(&provenance(&meta));
        out.push_str(&format!("# source: {name}\n"));
        out.push_str("run,f_hz,major_m,minor_m,tilt_rad,area_m2,crossings,class,orientation\n");
        for (key, orbit) in &orbits {
            let s = summarize_orbit(orbit)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                num(*key),
                num(orbit.drive_frequency_hz),
                num(s.major_m),
                num(s.minor_m),
                num(s.tilt_rad),
                num(s.signed_area_m2),
                s.self_intersections,
                s.classification,
                s.orientation
            );
        }
        write(dir, &format!("{stem}_analysis.csv"), &out, &mut written)?;
    }
    if written.is_empty() {
        return Err(Error::Config(format!("no *_orbits.csv tables found in {}", dir.display())));
    }
    Ok(written)
}

fn list_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    Ok(paths)
}

fn svg_with_meta(svg: String, meta: &[(String, String)]) -> String {
    let comment: String = provenance(meta).iter().map(|(k, v)| format!(" {k}: {v};")).collect();
    svg.replacen('\n', &format!("\n<!--{comment} -->\n"), 1)
}

fn orbit_panels(orbits: &[(f64, Orbit)], key_name: &str) -> Vec<(String, Vec<[f64; 2]>)> {
    let unit = if key_name == "phi_deg" { "deg" } else { "Hz" };
    orbits
        .iter()
        .map(|(k, o)| (format!("{k} {unit}"), o.points.iter().map(|p| [p[0] * 1e3, p[1] * 1e3]).collect()))
        .collect()
}

/// Emit SVG figures for every known table in `dir`.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let exists = |n: &str| dir.join(n).is_file();
    for (stem, key, key_label) in [
        ("free_sweep", "f_hz", "drive frequency [Hz]"),
        ("twist_sweep", "phi_deg", "twist angle [deg]"),
        ("contact_sweep", "f_hz", "drive frequency [Hz]"),
    ] {
        if exists(&format!("{stem}.csv")) {
            let t = TextTable::read(&dir.join(format!("{stem}.csv")))?;
            let x = t.numbers(key)?;
            let major = t.numbers("major_m")?;
            let minor = t.numbers("minor_m")?;
            let mm = |v: &[f64]| x.iter().zip(v).map(|(a, b)| (*a, b * 1e3)).collect::<Vec<_>>();
            let svg = line_plot(
                &format!("{} orbit axes", stem.replace('_', " ")),
                key_label,
                "axis length [mm]",
                &[Series::new("major", mm(&major), Style::Line), Series::new("minor", mm(&minor), Style::Line)],
            );
            write(dir, &format!("{stem}_axes.svg"), &svg_with_meta(svg, &t.metadata), &mut written)?;
            if stem == "contact_sweep" {
                let cf = t.numbers("contact_f_hz")?;
                let pts: Vec<(f64, f64)> = x.iter().zip(&cf).map(|(a, b)| (*a, *b)).collect();
                let guide = |n: f64| Series::new(format!("f/{n}"), x.iter().map(|f| (*f, f / n)).collect(), Style::Line);
                let svg = line_plot(
                    "contact frequency",
                    key_label,
                    "contact frequency [Hz]",
                    &[Series::new("contact", pts, Style::Markers), guide(1.0), guide(2.0), guide(3.0)],
                );
                write(dir, "contact_staircase.svg", &svg_with_meta(svg, &t.metadata), &mut written)?;
            }
        }
        if exists(&format!("{stem}_orbits.csv")) {
            let path = dir.join(format!("{stem}_orbits.csv"));
            let meta = CsvTable::parse(&read_text(&path)?)?.metadata;
            let (key_name, orbits) = read_orbits(&path)?;
            let svg = orbit_gallery(&format!("{} orbits (Y horizontal, Z vertical)", stem.replace('_', " ")), "mm, per-panel scale", &orbit_panels(&orbits, &key_name), 9);
            write(dir, &format!("{stem}_gallery.svg"), &svg_with_meta(svg, &meta), &mut written)?;
        }
    }
    if exists("walker.csv") {
        let t = TextTable::read(&dir.join("walker.csv"))?;
        let f = t.numbers("f_hz")?;
        let v = t.numbers("mean_speed_m_per_s")?;
        let pts = f.iter().zip(&v).map(|(a, b)| (*a, b * 1e3)).collect();
        let svg = line_plot("walker speed", "drive frequency [Hz]", "mean speed [mm/s]", &[Series::new("speed", pts, Style::Line)]);
        write(dir, "walker_speed.svg", &svg_with_meta(svg, &t.metadata), &mut written)?;
    }
    if exists("walker_snapshots.csv") {
        let t = CsvTable::parse(&read_text(&dir.join("walker_snapshots.csv"))?)?;
        let (f, x, z) = (t.column("f_hz")?, t.column("foot_x_rel_m")?, t.column("foot_z_rel_m")?);
        let mut panels: Vec<(String, Vec<[f64; 2]>)> = Vec::new();
        for i in 0..f.len() {
            if panels.last().map(|p| p.0 != format!("{} Hz", f[i])).unwrap_or(true) {
                panels.push((format!("{} Hz", f[i]), Vec::new()));
            }
            panels.last_mut().expect("pushed").1.push([x[i] * 1e3, z[i] * 1e3]);
        }
        let svg = orbit_gallery("walker foot path over one drive period (X horizontal, Z vertical)", "mm, body frame origin", &panels, 10);
        write(dir, "walker_gallery.svg", &svg_with_meta(svg, &t.metadata), &mut written)?;
    }
    if exists("fit_convergence.csv") {
        let t = CsvTable::parse(&read_text(&dir.join("fit_convergence.csv"))?)?;
        let pts = t.column("generation")?.into_iter().zip(t.column("best_rms_mm")?).collect();
        let svg = line_plot("fit convergence", "generation", "best RMS marker error [mm]", &[Series::new("best", pts, Style::Steps)]);
        write(dir, "fit_convergence.svg", &svg_with_meta(svg, &t.metadata), &mut written)?;
    }
    Ok(written)
}

/// Plot, failing when `dir` holds no known tables.
pub fn plot_only(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("output directory {} does not exist", dir.display())));
    }
    let written = plot_dir(dir)?;
    if written.is_empty() {
        return Err(Error::Config(format!("no plottable tables found in {}", dir.display())));
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive_and_exact() {
        let f = DriveRange::span(1.0, 45.0, 1.0).frequencies().unwrap();
        assert_eq!(f.len(), 45);
        assert_eq!(f[44], 45.0);
        assert!(DriveRange::span(5.0, 1.0, 1.0).frequencies().is_err());
        assert!(DriveRange::span(1.0, 5.0, 0.0).frequencies().is_err());
        let phi = TwistRange::default().angles().unwrap();
        assert_eq!(phi.len(), 37);
        assert_eq!(phi[36], 180.0);
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let cfg = ExperimentConfig::new(ExperimentKind::ContactSweep);
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let mut moved = cfg.clone();
        moved.out_dir = Some("elsewhere".into());
        moved.jobs = 8;
        assert_eq!(moved.hash(), cfg.hash());
        assert!(ExperimentConfig::from_json(r#"{"kind":"free-sweep","amplitude":2}"#).is_err());
        let minimal = ExperimentConfig::from_json(r#"{"kind":"walker","drive":{"f_lo_hz":1,"f_hi_hz":3,"f_step_hz":1,"amplitude_mm":2}}"#).unwrap();
        minimal.validate().unwrap();
    }

    #[test]
    fn free_sweep_rejects_contact() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::FreeSweep);
        cfg.contact = Some(ContactConfig::default());
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn regimes_merge_equal_neighbours() {
        let orbit = Orbit::new((0..8).map(|k| [k as f64, 0.0]).collect(), 1.0, 1.0).unwrap();
        let summary = summarize_orbit(&Orbit::new(
            (0..16).map(|k| { let a = k as f64 * 0.4; [a.cos(), a.sin()] }).collect(), 1.0, 1.0).unwrap()).unwrap();
        let row = |f: f64, ratio: &str, s: i8| OrbitRow {
            key: f,
            frequency_hz: f,
            summary: summary.clone(),
            y_span_m: 0.0,
            closure_gap_m: 0.0,
            transient_sensitive: false,
            contact: Some(ContactSummary {
                contact_frequency_hz: f,
                ratio: ratio.into(),
                duty: 0.5,
                tangential_sign: s,
            }),
            orbit: orbit.clone(),
        };
        let rows = [row(1.0, "1", -1), row(2.0, "1", -1), row(3.0, "1/2", -1), row(4.0, "1/2", 1)];
        let g = segment_regimes(&rows);
        assert_eq!(g.len(), 3);
        assert_eq!((g[0].f_lo_hz, g[0].f_hi_hz, g[0].points), (1.0, 2.0, 2));
        assert_eq!(g[2].tangential_sign, 1);
    }

    #[test]
    fn text_tables_keep_strings_and_blanks() {
        let t = TextTable::parse("# a: b\nx,class,r\n1,figure-8,\n2,oval,1/2\n").unwrap();
        assert_eq!(t.column("class").unwrap(), vec!["figure-8", "oval"]);
        assert!(t.numbers("r").is_err());
        assert!(t.numbers("x").unwrap() == vec![1.0, 2.0]);
        assert_eq!(t.meta("a"), Some("b"));
    }
}
