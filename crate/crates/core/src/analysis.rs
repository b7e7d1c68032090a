//! Orbit and contact-trace analytics.
//!
//! Orbits live in the Y–Z plane (drive along Z, coupled motion along Y);
//! points are stored as `[y, z]` pairs in metres.

use std::fmt;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::{detect_contact_events, ContactEvent, ContactRecord};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Fraction of the run discarded as transient when none is given.
pub const DEFAULT_DISCARD_FRACTION: f64 = 0.6;
/// Orbits whose ends are further apart than this fraction of the diameter do not close.
pub const CLOSURE_TOLERANCE: f64 = 0.05;
/// Minor/major ratio below which an orbit is a line.
pub const LINE_RATIO: f64 = 0.05;
/// Signed areas below this (m²) carry no orientation.
pub const AREA_EPSILON: f64 = 1e-12;

/// One steady-state loop of a tip trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `[y, z]` samples, m, in time order.
    pub points: Vec<[f64; 2]>,
    pub times: Vec<f64>,
    /// Length of the loop in time, s (a whole number of drive periods).
    pub period_s: f64,
    pub drive_frequency_hz: f64,
    /// How far the motion is from repeating after `period_s`, m.
    pub closure_gap_m: f64,
}

impl Orbit {
    pub fn new(points: Vec<[f64; 2]>, period_s: f64, drive_frequency_hz: f64) -> Result<Orbit> {
        if points.len() < 8 {
            return Err(Error::Analysis(format!("an orbit needs at least 8 samples, got {}", points.len())));
        }
        let n = points.len();
        let closure = dist(points[0], points[n - 1]);
        Ok(Orbit {
            times: (0..n).map(|k| k as f64 * period_s / n as f64).collect(),
            points,
            period_s,
            drive_frequency_hz,
            closure_gap_m: closure,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance between any two samples.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    pub fn is_closed(&self) -> bool {
        let d = self.diameter();
        d == 0.0 || self.closure_gap_m < CLOSURE_TOLERANCE * d
    }

    /// Periods per loop.
    pub fn period_multiple(&self) -> usize {
        (self.period_s * self.drive_frequency_hz).round().max(1.0) as usize
    }

    /// Reflection `Y ↦ −Y`.
    pub fn mirrored(&self) -> Orbit {
        Orbit {
            points: self.points.iter().map(|p| [-p[0], p[1]]).collect(),
            ..self.clone()
        }
    }

    /// Same loop traversed backwards.
    pub fn reversed(&self) -> Orbit {
        let mut o = self.clone();
        o.points.reverse();
        o
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn zs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[1]).collect()
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// The final `periods` drive periods of `point` after discarding the transient.
///
/// Samples are returned as recorded; `discard_s` defaults to 60% of the run.
pub fn extract_orbit(
    traj: &Trajectory,
    point: &str,
    drive_frequency_hz: f64,
    discard_s: Option<f64>,
    periods: usize,
) -> Result<Orbit> {
    if !(drive_frequency_hz > 0.0) || periods == 0 {
        return Err(Error::Analysis("orbit extraction needs a positive drive frequency".into()));
    }
    let series = traj
        .series(point)
        .ok_or_else(|| Error::Analysis(format!("trajectory has no point named {point}")))?;
    if traj.len() < 2 {
        return Err(Error::Analysis("trajectory too short".into()));
    }
    let t0 = traj.time[0];
    let t_end = traj.time[traj.len() - 1];
    let duration = t_end - t0;
    let discard = discard_s.unwrap_or(DEFAULT_DISCARD_FRACTION * duration);
    let period = periods as f64 / drive_frequency_hz;
    if duration <= discard + 3.0 / drive_frequency_hz || duration - discard < period {
        return Err(Error::Analysis(format!(
            "run of {duration} s is too short to discard {discard} s and keep three periods at {drive_frequency_hz} Hz"
        )));
    }
    let dt = traj.sample_interval().unwrap_or(0.0);
    let start = t_end - period + 0.5 * dt.min(period);
    let first = traj.time.partition_point(|&t| t < start);
    let points: Vec<[f64; 2]> = series[first..].iter().map(|p| [p[1], p[2]]).collect();
    let times = traj.time[first..].to_vec();
    let mut orbit = Orbit::new(points, period, drive_frequency_hz)?;
    orbit.times = times;
    // compare the last sample with the motion one loop earlier
    let earlier = interpolate(&traj.time, series, t_end - period);
    let last = series[series.len() - 1];
    orbit.closure_gap_m = (last[1] - earlier[1]).hypot(last[2] - earlier[2]);
    Ok(orbit)
}

fn interpolate(time: &[f64], series: &[[f64; 3]], t: f64) -> [f64; 3] {
    let k = time.partition_point(|&s| s <= t).clamp(1, time.len() - 1);
    let (ta, tb) = (time[k - 1], time[k]);
    let w = if tb > ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
    let (a, b) = (series[k - 1], series[k]);
    [0, 1, 2].map(|i| a[i] + w * (b[i] - a[i]))
}

/// The final drive period of `point` after the transient.
pub fn extract_steady_orbit(traj: &Trajectory, point: &str, drive_frequency_hz: f64, discard_s: Option<f64>) -> Result<Orbit> {
    extract_orbit(traj, point, drive_frequency_hz, discard_s, 1)
}

/// Shortest loop of 1..=`max_periods` drive periods that closes, or the best-closing one.
pub fn extract_closed_orbit(
    traj: &Trajectory,
    point: &str,
    drive_frequency_hz: f64,
    discard_s: Option<f64>,
    max_periods: usize,
) -> Result<Orbit> {
    let mut best: Option<(f64, Orbit)> = None;
    for m in 1..=max_periods.max(1) {
        let orbit = extract_orbit(traj, point, drive_frequency_hz, discard_s, m)?;
        if orbit.is_closed() {
            return Ok(orbit);
        }
        let d = orbit.diameter();
        let rel = if d > 0.0 { orbit.closure_gap_m / d } else { 0.0 };
        if best.as_ref().map_or(true, |(r, _)| rel < *r) {
            best = Some((rel, orbit));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    /// Full axis lengths, m.
    pub major: f64,
    pub minor: f64,
    /// Angle of the major axis from +Y towards +Z, in [0, π).
    pub tilt: f64,
    pub center: [f64; 2],
}

fn wrap_tilt(a: f64) -> f64 {
    let t = a.rem_euclid(std::f64::consts::PI);
    if t >= std::f64::consts::PI - 1e-15 {
        0.0
    } else {
        t
    }
}

/// Least-squares ellipse through the orbit samples.
///
/// Uses the direct conic fit with the ellipse constraint on normalized data.
/// Nearly collinear samples give a line (minor = 0); point clouds for which no
/// ellipse fits (figure-8s with strong inversions) fall back to the ellipse of
/// equal second moments.
pub fn fit_ellipse(points: &[[f64; 2]]) -> Result<Ellipse> {
    if points.len() < 6 {
        return Err(Error::Analysis(format!("ellipse fit needs at least 6 samples, got {}", points.len())));
    }
    let n = points.len() as f64;
    let my = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let mz = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let cov = points.iter().fold(Matrix2::zeros(), |acc, p| {
        let d = nalgebra::Vector2::new(p[0] - my, p[1] - mz);
        acc + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let (i1, i2) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (l1, l2) = (eig.eigenvalues[i1].max(0.0), eig.eigenvalues[i2].max(0.0));
    let u = eig.eigenvectors.column(i1).into_owned();
    let principal_tilt = wrap_tilt(u[1].atan2(u[0]));

    if l1 == 0.0 || (l2 / l1).sqrt() < 1e-9 {
        let proj: Vec<f64> = points.iter().map(|p| (p[0] - my) * u[0] + (p[1] - mz) * u[1]).collect();
        let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Ok(Ellipse {
            major: hi - lo,
            minor: 0.0,
            tilt: principal_tilt,
            center: [my, mz],
        });
    }

    let moments = Ellipse {
        major: 2.0 * (2.0 * l1).sqrt(),
        minor: 2.0 * (2.0 * l2).sqrt(),
        tilt: principal_tilt,
        center: [my, mz],
    };
    Ok(direct_conic_fit(points, my, mz).unwrap_or(moments))
}

/// Halíř–Flusser direct least-squares ellipse fit.
fn direct_conic_fit(points: &[[f64; 2]], my: f64, mz: f64) -> Option<Ellipse> {
    let n = points.len() as f64;
    let scale = (points.iter().map(|p| (p[0] - my).powi(2) + (p[1] - mz).powi(2)).sum::<f64>() / n).sqrt();
    if !(scale > 0.0) {
        return None;
    }
    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for p in points {
        let x = (p[0] - my) / scale;
        let y = (p[1] - mz) / scale;
        let d1 = Vector3::new(x * x, x * y, y * y);
        let d2 = Vector3::new(x, y, 1.0);
        s1 += d1 * d1.transpose();
        s2 += d1 * d2.transpose();
        s3 += d2 * d2.transpose();
    }
    let t = -s3.try_inverse()? * s2.transpose();
    let m = s1 + s2 * t;
    let mp = Matrix3::from_rows(&[
        (m.row(2) / 2.0).into_owned(),
        (-m.row(1)).into_owned(),
        (m.row(0) / 2.0).into_owned(),
    ]);
    let eigenvalues = mp.complex_eigenvalues();
    let mut chosen: Option<Vector3<f64>> = None;
    for ev in eigenvalues.iter() {
        if ev.im.abs() > 1e-9 * (1.0 + ev.re.abs()) {
            continue;
        }
        let Some(v) = null_vector(&(mp - Matrix3::identity() * ev.re)) else {
            continue;
        };
        if 4.0 * v[0] * v[2] - v[1] * v[1] > 0.0 {
            chosen = Some(v);
            break;
        }
    }
    let a1 = chosen?;
    let a2 = t * a1;
    let (a, b, c, d, e, f) = (a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]);
    // centre
    let det = 4.0 * a * c - b * b;
    if !(det.abs() > 0.0) {
        return None;
    }
    let x0 = (b * e - 2.0 * c * d) / det;
    let y0 = (b * d - 2.0 * a * e) / det;
    let f0 = a * x0 * x0 + b * x0 * y0 + c * y0 * y0 + d * x0 + e * y0 + f;
    let q = Matrix2::new(a, b / 2.0, b / 2.0, c);
    let qe = SymmetricEigen::new(q);
    let (lam_small, lam_big, k_small) = if qe.eigenvalues[0] <= qe.eigenvalues[1] {
        (qe.eigenvalues[0], qe.eigenvalues[1], 0)
    } else {
        (qe.eigenvalues[1], qe.eigenvalues[0], 1)
    };
    let semi_major = (-f0 / lam_small).sqrt();
    let semi_minor = (-f0 / lam_big).sqrt();
    if !(semi_major.is_finite() && semi_minor.is_finite()) {
        return None;
    }
    let dir = qe.eigenvectors.column(k_small);
    Some(Ellipse {
        major: 2.0 * semi_major * scale,
        minor: 2.0 * semi_minor * scale,
        tilt: wrap_tilt(dir[1].atan2(dir[0])),
        center: [my + x0 * scale, mz + y0 * scale],
    })
}

/// A unit vector spanning the null space of a rank-2 3×3 matrix.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let rows = [m.row(0).transpose(), m.row(1).transpose(), m.row(2).transpose()];
    let candidates = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])];
    let best = candidates
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()?;
    let n = best.norm();
    (n > 0.0).then(|| best / n)
}

/// Shoelace signed area in the Y–Z plane (positive counterclockwise).
pub fn signed_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    // relative to the first point to limit cancellation
    let o = points[0];
    let mut a = 0.0;
    for i in 1..n - 1 {
        let (p, q) = (points[i], points[i + 1]);
        a += (p[0] - o[0]) * (q[1] - o[1]) - (q[0] - o[0]) * (p[1] - o[1]);
    }
    0.5 * a
}

/// Travel direction of the loop: +1 counterclockwise, −1 clockwise, 0 degenerate.
pub fn orbit_orientation(orbit: &Orbit) -> i8 {
    let a = signed_area(&orbit.points);
    if a.abs() < AREA_EPSILON {
        0
    } else if a > 0.0 {
        1
    } else {
        -1
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Transversal crossing of segments `ab` and `cd`.
pub fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<[f64; 2]> {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        let s = o3 / (o3 - o4);
        Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crossings {
    pub count: usize,
    pub points: Vec<[f64; 2]>,
    /// Segment index pairs `(i, j)` with `i < j`; segment `k` joins vertex `k` to `k + 1` (cyclically).
    pub segments: Vec<(usize, usize)>,
}

/// Transversal self-crossings of a closed polyline (closing segment included, neighbours skipped).
///
/// Segments are swept in order of their lowest Y so only pairs whose Y ranges overlap are tested.
pub fn count_polyline_self_intersections(points: &[[f64; 2]]) -> Crossings {
    let n = points.len();
    let mut out = Crossings::default();
    if n < 4 {
        return out;
    }
    let seg = |k: usize| (points[k], points[(k + 1) % n]);
    let mut order: Vec<(f64, f64, usize)> = (0..n)
        .map(|k| {
            let (a, b) = seg(k);
            (a[0].min(b[0]), a[0].max(b[0]), k)
        })
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    for (pos, &(_, hi, i)) in order.iter().enumerate() {
        let (a, b) = seg(i);
        let (zlo, zhi) = (a[1].min(b[1]), a[1].max(b[1]));
        for &(lo2, _, j) in &order[pos + 1..] {
            if lo2 > hi {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c, d) = seg(j);
            if c[1].max(d[1]) < zlo || c[1].min(d[1]) > zhi {
                continue;
            }
            if let Some(p) = segments_cross(a, b, c, d) {
                out.count += 1;
                out.points.push(p);
                out.segments.push((i.min(j), i.max(j)));
            }
        }
    }
    // stable report order independent of the sweep
    let mut idx: Vec<usize> = (0..out.count).collect();
    idx.sort_by_key(|&k| out.segments[k]);
    out.points = idx.iter().map(|&k| out.points[k]).collect();
    out.segments = idx.iter().map(|&k| out.segments[k]).collect();
    out
}

pub fn count_self_intersections(orbit: &Orbit) -> Crossings {
    count_polyline_self_intersections(&orbit.points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitClass {
    Line,
    Oval,
    FigureEight,
    HigherOrder,
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitClass::Line => "line",
            OrbitClass::Oval => "oval",
            OrbitClass::FigureEight => "figure-8",
            OrbitClass::HigherOrder => "higher-order",
        })
    }
}

impl std::str::FromStr for OrbitClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "line" => OrbitClass::Line,
            "oval" => OrbitClass::Oval,
            "figure-8" => OrbitClass::FigureEight,
            "higher-order" => OrbitClass::HigherOrder,
            other => return Err(Error::Parse {
                what: "orbit class".into(),
                message: other.into(),
            }),
        })
    }
}

/// Line when the ellipse is thin, otherwise by crossing count.
pub fn classify(ellipse: &Ellipse, crossings: usize) -> OrbitClass {
    if ellipse.major == 0.0 || ellipse.minor / ellipse.major < LINE_RATIO {
        OrbitClass::Line
    } else {
        match crossings {
            0 => OrbitClass::Oval,
            1 => OrbitClass::FigureEight,
            _ => OrbitClass::HigherOrder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub major_m: f64,
    pub minor_m: f64,
    pub tilt_rad: f64,
    pub signed_area_m2: f64,
    pub self_intersections: usize,
    pub orientation: i8,
    pub classification: OrbitClass,
}

pub fn summarize_orbit(orbit: &Orbit) -> Result<OrbitSummary> {
    let e = fit_ellipse(&orbit.points)?;
    let crossings = count_self_intersections(orbit).count;
    Ok(OrbitSummary {
        major_m: e.major,
        minor_m: e.minor,
        tilt_rad: e.tilt,
        signed_area_m2: signed_area(&orbit.points),
        self_intersections: crossings,
        orientation: orbit_orientation(orbit),
        classification: classify(&e, crossings),
    })
}

/// Subharmonic ratios recognised by [`contact_frequency`].
pub const CONTACT_RATIOS: [u32; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactFrequency {
    pub frequency_hz: f64,
    /// Raw contact/drive frequency ratio.
    pub ratio: f64,
    /// Nearest `1/n`, as `n` (0 when there are no touchdowns).
    pub ratio_denominator: u32,
    pub residual: f64,
}

impl ContactFrequency {
    pub fn ratio_label(&self) -> String {
        match self.ratio_denominator {
            0 => "0".into(),
            1 => "1".into(),
            n => format!("1/{n}"),
        }
    }
}

/// Touchdowns per second within `[t0, t1)` and the nearest ratio `1/n` to the drive.
pub fn contact_frequency(events: &[ContactEvent], window: (f64, f64), drive_frequency_hz: f64) -> ContactFrequency {
    let (t0, t1) = window;
    let count = events.iter().filter(|e| e.touchdown >= t0 && e.touchdown < t1).count();
    let len = t1 - t0;
    let frequency_hz = if len > 0.0 { count as f64 / len } else { 0.0 };
    if count == 0 || !(drive_frequency_hz > 0.0) {
        return ContactFrequency {
            frequency_hz,
            ratio: 0.0,
            ratio_denominator: 0,
            residual: 0.0,
        };
    }
    let ratio = frequency_hz / drive_frequency_hz;
    let (n, residual) = CONTACT_RATIOS
        .iter()
        .map(|&n| (n, (ratio - 1.0 / n as f64).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty ratio set");
    ContactFrequency {
        frequency_hz,
        ratio,
        ratio_denominator: n,
        residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialDirection {
    /// Sign of `∫F_t dt` over each contact event.
    pub per_event: Vec<i8>,
    /// Majority sign, 0 when undetermined.
    pub aggregate: i8,
}

/// Direction of the tangential impulse during each contact.
pub fn tangential_direction(record: &ContactRecord, threshold_n: f64) -> Result<TangentialDirection> {
    let events = detect_contact_events(record, threshold_n)?;
    Ok(tangential_direction_for(record, &events))
}

pub fn tangential_direction_for(record: &ContactRecord, events: &[ContactEvent]) -> TangentialDirection {
    let per_event: Vec<i8> = events
        .iter()
        .map(|e| {
            let a = record.time.partition_point(|&t| t < e.touchdown);
            let b = record.time.partition_point(|&t| t <= e.liftoff);
            let mut impulse = 0.0;
            for k in a..b.min(record.len()) {
                let dt = if k + 1 < record.len() {
                    record.time[k + 1] - record.time[k]
                } else if k > 0 {
                    record.time[k] - record.time[k - 1]
                } else {
                    0.0
                };
                impulse += record.tangential[k] * dt;
            }
            if impulse.abs() < 1e-15 {
                0
            } else {
                impulse.signum() as i8
            }
        })
        .collect();
    let pos = per_event.iter().filter(|&&s| s > 0).count();
    let neg = per_event.iter().filter(|&&s| s < 0).count();
    let aggregate = match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    };
    TangentialDirection { per_event, aggregate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::Vec3;
    use std::f64::consts::PI;

    fn ellipse_points(a: f64, b: f64, rot: f64, n: usize, phase: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|k| {
                let t = phase + 2.0 * PI * k as f64 / n as f64;
                let (x, y) = (a * t.cos(), b * t.sin());
                [x * rot.cos() - y * rot.sin() + 0.01, x * rot.sin() + y * rot.cos() - 0.02]
            })
            .collect()
    }

    fn brute_force(points: &[[f64; 2]]) -> usize {
        let n = points.len();
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]).is_some() {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn circle_axes_are_diameters() {
        let e = fit_ellipse(&ellipse_points(2e-3, 2e-3, 0.0, 100, 0.1)).unwrap();
        assert!((e.major - 4e-3).abs() < 1e-12 && (e.minor - 4e-3).abs() < 1e-12);
    }

    #[test]
    fn rotated_ellipse_axes_and_tilt() {
        let e = fit_ellipse(&ellipse_points(3e-3, 1e-3, 30f64.to_radians(), 90, 0.0)).unwrap();
        assert!((e.major - 6e-3).abs() < 1e-12);
        assert!((e.minor - 2e-3).abs() < 1e-12);
        assert!((e.tilt.to_degrees() - 30.0).abs() < 0.5);
    }

    #[test]
    fn segment_along_z_is_a_vertical_line() {
        let pts: Vec<[f64; 2]> = (0..50).map(|k| [0.0, 4e-3 * (k as f64 / 49.0) - 2e-3]).collect();
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.major - 4e-3).abs() < 1e-15);
        assert_eq!(e.minor, 0.0);
        assert!((e.tilt.to_degrees() - 90.0).abs() < 1e-9);
        assert!(fit_ellipse(&pts[..5]).is_err());
    }

    #[test]
    fn orientation_follows_travel_direction() {
        let pts = ellipse_points(1e-3, 1e-3, 0.0, 64, 0.0);
        let o = Orbit::new(pts, 0.1, 10.0).unwrap();
        assert_eq!(orbit_orientation(&o), 1);
        assert_eq!(orbit_orientation(&o.reversed()), -1);
        assert_eq!(orbit_orientation(&o.mirrored()), -1);
        let line = Orbit::new((0..20).map(|k| [0.0, k as f64 * 1e-4]).collect(), 0.1, 10.0).unwrap();
        assert_eq!(orbit_orientation(&line), 0);
    }

    #[test]
    fn lemniscate_has_one_crossing_and_double_loop_two() {
        let lem: Vec<[f64; 2]> = (0..401)
            .map(|k| {
                let t = 0.013 + 2.0 * PI * k as f64 / 401.0;
                let s = 1.0 + t.sin().powi(2);
                [t.cos() / s, t.sin() * t.cos() / s]
            })
            .collect();
        let c = count_polyline_self_intersections(&lem);
        assert_eq!(c.count, 1);
        assert!(c.points[0][0].abs() < 1e-3 && c.points[0][1].abs() < 1e-3);
        // a limaçon-like curve with two inner inversions: y = cos t, z = sin 3t
        let double: Vec<[f64; 2]> = (0..997)
            .map(|k| {
                let t = 0.0071 + 2.0 * PI * k as f64 / 997.0;
                [t.cos(), (2.0 * t).sin() * 0.5 + (3.0 * t).sin()]
            })
            .collect();
        let got = count_polyline_self_intersections(&double).count;
        assert_eq!(got, brute_force(&double));
        assert_eq!(got, 2);
        let circle = ellipse_points(1.0, 1.0, 0.0, 50, 0.0);
        assert_eq!(count_polyline_self_intersections(&circle).count, 0);
    }

    #[test]
    fn crossing_count_is_reflection_invariant() {
        let pts: Vec<[f64; 2]> = (0..300)
            .map(|k| {
                let t = 0.02 + 2.0 * PI * k as f64 / 300.0;
                [t.sin(), (2.0 * t).sin()]
            })
            .collect();
        let o = Orbit::new(pts, 0.1, 10.0).unwrap();
        assert_eq!(count_self_intersections(&o).count, count_self_intersections(&o.mirrored()).count);
    }

    fn synthetic_traj(f: f64, dt: f64, duration: f64, signal: impl Fn(f64) -> [f64; 3]) -> Trajectory {
        let mut tr = Trajectory::new(["tip"]);
        let n = (duration / dt).round() as usize;
        for k in 0..=n {
            let t = k as f64 * dt;
            let p = signal(t);
            tr.push(t, &[Vec3::new(p[0], p[1], p[2])]);
        }
        let _ = f;
        tr
    }

    #[test]
    fn steady_orbit_of_a_sinusoid_is_a_line() {
        let f = 15.0;
        let tr = synthetic_traj(f, 1e-4, 2.0, |t| [0.05, 0.0, 2e-3 * (2.0 * PI * f * t).sin()]);
        let o = extract_steady_orbit(&tr, "tip", f, None).unwrap();
        assert!(o.is_closed());
        let s = summarize_orbit(&o).unwrap();
        assert_eq!(s.classification, OrbitClass::Line);
        assert!((s.major_m - 4e-3).abs() < 1e-6);
    }

    #[test]
    fn steady_orbit_matches_generator_and_skips_transient() {
        let f = 20.0;
        let w = 2.0 * PI * f;
        let gen = move |t: f64| [0.05, 1e-3 * (w * t).cos(), 2e-3 * (w * t).sin()];
        let transient = move |t: f64| {
            let g = gen(t);
            let decay = 5e-3 * (-t / 0.05).exp() * (3.3 * w * t).sin();
            [g[0], g[1] + decay, g[2] - decay]
        };
        let tr = synthetic_traj(f, 2e-4, 3.0, transient);
        let o = extract_steady_orbit(&tr, "tip", f, None).unwrap();
        for (t, p) in o.times.iter().zip(&o.points) {
            let g = gen(*t);
            assert!((p[0] - g[1]).abs() < 1e-9 && (p[1] - g[2]).abs() < 1e-9);
        }
        assert!(o.closure_gap_m < 1e-9);
        assert!(extract_steady_orbit(&tr, "tip", f, Some(2.9)).is_err());
        assert!(extract_steady_orbit(&tr, "nope", f, None).is_err());
    }

    #[test]
    fn subharmonic_orbit_closes_after_two_periods() {
        let f = 26.0;
        let w = 2.0 * PI * f;
        let tr = synthetic_traj(f, 1e-4, 3.01, move |t| [0.0, 1e-3 * (0.5 * w * t).sin(), 2e-3 * (w * t).sin()]);
        let one = extract_steady_orbit(&tr, "tip", f, None).unwrap();
        assert!(!one.is_closed());
        let o = extract_closed_orbit(&tr, "tip", f, None, 4).unwrap();
        assert_eq!(o.period_multiple(), 2);
        assert!(o.is_closed());
    }

    fn events_every(period: f64, until: f64, width: f64) -> Vec<ContactEvent> {
        let mut v = Vec::new();
        let mut k = 0;
        loop {
            let t = k as f64 * period;
            if t >= until {
                break;
            }
            v.push(ContactEvent {
                touchdown: t,
                liftoff: t + width,
            });
            k += 1;
        }
        v
    }

    #[test]
    fn contact_frequency_detects_subharmonics() {
        let every = events_every(1.0 / 20.0, 1.0, 0.01);
        let c = contact_frequency(&every, (0.0, 1.0), 20.0);
        assert_eq!((c.frequency_hz, c.ratio_denominator), (20.0, 1));
        let half = events_every(2.0 / 26.0, 1.0, 0.01);
        let c = contact_frequency(&half, (0.0, 1.0), 26.0);
        assert_eq!((c.frequency_hz, c.ratio_denominator, c.residual), (13.0, 2, 0.0));
        let third = events_every(3.0 / 39.0, 1.0, 0.01);
        let c = contact_frequency(&third, (0.0, 1.0), 39.0);
        assert_eq!((c.frequency_hz, c.ratio_denominator, c.residual), (13.0, 3, 0.0));
        assert_eq!(c.ratio_label(), "1/3");
        let none = contact_frequency(&[], (0.0, 1.0), 39.0);
        assert_eq!((none.frequency_hz, none.ratio_denominator), (0.0, 0));
    }

    fn pulse_record(sign: f64) -> ContactRecord {
        let mut r = ContactRecord::default();
        for k in 0..2000 {
            let t = k as f64 * 1e-3;
            let on = (t * 10.0).fract() < 0.3;
            let f_n = if on { 1.0 } else { 0.0 };
            r.push(t, if on { -1e-4 } else { 1e-3 }, f_n, sign * 0.2 * f_n);
        }
        r
    }

    #[test]
    fn tangential_direction_signs() {
        let pos = pulse_record(1.0);
        let d = tangential_direction(&pos, 0.01).unwrap();
        assert_eq!(d.aggregate, 1);
        assert!(d.per_event.iter().all(|&s| s == 1));
        assert_eq!(tangential_direction(&pos.negated_tangential(), 0.01).unwrap().aggregate, -1);
        let mut chatter = ContactRecord::default();
        for k in 0..100 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            chatter.push(k as f64 * 1e-3, 0.0, 0.004, s * 0.001);
        }
        assert_eq!(tangential_direction(&chatter, 0.01).unwrap().aggregate, 0);
        assert!(tangential_direction(&ContactRecord::default(), 0.01).is_err());
    }

    #[test]
    fn classification_thresholds() {
        let e = |major: f64, minor: f64| Ellipse {
            major,
            minor,
            tilt: 0.0,
            center: [0.0; 2],
        };
        assert_eq!(classify(&e(1.0, 0.04), 0), OrbitClass::Line);
        assert_eq!(classify(&e(1.0, 0.2), 0), OrbitClass::Oval);
        assert_eq!(classify(&e(1.0, 0.2), 1), OrbitClass::FigureEight);
        assert_eq!(classify(&e(1.0, 0.2), 3), OrbitClass::HigherOrder);
        for c in [OrbitClass::Line, OrbitClass::Oval, OrbitClass::FigureEight, OrbitClass::HigherOrder] {
            assert_eq!(c.to_string().parse::<OrbitClass>().unwrap(), c);
        }
    }
}
