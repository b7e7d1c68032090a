//! Compliant ground contact with regularized Coulomb friction.
//!
//! The ground is the plane `z = ground height` with normal +Z. Contact is
//! evaluated at discrete points; the tangential force reported in records is
//! the Y component of the friction force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::Vec3;

/// Which body-fixed point of the beam touches the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactPoint {
    /// Foot corner when a foot is fitted, otherwise the tip.
    EndPoint,
    Tip,
    /// Offset from the tip in the distal link frame, mm.
    TipOffset { offset_mm: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactConfig {
    /// Explicit plane height; derived from the natural gap when absent.
    #[serde(default)]
    pub ground_height_m: Option<f64>,
    /// Stage-to-plate distance of the rig (metadata).
    pub stage_height_m: f64,
    /// Distance from the unloaded contact point to the plate.
    pub natural_gap_m: f64,
    pub normal_stiffness_n_per_m: f64,
    pub normal_damping_ns_per_m: f64,
    pub friction_coefficient: f64,
    pub regularization_velocity_m_per_s: f64,
    #[serde(default = "default_points")]
    pub contact_points: Vec<ContactPoint>,
    /// Normal-force level that marks a touchdown.
    #[serde(default = "default_threshold")]
    pub event_threshold_n: f64,
}

fn default_points() -> Vec<ContactPoint> {
    vec![ContactPoint::EndPoint]
}

fn default_threshold() -> f64 {
    0.01
}

impl Default for ContactConfig {
    fn default() -> Self {
        Self {
            ground_height_m: None,
            stage_height_m: 0.072,
            natural_gap_m: 0.0055,
            normal_stiffness_n_per_m: 5000.0,
            normal_damping_ns_per_m: 5.0,
            friction_coefficient: 0.6,
            regularization_velocity_m_per_s: 1e-3,
            contact_points: default_points(),
            event_threshold_n: default_threshold(),
        }
    }
}

impl ContactConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("contact: {m}")));
        if !(self.normal_stiffness_n_per_m > 0.0) {
            return bad("normal stiffness must be positive");
        }
        if !(self.normal_damping_ns_per_m >= 0.0) {
            return bad("normal damping must be non-negative");
        }
        if !(self.friction_coefficient >= 0.0) {
            return bad("friction coefficient must be non-negative");
        }
        if !(self.regularization_velocity_m_per_s > 0.0) {
            return bad("regularization velocity must be positive");
        }
        if !(self.natural_gap_m >= 0.0) {
            return bad("natural gap must be non-negative");
        }
        if self.contact_points.is_empty() {
            return bad("at least one contact point is required");
        }
        Ok(())
    }

    /// Plane height for a contact point whose unloaded height is `natural_point_z`.
    pub fn ground_height_for(&self, natural_point_z: f64) -> f64 {
        self.ground_height_m.unwrap_or(natural_point_z - self.natural_gap_m)
    }
}

/// Unit saturation.
fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Normal and tangential force for a point with signed `gap` (negative when penetrating).
pub fn contact_force(gap: f64, gap_rate: f64, tangential_velocity: f64, cfg: &ContactConfig) -> (f64, f64) {
    if gap > 0.0 {
        return (0.0, 0.0);
    }
    let f_n = (-cfg.normal_stiffness_n_per_m * gap - cfg.normal_damping_ns_per_m * gap_rate).max(0.0);
    let f_t = -cfg.friction_coefficient * f_n * sat(tangential_velocity / cfg.regularization_velocity_m_per_s);
    (f_n, f_t)
}

/// Same law with friction acting against the full in-plane slip velocity.
///
/// Returns the normal force magnitude and the friction force vector (z = 0).
pub fn contact_force_planar(gap: f64, gap_rate: f64, slip: Vec3, cfg: &ContactConfig) -> (f64, Vec3) {
    let slip = Vec3::new(slip.x, slip.y, 0.0);
    let speed = slip.norm();
    let (f_n, f_t) = contact_force(gap, gap_rate, speed, cfg);
    if speed == 0.0 || f_t == 0.0 {
        return (f_n, Vec3::zeros());
    }
    (f_n, slip * (f_t / speed))
}

/// Slope of the friction force in its linear (sub-regularization) regime, N·s/m; 0 when saturated.
pub fn friction_damping(f_n: f64, slip: Vec3, cfg: &ContactConfig) -> f64 {
    let speed = slip.x.hypot(slip.y);
    if f_n <= 0.0 || speed >= cfg.regularization_velocity_m_per_s {
        return 0.0;
    }
    cfg.friction_coefficient * f_n / cfg.regularization_velocity_m_per_s
}

/// Sampled contact history of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactRecord {
    pub time: Vec<f64>,
    pub gap: Vec<f64>,
    pub normal: Vec<f64>,
    /// Friction force along world Y.
    pub tangential: Vec<f64>,
    pub in_contact: Vec<bool>,
}

impl ContactRecord {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn push(&mut self, t: f64, gap: f64, normal: f64, tangential: f64) {
        self.time.push(t);
        self.gap.push(gap);
        self.normal.push(normal);
        self.tangential.push(tangential);
        self.in_contact.push(normal > 0.0);
    }

    /// Copy with the tangential channel negated.
    pub fn negated_tangential(&self) -> Self {
        let mut out = self.clone();
        out.tangential.iter_mut().for_each(|f| *f = -*f);
        out
    }

    /// Samples with `t >= start`.
    pub fn tail_from(&self, start: f64) -> Self {
        let i = self.time.partition_point(|&t| t < start);
        Self {
            time: self.time[i..].to_vec(),
            gap: self.gap[i..].to_vec(),
            normal: self.normal[i..].to_vec(),
            tangential: self.tangential[i..].to_vec(),
            in_contact: self.in_contact[i..].to_vec(),
        }
    }

    /// Fraction of samples in contact.
    pub fn duty(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.in_contact.iter().filter(|c| **c).count() as f64 / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub touchdown: f64,
    pub liftoff: f64,
}

/// Maximal contact intervals with hysteresis.
///
/// A touchdown is the first sample with `F_n > threshold`; the matching
/// liftoff is the first later sample with `F_n < threshold / 2`. An interval
/// still open at the end of the record closes at the last sample.
pub fn detect_contact_events(record: &ContactRecord, threshold: f64) -> Result<Vec<ContactEvent>> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let mut events = Vec::new();
    let mut open: Option<f64> = None;
    for (&t, &f) in record.time.iter().zip(&record.normal) {
        match open {
            None if f > threshold => open = Some(t),
            Some(start) if f < 0.5 * threshold => {
                events.push(ContactEvent { touchdown: start, liftoff: t });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        events.push(ContactEvent {
            touchdown: start,
            liftoff: *record.time.last().unwrap(),
        });
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg_with(k: f64, mu: f64) -> ContactConfig {
        ContactConfig {
            normal_stiffness_n_per_m: k,
            friction_coefficient: mu,
            ..ContactConfig::default()
        }
    }

    #[test]
    fn separated_point_feels_nothing() {
        assert_eq!(contact_force(1e-3, -5.0, 3.0, &ContactConfig::default()), (0.0, 0.0));
    }

    #[test]
    fn linear_spring_and_saturated_friction() {
        let mut cfg = cfg_with(1000.0, 0.6);
        cfg.normal_damping_ns_per_m = 0.0;
        let (f_n, f_t) = contact_force(-1e-3, 0.0, 0.0, &cfg);
        assert!((f_n - 1.0).abs() < 1e-12);
        assert_eq!(f_t, 0.0);
        let (_, f_t) = contact_force(-1e-3, 0.0, 10.0, &cfg);
        assert!((f_t + 0.6).abs() < 1e-12);
        let (_, f_t) = contact_force(-1e-3, 0.0, -10.0, &cfg);
        assert!((f_t - 0.6).abs() < 1e-12);
    }

    #[test]
    fn separating_fast_clips_to_zero() {
        let (f_n, f_t) = contact_force(-1e-4, 10.0, 1.0, &ContactConfig::default());
        assert_eq!((f_n, f_t), (0.0, 0.0));
    }

    #[test]
    fn spring_force_is_continuous_in_gap() {
        let cfg = ContactConfig::default();
        let (a, _) = contact_force(1e-12, 0.0, 0.0, &cfg);
        let (b, _) = contact_force(-1e-12, 0.0, 0.0, &cfg);
        assert!((a - b).abs() <= cfg.normal_stiffness_n_per_m * 2e-12);
    }

    #[test]
    fn events_on_square_pulses() {
        let mut rec = ContactRecord::default();
        let fs = 10_000.0;
        for i in 0..10_000 {
            let t = i as f64 / fs;
            let phase = (t * 10.0).fract();
            let f = if phase < 0.3 { 1.0 } else { 0.0 };
            rec.push(t, 0.0, f, 0.0);
        }
        let ev = detect_contact_events(&rec, 0.01).unwrap();
        assert_eq!(ev.len(), 10);
        assert!(ev.iter().all(|e| e.liftoff > e.touchdown));
    }

    #[test]
    fn hysteresis_suppresses_chatter() {
        let mut rec = ContactRecord::default();
        // crosses the threshold repeatedly but never falls below half of it
        let levels = [0.0, 0.02, 0.009, 0.011, 0.008, 0.02, 0.004, 0.0];
        for (i, f) in levels.iter().enumerate() {
            rec.push(i as f64, 0.0, *f, 0.0);
        }
        let ev = detect_contact_events(&rec, 0.01).unwrap();
        assert_eq!(ev, vec![ContactEvent { touchdown: 1.0, liftoff: 6.0 }]);
    }

    #[test]
    fn empty_record_is_an_error() {
        assert!(matches!(
            detect_contact_events(&ContactRecord::default(), 0.01),
            Err(Error::EmptyRecord)
        ));
    }

    #[test]
    fn zero_force_has_no_events() {
        let mut rec = ContactRecord::default();
        for i in 0..100 {
            rec.push(i as f64 * 1e-3, 1.0, 0.0, 0.0);
        }
        assert!(detect_contact_events(&rec, 0.01).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn unilateral_and_inside_friction_cone(
            gap in -5e-3f64..5e-3,
            rate in -1.0f64..1.0,
            vt in -1.0f64..1.0,
            mu in 0.0f64..2.0,
        ) {
            let cfg = cfg_with(5000.0, mu);
            let (f_n, f_t) = contact_force(gap, rate, vt, &cfg);
            prop_assert!(f_n >= 0.0);
            prop_assert_eq!(f_n * gap.max(0.0), 0.0);
            prop_assert!(f_t.abs() <= mu * f_n + 1e-12);
            let (f_n2, ft_vec) = contact_force_planar(gap, rate, Vec3::new(vt, -vt * 0.5, 3.0), &cfg);
            prop_assert_eq!(f_n, f_n2);
            prop_assert!(ft_vec.norm() <= mu * f_n + 1e-12);
            prop_assert_eq!(ft_vec.z, 0.0);
        }

        #[test]
        fn friction_is_continuous_in_slip(vt in -5e-3f64..5e-3) {
            let cfg = ContactConfig::default();
            let h = 1e-9;
            let (_, a) = contact_force(-1e-3, 0.0, vt, &cfg);
            let (_, b) = contact_force(-1e-3, 0.0, vt + h, &cfg);
            let lipschitz = cfg.friction_coefficient * 5.0 / cfg.regularization_velocity_m_per_s;
            prop_assert!((a - b).abs() <= lipschitz * h * 1.0001);
        }
    }
}
