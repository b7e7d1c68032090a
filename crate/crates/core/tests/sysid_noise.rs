//! Drop-test fits against noisy and bound-limited references.

use twistbeam::experiments::{run_fit, ExperimentConfig, ExperimentKind};

fn within(fitted: f64, truth: f64, tol: f64) -> bool {
    ((fitted - truth) / truth).abs() <= tol
}

/// 0.5 mm marker noise over five seeds: the residual sits at the noise floor
/// and every parameter lands within 10%.
#[test]
fn noisy_references_fit_to_the_noise_floor() {
    let mut misses = Vec::new();
    for seed in 1..=5 {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Fit);
        cfg.fit.noise_rms_mm = 0.5;
        cfg.seed = seed;
        let truth = cfg.fit.synthetic;
        let (report, _) = run_fit(&cfg).unwrap();
        let p = report.parameters;
        println!(
            "seed {seed}: objective {:.4} mm, k {:.4}, b {:.5}, l2 {:.2} mm",
            report.objective_mm, p.k_nm_per_rad, p.b_nms_per_rad, p.l2_mm
        );
        assert!(
            (0.3..=1.0).contains(&report.objective_mm),
            "seed {seed}: objective {} mm",
            report.objective_mm
        );
        for (name, fitted, expected) in [
            ("k", p.k_nm_per_rad, truth.k_nm_per_rad),
            ("b", p.b_nms_per_rad, truth.b_nms_per_rad),
            ("l2", p.l2_mm, truth.l2_mm),
        ] {
            if !within(fitted, expected, 0.10) {
                misses.push(format!("seed {seed}: {name} = {fitted} vs {expected}"));
            }
        }
    }
    assert!(misses.is_empty(), "parameters outside 10%: {misses:#?}");
}

#[test]
fn bounds_excluding_the_truth_pin_k_to_the_boundary() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fit);
    cfg.fit.bounds.k_nm_per_rad = (0.5, 1.0);
    cfg.fit.optimizer.max_generations = 40;
    let (report, _) = run_fit(&cfg).unwrap();
    let k = report.parameters.k_nm_per_rad;
    assert!((k - 0.5).abs() < 1e-3, "k = {k}");
    assert!(report.trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(report.trace.len(), report.generations + 1);
}

#[test]
fn same_seed_same_fit() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fit);
    cfg.fit.noise_rms_mm = 0.5;
    cfg.fit.optimizer.max_generations = 8;
    cfg.seed = 9;
    let (a, ra) = run_fit(&cfg).unwrap();
    cfg.jobs = 2;
    let (b, rb) = run_fit(&cfg).unwrap();
    assert_eq!(ra, rb);
    assert_eq!((a.parameters, a.trace, a.evaluations), (b.parameters, b.trace, b.evaluations));
}
