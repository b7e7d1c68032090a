//! Identify joint stiffness, damping and the middle link length from a drop test.
//!
//! A synthetic reference is generated from known parameters with 0.5 mm marker
//! noise, then fitted by differential evolution.

use twistbeam::experiments::{run_fit, ExperimentConfig, ExperimentKind};

fn main() -> twistbeam::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fit);
    cfg.fit.noise_rms_mm = 0.5;
    cfg.fit.optimizer.max_generations = 120;
    cfg.seed = 7;

    let truth = cfg.fit.synthetic;
    let (report, reference) = run_fit(&cfg)?;
    let p = &report.parameters;
    println!("reference: {} frames", reference.time.len());
    println!("{:<6} {:>12} {:>12}", "", "truth", "fitted");
    println!("{:<6} {:>12.5} {:>12.5}", "k", truth.k_nm_per_rad, p.k_nm_per_rad);
    println!("{:<6} {:>12.6} {:>12.6}", "b", truth.b_nms_per_rad, p.b_nms_per_rad);
    println!("{:<6} {:>12.3} {:>12.3}", "l2_mm", truth.l2_mm, p.l2_mm);
    println!(
        "objective {:.4} mm after {} generations ({} evaluations)",
        report.objective_mm, report.generations, report.evaluations
    );
    Ok(())
}
