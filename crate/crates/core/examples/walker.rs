//! Two mirrored beams under a plate with an eccentric motor: net travel per drive frequency.

use twistbeam::experiments::{run_walker, DriveRange, ExperimentConfig, ExperimentKind};

fn main() -> twistbeam::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Walker);
    cfg.drive = Some(DriveRange {
        frequencies_hz: Some(vec![5.0, 9.0, 14.0, 19.0, 30.0, 60.0, 80.0]),
        ..DriveRange::span(1.0, 80.0, 1.0)
    });

    let report = run_walker(&cfg)?;
    for row in &report.rows {
        println!(
            "{:>4} Hz  dx {:>+10.3e} m  v {:>+10.3e} m/s{}",
            row.frequency_hz,
            row.net_displacement_m,
            row.mean_speed_m_per_s,
            row.flag.as_deref().map(|f| format!("  [{f}]")).unwrap_or_default()
        );
    }
    println!("direction reverses near {:?} Hz", report.sign_changes_hz);
    Ok(())
}
