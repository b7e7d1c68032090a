//! Free-vibration sweep of the fitted 90° beam: tip orbit shape versus drive frequency.
//!
//! ```text
//! cargo run -p twistbeam --example free_sweep
//! ```

use twistbeam::experiments::{run_free_sweep, DriveRange, ExperimentConfig, ExperimentKind};

fn main() -> twistbeam::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::FreeSweep);
    cfg.drive = Some(DriveRange::span(1.0, 45.0, 4.0));

    let table = run_free_sweep(&cfg)?;
    println!("{:>6} {:>12} {:>12} {:>12}  class", "f_hz", "major_mm", "minor_mm", "area_mm2");
    for row in &table.rows {
        let s = &row.summary;
        println!(
            "{:>6} {:>12.5} {:>12.5} {:>12.3e}  {}",
            row.frequency_hz,
            s.major_m * 1e3,
            s.minor_m * 1e3,
            s.signed_area_m2.abs() * 1e6,
            s.classification
        );
    }
    let first = table.rows.first().unwrap().summary.signed_area_m2.abs();
    let last = table.rows.last().unwrap().summary.signed_area_m2.abs();
    println!("area grows {:.0}x from the lowest to the highest frequency", last / first);
    Ok(())
}
