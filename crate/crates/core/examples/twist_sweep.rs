//! How built-in twist opens a planar bending motion into a loop.
//!
//! At 0° the beam bends in the drive plane only, so the tip traces a line;
//! twisted beams couple the two bending directions.

use twistbeam::experiments::{run_twist_sweep, ExperimentConfig, ExperimentKind, TwistRange};

fn main() -> twistbeam::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::TwistSweep);
    cfg.twist_sweep = TwistRange {
        phi_lo_deg: 0.0,
        phi_hi_deg: 180.0,
        phi_step_deg: 15.0,
        frequency_hz: 15.0,
    };
    let table = run_twist_sweep(&cfg)?;
    println!("twist_deg  major_mm   minor_mm  orientation");
    for row in &table.rows {
        println!(
            "{:>9} {:>9.4} {:>10.5} {:>12}",
            row.key,
            row.summary.major_m * 1e3,
            row.summary.minor_m * 1e3,
            row.summary.orientation
        );
    }
    Ok(())
}
