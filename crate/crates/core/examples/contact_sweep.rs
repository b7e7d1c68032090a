//! Beam with a foot pressed onto compliant ground, swept over drive frequency.
//!
//! Prints the contact regimes: bands where touchdowns lock to a fixed fraction
//! of the drive frequency with a consistent friction direction.

use twistbeam::experiments::{run_contact_sweep, ExperimentConfig, ExperimentKind};

fn main() -> twistbeam::Result<()> {
    let cfg = ExperimentConfig::new(ExperimentKind::ContactSweep);
    let sweep = run_contact_sweep(&cfg)?;

    for row in &sweep.table.rows {
        let c = row.contact.as_ref().expect("contact sweeps record contact");
        println!(
            "{:>4} Hz  {:<12} contact {:<10} duty {:.2}  friction sign {:+}",
            row.frequency_hz, row.summary.classification, c.ratio, c.duty, c.tangential_sign
        );
    }
    println!("\nregimes:");
    for r in &sweep.regimes {
        println!("  {:>4}-{:<4} Hz  ratio {:<10} sign {:+}", r.f_lo_hz, r.f_hi_hz, r.ratio, r.tangential_sign);
    }
    Ok(())
}
