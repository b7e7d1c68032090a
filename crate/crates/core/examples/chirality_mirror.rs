//! A beam and its opposite-handed twin trace mirror-image orbits.

use twistbeam::analysis::{extract_steady_orbit, summarize_orbit};
use twistbeam::{mirror_chirality, paper_fit_beam, simulate, DriveSignal, SimConfig};

fn main() -> twistbeam::Result<()> {
    let right = paper_fit_beam(90.0, None)?;
    let left = mirror_chirality(&right);
    let sim = SimConfig::free_vibration();

    for f in [10.0, 15.0, 25.0, 40.0] {
        let drive = DriveSignal::new(1e-3, f);
        let a = extract_steady_orbit(&simulate(&right, &drive, None, &sim)?.trajectory, "tip", f, None)?;
        let b = extract_steady_orbit(&simulate(&left, &drive, None, &sim)?.trajectory, "tip", f, None)?;

        // reflect the left-handed orbit back through the drive plane
        let reflected = b.mirrored();
        let worst = a
            .points
            .iter()
            .zip(&reflected.points)
            .map(|(p, q)| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()))
            .fold(0.0, f64::max);
        let (sa, sb) = (summarize_orbit(&a)?, summarize_orbit(&b)?);
        println!(
            "{f:>4} Hz  max |orbit - mirror| = {worst:.2e} m  orientation {:+} vs {:+}",
            sa.orientation, sb.orientation
        );
    }
    Ok(())
}
