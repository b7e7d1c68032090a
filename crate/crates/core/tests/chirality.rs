//! Orbits of opposite twists are reflections of each other.

use proptest::prelude::*;
use twistbeam::analysis::{extract_steady_orbit, summarize_orbit};
use twistbeam::{mirror_chirality, paper_fit_beam, simulate, DriveSignal, SimConfig};

fn tip_orbit_summary(phi: f64, f: f64) -> (twistbeam::analysis::OrbitSummary, Vec<[f64; 2]>) {
    let spec = paper_fit_beam(phi, None).unwrap();
    let sim = SimConfig {
        duration_s: 1.5,
        ..SimConfig::free_vibration()
    };
    let out = simulate(&spec, &DriveSignal::new(2e-3, f), None, &sim).unwrap();
    let orbit = extract_steady_orbit(&out.trajectory, "tip", f, None).unwrap();
    (summarize_orbit(&orbit).unwrap(), orbit.points)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn opposite_twists_give_mirrored_orbits(phi in 5.0f64..175.0, f in 5.0f64..40.0) {
        let (a, pa) = tip_orbit_summary(phi, f);
        let (b, pb) = tip_orbit_summary(-phi, f);
        prop_assert_eq!(pa.len(), pb.len());
        for (p, q) in pa.iter().zip(&pb) {
            prop_assert!((p[0] + q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12);
        }
        prop_assert_eq!(a.major_m, b.major_m);
        prop_assert_eq!(a.minor_m, b.minor_m);
        prop_assert_eq!(a.self_intersections, b.self_intersections);
        prop_assert_eq!(a.orientation, -b.orientation);
    }
}

#[test]
fn mirrored_spec_equals_negated_twist() {
    for phi in [15.0, 90.0, 180.0] {
        assert_eq!(mirror_chirality(&paper_fit_beam(phi, None).unwrap()), paper_fit_beam(-phi, None).unwrap());
    }
}
