//! Orbit descriptors on hand-made curves: ellipse fit, crossings, orientation.

use std::f64::consts::TAU;
use twistbeam::analysis::{count_polyline_self_intersections, fit_ellipse, summarize_orbit, Orbit};

fn curve(n: usize, f: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
    (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect()
}

fn main() -> twistbeam::Result<()> {
    let shapes = [
        ("tilted ellipse", curve(200, |t| {
            let (a, b, r) = (2e-3, 0.5e-3, 0.4_f64);
            [a * t.cos() * r.cos() - b * t.sin() * r.sin(), a * t.cos() * r.sin() + b * t.sin() * r.cos()]
        })),
        ("thin loop", curve(200, |t| [1e-3 * t.cos(), 0.3e-3 * t.cos() + 1e-6 * t.sin()])),
        ("figure-8", curve(200, |t| [1e-3 * t.sin(), 0.5e-3 * (2.0 * t).sin()])),
        ("three-lobe", curve(300, |t| [1e-3 * t.cos(), 1e-3 * (3.0 * t).sin()])),
    ];
    for (name, pts) in shapes {
        let orbit = Orbit::new(pts.clone(), 0.1, 10.0)?;
        let s = summarize_orbit(&orbit)?;
        let e = fit_ellipse(&pts)?;
        let x = count_polyline_self_intersections(&pts);
        println!(
            "{name:<15} major {:.3} mm  minor {:.3} mm  tilt {:.3} rad  crossings {}  -> {}",
            e.major * 1e3,
            e.minor * 1e3,
            e.tilt,
            x.count,
            s.classification
        );
    }
    Ok(())
}
