//! Tracks the three corner modes while the in-plane dipole angle turns
//! through half a revolution.
//!
//! `cargo run --release --example chasing -- 91`

use kagome_am::geometry::{build_flake, LatticeSpec};
use kagome_am::spectra::{sweep_theta, theta_grid, ClassifyConfig};

fn main() -> kagome_am::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(91, |s| s.parse().expect("grid size"));
    let lat = build_flake(&LatticeSpec::new(0.1, 0.3, 10)?)?;
    let track = sweep_theta(&lat, &theta_grid(n), &ClassifyConfig::default())?;

    for p in track.points.iter().step_by((n / 18).max(1)) {
        let f = p.modes.map(|m| m.frequency);
        println!(
            "{:>6.1} deg  A {:>8.3}  B {:>8.3}  C {:>8.3}  {}{}",
            p.theta.to_degrees(),
            f[0],
            f[1],
            f[2],
            p.sector,
            if p.reorganized.is_empty() { "" } else { "  reorganized" }
        );
    }
    let deg = |v: Vec<(f64, (usize, usize))>| v.iter().map(|(t, _)| format!("{:.1}", t.to_degrees())).collect::<Vec<_>>();
    println!("reorganizations at {:?} deg", deg(track.reorganization_angles()));
    println!("bulk hybridizations at {:?} deg", deg(track.bulk_hybridization_angles()));
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        if let Some(s) = track.relative_shift(a, b) {
            println!("shift {a} -> {b}: {:.1} deg", s.to_degrees());
        }
    }
    if let Some(m) = track.period_mismatch() {
        println!("period mismatch: {m:.2e}");
    }
    Ok(())
}
