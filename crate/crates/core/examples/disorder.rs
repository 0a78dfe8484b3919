//! Corner-mode survival under random displacements for three dipole
//! orientations.
//!
//! `cargo run --release --example disorder -- 10`

use std::f64::consts::PI;

use kagome_am::geometry::LatticeSpec;
use kagome_am::greens::Polarization;
use kagome_am::spectra::{disorder_ensemble, ClassifyConfig};

fn main() -> kagome_am::Result<()> {
    let realizations: usize = std::env::args().nth(1).map_or(10, |s| s.parse().expect("realizations"));
    let spec = LatticeSpec::new(0.1, 0.6, 10)?;
    let kappas: Vec<f64> = (0..=16).map(|i| i as f64 / 100.0).collect();
    let cfg = ClassifyConfig::default();

    for (name, pol) in [
        ("C3v (z)", Polarization::pi()),
        ("C2v (pi/6)", Polarization::in_plane(PI / 6.0)),
        ("Cs (pi/4)", Polarization::in_plane(PI / 4.0)),
    ] {
        let table = disorder_ensemble(&spec, &pol, &kappas, realizations, 7, &cfg)?;
        let fractions: Vec<String> = table
            .summary
            .iter()
            .map(|s| format!("{:.2}", s.survival_fraction))
            .collect();
        println!("{name:<11} kappa* = {:?}", table.critical_kappa.map(|k| (k * 1e3).round() / 1e3));
        println!("            {}", fractions.join(" "));
    }
    Ok(())
}
