//! Infinite-lattice bands along Gamma-K-M-Gamma for out-of-plane dipoles.
//!
//! `cargo run --release --example bands`

use kagome_am::bloch::{band_structure, hessian_check, m_point, standard_path, BlochConfig, LatticeSum};
use kagome_am::geometry::LatticeSpec;
use kagome_am::greens::Polarization;

fn main() -> kagome_am::Result<()> {
    let spec = LatticeSpec::new(0.1, 0.0, 2)?;
    let sum = LatticeSum::new(&spec, &Polarization::pi(), BlochConfig::default())?;
    println!("lattice sum: {} terms", sum.term_count());

    let path = standard_path(&spec, 20);
    let bands = band_structure(&sum, &path)?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>9} {}", "s", "omega_1", "omega_2", "omega_3", "max gamma", "cone");
    for b in bands.iter().step_by(2) {
        let gmax = b.gamma.iter().copied().fold(0.0, f64::max);
        println!(
            "{:>8.2} {:>10.3} {:>10.3} {:>10.3} {:>9.4} {}",
            b.s, b.omega[0], b.omega[1], b.omega[2], gmax, if b.in_light_cone { "*" } else { "" }
        );
    }

    for band in 0..3 {
        let c = hessian_check(&sum, band, m_point(&spec), 0.5)?;
        println!(
            "band {band} at M: omega = {:.3}, Hessian eigenvalues {:.3e} {:.3e}, saddle = {}",
            c.omega, c.hessian_eigenvalues[0], c.hessian_eigenvalues[1], c.is_saddle
        );
    }
    Ok(())
}
