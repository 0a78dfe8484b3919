//! Two dipoles a short distance apart: the collective rates approach the
//! superradiant `2 Gamma0` and subradiant `0` limits.

use kagome_am::greens::{coupling, green_tensor, Polarization};
use num_complex::Complex64 as c64;
use std::f64::consts::TAU;

fn main() -> kagome_am::Result<()> {
    let k0 = TAU;
    let pol = Polarization::pi();

    let g = green_tensor(&[0.0, 0.0, 1e-3], k0)?;
    println!("Im G_zz at r = 1e-3: {:.6}  (k0 / 6 pi = {:.6})", g[2][2].im, k0 / (6.0 * std::f64::consts::PI));

    println!("{:>8} {:>12} {:>12} {:>10} {:>10}", "r", "Re g", "Im g", "rate(+)", "rate(-)");
    for r in [0.01, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let gij = coupling(&[0.0; 3], &[r, 0.0, 0.0], &pol, &pol, k0)?;
        // eigenvalues of [[-i/2, g], [g, -i/2]] are -i/2 +- g
        let plus = c64::new(0.0, -0.5) + gij;
        let minus = c64::new(0.0, -0.5) - gij;
        println!(
            "{r:>8.3} {:>12.4} {:>12.5} {:>10.5} {:>10.5}",
            gij.re,
            gij.im,
            -2.0 * plus.im,
            -2.0 * minus.im
        );
    }
    Ok(())
}
