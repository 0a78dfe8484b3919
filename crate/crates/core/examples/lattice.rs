//! Builds a breathing-Kagome flake and prints its geometry.
//!
//! `cargo run --example lattice -- 0.3 4`

use kagome_am::geometry::{build_flake, place_impurity, Anchor, LatticeSpec};

fn main() -> kagome_am::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta: f64 = args.next().map_or(0.3, |s| s.parse().expect("delta"));
    let l: usize = args.next().map_or(4, |s| s.parse().expect("cells per side"));

    let spec = LatticeSpec::new(0.1, delta, l)?;
    let lat = build_flake(&spec)?;
    println!("d = {}  R_a = {:.4}  R_b = {:.4}  atoms = {}", spec.d, spec.r_a(), spec.r_b(), lat.len());
    println!("corner sites (A, B, C): {:?}", lat.corner_sites);
    println!("min pair distance: {:.4}", lat.min_pair_distance().unwrap_or(0.0));

    println!("{:>4} {:>3} {:>4} {:>9} {:>9}", "atom", "sub", "cell", "x", "y");
    for i in 0..lat.len() {
        let p = lat.positions[i];
        println!("{i:>4} {:>3} {:>4} {:>9.4} {:>9.4}", lat.sublattice[i], lat.cell_index[i], p[0], p[1]);
    }

    for anchor in [Anchor::CentralHexagon, Anchor::AdjacentCell, Anchor::TopCornerSite] {
        match place_impurity(&lat, anchor, 0.4 * spec.d) {
            Ok(p) => println!("{anchor:?}: ({:.4}, {:.4}, {:.4})", p.position[0], p.position[1], p.position[2]),
            Err(e) => println!("{anchor:?}: {e}"),
        }
    }
    Ok(())
}
