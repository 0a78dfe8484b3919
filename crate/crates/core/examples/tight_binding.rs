//! Nearest-neighbour model fitted to the dipole couplings: corner modes of a
//! flake and the Wilson-loop polarization on both sides of the transition.

use kagome_am::geometry::{build_flake, LatticeSpec};
use kagome_am::greens::Polarization;
use kagome_am::spectra::ClassifyConfig;
use kagome_am::tightbinding::{polarization_distance, tb_spectrum, wilson_polarization, TBGeometry, TBModel, WilsonConfig};

fn main() -> kagome_am::Result<()> {
    let pol = Polarization::pi();
    for delta in [0.6, 0.3, -0.3, -0.6] {
        let spec = LatticeSpec::new(0.1, delta, 6)?;
        let flake = TBModel::fitted(&spec, &pol, TBGeometry::Flake)?;
        let set = tb_spectrum(&flake, &build_flake(&spec)?, &ClassifyConfig::default())?;

        let bulk = TBModel::fitted(&spec, &pol, TBGeometry::Periodic)?;
        let cfg = WilsonConfig {
            band: bulk.isolated_band(),
            ..WilsonConfig::default()
        };
        let p = wilson_polarization(&bulk, &cfg)?;
        println!(
            "delta {delta:>5.2}: t_intra {:>8.3} t_inter {:>8.3}  corner modes {}  polarization ({:.4}, {:.4}), distance to (1/3, 1/3) {:.1e}, to (0, 0) {:.1e}",
            flake.t_intra,
            flake.t_inter,
            set.isolated_corner_modes().len(),
            p[0],
            p[1],
            polarization_distance(p, [1.0 / 3.0, 1.0 / 3.0]),
            polarization_distance(p, [0.0, 0.0])
        );
    }
    Ok(())
}
