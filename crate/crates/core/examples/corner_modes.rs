//! Corner modes of a finite flake in the topological (`delta > 0`) and
//! trivial (`delta < 0`) phases, for out-of-plane and in-plane dipoles.

use std::f64::consts::PI;

use kagome_am::geometry::LatticeSpec;
use kagome_am::greens::Polarization;
use kagome_am::spectra::{array_spectrum, degeneracy_pattern, ClassifyConfig, ModeClass};

fn main() -> kagome_am::Result<()> {
    let cfg = ClassifyConfig::default();
    let cases = [
        ("z, delta = 0.3", 0.3, Polarization::pi()),
        ("z, delta = -0.3", -0.3, Polarization::pi()),
        ("theta = 4pi/9, delta = 0.3", 0.3, Polarization::in_plane(4.0 * PI / 9.0)),
        ("theta = pi/2, delta = 0.3", 0.3, Polarization::in_plane(PI / 2.0)),
    ];
    for (name, delta, pol) in cases {
        let spec = LatticeSpec::new(0.1, delta, 10)?;
        let (_, set) = array_spectrum(&spec, &pol, &cfg)?;
        let corners = set.isolated_corner_modes();
        let values: Vec<_> = corners.iter().map(|m| m.eigenvalue).collect();
        println!("{name}");
        println!(
            "  gap {:?}, {} edge / {} bulk modes, {} in-gap corner candidates, degeneracy {:?}",
            set.gap.map(|(a, b)| (format!("{a:.2}"), format!("{b:.2}"))),
            set.count_class(ModeClass::Edge),
            set.count_class(ModeClass::Bulk),
            set.in_gap_corner_modes().len(),
            degeneracy_pattern(&values, 1e-3)
        );
        for m in corners {
            println!(
                "  omega {:>8.4}  gamma {:.2e}  corners A/B/C {:.2} {:.2} {:.2}",
                m.frequency(),
                m.gamma(),
                m.corner_weight[0],
                m.corner_weight[1],
                m.corner_weight[2]
            );
        }
    }
    Ok(())
}
