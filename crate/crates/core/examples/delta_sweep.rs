//! Mode census across the breathing transition.

use kagome_am::geometry::LatticeSpec;
use kagome_am::greens::Polarization;
use kagome_am::spectra::{sweep_delta, ClassifyConfig, ModeClass};

fn main() -> kagome_am::Result<()> {
    let base = LatticeSpec::new(0.1, 0.0, 10)?;
    let deltas: Vec<f64> = (-6..=6).map(|i| i as f64 / 10.0).collect();
    let slices = sweep_delta(&base, &deltas, &Polarization::pi(), &ClassifyConfig::default())?;
    println!("{:>6} {:>16} {:>7} {:>7} {:>5}  families", "delta", "gap", "corner", "isolated", "edge");
    for s in &slices {
        let gap = s.modes.gap.map_or("-".to_string(), |(a, b)| format!("{a:.1}..{b:.1}"));
        let families: Vec<String> = s.families().iter().map(|f| f.to_string()).collect();
        println!(
            "{:>6.2} {:>16} {:>7} {:>7} {:>5}  {}",
            s.delta,
            gap,
            s.modes.in_gap_corner_modes().len(),
            s.modes.isolated_corner_modes().len(),
            s.modes.count_class(ModeClass::Edge),
            families.join(" ")
        );
    }
    Ok(())
}
