//! Emission of an impurity atom above the array: sector patterns and the
//! chirality proxy for every preset.

use kagome_am::dynamics::{emission_scenario, Scenario, ScenarioOverrides};

fn main() -> kagome_am::Result<()> {
    println!("{:<6} {:>40} {:>8} {:>8}", "preset", "sector weights 1..6", "C", "norm");
    for s in Scenario::ALL {
        let run = emission_scenario(s, &ScenarioOverrides::default())?;
        let w = run.snapshot_weights();
        let last = run.trace.last();
        println!(
            "{:<6} {:>40} {:>8.4} {:>8.4}",
            s.name(),
            w.map(|x| format!("{x:.3}")).join(" "),
            run.snapshot_chirality(),
            run.trace.total_norm[last]
        );
        if let Some(split) = &run.edge_split {
            let e = split[last];
            println!("       edges left {:.3e} right {:.3e} dominance {:.3}", e.left, e.right, e.dominance());
        }
    }
    Ok(())
}
