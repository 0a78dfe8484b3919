//! Subcommand bodies and the artifact writers they share with the recipes.
//!
//! Writers take a `stem` that prefixes every file name, so a recipe can put
//! several runs of the same kind side by side (`fig5a/`, `fig5b/`, ...).

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{PngMode, RunConfig};
use super::output::{Artifacts, Manifest, Raster, MANIFEST_SCHEMA};
use super::Model;
use crate::bloch::{
    band_structure, convergence_report, gamma_point, hessian_check, k_point, m_point, standard_path, BlochConfig,
    LatticeSum,
};
use crate::dynamics::{mirrored_sector, run_scenario, threefold_contrast, ScenarioRun};
use crate::geometry::{build_flake, place_impurity, Lattice, LatticeSpec, Point};
use crate::greens::Polarization;
use crate::hamiltonian::{assemble_array, assemble_with_impurity, BasisLabel, ImpuritySpec};
use crate::spectra::{
    analyze, degeneracy_pattern, disorder_ensemble, sweep_delta as delta_slices, sweep_theta as theta_track,
    theta_grid, CornerModeTrack, DeltaSlice, ModeClass, ModeSet, RobustnessTable,
};
use crate::tightbinding::{tb_spectrum, TBGeometry, TBModel};
use crate::{Error, Result};

/// Tolerance for grouping in-gap corner frequencies into degenerate sets.
pub const DEGENERACY_TOL: f64 = 1e-3;
/// Finite-difference step for the saddle check at M, units of `1/lambda0`.
pub const HESSIAN_STEP: f64 = 0.5;
/// Raster edge length in pixels.
pub const RASTER_SIZE: u32 = 384;

/// One CLI invocation: resolved config, artifact collector and manifest
/// sections.
pub struct Run {
    pub cfg: RunConfig,
    pub out: Artifacts,
    command: String,
    quiet: bool,
    reports: Map<String, Value>,
    seeds: Map<String, Value>,
    calibration: Map<String, Value>,
}

impl Run {
    pub fn open(cfg: RunConfig, command: String, quiet: bool) -> Result<Self> {
        let out = Artifacts::open(&cfg.run.out)?;
        let mut seeds = Map::new();
        seeds.insert("base".into(), json!(cfg.run.seed));
        Ok(Self {
            cfg,
            out,
            command,
            quiet,
            reports: Map::new(),
            seeds,
            calibration: Map::new(),
        })
    }

    pub fn progress(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    pub fn report(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.reports.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn seed(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.seeds.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Size-dependent reference value, recorded next to what was computed.
    pub fn calibration(&mut self, key: &str, target: impl Serialize, computed: impl Serialize, note: &str) -> Result<()> {
        self.calibration.insert(
            key.to_string(),
            json!({
                "target": serde_json::to_value(target)?,
                "computed": serde_json::to_value(computed)?,
                "note": note,
            }),
        );
        Ok(())
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            created_unix: 0,
            config: serde_json::to_value(&self.cfg)?,
            seeds: Value::Object(self.seeds),
            reports: Value::Object(self.reports),
            definitions: definitions(),
            calibration_targets: Value::Object(self.calibration),
            files: Vec::new(),
        };
        self.out.finish(manifest)
    }
}

/// Observable definitions echoed into every manifest.
pub fn definitions() -> Value {
    json!({
        "units": "lengths in lambda0, frequencies and rates in Gamma0; eigenvalue = omega - i*gamma with a lone atom at -i/2",
        "gamma": "-Im(eigenvalue); population decay rate is 2*gamma",
        "ipr": "sum |p_j|^4 / (sum |p_j|^2)^2",
        "in_gap": "frequency inside the bulk gap containing zero detuning, accepted if wider than min_gap_fraction of the interdecile frequency spread",
        "isolated_corner_modes": "in-gap corner modes outside the frequency span of in-gap edge modes",
        "sector": "sector s (1..6) is the 60-degree wedge about the impurity anchor centred on direction (s-1)*60 degrees; atoms on a boundary split evenly",
        "chirality": "C = (F_cw - F_ccw)/(F_cw + F_ccw); F sums positive coherent flows 2 Im(psi_i* J_ij psi_j), J the Hermitian part of the array block, by the sense of the polar-angle turn from j to i about the anchor",
        "edge_split": "array population on the left (pi/3) and right (2pi/3) edges meeting at the top corner, shared atoms excluded; dominance = larger share",
        "disorder": "each atom shifted by kappa*R_a in a uniform random in-plane direction; a realization survives with >= 3 isolated corner modes; kappa* is where survival first drops below 1/2, linearly interpolated",
        "job_seed": "per-realization seed = splitmix64 mix of (base seed, kappa index, realization index)",
    })
}

// ---------------------------------------------------------------------------
// rows

#[derive(Debug, Clone, Serialize)]
pub struct LatticeRow {
    pub atom_id: usize,
    pub sublattice: String,
    pub cell_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct BandRow {
    pub kx: f64,
    pub ky: f64,
    pub band_index: usize,
    pub re_omega_over_Gamma0: f64,
    pub gamma_over_Gamma0: f64,
    pub in_light_cone: bool,
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct SpectrumRow {
    pub job_key: String,
    pub model: &'static str,
    pub mode_index: usize,
    pub re_omega: f64,
    pub gamma: f64,
    pub ipr: f64,
    pub class: &'static str,
    pub w_A: f64,
    pub w_B: f64,
    pub w_C: f64,
    pub corner_A: f64,
    pub corner_B: f64,
    pub corner_C: f64,
    pub in_gap: bool,
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct ThetaRow {
    pub theta: f64,
    pub corner: char,
    pub frequency: f64,
    pub gamma: f64,
    pub corner_A: f64,
    pub corner_B: f64,
    pub corner_C: f64,
    pub mixing: f64,
    pub in_gap: bool,
    pub sector: String,
    pub gap_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PopulationRow {
    pub time: f64,
    pub basis_index: usize,
    pub population: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionalRow {
    pub time: f64,
    pub sector_1: f64,
    pub sector_2: f64,
    pub sector_3: f64,
    pub sector_4: f64,
    pub sector_5: f64,
    pub sector_6: f64,
    pub chirality: f64,
    pub total_norm: f64,
    pub empty: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRow {
    pub time: f64,
    pub left: f64,
    pub right: f64,
    pub dominance: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRow {
    pub kappa: f64,
    pub realization: usize,
    pub seed: u64,
    /// Empty when the realization was skipped.
    pub corner_modes: Option<usize>,
    pub survived: Option<bool>,
}

const CORNERS: [char; 3] = ['A', 'B', 'C'];

// ---------------------------------------------------------------------------
// writers

pub fn write_lattice(out: &mut Artifacts, name: &str, lat: &Lattice) -> Result<()> {
    let rows = (0..lat.len()).map(|i| LatticeRow {
        atom_id: i,
        sublattice: lat.sublattice[i].to_string(),
        cell_index: lat.cell_index[i],
        x: lat.positions[i][0],
        y: lat.positions[i][1],
        z: lat.positions[i][2],
    });
    out.write_csv(name, rows)
}

pub fn lattice_report(spec: &LatticeSpec, lat: &Lattice) -> Value {
    json!({
        "spec": spec,
        "r_a": spec.r_a(),
        "r_b": spec.r_b(),
        "atoms": lat.len(),
        "corner_sites": lat.corner_sites,
        "centroid": lat.centroid,
        "min_pair_distance": lat.min_pair_distance(),
    })
}

pub fn spectrum_rows(job_key: &str, model: &'static str, set: &ModeSet) -> Vec<SpectrumRow> {
    set.modes
        .iter()
        .enumerate()
        .map(|(i, m)| SpectrumRow {
            job_key: job_key.to_string(),
            model,
            mode_index: i,
            re_omega: m.frequency(),
            gamma: m.gamma(),
            ipr: m.ipr,
            class: m.class.as_str(),
            w_A: m.sublattice_weight[0],
            w_B: m.sublattice_weight[1],
            w_C: m.sublattice_weight[2],
            corner_A: m.corner_weight[0],
            corner_B: m.corner_weight[1],
            corner_C: m.corner_weight[2],
            in_gap: m.in_gap,
        })
        .collect()
}

pub fn spectrum_summary(set: &ModeSet) -> Value {
    let corner = set.in_gap_corner_modes();
    let isolated = set.isolated_corner_modes();
    let values: Vec<_> = isolated.iter().map(|m| m.eigenvalue).collect();
    json!({
        "modes": set.len(),
        "gap": set.gap,
        "counts": {
            "corner": set.count_class(ModeClass::Corner),
            "edge": set.count_class(ModeClass::Edge),
            "bulk": set.count_class(ModeClass::Bulk),
            "impurity": set.count_class(ModeClass::ImpurityDominated),
        },
        "in_gap_corner_modes": corner.len(),
        "isolated_corner_modes": isolated.len(),
        "isolated_corner_frequencies": isolated.iter().map(|m| m.frequency()).collect::<Vec<_>>(),
        "degeneracy_pattern": degeneracy_pattern(&values, DEGENERACY_TOL),
        "degeneracy_tolerance": DEGENERACY_TOL,
    })
}

pub fn write_spectrum(out: &mut Artifacts, name: &str, job_key: &str, model: &'static str, set: &ModeSet) -> Result<()> {
    out.write_csv(name, spectrum_rows(job_key, model, set))
}

/// Band structure along Gamma-K-M-Gamma; returns the report.
pub fn write_bands(
    out: &mut Artifacts,
    name: &str,
    spec: &LatticeSpec,
    pol: &Polarization,
    bloch: BlochConfig,
    per_segment: usize,
    check: bool,
) -> Result<Value> {
    if per_segment == 0 {
        return Err(Error::Config("bloch.points_per_segment must be at least 1".into()));
    }
    let sum = LatticeSum::new(spec, pol, bloch)?;
    let path = standard_path(spec, per_segment);
    let bands = band_structure(&sum, &path)?;
    let rows = bands.iter().flat_map(|b| {
        (0..3).map(move |i| BandRow {
            kx: b.k[0],
            ky: b.k[1],
            band_index: i,
            re_omega_over_Gamma0: b.omega[i],
            gamma_over_Gamma0: b.gamma[i],
            in_light_cone: b.in_light_cone,
        })
    });
    out.write_csv(name, rows)?;
    let m = m_point(spec);
    let saddles = (0..3)
        .map(|band| hessian_check(&sum, band, m, HESSIAN_STEP))
        .collect::<Result<Vec<_>>>()?;
    let gamma_pt = sum.matrix(gamma_point()).eigenvalues()?;
    let convergence = if check {
        Some(convergence_report(spec, pol, bloch, &path)?)
    } else {
        None
    };
    let k0 = spec.k0();
    let max_gamma_outside = bands
        .iter()
        .filter(|b| b.k[0].hypot(b.k[1]) > 1.2 * k0)
        .flat_map(|b| b.gamma)
        .fold(0.0, f64::max);
    Ok(json!({
        "path": {
            "corners": ["Gamma", "K", "M", "Gamma"],
            "coordinates": [gamma_point(), k_point(spec), m_point(spec), gamma_point()],
            "points_per_segment": per_segment,
            "points": path.len(),
        },
        "lattice_sum": {
            "sum_radius_d": bloch.sum_radius,
            "taper_fraction": bloch.taper_fraction,
            "window": bloch.window,
            "terms": sum.term_count(),
        },
        "gamma_point": {
            "omega": gamma_pt.map(|z| z.re),
            "gamma": gamma_pt.map(|z| -z.im),
        },
        "max_gamma_beyond_1_2_k0": max_gamma_outside,
        "m_point": saddles,
        "convergence": convergence,
    }))
}

pub fn write_theta_track(out: &mut Artifacts, name: &str, track: &CornerModeTrack) -> Result<()> {
    let rows = track.points.iter().flat_map(|p| {
        p.modes.iter().enumerate().map(move |(c, m)| ThetaRow {
            theta: p.theta,
            corner: CORNERS[c],
            frequency: m.frequency,
            gamma: m.gamma,
            corner_A: m.corner_weight[0],
            corner_B: m.corner_weight[1],
            corner_C: m.corner_weight[2],
            mixing: m.mixing(),
            in_gap: m.in_gap,
            sector: p.sector.clone(),
            gap_flag: p.gap_flag,
        })
    });
    out.write_csv(name, rows)
}

fn pair_name(p: (usize, usize)) -> String {
    format!("{}{}", CORNERS[p.0], CORNERS[p.1])
}

pub fn theta_summary(track: &CornerModeTrack) -> Value {
    let boundaries: Vec<Value> = track
        .points
        .windows(2)
        .filter(|w| w[0].sector != w[1].sector)
        .map(|w| json!({ "theta": 0.5 * (w[0].theta + w[1].theta), "from": w[0].sector, "to": w[1].sector }))
        .collect();
    let angles = |v: Vec<(f64, (usize, usize))>| -> Vec<Value> {
        v.into_iter()
            .map(|(t, p)| json!({ "theta": t, "pair": pair_name(p) }))
            .collect()
    };
    json!({
        "delta": track.delta,
        "points": track.points.len(),
        "period_mismatch": track.period_mismatch(),
        "reorganization_angles": angles(track.reorganization_angles()),
        "bulk_hybridization_angles": angles(track.bulk_hybridization_angles()),
        "relative_shifts": {
            "A_to_B": track.relative_shift(0, 1),
            "B_to_C": track.relative_shift(1, 2),
            "C_to_A": track.relative_shift(2, 0),
        },
        "gap_flagged_points": track.points.iter().filter(|p| p.gap_flag).count(),
        "sector_boundaries": boundaries,
    })
}

pub fn write_delta_sweep(out: &mut Artifacts, name: &str, slices: &[DeltaSlice]) -> Result<Value> {
    out.write_csv(name, slices.iter().flat_map(|s| s.rows()))?;
    Ok(Value::Array(
        slices
            .iter()
            .map(|s| {
                json!({
                    "delta": s.delta,
                    "gap": s.modes.gap,
                    "in_gap_corner_modes": s.modes.in_gap_corner_modes().len(),
                    "isolated_corner_modes": s.modes.isolated_corner_modes().len(),
                    "edge_modes": s.modes.count_class(ModeClass::Edge),
                    "edge_families": s.families().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    ))
}

pub fn write_disorder(out: &mut Artifacts, stem: &str, table: &RobustnessTable) -> Result<Value> {
    out.write_csv(
        &format!("{stem}disorder_outcomes.csv"),
        table.outcomes.iter().map(|o| OutcomeRow {
            kappa: o.kappa,
            realization: o.realization,
            seed: o.seed,
            corner_modes: o.corner_modes,
            survived: o.survived(),
        }),
    )?;
    out.write_csv(&format!("{stem}disorder_summary.csv"), &table.summary)?;
    Ok(json!({
        "critical_kappa": table.critical_kappa,
        "summary": table.summary,
    }))
}

fn array_positions(srun: &ScenarioRun) -> Vec<Point> {
    srun.hamiltonian
        .labels
        .iter()
        .filter_map(|l| match l {
            BasisLabel::Atom(a) => Some(srun.lattice.positions[*a]),
            _ => None,
        })
        .collect()
}

/// Largest per-sector difference between a pattern and its mirror image
/// under `x -> -x`.
pub fn self_mirror_mismatch(w: &[f64; 6]) -> f64 {
    (0..6).map(|s| (w[s] - w[mirrored_sector(s)]).abs()).fold(0.0, f64::max)
}

pub fn write_dynamics(out: &mut Artifacts, stem: &str, srun: &ScenarioRun, png: PngMode) -> Result<Value> {
    let trace = &srun.trace;
    let rows = trace.times.iter().enumerate().flat_map(|(t, &time)| {
        trace.populations[t]
            .iter()
            .enumerate()
            .map(move |(i, &p)| PopulationRow {
                time,
                basis_index: i,
                population: p,
            })
    });
    out.write_csv(&format!("{stem}populations.csv"), rows)?;
    let dir = &srun.directional;
    out.write_csv(
        &format!("{stem}directional.csv"),
        trace.times.iter().enumerate().map(|(t, &time)| {
            let w = dir.weights[t];
            DirectionalRow {
                time,
                sector_1: w[0],
                sector_2: w[1],
                sector_3: w[2],
                sector_4: w[3],
                sector_5: w[4],
                sector_6: w[5],
                chirality: dir.chirality[t],
                total_norm: trace.total_norm[t],
                empty: dir.empty[t],
            }
        }),
    )?;
    if let Some(split) = &srun.edge_split {
        out.write_csv(
            &format!("{stem}edge_split.csv"),
            trace.times.iter().zip(split).map(|(&time, e)| EdgeRow {
                time,
                left: e.left,
                right: e.right,
                dominance: e.dominance(),
                asymmetry: e.asymmetry(),
            }),
        )?;
    }
    let snapshots: Vec<usize> = match png {
        PngMode::None => vec![],
        PngMode::Last => vec![trace.last()],
        PngMode::All => (0..trace.times.len()).collect(),
    };
    if !snapshots.is_empty() {
        let positions = array_positions(srun);
        for t in snapshots {
            let raster = Raster::populations(&positions, &trace.array_populations(t), RASTER_SIZE);
            out.write_png(&format!("{stem}snapshot_{t:03}.png"), &raster)?;
        }
    }
    let last = trace.last();
    let w = srun.snapshot_weights();
    Ok(json!({
        "scenario": srun.scenario.map(|s| s.name()),
        "params": srun.params,
        "dimension": srun.hamiltonian.dim(),
        "initial_state": srun.initial.label,
        "method": trace.method,
        "eigenvector_condition": trace.condition,
        "t_end": trace.times[last],
        "final_norm": trace.total_norm[last],
        "final_sector_weights": w,
        "final_chirality": srun.snapshot_chirality(),
        "threefold_contrast": threefold_contrast(&w),
        "self_mirror_mismatch": self_mirror_mismatch(&w),
        "final_edge_split": srun.edge_split.as_ref().map(|s| {
            let e = s[last];
            json!({ "left": e.left, "right": e.right, "dominance": e.dominance(), "asymmetry": e.asymmetry() })
        }),
    }))
}

// ---------------------------------------------------------------------------
// subcommands

pub fn lattice(run: &mut Run) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let lat = build_flake(&spec)?;
    write_lattice(&mut run.out, "lattice.csv", &lat)?;
    let mut report = lattice_report(&spec, &lat);
    if let Some(imp) = &run.cfg.impurity {
        let p = place_impurity(&lat, imp.anchor, imp.height_d * spec.d)?;
        report["impurity"] = serde_json::to_value(p)?;
    }
    run.report("lattice", report)
}

pub fn bands(run: &mut Run) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let pol = run.cfg.array.polarization.polarization();
    run.progress("computing lattice sums");
    let report = write_bands(
        &mut run.out,
        "bands.csv",
        &spec,
        &pol,
        run.cfg.bloch(),
        run.cfg.bloch.points_per_segment,
        run.cfg.bloch.convergence_check,
    )?;
    run.report("bands", report)
}

pub fn spectrum(run: &mut Run, model: Model) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let pol_spec = run.cfg.array.polarization;
    let pol = pol_spec.polarization();
    let cfg = run.cfg.classify()?;
    let lat = build_flake(&spec)?;
    let job_key = format!("L={};delta={};pol={}", spec.cells_per_side, spec.delta, pol_spec.tag());
    match model {
        Model::Full => {
            let h = match &run.cfg.impurity {
                Some(imp) => {
                    let placement = place_impurity(&lat, imp.anchor, imp.height_d * spec.d)?;
                    let is = ImpuritySpec {
                        detuning: imp.detuning_gamma0,
                        linewidth: imp.linewidth_gamma0,
                        levels: imp.levels(),
                        placement,
                    };
                    assemble_with_impurity(&lat, &pol, &is)?
                }
                None => assemble_array(&lat, &pol)?,
            };
            let set = analyze(&h, &lat, &cfg)?;
            write_spectrum(&mut run.out, "spectrum.csv", &job_key, "full", &set)?;
            let mut report = spectrum_summary(&set);
            report["hermitian_asymmetry"] = json!(h.asymmetry());
            report["warnings"] = json!(h.warnings);
            run.report("spectrum", report)
        }
        Model::Tb => {
            if run.cfg.impurity.is_some() {
                return Err(Error::Config("the tight-binding model has no impurity; drop [impurity]".into()));
            }
            let tb = TBModel::fitted(&spec, &pol, TBGeometry::Flake)?;
            let set = tb_spectrum(&tb, &lat, &cfg)?;
            write_spectrum(&mut run.out, "spectrum.csv", &job_key, "tb", &set)?;
            let mut report = spectrum_summary(&set);
            report["tb_model"] = serde_json::to_value(tb)?;
            run.report("spectrum", report)
        }
    }
}

pub fn sweep_theta(run: &mut Run) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let n = run.cfg.theta_sweep.points;
    if n < 2 {
        return Err(Error::Config("theta_sweep.points must be at least 2".into()));
    }
    let lat = build_flake(&spec)?;
    run.progress(&format!("tracking corner modes over {n} angles"));
    let track = theta_track(&lat, &theta_grid(n), &run.cfg.classify()?)?;
    write_theta_track(&mut run.out, "theta_track.csv", &track)?;
    let summary = theta_summary(&track);
    run.out.write_json("theta_summary.json", &summary)?;
    run.report("sweep_theta", summary)
}

pub fn sweep_delta(run: &mut Run) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let deltas = run.cfg.deltas()?;
    let pol = run.cfg.array.polarization.polarization();
    run.progress(&format!("diagonalizing {} spacing imbalances", deltas.len()));
    let slices = delta_slices(&spec, &deltas, &pol, &run.cfg.classify()?)?;
    let summary = write_delta_sweep(&mut run.out, "delta_sweep.csv", &slices)?;
    run.out.write_json("delta_summary.json", &summary)?;
    run.report("sweep_delta", summary)
}

pub fn disorder(run: &mut Run) -> Result<()> {
    let spec = run.cfg.lattice_spec()?;
    let d = &run.cfg.disorder;
    if d.realizations == 0 {
        return Err(Error::Constraint("disorder.realizations must be at least 1".into()));
    }
    if d.kappas.is_empty() {
        return Err(Error::Constraint("disorder.kappas is empty".into()));
    }
    let pol = run.cfg.array.polarization.polarization();
    run.progress(&format!(
        "{} strengths x {} realizations",
        d.kappas.len(),
        d.realizations
    ));
    let table = disorder_ensemble(&spec, &pol, &d.kappas, d.realizations, run.cfg.run.seed, &run.cfg.classify()?)?;
    let report = write_disorder(&mut run.out, "", &table)?;
    run.seed("disorder", json!({ "base": run.cfg.run.seed, "derivation": "job_seed" }))?;
    run.report("disorder", report)
}

pub fn dynamics(run: &mut Run) -> Result<()> {
    let (scenario, params) = run.cfg.emission()?;
    run.progress("propagating");
    let srun = run_scenario(scenario, params)?;
    let report = write_dynamics(&mut run.out, "", &srun, run.cfg.dynamics.png)?;
    run.report("dynamics", report)
}
