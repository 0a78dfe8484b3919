//! Acceptance gate. Prints one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` runs everything;
//! `cargo test --release --test acceptance -- 4 8` runs a subset. The process
//! exits non-zero on a failed criterion only when
//! `KAGOME_AM_STRICT_ACCEPTANCE=1` is set.

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use kagome_am::bloch::{
    band_structure, convergence_report, gamma_point, hessian_check, m_point, standard_path, BlochConfig, LatticeSum,
};
use kagome_am::cli::init_runtime;
use kagome_am::dynamics::{emission_scenario, mirrored_sector, threefold_contrast, Scenario, ScenarioOverrides};
use kagome_am::geometry::{build_flake, LatticeSpec};
use kagome_am::greens::{coupling, green_tensor, Polarization};
use kagome_am::hamiltonian::assemble_array;
use kagome_am::linalg::hermitian_eigenvalues;
use kagome_am::spectra::{
    array_spectrum, degeneracy_pattern, disorder_ensemble, sweep_theta, theta_grid, ClassifyConfig,
};
use kagome_am::tightbinding::{polarization_distance, tb_spectrum, wilson_polarization, TBGeometry, TBModel, WilsonConfig};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> kagome_am::Result<Outcome>;

fn main() {
    init_runtime(0);
    let criteria: [(u32, &str, Duration, Check); 9] = [
        (1, "Green's-tensor identities", Duration::from_secs(1), c1_greens),
        (2, "collective-decay positivity", Duration::from_secs(30), c2_positivity),
        (3, "band-structure properties", Duration::from_secs(300), c3_bands),
        (4, "corner-state phenomenology", Duration::from_secs(600), c4_corners),
        (5, "chasing diagram", Duration::from_secs(1800), c5_chasing),
        (6, "disorder ordering", Duration::from_secs(7200), c6_disorder),
        (7, "emission scenarios", Duration::from_secs(1200), c7_emission),
        (8, "oracle equivalence", Duration::from_secs(60), c8_oracles),
        (9, "determinism", Duration::from_secs(600), c9_determinism),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, budget, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} {} {name}: {detail} [{:.1}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    let strict = std::env::var("KAGOME_AM_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}

/// Closed-form `p . G . p` for two dipoles both perpendicular to their
/// separation.
fn transverse_oracle(r: f64, k0: f64) -> c64 {
    let kr = k0 * r;
    let i = c64::new(0.0, 1.0);
    (i * kr).exp() / (4.0 * PI * r) * (1.0 + i / kr - 1.0 / (kr * kr))
}

fn c1_greens() -> kagome_am::Result<Outcome> {
    let k0 = TAU;
    let mut notes = Vec::new();
    let mut pass = true;

    // self-term limit at r = 1e-3 lambda0, along and across the separation
    let r = 1e-3;
    let g = green_tensor(&[r, 0.0, 0.0], k0)?;
    let mut worst_self = 0.0f64;
    for axis in 0..3 {
        let value = 3.0 * PI / k0 * g[axis][axis].im;
        worst_self = worst_self.max((value - 0.5).abs() / 0.5);
    }
    pass &= worst_self < 0.01;
    notes.push(format!("self-term rel err {worst_self:.1e}"));

    let mut worst_oracle = 0.0f64;
    for r in [0.01, 0.1, 0.37, 1.0, 2.5] {
        let g = green_tensor(&[r, 0.0, 0.0], k0)?;
        let o = transverse_oracle(r, k0);
        worst_oracle = worst_oracle.max((g[2][2] - o).norm() / o.norm());
        worst_oracle = worst_oracle.max((g[1][1] - o).norm() / o.norm());
    }
    pass &= worst_oracle < 1e-12;
    notes.push(format!("closed form {worst_oracle:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sym = 0.0f64;
    let mut worst_recip = 0.0f64;
    for _ in 0..200 {
        let a: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)];
        let b: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)];
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let g = green_tensor(&d, k0)?;
        let gm = green_tensor(&[-d[0], -d[1], -d[2]], k0)?;
        let scale = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| g[i][j].norm()).fold(0.0, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                worst_sym = worst_sym.max((g[i][j] - g[j][i]).norm() / scale);
                worst_sym = worst_sym.max((g[i][j] - gm[i][j]).norm() / scale);
            }
        }
        let p = Polarization::new([
            c64::new(rng.random(), rng.random()),
            c64::new(rng.random(), rng.random()),
            c64::new(rng.random(), rng.random()),
        ])?;
        let q = Polarization::in_plane(rng.random_range(0.0..PI));
        let fwd = coupling(&a, &b, &p, &q, k0)?;
        let back = coupling(&b, &a, &q.conj(), &p.conj(), k0)?;
        worst_recip = worst_recip.max((fwd - back).norm() / fwd.norm());
    }
    pass &= worst_sym < 1e-12 && worst_recip < 1e-12;
    notes.push(format!("transpose {worst_sym:.1e}, reciprocity {worst_recip:.1e}"));

    // Dicke pair at s = 1e-3: eigenvalues -i/2 +- g
    let g12 = coupling(&[0.0; 3], &[1e-3, 0.0, 0.0], &Polarization::pi(), &Polarization::pi(), k0)?;
    let rates = [1.0 - 2.0 * g12.im, 1.0 + 2.0 * g12.im];
    let (sup, sub) = (rates[0].max(rates[1]), rates[0].min(rates[1]));
    pass &= (sup - 2.0).abs() < 0.02 && sub.abs() < 0.02;
    notes.push(format!("Dicke rates {sup:.5}, {sub:.1e}"));
    Ok(outcome(pass, notes.join("; ")))
}

fn c2_positivity() -> kagome_am::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let l = rng.random_range(2..=8);
        let delta = rng.random_range(-0.6..=0.6);
        let (theta, tilt) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let pol = Polarization::from_real([tilt.sin() * theta.cos(), tilt.sin() * theta.sin(), tilt.cos()])?;
        let lat = build_flake(&LatticeSpec::new(0.1, delta, l)?)?;
        let h = assemble_array(&lat, &pol)?;
        let min = hermitian_eigenvalues(&h.decay_matrix())?.into_iter().fold(f64::INFINITY, f64::min);
        worst = worst.min(min);
    }
    Ok(outcome(worst >= -1e-8, format!("min eigenvalue over 20 lattices {worst:.3e}")))
}

fn c3_bands() -> kagome_am::Result<Outcome> {
    let spec = LatticeSpec::new(0.1, 0.0, 2)?;
    let pol = Polarization::pi();
    let cfg = BlochConfig::default();
    let sum = LatticeSum::new(&spec, &pol, cfg)?;
    let k0 = spec.k0();

    let at_gamma = sum.matrix(gamma_point()).eigenvalues()?;
    let gamma_g = at_gamma.iter().map(|z| -z.im).fold(0.0, f64::max);

    let path = standard_path(&spec, 60);
    let bands = band_structure(&sum, &path)?;
    let outside = bands
        .iter()
        .filter(|b| b.k[0].hypot(b.k[1]) > 1.2 * k0)
        .flat_map(|b| b.gamma)
        .fold(0.0, f64::max);
    let saddle = hessian_check(&sum, 2, m_point(&spec), 0.5)?;
    let conv = convergence_report(&spec, &pol, cfg, &standard_path(&spec, 20))?;

    let pass = gamma_g < 0.02 && outside < 0.05 && saddle.is_saddle && conv.passed;
    Ok(outcome(
        pass,
        format!(
            "gamma_Gamma {gamma_g:.2e}; max gamma beyond 1.2 k0 {outside:.2e}; upper band at M omega {:.2} Hessian ({:.3}, {:.3}) saddle {}; radius {} -> {} change {:.2e} outside cone",
            saddle.omega,
            saddle.hessian_eigenvalues[0],
            saddle.hessian_eigenvalues[1],
            saddle.is_saddle,
            conv.radius,
            conv.doubled_radius,
            conv.max_change_outside
        ),
    ))
}

fn c4_corners() -> kagome_am::Result<Outcome> {
    let cfg = ClassifyConfig::default();
    let spec = |delta| LatticeSpec::new(0.1, delta, 10);
    let mut notes = Vec::new();

    let (_, z) = array_spectrum(&spec(0.3)?, &Polarization::pi(), &cfg)?;
    let corners = z.isolated_corner_modes();
    let values: Vec<c64> = corners.iter().map(|m| m.eigenvalue).collect();
    let mut pattern = degeneracy_pattern(&values, 1e-3);
    pattern.sort_unstable();
    let a = corners.len() == 3 && pattern == [1, 2];
    notes.push(format!("z: {} corner modes, pattern {:?}", corners.len(), pattern));

    let (_, t) = array_spectrum(&spec(0.3)?, &Polarization::in_plane(4.0 * PI / 9.0), &cfg)?;
    let corners = t.isolated_corner_modes();
    let mut hosts: Vec<usize> = corners
        .iter()
        .filter(|m| {
            let total = m.corner_total();
            m.corner_weight.iter().any(|&w| w > 0.9 * total)
        })
        .map(|m| (0..3).max_by(|&i, &j| m.corner_weight[i].total_cmp(&m.corner_weight[j])).unwrap())
        .collect();
    hosts.sort_unstable();
    hosts.dedup();
    let values: Vec<c64> = corners.iter().map(|m| m.eigenvalue).collect();
    let b = corners.len() == 3 && hosts.len() == 3 && degeneracy_pattern(&values, 1e-3) == [1, 1, 1];
    notes.push(format!("4pi/9: {} single-corner modes on {} corners", corners.len(), hosts.len()));

    let lat = build_flake(&spec(0.3)?)?;
    let half = sweep_theta(&lat, &[PI / 2.0], &cfg)?;
    let p = &half.points[0];
    let splitting = p.reorganized.first().map(|&pair| p.pair_splitting(pair));
    let c = splitting.is_some_and(|s| (0.01..=0.1).contains(&s));
    notes.push(format!("pi/2: reorganized {:?}, splitting {:?}", p.reorganized, splitting));

    let (_, trivial) = array_spectrum(&spec(-0.3)?, &Polarization::pi(), &cfg)?;
    let n_trivial = trivial.in_gap_corner_modes().len();
    let d = n_trivial == 0;
    notes.push(format!("delta -0.3: {n_trivial} corner modes"));
    Ok(outcome(a && b && c && d, notes.join("; ")))
}

fn c5_chasing() -> kagome_am::Result<Outcome> {
    let lat = build_flake(&LatticeSpec::new(0.1, 0.3, 10)?)?;
    let track = sweep_theta(&lat, &theta_grid(181), &ClassifyConfig::default())?;
    let tol = 2f64.to_radians();

    let mismatch = track.period_mismatch().unwrap_or(f64::INFINITY);
    let shifts: Vec<f64> = [(0, 1), (1, 2), (2, 0)]
        .iter()
        .filter_map(|&(a, b)| track.relative_shift(a, b))
        .collect();
    let shifts_ok = shifts.len() == 3 && shifts.iter().all(|s| (s.abs() - FRAC_PI_3).abs() <= tol);

    let angles: Vec<f64> = track.reorganization_angles().into_iter().map(|(t, _)| t).collect();
    let targets = [PI / 6.0, PI / 2.0, 5.0 * PI / 6.0];
    let near = |a: f64, t: f64| {
        let d = (a - t).rem_euclid(PI);
        d.min(PI - d) <= tol
    };
    let angles_ok = !angles.is_empty()
        && angles.iter().all(|&a| targets.iter().any(|&t| near(a, t)))
        && targets.iter().all(|&t| angles.iter().any(|&a| near(a, t)));

    let pass = mismatch < 1e-6 && shifts_ok && angles_ok;
    Ok(outcome(
        pass,
        format!(
            "period mismatch {mismatch:.1e}; shifts {:?} deg; reorganizations at {:?} deg",
            shifts.iter().map(|s| (s.to_degrees() * 100.0).round() / 100.0).collect::<Vec<_>>(),
            angles.iter().map(|a| (a.to_degrees() * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    ))
}

fn c6_disorder() -> kagome_am::Result<Outcome> {
    let spec = LatticeSpec::new(0.1, 0.6, 10)?;
    let kappas: Vec<f64> = (0..=20).map(|i| i as f64 / 100.0).collect();
    let cfg = ClassifyConfig::default();
    let mut crit = Vec::new();
    for pol in [Polarization::pi(), Polarization::in_plane(PI / 6.0), Polarization::in_plane(PI / 4.0)] {
        let table = disorder_ensemble(&spec, &pol, &kappas, 30, 7, &cfg)?;
        crit.push(table.critical_kappa.unwrap_or(f64::INFINITY));
    }
    let pass = crit[0] > crit[1] && crit[1] > crit[2] && (0.05..=0.15).contains(&crit[0]);
    Ok(outcome(
        pass,
        format!(
            "kappa* C3v {:.3}, C2v {:.3}, Cs {:.3} (30 realizations, L=10)",
            crit[0], crit[1], crit[2]
        ),
    ))
}

fn c7_emission() -> kagome_am::Result<Outcome> {
    let none = ScenarioOverrides::default();
    let w = |s| emission_scenario(s, &none).map(|r| r.snapshot_weights());
    let mut notes = Vec::new();
    let mut all = true;
    let mut sub = |name: &str, ok: bool, text: String| {
        all &= ok;
        notes.push(format!("{name} {} ({text})", if ok { "ok" } else { "MISS" }));
    };

    let a = w(Scenario::Fig5a)?;
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    let mirror_a = (0..6).all(|s| (a[s] - a[mirrored_sector(s)]).abs() <= 0.05 * a[s]);
    let pair = mirrored_sector(order[0]) == order[1] && a[order[1]] > a[order[2]];
    sub("5a", mirror_a && pair, format!("top sectors {} and {}", order[0] + 1, order[1] + 1));

    let b = w(Scenario::Fig5b)?;
    let x_share = b[0] + b[3];
    sub("5b", x_share > 0.5, format!("+-x share {x_share:.3}"));

    let c = w(Scenario::Fig5c)?;
    let d = w(Scenario::Fig5d)?;
    let conj = (0..6).map(|s| (c[s] - d[mirrored_sector(s)]).abs() / c[s]).fold(0.0, f64::max);
    let threefold = |v: &[f64; 6]| {
        (0..6).all(|s| (v[s] - v[(s + 2) % 6]).abs() <= 0.05 * v[s]) && threefold_contrast(v).abs() > 0.05
    };
    sub(
        "5c/5d",
        conj <= 0.05 && threefold(&c) && threefold(&d),
        format!("mirror mismatch {conj:.1e}, contrast {:.3}/{:.3}", threefold_contrast(&c), threefold_contrast(&d)),
    );

    let ce = emission_scenario(Scenario::Fig5e, &none)?.snapshot_chirality();
    let cf = emission_scenario(Scenario::Fig5f, &none)?.snapshot_chirality();
    sub("5e/5f", cf.abs() >= 3.0 * ce.abs() && cf.abs() > 1e-3, format!("C {ce:.1e} vs {cf:.3}"));

    for (s, want_sym) in [(Scenario::Fig3g, true), (Scenario::Fig3h, false), (Scenario::Fig3i, false)] {
        let run = emission_scenario(s, &none)?;
        let e = run.edge_split.as_ref().map(|v| v[run.trace.last()]).expect("corner anchor");
        if want_sym {
            sub(s.name(), e.asymmetry() <= 0.05, format!("asymmetry {:.1e}", e.asymmetry()));
        } else {
            sub(s.name(), e.dominance() > 0.7, format!("dominance {:.3}", e.dominance()));
        }
    }
    Ok(outcome(all, notes.join("; ")))
}

fn c8_oracles() -> kagome_am::Result<Outcome> {
    let spec = LatticeSpec::new(0.1, 0.6, 6)?;
    let pol = Polarization::pi();
    let cfg = ClassifyConfig::default();
    let (lat, full) = array_spectrum(&spec, &pol, &cfg)?;
    let tb = tb_spectrum(&TBModel::fitted(&spec, &pol, TBGeometry::Flake)?, &lat, &cfg)?;
    let (nf, nt) = (full.isolated_corner_modes().len(), tb.isolated_corner_modes().len());
    let counts = nf == 3 && nt == 3;

    let mut worst = 0.0f64;
    let mut wilson = Vec::new();
    for delta in [0.6, 0.3, -0.3, -0.6] {
        let model = TBModel::fitted(&LatticeSpec::new(0.1, delta, 2)?, &pol, TBGeometry::Periodic)?;
        let p = wilson_polarization(
            &model,
            &WilsonConfig {
                band: model.isolated_band(),
                ..WilsonConfig::default()
            },
        )?;
        let target = if delta > 0.0 { [1.0 / 3.0, 1.0 / 3.0] } else { [0.0, 0.0] };
        let dist = polarization_distance(p, target);
        worst = worst.max(dist);
        wilson.push(format!("{delta}: ({:.4}, {:.4})", p[0].rem_euclid(1.0) % 1.0, p[1].rem_euclid(1.0) % 1.0));
    }
    let pass = counts && worst < 1e-3;
    Ok(outcome(
        pass,
        format!(
            "corner modes full {nf} / tb {nt}; Wilson {} (max distance {worst:.1e})",
            wilson.join(", ")
        ),
    ))
}

fn csv_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).expect("read artifact dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&p).expect("read csv")));
            }
        }
    }
    out.sort();
    out
}

fn c9_determinism() -> kagome_am::Result<Outcome> {
    let tmp = std::env::temp_dir().join(format!("kagome-am-acceptance-{}", std::process::id()));
    let mut runs = Vec::new();
    for tag in ["first", "second"] {
        let dir = tmp.join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_kagome-am"))
            .args(["reproduce", "fig2", "--seed", "42", "--quiet", "--out"])
            .arg(&dir)
            .status()?;
        if !status.success() {
            return Ok(outcome(false, format!("reproduce fig2 exited with {status}")));
        }
        runs.push(csv_files(&dir));
    }
    let _ = fs::remove_dir_all(&tmp);
    let (a, b) = (&runs[0], &runs[1]);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    let same = a == b && a.len() >= 4;
    Ok(outcome(same, format!("{} CSVs compared: {}", a.len(), names.join(", "))))
}
