use std::f64::consts::{PI, TAU};

use kagome_am::bloch::{BlochConfig, LatticeSum};
use kagome_am::dynamics::{evolve, time_grid, InitialState};
use kagome_am::geometry::{build_flake, place_impurity, Anchor, Lattice, LatticeSpec, Sublattice};
use kagome_am::greens::{coupling, Polarization};
use kagome_am::hamiltonian::{assemble_array, assemble_with_impurity, assemble_with_levels, ImpurityLevels, ImpuritySpec};
use kagome_am::linalg::{eig, hermitian_eigenvalues};
use kagome_am::spectra::{analyze, ClassifyConfig};
use num_complex::Complex64 as c64;
use proptest::prelude::*;

fn flake(delta: f64, l: usize) -> Lattice {
    build_flake(&LatticeSpec::new(0.1, delta, l).unwrap()).unwrap()
}

/// Greedy matching of two eigenvalue lists; largest distance of a pair.
fn spectral_distance(a: &[c64], b: &[c64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn pol_strategy() -> impl Strategy<Value = Polarization> {
    (0.0..PI, 0.0..PI, 0.0..TAU).prop_map(|(a, b, phase)| {
        let v = [
            c64::new(a.sin() * b.cos(), 0.0),
            c64::from_polar(a.sin() * b.sin(), phase),
            c64::new(a.cos(), 0.0),
        ];
        Polarization::new(v).unwrap()
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -0.3..0.3f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sublattices_are_balanced(l in 2usize..14, delta in -0.9..0.9f64) {
        let lat = flake(delta, l);
        let per = l * (l + 1) / 2;
        prop_assert_eq!(lat.len(), 3 * per);
        for s in [Sublattice::A, Sublattice::B, Sublattice::C] {
            prop_assert_eq!(lat.sublattice.iter().filter(|&&x| x == s).count(), per);
        }
    }

    #[test]
    fn clean_flake_is_threefold_symmetric(l in 2usize..10, delta in -0.8..0.8f64) {
        let lat = flake(delta, l);
        let tol = 1e-9 * lat.spec.d;
        for turn in [TAU / 3.0, 2.0 * TAU / 3.0] {
            for p in lat.rotated_positions(turn) {
                let hit = lat.positions.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) < tol);
                prop_assert!(hit, "rotated atom {:?} has no image", p);
            }
        }
    }

    #[test]
    fn disorder_is_seeded_and_keeps_atoms(seed in any::<u64>(), kappa in 0.0..0.2f64) {
        let lat = flake(0.3, 4);
        let a = lat.apply_disorder(kappa, seed).unwrap();
        let b = lat.apply_disorder(kappa, seed).unwrap();
        prop_assert_eq!(a.len(), lat.len());
        for (p, q) in a.positions.iter().zip(&b.positions) {
            prop_assert_eq!(p.map(f64::to_bits), q.map(f64::to_bits));
        }
        let shift = kappa * lat.spec.r_a();
        for (p, q) in a.positions.iter().zip(&lat.positions) {
            prop_assert!(((p[0] - q[0]).hypot(p[1] - q[1]) - shift).abs() < 1e-12);
            prop_assert_eq!(p[2], q[2]);
        }
    }

    #[test]
    fn coupling_is_reciprocal(ri in point(), rj in point(), p in pol_strategy(), q in pol_strategy()) {
        prop_assume!((0..3).map(|k| (ri[k] - rj[k]).powi(2)).sum::<f64>().sqrt() > 1e-3);
        let k0 = TAU;
        let forward = coupling(&ri, &rj, &p, &q, k0).unwrap();
        let back = coupling(&rj, &ri, &q.conj(), &p.conj(), k0).unwrap();
        prop_assert!((forward - back).norm() <= 1e-12 * forward.norm().max(1.0));
    }

    #[test]
    fn collective_decay_is_psd_and_split_is_symmetric(
        l in 2usize..7,
        delta in -0.6..0.6f64,
        theta in 0.0..PI,
        tilt in 0.0..PI,
    ) {
        let lat = flake(delta, l);
        let pol = Polarization::from_real([tilt.sin() * theta.cos(), tilt.sin() * theta.sin(), tilt.cos()]).unwrap();
        let h = assemble_array(&lat, &pol).unwrap();
        let n = h.dim();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((h.matrix[(i, j)] - h.matrix[(j, i)]).norm() < 1e-9 * h.matrix[(i, j)].norm().max(1.0));
            }
        }
        let gamma = h.decay_matrix();
        for i in 0..n {
            prop_assert!((gamma[(i, i)].re - 1.0).abs() < 1e-12);
        }
        let min = hermitian_eigenvalues(&gamma).unwrap().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-8, "min eigenvalue {}", min);
    }

    #[test]
    fn matrix_depends_only_on_lengths_over_lambda0(delta in -0.6..0.6f64, theta in 0.0..PI) {
        let pol = Polarization::in_plane(theta);
        let base = build_flake(&LatticeSpec::new(0.1, delta, 3).unwrap()).unwrap();
        let scaled = build_flake(&LatticeSpec::new(0.2, delta, 3).unwrap().with_lambda0(2.0)).unwrap();
        let a = assemble_array(&base, &pol).unwrap();
        let b = assemble_array(&scaled, &pol).unwrap();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let (x, y) = (a.matrix[(i, j)], b.matrix[(i, j)]);
                prop_assert!((x - y).norm() <= 1e-10 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn ipr_is_bounded(l in 2usize..7, delta in -0.6..0.6f64, theta in 0.0..PI) {
        let lat = flake(delta, l);
        let h = assemble_array(&lat, &Polarization::in_plane(theta)).unwrap();
        let set = analyze(&h, &lat, &ClassifyConfig::default()).unwrap();
        let m = lat.len() as f64;
        for mode in &set.modes {
            prop_assert!(mode.ipr >= 1.0 / m - 1e-12 && mode.ipr <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bands_are_threefold_symmetric(kx in -60.0..60.0f64, ky in -60.0..60.0f64, delta in -0.5..0.5f64) {
        let spec = LatticeSpec::new(0.1, delta, 2).unwrap();
        let sum = LatticeSum::new(&spec, &Polarization::pi(), BlochConfig { sum_radius: 60.0, ..BlochConfig::default() }).unwrap();
        let (s, c) = (TAU / 3.0).sin_cos();
        let a = sum.matrix([kx, ky]).eigenvalues().unwrap();
        let b = sum.matrix([c * kx - s * ky, s * kx + c * ky]).eigenvalues().unwrap();
        prop_assert!(spectral_distance(&a, &b) < 1e-6, "{:?} vs {:?}", a, b);
    }
}

fn impurity_hamiltonian(levels: ImpurityLevels, l: usize) -> kagome_am::hamiltonian::EffectiveHamiltonian {
    let lat = flake(0.0, l);
    let placement = place_impurity(&lat, Anchor::CentralHexagon, 0.04).unwrap();
    let imp = ImpuritySpec {
        detuning: -3.06,
        linewidth: 0.002,
        levels,
        placement,
    };
    assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norm_never_increases(l in 3usize..6, seed in 0usize..1000, phase in 0.0..TAU) {
        let h = impurity_hamiltonian(ImpurityLevels::TwoLevel { polarization: Polarization::x() }, l);
        let n = h.dim();
        let amps: Vec<c64> = (0..n)
            .map(|i| c64::from_polar(1.0 + ((i * 7 + seed) % 5) as f64, phase * i as f64))
            .collect();
        let psi = InitialState::new(amps, "mixed").unwrap();
        let trace = evolve(&h, &psi, &time_grid(2.0, 40)).unwrap();
        prop_assert!((trace.total_norm[0] - 1.0).abs() < 1e-12);
        for w in trace.total_norm.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-8, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn evolution_is_linear(a_re in -1.0..1.0f64, a_im in -1.0..1.0f64, b_re in -1.0..1.0f64, b_im in -1.0..1.0f64) {
        let h = impurity_hamiltonian(ImpurityLevels::VType { zeeman: 5.0 }, 3);
        let n = h.dim();
        let (a, b) = (c64::new(a_re, a_im), c64::new(b_re, b_im));
        prop_assume!(a.norm() > 0.05 && b.norm() > 0.05);
        let e = |k: usize| (0..n).map(|i| if i == k { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }).collect::<Vec<_>>();
        let times = time_grid(1.0, 5);
        let t1 = evolve(&h, &InitialState::new(e(n - 1), "s+").unwrap(), &times).unwrap();
        let t2 = evolve(&h, &InitialState::new(e(0), "atom").unwrap(), &times).unwrap();
        let combo: Vec<c64> = (0..n).map(|i| a * e(n - 1)[i] + b * e(0)[i]).collect();
        // InitialState normalizes, so compare against the normalized superposition
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let t12 = evolve(&h, &InitialState::new(combo, "combo").unwrap(), &times).unwrap();
        for t in 0..times.len() {
            for i in 0..n {
                let expect = (a * t1.amplitudes[t][i] + b * t2.amplitudes[t][i]) / norm;
                prop_assert!((t12.amplitudes[t][i] - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn v_type_without_field_is_a_pair_of_linear_dipoles(height in 0.2..0.8f64, detuning in -10.0..10.0f64) {
        let lat = flake(0.0, 3);
        let placement = place_impurity(&lat, Anchor::CentralHexagon, height * lat.spec.d).unwrap();
        let imp = ImpuritySpec {
            detuning,
            linewidth: 0.002,
            levels: ImpurityLevels::VType { zeeman: 0.0 },
            placement,
        };
        let h = assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap();
        // (sigma+ + sigma-)/sqrt2 = -i y and (sigma+ - sigma-)/sqrt2 = -x
        let diag = c64::new(detuning, -0.001);
        let sym = Polarization::new([c64::new(0.0, 0.0), c64::new(0.0, -1.0), c64::new(0.0, 0.0)]).unwrap();
        let anti = Polarization::from_real([-1.0, 0.0, 0.0]).unwrap();
        let rotated = assemble_with_levels(&lat, &Polarization::pi(), &placement.position, 0.002, &[(sym, diag), (anti, diag)]).unwrap();
        let a = eig(&h.matrix).unwrap().values;
        let b = eig(&rotated).unwrap().values;
        prop_assert!(spectral_distance(&a, &b) < 1e-8);

        // the symmetric state couples to the array like a single y dipole
        let n = lat.len();
        let sym_row: Vec<c64> = (0..n).map(|j| (h.matrix[(n, j)] + h.matrix[(n + 1, j)]) / 2f64.sqrt()).collect();
        let y_row: Vec<c64> = (0..n).map(|j| rotated[(n, j)]).collect();
        for j in 0..n {
            prop_assert!((sym_row[j] - y_row[j]).norm() < 1e-10);
        }
    }
}

#[test]
fn mirror_conjugate_presets_swap_sectors() {
    use kagome_am::dynamics::{emission_scenario, mirrored_sector, Scenario, ScenarioOverrides};
    let o = ScenarioOverrides {
        cells_per_side: Some(7),
        ..Default::default()
    };
    let c = emission_scenario(Scenario::Fig5c, &o).unwrap().snapshot_weights();
    let d = emission_scenario(Scenario::Fig5d, &o).unwrap().snapshot_weights();
    for s in 0..6 {
        assert!((c[s] - d[mirrored_sector(s)]).abs() < 0.05 * c[s].max(1e-6), "sector {s}: {c:?} vs {d:?}");
    }
}
