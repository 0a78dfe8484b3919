//! Nearest-neighbour breathing-kagome tight-binding model.

use std::f64::consts::{PI, TAU};

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::geometry::{Lattice, LatticeSpec};
use crate::greens::{CouplingKernel, Polarization};
use crate::hamiltonian::BasisLabel;
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, CMat};
use crate::spectra::{classify_modes, ipr, ClassifyConfig, Mode, ModeClass, ModeSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TBGeometry {
    Flake,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBModel {
    /// Hopping inside an upward triangle (separation `R_a`).
    pub t_intra: f64,
    /// Hopping between neighbouring cells (separation `R_b`).
    pub t_inter: f64,
    pub onsite: f64,
    pub geometry: TBGeometry,
}

impl TBModel {
    pub fn new(t_intra: f64, t_inter: f64, geometry: TBGeometry) -> Self {
        Self {
            t_intra,
            t_inter,
            onsite: 0.0,
            geometry,
        }
    }

    /// Hoppings set to `Re g` at `R_a` and `R_b`, averaged over the three bond
    /// orientations (exact for out-of-plane polarization).
    pub fn fitted(spec: &LatticeSpec, pol: &Polarization, geometry: TBGeometry) -> Result<Self> {
        spec.validate()?;
        let kernel = CouplingKernel::new(spec.k0());
        let fit = |r: f64| -> Result<f64> {
            let mut acc = 0.0;
            for bond in 0..3 {
                let a = bond as f64 * PI / 3.0;
                acc += kernel.coupling_at(&[r * a.cos(), r * a.sin(), 0.0], pol, pol)?.re;
            }
            Ok(acc / 3.0)
        };
        Ok(Self::new(fit(spec.r_a())?, fit(spec.r_b())?, geometry))
    }

    /// Index of the band separated from the other two everywhere in the zone
    /// (away from `t_intra = t_inter`). The other two are degenerate at the
    /// zone centre at `onsite - (t_intra + t_inter)`.
    pub fn isolated_band(&self) -> usize {
        if self.t_intra + self.t_inter > 0.0 {
            2
        } else {
            0
        }
    }

    /// Swaps the two hoppings (maps `delta` to `-delta`).
    pub fn dual(&self) -> Self {
        Self {
            t_intra: self.t_inter,
            t_inter: self.t_intra,
            ..*self
        }
    }
}

/// Nearest-neighbour bonds of a clean flake: `(i, j, intra)` with `i < j`.
pub fn flake_bonds(lat: &Lattice) -> Vec<(usize, usize, bool)> {
    let tol = 1e-6 * lat.spec.d;
    let r_b = lat.spec.r_b();
    let n = lat.len();
    let mut bonds = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if lat.cell_index[i] == lat.cell_index[j] {
                bonds.push((i, j, true));
            } else if (crate::geometry::distance(&lat.positions[i], &lat.positions[j]) - r_b).abs() < tol {
                bonds.push((i, j, false));
            }
        }
    }
    bonds
}

pub fn flake_hamiltonian(model: &TBModel, lat: &Lattice) -> Mat<f64> {
    let n = lat.len();
    let mut h = Mat::<f64>::from_fn(n, n, |i, j| if i == j { model.onsite } else { 0.0 });
    for (i, j, intra) in flake_bonds(lat) {
        let t = if intra { model.t_intra } else { model.t_inter };
        h[(i, j)] = t;
        h[(j, i)] = t;
    }
    h
}

/// Degenerate clusters are rotated onto sublattice-resolved vectors so the
/// basis inside an exactly degenerate subspace is reproducible.
fn resolve_degenerate(values: &[f64], vectors: &mut CMat, lat: &Lattice, tol: f64) -> Result<()> {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < tol {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let sub = CMat::from_fn(m, m, |a, b| {
                (0..n)
                    .map(|i| {
                        let s = lat.sublattice[i].index() as f64 + 1e-3 * lat.positions[i][0] / lat.spec.d;
                        vectors[(i, start + a)].conj() * s * vectors[(i, start + b)]
                    })
                    .sum()
            });
            let (_, rot) = hermitian_eig(&sub)?;
            let block = CMat::from_fn(n, m, |i, b| (0..m).map(|a| vectors[(i, start + a)] * rot[(a, b)]).sum());
            for b in 0..m {
                for i in 0..n {
                    vectors[(i, start + b)] = block[(i, b)];
                }
            }
        }
        start = end;
    }
    Ok(())
}

/// Flake spectrum run through the same classification as the full model.
pub fn tb_spectrum(model: &TBModel, lat: &Lattice, cfg: &ClassifyConfig) -> Result<ModeSet> {
    if model.geometry != TBGeometry::Flake {
        return Err(Error::Constraint("tb_spectrum needs a flake model".into()));
    }
    // Diagonalize without the on-site shift so the automatic gap search is
    // centred on the on-site energy.
    let bare = TBModel { onsite: 0.0, ..*model };
    let h = flake_hamiltonian(&bare, lat);
    let n = h.nrows();
    let hc = CMat::from_fn(n, n, |i, j| c64::new(h[(i, j)], 0.0));
    let (values, mut vectors) = hermitian_eig(&hc)?;
    let scale = model.t_intra.abs().max(model.t_inter.abs()).max(1e-300);
    resolve_degenerate(&values, &mut vectors, lat, 1e-9 * scale)?;
    let modes = values
        .iter()
        .enumerate()
        .map(|(k, &e)| Mode {
            index: k,
            eigenvalue: c64::new(e, 0.0),
            ipr: ipr((0..n).map(|i| vectors[(i, k)])),
            class: ModeClass::Bulk,
            sublattice_weight: [0.0; 3],
            corner_weight: [0.0; 3],
            edge_weight: [0.0; 3],
            impurity_weight: 0.0,
            in_gap: false,
        })
        .collect();
    let set = ModeSet {
        modes,
        vectors,
        labels: (0..n).map(BasisLabel::Atom).collect(),
        gap: None,
    };
    let mut set = classify_modes(set, lat, cfg);
    for m in &mut set.modes {
        m.eigenvalue.re += model.onsite;
    }
    set.gap = set.gap.map(|(lo, hi)| (lo + model.onsite, hi + model.onsite));
    Ok(set)
}

/// Largest sublattice weight of each vector after resolving the span of the
/// given modes onto eigenvectors of the sublattice index. Finite flakes
/// hybridize the corner states, so individual eigenvectors need not be
/// sublattice-pure even when their span is.
pub fn sublattice_purity(set: &ModeSet, lat: &Lattice, modes: &[usize]) -> Result<Vec<f64>> {
    let cols: Vec<usize> = modes.iter().map(|&k| set.modes[k].index).collect();
    let m = cols.len();
    let n = set.vectors.nrows();
    let atom = |row: usize| match set.labels[row] {
        BasisLabel::Atom(a) => Some(a),
        _ => None,
    };
    let sub = CMat::from_fn(m, m, |a, b| {
        (0..n)
            .filter_map(|i| atom(i).map(|at| (i, lat.sublattice[at].index() as f64)))
            .map(|(i, s)| set.vectors[(i, cols[a])].conj() * s * set.vectors[(i, cols[b])])
            .sum()
    });
    let (_, rot) = hermitian_eig(&sub)?;
    Ok((0..m)
        .map(|b| {
            let mut w = [0.0; 3];
            for i in 0..n {
                if let Some(at) = atom(i) {
                    let v: c64 = (0..m).map(|a| set.vectors[(i, cols[a])] * rot[(a, b)]).sum();
                    w[lat.sublattice[at].index()] += v.norm_sqr();
                }
            }
            let total: f64 = w.iter().sum();
            w.iter().fold(0.0f64, |x, &y| x.max(y)) / total
        })
        .collect())
}

/// Bloch matrix at fractional momentum `f` along the reciprocal vectors of
/// `u1 = a2`, `u2 = a2 - a1` (the two primitive vectors straddling the A
/// direction). Orbitals are placed at their cell origin, so `H(f + 1) = H(f)`.
pub fn bloch_matrix(model: &TBModel, f: [f64; 2]) -> CMat {
    let (ta, tb) = (c64::new(model.t_intra, 0.0), c64::new(model.t_inter, 0.0));
    let phase = |x: f64| c64::from_polar(1.0, TAU * x);
    // A(0)-B(u1), A(0)-C(u2), C(0)-B(u1 - u2)
    let ab = ta + tb * phase(f[0]);
    let ac = ta + tb * phase(f[1]);
    let cb = ta + tb * phase(f[0] - f[1]);
    let e = c64::new(model.onsite, 0.0);
    let mut h = CMat::zeros(3, 3);
    h[(0, 0)] = e;
    h[(1, 1)] = e;
    h[(2, 2)] = e;
    h[(0, 1)] = ab;
    h[(1, 0)] = ab.conj();
    h[(0, 2)] = ac;
    h[(2, 0)] = ac.conj();
    h[(2, 1)] = cb;
    h[(1, 2)] = cb.conj();
    h
}

/// Ascending band energies at fractional momentum `f`.
pub fn bands(model: &TBModel, f: [f64; 2]) -> Result<[f64; 3]> {
    let v = hermitian_eigenvalues(&bloch_matrix(model, f))?;
    Ok([v[0], v[1], v[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonConfig {
    pub grid: usize,
    /// Band index in ascending order.
    pub band: usize,
    /// Minimum direct gap to the neighbouring bands, relative to the largest
    /// hopping.
    pub min_gap: f64,
}

impl Default for WilsonConfig {
    fn default() -> Self {
        Self {
            grid: 120,
            band: 0,
            min_gap: 1e-6,
        }
    }
}

/// Polarization of one band along the two primitive directions, modulo 1.
pub fn wilson_polarization(model: &TBModel, cfg: &WilsonConfig) -> Result<[f64; 2]> {
    if model.geometry != TBGeometry::Periodic {
        return Err(Error::Constraint("wilson_polarization needs a periodic model".into()));
    }
    if cfg.grid < 3 || cfg.band > 2 {
        return Err(Error::Constraint(format!("grid {} band {}", cfg.grid, cfg.band)));
    }
    let n = cfg.grid;
    let scale = model.t_intra.abs().max(model.t_inter.abs());
    let mut states = vec![[c64::new(0.0, 0.0); 3]; n * n];
    for m1 in 0..n {
        for m2 in 0..n {
            let f = [m1 as f64 / n as f64, m2 as f64 / n as f64];
            let (vals, vecs) = hermitian_eig(&bloch_matrix(model, f))?;
            let b = cfg.band;
            let gap = [b.checked_sub(1).map(|l| vals[b] - vals[l]), vals.get(b + 1).map(|u| u - vals[b])]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min);
            if gap < cfg.min_gap * scale {
                return Err(Error::GapClosing(format!(
                    "band {b} gap {gap:.3e} at fractional k ({:.4}, {:.4})",
                    f[0], f[1]
                )));
            }
            states[m1 * n + m2] = [vecs[(0, b)], vecs[(1, b)], vecs[(2, b)]];
        }
    }
    let at = |m1: usize, m2: usize| &states[(m1 % n) * n + (m2 % n)];
    let overlap = |u: &[c64; 3], v: &[c64; 3]| -> c64 { (0..3).map(|i| u[i].conj() * v[i]).sum() };
    let mut out = [0.0; 2];
    for (dir, slot) in out.iter_mut().enumerate() {
        let mut phases = Vec::with_capacity(n);
        for line in 0..n {
            let mut w = c64::new(1.0, 0.0);
            for step in 0..n {
                let (a, b) = if dir == 0 {
                    (at(step, line), at(step + 1, line))
                } else {
                    (at(line, step), at(line, step + 1))
                };
                w *= overlap(a, b);
            }
            phases.push(-w.arg());
        }
        // unwrap across lines before averaging
        for i in 1..n {
            let jump = ((phases[i] - phases[i - 1] + PI).rem_euclid(TAU)) - PI;
            phases[i] = phases[i - 1] + jump;
        }
        let mean = phases.iter().sum::<f64>() / n as f64;
        *slot = (mean / TAU).rem_euclid(1.0);
    }
    Ok(out)
}

/// Distance of a polarization from `target` on the unit torus.
pub fn polarization_distance(p: [f64; 2], target: [f64; 2]) -> f64 {
    p.iter()
        .zip(target)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}
