//! Dense single-excitation Hamiltonians in units of the single-atom linewidth,
//! written as detunings from the array transition frequency.
//!
//! The array block has `-i/2` on the diagonal and the dipole couplings from
//! [`crate::greens`] off the diagonal. An impurity adds one level (two-level
//! emitter) or two levels (V-type emitter with `sigma+` / `sigma-` excited
//! states), coupled to every array atom with an extra factor
//! `sqrt(linewidth)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ImpurityPlacement, Lattice};
use crate::greens::{CouplingKernel, Polarization};
use crate::linalg::CMat;

/// Impurity linewidths above this are flagged as outside the Markovian-bath regime.
pub const MARKOV_LINEWIDTH_GUARD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum BasisLabel {
    Atom(usize),
    Impurity,
    SigmaPlus,
    SigmaMinus,
}

impl BasisLabel {
    pub fn is_impurity(&self) -> bool {
        !matches!(self, BasisLabel::Atom(_))
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisLabel::Atom(i) => write!(f, "atom:{i}"),
            BasisLabel::Impurity => f.write_str("impurity"),
            BasisLabel::SigmaPlus => f.write_str("impurity:sigma+"),
            BasisLabel::SigmaMinus => f.write_str("impurity:sigma-"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ImpurityLevels {
    TwoLevel { polarization: Polarization },
    /// `sigma+` and `sigma-` excited states split by `+/- zeeman`.
    VType { zeeman: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpuritySpec {
    /// `omega_A - omega_0` in units of the array linewidth.
    pub detuning: f64,
    /// Impurity linewidth in units of the array linewidth.
    pub linewidth: f64,
    pub levels: ImpurityLevels,
    pub placement: ImpurityPlacement,
}

impl ImpuritySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth > 0.0 && self.linewidth.is_finite()) {
            return Err(Error::Constraint(format!(
                "impurity linewidth must be positive, got {}",
                self.linewidth
            )));
        }
        if !self.detuning.is_finite() {
            return Err(Error::Constraint("impurity detuning must be finite".into()));
        }
        if let ImpurityLevels::VType { zeeman } = self.levels {
            if !zeeman.is_finite() {
                return Err(Error::Constraint("Zeeman shift must be finite".into()));
            }
        }
        if !(self.placement.height > 0.0) {
            return Err(Error::Constraint("impurity must sit above the array plane".into()));
        }
        Ok(())
    }

    /// Whether the impurity is slow enough for the array to act as a Markovian bath.
    pub fn is_markovian(&self) -> bool {
        self.linewidth <= MARKOV_LINEWIDTH_GUARD
    }

    /// Diagonal entries and polarizations of the impurity levels.
    fn level_table(&self) -> Vec<(BasisLabel, Polarization, c64)> {
        let base = c64::new(self.detuning, -self.linewidth / 2.0);
        match self.levels {
            ImpurityLevels::TwoLevel { polarization } => {
                vec![(BasisLabel::Impurity, polarization, base)]
            }
            ImpurityLevels::VType { zeeman } => vec![
                (
                    BasisLabel::SigmaPlus,
                    Polarization::sigma_plus(),
                    base + c64::new(zeeman, 0.0),
                ),
                (
                    BasisLabel::SigmaMinus,
                    Polarization::sigma_minus(),
                    base - c64::new(zeeman, 0.0),
                ),
            ],
        }
    }
}

/// Parameter echo stored alongside a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub delta: f64,
    pub d: f64,
    pub cells_per_side: usize,
    pub polarization: Polarization,
    pub impurity: Option<ImpuritySpec>,
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: CMat,
    pub labels: Vec<BasisLabel>,
    pub params: HamiltonianParams,
    /// Non-fatal diagnostics, e.g. a non-Markovian impurity.
    pub warnings: Vec<String>,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn array_len(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_impurity()).count()
    }

    pub fn impurity_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_impurity())
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest `|H_ij - H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst
    }

    /// Collective decay matrix `Gamma = i (H - H^dagger)` of the array block,
    /// so that `Gamma_ij = -2 Im H_ij` for a complex-symmetric block.
    pub fn decay_matrix(&self) -> CMat {
        let n = self.array_len();
        CMat::from_fn(n, n, |i, j| {
            c64::new(0.0, 1.0) * (self.matrix[(i, j)] - self.matrix[(j, i)].conj())
        })
    }

    /// Writes little-endian row-major complex doubles to `path` and a JSON
    /// sidecar (`<path>.json`) with dimension, labels and parameters.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let n = self.dim();
        let mut w = BufWriter::new(File::create(path)?);
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        let sidecar = serde_json::json!({
            "dimension": n,
            "layout": "row-major little-endian complex128 (re, im)",
            "units": "hbar*Gamma0, detuning from omega0",
            "labels": self.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "parameters": self.params,
        });
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_vec_pretty(&sidecar)?)?;
        Ok(())
    }
}

/// Reads back a matrix written by [`EffectiveHamiltonian::write_dump`].
pub fn read_dump(path: &Path, dim: usize) -> Result<CMat> {
    let bytes = std::fs::read(path)?;
    if bytes.len() != dim * dim * 16 {
        return Err(Error::Config(format!(
            "matrix dump holds {} bytes, expected {}",
            bytes.len(),
            dim * dim * 16
        )));
    }
    let word = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    Ok(CMat::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        c64::new(word(k), word(k + 1))
    }))
}

fn kernel_for(lat: &Lattice) -> CouplingKernel {
    CouplingKernel::new(lat.spec.k0())
}

fn array_block(lat: &Lattice, pol: &Polarization, kernel: &CouplingKernel, dim: usize) -> Result<CMat> {
    let n = lat.len();
    let rows: Vec<Vec<c64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| kernel.coupling(&lat.positions[i], &lat.positions[j], pol, pol))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = CMat::zeros(dim, dim);
    for (i, row) in rows.into_iter().enumerate() {
        m[(i, i)] = c64::new(0.0, -0.5);
        for (off, g) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    Ok(m)
}

/// Bare array with a common polarization.
pub fn assemble_array(lat: &Lattice, pol: &Polarization) -> Result<EffectiveHamiltonian> {
    let kernel = kernel_for(lat);
    let n = lat.len();
    let matrix = array_block(lat, pol, &kernel, n)?;
    Ok(EffectiveHamiltonian {
        matrix,
        labels: (0..n).map(BasisLabel::Atom).collect(),
        params: HamiltonianParams {
            delta: lat.spec.delta,
            d: lat.spec.d,
            cells_per_side: lat.spec.cells_per_side,
            polarization: *pol,
            impurity: None,
        },
        warnings: Vec::new(),
    })
}

/// Array plus one impurity (two-level or V-type).
pub fn assemble_with_impurity(
    lat: &Lattice,
    pol: &Polarization,
    imp: &ImpuritySpec,
) -> Result<EffectiveHamiltonian> {
    imp.validate()?;
    let levels = imp.level_table();
    let kernel = kernel_for(lat);
    let n = lat.len();
    let dim = n + levels.len();
    let mut matrix = array_block(lat, pol, &kernel, dim)?;
    let scale = imp.linewidth.sqrt();
    let r_imp = imp.placement.position;

    for (k, (_, p_level, diag)) in levels.iter().enumerate() {
        let a = n + k;
        matrix[(a, a)] = *diag;
        for m in 0..n {
            let r_m = lat.positions[m];
            // H_{A m} = p_A* . G_{Am} . p_m and H_{m A} = p_m* . G_{mA} . p_A
            matrix[(a, m)] = scale * kernel.coupling(&r_imp, &r_m, p_level, pol)?;
            matrix[(m, a)] = scale * kernel.coupling(&r_m, &r_imp, pol, p_level)?;
        }
    }

    let mut warnings = Vec::new();
    if !imp.is_markovian() {
        warnings.push(format!(
            "impurity linewidth {} exceeds {} Gamma0; the array no longer acts as a Markovian bath",
            imp.linewidth, MARKOV_LINEWIDTH_GUARD
        ));
    }

    let mut labels: Vec<BasisLabel> = (0..n).map(BasisLabel::Atom).collect();
    labels.extend(levels.iter().map(|(l, _, _)| *l));
    Ok(EffectiveHamiltonian {
        matrix,
        labels,
        params: HamiltonianParams {
            delta: lat.spec.delta,
            d: lat.spec.d,
            cells_per_side: lat.spec.cells_per_side,
            polarization: *pol,
            impurity: Some(*imp),
        },
        warnings,
    })
}

/// Array plus arbitrary impurity levels at one position, each given by its
/// polarization and complex diagonal entry. Used to check basis-change
/// equivalences of the V-type emitter.
pub fn assemble_with_levels(
    lat: &Lattice,
    pol: &Polarization,
    position: &[f64; 3],
    linewidth: f64,
    levels: &[(Polarization, c64)],
) -> Result<CMat> {
    let kernel = kernel_for(lat);
    let n = lat.len();
    let mut m = array_block(lat, pol, &kernel, n + levels.len())?;
    let scale = linewidth.sqrt();
    for (k, (p, diag)) in levels.iter().enumerate() {
        let a = n + k;
        m[(a, a)] = *diag;
        for j in 0..n {
            m[(a, j)] = scale * kernel.coupling(position, &lat.positions[j], p, pol)?;
            m[(j, a)] = scale * kernel.coupling(&lat.positions[j], position, pol, p)?;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_flake, place_impurity, Anchor, LatticeSpec};
    use crate::greens::coupling;
    use crate::linalg::eig;
    use std::f64::consts::TAU;

    fn two_atoms(sep: f64) -> Lattice {
        let mut lat = build_flake(&LatticeSpec::new(0.1, 0.0, 2).unwrap()).unwrap();
        lat.positions = vec![[0.0, 0.0, 0.0], [sep, 0.0, 0.0]];
        lat.sublattice.truncate(2);
        lat.cell_index.truncate(2);
        lat
    }

    #[test]
    fn two_atom_eigenvalues() {
        let lat = two_atoms(0.5);
        let pol = Polarization::pi();
        let h = assemble_array(&lat, &pol).unwrap();
        let g = coupling(&lat.positions[0], &lat.positions[1], &pol, &pol, TAU).unwrap();
        let es = eig(&h.matrix).unwrap();
        let mut got: Vec<c64> = es.values.clone();
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut want = vec![c64::new(0.0, -0.5) + g, c64::new(0.0, -0.5) - g];
        want.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn array_block_is_complex_symmetric_and_dense() {
        let lat = build_flake(&LatticeSpec::new(0.1, 0.3, 10).unwrap()).unwrap();
        let h = assemble_array(&lat, &Polarization::pi()).unwrap();
        assert_eq!(h.dim(), 165);
        assert!(h.asymmetry() < 1e-12);
        for i in 0..165 {
            assert_eq!(h.matrix[(i, i)], c64::new(0.0, -0.5));
            for j in 0..165 {
                if i != j {
                    assert!(h.matrix[(i, j)].norm() > 0.0);
                }
            }
        }
    }

    fn hexagon_impurity(levels: ImpurityLevels, linewidth: f64) -> (Lattice, ImpuritySpec) {
        let spec = LatticeSpec::new(0.1, 0.0, 5).unwrap();
        let lat = build_flake(&spec).unwrap();
        let placement = place_impurity(&lat, Anchor::CentralHexagon, 0.4 * spec.d).unwrap();
        (
            lat,
            ImpuritySpec {
                detuning: -3.06,
                linewidth,
                levels,
                placement,
            },
        )
    }

    #[test]
    fn impurity_couplings_scale_with_root_linewidth() {
        let pol = Polarization::pi();
        let levels = ImpurityLevels::TwoLevel { polarization: Polarization::pi() };
        let (lat, imp) = hexagon_impurity(levels, 0.002);
        let h = assemble_with_impurity(&lat, &pol, &imp).unwrap();
        let n = lat.len();
        assert_eq!(h.dim(), n + 1);
        assert_eq!(h.matrix[(n, n)], c64::new(-3.06, -0.001));
        for m in [0, 7, n - 1] {
            let bare = coupling(&imp.placement.position, &lat.positions[m], &pol, &pol, TAU).unwrap();
            let ratio = h.matrix[(n, m)] / bare;
            assert!((ratio - c64::new(0.002f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        assert!((0.002f64.sqrt() - 0.0447).abs() < 1e-4);
        assert!(h.warnings.is_empty());
    }

    #[test]
    fn hexagon_neighbours_couple_equally() {
        let levels = ImpurityLevels::TwoLevel { polarization: Polarization::pi() };
        let (lat, imp) = hexagon_impurity(levels, 0.002);
        let h = assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap();
        let n = lat.len();
        let (_, base) = lat.central_hexagon().unwrap();
        let ring = lat.hexagon_atoms(base);
        let g0 = h.matrix[(n, ring[0])].norm();
        for &m in &ring {
            assert!((h.matrix[(n, m)].norm() - g0).abs() < 1e-12 * g0);
        }
    }

    #[test]
    fn v_type_levels() {
        let (lat, imp) = hexagon_impurity(ImpurityLevels::VType { zeeman: 0.0 }, 0.002);
        let h = assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap();
        let n = lat.len();
        assert_eq!(h.dim(), n + 2);
        assert_eq!(h.matrix[(n, n)], h.matrix[(n + 1, n + 1)]);
        assert_eq!(h.labels[n], BasisLabel::SigmaPlus);

        let (lat, imp) = hexagon_impurity(ImpurityLevels::VType { zeeman: 20.0 }, 0.002);
        let h = assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap();
        assert!((h.matrix[(n, n)] - h.matrix[(n + 1, n + 1)] - c64::new(40.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn invalid_or_non_markovian_impurities() {
        let levels = ImpurityLevels::TwoLevel { polarization: Polarization::x() };
        let (lat, imp) = hexagon_impurity(levels, 0.0);
        assert!(assemble_with_impurity(&lat, &Polarization::pi(), &imp).is_err());
        let (lat, imp) = hexagon_impurity(levels, 0.5);
        let h = assemble_with_impurity(&lat, &Polarization::pi(), &imp).unwrap();
        assert_eq!(h.warnings.len(), 1);
    }

    #[test]
    fn dump_round_trip() {
        let lat = build_flake(&LatticeSpec::new(0.1, 0.2, 3).unwrap()).unwrap();
        let h = assemble_array(&lat, &Polarization::in_plane(0.3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        h.write_dump(&path).unwrap();
        let back = read_dump(&path, h.dim()).unwrap();
        assert_eq!(back, h.matrix);
        let side: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("h.bin.json")).unwrap()).unwrap();
        assert_eq!(side["dimension"], 18);
        assert_eq!(side["labels"][17], "atom:17");
    }
}
