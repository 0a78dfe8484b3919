//! Single-excitation time evolution under the non-Hermitian Hamiltonian and
//! directional analysis of the resulting emission patterns.

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::str::FromStr;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_flake, place_impurity, Anchor, Lattice, LatticeSpec, Point};
use crate::greens::Polarization;
use crate::hamiltonian::{assemble_with_impurity, BasisLabel, EffectiveHamiltonian, ImpurityLevels, ImpuritySpec};
use crate::linalg::{condition_number, eig, expm, inverse, CMat};

/// Eigenbases with a worse condition number fall back to the matrix exponential.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub amplitudes: Vec<c64>,
    pub label: String,
}

impl InitialState {
    /// Normalises `amplitudes`.
    pub fn new(amplitudes: Vec<c64>, label: impl Into<String>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Constraint("initial state must have nonzero norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
            label: label.into(),
        })
    }

    fn basis(h: &EffectiveHamiltonian, entries: &[(BasisLabel, c64)], label: &str) -> Result<Self> {
        let mut amps = vec![c64::ZERO; h.dim()];
        for (want, amp) in entries {
            let idx = h
                .labels
                .iter()
                .position(|l| l == want)
                .ok_or_else(|| Error::Constraint(format!("basis has no {want} level")))?;
            amps[idx] = *amp;
        }
        Self::new(amps, label)
    }

    /// Excited two-level impurity, array in its ground state.
    pub fn impurity_excited(h: &EffectiveHamiltonian) -> Result<Self> {
        Self::basis(h, &[(BasisLabel::Impurity, c64::ONE)], "impurity_excited")
    }

    /// `(|sigma+> + |sigma->) / sqrt 2`.
    pub fn v_type_symmetric(h: &EffectiveHamiltonian) -> Result<Self> {
        Self::basis(
            h,
            &[(BasisLabel::SigmaPlus, c64::ONE), (BasisLabel::SigmaMinus, c64::ONE)],
            "v_type_symmetric",
        )
    }

    pub fn site(h: &EffectiveHamiltonian, index: usize) -> Result<Self> {
        if index >= h.dim() {
            return Err(Error::Constraint(format!("basis index {index} out of range")));
        }
        let mut amps = vec![c64::ZERO; h.dim()];
        amps[index] = c64::ONE;
        Self::new(amps, format!("site:{index}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    Eigendecomposition,
    MatrixExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<c64>>,
    pub populations: Vec<Vec<f64>>,
    pub total_norm: Vec<f64>,
    pub method: PropagationMethod,
    /// 1-norm condition number of the eigenvector matrix.
    pub condition: f64,
    pub labels: Vec<BasisLabel>,
}

impl DynamicsTrace {
    /// Populations of the array atoms only, at snapshot `t`.
    pub fn array_populations(&self, t: usize) -> Vec<f64> {
        self.labels
            .iter()
            .zip(&self.populations[t])
            .filter(|(l, _)| !l.is_impurity())
            .map(|(_, p)| *p)
            .collect()
    }

    pub fn last(&self) -> usize {
        self.times.len().saturating_sub(1)
    }
}

/// `psi(t) = exp(-i H t) psi0` at each requested time.
pub fn evolve(h: &EffectiveHamiltonian, psi0: &InitialState, times: &[f64]) -> Result<DynamicsTrace> {
    let n = h.dim();
    if psi0.amplitudes.len() != n {
        return Err(Error::Constraint(format!(
            "initial state has {} amplitudes for a {n}-level basis",
            psi0.amplitudes.len()
        )));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Constraint("times must be non-negative and sorted".into()));
    }

    let es = eig(&h.matrix)?;
    let vinv = inverse(&es.vectors);
    let condition = condition_number(&es.vectors, &vinv);
    let method = if condition.is_finite() && condition <= MAX_EIGENBASIS_CONDITION {
        PropagationMethod::Eigendecomposition
    } else {
        PropagationMethod::MatrixExponential
    };

    let psi0_col = CMat::from_fn(n, 1, |i, _| psi0.amplitudes[i]);
    let amplitudes: Vec<Vec<c64>> = match method {
        PropagationMethod::Eigendecomposition => {
            let coeff = &vinv * &psi0_col;
            times
                .iter()
                .map(|&t| {
                    let scaled = CMat::from_fn(n, 1, |k, _| {
                        coeff[(k, 0)] * (c64::new(0.0, -t) * es.values[k]).exp()
                    });
                    let psi = &es.vectors * &scaled;
                    (0..n).map(|i| psi[(i, 0)]).collect()
                })
                .collect()
        }
        PropagationMethod::MatrixExponential => times
            .iter()
            .map(|&t| {
                let gen = CMat::from_fn(n, n, |i, j| h.matrix[(i, j)] * c64::new(0.0, -t));
                let psi = expm(&gen) * &psi0_col;
                (0..n).map(|i| psi[(i, 0)]).collect()
            })
            .collect(),
    };
    let populations: Vec<Vec<f64>> = amplitudes
        .iter()
        .map(|a| a.iter().map(|z| z.norm_sqr()).collect())
        .collect();
    let total_norm = populations.iter().map(|p| p.iter().sum()).collect();
    Ok(DynamicsTrace {
        times: times.to_vec(),
        amplitudes,
        populations,
        total_norm,
        method,
        condition,
        labels: h.labels.clone(),
    })
}

/// `steps + 1` equally spaced times on `[0, t_end]`.
pub fn time_grid(t_end: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect()
}

// ---------------------------------------------------------------------------
// directional analysis

/// Sector `s` is centred on the lattice direction at `s * 60` degrees.
pub fn sector_of(angle: f64) -> usize {
    let a = (angle + FRAC_PI_3 / 2.0).rem_euclid(TAU);
    ((a / FRAC_PI_3) as usize).min(5)
}

/// Angular tolerance for atoms sitting on a sector boundary.
const BOUNDARY_TOL: f64 = 1e-9;

/// Sector shares of a direction: one sector, or half of each neighbour when
/// the direction lies on a boundary.
pub fn sector_shares(angle: f64) -> [(usize, f64); 2] {
    let a = (angle + FRAC_PI_3 / 2.0).rem_euclid(TAU);
    let nearest = (a / FRAC_PI_3).round();
    if (a - nearest * FRAC_PI_3).abs() < BOUNDARY_TOL {
        let upper = (nearest as usize) % 6;
        [(upper, 0.5), ((upper + 5) % 6, 0.5)]
    } else {
        [(sector_of(angle), 1.0), (0, 0.0)]
    }
}

/// Sector under the reflection `x -> -x`.
pub fn mirrored_sector(s: usize) -> usize {
    (9 - s) % 6
}

/// Atoms closer than this to the anchor (in units of `d`) are not binned.
const ANCHOR_EXCLUSION: f64 = 1e-6;

/// Population in six 60-degree sectors about `anchor`, normalized by the
/// binned population. `None` if that population vanishes.
pub fn sector_weights(positions: &[Point], populations: &[f64], anchor: [f64; 2], d: f64) -> Option<[f64; 6]> {
    let mut w = [0.0; 6];
    for (p, pop) in positions.iter().zip(populations) {
        let (dx, dy) = (p[0] - anchor[0], p[1] - anchor[1]);
        if dx.hypot(dy) < ANCHOR_EXCLUSION * d {
            continue;
        }
        for (s, share) in sector_shares(dy.atan2(dx)) {
            w[s] += share * pop;
        }
    }
    let total: f64 = w.iter().sum();
    (total > 0.0).then(|| w.map(|x| x / total))
}

/// Rotation sense of the coherent population flow about `anchor`:
/// `C = (F_cw - F_ccw) / (F_cw + F_ccw)`.
///
/// The flow from atom `j` to atom `i` is `2 Im(psi_i^* J_ij psi_j)` with `J`
/// the Hermitian part of the array block. A positive flow counts as
/// counterclockwise when the polar angle about the anchor increases from `j`
/// to `i` (by less than `pi`) and clockwise when it decreases. Flows along a
/// ray or through the anchor carry no rotation sense.
pub fn chirality(h: &EffectiveHamiltonian, lat: &Lattice, amplitudes: &[c64], anchor: [f64; 2]) -> f64 {
    let d = lat.spec.d;
    let atoms: Vec<(usize, f64)> = h
        .labels
        .iter()
        .enumerate()
        .filter_map(|(row, l)| match l {
            BasisLabel::Atom(a) => {
                let p = lat.positions[*a];
                let (dx, dy) = (p[0] - anchor[0], p[1] - anchor[1]);
                (dx.hypot(dy) >= ANCHOR_EXCLUSION * d).then(|| (row, dy.atan2(dx)))
            }
            _ => None,
        })
        .collect();
    let (mut cw, mut ccw) = (0.0, 0.0);
    for &(ri, phi_i) in &atoms {
        for &(rj, phi_j) in &atoms {
            let turn = (phi_i - phi_j + PI).rem_euclid(TAU) - PI;
            if turn.abs() < BOUNDARY_TOL || (PI - turn.abs()) < BOUNDARY_TOL {
                continue;
            }
            let jij = 0.5 * (h.matrix[(ri, rj)] + h.matrix[(rj, ri)].conj());
            let flow = 2.0 * (amplitudes[ri].conj() * jij * amplitudes[rj]).im;
            if flow <= 0.0 {
                continue;
            }
            if turn > 0.0 {
                ccw += flow;
            } else {
                cw += flow;
            }
        }
    }
    if cw + ccw > 0.0 {
        (cw - ccw) / (cw + ccw)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalAnalysis {
    pub anchor: [f64; 2],
    /// Per time; all zero where the array population vanishes.
    pub weights: Vec<[f64; 6]>,
    pub empty: Vec<bool>,
    pub chirality: Vec<f64>,
}

pub fn directional_weights(
    trace: &DynamicsTrace,
    h: &EffectiveHamiltonian,
    lat: &Lattice,
    anchor: [f64; 2],
) -> DirectionalAnalysis {
    let positions: Vec<Point> = h
        .labels
        .iter()
        .filter_map(|l| match l {
            BasisLabel::Atom(a) => Some(lat.positions[*a]),
            _ => None,
        })
        .collect();
    let mut weights = Vec::with_capacity(trace.times.len());
    let mut empty = Vec::with_capacity(trace.times.len());
    let mut chi = Vec::with_capacity(trace.times.len());
    for t in 0..trace.times.len() {
        let pops = trace.array_populations(t);
        match sector_weights(&positions, &pops, anchor, lat.spec.d) {
            Some(w) => {
                weights.push(w);
                empty.push(false);
            }
            None => {
                weights.push([0.0; 6]);
                empty.push(true);
            }
        }
        chi.push(chirality(h, lat, &trace.amplitudes[t], anchor));
    }
    DirectionalAnalysis {
        anchor,
        weights,
        empty,
        chirality: chi,
    }
}

/// Populations on the two edges meeting at the top corner, excluding atoms
/// shared by both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub left: f64,
    pub right: f64,
}

impl EdgeSplit {
    /// `|left - right| / (left + right)`.
    pub fn asymmetry(&self) -> f64 {
        let s = self.left + self.right;
        if s > 0.0 {
            (self.left - self.right).abs() / s
        } else {
            0.0
        }
    }

    /// Share of the larger edge.
    pub fn dominance(&self) -> f64 {
        let s = self.left + self.right;
        if s > 0.0 {
            self.left.max(self.right) / s
        } else {
            0.0
        }
    }
}

pub fn edge_split(lat: &Lattice, array_populations: &[f64]) -> EdgeSplit {
    // edge 1 runs along pi/3 (left side), edge 2 along 2pi/3 (right side)
    let left: Vec<usize> = lat.edge_sets[1].iter().copied().filter(|i| !lat.edge_sets[2].contains(i)).collect();
    let right: Vec<usize> = lat.edge_sets[2].iter().copied().filter(|i| !lat.edge_sets[1].contains(i)).collect();
    EdgeSplit {
        left: left.iter().map(|&i| array_populations[i]).sum(),
        right: right.iter().map(|&i| array_populations[i]).sum(),
    }
}

// ---------------------------------------------------------------------------
// canned emission scenarios

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig5e,
    Fig5f,
    Fig3g,
    Fig3h,
    Fig3i,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Fig5a,
        Scenario::Fig5b,
        Scenario::Fig5c,
        Scenario::Fig5d,
        Scenario::Fig5e,
        Scenario::Fig5f,
        Scenario::Fig3g,
        Scenario::Fig3h,
        Scenario::Fig3i,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig5a => "fig5a",
            Scenario::Fig5b => "fig5b",
            Scenario::Fig5c => "fig5c",
            Scenario::Fig5d => "fig5d",
            Scenario::Fig5e => "fig5e",
            Scenario::Fig5f => "fig5f",
            Scenario::Fig3g => "fig3g",
            Scenario::Fig3h => "fig3h",
            Scenario::Fig3i => "fig3i",
        }
    }

    pub fn params(&self) -> ScenarioParams {
        // caption vectors -x - iy and x - iy
        let left_circ = Polarization::sigma_plus();
        let right_circ = Polarization::sigma_minus();
        let base = ScenarioParams {
            d: 0.1,
            delta: 0.0,
            cells_per_side: 10,
            array_polarization: Polarization::pi(),
            anchor: Anchor::CentralHexagon,
            height: 0.4,
            detuning: -3.06,
            linewidth: 0.002,
            levels: ImpurityLevels::TwoLevel {
                polarization: Polarization::x(),
            },
            t_end: 0.3,
            steps: 30,
        };
        let two = |p| ImpurityLevels::TwoLevel { polarization: p };
        match self {
            Scenario::Fig5a => base,
            Scenario::Fig5b => ScenarioParams {
                levels: two(Polarization::y()),
                ..base
            },
            Scenario::Fig5c => ScenarioParams {
                anchor: Anchor::AdjacentCell,
                levels: two(left_circ),
                t_end: 0.45,
                ..base
            },
            Scenario::Fig5d => ScenarioParams {
                anchor: Anchor::AdjacentCell,
                levels: two(right_circ),
                t_end: 0.45,
                ..base
            },
            Scenario::Fig5e | Scenario::Fig5f => ScenarioParams {
                detuning: 48.26,
                levels: ImpurityLevels::VType {
                    zeeman: if *self == Scenario::Fig5e { 0.0 } else { 20.0 },
                },
                t_end: 0.17,
                ..base
            },
            Scenario::Fig3g | Scenario::Fig3h | Scenario::Fig3i => ScenarioParams {
                delta: 0.6,
                anchor: Anchor::TopCornerSite,
                detuning: 64.3,
                levels: two(match self {
                    Scenario::Fig3g => Polarization::pi(),
                    Scenario::Fig3h => left_circ,
                    _ => right_circ,
                }),
                t_end: if *self == Scenario::Fig3g { 2.0 } else { 3.3 },
                steps: 66,
                ..base
            },
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub d: f64,
    pub delta: f64,
    pub cells_per_side: usize,
    pub array_polarization: Polarization,
    pub anchor: Anchor,
    /// Impurity height in units of `d`.
    pub height: f64,
    pub detuning: f64,
    pub linewidth: f64,
    pub levels: ImpurityLevels,
    pub t_end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOverrides {
    pub cells_per_side: Option<usize>,
    pub detuning: Option<f64>,
    pub linewidth: Option<f64>,
    pub zeeman: Option<f64>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
}

impl ScenarioParams {
    pub fn apply(mut self, o: &ScenarioOverrides) -> Self {
        if let Some(l) = o.cells_per_side {
            self.cells_per_side = l;
        }
        if let Some(v) = o.detuning {
            self.detuning = v;
        }
        if let Some(v) = o.linewidth {
            self.linewidth = v;
        }
        if let (Some(z), ImpurityLevels::VType { zeeman }) = (o.zeeman, &mut self.levels) {
            *zeeman = z;
        }
        if let Some(v) = o.t_end {
            self.t_end = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Option<Scenario>,
    pub params: ScenarioParams,
    pub lattice: Lattice,
    pub hamiltonian: EffectiveHamiltonian,
    pub initial: InitialState,
    pub trace: DynamicsTrace,
    pub directional: DirectionalAnalysis,
    /// Populations on the two edges at the top corner, per time.
    pub edge_split: Option<Vec<EdgeSplit>>,
}

impl ScenarioRun {
    pub fn snapshot_weights(&self) -> [f64; 6] {
        self.directional.weights[self.trace.last()]
    }

    pub fn snapshot_chirality(&self) -> f64 {
        self.directional.chirality[self.trace.last()]
    }
}

pub fn emission_scenario(scenario: Scenario, overrides: &ScenarioOverrides) -> Result<ScenarioRun> {
    let params = scenario.params().apply(overrides);
    run_scenario(Some(scenario), params)
}

/// Runs an emission setup; `scenario` only labels the result.
pub fn run_scenario(scenario: Option<Scenario>, params: ScenarioParams) -> Result<ScenarioRun> {
    let spec = LatticeSpec::new(params.d, params.delta, params.cells_per_side)?;
    let lattice = build_flake(&spec)?;
    let placement = place_impurity(&lattice, params.anchor, params.height * params.d)?;
    let imp = ImpuritySpec {
        detuning: params.detuning,
        linewidth: params.linewidth,
        levels: params.levels,
        placement,
    };
    let hamiltonian = assemble_with_impurity(&lattice, &params.array_polarization, &imp)?;
    let initial = match params.levels {
        ImpurityLevels::TwoLevel { .. } => InitialState::impurity_excited(&hamiltonian)?,
        ImpurityLevels::VType { .. } => InitialState::v_type_symmetric(&hamiltonian)?,
    };
    let trace = evolve(&hamiltonian, &initial, &time_grid(params.t_end, params.steps))?;
    let anchor = [placement.position[0], placement.position[1]];
    let directional = directional_weights(&trace, &hamiltonian, &lattice, anchor);
    let edge_split = (params.anchor == Anchor::TopCornerSite).then(|| {
        (0..trace.times.len())
            .map(|t| edge_split(&lattice, &trace.array_populations(t)))
            .collect()
    });
    Ok(ScenarioRun {
        scenario,
        params,
        lattice,
        hamiltonian,
        initial,
        trace,
        directional,
        edge_split,
    })
}

/// Angle of sector `s`'s centre.
pub fn sector_angle(s: usize) -> f64 {
    s as f64 * FRAC_PI_3
}

/// `(sum over even sectors) - (sum over odd sectors)`: the threefold
/// component of a sector pattern.
pub fn threefold_contrast(w: &[f64; 6]) -> f64 {
    (w[0] + w[2] + w[4]) - (w[1] + w[3] + w[5])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::assemble_array;

    fn two_atoms(sep: f64) -> Lattice {
        let mut lat = build_flake(&LatticeSpec::new(0.1, 0.0, 2).unwrap()).unwrap();
        lat.positions = vec![[0.0, 0.0, 0.0], [sep, 0.0, 0.0]];
        lat.sublattice.truncate(2);
        lat.cell_index.truncate(2);
        lat
    }

    fn single_atom() -> EffectiveHamiltonian {
        let mut lat = two_atoms(0.5);
        lat.positions.truncate(1);
        lat.sublattice.truncate(1);
        lat.cell_index.truncate(1);
        assemble_array(&lat, &Polarization::pi()).unwrap()
    }

    #[test]
    fn initial_populations_at_t0() {
        let h = assemble_array(&two_atoms(0.3), &Polarization::pi()).unwrap();
        let psi = InitialState::new(vec![c64::new(0.6, 0.0), c64::new(0.0, 0.8)], "mix").unwrap();
        let tr = evolve(&h, &psi, &[0.0]).unwrap();
        assert!((tr.populations[0][0] - 0.36).abs() < 1e-12);
        assert!((tr.populations[0][1] - 0.64).abs() < 1e-12);
        assert!((tr.total_norm[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_atom_decays_exponentially() {
        let h = single_atom();
        let psi = InitialState::site(&h, 0).unwrap();
        let times = time_grid(5.0, 20);
        let tr = evolve(&h, &psi, &times).unwrap();
        for (t, n) in times.iter().zip(&tr.total_norm) {
            assert!((n - (-t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn close_dicke_pair_is_superradiant() {
        let h = assemble_array(&two_atoms(1e-3), &Polarization::pi()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = InitialState::new(vec![c64::new(s, 0.0), c64::new(s, 0.0)], "sym").unwrap();
        let tr = evolve(&h, &psi, &[0.0, 0.1, 0.2]).unwrap();
        let rate = -(tr.total_norm[2] / tr.total_norm[1]).ln() / 0.1;
        assert!((rate - 2.0).abs() < 1e-3, "rate {rate}");
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!("fig9z".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn sector_binning() {
        let d = 0.1;
        let ring: Vec<Point> = (0..60)
            .map(|i| {
                let a = TAU * (i as f64 + 0.5) / 60.0;
                [a.cos(), a.sin(), 0.0]
            })
            .collect();
        let w = sector_weights(&ring, &[1.0; 60], [0.0, 0.0], d).unwrap();
        for x in w {
            assert!((x - 1.0 / 6.0).abs() < 1e-12);
        }
        let axis: Vec<Point> = (1..5).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
        assert_eq!(sector_weights(&axis, &[0.25; 4], [0.0, 0.0], d).unwrap(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sector_weights(&axis, &[0.0; 4], [0.0, 0.0], d), None);
        assert_eq!(sector_of(PI), 3);
        assert_eq!(sector_of(-0.01), 0);
        assert_eq!(sector_of(FRAC_PI_3 / 2.0 + 1e-6), 1);
        assert_eq!(sector_shares(FRAC_PI_3 / 2.0), [(1, 0.5), (0, 0.5)]);
        assert_eq!(sector_shares(-FRAC_PI_3 / 2.0), [(0, 0.5), (5, 0.5)]);
        assert_eq!(sector_shares(0.2), [(0, 1.0), (0, 0.0)]);
        for s in 0..6 {
            let a = sector_angle(s);
            assert_eq!(sector_of(PI - a), mirrored_sector(s));
        }
    }
}
