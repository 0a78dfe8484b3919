//! Finite-array spectra: diagonalization, participation ratios, corner / edge
//! / bulk classification, and the polarization, imbalance and disorder sweeps
//! built on top of them.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_flake, distance, Lattice, LatticeSpec};
use crate::greens::Polarization;
use crate::hamiltonian::{assemble_array, BasisLabel, EffectiveHamiltonian};
use crate::linalg::{eig, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Corner,
    Edge,
    Bulk,
    ImpurityDominated,
}

impl ModeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeClass::Corner => "corner",
            ModeClass::Edge => "edge",
            ModeClass::Bulk => "bulk",
            ModeClass::ImpurityDominated => "impurity",
        }
    }
}

/// How the bulk gap hosting corner modes is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GapWindow {
    /// Gap between consecutive bulk eigenvalues that contains zero detuning,
    /// accepted only if wider than `min_gap_fraction` of the interdecile spread of frequencies.
    Auto,
    Fixed { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Radius of the corner region, in units of `d`.
    pub corner_radius: f64,
    pub corner_threshold: f64,
    /// Total width of each edge strip, centred on the edge line, in units of `d`.
    pub edge_strip_width: f64,
    pub edge_threshold: f64,
    pub impurity_threshold: f64,
    pub gap: GapWindow,
    pub min_gap_fraction: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            corner_radius: 1.0,
            corner_threshold: 0.5,
            edge_strip_width: 1.0,
            edge_threshold: 0.6,
            impurity_threshold: 0.5,
            gap: GapWindow::Auto,
            min_gap_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// Column of [`ModeSet::vectors`].
    pub index: usize,
    /// `detuning - i * gamma`, units of the single-atom linewidth.
    pub eigenvalue: c64,
    pub ipr: f64,
    pub class: ModeClass,
    pub sublattice_weight: [f64; 3],
    pub corner_weight: [f64; 3],
    pub edge_weight: [f64; 3],
    pub impurity_weight: f64,
    pub in_gap: bool,
}

impl Mode {
    pub fn frequency(&self) -> f64 {
        self.eigenvalue.re
    }

    /// `gamma = -Im(eigenvalue)`; a lone atom has `gamma = 1/2`.
    pub fn gamma(&self) -> f64 {
        -self.eigenvalue.im
    }

    /// Population decay rate, `2 * gamma`.
    pub fn decay_rate(&self) -> f64 {
        -2.0 * self.eigenvalue.im
    }

    pub fn corner_total(&self) -> f64 {
        self.corner_weight.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Sorted by real part.
    pub modes: Vec<Mode>,
    /// Unit-norm right eigenvectors, one column per entry of `modes`.
    pub vectors: CMat,
    pub labels: Vec<BasisLabel>,
    pub gap: Option<(f64, f64)>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn population(&self, mode: usize) -> Vec<f64> {
        let k = self.modes[mode].index;
        (0..self.vectors.nrows())
            .map(|i| self.vectors[(i, k)].norm_sqr())
            .collect()
    }

    pub fn in_gap_corner_modes(&self) -> Vec<&Mode> {
        self.modes
            .iter()
            .filter(|m| m.in_gap && m.class == ModeClass::Corner)
            .collect()
    }

    /// In-gap corner modes outside the frequency span of the in-gap edge
    /// modes. Edge-band standing waves that bunch near the corners of small
    /// flakes pass the corner-weight test but fall inside that span.
    pub fn isolated_corner_modes(&self) -> Vec<&Mode> {
        let span = self
            .modes
            .iter()
            .filter(|m| m.in_gap && m.class == ModeClass::Edge)
            .fold(None, |acc: Option<(f64, f64)>, m| {
                let w = m.frequency();
                Some(acc.map_or((w, w), |(lo, hi)| (lo.min(w), hi.max(w))))
            });
        self.in_gap_corner_modes()
            .into_iter()
            .filter(|m| span.map_or(true, |(lo, hi)| m.frequency() < lo || m.frequency() > hi))
            .collect()
    }

    pub fn count_class(&self, class: ModeClass) -> usize {
        self.modes.iter().filter(|m| m.class == class).count()
    }
}

/// Inverse participation ratio `sum |p|^4 / (sum |p|^2)^2`.
pub fn ipr(amplitudes: impl IntoIterator<Item = c64>) -> f64 {
    let (s2, s4) = amplitudes.into_iter().fold((0.0, 0.0), |(s2, s4), z| {
        let p = z.norm_sqr();
        (s2 + p, s4 + p * p)
    });
    if s2 > 0.0 {
        s4 / (s2 * s2)
    } else {
        0.0
    }
}

/// Full non-Hermitian eigendecomposition. Classification fields are left at
/// `Bulk` (or `ImpurityDominated`) until [`classify_modes`] runs.
pub fn diagonalize(h: &EffectiveHamiltonian) -> Result<ModeSet> {
    let es = eig(&h.matrix)?;
    let n = h.dim();
    let imp = h.impurity_indices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        es.values[a]
            .re
            .total_cmp(&es.values[b].re)
            .then(es.values[a].im.total_cmp(&es.values[b].im))
    });
    let vectors = CMat::from_fn(n, n, |i, k| es.vectors[(i, order[k])]);
    let modes = (0..n)
        .map(|k| {
            let col = (0..n).map(|i| vectors[(i, k)]);
            let impurity_weight: f64 = imp.iter().map(|&i| vectors[(i, k)].norm_sqr()).sum();
            Mode {
                index: k,
                eigenvalue: es.values[order[k]],
                ipr: ipr(col),
                class: if impurity_weight > 0.5 {
                    ModeClass::ImpurityDominated
                } else {
                    ModeClass::Bulk
                },
                sublattice_weight: [0.0; 3],
                corner_weight: [0.0; 3],
                edge_weight: [0.0; 3],
                impurity_weight,
                in_gap: false,
            }
        })
        .collect();
    Ok(ModeSet {
        modes,
        vectors,
        labels: h.labels.clone(),
        gap: None,
    })
}

/// Populates sublattice, corner and edge weights, classes and the in-gap flag.
pub fn classify_modes(mut set: ModeSet, lat: &Lattice, cfg: &ClassifyConfig) -> ModeSet {
    let d = lat.spec.d;
    let corner_r = cfg.corner_radius * d * (1.0 + 1e-9);
    let half_strip = 0.5 * cfg.edge_strip_width * d * (1.0 + 1e-9);

    // basis index -> array atom
    let atoms: Vec<(usize, usize)> = set
        .labels
        .iter()
        .enumerate()
        .filter_map(|(row, l)| match l {
            BasisLabel::Atom(a) => Some((row, *a)),
            _ => None,
        })
        .collect();
    let in_corner: Vec<[bool; 3]> = atoms
        .iter()
        .map(|&(_, a)| {
            let p = &lat.positions[a];
            let mut flags = [false; 3];
            for (c, &site) in lat.corner_sites.iter().enumerate() {
                // regions are defined on the clean-flake corner sites' current positions
                flags[c] = distance(p, &lat.positions[site]) <= corner_r;
            }
            flags
        })
        .collect();
    let in_edge: Vec<[bool; 3]> = atoms
        .iter()
        .map(|&(_, a)| {
            let p = &lat.positions[a];
            let mut flags = [false; 3];
            for (e, line) in lat.edge_lines.iter().enumerate() {
                flags[e] = line.distance(p) <= half_strip;
            }
            flags
        })
        .collect();

    for mode in set.modes.iter_mut() {
        let k = mode.index;
        let mut sub = [0.0; 3];
        let mut corner = [0.0; 3];
        let mut edge = [0.0; 3];
        for (slot, &(row, a)) in atoms.iter().enumerate() {
            let p = set.vectors[(row, k)].norm_sqr();
            sub[lat.sublattice[a].index()] += p;
            for c in 0..3 {
                if in_corner[slot][c] {
                    corner[c] += p;
                }
                if in_edge[slot][c] {
                    edge[c] += p;
                }
            }
        }
        // corner regions of small flakes may overlap the edge strips of all edges;
        // an atom counted on several edges contributes once to the strip total
        let strip_total: f64 = atoms
            .iter()
            .enumerate()
            .filter(|(slot, _)| in_edge[*slot].iter().any(|&f| f))
            .map(|(_, &(row, _))| set.vectors[(row, k)].norm_sqr())
            .sum();

        mode.sublattice_weight = sub;
        mode.corner_weight = corner;
        mode.edge_weight = edge;
        mode.class = if mode.impurity_weight > cfg.impurity_threshold {
            ModeClass::ImpurityDominated
        } else if corner.iter().sum::<f64>() > cfg.corner_threshold {
            ModeClass::Corner
        } else if strip_total > cfg.edge_threshold {
            ModeClass::Edge
        } else {
            ModeClass::Bulk
        };
    }

    set.gap = match cfg.gap {
        GapWindow::Fixed { lower, upper } => Some((lower, upper)),
        GapWindow::Auto => auto_gap(&set.modes, cfg.min_gap_fraction),
    };
    if let Some((lo, hi)) = set.gap {
        for m in set.modes.iter_mut() {
            m.in_gap = m.frequency() > lo && m.frequency() < hi;
        }
    }
    set
}

/// The bulk gap containing zero detuning, if it is wide enough.
fn auto_gap(modes: &[Mode], min_fraction: f64) -> Option<(f64, f64)> {
    let bulk: Vec<f64> = modes
        .iter()
        .filter(|m| m.class == ModeClass::Bulk)
        .map(|m| m.frequency())
        .collect();
    if bulk.len() < 2 {
        return None;
    }
    // interdecile spread: close pairs in disordered flakes push a few modes
    // far out through the near-field divergence
    let mut all: Vec<f64> = modes.iter().map(|m| m.frequency()).collect();
    all.sort_by(f64::total_cmp);
    let decile = all.len() / 10;
    let range = all[all.len() - 1 - decile] - all[decile];
    let below = bulk.iter().copied().filter(|&w| w <= 0.0).fold(f64::NEG_INFINITY, f64::max);
    let above = bulk.iter().copied().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
    if !below.is_finite() || !above.is_finite() {
        return None;
    }
    (above - below >= min_fraction * range).then_some((below, above))
}

/// Diagonalize and classify in one step.
pub fn analyze(h: &EffectiveHamiltonian, lat: &Lattice, cfg: &ClassifyConfig) -> Result<ModeSet> {
    Ok(classify_modes(diagonalize(h)?, lat, cfg))
}

/// Bare-array spectrum of a flake.
pub fn array_spectrum(spec: &LatticeSpec, pol: &Polarization, cfg: &ClassifyConfig) -> Result<(Lattice, ModeSet)> {
    let lat = build_flake(spec)?;
    let h = assemble_array(&lat, pol)?;
    let set = analyze(&h, &lat, cfg)?;
    Ok((lat, set))
}

/// Groups eigenvalues (sorted by real part) into clusters whose consecutive
/// members differ by less than `tol`.
pub fn degeneracy_pattern(values: &[c64], tol: f64) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut groups = Vec::new();
    let mut count = 0usize;
    for (i, v) in sorted.iter().enumerate() {
        if i > 0 && (v - sorted[i - 1]).norm() >= tol {
            groups.push(count);
            count = 0;
        }
        count += 1;
    }
    if count > 0 {
        groups.push(count);
    }
    groups
}

// ---------------------------------------------------------------------------
// polarization-angle sweep

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedMode {
    pub frequency: f64,
    pub gamma: f64,
    pub corner_weight: [f64; 3],
    pub sublattice_weight: [f64; 3],
    pub in_gap: bool,
}

impl TrackedMode {
    /// Ratio of the second-largest to the largest corner weight.
    pub fn mixing(&self) -> f64 {
        let mut w = self.corner_weight;
        w.sort_by(|a, b| b.total_cmp(a));
        if w[0] > 0.0 {
            w[1] / w[0]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub theta: f64,
    /// Tracked modes hosted by corners A, B, C.
    pub modes: [TrackedMode; 3],
    /// Ordering sector, e.g. `P_BCA` for `w_B > w_C > w_A`.
    pub sector: String,
    /// Corner pairs whose modes have reorganized into in-gap double-corner modes.
    pub reorganized: Vec<(usize, usize)>,
    /// Corner pairs hybridized while inside the bulk continuum.
    pub bulk_hybridized: Vec<(usize, usize)>,
    /// Fewer than three tracked modes lie inside a bulk gap.
    pub gap_flag: bool,
    pub gap: Option<(f64, f64)>,
}

impl TrackPoint {
    /// Frequency splitting of the tracked modes hosted by a corner pair.
    pub fn pair_splitting(&self, pair: (usize, usize)) -> f64 {
        (self.modes[pair.0].frequency - self.modes[pair.1].frequency).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerModeTrack {
    pub delta: f64,
    pub points: Vec<TrackPoint>,
}

/// Mixing ratio above which a tracked mode counts as double-corner.
pub const DOUBLE_CORNER_MIXING: f64 = 0.5;

const CORNER_NAMES: [char; 3] = ['A', 'B', 'C'];

/// Picks one mode per corner by greedy assignment on
/// `corner_weight[c] * sublattice_weight[c]`.
pub fn track_corner_modes(set: &ModeSet) -> [Option<&Mode>; 3] {
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    for (mi, m) in set.modes.iter().enumerate() {
        if m.class == ModeClass::ImpurityDominated {
            continue;
        }
        for c in 0..3 {
            scored.push((m.corner_weight[c] * m.sublattice_weight[c], c, mi));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: [Option<&Mode>; 3] = [None; 3];
    let mut used = vec![false; set.modes.len()];
    for (_, c, mi) in scored {
        if out[c].is_none() && !used[mi] {
            out[c] = Some(&set.modes[mi]);
            used[mi] = true;
        }
        if out.iter().all(|o| o.is_some()) {
            break;
        }
    }
    out
}

fn sector_label(freqs: [f64; 3]) -> String {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| freqs[b].total_cmp(&freqs[a]));
    format!(
        "P_{}{}{}",
        CORNER_NAMES[idx[0]], CORNER_NAMES[idx[1]], CORNER_NAMES[idx[2]]
    )
}

fn hybridized_pair(m: &TrackedMode) -> Option<(usize, usize)> {
    if m.mixing() < DOUBLE_CORNER_MIXING {
        return None;
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| m.corner_weight[b].total_cmp(&m.corner_weight[a]));
    let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
    Some((a, b))
}

fn track_point(theta: f64, lat: &Lattice, cfg: &ClassifyConfig) -> Result<TrackPoint> {
    let h = assemble_array(lat, &Polarization::in_plane(theta))?;
    let set = analyze(&h, lat, cfg)?;
    let picked = track_corner_modes(&set);
    let mut modes = [TrackedMode {
        frequency: f64::NAN,
        gamma: f64::NAN,
        corner_weight: [0.0; 3],
        sublattice_weight: [0.0; 3],
        in_gap: false,
    }; 3];
    for (c, m) in picked.iter().enumerate() {
        if let Some(m) = m {
            modes[c] = TrackedMode {
                frequency: m.frequency(),
                gamma: m.gamma(),
                corner_weight: m.corner_weight,
                sublattice_weight: m.sublattice_weight,
                in_gap: m.in_gap,
            };
        }
    }
    let mut reorganized = Vec::new();
    let mut bulk_hybridized = Vec::new();
    for m in &modes {
        if let Some(pair) = hybridized_pair(m) {
            let partner_in_gap = modes
                .iter()
                .filter(|o| hybridized_pair(o) == Some(pair))
                .all(|o| o.in_gap);
            let list = if m.in_gap && partner_in_gap {
                &mut reorganized
            } else {
                &mut bulk_hybridized
            };
            if !list.contains(&pair) {
                list.push(pair);
            }
        }
    }
    Ok(TrackPoint {
        theta,
        sector: sector_label([modes[0].frequency, modes[1].frequency, modes[2].frequency]),
        gap_flag: modes.iter().any(|m| !m.in_gap),
        modes,
        reorganized,
        bulk_hybridized,
        gap: set.gap,
    })
}

/// Tracks the three corner modes over in-plane polarization angles.
pub fn sweep_theta(lat: &Lattice, thetas: &[f64], cfg: &ClassifyConfig) -> Result<CornerModeTrack> {
    let points = thetas
        .par_iter()
        .map(|&t| track_point(t, lat, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(CornerModeTrack {
        delta: lat.spec.delta,
        points,
    })
}

/// `n >= 2` equally spaced angles covering `[0, pi]`, both ends included so
/// the period can be checked.
pub fn theta_grid(n: usize) -> Vec<f64> {
    let steps = n.max(2) - 1;
    (0..=steps).map(|i| PI * i as f64 / steps as f64).collect()
}

impl CornerModeTrack {
    pub fn frequencies(&self, corner: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.modes[corner].frequency).collect()
    }

    /// Points covering one period: a closing point at `theta_0 + pi` is
    /// dropped. Assumes a uniform grid.
    pub fn period(&self) -> &[TrackPoint] {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) if self.points.len() > 1 && (b.theta - a.theta - PI).abs() < 1e-9 => {
                &self.points[..self.points.len() - 1]
            }
            _ => &self.points,
        }
    }

    /// Largest frequency difference between the closing point and the first
    /// point, if the grid includes both ends of the period.
    pub fn period_mismatch(&self) -> Option<f64> {
        if self.period().len() == self.points.len() {
            return None;
        }
        let (a, b) = (self.points.first()?, self.points.last()?);
        Some(
            (0..3)
                .map(|c| (a.modes[c].frequency - b.modes[c].frequency).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Centres of contiguous runs of in-gap reorganizations, in `[0, pi)`.
    pub fn reorganization_angles(&self) -> Vec<(f64, (usize, usize))> {
        runs(self.period(), |p| &p.reorganized)
    }

    pub fn bulk_hybridization_angles(&self) -> Vec<(f64, (usize, usize))> {
        runs(self.period(), |p| &p.bulk_hybridized)
    }

    /// Shift `s` (radians, in `(-pi/2, pi/2]`) minimising
    /// `sum |w_from(theta + s) - w_to(theta)|^2` over the periodic grid.
    pub fn relative_shift(&self, from: usize, to: usize) -> Option<f64> {
        let points = self.period();
        let n = points.len();
        if n == 0 {
            return None;
        }
        let a: Vec<f64> = points.iter().map(|p| p.modes[from].frequency).collect();
        let b: Vec<f64> = points.iter().map(|p| p.modes[to].frequency).collect();
        let step = PI / n as f64;
        let mut best: Option<(f64, i64)> = None;
        for s in 0..n as i64 {
            let mut acc = 0.0;
            let mut used = 0usize;
            for i in 0..n {
                let j = (i as i64 + s).rem_euclid(n as i64) as usize;
                if a[j].is_finite() && b[i].is_finite() {
                    acc += (a[j] - b[i]).powi(2);
                    used += 1;
                }
            }
            if used == 0 {
                continue;
            }
            let score = acc / used as f64;
            if best.is_none_or(|(v, _)| score < v) {
                best = Some((score, s));
            }
        }
        let (_, s) = best?;
        let mut shift = s as f64 * step;
        if shift > PI / 2.0 {
            shift -= PI;
        }
        Some(shift)
    }
}

fn runs<F>(points: &[TrackPoint], get: F) -> Vec<(f64, (usize, usize))>
where
    F: Fn(&TrackPoint) -> &Vec<(usize, usize)>,
{
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let step = PI / n as f64;
    let mut pairs: Vec<(usize, usize)> = points.iter().flat_map(|p| get(p).iter().copied()).collect();
    pairs.sort();
    pairs.dedup();
    let mut out = Vec::new();
    for pair in pairs {
        let on: Vec<bool> = points.iter().map(|p| get(p).contains(&pair)).collect();
        if on.iter().all(|&b| b) {
            continue;
        }
        // start scanning just after an "off" slot so that runs crossing the
        // period boundary stay contiguous
        let start = on.iter().position(|&b| !b).unwrap();
        let mut i = 0;
        while i < n {
            let idx = (start + i) % n;
            if on[idx] {
                let first = start + i;
                let mut len = 0;
                while i < n && on[(start + i) % n] {
                    len += 1;
                    i += 1;
                }
                let centre = points[0].theta + (first as f64 + (len as f64 - 1.0) / 2.0) * step;
                out.push((centre.rem_euclid(PI), pair));
            } else {
                i += 1;
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

// ---------------------------------------------------------------------------
// imbalance sweep

/// Edge-weight pattern of an edge mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeFamily {
    /// Full edge: all three edges populated.
    F,
    /// Two edges, indices ascending.
    T(usize, usize),
    /// A single edge.
    E(usize),
}

impl std::fmt::Display for EdgeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeFamily::F => f.write_str("F"),
            EdgeFamily::T(a, b) => write!(f, "T{}{}", a + 1, b + 1),
            EdgeFamily::E(a) => write!(f, "E{}", a + 1),
        }
    }
}

/// Single-edge share above which a mode counts as single-edge.
pub const SINGLE_EDGE_SHARE: f64 = 0.7;
/// Minimum share each edge needs for a full-edge mode.
pub const FULL_EDGE_SHARE: f64 = 0.2;

pub fn edge_family(m: &Mode) -> Option<EdgeFamily> {
    if m.class != ModeClass::Edge {
        return None;
    }
    let total: f64 = m.edge_weight.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let share = m.edge_weight.map(|w| w / total);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| share[b].total_cmp(&share[a]));
    Some(if share[idx[0]] > SINGLE_EDGE_SHARE {
        EdgeFamily::E(idx[0])
    } else if share[idx[2]] >= FULL_EDGE_SHARE {
        EdgeFamily::F
    } else {
        EdgeFamily::T(idx[0].min(idx[1]), idx[0].max(idx[1]))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub mode: usize,
    pub frequency: f64,
    pub gamma: f64,
    pub ipr: f64,
    pub class: ModeClass,
    pub in_gap: bool,
    pub family: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DeltaSlice {
    pub delta: f64,
    pub lattice: Lattice,
    pub modes: ModeSet,
}

impl DeltaSlice {
    pub fn rows(&self) -> Vec<DeltaRow> {
        self.modes
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| DeltaRow {
                delta: self.delta,
                mode: i,
                frequency: m.frequency(),
                gamma: m.gamma(),
                ipr: m.ipr,
                class: m.class,
                in_gap: m.in_gap,
                family: edge_family(m).map(|f| f.to_string()),
            })
            .collect()
    }

    pub fn families(&self) -> Vec<EdgeFamily> {
        let mut out: Vec<EdgeFamily> = self.modes.modes.iter().filter_map(edge_family).collect();
        out.sort_by_key(|f| f.to_string());
        out.dedup();
        out
    }
}

/// Spectra over a grid of spacing imbalances.
pub fn sweep_delta(
    base: &LatticeSpec,
    deltas: &[f64],
    pol: &Polarization,
    cfg: &ClassifyConfig,
) -> Result<Vec<DeltaSlice>> {
    for &d in deltas {
        if !(d > -1.0 && d < 1.0) {
            return Err(Error::Constraint(format!("imbalance {d} outside (-1, 1)")));
        }
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let spec = LatticeSpec { delta, ..*base };
            let (lattice, modes) = array_spectrum(&spec, pol, cfg)?;
            Ok(DeltaSlice {
                delta,
                lattice,
                modes,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// disorder ensembles

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationOutcome {
    pub kappa: f64,
    pub realization: usize,
    pub seed: u64,
    /// Isolated in-gap corner modes; `None` if the realization was skipped
    /// (near-coincident atoms).
    pub corner_modes: Option<usize>,
}

impl RealizationOutcome {
    pub fn survived(&self) -> Option<bool> {
        self.corner_modes.map(|c| c >= 3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    pub kappa: f64,
    pub survived: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub survival_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub outcomes: Vec<RealizationOutcome>,
    pub summary: Vec<KappaSummary>,
    /// Interpolated strength where survival first drops below one half.
    pub critical_kappa: Option<f64>,
}

/// Derives an independent per-job seed.
pub fn job_seed(seed: u64, kappa_index: usize, realization: usize) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(1 + kappa_index as u64))
        .wrapping_add((realization as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn disorder_ensemble(
    spec: &LatticeSpec,
    pol: &Polarization,
    kappas: &[f64],
    realizations: usize,
    seed: u64,
    cfg: &ClassifyConfig,
) -> Result<RobustnessTable> {
    if realizations == 0 {
        return Err(Error::Constraint("need at least one disorder realization".into()));
    }
    if kappas.iter().any(|&k| !(k >= 0.0)) {
        return Err(Error::Constraint("disorder strengths must be non-negative".into()));
    }
    let clean = build_flake(spec)?;
    let jobs: Vec<(usize, usize)> = (0..kappas.len())
        .flat_map(|ki| (0..realizations).map(move |r| (ki, r)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(ki, r)| {
            let kappa = kappas[ki];
            let s = job_seed(seed, ki, r);
            let lat = clean.apply_disorder(kappa, s)?;
            let count = match assemble_array(&lat, pol) {
                Ok(h) => Some(analyze(&h, &lat, cfg)?.isolated_corner_modes().len()),
                Err(Error::Coincident { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(RealizationOutcome {
                kappa,
                realization: r,
                seed: s,
                corner_modes: count,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary: Vec<KappaSummary> = kappas
        .iter()
        .enumerate()
        .map(|(ki, &kappa)| {
            let rows = &outcomes[ki * realizations..(ki + 1) * realizations];
            let evaluated = rows.iter().filter(|o| o.corner_modes.is_some()).count();
            let survived = rows.iter().filter(|o| o.survived() == Some(true)).count();
            KappaSummary {
                kappa,
                survived,
                evaluated,
                skipped: realizations - evaluated,
                survival_fraction: if evaluated > 0 {
                    survived as f64 / evaluated as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    let critical_kappa = critical_strength(&summary);
    Ok(RobustnessTable {
        outcomes,
        summary,
        critical_kappa,
    })
}

/// First crossing of the survival fraction below 1/2, linearly interpolated.
pub fn critical_strength(summary: &[KappaSummary]) -> Option<f64> {
    for (i, s) in summary.iter().enumerate() {
        if s.survival_fraction < 0.5 {
            if i == 0 {
                return Some(s.kappa);
            }
            let prev = &summary[i - 1];
            let (f0, f1) = (prev.survival_fraction, s.survival_fraction);
            let t = (f0 - 0.5) / (f0 - f1);
            return Some(prev.kappa + t * (s.kappa - prev.kappa));
        }
    }
    None
}
