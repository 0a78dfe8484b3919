//! Triangular breathing-Kagome flakes.
//!
//! A flake of side `L` holds `L(L+1)/2` upward unit triangles. Cell `(n1, n2)`
//! sits at `n1*a1 + n2*a2` with `n1, n2 >= 0` and `n1 + n2 <= L - 1`, where
//! `a1 = d(1, 0)` and `a2 = d(1/2, sqrt(3)/2)`. Inside a cell, sublattice A is
//! the top vertex, B the lower-left and C the lower-right vertex, all at
//! mutual distance `R_a`. The three flake corners are therefore A (top),
//! B (lower left) and C (lower right).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Parameters of a triangular breathing-Kagome flake. Lengths share the unit
/// of `lambda0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Intercell spacing `d = R_a + R_b`.
    pub d: f64,
    /// Spacing imbalance, `R_a = (1 + delta) d / 2`.
    pub delta: f64,
    pub cells_per_side: usize,
    pub lambda0: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            d: 0.1,
            delta: 0.0,
            cells_per_side: 10,
            lambda0: 1.0,
        }
    }
}

impl LatticeSpec {
    pub fn new(d: f64, delta: f64, cells_per_side: usize) -> Result<Self> {
        let spec = Self {
            d,
            delta,
            cells_per_side,
            lambda0: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > -1.0 && self.delta < 1.0) {
            return Err(Error::Constraint(format!(
                "spacing imbalance must lie in (-1, 1), got {}",
                self.delta
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Constraint(format!(
                "intercell spacing must be positive, got {}",
                self.d
            )));
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return Err(Error::Constraint(format!(
                "wavelength must be positive, got {}",
                self.lambda0
            )));
        }
        if self.cells_per_side < 2 {
            return Err(Error::Constraint(format!(
                "cells_per_side must be at least 2, got {}",
                self.cells_per_side
            )));
        }
        Ok(())
    }

    /// Intracell spacing `R_a`.
    pub fn r_a(&self) -> f64 {
        (1.0 + self.delta) * self.d / 2.0
    }

    /// Nearest-neighbour distance between adjacent cells, `R_b = d - R_a`.
    pub fn r_b(&self) -> f64 {
        self.d - self.r_a()
    }

    pub fn k0(&self) -> f64 {
        TAU / self.lambda0
    }

    pub fn atom_count(&self) -> usize {
        let l = self.cells_per_side;
        3 * l * (l + 1) / 2
    }

    /// Primitive vectors of the underlying triangular Bravais lattice.
    pub fn bravais(&self) -> [[f64; 2]; 2] {
        [[self.d, 0.0], [self.d / 2.0, self.d * SQRT3 / 2.0]]
    }

    /// In-plane offsets of the A, B, C sites from their cell centre.
    pub fn sublattice_offsets(&self) -> [[f64; 2]; 3] {
        let rho = self.r_a() / SQRT3;
        let at = |angle: f64| [rho * angle.cos(), rho * angle.sin()];
        [
            at(FRAC_PI_2),
            at(7.0 * PI / 6.0),
            at(11.0 * PI / 6.0),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
    C,
}

impl Sublattice {
    pub const ALL: [Sublattice; 3] = [Sublattice::A, Sublattice::B, Sublattice::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sublattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sublattice::A => "A",
            Sublattice::B => "B",
            Sublattice::C => "C",
        };
        f.write_str(s)
    }
}

/// Straight line through the outermost atoms of one flake edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLine {
    pub origin: [f64; 2],
    pub direction: [f64; 2],
}

impl EdgeLine {
    pub fn distance(&self, p: &Point) -> f64 {
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        (dx * self.direction[1] - dy * self.direction[0]).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub spec: LatticeSpec,
    pub positions: Vec<Point>,
    pub sublattice: Vec<Sublattice>,
    pub cell_index: Vec<usize>,
    /// Lattice coordinates `(n1, n2)` of every cell.
    pub cells: Vec<(usize, usize)>,
    /// Corner atoms hosted by sublattices A (top), B (lower left), C (lower right).
    pub corner_sites: [usize; 3],
    /// Atoms on edges a1 (bottom, along 0), a2 (left, along pi/3) and
    /// a3 (right, along 2pi/3).
    pub edge_sets: [Vec<usize>; 3],
    pub edge_lines: [EdgeLine; 3],
    pub bravais: [[f64; 2]; 2],
    /// Centroid of the clean flake.
    pub centroid: [f64; 2],
}

/// Builds the triangular flake described by `spec`.
pub fn build_flake(spec: &LatticeSpec) -> Result<Lattice> {
    spec.validate()?;
    let l = spec.cells_per_side;
    let bravais = spec.bravais();
    let offsets = spec.sublattice_offsets();

    let mut cells = Vec::with_capacity(l * (l + 1) / 2);
    for n2 in 0..l {
        for n1 in 0..(l - n2) {
            cells.push((n1, n2));
        }
    }

    let n = 3 * cells.len();
    let mut positions = Vec::with_capacity(n);
    let mut sublattice = Vec::with_capacity(n);
    let mut cell_index = Vec::with_capacity(n);
    let mut corner_sites = [0usize; 3];
    let mut edge_sets: [Vec<usize>; 3] = Default::default();

    for (ci, &(n1, n2)) in cells.iter().enumerate() {
        let centre = cell_centre(&bravais, n1, n2);
        for s in Sublattice::ALL {
            let idx = positions.len();
            let off = offsets[s.index()];
            positions.push([centre[0] + off[0], centre[1] + off[1], 0.0]);
            sublattice.push(s);
            cell_index.push(ci);

            match (s, n1, n2) {
                (Sublattice::A, 0, _) if n2 == l - 1 => corner_sites[0] = idx,
                (Sublattice::B, 0, 0) => corner_sites[1] = idx,
                (Sublattice::C, _, 0) if n1 == l - 1 => corner_sites[2] = idx,
                _ => {}
            }
            if n2 == 0 && s != Sublattice::A {
                edge_sets[0].push(idx);
            }
            if n1 == 0 && s != Sublattice::C {
                edge_sets[1].push(idx);
            }
            if n1 + n2 == l - 1 && s != Sublattice::B {
                edge_sets[2].push(idx);
            }
        }
    }

    let b0 = positions[corner_sites[1]];
    let c0 = positions[corner_sites[2]];
    let edge_lines = [
        EdgeLine {
            origin: [b0[0], b0[1]],
            direction: [1.0, 0.0],
        },
        EdgeLine {
            origin: [b0[0], b0[1]],
            direction: [0.5, SQRT3 / 2.0],
        },
        EdgeLine {
            origin: [c0[0], c0[1]],
            direction: [-0.5, SQRT3 / 2.0],
        },
    ];

    let inv = 1.0 / n as f64;
    let centroid = positions.iter().fold([0.0, 0.0], |acc, p| {
        [acc[0] + p[0] * inv, acc[1] + p[1] * inv]
    });

    Ok(Lattice {
        spec: *spec,
        positions,
        sublattice,
        cell_index,
        cells,
        corner_sites,
        edge_sets,
        edge_lines,
        bravais,
        centroid,
    })
}

fn cell_centre(bravais: &[[f64; 2]; 2], n1: usize, n2: usize) -> [f64; 2] {
    let (n1, n2) = (n1 as f64, n2 as f64);
    [
        n1 * bravais[0][0] + n2 * bravais[1][0],
        n1 * bravais[0][1] + n2 * bravais[1][1],
    ]
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn cell_centre(&self, cell: usize) -> [f64; 2] {
        let (n1, n2) = self.cells[cell];
        cell_centre(&self.bravais, n1, n2)
    }

    /// Smallest pairwise distance, or `None` for fewer than two atoms.
    pub fn min_pair_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let r = distance(&self.positions[i], &self.positions[j]);
                best = Some(best.map_or(r, |b: f64| b.min(r)));
            }
        }
        best
    }

    /// Centres of all complete hexagonal plaquettes. A plaquette is bounded by
    /// cells `(n1, n2)`, `(n1 + 1, n2)` and `(n1, n2 + 1)`.
    pub fn hexagon_centres(&self) -> Vec<([f64; 2], (usize, usize))> {
        let l = self.spec.cells_per_side;
        let shift = [
            (self.bravais[0][0] + self.bravais[1][0]) / 3.0,
            (self.bravais[0][1] + self.bravais[1][1]) / 3.0,
        ];
        let mut out = Vec::new();
        for n2 in 0..l.saturating_sub(1) {
            for n1 in 0..(l - 1 - n2) {
                let c = cell_centre(&self.bravais, n1, n2);
                out.push(([c[0] + shift[0], c[1] + shift[1]], (n1, n2)));
            }
        }
        out
    }

    /// The hexagonal plaquette nearest the flake centroid. Ties are broken
    /// first towards the vertical mirror axis, then towards lower `y`.
    pub fn central_hexagon(&self) -> Result<([f64; 2], (usize, usize))> {
        if self.spec.cells_per_side < 3 {
            return Err(Error::Geometry(format!(
                "a central hexagon needs cells_per_side >= 3, got {}",
                self.spec.cells_per_side
            )));
        }
        let c = self.centroid;
        let tol = 1e-9 * self.spec.d;
        self.hexagon_centres()
            .into_iter()
            .min_by(|(p, _), (q, _)| {
                let dp = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                let dq = ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt();
                if (dp - dq).abs() > tol {
                    return dp.total_cmp(&dq);
                }
                let xp = (p[0] - c[0]).abs();
                let xq = (q[0] - c[0]).abs();
                if (xp - xq).abs() > tol {
                    return xp.total_cmp(&xq);
                }
                p[1].total_cmp(&q[1])
            })
            .ok_or_else(|| Error::Geometry("flake has no hexagonal plaquette".into()))
    }

    /// Indices of the six atoms bounding the hexagon whose lower-left cell is `base`.
    pub fn hexagon_atoms(&self, base: (usize, usize)) -> Vec<usize> {
        let (n1, n2) = base;
        let want = [
            ((n1, n2), Sublattice::A),
            ((n1, n2), Sublattice::C),
            ((n1 + 1, n2), Sublattice::A),
            ((n1 + 1, n2), Sublattice::B),
            ((n1, n2 + 1), Sublattice::B),
            ((n1, n2 + 1), Sublattice::C),
        ];
        want.iter()
            .filter_map(|&(cell, s)| {
                let ci = self.cells.iter().position(|&c| c == cell)?;
                Some(3 * ci + s.index())
            })
            .collect()
    }

    /// Returns a copy with every atom shifted in-plane by `kappa * R_a` in an
    /// independent uniformly random direction.
    pub fn apply_disorder(&self, kappa: f64, seed: u64) -> Result<Lattice> {
        let realization = DisorderRealization::sample(self.len(), kappa, self.spec.r_a(), seed)?;
        Ok(self.displaced(&realization))
    }

    pub fn displaced(&self, realization: &DisorderRealization) -> Lattice {
        let mut out = self.clone();
        for (p, dp) in out.positions.iter_mut().zip(&realization.displacements) {
            p[0] += dp[0];
            p[1] += dp[1];
        }
        out
    }

    /// Positions rotated by `angle` about the flake centroid.
    pub fn rotated_positions(&self, angle: f64) -> Vec<Point> {
        let (s, c) = angle.sin_cos();
        let o = self.centroid;
        self.positions
            .iter()
            .map(|p| {
                let x = p[0] - o[0];
                let y = p[1] - o[1];
                [o[0] + c * x - s * y, o[1] + s * x + c * y, p[2]]
            })
            .collect()
    }
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub displacements: Vec<[f64; 2]>,
    pub kappa: f64,
    pub seed: u64,
}

impl DisorderRealization {
    pub fn sample(n: usize, kappa: f64, r_a: f64, seed: u64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Constraint(format!(
                "disorder strength must be non-negative, got {kappa}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = kappa * r_a;
        let displacements = (0..n)
            .map(|_| {
                let phi = rng.random::<f64>() * TAU;
                [shift * phi.cos(), shift * phi.sin()]
            })
            .collect();
        Ok(Self {
            displacements,
            kappa,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    CentralHexagon,
    AdjacentCell,
    TopCornerSite,
}

impl std::str::FromStr for Anchor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central_hexagon" => Ok(Anchor::CentralHexagon),
            "adjacent_cell" => Ok(Anchor::AdjacentCell),
            "top_corner_site" => Ok(Anchor::TopCornerSite),
            other => Err(Error::Config(format!("unknown impurity anchor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityPlacement {
    pub position: Point,
    /// Height above the array plane, same length unit as the lattice.
    pub height: f64,
    pub anchor: Anchor,
}

/// Places an impurity at height `z` above the chosen anchor.
///
/// `AdjacentCell` picks, among the three unit cells bordering the central
/// hexagon, the one nearest the flake centroid.
pub fn place_impurity(lat: &Lattice, anchor: Anchor, z: f64) -> Result<ImpurityPlacement> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Constraint(format!(
            "impurity height must be positive, got {z}"
        )));
    }
    let xy = match anchor {
        Anchor::CentralHexagon => lat.central_hexagon()?.0,
        Anchor::AdjacentCell => {
            let (_, (n1, n2)) = lat.central_hexagon()?;
            let c = lat.centroid;
            [(n1, n2), (n1 + 1, n2), (n1, n2 + 1)]
                .iter()
                .map(|&(a, b)| cell_centre(&lat.bravais, a, b))
                .min_by(|p, q| {
                    let dp = (p[0] - c[0]).hypot(p[1] - c[1]);
                    let dq = (q[0] - c[0]).hypot(q[1] - c[1]);
                    dp.total_cmp(&dq)
                })
                .expect("three candidate cells")
        }
        Anchor::TopCornerSite => {
            let p = lat.positions[lat.corner_sites[0]];
            [p[0], p[1]]
        }
    };
    Ok(ImpurityPlacement {
        position: [xy[0], xy[1], z],
        height: z,
        anchor,
    })
}
