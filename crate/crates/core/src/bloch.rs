//! Bloch Hamiltonian of the infinite breathing-kagome array by real-space
//! lattice summation under a flat-top truncation window.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticeSpec;
use crate::greens::{CouplingKernel, Polarization};
use crate::linalg::{eig, CMat};

/// Smallest accepted truncation radius, in units of `d`.
pub const MIN_SUM_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochConfig {
    /// Truncation radius in units of `d`.
    pub sum_radius: f64,
    /// Fraction of the radius covered by the taper.
    pub taper_fraction: f64,
    pub window: Window,
}

/// Shape of the truncation window over its transition region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `(1 + cos(pi t)) / 2`; continuous first derivative.
    RaisedCosine,
    /// `1 / (1 + exp(1/(1-t) - 1/t))`; smooth to all orders.
    Planck,
}

impl Default for BlochConfig {
    fn default() -> Self {
        Self {
            sum_radius: 400.0,
            taper_fraction: 0.95,
            window: Window::Planck,
        }
    }
}

impl BlochConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sum_radius >= MIN_SUM_RADIUS) {
            return Err(Error::Convergence(format!(
                "sum radius {}d is below the minimum {}d",
                self.sum_radius, MIN_SUM_RADIUS
            )));
        }
        if !(0.0..1.0).contains(&self.taper_fraction) {
            return Err(Error::Constraint(format!(
                "taper fraction {} outside [0, 1)",
                self.taper_fraction
            )));
        }
        Ok(())
    }
}

fn taper(r: f64, radius: f64, fraction: f64, window: Window) -> f64 {
    let start = radius * (1.0 - fraction);
    if r <= start {
        return 1.0;
    }
    if r >= radius {
        return 0.0;
    }
    let t = (r - start) / (radius - start);
    match window {
        Window::RaisedCosine => 0.5 * (1.0 + (PI * t).cos()),
        Window::Planck => {
            let e = 1.0 / (1.0 - t) - 1.0 / t;
            if e > 700.0 {
                0.0
            } else {
                1.0 / (1.0 + e.exp())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochHamiltonian {
    pub k: [f64; 2],
    pub matrix: [[c64; 3]; 3],
    pub sum_radius: f64,
    pub taper_fraction: f64,
}

impl BlochHamiltonian {
    pub fn to_mat(&self) -> CMat {
        CMat::from_fn(3, 3, |i, j| self.matrix[i][j])
    }

    /// Eigenvalues sorted by real part.
    pub fn eigenvalues(&self) -> Result<[c64; 3]> {
        let mut v = eig(&self.to_mat())?.values;
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok([v[0], v[1], v[2]])
    }
}

/// One row of lattice vectors `n1 a1 + n2 a2` with consecutive `n1`.
#[derive(Debug, Clone)]
struct Row {
    n1_start: i64,
    n2: i64,
    coeffs: Vec<c64>,
}

/// Windowed couplings `w(|r|) g(r)` for `r = s_a - s_b - R`, precomputed
/// once per lattice and polarization. Only pairs `a <= b` are stored; the
/// lower triangle follows from `g(r) = g(-r)`.
#[derive(Debug, Clone)]
pub struct LatticeSum {
    pub spec: LatticeSpec,
    pub config: BlochConfig,
    terms: Vec<((usize, usize), Vec<Row>)>,
}

impl LatticeSum {
    pub fn new(spec: &LatticeSpec, pol: &Polarization, config: BlochConfig) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        let d = spec.d;
        let radius = config.sum_radius * d;
        let [a1, a2] = spec.bravais();
        let offsets = spec.sublattice_offsets();
        let kernel = CouplingKernel::new(spec.k0());
        let nmax = (radius / (d * 3f64.sqrt() / 2.0)).ceil() as i64 + 2;
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|a| (a..3).map(move |b| (a, b))).collect();
        let terms = pairs
            .par_iter()
            .map(|&(a, b)| {
                let dab = [offsets[a][0] - offsets[b][0], offsets[a][1] - offsets[b][1]];
                let mut rows = Vec::new();
                for n2 in -nmax..=nmax {
                    let mut row: Option<Row> = None;
                    for n1 in -nmax..=nmax {
                        let rv = [
                            n1 as f64 * a1[0] + n2 as f64 * a2[0],
                            n1 as f64 * a1[1] + n2 as f64 * a2[1],
                        ];
                        let sep = [dab[0] - rv[0], dab[1] - rv[1], 0.0];
                        let dist = sep[0].hypot(sep[1]);
                        let w = if a == b && n1 == 0 && n2 == 0 {
                            0.0
                        } else {
                            taper(dist, radius, config.taper_fraction, config.window)
                        };
                        let c = if w == 0.0 {
                            c64::ZERO
                        } else {
                            kernel.coupling_at(&sep, pol, pol)? * w
                        };
                        match row.as_mut() {
                            Some(r) => r.coeffs.push(c),
                            None if w != 0.0 => {
                                row = Some(Row {
                                    n1_start: n1,
                                    n2,
                                    coeffs: vec![c],
                                })
                            }
                            None => {}
                        }
                    }
                    if let Some(mut r) = row {
                        while r.coeffs.last() == Some(&c64::ZERO) {
                            r.coeffs.pop();
                        }
                        rows.push(r);
                    }
                }
                Ok(((a, b), rows))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: *spec,
            config,
            terms,
        })
    }

    pub fn term_count(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(_, rows)| rows.iter())
            .map(|r| r.coeffs.len())
            .sum()
    }

    /// `H_ab(k) = sum_R w g(s_a - s_b - R) e^{i k.R} - (i/2) delta_ab`.
    pub fn matrix(&self, k: [f64; 2]) -> BlochHamiltonian {
        let [a1, a2] = self.spec.bravais();
        let step = c64::cis(k[0] * a1[0] + k[1] * a1[1]);
        let ka2 = k[0] * a2[0] + k[1] * a2[1];
        let ka1 = k[0] * a1[0] + k[1] * a1[1];
        let mut m = [[c64::ZERO; 3]; 3];
        for ((a, b), rows) in &self.terms {
            // forward: sum c e^{ikR}; backward: sum c e^{-ikR}
            let mut fwd = c64::ZERO;
            let mut bwd = c64::ZERO;
            for row in rows {
                let mut ph = c64::cis(row.n1_start as f64 * ka1 + row.n2 as f64 * ka2);
                for c in &row.coeffs {
                    fwd += c * ph;
                    bwd += c * ph.conj();
                    ph *= step;
                }
            }
            m[*a][*b] = fwd;
            if a != b {
                m[*b][*a] = bwd;
            }
        }
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= c64::new(0.0, 0.5);
        }
        BlochHamiltonian {
            k,
            matrix: m,
            sum_radius: self.config.sum_radius,
            taper_fraction: self.config.taper_fraction,
        }
    }
}

pub fn bloch_matrix(
    spec: &LatticeSpec,
    pol: &Polarization,
    k: [f64; 2],
    config: BlochConfig,
) -> Result<BlochHamiltonian> {
    Ok(LatticeSum::new(spec, pol, config)?.matrix(k))
}

/// High-symmetry points of the hexagonal Brillouin zone.
pub fn gamma_point() -> [f64; 2] {
    [0.0, 0.0]
}

pub fn k_point(spec: &LatticeSpec) -> [f64; 2] {
    [4.0 * PI / (3.0 * spec.d), 0.0]
}

/// Zone-edge midpoint adjacent to [`k_point`].
pub fn m_point(spec: &LatticeSpec) -> [f64; 2] {
    [PI / spec.d, PI / (3f64.sqrt() * spec.d)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPathPoint {
    pub k: [f64; 2],
    /// Cumulative path length.
    pub s: f64,
}

/// Piecewise-linear path through `corners`, `per_segment` points per leg,
/// closing point included.
pub fn k_path(corners: &[[f64; 2]], per_segment: usize) -> Vec<KPathPoint> {
    let mut out = Vec::new();
    let mut s = 0.0;
    for w in corners.windows(2) {
        let (p, q) = (w[0], w[1]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        for i in 0..per_segment {
            let t = i as f64 / per_segment as f64;
            out.push(KPathPoint {
                k: [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])],
                s: s + t * len,
            });
        }
        s += len;
    }
    if let Some(last) = corners.last() {
        out.push(KPathPoint { k: *last, s });
    }
    out
}

/// Gamma -> K -> M -> Gamma.
pub fn standard_path(spec: &LatticeSpec, per_segment: usize) -> Vec<KPathPoint> {
    k_path(
        &[gamma_point(), k_point(spec), m_point(spec), gamma_point()],
        per_segment,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub k: [f64; 2],
    pub s: f64,
    /// `(omega_k - omega_0) / Gamma_0`, ascending.
    pub omega: [f64; 3],
    /// `gamma_k / Gamma_0 = -Im(eigenvalue)`.
    pub gamma: [f64; 3],
    pub in_light_cone: bool,
}

pub fn band_point(sum: &LatticeSum, p: &KPathPoint) -> Result<BandPoint> {
    let ev = sum.matrix(p.k).eigenvalues()?;
    let k0 = sum.spec.k0();
    Ok(BandPoint {
        k: p.k,
        s: p.s,
        omega: ev.map(|z| z.re),
        gamma: ev.map(|z| -z.im),
        in_light_cone: p.k[0].hypot(p.k[1]) < k0,
    })
}

pub fn band_structure(sum: &LatticeSum, path: &[KPathPoint]) -> Result<Vec<BandPoint>> {
    path.par_iter().map(|p| band_point(sum, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub radius: f64,
    pub doubled_radius: f64,
    /// Largest eigenvalue change for `|k| > 1.2 k0`.
    pub max_change_outside: f64,
    /// Largest eigenvalue change inside the light cone (flagged, not trusted).
    pub max_change_inside: f64,
    pub tolerance_outside: f64,
    pub tolerance_inside: f64,
    pub passed: bool,
    pub inside_flagged: bool,
}

/// Tolerances used by [`convergence_report`].
pub const CONVERGENCE_TOL_OUTSIDE: f64 = 1e-3;
pub const CONVERGENCE_TOL_INSIDE: f64 = 0.1;

/// Self-convergence oracle: recompute `points` at twice the radius.
pub fn convergence_report(
    spec: &LatticeSpec,
    pol: &Polarization,
    config: BlochConfig,
    points: &[KPathPoint],
) -> Result<ConvergenceReport> {
    let base = LatticeSum::new(spec, pol, config)?;
    let doubled = LatticeSum::new(
        spec,
        pol,
        BlochConfig {
            sum_radius: 2.0 * config.sum_radius,
            ..config
        },
    )?;
    let k0 = spec.k0();
    let changes = points
        .par_iter()
        .map(|p| {
            let a = base.matrix(p.k).eigenvalues()?;
            let b = doubled.matrix(p.k).eigenvalues()?;
            let change = (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max);
            Ok((p.k[0].hypot(p.k[1]), change))
        })
        .collect::<Result<Vec<_>>>()?;
    let outside = changes
        .iter()
        .filter(|(k, _)| *k > 1.2 * k0)
        .map(|c| c.1)
        .fold(0.0, f64::max);
    let inside = changes
        .iter()
        .filter(|(k, _)| *k <= 1.2 * k0)
        .map(|c| c.1)
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        radius: config.sum_radius,
        doubled_radius: 2.0 * config.sum_radius,
        max_change_outside: outside,
        max_change_inside: inside,
        tolerance_outside: CONVERGENCE_TOL_OUTSIDE,
        tolerance_inside: CONVERGENCE_TOL_INSIDE,
        passed: outside < CONVERGENCE_TOL_OUTSIDE,
        inside_flagged: inside >= CONVERGENCE_TOL_INSIDE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCheck {
    pub band: usize,
    pub k: [f64; 2],
    pub omega: f64,
    pub hessian_eigenvalues: [f64; 2],
    pub is_saddle: bool,
}

/// Finite-difference Hessian of `Re omega_band(k)` at `k`.
pub fn hessian_check(sum: &LatticeSum, band: usize, k: [f64; 2], step: f64) -> Result<SaddleCheck> {
    let f = |dx: f64, dy: f64| -> Result<f64> {
        Ok(sum.matrix([k[0] + dx, k[1] + dy]).eigenvalues()?[band].re)
    };
    let h = step;
    let f0 = f(0.0, 0.0)?;
    let fxx = (f(h, 0.0)? - 2.0 * f0 + f(-h, 0.0)?) / (h * h);
    let fyy = (f(0.0, h)? - 2.0 * f0 + f(0.0, -h)?) / (h * h);
    let fxy = (f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h);
    let mean = 0.5 * (fxx + fyy);
    let rad = (0.25 * (fxx - fyy).powi(2) + fxy * fxy).sqrt();
    let ev = [mean - rad, mean + rad];
    Ok(SaddleCheck {
        band,
        k,
        omega: f0,
        hessian_eigenvalues: ev,
        is_saddle: ev[0] < 0.0 && ev[1] > 0.0,
    })
}
