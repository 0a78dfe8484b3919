//! Free-space dyadic Green's tensor and the dimensionless dipole couplings
//! built from it.
//!
//! ```text
//! G(r) = e^{ikr}/(4 pi r) [ (1 + i/(kr) - 1/(kr)^2) I - (1 + 3i/(kr) - 3/(kr)^2) r^ r^ ]
//! ```
//!
//! `Im G(r -> 0) = k I / (6 pi)`. Couplings are reported in units of the
//! single-atom linewidth as `g = -(3 pi / k) p_i* . G . p_j`, so that
//! `Im g -> -1/2` at vanishing separation and matches the `-i/2` on the
//! Hamiltonian diagonal.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type Tensor3 = [[c64; 3]; 3];

/// Default minimum separation, as a fraction of the transition wavelength.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-4;

/// Unit-normalised complex dipole orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarization([c64; 3]);

impl Polarization {
    /// Normalises `v`; fails on the zero vector.
    pub fn new(v: [c64; 3]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Constraint("polarization vector must be nonzero".into()));
        }
        Ok(Self(v.map(|z| z / norm)))
    }

    pub fn from_real(v: [f64; 3]) -> Result<Self> {
        Self::new(v.map(|x| c64::new(x, 0.0)))
    }

    /// Out-of-plane `z`.
    pub fn pi() -> Self {
        Self([c64::ZERO, c64::ZERO, c64::ONE])
    }

    pub fn x() -> Self {
        Self([c64::ONE, c64::ZERO, c64::ZERO])
    }

    pub fn y() -> Self {
        Self([c64::ZERO, c64::ONE, c64::ZERO])
    }

    /// `cos(theta) x + sin(theta) y`.
    pub fn in_plane(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self([c64::new(c, 0.0), c64::new(s, 0.0), c64::ZERO])
    }

    /// `(-x - i y) / sqrt(2)`.
    pub fn sigma_plus() -> Self {
        let a = FRAC_1_SQRT_2;
        Self([c64::new(-a, 0.0), c64::new(0.0, -a), c64::ZERO])
    }

    /// `(x - i y) / sqrt(2)`.
    pub fn sigma_minus() -> Self {
        let a = FRAC_1_SQRT_2;
        Self([c64::new(a, 0.0), c64::new(0.0, -a), c64::ZERO])
    }

    pub fn vector(&self) -> &[c64; 3] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Free-space dyadic Green's tensor at separation `r`.
pub fn green_tensor(r: &[f64; 3], k0: f64) -> Result<Tensor3> {
    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !(dist > 0.0) {
        return Err(Error::Coincident {
            separation: dist,
            guard: 0.0,
        });
    }
    Ok(green_tensor_unchecked(r, dist, k0))
}

fn green_tensor_unchecked(r: &[f64; 3], dist: f64, k0: f64) -> Tensor3 {
    let (a, b) = radial_factors(dist, k0);
    let u = [r[0] / dist, r[1] / dist, r[2] / dist];
    let mut g = [[c64::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { a } else { c64::ZERO };
            g[i][j] = delta - b * (u[i] * u[j]);
        }
    }
    g
}

/// Transverse and longitudinal radial factors, `G = A I - B r^ r^`.
fn radial_factors(dist: f64, k0: f64) -> (c64, c64) {
    let kr = k0 * dist;
    let pref = c64::from_polar(1.0 / (4.0 * PI * dist), kr);
    let inv = 1.0 / kr;
    let inv2 = inv * inv;
    let a = pref * c64::new(1.0 - inv2, inv);
    let b = pref * c64::new(1.0 - 3.0 * inv2, 3.0 * inv);
    (a, b)
}

/// `u* . G . v` without materialising the tensor.
fn contract(r: &[f64; 3], dist: f64, k0: f64, u: &[c64; 3], v: &[c64; 3]) -> c64 {
    let (a, b) = radial_factors(dist, k0);
    let rhat = [r[0] / dist, r[1] / dist, r[2] / dist];
    let mut uv = c64::ZERO;
    let mut ur = c64::ZERO;
    let mut rv = c64::ZERO;
    for i in 0..3 {
        uv += u[i].conj() * v[i];
        ur += u[i].conj() * rhat[i];
        rv += rhat[i] * v[i];
    }
    a * uv - b * ur * rv
}

/// Evaluates dimensionless couplings with a minimum-separation guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingKernel {
    pub k0: f64,
    /// Absolute minimum separation; closer pairs are rejected.
    pub min_separation: f64,
}

impl CouplingKernel {
    pub fn new(k0: f64) -> Self {
        Self {
            k0,
            min_separation: DEFAULT_MIN_SEPARATION * TAU / k0,
        }
    }

    pub fn with_min_separation(mut self, min_separation: f64) -> Self {
        self.min_separation = min_separation;
        self
    }

    /// `g = -(3 pi / k0) p_i* . G(r_i - r_j) . p_j`.
    pub fn coupling(
        &self,
        pos_i: &Point,
        pos_j: &Point,
        pol_i: &Polarization,
        pol_j: &Polarization,
    ) -> Result<c64> {
        let r = [pos_i[0] - pos_j[0], pos_i[1] - pos_j[1], pos_i[2] - pos_j[2]];
        self.coupling_at(&r, pol_i, pol_j)
    }

    pub fn coupling_at(&self, r: &[f64; 3], pol_i: &Polarization, pol_j: &Polarization) -> Result<c64> {
        let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !(dist > 0.0) || dist < self.min_separation {
            return Err(Error::Coincident {
                separation: dist * self.k0 / TAU,
                guard: self.min_separation * self.k0 / TAU,
            });
        }
        Ok(-(3.0 * PI / self.k0) * contract(r, dist, self.k0, pol_i.vector(), pol_j.vector()))
    }
}

/// Coupling with the default guard.
pub fn coupling(
    pos_i: &Point,
    pos_j: &Point,
    pol_i: &Polarization,
    pol_j: &Polarization,
    k0: f64,
) -> Result<c64> {
    CouplingKernel::new(k0).coupling(pos_i, pos_j, pol_i, pol_j)
}
