//! Thin layer over `faer` for the dense decompositions used across the crate.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

/// Right eigenpairs of a general complex matrix. Column `k` of `vectors`
/// belongs to `values[k]` and has unit 2-norm.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<c64>,
    pub vectors: CMat,
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn eig(m: &CMat) -> Result<Eigensystem> {
    let n = m.nrows();
    let fail = |reason: String| Error::Eigen {
        dim: n,
        max_abs: max_abs(m),
        reason,
    };
    if n != m.ncols() {
        return Err(fail("matrix is not square".into()));
    }
    if n == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        });
    }
    let evd = m.eigen().map_err(|e| fail(format!("{e:?}")))?;
    let values: Vec<c64> = (0..n).map(|k| evd.S()[k]).collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(fail("non-finite eigenvalue".into()));
    }
    let u = evd.U();
    let mut vectors = CMat::zeros(n, n);
    for k in 0..n {
        let norm = (0..n).map(|i| u[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(fail(format!("zero eigenvector for mode {k}")));
        }
        for i in 0..n {
            vectors[(i, k)] = u[(i, k)] / norm;
        }
    }
    Ok(Eigensystem { values, vectors })
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eig(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen {
        dim: n,
        max_abs: (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].abs())
            .fold(0.0, f64::max),
        reason: format!("{e:?}"),
    })?;
    let values = (0..n).map(|k| evd.S()[k]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    let n = m.nrows();
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen {
        dim: n,
        max_abs: max_abs(m),
        reason: format!("{e:?}"),
    })
}

/// Eigenpairs of a complex Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen {
        dim: n,
        max_abs: max_abs(m),
        reason: format!("{e:?}"),
    })?;
    let values = (0..n).map(|k| evd.S()[k].re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn inverse(m: &CMat) -> CMat {
    m.partial_piv_lu().inverse()
}

/// 1-norm condition number, computed from an explicit inverse.
pub fn condition_number(m: &CMat, inv: &CMat) -> f64 {
    let c = one_norm(m) * one_norm(inv);
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (Higham 2005).
pub fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = c64::new(0.5f64.powi(s), 0.0);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let ident = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c64::new(B[k], 0.0);

    let inner_u = Mat::from_fn(n, n, |i, j| {
        b(13) * a6[(i, j)] + b(11) * a4[(i, j)] + b(9) * a2[(i, j)]
    });
    let outer_u = &a6 * &inner_u;
    let u_poly = Mat::from_fn(n, n, |i, j| {
        outer_u[(i, j)]
            + b(7) * a6[(i, j)]
            + b(5) * a4[(i, j)]
            + b(3) * a2[(i, j)]
            + b(1) * ident[(i, j)]
    });
    let u = &a * &u_poly;

    let inner_v = Mat::from_fn(n, n, |i, j| {
        b(12) * a6[(i, j)] + b(10) * a4[(i, j)] + b(8) * a2[(i, j)]
    });
    let outer_v = &a6 * &inner_v;
    let v = Mat::from_fn(n, n, |i, j| {
        outer_v[(i, j)]
            + b(6) * a6[(i, j)]
            + b(4) * a4[(i, j)]
            + b(2) * a2[(i, j)]
            + b(0) * ident[(i, j)]
    });

    let p = Mat::from_fn(n, n, |i, j| v[(i, j)] + u[(i, j)]);
    let q = Mat::from_fn(n, n, |i, j| v[(i, j)] - u[(i, j)]);
    let mut r = q.partial_piv_lu().inverse() * &p;
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn eig_of_one_by_one() {
        let m = Mat::from_fn(1, 1, |_, _| c(3.0, -0.25));
        let es = eig(&m).unwrap();
        assert_eq!(es.values, vec![c(3.0, -0.25)]);
        assert!((es.vectors[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_reconstructs_non_hermitian_matrix() {
        let n = 7;
        let m = Mat::from_fn(n, n, |i, j| {
            c(((i * 3 + j * 5) % 7) as f64 - 3.0, ((i + 2 * j) % 5) as f64 * 0.3 - 0.5)
        });
        let es = eig(&m).unwrap();
        for k in 0..n {
            for i in 0..n {
                let mut acc = c64::ZERO;
                for j in 0..n {
                    acc += m[(i, j)] * es.vectors[(j, k)];
                }
                assert!((acc - es.values[k] * es.vectors[(i, k)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn expm_matches_diagonal_and_nilpotent_cases() {
        let d = Mat::from_fn(3, 3, |i, j| if i == j { c(-(i as f64), i as f64 * 0.7) } else { c64::ZERO });
        let e = expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13);
        }
        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]], also for large t (scaling path)
        for t in [0.5, 40.0] {
            let mut n = CMat::zeros(2, 2);
            n[(0, 1)] = c(t, 0.0);
            let e = expm(&n);
            assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
            assert!((e[(0, 1)] - c(t, 0.0)).norm() < 1e-10 * t);
            assert!(e[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn expm_of_large_rotation() {
        // exp(-i H t) for H = [[0, 1], [1, 0]], t = 30
        let t = 30.0;
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = c(0.0, -t);
        h[(1, 0)] = c(0.0, -t);
        let e = expm(&h);
        assert!((e[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-10);
        assert!((e[(0, 1)] - c(0.0, -t.sin())).norm() < 1e-10);
    }
}
