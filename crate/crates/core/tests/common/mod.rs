//! Numerical oracles shared by the integration suites.
//!
//! Everything here is deliberately independent of the crate's own
//! linear algebra (hand-rolled eliminations, Jacobi orthogonalization,
//! closed-form recursions), so the acceptance checks never validate
//! the library against itself.

#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Singular values by one-sided Jacobi orthogonalization, descending.
pub fn jacobi_singular_values(m: &Array2<f64>) -> Vec<f64> {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..rows {
                    app += a[[i, p]] * a[[i, p]];
                    aqq += a[[i, q]] * a[[i, q]];
                    apq += a[[i, p]] * a[[i, q]];
                }
                if apq.abs() <= 1e-300 + f64::EPSILON * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let vp = a[[i, p]];
                    let vq = a[[i, q]];
                    a[[i, p]] = c * vp - s * vq;
                    a[[i, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| a[[i, j]] * a[[i, j]]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Numerical rank: singular values above `1e-10` times the largest.
pub fn svd_rank(m: &Array2<f64>) -> usize {
    let sv = jacobi_singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

/// `X = B^{-1} A` by Gaussian elimination with partial pivoting;
/// `None` when a pivot collapses.
pub fn solve_matrix(b: &Array2<f64>, a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = b.nrows();
    assert_eq!(b.ncols(), n);
    assert_eq!(a.nrows(), n);
    let mut lu = b.clone();
    let mut x = a.clone();
    let cols = x.ncols();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if lu[[i, k]].abs() > lu[[piv, k]].abs() {
                piv = i;
            }
        }
        if lu[[piv, k]].abs() < 1e-12 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                lu.swap([k, j], [piv, j]);
            }
            for j in 0..cols {
                x.swap([k, j], [piv, j]);
            }
        }
        for i in k + 1..n {
            let f = lu[[i, k]] / lu[[k, k]];
            lu[[i, k]] = 0.0;
            for j in k + 1..n {
                lu[[i, j]] -= f * lu[[k, j]];
            }
            for j in 0..cols {
                x[[i, j]] -= f * x[[k, j]];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..cols {
            let mut s = x[[k, j]];
            for i in k + 1..n {
                s -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s / lu[[k, k]];
        }
    }
    Some(x)
}

/// Closed-form AR(2) autocovariance from the Yule-Walker equations,
/// for `v[k] + a1 v[k-1] + a2 v[k-2] = e[k]`:
///
///   gamma(1) (1 + a2) = -a1 gamma(0)
///   gamma(2) = -a2 gamma(0) - a1 gamma(1)
///   gamma(0) + a1 gamma(1) + a2 gamma(2) = sigma_e^2
///
/// and the recursion `gamma(l) = -a1 gamma(l-1) - a2 gamma(l-2)`.
pub fn ar2_acvf(a1: f64, a2: f64, sigma_e2: f64, max_lag: usize) -> Vec<f64> {
    let r1 = -a1 / (1.0 + a2);
    let r2 = -a2 - a1 * r1;
    let gamma0 = sigma_e2 / (1.0 + a1 * r1 + a2 * r2);
    let mut gamma = vec![gamma0, r1 * gamma0, r2 * gamma0];
    for l in 3..=max_lag {
        let next = -a1 * gamma[l - 1] - a2 * gamma[l - 2];
        gamma.push(next);
    }
    gamma.truncate(max_lag + 1);
    gamma
}

/// Random `n x n` matrix of exact rank `r`, built as `U diag(s) V'`
/// with orthonormal factors and singular values in `[0.5, 2]`.
pub fn random_rank_matrix<R: Rng>(rng: &mut R, n: usize, r: usize) -> Array2<f64> {
    if r == 0 {
        return Array2::zeros((n, n));
    }
    let u = random_orthonormal(rng, n, r);
    let v = random_orthonormal(rng, n, r);
    let s: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..=2.0)).collect();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..r {
                acc += u[[i, k]] * s[k] * v[[j, k]];
            }
            m[[i, j]] = acc;
        }
    }
    m
}

/// Random standard-normal matrix.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

/// Orthonormal columns from twice-iterated Gram-Schmidt on normal draws.
fn random_orthonormal<R: Rng>(rng: &mut R, n: usize, r: usize) -> Array2<f64> {
    assert!(r <= n);
    let mut q: Array2<f64> = Array2::zeros((n, r));
    for k in 0..r {
        let mut col: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for j in 0..k {
                let dot: f64 = (0..n).map(|i| q[[i, j]] * col[i]).sum();
                for i in 0..n {
                    col[i] -= dot * q[[i, j]];
                }
            }
        }
        let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm > 1e-8, "degenerate Gram-Schmidt draw");
        for i in 0..n {
            q[[i, k]] = col[i] / norm;
        }
    }
    q
}

/// Greedy nearest-neighbour multiset match; panics when any value in
/// `got` sits farther than `tol` from every unused value in `want`.
pub fn assert_multiset_close(got: &[Complex64], want: &[Complex64], tol: f64, context: &str) {
    assert_eq!(got.len(), want.len(), "{context}: cardinality differs");
    let mut used = vec![false; want.len()];
    for g in got {
        let mut best: Option<(usize, f64)> = None;
        for (i, w) in want.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (g - w).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (idx, dist) = best.expect("non-empty");
        assert!(
            dist <= tol,
            "{context}: eigenvalue {g} is {dist:.3e} from its nearest match (tol {tol:.3e})"
        );
        used[idx] = true;
    }
}
