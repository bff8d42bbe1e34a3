//! Cyclic Jacobi eigensolver for symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Relative asymmetry above which input is rejected.
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(values, vectors)` with eigenvalues ascending and the
/// corresponding orthonormal eigenvectors as columns, so that
/// `m = vectors * diag(values) * vectors'`.
pub fn symmetric_eig(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("matrix must be non-empty".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix entries must be finite".into(),
        ));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let max_asymmetry = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (m[[i, j]] - m[[j, i]]).abs())
        .fold(0.0f64, f64::max);
    if max_asymmetry > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { max_asymmetry });
    }

    // Work on the symmetrized copy; rotations preserve symmetry exactly
    // in exact arithmetic and we only read the upper triangle.
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            w[[i, j]] = 0.5 * (m[[i, j]] + m[[j, i]]);
        }
    }
    let mut v: Array2<f64> = Array2::eye(n);
    let fro: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-15 * fro.max(f64::MIN_POSITIVE);

    let max_sweeps = 100;
    let mut converged = fro == 0.0 || n == 1;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| w[[i, j]] * w[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (w[[q, q]] - w[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of w.
                for k in 0..n {
                    let wkp = w[[k, p]];
                    let wkq = w[[k, q]];
                    w[[k, p]] = c * wkp - s * wkq;
                    w[[k, q]] = s * wkp + c * wkq;
                }
                for k in 0..n {
                    let wpk = w[[p, k]];
                    let wqk = w[[q, k]];
                    w[[p, k]] = c * wpk - s * wqk;
                    w[[q, k]] = s * wpk + c * wqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| w[[i, j]] * w[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off > stop * 1e3 {
            return Err(Error::InvalidArgument(format!(
                "jacobi sweeps stalled with off-diagonal norm {off:.3e}"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[[i, i]].total_cmp(&w[[j, j]]));
    let values: Vec<f64> = order.iter().map(|&i| w[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        // Deterministic sign: largest-magnitude component positive.
        let mut peak = 0usize;
        for k in 1..n {
            if v[[k, src]].abs() > v[[peak, src]].abs() {
                peak = k;
            }
        }
        let sign = if v[[peak, src]] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[[k, dst]] = sign * v[[k, src]];
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    #[test]
    fn two_by_two_with_known_spectrum() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3 with vectors
        // (1, -1)/sqrt(2) and (1, 1)/sqrt(2).
        let m = arr2(&[[2.0, 1.0], [1.0, 2.0]]);
        let (vals, vecs) = symmetric_eig(&m).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(vecs[[0, 0]].abs(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(vecs[[0, 1]], r, epsilon = 1e-12);
        assert_abs_diff_eq!(vecs[[1, 1]], r, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_input_sorts_without_mixing() {
        let m = arr2(&[[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]);
        let (vals, vecs) = symmetric_eig(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        // Columns are signed unit vectors picking out the sorted axes.
        assert_abs_diff_eq!(vecs[[1, 0]].abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vecs[[2, 1]].abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vecs[[0, 2]].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reconstruction_and_orthogonality_on_seeded_random_input() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 5, 9, 16] {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    m[[i, j]] = x;
                    m[[j, i]] = x;
                }
            }
            let (vals, vecs) = symmetric_eig(&m).unwrap();
            let fro = super::super::frobenius_norm(&m);
            // m * vecs == vecs * diag(vals)
            let mv = m.dot(&vecs);
            for j in 0..n {
                for i in 0..n {
                    let expect = vecs[[i, j]] * vals[j];
                    assert!((mv[[i, j]] - expect).abs() <= 1e-9 * fro.max(1.0));
                }
            }
            let vtv = vecs.t().dot(&vecs);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[[i, j]] - expect).abs() <= 1e-12 * n as f64);
                }
            }
            // Ascending order.
            for k in 1..n {
                assert!(vals[k] >= vals[k - 1]);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = arr2(&[[1.0, 2.0], [2.1, 1.0]]);
        match symmetric_eig(&m) {
            Err(Error::NotSymmetric { .. }) => {}
            other => panic!("expected symmetry rejection, got {other:?}"),
        }
    }

    #[test]
    fn toeplitz_of_stationary_acvf_is_positive_semidefinite() {
        // Autocovariances of the AR(2) process driven by unit-variance
        // noise with poles at modulus sqrt(0.6): solved from the
        // stationarity equations by hand (see signals tests).
        let acvf = [1.0 / 0.6, 0.25 / 0.6, -0.5 / 0.6];
        let t = super::super::toeplitz_from_acvf(&acvf).unwrap();
        let (vals, _) = symmetric_eig(&t).unwrap();
        for v in vals {
            assert!(v >= -1e-12);
        }
    }
}
