//! Dense linear-algebra kernels for small matrices.
//!
//! The identification pipeline works with pencils of a few dozen rows at
//! most, so every routine here favors numerical robustness and clarity
//! over blocking: a cyclic Jacobi eigensolver for symmetric matrices, a
//! real QZ iteration for generalized eigenproblems with singular
//! right-hand matrices, and Householder least squares.

mod qz;
mod symmetric;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use qz::{hessenberg_triangular, qz_solve};
pub use symmetric::symmetric_eig;

/// Square real matrix pair (A, B) for the problem `A v = lambda B v`.
///
/// B may be singular; the corresponding eigenvalues are infinite.
#[derive(Debug, Clone)]
pub struct MatrixPencil {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

impl MatrixPencil {
    pub fn new(a: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "pencil needs equal square matrices, got {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidArgument("pencil must be non-empty".into()));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "pencil entries must be finite".into(),
            ));
        }
        Ok(MatrixPencil { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Orthogonal reduction `Q' A Z = H` (upper Hessenberg), `Q' B Z = R`
/// (upper triangular); the first stage of the QZ iteration.
#[derive(Debug, Clone)]
pub struct HessenbergTriangular {
    pub q: Array2<f64>,
    pub z: Array2<f64>,
    pub h: Array2<f64>,
    pub r: Array2<f64>,
}

/// Real generalized Schur form `Q' A Z = T`, `Q' B Z = S` with T
/// quasi-upper-triangular (2x2 bumps for complex pairs) and S upper
/// triangular.
#[derive(Debug, Clone)]
pub struct GeneralizedSchur {
    pub q: Array2<f64>,
    pub z: Array2<f64>,
    pub t: Array2<f64>,
    pub s: Array2<f64>,
}

/// One generalized eigenvalue `alpha / beta` with its right eigenvector.
///
/// `beta == 0` marks an infinite eigenvalue. For finite real eigenvalues
/// the vector has zero imaginary part; complex pairs come out conjugated.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenpair {
    pub alpha: Complex64,
    pub beta: f64,
    /// Unit 2-norm right eigenvector of the original pencil.
    pub vector: Array1<Complex64>,
}

impl GeneralizedEigenpair {
    pub fn is_infinite(&self) -> bool {
        self.beta == 0.0
    }

    /// `alpha / beta`; `None` for infinite eigenvalues.
    pub fn value(&self) -> Option<Complex64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.alpha / self.beta)
        }
    }

    pub fn is_real(&self) -> bool {
        self.alpha.im == 0.0
    }

    /// Real part of the eigenvector; meaningful when `is_real()`.
    pub fn real_vector(&self) -> Array1<f64> {
        self.vector.mapv(|c| c.re)
    }
}

/// Complete eigenstructure of a pencil.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// Finite eigenpairs, descending by eigenvalue modulus.
    pub finite: Vec<GeneralizedEigenpair>,
    /// Eigenpairs with `beta == 0`.
    pub infinite: Vec<GeneralizedEigenpair>,
    pub dim: usize,
}

impl EigenSolution {
    pub fn finite_count(&self) -> usize {
        self.finite.len()
    }

    pub fn infinite_count(&self) -> usize {
        self.infinite.len()
    }

    /// Finite eigenvalues as complex numbers, in stored order.
    pub fn finite_values(&self) -> Vec<Complex64> {
        self.finite.iter().filter_map(|p| p.value()).collect()
    }

    /// Sorts the finite eigenpairs ascending by real part (imaginary
    /// part breaks ties), the order used by the identification loop.
    pub fn sort_finite_ascending(&mut self) {
        self.finite.sort_by(|a, b| {
            let va = a.value().expect("finite pair");
            let vb = b.value().expect("finite pair");
            va.re
                .total_cmp(&vb.re)
                .then_with(|| va.im.total_cmp(&vb.im))
        });
    }
}

/// Symmetric Toeplitz matrix with first row `acvf[0..]`.
pub fn toeplitz_from_acvf(acvf: &[f64]) -> Result<Array2<f64>> {
    if acvf.is_empty() {
        return Err(Error::InvalidArgument(
            "autocovariance sequence must be non-empty".into(),
        ));
    }
    if acvf.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "autocovariance entries must be finite".into(),
        ));
    }
    let n = acvf.len();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = acvf[i.abs_diff(j)];
        }
    }
    Ok(m)
}

/// Frobenius norm.
pub fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Minimum-residual solution of an overdetermined system `A x = rhs`
/// through Householder QR; no normal equations are formed.
pub fn least_squares_qr(a: &Array2<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.nrows(), a.ncols());
    if rhs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {}",
            m,
            rhs.len()
        )));
    }
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "system is underdetermined: {m} equations for {n} unknowns"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut r = a.clone();
    let mut b = rhs.to_vec();
    let scale = frobenius_norm(a);

    for j in 0..n {
        // Householder vector annihilating r[j+1.., j].
        let norm_x = (j..m).map(|i| r[[i, j]] * r[[i, j]]).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            return Err(Error::RankDeficient { col: j, pivot: 0.0 });
        }
        let alpha = if r[[j, j]] >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (j..m).map(|i| r[[i, j]]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in j..n {
                let dot: f64 = (j..m).map(|i| v[i - j] * r[[i, col]]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    r[[i, col]] -= f * v[i - j];
                }
            }
            let dot: f64 = (j..m).map(|i| v[i - j] * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                b[i] -= f * v[i - j];
            }
        }
        r[[j, j]] = alpha;
        let tol = f64::EPSILON * (m.max(n) as f64) * scale;
        if r[[j, j]].abs() <= tol {
            return Err(Error::RankDeficient {
                col: j,
                pivot: r[[j, j]].abs(),
            });
        }
    }

    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let s: f64 = (j + 1..n).map(|k| r[[j, k]] * x[k]).sum();
        x[j] = (b[j] - s) / r[[j, j]];
    }
    Ok(x)
}

/// Largest root modulus of the monic polynomial
/// `z^n + p[1] z^(n-1) + .. + p[n]` (`p[0]` must be 1).
pub fn polynomial_spectral_radius(p: &[f64]) -> Result<f64> {
    if p.is_empty() || p[0] != 1.0 {
        return Err(Error::InvalidArgument(
            "polynomial must be monic with an explicit leading 1".into(),
        ));
    }
    let n = p.len() - 1;
    if n == 0 {
        return Ok(0.0);
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(
            "polynomial coefficients must be finite".into(),
        ));
    }
    let mut companion = Array2::zeros((n, n));
    for j in 0..n {
        companion[[0, j]] = -p[j + 1];
    }
    for i in 1..n {
        companion[[i, i - 1]] = 1.0;
    }
    let pencil = MatrixPencil::new(companion, Array2::eye(n))?;
    let (_, eigen) = qz_solve(&pencil, None)?;
    let radius = eigen
        .finite
        .iter()
        .filter_map(|p| p.value())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(radius)
}
