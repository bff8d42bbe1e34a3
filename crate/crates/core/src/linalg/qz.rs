//! Real QZ iteration for the generalized eigenproblem `A v = lambda B v`.
//!
//! The solver follows the classical two-stage plan: an orthogonal
//! reduction of (A, B) to Hessenberg-triangular form, then implicit
//! double-shift sweeps that drive the Hessenberg factor toward
//! quasi-triangular Schur form while keeping the other factor
//! triangular. Singular B is handled head-on: a negligible diagonal of
//! the triangular factor is chased to the bottom of the active window
//! with plane rotations and deflated as an infinite eigenvalue, so the
//! eigenvalue count splits exactly into finite and infinite parts.
//!
//! Eigenvalues are reported as pairs `(alpha, beta)` with
//! `lambda = alpha / beta` and `beta == 0` flagging infinity; the
//! detection threshold is `|beta| <= n * eps * |B|_F`. Right
//! eigenvectors come from floor-guarded back-substitution through the
//! Schur form and are returned with unit 2-norm.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{
    frobenius_norm, EigenSolution, GeneralizedEigenpair, GeneralizedSchur, HessenbergTriangular,
    MatrixPencil,
};

// ---------------------------------------------------------------------
// Plane rotations.
// ---------------------------------------------------------------------

/// Rotation (c, s) with `-s*f + c*g == 0`, so applying
/// `[c s; -s c]` to the pair (f, g) zeroes the second slot.
fn rot_zero_second(f: f64, g: f64) -> (f64, f64) {
    let r = f.hypot(g);
    if r == 0.0 {
        (1.0, 0.0)
    } else {
        (f / r, g / r)
    }
}

/// Applies `[c s; -s c]` to rows (i0, i1) over `cols`.
fn rotate_rows(
    m: &mut Array2<f64>,
    i0: usize,
    i1: usize,
    c: f64,
    s: f64,
    cols: std::ops::Range<usize>,
) {
    for j in cols {
        let x = m[[i0, j]];
        let y = m[[i1, j]];
        m[[i0, j]] = c * x + s * y;
        m[[i1, j]] = -s * x + c * y;
    }
}

/// Applies the same rotation to columns (j0, j1) over `rows`:
/// `col_j0 <- c*col_j0 + s*col_j1`, `col_j1 <- -s*col_j0 + c*col_j1`.
fn rotate_cols(
    m: &mut Array2<f64>,
    j0: usize,
    j1: usize,
    c: f64,
    s: f64,
    rows: std::ops::Range<usize>,
) {
    for i in rows {
        let x = m[[i, j0]];
        let y = m[[i, j1]];
        m[[i, j0]] = c * x + s * y;
        m[[i, j1]] = -s * x + c * y;
    }
}

// ---------------------------------------------------------------------
// Householder reflectors (2 or 3 active components).
// ---------------------------------------------------------------------

/// `P = I - tau v v'` acting on a short contiguous strip.
struct Reflector {
    v: [f64; 3],
    tau: f64,
    len: usize,
}

impl Reflector {
    /// Maps `x` to a multiple of the first axis (zeroes `x[1..]`).
    fn head(x: &[f64]) -> Reflector {
        debug_assert!(x.len() == 2 || x.len() == 3);
        let mut v = [0.0; 3];
        let sigma: f64 = x[1..].iter().map(|t| t * t).sum::<f64>().sqrt();
        if sigma == 0.0 {
            return Reflector {
                v,
                tau: 0.0,
                len: x.len(),
            };
        }
        let beta = -x[0].signum() * x[0].hypot(sigma);
        v[0] = 1.0;
        for i in 1..x.len() {
            v[i] = x[i] / (x[0] - beta);
        }
        Reflector {
            v,
            tau: (beta - x[0]) / beta,
            len: x.len(),
        }
    }

    /// Maps `x` to a multiple of the last axis (zeroes `x[..len-1]`).
    fn tail(x: &[f64]) -> Reflector {
        debug_assert!(x.len() == 2 || x.len() == 3);
        let n = x.len();
        let mut v = [0.0; 3];
        let sigma: f64 = x[..n - 1].iter().map(|t| t * t).sum::<f64>().sqrt();
        if sigma == 0.0 {
            return Reflector {
                v,
                tau: 0.0,
                len: n,
            };
        }
        let last = x[n - 1];
        let beta = -last.signum() * last.hypot(sigma);
        v[n - 1] = 1.0;
        for i in 0..n - 1 {
            v[i] = x[i] / (last - beta);
        }
        Reflector {
            v,
            tau: (beta - last) / beta,
            len: n,
        }
    }

    /// Rows `row0..row0+len` over the column range.
    fn apply_left(&self, m: &mut Array2<f64>, row0: usize, cols: std::ops::Range<usize>) {
        if self.tau == 0.0 {
            return;
        }
        for j in cols {
            let mut s = 0.0;
            for i in 0..self.len {
                s += self.v[i] * m[[row0 + i, j]];
            }
            s *= self.tau;
            for i in 0..self.len {
                m[[row0 + i, j]] -= s * self.v[i];
            }
        }
    }

    /// Columns `col0..col0+len` over the row range.
    fn apply_right(&self, m: &mut Array2<f64>, col0: usize, rows: std::ops::Range<usize>) {
        if self.tau == 0.0 {
            return;
        }
        for i in rows {
            let mut s = 0.0;
            for j in 0..self.len {
                s += self.v[j] * m[[i, col0 + j]];
            }
            s *= self.tau;
            for j in 0..self.len {
                m[[i, col0 + j]] -= s * self.v[j];
            }
        }
    }
}

// ---------------------------------------------------------------------
// Stage 1: Hessenberg-triangular reduction.
// ---------------------------------------------------------------------

/// Reduces the pencil to `Q' A Z = H` upper Hessenberg and
/// `Q' B Z = R` upper triangular using plane rotations only, so a
/// pencil that is already in reduced form passes through untouched.
pub fn hessenberg_triangular(pencil: &MatrixPencil) -> Result<HessenbergTriangular> {
    let n = pencil.dim();
    let mut h = pencil.a.clone();
    let mut t = pencil.b.clone();
    let mut q = Array2::eye(n);
    let mut z = Array2::eye(n);

    // QR of B with left rotations, applied to A as well.
    for j in 0..n {
        for i in (j + 1..n).rev() {
            let (c, s) = rot_zero_second(t[[i - 1, j]], t[[i, j]]);
            if s != 0.0 {
                rotate_rows(&mut t, i - 1, i, c, s, j..n);
                rotate_rows(&mut h, i - 1, i, c, s, 0..n);
                rotate_cols(&mut q, i - 1, i, c, s, 0..n);
            }
            t[[i, j]] = 0.0;
        }
    }

    // Kill A below the subdiagonal column by column, bottom-up. Every
    // left rotation disturbs one subdiagonal of B, which is repaired
    // with a paired right rotation before moving on.
    if n > 2 {
        for j in 0..n - 2 {
            for i in (j + 2..n).rev() {
                let (c, s) = rot_zero_second(h[[i - 1, j]], h[[i, j]]);
                if s != 0.0 {
                    rotate_rows(&mut h, i - 1, i, c, s, j..n);
                    rotate_rows(&mut t, i - 1, i, c, s, i - 1..n);
                    rotate_cols(&mut q, i - 1, i, c, s, 0..n);
                }
                h[[i, j]] = 0.0;
                let (c, s) = rot_zero_second(t[[i, i]], -t[[i, i - 1]]);
                if s != 0.0 {
                    rotate_cols(&mut t, i - 1, i, c, s, 0..i + 1);
                    rotate_cols(&mut h, i - 1, i, c, s, 0..n);
                    rotate_cols(&mut z, i - 1, i, c, s, 0..n);
                }
                t[[i, i - 1]] = 0.0;
            }
        }
    }

    Ok(HessenbergTriangular { q, z, h, r: t })
}

// ---------------------------------------------------------------------
// Stage 2: QZ iteration.
// ---------------------------------------------------------------------

/// Chases a negligible diagonal `t[j, j]` inside the active window
/// `[lo, hi]` down to `t[hi, hi]` and deflates one infinite eigenvalue.
///
/// Invariant per step k: `t[k, k]` is exactly zero. The left rotation
/// of rows (k, k+1) zeroes `t[k+1, k+1]` against `t[k, k+1]`, moving
/// the zero down one slot; the Hessenberg bulge it creates at
/// `h[k+1, k-1]` is repaired with a right rotation of columns
/// (k-1, k), which cannot disturb the triangular factor because rows
/// k and k+1 of `t` vanish in those columns. Once the zero reaches the
/// bottom, row `hi` of `t` is entirely zero, so a right rotation of
/// columns (hi-1, hi) removes `h[hi, hi-1]` free of charge.
fn chase_infinite(
    h: &mut Array2<f64>,
    t: &mut Array2<f64>,
    q: &mut Array2<f64>,
    z: &mut Array2<f64>,
    lo: usize,
    hi: usize,
    j: usize,
) {
    let n = h.nrows();
    t[[j, j]] = 0.0;
    for k in j..hi {
        let (c, s) = rot_zero_second(t[[k, k + 1]], t[[k + 1, k + 1]]);
        if s != 0.0 {
            rotate_rows(t, k, k + 1, c, s, k + 1..n);
            let col_start = k.saturating_sub(1);
            rotate_rows(h, k, k + 1, c, s, col_start..n);
            rotate_cols(q, k, k + 1, c, s, 0..n);
        }
        t[[k + 1, k + 1]] = 0.0;
        if k > lo {
            let (c, s) = rot_zero_second(h[[k + 1, k]], -h[[k + 1, k - 1]]);
            if s != 0.0 {
                rotate_cols(h, k - 1, k, c, s, 0..k + 2);
                rotate_cols(t, k - 1, k, c, s, 0..k + 1);
                rotate_cols(z, k - 1, k, c, s, 0..n);
            }
            h[[k + 1, k - 1]] = 0.0;
        }
    }
    if hi > lo {
        let (c, s) = rot_zero_second(h[[hi, hi]], -h[[hi, hi - 1]]);
        if s != 0.0 {
            rotate_cols(h, hi - 1, hi, c, s, 0..hi + 1);
            rotate_cols(t, hi - 1, hi, c, s, 0..hi);
            rotate_cols(z, hi - 1, hi, c, s, 0..n);
        }
        h[[hi, hi - 1]] = 0.0;
    }
}

/// Attempts to split the trailing 2x2 block at rows (i, i+1) into two
/// real 1x1 blocks. Returns true on success; false when the block
/// carries a complex-conjugate pair (or is too ill-conditioned to
/// split stably), in which case it is left in place.
fn split_two_by_two(
    h: &mut Array2<f64>,
    t: &mut Array2<f64>,
    q: &mut Array2<f64>,
    z: &mut Array2<f64>,
    i: usize,
    h_fro: f64,
    t_fro: f64,
) -> bool {
    let n = h.nrows();
    let h11 = h[[i, i]];
    let h12 = h[[i, i + 1]];
    let h21 = h[[i + 1, i]];
    let h22 = h[[i + 1, i + 1]];
    let t11 = t[[i, i]];
    let t12 = t[[i, i + 1]];
    let t22 = t[[i + 1, i + 1]];

    // det(Hblk - lambda Tblk) = aq l^2 + bq l + cq (sign flipped).
    let aq = t11 * t22;
    let bq = -(h11 * t22 + h22 * t11 - t12 * h21);
    let cq = h11 * h22 - h12 * h21;
    let disc = bq * bq - 4.0 * aq * cq;
    if disc < 0.0 {
        return false;
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (bq + if bq >= 0.0 { sq } else { -sq });
    // Prefer the root computed without cancellation; qq == 0 forces the
    // other branch.
    let lambda = if qq != 0.0 {
        cq / qq
    } else if aq != 0.0 {
        qq / aq
    } else {
        return false;
    };
    if !lambda.is_finite() {
        return false;
    }

    // Null vector of M = Hblk - lambda Tblk from its larger row; the
    // right rotation sends it to the first axis, putting lambda at
    // position (i, i).
    let m11 = h11 - lambda * t11;
    let m12 = h12 - lambda * t12;
    let m21 = h21;
    let m22 = h22 - lambda * t22;
    let (w0, w1) = if m11.hypot(m12) >= m21.hypot(m22) {
        (m12, -m11)
    } else {
        (m22, -m21)
    };
    if w0 == 0.0 && w1 == 0.0 {
        return false;
    }
    // Z rotation with first column (w0, w1).
    let r = w0.hypot(w1);
    let (cz, sz) = (w0 / r, w1 / r);
    // Q rotation aligning T's transformed first column with the first
    // axis keeps both factors triangular because H w = lambda T w.
    let u0 = t11 * w0 + t12 * w1;
    let u1 = t22 * w1;
    let (cq_, sq_) = rot_zero_second(u0, u1);

    // Trial on the 2x2 blocks before committing.
    let rot2 = |m: [[f64; 2]; 2]| -> [[f64; 2]; 2] {
        // columns: c0 <- cz c0 + sz c1 ; c1 <- -sz c0 + cz c1
        let a0 = [cz * m[0][0] + sz * m[0][1], -sz * m[0][0] + cz * m[0][1]];
        let a1 = [cz * m[1][0] + sz * m[1][1], -sz * m[1][0] + cz * m[1][1]];
        // rows: r0 <- cq r0 + sq r1 ; r1 <- -sq r0 + cq r1
        [
            [cq_ * a0[0] + sq_ * a1[0], cq_ * a0[1] + sq_ * a1[1]],
            [-sq_ * a0[0] + cq_ * a1[0], -sq_ * a0[1] + cq_ * a1[1]],
        ]
    };
    let h_new = rot2([[h11, h12], [h21, h22]]);
    let t_new = rot2([[t11, t12], [0.0, t22]]);
    let split_tol = 1e-8 * (h_fro + lambda.abs() * t_fro);
    if h_new[1][0].abs() > split_tol || t_new[1][0].abs() > split_tol {
        return false;
    }

    rotate_cols(h, i, i + 1, cz, sz, 0..i + 2);
    rotate_cols(t, i, i + 1, cz, sz, 0..i + 2);
    rotate_cols(z, i, i + 1, cz, sz, 0..n);
    rotate_rows(h, i, i + 1, cq_, sq_, i..n);
    rotate_rows(t, i, i + 1, cq_, sq_, i..n);
    rotate_cols(q, i, i + 1, cq_, sq_, 0..n);
    h[[i + 1, i]] = 0.0;
    t[[i + 1, i]] = 0.0;
    true
}

/// One implicit double-shift sweep over the active window `[lo, hi]`
/// (window size at least 3). Shifts are the eigenvalues of the trailing
/// 2x2 pencil; on stagnation an ad hoc repeated real shift is used.
fn double_shift_sweep(
    h: &mut Array2<f64>,
    t: &mut Array2<f64>,
    q: &mut Array2<f64>,
    z: &mut Array2<f64>,
    lo: usize,
    hi: usize,
    exceptional: bool,
) {
    let n = h.nrows();
    let (pa, pb, pc) = if exceptional {
        let sigma = h[[hi, hi - 1]] / t[[hi - 1, hi - 1]] + h[[hi, hi]] / t[[hi, hi]];
        (1.0, -2.0 * sigma, sigma * sigma)
    } else {
        let a11 = h[[hi - 1, hi - 1]];
        let a12 = h[[hi - 1, hi]];
        let a21 = h[[hi, hi - 1]];
        let a22 = h[[hi, hi]];
        let b11 = t[[hi - 1, hi - 1]];
        let b12 = t[[hi - 1, hi]];
        let b22 = t[[hi, hi]];
        (
            -b11 * b22,
            a22 * b11 + a11 * b22 - b12 * a21,
            a12 * a21 - a11 * a22,
        )
    };

    // First column of p(H T^-1) restricted to the three leading window
    // rows; only the top-left 2x2 of T is inverted.
    let t11 = t[[lo, lo]];
    let t12 = t[[lo, lo + 1]];
    let t22 = t[[lo + 1, lo + 1]];
    let u11 = 1.0 / t11;
    let u12 = -t12 / (t11 * t22);
    let u22 = 1.0 / t22;
    // m1 = (H T^-1) e1 has support on the first two window rows.
    let m1 = [h[[lo, lo]] * u11, h[[lo + 1, lo]] * u11];
    // mm = (H T^-1) m1.
    let w0 = u11 * m1[0] + u12 * m1[1];
    let w1 = u22 * m1[1];
    let mm = [
        h[[lo, lo]] * w0 + h[[lo, lo + 1]] * w1,
        h[[lo + 1, lo]] * w0 + h[[lo + 1, lo + 1]] * w1,
        h[[lo + 2, lo + 1]] * w1,
    ];
    let mut v = [
        pc + pb * m1[0] + pa * mm[0],
        pb * m1[1] + pa * mm[1],
        pa * mm[2],
    ];
    let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if peak == 0.0 || !peak.is_finite() {
        v = [1.0, 1.0, 1.0];
    } else {
        for x in &mut v {
            *x /= peak;
        }
    }

    let r0 = Reflector::head(&v);
    r0.apply_left(h, lo, lo..n);
    r0.apply_left(t, lo, lo..n);
    r0.apply_right(q, lo, 0..n);

    // Bulge chase: at step k the triangular factor has fill in rows
    // k+1..=k+2 of column k (plus row k+3 fill created a step earlier),
    // and the Hessenberg factor carries the bulge in column k.
    let mut k = lo;
    while k + 3 <= hi {
        let x = [t[[k + 2, k]], t[[k + 2, k + 1]], t[[k + 2, k + 2]]];
        let r = Reflector::tail(&x);
        r.apply_right(h, k, 0..(k + 4).min(hi + 1));
        r.apply_right(t, k, 0..k + 3);
        r.apply_right(z, k, 0..n);
        t[[k + 2, k]] = 0.0;
        t[[k + 2, k + 1]] = 0.0;

        let x = [t[[k + 1, k]], t[[k + 1, k + 1]]];
        let r = Reflector::tail(&x);
        r.apply_right(h, k, 0..(k + 4).min(hi + 1));
        r.apply_right(t, k, 0..k + 2);
        r.apply_right(z, k, 0..n);
        t[[k + 1, k]] = 0.0;

        let x = [h[[k + 1, k]], h[[k + 2, k]], h[[k + 3, k]]];
        let r = Reflector::head(&x);
        r.apply_left(h, k + 1, k..n);
        r.apply_left(t, k + 1, k + 1..n);
        r.apply_right(q, k + 1, 0..n);
        h[[k + 2, k]] = 0.0;
        h[[k + 3, k]] = 0.0;

        k += 1;
    }

    // Tail with two remaining rows (k = hi - 2).
    let k = hi - 2;
    let x = [t[[hi, k]], t[[hi, k + 1]], t[[hi, k + 2]]];
    let r = Reflector::tail(&x);
    r.apply_right(h, k, 0..hi + 1);
    r.apply_right(t, k, 0..hi + 1);
    r.apply_right(z, k, 0..n);
    t[[hi, k]] = 0.0;
    t[[hi, k + 1]] = 0.0;

    let x = [t[[hi - 1, k]], t[[hi - 1, k + 1]]];
    let r = Reflector::tail(&x);
    r.apply_right(h, k, 0..hi + 1);
    r.apply_right(t, k, 0..hi);
    r.apply_right(z, k, 0..n);
    t[[hi - 1, k]] = 0.0;

    let x = [h[[hi - 1, k]], h[[hi, k]]];
    let r = Reflector::head(&x);
    r.apply_left(h, hi - 1, k..n);
    r.apply_left(t, hi - 1, hi - 1..n);
    r.apply_right(q, hi - 1, 0..n);
    h[[hi, k]] = 0.0;

    let x = [t[[hi, hi - 1]], t[[hi, hi]]];
    let r = Reflector::tail(&x);
    r.apply_right(h, hi - 1, 0..hi + 1);
    r.apply_right(t, hi - 1, 0..hi + 1);
    r.apply_right(z, hi - 1, 0..n);
    t[[hi, hi - 1]] = 0.0;
}

/// Generalized Schur decomposition with eigenvalues and right
/// eigenvectors. `max_sweeps` bounds the number of implicit sweeps
/// (default `30 * n`); exhaustion returns the partial decomposition
/// inside the error.
pub fn qz_solve(
    pencil: &MatrixPencil,
    max_sweeps: Option<usize>,
) -> Result<(GeneralizedSchur, EigenSolution)> {
    let n = pencil.dim();
    let budget = max_sweeps.unwrap_or(30 * n);
    let reduced = hessenberg_triangular(pencil)?;
    let mut h = reduced.h;
    let mut t = reduced.r;
    let mut q = reduced.q;
    let mut z = reduced.z;

    let h_fro = frobenius_norm(&pencil.a);
    let t_fro = frobenius_norm(&pencil.b);
    let btol = n as f64 * f64::EPSILON * t_fro;
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut stall = 0usize;
    let mut last_hi = hi;

    while hi > 0 {
        // Set negligible subdiagonals to exact zero.
        for j in 1..=hi {
            if h[[j, j - 1]] != 0.0 {
                let local = eps * (h[[j - 1, j - 1]].abs() + h[[j, j]].abs());
                let tol = if local == 0.0 { eps * h_fro } else { local };
                if h[[j, j - 1]].abs() <= tol {
                    h[[j, j - 1]] = 0.0;
                }
            }
        }
        if h[[hi, hi - 1]] == 0.0 {
            hi -= 1;
            stall = 0;
            continue;
        }
        let mut lo = hi;
        while lo > 0 && h[[lo, lo - 1]] != 0.0 {
            lo -= 1;
        }
        // Deflate infinite eigenvalues before anything else so the
        // sweep never divides by a negligible triangular diagonal.
        if let Some(j) = (lo..=hi).find(|&j| t[[j, j]].abs() <= btol) {
            chase_infinite(&mut h, &mut t, &mut q, &mut z, lo, hi, j);
            hi -= 1;
            stall = 0;
            continue;
        }
        if hi - lo == 1 {
            if split_two_by_two(&mut h, &mut t, &mut q, &mut z, lo, h_fro, t_fro) {
                stall = 0;
                continue;
            }
            // Complex pair stays as a 2x2 block.
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            stall = 0;
            continue;
        }
        if sweeps >= budget {
            return Err(Error::QzNonConvergence {
                sweeps,
                partial: Box::new(GeneralizedSchur { q, z, t: h, s: t }),
            });
        }
        sweeps += 1;
        if hi == last_hi {
            stall += 1;
        } else {
            stall = 1;
            last_hi = hi;
        }
        let exceptional = stall.is_multiple_of(10);
        double_shift_sweep(&mut h, &mut t, &mut q, &mut z, lo, hi, exceptional);
    }

    let (finite, infinite) = extract_eigenpairs(&h, &t, &z, btol, h_fro, t_fro);
    Ok((
        GeneralizedSchur { q, z, t: h, s: t },
        EigenSolution {
            finite,
            infinite,
            dim: n,
        },
    ))
}

// ---------------------------------------------------------------------
// Eigenvalue and eigenvector extraction from the Schur form.
// ---------------------------------------------------------------------

/// Scaling cap for floor-guarded back-substitution.
const HUGE: f64 = 1e250;

fn extract_eigenpairs(
    h: &Array2<f64>,
    t: &Array2<f64>,
    z: &Array2<f64>,
    btol: f64,
    h_fro: f64,
    t_fro: f64,
) -> (Vec<GeneralizedEigenpair>, Vec<GeneralizedEigenpair>) {
    let n = h.nrows();
    let mut finite = Vec::new();
    let mut infinite = Vec::new();

    let mut i = 0;
    while i < n {
        let in_block = i + 1 < n && h[[i + 1, i]] != 0.0;
        if in_block {
            let aq = t[[i, i]] * t[[i + 1, i + 1]];
            let bq = -(h[[i, i]] * t[[i + 1, i + 1]] + h[[i + 1, i + 1]] * t[[i, i]]
                - t[[i, i + 1]] * h[[i + 1, i]]);
            let cq = h[[i, i]] * h[[i + 1, i + 1]] - h[[i, i + 1]] * h[[i + 1, i]];
            let disc = bq * bq - 4.0 * aq * cq;
            if disc < 0.0 && aq != 0.0 {
                let re = -bq / (2.0 * aq);
                let im = (-disc).sqrt() / (2.0 * aq.abs());
                let lambda = Complex64::new(re, im);
                let w = complex_backsub(h, t, lambda, i, h_fro, t_fro);
                let v = map_through_z_complex(z, &w);
                finite.push(GeneralizedEigenpair {
                    alpha: lambda,
                    beta: 1.0,
                    vector: v.clone(),
                });
                finite.push(GeneralizedEigenpair {
                    alpha: lambda.conj(),
                    beta: 1.0,
                    vector: v.mapv(|c| c.conj()),
                });
            } else {
                // Real pair that resisted splitting: extract both roots
                // directly from the quadratic.
                let sq = disc.max(0.0).sqrt();
                let qq = -0.5 * (bq + if bq >= 0.0 { sq } else { -sq });
                let mut roots = Vec::new();
                if aq != 0.0 && qq != 0.0 {
                    roots.push(qq / aq);
                    roots.push(cq / qq);
                } else if qq != 0.0 {
                    roots.push(cq / qq);
                    roots.push(f64::INFINITY);
                } else {
                    roots.push(0.0);
                    roots.push(0.0);
                }
                for lambda in roots {
                    if lambda.is_finite() {
                        let w = real_backsub_block(h, t, lambda, i, h_fro, t_fro);
                        let v = map_through_z_real(z, &w);
                        finite.push(GeneralizedEigenpair {
                            alpha: Complex64::new(lambda, 0.0),
                            beta: 1.0,
                            vector: v,
                        });
                    } else {
                        let w = infinite_backsub(t, i + 1, btol);
                        let v = map_through_z_real(z, &w);
                        infinite.push(GeneralizedEigenpair {
                            alpha: Complex64::new(h[[i + 1, i + 1]], 0.0),
                            beta: 0.0,
                            vector: v,
                        });
                    }
                }
            }
            i += 2;
        } else {
            let mut alpha = h[[i, i]];
            let mut beta = t[[i, i]];
            if beta < 0.0 {
                alpha = -alpha;
                beta = -beta;
            }
            if beta <= btol {
                let w = infinite_backsub(t, i, btol);
                let v = map_through_z_real(z, &w);
                infinite.push(GeneralizedEigenpair {
                    alpha: Complex64::new(alpha, 0.0),
                    beta: 0.0,
                    vector: v,
                });
            } else {
                let lambda = alpha / beta;
                let w = real_backsub(h, t, lambda, i, h_fro, t_fro);
                let v = map_through_z_real(z, &w);
                finite.push(GeneralizedEigenpair {
                    alpha: Complex64::new(alpha, 0.0),
                    beta,
                    vector: v,
                });
            }
            i += 1;
        }
    }

    finite.sort_by(|a, b| {
        let va = a.value().expect("finite pair");
        let vb = b.value().expect("finite pair");
        vb.norm()
            .total_cmp(&va.norm())
            .then_with(|| vb.re.total_cmp(&va.re))
            .then_with(|| vb.im.total_cmp(&va.im))
    });
    (finite, infinite)
}

/// Solves `(H - lambda T) w = 0` with `w[end] = 1` by back-substitution;
/// pivots below the floor are clamped, which keeps the normalized
/// residual at rounding level even for repeated eigenvalues.
fn real_backsub(
    h: &Array2<f64>,
    t: &Array2<f64>,
    lambda: f64,
    end: usize,
    h_fro: f64,
    t_fro: f64,
) -> Vec<f64> {
    let mut w = vec![0.0; end + 1];
    w[end] = 1.0;
    backsub_rows_real(h, t, lambda, &mut w, end, h_fro, t_fro);
    w
}

/// Same as `real_backsub` but seeded with the null vector of the 2x2
/// diagonal block at rows (i, i+1).
fn real_backsub_block(
    h: &Array2<f64>,
    t: &Array2<f64>,
    lambda: f64,
    i: usize,
    h_fro: f64,
    t_fro: f64,
) -> Vec<f64> {
    let m11 = h[[i, i]] - lambda * t[[i, i]];
    let m12 = h[[i, i + 1]] - lambda * t[[i, i + 1]];
    let m21 = h[[i + 1, i]];
    let m22 = h[[i + 1, i + 1]] - lambda * t[[i + 1, i + 1]];
    let (mut w0, mut w1) = if m11.hypot(m12) >= m21.hypot(m22) {
        (m12, -m11)
    } else {
        (m22, -m21)
    };
    if w0 == 0.0 && w1 == 0.0 {
        w0 = 1.0;
        w1 = 0.0;
    }
    let r = w0.hypot(w1);
    let mut w = vec![0.0; i + 2];
    w[i] = w0 / r;
    w[i + 1] = w1 / r;
    backsub_rows_real(h, t, lambda, &mut w, i, h_fro, t_fro);
    w
}

/// Fills `w[..start]` given known components `w[start..]`.
fn backsub_rows_real(
    h: &Array2<f64>,
    t: &Array2<f64>,
    lambda: f64,
    w: &mut [f64],
    start: usize,
    h_fro: f64,
    t_fro: f64,
) {
    let floor = (f64::EPSILON * (h_fro + lambda.abs() * t_fro)).max(f64::MIN_POSITIVE);
    let end = w.len() - 1;
    let mut j = start;
    while j > 0 {
        j -= 1;
        let rhs = |row: usize, w: &[f64]| -> f64 {
            (row + 1..=end)
                .map(|k| (h[[row, k]] - lambda * t[[row, k]]) * w[k])
                .sum::<f64>()
        };
        let is_block = j > 0 && h[[j, j - 1]] != 0.0;
        if is_block {
            let a11 = h[[j - 1, j - 1]] - lambda * t[[j - 1, j - 1]];
            let a12 = h[[j - 1, j]] - lambda * t[[j - 1, j]];
            let a21 = h[[j, j - 1]];
            let a22 = h[[j, j]] - lambda * t[[j, j]];
            let r1 = -rhs(j - 1, w);
            let r2 = -rhs(j, w);
            let (x0, x1) = solve2_real(a11, a12, a21, a22, r1, r2, floor);
            w[j - 1] = x0;
            w[j] = x1;
            j -= 1;
        } else {
            let mut denom = h[[j, j]] - lambda * t[[j, j]];
            if denom.abs() < floor {
                denom = if denom < 0.0 { -floor } else { floor };
            }
            w[j] = -rhs(j, w) / denom;
        }
        let peak = w[j..=end].iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if peak > HUGE {
            for x in w[j..=end].iter_mut() {
                *x /= peak;
            }
        }
    }
}

/// 2x2 solve with partial pivoting and floored pivots.
fn solve2_real(a11: f64, a12: f64, a21: f64, a22: f64, r1: f64, r2: f64, floor: f64) -> (f64, f64) {
    let (b11, b12, rb1, b21, b22, rb2) = if a11.abs() >= a21.abs() {
        (a11, a12, r1, a21, a22, r2)
    } else {
        (a21, a22, r2, a11, a12, r1)
    };
    let mut p = b11;
    if p.abs() < floor {
        p = if p < 0.0 { -floor } else { floor };
    }
    let l = b21 / p;
    let mut d = b22 - l * b12;
    if d.abs() < floor {
        d = if d < 0.0 { -floor } else { floor };
    }
    let x1 = (rb2 - l * rb1) / d;
    let x0 = (rb1 - b12 * x1) / p;
    (x0, x1)
}

/// Complex back-substitution for a conjugate pair anchored at the 2x2
/// block (i, i+1); returns the eigenvector for `lambda` (positive
/// imaginary part).
fn complex_backsub(
    h: &Array2<f64>,
    t: &Array2<f64>,
    lambda: Complex64,
    i: usize,
    h_fro: f64,
    t_fro: f64,
) -> Vec<Complex64> {
    let floor = (f64::EPSILON * (h_fro + lambda.norm() * t_fro)).max(f64::MIN_POSITIVE);
    let end = i + 1;
    let mut w = vec![Complex64::new(0.0, 0.0); end + 1];

    let m11 = Complex64::new(h[[i, i]], 0.0) - lambda * t[[i, i]];
    let m12 = Complex64::new(h[[i, i + 1]], 0.0) - lambda * t[[i, i + 1]];
    let m21 = Complex64::new(h[[i + 1, i]], 0.0);
    let m22 = Complex64::new(h[[i + 1, i + 1]], 0.0) - lambda * t[[i + 1, i + 1]];
    let row0 = m11.norm_sqr() + m12.norm_sqr();
    let row1 = m21.norm_sqr() + m22.norm_sqr();
    let (w0, w1) = if row0 >= row1 {
        (m12, -m11)
    } else {
        (m22, -m21)
    };
    let r = (w0.norm_sqr() + w1.norm_sqr()).sqrt();
    if r == 0.0 {
        w[i] = Complex64::new(1.0, 0.0);
    } else {
        w[i] = w0 / r;
        w[i + 1] = w1 / r;
    }

    let mut j = i;
    while j > 0 {
        j -= 1;
        let rhs = |row: usize, w: &[Complex64]| -> Complex64 {
            (row + 1..=end)
                .map(|k| (Complex64::new(h[[row, k]], 0.0) - lambda * t[[row, k]]) * w[k])
                .sum()
        };
        let is_block = j > 0 && h[[j, j - 1]] != 0.0;
        if is_block {
            let a11 = Complex64::new(h[[j - 1, j - 1]], 0.0) - lambda * t[[j - 1, j - 1]];
            let a12 = Complex64::new(h[[j - 1, j]], 0.0) - lambda * t[[j - 1, j]];
            let a21 = Complex64::new(h[[j, j - 1]], 0.0);
            let a22 = Complex64::new(h[[j, j]], 0.0) - lambda * t[[j, j]];
            let r1 = -rhs(j - 1, &w);
            let r2 = -rhs(j, &w);
            let (x0, x1) = solve2_complex(a11, a12, a21, a22, r1, r2, floor);
            w[j - 1] = x0;
            w[j] = x1;
            j -= 1;
        } else {
            let mut denom = Complex64::new(h[[j, j]], 0.0) - lambda * t[[j, j]];
            if denom.norm() < floor {
                denom = Complex64::new(floor, 0.0);
            }
            w[j] = -rhs(j, &w) / denom;
        }
        let peak = w[j..=end].iter().fold(0.0f64, |a, x| a.max(x.norm()));
        if peak > HUGE {
            for x in w[j..=end].iter_mut() {
                *x /= peak;
            }
        }
    }
    w
}

fn solve2_complex(
    a11: Complex64,
    a12: Complex64,
    a21: Complex64,
    a22: Complex64,
    r1: Complex64,
    r2: Complex64,
    floor: f64,
) -> (Complex64, Complex64) {
    let (b11, b12, rb1, b21, b22, rb2) = if a11.norm() >= a21.norm() {
        (a11, a12, r1, a21, a22, r2)
    } else {
        (a21, a22, r2, a11, a12, r1)
    };
    let mut p = b11;
    if p.norm() < floor {
        p = Complex64::new(floor, 0.0);
    }
    let l = b21 / p;
    let mut d = b22 - l * b12;
    if d.norm() < floor {
        d = Complex64::new(floor, 0.0);
    }
    let x1 = (rb2 - l * rb1) / d;
    let x0 = (rb1 - b12 * x1) / p;
    (x0, x1)
}

/// Null-direction of the triangular factor for the infinite eigenvalue
/// seated at diagonal `i`; other negligible diagonals above are
/// floor-guarded.
fn infinite_backsub(t: &Array2<f64>, i: usize, btol: f64) -> Vec<f64> {
    let floor = btol
        .max(f64::EPSILON * t[[0, 0]].abs())
        .max(f64::MIN_POSITIVE);
    let mut w = vec![0.0; i + 1];
    w[i] = 1.0;
    let mut j = i;
    while j > 0 {
        j -= 1;
        let rhs: f64 = (j + 1..=i).map(|k| t[[j, k]] * w[k]).sum();
        let mut denom = t[[j, j]];
        if denom.abs() < floor {
            denom = if denom < 0.0 { -floor } else { floor };
        }
        w[j] = -rhs / denom;
        let peak = w[j..=i].iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if peak > HUGE {
            for x in w[j..=i].iter_mut() {
                *x /= peak;
            }
        }
    }
    w
}

fn map_through_z_real(z: &Array2<f64>, w: &[f64]) -> Array1<Complex64> {
    let n = z.nrows();
    let mut v = Array1::zeros(n);
    for i in 0..n {
        let mut s = 0.0;
        for (k, wk) in w.iter().enumerate() {
            s += z[[i, k]] * wk;
        }
        v[i] = s;
    }
    let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
    let mut out = Array1::from_elem(n, Complex64::new(0.0, 0.0));
    if norm > 0.0 {
        for i in 0..n {
            out[i] = Complex64::new(v[i] / norm, 0.0);
        }
    }
    out
}

fn map_through_z_complex(z: &Array2<f64>, w: &[Complex64]) -> Array1<Complex64> {
    let n = z.nrows();
    let mut v = Array1::from_elem(n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            s += z[[i, k]] * wk;
        }
        v[i] = s;
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|x| x / norm);
    }
    v
}
