//! Eigenpairs of dense non-symmetric matrices.
//!
//! Real input goes through the real Schur form, whose 1x1 and 2x2 diagonal
//! blocks are then triangularized with exact conjugate-pair eigenvalues, so
//! the returned spectrum of a real matrix is closed under conjugation by
//! construction. Complex input uses the complex Schur form directly.
//! Eigenvectors are recovered by back-substitution on the triangular factor.
//!
//! The contract is residual-based: every returned pair satisfies
//! `‖Av - λv‖₂ <= EIG_RESIDUAL_TOL · ‖A‖_HS`, otherwise the solver reports
//! `NoConvergence` and the caller is expected to resample.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::{Field, FieldTag};
use crate::linalg::{Mat, Vect};

/// Residual tolerance relative to `‖A‖_HS`.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

const SCHUR_EPS: f64 = 1e-13;
const SCHUR_MAX_ITER: usize = 100_000;

/// One eigenpair; `v` is unit norm with the largest-magnitude coordinate
/// rotated to the positive real axis.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub v: Vect<Complex64>,
}

impl EigenPair {
    /// `‖Av - λv‖₂` against the complexified input.
    pub fn residual(&self, a: &Mat<Complex64>) -> f64 {
        (a * &self.v - &self.v * self.lambda).norm()
    }

    /// Whether the eigenvalue is real at tolerance `tol` (absolute).
    pub fn is_real(&self, tol: f64) -> bool {
        self.lambda.im.abs() <= tol
    }
}

/// All `n` eigenpairs of a square matrix, sorted by decreasing `|λ|` with
/// ties broken on `(Re λ, Im λ)`.
pub fn eigenpairs<S: Field>(a: &Mat<S>) -> Result<Vec<EigenPair>, CoreError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::InvalidParameter(format!(
            "eigenpairs needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let ac = DMatrix::<Complex64>::from_fn(n, n, |i, j| a[(i, j)].to_complex());
    let (q, t) = match S::TAG {
        FieldTag::Real => {
            let ar = DMatrix::<f64>::from_fn(n, n, |i, j| a[(i, j)].to_complex().re);
            real_schur_to_complex_triangular(&ar)?
        }
        FieldTag::Complex => {
            let schur = ac
                .clone()
                .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
                .ok_or(CoreError::NoConvergence)?;
            let (q, mut t) = schur.unpack();
            zero_lower_triangle(&mut t);
            (q, t)
        }
    };

    let t_scale = t.norm();
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let lambda = t[(k, k)];
        let y = triangular_eigvec(&t, k, t_scale);
        let mut v = &q * y;
        let nv = v.norm();
        if nv <= 0.0 {
            return Err(CoreError::NoConvergence);
        }
        v /= Complex64::new(nv, 0.0);
        align_phase(&mut v);
        // conjugate-pair shortcut for real matrices: the partner eigenvector
        // is the coordinate-wise conjugate
        let conj_partner = S::TAG == FieldTag::Real
            && lambda.im != 0.0
            && k + 1 < n
            && t[(k + 1, k + 1)] == lambda.conj();
        if conj_partner {
            let mut vc = v.map(|z| z.conj());
            align_phase(&mut vc);
            pairs.push(EigenPair { lambda, v });
            pairs.push(EigenPair {
                lambda: lambda.conj(),
                v: vc,
            });
            k += 2;
        } else {
            pairs.push(EigenPair { lambda, v });
            k += 1;
        }
    }

    let hs = ac.norm();
    for p in &pairs {
        if p.residual(&ac) > EIG_RESIDUAL_TOL * hs {
            return Err(CoreError::NoConvergence);
        }
    }

    pairs.sort_by(|a, b| {
        let ka = (a.lambda.norm(), a.lambda.re, a.lambda.im);
        let kb = (b.lambda.norm(), b.lambda.re, b.lambda.im);
        kb.partial_cmp(&ka).unwrap()
    });
    Ok(pairs)
}

/// Real eigenpairs of a real matrix: eigenvalues with `|Im λ| <= tol·‖A‖_HS`,
/// eigenvectors re-normalized to real unit vectors after phase alignment.
pub fn real_eigenvectors(a: &Mat<f64>, im_tol: f64) -> Result<Vec<(f64, Vect<f64>)>, CoreError> {
    let hs = a.norm();
    let pairs = eigenpairs(a)?;
    let mut out = Vec::new();
    for p in pairs {
        if p.is_real(im_tol * hs) {
            let re: Vect<f64> = p.v.map(|z| z.re);
            let n = re.norm();
            if n > 0.5 {
                out.push((p.lambda.re, re / n));
            }
        }
    }
    Ok(out)
}

/// Real Schur form converted to a complex upper-triangular factorization
/// `A = Q T Q^H`, with 2x2 blocks resolved analytically so conjugate pairs
/// land on the diagonal exactly.
fn real_schur_to_complex_triangular(
    a: &DMatrix<f64>,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), CoreError> {
    let n = a.nrows();
    let schur = a
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(CoreError::NoConvergence)?;
    let (qr, tr) = schur.unpack();
    let mut q = DMatrix::<Complex64>::from_fn(n, n, |i, j| Complex64::new(qr[(i, j)], 0.0));
    let mut t = DMatrix::<Complex64>::from_fn(n, n, |i, j| Complex64::new(tr[(i, j)], 0.0));

    let scale = tr.norm().max(f64::MIN_POSITIVE);
    let mut j = 0;
    while j < n {
        if j + 1 < n && tr[(j + 1, j)].abs() > f64::EPSILON * scale {
            let (t11, t12, t21, t22) = (tr[(j, j)], tr[(j, j + 1)], tr[(j + 1, j)], tr[(j + 1, j + 1)]);
            let mean = 0.5 * (t11 + t22);
            let disc = 0.25 * (t11 - t22) * (t11 - t22) + t12 * t21;
            let (lp, lm) = if disc >= 0.0 {
                let s = disc.sqrt();
                (Complex64::new(mean + s, 0.0), Complex64::new(mean - s, 0.0))
            } else {
                let s = (-disc).sqrt();
                (Complex64::new(mean, s), Complex64::new(mean, -s))
            };
            // unit eigenvector of the 2x2 block for lp
            let cand1 = (Complex64::new(t12, 0.0), lp - t11);
            let cand2 = (lp - t22, Complex64::new(t21, 0.0));
            let (w0, w1) = if cand1.0.norm() + cand1.1.norm() >= cand2.0.norm() + cand2.1.norm() {
                cand1
            } else {
                cand2
            };
            let wn = (w0.norm_sqr() + w1.norm_sqr()).sqrt();
            let (w0, w1) = (w0 / wn, w1 / wn);
            // G = [w, w_perp] is unitary; G^H B G is upper triangular
            let g = [[w0, -w1.conj()], [w1, w0.conj()]];

            // T[:, j..j+2] := T[:, j..j+2] G
            for row in 0..n {
                let (x, y) = (t[(row, j)], t[(row, j + 1)]);
                t[(row, j)] = x * g[0][0] + y * g[1][0];
                t[(row, j + 1)] = x * g[0][1] + y * g[1][1];
            }
            // T[j..j+2, :] := G^H T[j..j+2, :]
            for col in 0..n {
                let (x, y) = (t[(j, col)], t[(j + 1, col)]);
                t[(j, col)] = g[0][0].conj() * x + g[1][0].conj() * y;
                t[(j + 1, col)] = g[0][1].conj() * x + g[1][1].conj() * y;
            }
            // Q[:, j..j+2] := Q[:, j..j+2] G
            for row in 0..n {
                let (x, y) = (q[(row, j)], q[(row, j + 1)]);
                q[(row, j)] = x * g[0][0] + y * g[1][0];
                q[(row, j + 1)] = x * g[0][1] + y * g[1][1];
            }
            t[(j + 1, j)] = Complex64::new(0.0, 0.0);
            t[(j, j)] = lp;
            t[(j + 1, j + 1)] = lm;
            j += 2;
        } else {
            if j + 1 < n {
                t[(j + 1, j)] = Complex64::new(0.0, 0.0);
            }
            j += 1;
        }
    }
    zero_lower_triangle(&mut t);
    Ok((q, t))
}

fn zero_lower_triangle(t: &mut DMatrix<Complex64>) {
    let n = t.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Eigenvector of an upper-triangular `T` for the eigenvalue at position `k`,
/// by back-substitution with guarded denominators.
fn triangular_eigvec(t: &DMatrix<Complex64>, k: usize, scale: f64) -> DVector<Complex64> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);
    let mut y = DVector::<Complex64>::zeros(n);
    y[k] = Complex64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut s = Complex64::new(0.0, 0.0);
        for j in (i + 1)..=k {
            s += t[(i, j)] * y[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < smin {
            d = Complex64::new(smin, 0.0);
        }
        y[i] = -s / d;
        let m = y[i].norm();
        if m > 1e120 {
            let f = Complex64::new(1.0 / m, 0.0);
            for j in i..=k {
                y[j] *= f;
            }
        }
    }
    y
}

/// Rotates the largest-magnitude coordinate onto the positive real axis.
pub fn align_phase(v: &mut Vect<Complex64>) {
    let mut imax = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best {
            best = m;
            imax = i;
        }
    }
    if best > 0.0 {
        let phase = v[imax] / Complex64::new(best, 0.0);
        let rot = phase.conj();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}
