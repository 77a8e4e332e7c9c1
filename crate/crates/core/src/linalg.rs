//! Dense linear algebra primitives shared by every other module.
//!
//! Conventions: the inner product is `<x,y> = sum_i x_i * conj(y_i)`, matrices
//! are column-major `nalgebra` carriers, and singular values are always
//! reported in non-increasing order.

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;
use crate::field::Field;

pub type Mat<S> = DMatrix<S>;
pub type Vect<S> = DVector<S>;

/// Relative threshold for rank decisions: singular values below
/// `RANK_TOL * s_1` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Canonical inner product `<x,y> = sum_i x_i conj(y_i)`.
pub fn inner<S: Field>(x: &Vect<S>, y: &Vect<S>) -> S {
    y.dotc(x)
}

/// Rejects NaN/Inf entries; `idx` in the error is the flat column-major index.
pub fn ensure_finite<S: Field>(entries: impl Iterator<Item = S>) -> Result<(), CoreError> {
    for (idx, e) in entries.enumerate() {
        let z = e.to_complex();
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(CoreError::NonFinite(idx));
        }
    }
    Ok(())
}

pub fn ensure_finite_mat<S: Field>(m: &Mat<S>) -> Result<(), CoreError> {
    ensure_finite(m.iter().copied())
}

pub fn ensure_finite_vec<S: Field>(v: &Vect<S>) -> Result<(), CoreError> {
    ensure_finite(v.iter().copied())
}

/// Full Householder QR: returns `(Q, R)` with `Q` unitary `m x m` and `R`
/// upper triangular `m x k`. Unlike the thin factorization, the trailing
/// `m - rank` columns of `Q` span the orthogonal complement of the column
/// space.
pub fn householder_qr_full<S: Field>(a: &Mat<S>) -> (Mat<S>, Mat<S>) {
    let m = a.nrows();
    let k = a.ncols();
    let mut r = a.clone();
    let mut q = Mat::<S>::identity(m, m);

    for j in 0..k.min(m) {
        let x = r.view((j, j), (m - j, 1)).into_owned();
        let xnorm = x.norm();
        if xnorm <= f64::MIN_POSITIVE {
            continue;
        }
        let alpha = x[(0, 0)];
        let phase = if alpha.modulus() == 0.0 {
            S::one()
        } else {
            alpha / S::from_re(alpha.modulus())
        };
        let mut v = x;
        v[(0, 0)] += phase * S::from_re(xnorm);
        let vn2 = v.norm_squared();
        if vn2 <= f64::MIN_POSITIVE {
            continue;
        }
        let beta = S::from_re(2.0 / vn2);

        // R[j.., j..] -= beta v (v^H R[j.., j..])
        let w = v.adjoint() * r.view((j, j), (m - j, k - j));
        let update = &v * w * beta;
        let mut rs = r.view_mut((j, j), (m - j, k - j));
        rs -= update;

        // Q[:, j..] -= beta (Q[:, j..] v) v^H
        let qv = q.view((0, j), (m, m - j)) * &v;
        let upd_q = qv * v.adjoint() * beta;
        let mut qs = q.view_mut((0, j), (m, m - j));
        qs -= upd_q;
    }
    (q, r)
}

/// Singular values of `M` in non-increasing order.
pub fn singular_values<S: Field>(m: &Mat<S>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Singular values together with left singular vectors, sorted
/// non-increasing. The returned `u` has `min(m, n)` columns aligned with the
/// values.
pub fn svd_values_axes<S: Field>(m: &Mat<S>) -> (Vec<f64>, Mat<S>) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let mut u_sorted = Mat::<S>::zeros(u.nrows(), u.ncols());
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
    }
    (sorted, u_sorted)
}

/// Orthonormal basis of `span(cols)^perp`.
///
/// `cols` must be `m x k` with `k < m` and full column rank up to `RANK_TOL`;
/// the caller decides whether to resample on `RankDeficient`.
pub fn orthonormal_complement_basis<S: Field>(cols: &Mat<S>) -> Result<Mat<S>, CoreError> {
    let m = cols.nrows();
    let k = cols.ncols();
    if k >= m {
        return Err(CoreError::InvalidParameter(format!(
            "need k < m for a complement, got {k} columns in dimension {m}"
        )));
    }
    let s = singular_values(cols);
    let s1 = s.first().copied().unwrap_or(0.0);
    if s1 <= 0.0 || s[k - 1] < RANK_TOL * s1 {
        return Err(CoreError::RankDeficient(format!(
            "smallest singular value {:.3e} below {:.3e}",
            s[k - 1],
            RANK_TOL * s1
        )));
    }
    let (q, _r) = householder_qr_full(cols);
    Ok(q.columns(k, m - k).into_owned())
}

/// Orthogonal projection of `x` onto the span of the orthonormal columns of
/// `basis`.
pub fn project_onto_basis<S: Field>(basis: &Mat<S>, x: &Vect<S>) -> Vect<S> {
    basis * (basis.adjoint() * x)
}

/// Distance from `x` to the span of the orthonormal columns of `basis`.
pub fn dist_to_span<S: Field>(basis: &Mat<S>, x: &Vect<S>) -> f64 {
    if basis.ncols() == 0 {
        return x.norm();
    }
    (x - project_onto_basis(basis, x)).norm()
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve<S: Field>(a: &Mat<S>, b: &Vect<S>) -> Result<Vect<S>, CoreError> {
    a.clone().lu().solve(b).ok_or(CoreError::SingularSystem)
}

/// Component of `v` orthogonal to the span of the orthonormal vectors in
/// `basis` (two Gram--Schmidt passes).
pub fn perp_component<S: Field>(basis: &[Vect<S>], v: &Vect<S>) -> Vect<S> {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = inner(&r, b);
            r.axpy(-c, b, S::one());
        }
    }
    r
}

/// Gram--Schmidt with one reorthogonalization pass. Returns `None` when the
/// residual is numerically zero relative to `‖v‖`.
pub fn orthonormalize_against<S: Field>(basis: &[Vect<S>], v: &Vect<S>) -> Option<(Vect<S>, f64)> {
    let r = perp_component(basis, v);
    let n = r.norm();
    if n <= 1e-14 * v.norm().max(1.0) {
        None
    } else {
        Some((r / S::from_re(n), n))
    }
}
