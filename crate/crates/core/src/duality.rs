//! Test projections and biorthogonal dual bases.
//!
//! For a square matrix `A` and scalar `z`, the test projection acts on
//! `F = span{col_i(A - zI) : i > N}^perp`. The projected coordinate vectors
//! `U_i = Proj_F(-z e_i)` generate the ellipsoid controlling delocalization,
//! and the vectors `V_i = (-conj(z)^{-1} e'_i) ⊕ D q_i` with
//! `D = conj(z)^{-1} (Ã* - conj(z) I)^{-1}` form their dual basis in `F`.
//!
//! The module also houses the deterministic inequality checkers built on
//! these objects and the constructive witness for ellipsoid membership.

use crate::ellipsoid::{dist_to_ellipsoid, Ellipsoid};
use crate::error::CoreError;
use crate::field::Field;
use crate::linalg::{
    inner, orthonormal_complement_basis, project_onto_basis, singular_values, Mat, Vect,
};

/// `A`, `z`, the orthonormal basis of the test space `F`, and the projected
/// coordinate vectors `U_i = Proj_F(-z e_i)`, `i = 1..N`.
#[derive(Debug, Clone)]
pub struct TestProjectionContext<S: Field> {
    pub a: Mat<S>,
    pub z: S,
    pub n_proj: usize,
    pub f_basis: Mat<S>,
    pub u: Vec<Vect<S>>,
}

impl<S: Field> TestProjectionContext<S> {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Largest inner product between an `F`-basis column and a crossed-out
    /// column of `A - zI`; should be at roundoff scale.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let shifted = shifted_matrix(&self.a, self.z);
        let mut worst = 0.0f64;
        for j in self.n_proj..n {
            let col = shifted.column(j).into_owned();
            let prods = self.f_basis.adjoint() * &col;
            worst = worst.max(prods.norm() / col.norm().max(1e-300));
        }
        worst
    }
}

/// Dual basis data: `D`, the conjugated row stubs `q_i`, and the duals `V_i`.
#[derive(Debug, Clone)]
pub struct DualBasisData<S: Field> {
    pub z: S,
    pub n_proj: usize,
    pub d: Mat<S>,
    pub q: Vec<Vect<S>>,
    pub v: Vec<Vect<S>>,
}

/// A `δ`-perturbation `W_i = V_i - (conj(z)^{-1}/|z^{-1}|) δ e_i` of the dual
/// basis, together with the first-block coefficient
/// `κ = -(conj(z)^{-1}/|z^{-1}|)(|z^{-1}| + δ)`.
#[derive(Debug, Clone)]
pub struct PerturbedDual<S: Field> {
    pub w: Vec<Vect<S>>,
    pub kappa: S,
    pub delta: f64,
}

pub fn shifted_matrix<S: Field>(a: &Mat<S>, z: S) -> Mat<S> {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= z;
    }
    m
}

/// Builds the test projection for the first `n_proj` coordinates.
///
/// Requires columns `n_proj+1 .. n` of `A - zI` to have full rank; on
/// `RankDeficient` the caller resamples the matrix.
pub fn build_test_projection<S: Field>(
    a: &Mat<S>,
    z: S,
    n_proj: usize,
) -> Result<TestProjectionContext<S>, CoreError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(CoreError::InvalidParameter("A must be square".into()));
    }
    if n_proj == 0 || n_proj >= n {
        return Err(CoreError::InvalidParameter(format!(
            "need 0 < N < n, got N = {n_proj}, n = {n}"
        )));
    }
    let shifted = shifted_matrix(a, z);
    let tail = shifted.columns(n_proj, n - n_proj).into_owned();
    let f_basis = orthonormal_complement_basis(&tail)?;
    let mut u = Vec::with_capacity(n_proj);
    for i in 0..n_proj {
        let mut e = Vect::<S>::zeros(n);
        e[i] = -z;
        u.push(project_onto_basis(&f_basis, &e));
    }
    Ok(TestProjectionContext {
        a: a.clone(),
        z,
        n_proj,
        f_basis,
        u,
    })
}

/// The explicit dual basis of `U_1..U_N` in `F`.
///
/// Fails with `SingularSubmatrix` when `Ã* - conj(z) I` is not invertible and
/// rejects `z = 0` (the null-vector path covers that regime).
pub fn dual_basis<S: Field>(ctx: &TestProjectionContext<S>) -> Result<DualBasisData<S>, CoreError> {
    let n = ctx.dim();
    let n_proj = ctx.n_proj;
    let m = n - n_proj;
    let z = ctx.z;
    if z.modulus() == 0.0 {
        return Err(CoreError::PreconditionViolated(
            "dual basis requires z != 0".into(),
        ));
    }
    let zbar_inv = S::one() / z.conjugate();

    // tilde A is the principal submatrix with the first N rows/columns gone
    let a_tilde = ctx.a.view((n_proj, n_proj), (m, m)).into_owned();
    let mut m_mat = a_tilde.adjoint();
    for i in 0..m {
        m_mat[(i, i)] -= z.conjugate();
    }
    let inv = m_mat.lu().try_inverse().ok_or(CoreError::SingularSubmatrix)?;
    let d = inv * zbar_inv;

    let mut q = Vec::with_capacity(n_proj);
    let mut v = Vec::with_capacity(n_proj);
    for i in 0..n_proj {
        let qi = Vect::<S>::from_fn(m, |l, _| ctx.a[(i, n_proj + l)].conjugate());
        let dqi = &d * &qi;
        let mut vi = Vect::<S>::zeros(n);
        vi[i] = -zbar_inv;
        for l in 0..m {
            vi[n_proj + l] = dqi[l];
        }
        q.push(qi);
        v.push(vi);
    }
    Ok(DualBasisData {
        z,
        n_proj,
        d,
        q,
        v,
    })
}

/// `max_{i,j} |<U_i, V_j> - δ_ij|`, raw and normalized by `‖U_i‖ ‖V_j‖`.
pub fn biorthogonality_defect<S: Field>(u: &[Vect<S>], v: &[Vect<S>]) -> (f64, f64) {
    let mut raw = 0.0f64;
    let mut normalized = 0.0f64;
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            let p = inner(ui, vj);
            let target = if i == j { S::one() } else { S::zero() };
            let err = (p - target).modulus();
            raw = raw.max(err);
            normalized = normalized.max(err / (ui.norm() * vj.norm()).max(1e-300));
        }
    }
    (raw, normalized)
}

/// Distance of each `V_i` from `F` (they must lie inside, up to roundoff).
pub fn max_dist_from_f<S: Field>(ctx: &TestProjectionContext<S>, v: &[Vect<S>]) -> f64 {
    v.iter()
        .map(|vi| (vi - project_onto_basis(&ctx.f_basis, vi)).norm() / vi.norm().max(1e-300))
        .fold(0.0, f64::max)
}

/// The perturbed dual `W_i = V_i - (conj(z)^{-1}/|z^{-1}|) δ e_i`.
pub fn perturbed_dual<S: Field>(dual: &DualBasisData<S>, delta: f64) -> Result<PerturbedDual<S>, CoreError> {
    if delta <= 0.0 {
        return Err(CoreError::InvalidParameter("delta must be positive".into()));
    }
    let z = dual.z;
    if z.modulus() == 0.0 {
        return Err(CoreError::PreconditionViolated("z must be nonzero".into()));
    }
    let zbar_inv = S::one() / z.conjugate();
    let zinv_mod = zbar_inv.modulus();
    let unit = zbar_inv * S::from_re(1.0 / zinv_mod);
    let kappa = -unit * S::from_re(zinv_mod + delta);
    let mut w = Vec::with_capacity(dual.v.len());
    for (i, vi) in dual.v.iter().enumerate() {
        let mut wi = vi.clone();
        wi[i] -= unit * S::from_re(delta);
        w.push(wi);
    }
    Ok(PerturbedDual { w, kappa, delta })
}

/// Outcome of a deterministic inequality check, with the signed slack
/// `rhs - lhs` (non-negative means the inequality holds).
#[derive(Debug, Clone, Copy)]
pub struct CheckOutcome {
    pub holds: bool,
    pub slack: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks `β sqrt(r) s_min(M') <= θ sqrt(k) s_max(M) + τ` for an almost-null
/// vector with prescribed small/large coordinate sets.
///
/// `i_small` indexes coordinates with `|u_i| <= θ`, `j_large` those with
/// `|u_j| >= β`; the test space is the complement of the remaining columns.
#[allow(clippy::too_many_arguments)]
pub fn lemma_determ_check<S: Field>(
    b: &Mat<S>,
    u: &Vect<S>,
    theta: f64,
    beta: f64,
    tau: f64,
    i_small: &[usize],
    j_large: &[usize],
) -> Result<CheckOutcome, CoreError> {
    let m = b.nrows();
    let n = b.ncols();
    if u.nrows() != n {
        return Err(CoreError::InvalidParameter("u dimension mismatch".into()));
    }
    if !(beta > theta && theta > 0.0) {
        return Err(CoreError::PreconditionViolated(format!(
            "need beta > theta > 0, got theta = {theta}, beta = {beta}"
        )));
    }
    if tau < 0.0 {
        return Err(CoreError::PreconditionViolated("tau must be >= 0".into()));
    }
    if i_small.is_empty() || j_large.is_empty() {
        return Err(CoreError::PreconditionViolated(
            "both index sets must be nonempty".into(),
        ));
    }
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(CoreError::PreconditionViolated("u must be a unit vector".into()));
    }
    let residual = (b * u).norm();
    if residual > tau * (1.0 + 1e-9) + 1e-300 {
        return Err(CoreError::PreconditionViolated(format!(
            "‖Bu‖ = {residual:.3e} exceeds tau = {tau:.3e}"
        )));
    }
    let mut seen = vec![false; n];
    for &i in i_small {
        if i >= n || seen[i] {
            return Err(CoreError::PreconditionViolated("index sets overlap or out of range".into()));
        }
        seen[i] = true;
        if u[i].modulus() > theta * (1.0 + 1e-12) {
            return Err(CoreError::PreconditionViolated(format!(
                "|u_{i}| = {} exceeds theta",
                u[i].modulus()
            )));
        }
    }
    for &j in j_large {
        if j >= n || seen[j] {
            return Err(CoreError::PreconditionViolated("index sets overlap or out of range".into()));
        }
        seen[j] = true;
        if u[j].modulus() < beta * (1.0 - 1e-12) {
            return Err(CoreError::PreconditionViolated(format!(
                "|u_{j}| = {} below beta",
                u[j].modulus()
            )));
        }
    }

    let outside: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    let f_basis = if outside.is_empty() {
        Mat::<S>::identity(m, m)
    } else {
        let mut cols = Mat::<S>::zeros(m, outside.len());
        for (c, &i) in outside.iter().enumerate() {
            cols.set_column(c, &b.column(i));
        }
        orthonormal_complement_basis(&cols)?
    };

    let project_block = |idx: &[usize]| -> Mat<S> {
        let mut blk = Mat::<S>::zeros(m, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            blk.set_column(c, &project_onto_basis(&f_basis, &b.column(i).into_owned()));
        }
        blk
    };
    let m_small = project_block(i_small);
    let m_large = project_block(j_large);

    let s_small = singular_values(&m_small);
    let s_large = singular_values(&m_large);
    let s_max = s_small.first().copied().unwrap_or(0.0);
    let s_min = s_large.last().copied().unwrap_or(0.0);

    let k = i_small.len() as f64;
    let r = j_large.len() as f64;
    let lhs = beta * r.sqrt() * s_min;
    let rhs = theta * k.sqrt() * s_max + tau;
    Ok(CheckOutcome {
        holds: lhs <= rhs,
        slack: rhs - lhs,
        lhs,
        rhs,
    })
}

/// Result of the two-inclusion check on an (approximate) eigenvector.
#[derive(Debug, Clone, Copy)]
pub struct TwoConditionsOutcome {
    pub a_holds: bool,
    pub b_holds: bool,
    pub dist_a: f64,
    pub radius_a: f64,
    pub dist_b: f64,
    pub radius_b: f64,
}

/// Checks the inclusions on the test projections induced by an approximate
/// eigenvector with N-1 small coordinates and a large N-th coordinate:
///
/// (a) `Proj_F(-z e_N)` lies in `(θ sqrt(N)/β) E' + (τ/β + TNθ/β + T) B`,
/// (b) `Proj_F(col_N(A - zI))` lies in `(θ sqrt(N)/β) E' + (τ/β + TNθ/β) B`,
///
/// where `E'` is generated by `U_1..U_{N-1}` and `T` caps
/// `‖Proj_F col_l(A)‖` for `l <= N`.
pub fn two_conditions_check<S: Field>(
    ctx: &TestProjectionContext<S>,
    v: &Vect<S>,
    theta: f64,
    beta: f64,
    tau: f64,
    t_cap: f64,
) -> Result<TwoConditionsOutcome, CoreError> {
    let n = ctx.dim();
    let n_proj = ctx.n_proj;
    if v.nrows() != n {
        return Err(CoreError::InvalidParameter("vector dimension mismatch".into()));
    }
    if !(beta > theta && theta >= 0.0) {
        return Err(CoreError::PreconditionViolated("need beta > theta >= 0".into()));
    }
    let shifted = shifted_matrix(&ctx.a, ctx.z);
    let res = (&shifted * v).norm();
    if res > tau * (1.0 + 1e-9) + 1e-300 {
        return Err(CoreError::PreconditionViolated(format!(
            "‖(A - zI)v‖ = {res:.3e} exceeds tau"
        )));
    }
    for i in 0..n_proj - 1 {
        if v[i].modulus() > theta * (1.0 + 1e-12) {
            return Err(CoreError::PreconditionViolated(format!(
                "|v_{i}| exceeds theta"
            )));
        }
    }
    if v[n_proj - 1].modulus() < beta * (1.0 - 1e-12) {
        return Err(CoreError::PreconditionViolated("|v_N| below beta".into()));
    }
    for l in 0..n_proj {
        let p = project_onto_basis(&ctx.f_basis, &ctx.a.column(l).into_owned());
        if p.norm() > t_cap * (1.0 + 1e-12) {
            return Err(CoreError::PreconditionViolated(format!(
                "‖Proj_F col_{l}(A)‖ = {:.3e} exceeds T",
                p.norm()
            )));
        }
    }

    let nf = n_proj as f64;
    let dilation = theta * nf.sqrt() / beta;
    let eprime = if n_proj >= 2 {
        let mut g = Mat::<S>::zeros(n, n_proj - 1);
        for i in 0..n_proj - 1 {
            g.set_column(i, &ctx.u[i]);
        }
        Ellipsoid::from_generators(g)?
    } else {
        Ellipsoid::from_generators(Mat::<S>::zeros(n, 0))?
    };

    let x_a = ctx.u[n_proj - 1].clone();
    let dist_a = dist_to_ellipsoid(&x_a, &eprime, dilation);
    let radius_a = tau / beta + t_cap * nf * theta / beta + t_cap;

    let x_b = project_onto_basis(&ctx.f_basis, &shifted.column(n_proj - 1).into_owned());
    let dist_b = dist_to_ellipsoid(&x_b, &eprime, dilation);
    let radius_b = tau / beta + t_cap * nf * theta / beta;

    Ok(TwoConditionsOutcome {
        a_holds: dist_a <= radius_a + 1e-12,
        b_holds: dist_b <= radius_b + 1e-12,
        dist_a,
        radius_a,
        dist_b,
        radius_b,
    })
}

/// Constructive witness for `U_N ∈ δ E(U_1..U_{N-1}) + T B`:
/// from `U_N = δ Σ c_i U_i + T w` it returns `Y = -T w ∈ E(U)` with
/// `‖Y‖ <= T`, `<Y_N, Y> = -1` and `Σ_{l<N} |<Y_l, Y>|² <= δ²` against the
/// dual sequence.
pub struct WitnessData<S: Field> {
    pub y: Vect<S>,
    pub coeffs: Vect<S>,
}

pub fn witness_y<S: Field>(
    u: &[Vect<S>],
    c: &Vect<S>,
    w: &Vect<S>,
    delta: f64,
    t_cap: f64,
) -> Result<WitnessData<S>, CoreError> {
    let n_gen = u.len();
    if n_gen == 0 || c.nrows() != n_gen - 1 {
        return Err(CoreError::InvalidParameter(
            "need coefficients for the first N-1 generators".into(),
        ));
    }
    if c.norm() > 1.0 + 1e-9 {
        return Err(CoreError::CertificateInvalid("‖c‖ exceeds 1".into()));
    }
    if w.norm() > 1.0 + 1e-9 {
        return Err(CoreError::CertificateInvalid("‖w‖ exceeds 1".into()));
    }
    // membership decomposition U_N = δ Σ c_i U_i + T w must reproduce U_N
    let mut recon = w * S::from_re(t_cap);
    for i in 0..n_gen - 1 {
        recon += &u[i] * (c[i] * S::from_re(delta));
    }
    let scale = u[n_gen - 1].norm().max(1.0);
    if (&recon - &u[n_gen - 1]).norm() > 1e-9 * scale {
        return Err(CoreError::CertificateInvalid(format!(
            "membership decomposition off by {:.3e}",
            (&recon - &u[n_gen - 1]).norm()
        )));
    }

    let mut coeffs = Vect::<S>::zeros(n_gen);
    for i in 0..n_gen - 1 {
        coeffs[i] = c[i] * S::from_re(delta);
    }
    coeffs[n_gen - 1] = -S::one();
    let mut y = Vect::<S>::zeros(u[0].nrows());
    for i in 0..n_gen {
        y += &u[i] * coeffs[i];
    }
    Ok(WitnessData { y, coeffs })
}

/// Verifies the witness contract against the dual sequence: `|<Y_N, Y>| = 1`
/// and `Σ_{l<N} |<Y_l, Y>|² <= δ²` (up to `rel_tol`).
pub fn verify_witness<S: Field>(
    witness: &WitnessData<S>,
    dual: &[Vect<S>],
    delta: f64,
    t_cap: f64,
    rel_tol: f64,
) -> Result<(), CoreError> {
    let n_gen = dual.len();
    if witness.y.norm() > t_cap * (1.0 + rel_tol) {
        return Err(CoreError::CertificateInvalid(format!(
            "‖Y‖ = {:.6} exceeds T = {t_cap}",
            witness.y.norm()
        )));
    }
    let p_last = inner(&witness.y, &dual[n_gen - 1]);
    if (p_last.modulus() - 1.0).abs() > 1e-9 {
        return Err(CoreError::CertificateInvalid(format!(
            "|<Y_N, Y>| = {} != 1",
            p_last.modulus()
        )));
    }
    let sum_sq: f64 = dual[..n_gen - 1]
        .iter()
        .map(|yl| inner(&witness.y, yl).modulus_squared())
        .sum();
    if sum_sq > delta * delta * (1.0 + 1e-6) {
        return Err(CoreError::CertificateInvalid(format!(
            "Σ |<Y_l, Y>|² = {sum_sq:.3e} exceeds δ² = {:.3e}",
            delta * delta
        )));
    }
    Ok(())
}

/// Rescales the witness so its product with `W_N` is exactly one
/// (`Y := Y / <Y, W_N>`); valid when `|<Y, W_N>| >= 1/2`, which holds under
/// `Tδ <= 1/2`. The scaled products against `W_1..W_{N-1}` stay below
/// `2δ + 2δT`.
pub fn witness_for_perturbed<S: Field>(
    w_seq: &[Vect<S>],
    y: &Vect<S>,
) -> Result<Vect<S>, CoreError> {
    let n_gen = w_seq.len();
    let p = inner(y, &w_seq[n_gen - 1]);
    if p.modulus() < 0.5 {
        return Err(CoreError::CertificateInvalid(format!(
            "|<Y, W_N>| = {} below 1/2; is Tδ <= 1/2?",
            p.modulus()
        )));
    }
    Ok(y * (S::one() / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, trial_rng, unit_sphere, EnsembleSpec, EntryLaw};
    use crate::field::FieldTag;
    use num_complex::Complex64;

    #[test]
    fn zero_matrix_projection() {
        // A = 0, z = 1, n = 3, N = 1: A - zI = -I, F = span{e_1},
        // U_1 = Proj_F(-e_1) = -e_1
        let a = Mat::<f64>::zeros(3, 3);
        let ctx = build_test_projection(&a, 1.0, 1).unwrap();
        assert_eq!(ctx.f_basis.ncols(), 1);
        assert!((ctx.u[0].norm() - 1.0).abs() < 1e-12);
        assert!((ctx.u[0][0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_z_gives_zero_u() {
        let spec = EnsembleSpec::new(8, 8, EntryLaw::Gaussian, FieldTag::Real, 21);
        let a: Mat<f64> = sample_matrix(&spec, 0);
        let ctx = build_test_projection(&a, 0.0, 2).unwrap();
        for ui in &ctx.u {
            assert!(ui.norm() < 1e-14);
        }
        // and the dual basis rejects z = 0
        assert!(matches!(
            dual_basis(&ctx),
            Err(CoreError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn projection_orthogonality_residuals() {
        let spec = EnsembleSpec::new(30, 30, EntryLaw::Gaussian, FieldTag::Real, 22);
        let a: Mat<f64> = sample_matrix(&spec, 0);
        let z = (30f64).sqrt();
        let ctx = build_test_projection(&a, z, 5).unwrap();
        assert!(ctx.orthogonality_defect() < 1e-10);
    }

    #[test]
    fn dual_basis_2x2_closed_form() {
        // n = 2, N = 1: V_1 = (-conj(z)^{-1}, conj(z)^{-1} (conj(a22) - conj(z))^{-1} conj(a12))
        let a = Mat::<f64>::from_row_slice(2, 2, &[1.3, -0.7, 0.4, 2.1]);
        let z = 0.9;
        let ctx = build_test_projection(&a, z, 1).unwrap();
        let dual = dual_basis(&ctx).unwrap();
        let v1 = &dual.v[0];
        assert!((v1[0] - (-1.0 / z)).abs() < 1e-12);
        let expect = (1.0 / z) * (1.0 / (a[(1, 1)] - z)) * a[(0, 1)];
        assert!((v1[1] - expect).abs() < 1e-12);
        let p = inner(&ctx.u[0], v1);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_basis_diagonal_case() {
        // diagonal A: D diagonal, q_i = 0, V_i = -conj(z)^{-1} e_i and
        // U_i = -z e_i exactly
        let mut a = Mat::<f64>::zeros(5, 5);
        for i in 0..5 {
            a[(i, i)] = (i + 1) as f64;
        }
        let z = 0.37;
        let ctx = build_test_projection(&a, z, 2).unwrap();
        let dual = dual_basis(&ctx).unwrap();
        let (raw, _) = biorthogonality_defect(&ctx.u, &dual.v);
        assert!(raw < 1e-12);
        for (i, vi) in dual.v.iter().enumerate() {
            assert!((vi[i] - (-1.0 / z)).abs() < 1e-12);
            assert!(dual.q[i].norm() < 1e-15);
        }
    }

    #[test]
    fn biorthogonality_random_real_and_complex() {
        let n = 40;
        let z_mod = (n as f64).sqrt();
        let spec_r = EnsembleSpec::new(n, n, EntryLaw::Gaussian, FieldTag::Real, 23);
        let a: Mat<f64> = sample_matrix(&spec_r, 0);
        let ctx = build_test_projection(&a, z_mod, 8).unwrap();
        let dual = dual_basis(&ctx).unwrap();
        let (raw, norm) = biorthogonality_defect(&ctx.u, &dual.v);
        assert!(raw < 1e-8, "raw defect {raw:.3e}");
        assert!(norm < 1e-8);
        assert!(max_dist_from_f(&ctx, &dual.v) < 1e-8);

        let spec_c = EnsembleSpec::new(n, n, EntryLaw::Gaussian, FieldTag::Complex, 24);
        let ac: Mat<Complex64> = sample_matrix(&spec_c, 0);
        let zc = Complex64::new(z_mod, 0.5);
        let ctx = build_test_projection(&ac, zc, 8).unwrap();
        let dual = dual_basis(&ctx).unwrap();
        let (raw, _) = biorthogonality_defect(&ctx.u, &dual.v);
        assert!(raw < 1e-8, "complex raw defect {raw:.3e}");
    }

    #[test]
    fn perturbed_dual_structure() {
        let n = 24;
        let spec = EnsembleSpec::new(n, n, EntryLaw::Gaussian, FieldTag::Real, 25);
        let a: Mat<f64> = sample_matrix(&spec, 0);
        let z = (n as f64).sqrt();
        let ctx = build_test_projection(&a, z, 4).unwrap();
        let dual = dual_basis(&ctx).unwrap();
        let delta = 1e-2;
        let pert = perturbed_dual(&dual, delta).unwrap();
        // perturbation norm is exactly delta
        for (wi, vi) in pert.w.iter().zip(&dual.v) {
            assert!(((wi - vi).norm() - delta).abs() < 1e-12);
        }
        // kappa = -(1/z + delta) for positive real z, sitting in coord i
        assert!((pert.kappa - (-(1.0 / z + delta))).abs() < 1e-12);
        for (i, wi) in pert.w.iter().enumerate() {
            for j in 0..4 {
                let expect = if i == j { pert.kappa } else { 0.0 };
                assert!((wi[j] - expect).abs() < 1e-12);
            }
        }
        // delta -> 0 recovers V
        let tiny = perturbed_dual(&dual, 1e-12).unwrap();
        for (wi, vi) in tiny.w.iter().zip(&dual.v) {
            assert!((wi - vi).norm() < 1e-11);
        }
    }

    #[test]
    fn determ_check_null_vector() {
        let spec = EnsembleSpec::new(19, 20, EntryLaw::Gaussian, FieldTag::Real, 26);
        let b: Mat<f64> = sample_matrix(&spec, 0);
        let u = crate::ensembles::null_vector(&b).unwrap();
        let tau = 1e-10 * b.norm();
        let mags: Vec<(usize, f64)> = u.iter().enumerate().map(|(i, x)| (i, x.abs())).collect();
        let mut sorted = mags.clone();
        sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let i_small: Vec<usize> = sorted[..4].iter().map(|p| p.0).collect();
        let j_large: Vec<usize> = sorted[16..].iter().map(|p| p.0).collect();
        let theta = sorted[3].1 + 1e-15;
        let beta = sorted[16].1 - 1e-15;
        let out = lemma_determ_check(&b, &u, theta, beta, tau, &i_small, &j_large).unwrap();
        assert!(out.holds, "slack {:.3e}", out.slack);
        assert!(out.slack >= -1e-10);
    }

    #[test]
    fn determ_check_degenerate_k1_r1() {
        // k = r = 1 reduces to beta ‖Proj_F col_j‖ <= theta ‖Proj_F col_i‖ + tau
        let spec = EnsembleSpec::new(9, 10, EntryLaw::Gaussian, FieldTag::Real, 27);
        let b: Mat<f64> = sample_matrix(&spec, 0);
        let u = crate::ensembles::null_vector(&b).unwrap();
        let tau = 1e-10 * b.norm();
        let mut idx: Vec<usize> = (0..10).collect();
        idx.sort_by(|&a, &c| u[a].abs().partial_cmp(&u[c].abs()).unwrap());
        let small = idx[0];
        let large = idx[9];
        let theta = u[small].abs() + 1e-15;
        let beta = u[large].abs() - 1e-15;
        let out = lemma_determ_check(&b, &u, theta, beta, tau, &[small], &[large]).unwrap();
        assert!(out.holds);
        // oracle: direct evaluation of the degenerate form
        let outside: Vec<usize> = (0..10).filter(|&i| i != small && i != large).collect();
        let mut cols = Mat::<f64>::zeros(9, outside.len());
        for (c, &i) in outside.iter().enumerate() {
            cols.set_column(c, &b.column(i));
        }
        let f = orthonormal_complement_basis(&cols).unwrap();
        let pj = project_onto_basis(&f, &b.column(large).into_owned()).norm();
        let pi = project_onto_basis(&f, &b.column(small).into_owned()).norm();
        assert!((out.lhs - beta * pj).abs() < 1e-10);
        assert!((out.rhs - (theta * pi + tau)).abs() < 1e-10);
    }

    #[test]
    fn determ_check_rejects_equal_thresholds() {
        let spec = EnsembleSpec::new(9, 10, EntryLaw::Gaussian, FieldTag::Real, 28);
        let b: Mat<f64> = sample_matrix(&spec, 0);
        let u = crate::ensembles::null_vector(&b).unwrap();
        let err = lemma_determ_check(&b, &u, 0.5, 0.5, 1.0, &[0], &[1]);
        assert!(matches!(err, Err(CoreError::PreconditionViolated(_))));
    }

    #[test]
    fn two_conditions_on_exact_eigenvector() {
        // build an eigenpair, permute coordinates so the hypotheses hold
        let n = 24;
        let spec = EnsembleSpec::new(n, n, EntryLaw::Gaussian, FieldTag::Real, 29);
        let base: Mat<f64> = sample_matrix(&spec, 3);
        let pairs = crate::eig::eigenpairs(&base).unwrap();
        // pick a genuinely complex or real eigenpair; use the complexified
        // matrix so any eigenpair works
        let p = &pairs[n / 2];
        let ac = Mat::<Complex64>::from_fn(n, n, |i, j| Complex64::new(base[(i, j)], 0.0));
        let v = p.v.clone();

        // order coordinates of v by magnitude: we need the N-1 smallest
        // first, then a large one at position N-1
        let n_proj = 4;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap());
        let mut perm: Vec<usize> = idx[..n_proj - 1].to_vec();
        perm.push(idx[n - 1]);
        for &i in &idx {
            if !perm.contains(&i) {
                perm.push(i);
            }
        }
        // permuted matrix P A P^T keeps the spectrum; eigenvector permutes
        let mut ap = Mat::<Complex64>::zeros(n, n);
        let mut vp = Vect::<Complex64>::zeros(n);
        for (new_i, &old_i) in perm.iter().enumerate() {
            vp[new_i] = v[old_i];
            for (new_j, &old_j) in perm.iter().enumerate() {
                ap[(new_i, new_j)] = ac[(old_i, old_j)];
            }
        }
        let theta = vp.rows(0, n_proj - 1).iter().map(|z| z.norm()).fold(0.0, f64::max) + 1e-14;
        let beta = vp[n_proj - 1].norm() - 1e-14;
        assert!(beta > theta);
        let tau = 1e-8 * ap.norm();

        let ctx = build_test_projection(&ap, p.lambda, n_proj).unwrap();
        let t_cap = (0..n_proj)
            .map(|l| project_onto_basis(&ctx.f_basis, &ap.column(l).into_owned()).norm())
            .fold(0.0, f64::max)
            + 1e-12;
        let out = two_conditions_check(&ctx, &vp, theta, beta, tau, t_cap).unwrap();
        assert!(out.a_holds, "dist_a {} radius_a {}", out.dist_a, out.radius_a);
        assert!(out.b_holds, "dist_b {} radius_b {}", out.dist_b, out.radius_b);
    }

    #[test]
    fn two_conditions_rejects_bad_hypothesis() {
        let n = 12;
        let spec = EnsembleSpec::new(n, n, EntryLaw::Gaussian, FieldTag::Real, 30);
        let a: Mat<f64> = sample_matrix(&spec, 0);
        let ctx = build_test_projection(&a, 1.0, 3).unwrap();
        let mut rng = trial_rng(31, 0);
        let v = unit_sphere::<f64>(n, &mut rng);
        // tau = 0 cannot hold for a random vector
        assert!(two_conditions_check(&ctx, &v, 0.1, 0.2, 0.0, 100.0).is_err());
    }

    #[test]
    fn witness_trivial_case() {
        // U = (e_1, e_2), U_2 = 0·e_1 + T·w with w = e_2
        let e1 = Vect::<f64>::from_column_slice(&[1.0, 0.0]);
        let e2 = Vect::<f64>::from_column_slice(&[0.0, 1.0]);
        let t_cap = 3.0;
        let u = vec![e1, &e2 * t_cap];
        let c = Vect::<f64>::zeros(1);
        let w = e2.clone();
        let wd = witness_y(&u, &c, &w, 0.5, t_cap).unwrap();
        assert!((&wd.y + &e2 * t_cap).norm() < 1e-12, "Y = -T e_2");
    }

    #[test]
    fn witness_random_biorthogonal() {
        // random generators, U_N constructed from the membership relation
        let mut rng = trial_rng(32, 0);
        let m = 10;
        let n_gen = 5;
        let delta = 0.08;
        let t_cap = 2.0;
        for _ in 0..30 {
            let mut gens: Vec<Vect<f64>> = (0..n_gen - 1)
                .map(|_| unit_sphere::<f64>(m, &mut rng) * 1.7)
                .collect();
            let c_raw = unit_sphere::<f64>(n_gen - 1, &mut rng) * 0.9;
            let w = unit_sphere::<f64>(m, &mut rng) * 0.95;
            let mut last = &w * t_cap;
            for i in 0..n_gen - 1 {
                last += &gens[i] * (delta * c_raw[i]);
            }
            gens.push(last);
            let wd = witness_y(&gens, &c_raw, &w, delta, t_cap).unwrap();
            assert!(wd.y.norm() <= t_cap * (1.0 + 1e-9));

            // dual sequence: conjugated rows of the inverse generator matrix
            let mut bmat = Mat::<f64>::zeros(m, n_gen);
            for (j, g) in gens.iter().enumerate() {
                bmat.set_column(j, g);
            }
            // restrict to the span: solve least squares via normal equations
            let gram = bmat.adjoint() * &bmat;
            let gram_inv = gram.clone().lu().try_inverse().unwrap();
            // dual vectors Y_l = B (B^H B)^{-1} e_l satisfy <U_i, Y_l> = δ_il
            let duals: Vec<Vect<f64>> = (0..n_gen)
                .map(|l| {
                    let mut e = Vect::<f64>::zeros(n_gen);
                    e[l] = 1.0;
                    &bmat * (&gram_inv * e)
                })
                .collect();
            verify_witness(&wd, &duals, delta, t_cap, 1e-9).unwrap();
        }
    }
}
