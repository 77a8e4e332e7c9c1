//! The isometric embedding `real(W) = Re(W) ⊕ Im(W)` of complex vectors into
//! real space of twice the dimension, and its action on ellipsoids.
//!
//! Inner products satisfy `<real(x), real(y)> = Re <x, y>`, so norms,
//! distances and orthogonal projections commute with the embedding.

use num_complex::Complex64;

use crate::ellipsoid::Ellipsoid;
use crate::error::CoreError;
use crate::linalg::{Mat, Vect};

/// `Re(x) ⊕ Im(x)`; preserves the Euclidean norm.
pub fn real_embed(x: &Vect<Complex64>) -> Vect<f64> {
    let m = x.nrows();
    let mut out = Vect::<f64>::zeros(2 * m);
    for i in 0..m {
        out[i] = x[i].re;
        out[m + i] = x[i].im;
    }
    out
}

/// Embeds a complex subspace basis: columns `b_i` become `real(b_i)`,
/// `real(i b_i)`. Orthonormal complex bases map to orthonormal real bases.
pub fn real_embed_basis(basis: &Mat<Complex64>) -> Mat<f64> {
    let m = basis.nrows();
    let k = basis.ncols();
    let mut out = Mat::<f64>::zeros(2 * m, 2 * k);
    for j in 0..k {
        let col = basis.column(j).into_owned();
        out.set_column(2 * j, &real_embed(&col));
        let icol = col.map(|z| z * Complex64::new(0.0, 1.0));
        out.set_column(2 * j + 1, &real_embed(&icol));
    }
    out
}

/// Embeds a complex ellipsoid with pairwise orthogonal generators
/// `X_1..X_k` into the real ellipsoid with semi-axis generators
/// `real(X_i), real(i X_i)`.
pub fn real_embed_ellipsoid(
    e: &Ellipsoid<Complex64>,
    ortho_tol: f64,
) -> Result<Ellipsoid<f64>, CoreError> {
    let g = e.generators();
    let k = g.ncols();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..k {
        scale = scale.max(g.column(i).norm_squared());
        for j in (i + 1)..k {
            let ip = g.column(j).dotc(&g.column(i)).norm();
            worst = worst.max(ip);
        }
    }
    if worst > ortho_tol * scale.max(1.0) {
        return Err(CoreError::NonOrthogonalGenerators(worst));
    }
    Ellipsoid::from_generators(real_embed_basis(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::dist_to_ellipsoid;
    use crate::ensembles::{trial_rng, unit_sphere};
    use crate::linalg::{householder_qr_full, inner, project_onto_basis};

    #[test]
    fn scalar_example() {
        let x = Vect::<Complex64>::from_column_slice(&[Complex64::new(1.0, 1.0)]);
        let r = real_embed(&x);
        assert_eq!(r.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn isometry_on_random_vectors() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let x = unit_sphere::<Complex64>(7, &mut rng) * Complex64::new(2.3, 0.0);
            assert!((real_embed(&x).norm() - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_products_preserved() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..50 {
            let x = unit_sphere::<Complex64>(6, &mut rng);
            let y = unit_sphere::<Complex64>(6, &mut rng);
            let lhs = real_embed(&x).dot(&real_embed(&y));
            let rhs = inner(&x, &y).re;
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_unit_generator() {
        // E generated by {e_1} in C^2: the embedding has two unit orthogonal
        // semi-axes
        let mut g = Mat::<Complex64>::zeros(2, 1);
        g[(0, 0)] = Complex64::new(1.0, 0.0);
        let e = Ellipsoid::from_generators(g).unwrap();
        let re = real_embed_ellipsoid(&e, 1e-10).unwrap();
        assert_eq!(re.generator_count(), 2);
        let g0 = re.generators().column(0).into_owned();
        let g1 = re.generators().column(1).into_owned();
        assert!((g0.norm() - 1.0).abs() < 1e-12);
        assert!((g1.norm() - 1.0).abs() < 1e-12);
        assert!(g0.dot(&g1).abs() < 1e-12);
        assert_eq!(re.semi_axes(), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_non_orthogonal_generators() {
        let mut g = Mat::<Complex64>::zeros(2, 2);
        g[(0, 0)] = Complex64::new(1.0, 0.0);
        g[(0, 1)] = Complex64::new(0.5, 0.0);
        g[(1, 1)] = Complex64::new(1.0, 0.0);
        let e = Ellipsoid::from_generators(g).unwrap();
        assert!(matches!(
            real_embed_ellipsoid(&e, 1e-10),
            Err(CoreError::NonOrthogonalGenerators(_))
        ));
    }

    #[test]
    fn projection_commutes_with_embedding() {
        // Proj_{real(E)}(real(Y)) = real(Proj_E(Y)) on a random complex
        // subspace
        let mut rng = trial_rng(3, 0);
        let m = 6;
        let k = 2;
        let raw = Mat::<Complex64>::from_fn(m, k, |i, j| {
            let v = unit_sphere::<Complex64>(1, &mut rng);
            v[0] * Complex64::new((i + j + 1) as f64, 0.0)
        });
        let (q, _) = householder_qr_full(&raw);
        let basis = q.columns(0, k).into_owned();
        let rbasis = real_embed_basis(&basis);
        for _ in 0..20 {
            let y = unit_sphere::<Complex64>(m, &mut rng);
            let lhs = project_onto_basis(&rbasis, &real_embed(&y));
            let rhs = real_embed(&project_onto_basis(&basis, &y));
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn embedded_distance_matches_complex_distance() {
        // for orthogonal generators the two distance computations agree
        let mut g = Mat::<Complex64>::zeros(3, 2);
        g[(0, 0)] = Complex64::new(1.5, 0.5);
        g[(1, 1)] = Complex64::new(0.0, 0.8);
        let e = Ellipsoid::from_generators(g).unwrap();
        let re = real_embed_ellipsoid(&e, 1e-10).unwrap();
        let mut rng = trial_rng(4, 0);
        for _ in 0..20 {
            let x = unit_sphere::<Complex64>(3, &mut rng) * Complex64::new(2.0, 0.0);
            let d_c = dist_to_ellipsoid(&x, &e, 0.9);
            let d_r = dist_to_ellipsoid(&real_embed(&x), &re, 0.9);
            assert!((d_c - d_r).abs() < 1e-9, "{d_c} vs {d_r}");
        }
    }
}
