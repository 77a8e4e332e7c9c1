//! Ellipsoids generated by vector sequences, and point-to-ellipsoid distance.
//!
//! `E = { sum_i a_i U_i : ‖a‖₂ <= 1 }` is the image of the unit ball under the
//! linear map sending `e_i` to the generator `U_i`. Its semi-axes are the
//! singular values of the generator matrix, cached at construction.
//!
//! The distance from a point to a scaled copy `δE` is computed in the SVD
//! frame: per-coordinate phases align away (in the complex case the ball of
//! coefficients is complex), leaving a real secular equation in the Lagrange
//! multiplier which is solved by Newton iteration with a bisection fallback.

use crate::error::CoreError;
use crate::field::Field;
use crate::linalg::{ensure_finite_mat, svd_values_axes, Mat, Vect};

#[derive(Debug, Clone)]
pub struct Ellipsoid<S: Field> {
    generators: Mat<S>,
    /// Singular values of the generator map from coefficient space, padded
    /// with zeros up to the generator count, non-increasing.
    semi_axes: Vec<f64>,
    /// Left singular vectors aligned with `semi_axes[..min(m, N)]`.
    axes: Mat<S>,
}

impl<S: Field> Ellipsoid<S> {
    /// Builds the ellipsoid from generator columns. Entries must be finite.
    pub fn from_generators(generators: Mat<S>) -> Result<Self, CoreError> {
        ensure_finite_mat(&generators)?;
        let n_gen = generators.ncols();
        if n_gen == 0 {
            return Ok(Ellipsoid {
                axes: Mat::<S>::zeros(generators.nrows(), 0),
                semi_axes: Vec::new(),
                generators,
            });
        }
        let (mut s, axes) = svd_values_axes(&generators);
        s.resize(n_gen, 0.0);
        Ok(Ellipsoid {
            generators,
            semi_axes: s,
            axes,
        })
    }

    pub fn from_generator_list(gens: &[Vect<S>]) -> Result<Self, CoreError> {
        if gens.is_empty() {
            return Err(CoreError::InvalidParameter(
                "empty generator list without ambient dimension".into(),
            ));
        }
        let m = gens[0].nrows();
        let mut g = Mat::<S>::zeros(m, gens.len());
        for (j, c) in gens.iter().enumerate() {
            if c.nrows() != m {
                return Err(CoreError::InvalidParameter(
                    "generators of mixed dimension".into(),
                ));
            }
            g.set_column(j, c);
        }
        Self::from_generators(g)
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.nrows()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.ncols()
    }

    pub fn generators(&self) -> &Mat<S> {
        &self.generators
    }

    /// Semi-axes `s_1 >= s_2 >= ... >= s_N >= 0` (one per generator).
    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn axes(&self) -> &Mat<S> {
        &self.axes
    }
}

/// Distance from `x` to `δ·E`, accurate to about 1e-10 absolute.
///
/// With `δ = 0` the ellipsoid degenerates to the origin and the distance is
/// `‖x‖₂`.
pub fn dist_to_ellipsoid<S: Field>(x: &Vect<S>, e: &Ellipsoid<S>, delta: f64) -> f64 {
    assert_eq!(
        x.nrows(),
        e.ambient_dim(),
        "point dimension does not match the ellipsoid"
    );
    let n_axes = e.axes.ncols();
    if delta == 0.0 || n_axes == 0 {
        return x.norm();
    }

    // coordinates in the axis frame plus the orthogonal remainder
    let coords = e.axes.adjoint() * x;
    let mut rem_sq = (x.norm_squared() - coords.norm_squared()).max(0.0);

    let mut y: Vec<f64> = Vec::with_capacity(n_axes);
    let mut sigma: Vec<f64> = Vec::with_capacity(n_axes);
    for i in 0..n_axes {
        let ci = coords[i].modulus();
        let si = delta * e.semi_axes[i];
        if si > 0.0 {
            y.push(ci);
            sigma.push(si);
        } else {
            rem_sq += ci * ci;
        }
    }

    // inside test: sum (y_i / sigma_i)^2 <= 1
    let inside: f64 = y
        .iter()
        .zip(&sigma)
        .map(|(yi, si)| (yi / si) * (yi / si))
        .sum();
    if inside <= 1.0 {
        return rem_sq.sqrt();
    }

    let mu = solve_secular(&y, &sigma);
    let mut d_sq = rem_sq;
    for (yi, si) in y.iter().zip(&sigma) {
        let f = mu / (si * si + mu);
        d_sq += yi * yi * f * f;
    }
    d_sq.sqrt()
}

/// Solves `phi(mu) = sum_i sigma_i^2 y_i^2 / (sigma_i^2 + mu)^2 = 1` for
/// `mu > 0`, given `phi(0) > 1`. Newton steps run on the reformulation
/// `1/sqrt(phi) - 1`, which is nearly linear in `mu`; a bracket kept from
/// bisection guards every step.
fn solve_secular(y: &[f64], sigma: &[f64]) -> f64 {
    let b: Vec<f64> = y
        .iter()
        .zip(sigma)
        .map(|(yi, si)| si * si * yi * yi)
        .collect();
    let phi = |mu: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (bi, si) in b.iter().zip(sigma) {
            let d = si * si + mu;
            v += bi / (d * d);
            dv += -2.0 * bi / (d * d * d);
        }
        (v, dv)
    };

    let mut lo = 0.0f64;
    let mut hi = b.iter().sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    // phi(hi) <= sum b_i / hi^2 = 1; expand defensively against roundoff
    while phi(hi).0 > 1.0 {
        hi *= 2.0;
    }
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = phi(mu);
        if v > 1.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        // h(mu) = 1/sqrt(v) - 1, h'(mu) = -dv / (2 v^{3/2})
        let h = 1.0 / v.sqrt() - 1.0;
        let hp = -dv / (2.0 * v * v.sqrt());
        let mut next = if hp > 0.0 { mu - h / hp } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= 1e-15 * hi.max(1.0) || (next - mu).abs() <= 1e-16 * mu.max(1.0) {
            mu = next;
            break;
        }
        mu = next;
    }
    mu
}
