//! Scalar field abstraction: every algorithm in this crate is generic over
//! the entry field, instantiated at `f64` (real) or `Complex<f64>` (complex).
//!
//! Mixing fields is a compile error, which enforces the "no mixed-field
//! operations" rule statically.

use nalgebra::ComplexField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Runtime tag naming the scalar field of a matrix/vector ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    /// Real dimension of the unit scalar: 1 for `f64`, 2 for `Complex<f64>`.
    /// This is the exponent `U` appearing in the complex-case probability
    /// bounds.
    pub fn real_dim(self) -> usize {
        match self {
            FieldTag::Real => 1,
            FieldTag::Complex => 2,
        }
    }
}

/// A Gaussian integer; over the reals the imaginary part must be zero.
///
/// Lattice values attached to discretization certificates are stored exactly
/// as integers rather than floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    pub fn norm(self) -> f64 {
        ((self.re as f64).powi(2) + (self.im as f64).powi(2)).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }
}

/// Scalar field over which the dense numerics run.
///
/// Implementations exist for `f64` and `Complex64` only. The associated
/// lattice is `Z` in the real case and the Gaussian integers `Z + iZ` in the
/// complex case.
pub trait Field:
    ComplexField<RealField = f64> + Copy + PartialEq + Send + Sync + 'static
{
    const TAG: FieldTag;

    fn from_re(x: f64) -> Self;
    fn from_complex(z: Complex64) -> Self;
    fn to_complex(self) -> Complex64;

    /// Nearest lattice point (coordinate-wise rounding).
    fn round_to_lattice(self) -> GaussInt;
    /// Scalar value of a lattice point; errors out of band are impossible
    /// because real-field `GaussInt`s are constructed with `im == 0`.
    fn lattice_scalar(k: GaussInt) -> Self;
    /// Distance from `self` to the nearest lattice point.
    fn dist_to_lattice(self) -> f64 {
        let k = self.round_to_lattice();
        (self - Self::lattice_scalar(k)).abs()
    }
    /// Lattice points admissible for this field with |k| <= radius, in a
    /// deterministic order of non-decreasing modulus.
    fn lattice_points_in_disc(radius: f64) -> Vec<GaussInt>;
}

impl Field for f64 {
    const TAG: FieldTag = FieldTag::Real;

    fn from_re(x: f64) -> Self {
        x
    }

    fn from_complex(z: Complex64) -> Self {
        z.re
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn round_to_lattice(self) -> GaussInt {
        GaussInt::new(self.round() as i64, 0)
    }

    fn lattice_scalar(k: GaussInt) -> Self {
        debug_assert_eq!(k.im, 0);
        k.re as f64
    }

    fn lattice_points_in_disc(radius: f64) -> Vec<GaussInt> {
        let r = radius.floor() as i64;
        let mut pts: Vec<GaussInt> = (-r..=r).map(|k| GaussInt::new(k, 0)).collect();
        pts.sort_by(|a, b| (a.norm(), a.re).partial_cmp(&(b.norm(), b.re)).unwrap());
        pts
    }
}

impl Field for Complex64 {
    const TAG: FieldTag = FieldTag::Complex;

    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    fn from_complex(z: Complex64) -> Self {
        z
    }

    fn to_complex(self) -> Complex64 {
        self
    }

    fn round_to_lattice(self) -> GaussInt {
        GaussInt::new(self.re.round() as i64, self.im.round() as i64)
    }

    fn lattice_scalar(k: GaussInt) -> Self {
        Complex64::new(k.re as f64, k.im as f64)
    }

    fn lattice_points_in_disc(radius: f64) -> Vec<GaussInt> {
        let r = radius.floor() as i64;
        let mut pts = Vec::new();
        for re in -r..=r {
            for im in -r..=r {
                let k = GaussInt::new(re, im);
                if k.norm() <= radius {
                    pts.push(k);
                }
            }
        }
        pts.sort_by(|a, b| {
            (a.norm(), a.re, a.im)
                .partial_cmp(&(b.norm(), b.re, b.im))
                .unwrap()
        });
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_rounding_real() {
        assert_eq!(1.4_f64.round_to_lattice(), GaussInt::new(1, 0));
        assert_eq!((-0.6_f64).round_to_lattice(), GaussInt::new(-1, 0));
        assert!((0.3_f64.dist_to_lattice() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn lattice_rounding_complex() {
        let z = Complex64::new(2.2, -1.7);
        assert_eq!(z.round_to_lattice(), GaussInt::new(2, -2));
        let d = z.dist_to_lattice();
        assert!((d - Complex64::new(0.2, 0.3).norm()).abs() < 1e-12);
    }

    #[test]
    fn disc_enumeration_sorted_by_modulus() {
        let pts = <Complex64 as Field>::lattice_points_in_disc(2.0);
        assert_eq!(pts[0], GaussInt::new(0, 0));
        for w in pts.windows(2) {
            assert!(w[0].norm() <= w[1].norm() + 1e-12);
        }
        assert!(pts.iter().all(|k| k.norm() <= 2.0));
        // 13 Gaussian integers with |k| <= 2
        assert_eq!(pts.len(), 13);
        let real_pts = <f64 as Field>::lattice_points_in_disc(2.5);
        assert_eq!(real_pts.len(), 5);
        assert!(real_pts.iter().all(|k| k.im == 0));
    }
}
