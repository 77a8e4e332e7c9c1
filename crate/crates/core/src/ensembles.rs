//! Seeded generation of random matrices and vectors.
//!
//! Every draw is fully determined by `(master_seed, trial_index)`: each trial
//! gets its own ChaCha stream, so results are bitwise reproducible no matter
//! how trials are scheduled across threads.
//!
//! Real laws have mean zero and unit variance. Complex entries are built from
//! two independent real draws as `(s1 + i s2)/sqrt(2)`, giving i.i.d. real and
//! imaginary parts with variance 1/2 each and unit absolute second moment.

use rand::distributions::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::{Field, FieldTag};
use crate::linalg::{orthonormal_complement_basis, Mat, Vect};

/// Entry distribution; all variants are subgaussian with mean 0, variance 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`: a bounded subgaussian law distinct
    /// from Rademacher.
    UniformScaled,
    /// Finite support with user-declared subgaussian constant. The constant
    /// is recorded, not verified.
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
        k_subgaussian: f64,
    },
}

impl EntryLaw {
    /// Declared subgaussian parameter K.
    pub fn k_subgaussian(&self) -> f64 {
        match self {
            EntryLaw::Gaussian => 1.0,
            EntryLaw::Rademacher => 1.0,
            EntryLaw::UniformScaled => 1.0,
            EntryLaw::Discrete { k_subgaussian, .. } => *k_subgaussian,
        }
    }

    /// Checks the mean-0/variance-1 normalization (relevant for `Discrete`).
    pub fn validate(&self) -> Result<(), CoreError> {
        if let EntryLaw::Discrete {
            values,
            probs,
            k_subgaussian,
        } = self
        {
            if values.is_empty() || values.len() != probs.len() {
                return Err(CoreError::InvalidParameter(
                    "discrete law needs matching non-empty values/probs".into(),
                ));
            }
            if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(CoreError::InvalidParameter(
                    "probabilities outside [0,1]".into(),
                ));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(CoreError::InvalidParameter(format!(
                    "probabilities sum to {total}, expected 1"
                )));
            }
            let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
            let var: f64 =
                values.iter().zip(probs).map(|(v, p)| v * v * p).sum::<f64>() - mean * mean;
            if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-9 {
                return Err(CoreError::InvalidParameter(format!(
                    "discrete law must have mean 0 and variance 1, got mean {mean:.3e}, var {var:.6}"
                )));
            }
            if *k_subgaussian <= 0.0 {
                return Err(CoreError::InvalidParameter("K must be positive".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn sample_real(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            EntryLaw::Gaussian => StandardNormal.sample(rng),
            EntryLaw::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::UniformScaled => {
                let s = 3f64.sqrt();
                rng.gen_range(-s..=s)
            }
            EntryLaw::Discrete { values, probs, .. } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    fn sample_entry<S: Field>(&self, rng: &mut ChaCha8Rng) -> S {
        match S::TAG {
            FieldTag::Real => S::from_re(self.sample_real(rng)),
            FieldTag::Complex => {
                let re = self.sample_real(rng);
                let im = self.sample_real(rng);
                let inv = 0.5f64.sqrt();
                S::from_complex(num_complex::Complex64::new(re * inv, im * inv))
            }
        }
    }
}

/// Shape, law, field and master seed of a random matrix ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(flatten)]
    pub law: EntryLaw,
    pub field: FieldTag,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(rows: usize, cols: usize, law: EntryLaw, field: FieldTag, master_seed: u64) -> Self {
        EnsembleSpec {
            rows,
            cols,
            law,
            field,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(CoreError::InvalidParameter(
                "rows and cols must be >= 1".into(),
            ));
        }
        self.law.validate()
    }
}

/// Counter-based stream split: trial `t` of master seed `s` reads from an
/// independent ChaCha stream, independent of scheduling.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// The matrix for one trial: entries i.i.d. per the law, filled in
/// column-major order, bitwise reproducible from `(master_seed, trial_index)`.
pub fn sample_matrix<S: Field>(spec: &EnsembleSpec, trial_index: u64) -> Mat<S> {
    debug_assert_eq!(
        spec.field,
        S::TAG,
        "ensemble field does not match scalar type"
    );
    let mut rng = trial_rng(spec.master_seed, trial_index);
    let mut m = Mat::<S>::zeros(spec.rows, spec.cols);
    for j in 0..spec.cols {
        for i in 0..spec.rows {
            m[(i, j)] = spec.law.sample_entry::<S>(&mut rng);
        }
    }
    m
}

/// A vector with i.i.d. entries of the given law.
pub fn sample_vector<S: Field>(n: usize, law: &EntryLaw, rng: &mut ChaCha8Rng) -> Vect<S> {
    let mut v = Vect::<S>::zeros(n);
    for i in 0..n {
        v[i] = law.sample_entry::<S>(rng);
    }
    v
}

/// Uniform on the unit sphere (normalized Gaussian, hence rotation invariant).
pub fn unit_sphere<S: Field>(n: usize, rng: &mut ChaCha8Rng) -> Vect<S> {
    loop {
        let v = sample_vector::<S>(n, &EntryLaw::Gaussian, rng);
        let nv = v.norm();
        if nv > 1e-150 {
            return v / S::from_re(nv);
        }
    }
}

/// Seeded convenience wrapper around [`unit_sphere`].
pub fn sample_unit_sphere<S: Field>(n: usize, seed: u64) -> Vect<S> {
    let mut rng = trial_rng(seed, 0);
    unit_sphere::<S>(n, &mut rng)
}

/// The unit kernel vector of a full-row-rank `(n-1) x n` matrix.
///
/// The sign/phase is fixed by rotating the largest-magnitude coordinate onto
/// the positive real axis, which leaves all `|u_i|` statistics untouched.
pub fn null_vector<S: Field>(b: &Mat<S>) -> Result<Vect<S>, CoreError> {
    let m = b.nrows();
    let n = b.ncols();
    if m + 1 != n {
        return Err(CoreError::InvalidParameter(format!(
            "null_vector expects an (n-1) x n matrix, got {m} x {n}"
        )));
    }
    let c = b.adjoint();
    let kernel = orthonormal_complement_basis(&c)?;
    let mut u = kernel.column(0).into_owned();
    let mut imax = 0;
    let mut best = -1.0;
    for (i, z) in u.iter().enumerate() {
        let mag = z.modulus();
        if mag > best {
            best = mag;
            imax = i;
        }
    }
    if best > 0.0 {
        let phase = u[imax] * S::from_re(1.0 / best);
        let rot = phase.conjugate();
        for z in u.iter_mut() {
            *z *= rot;
        }
    }
    Ok(u)
}

/// Residual-checked kernel extraction: re-validates `‖Bu‖ <= tol · ‖B‖_HS`.
pub fn null_vector_checked<S: Field>(b: &Mat<S>, tol: f64) -> Result<Vect<S>, CoreError> {
    let u = null_vector(b)?;
    let res = (b * &u).norm();
    if res > tol * b.norm() {
        return Err(CoreError::RankDeficient(format!(
            "kernel residual {res:.3e} exceeds tolerance"
        )));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rademacher_support() {
        let spec = EnsembleSpec::new(8, 8, EntryLaw::Rademacher, FieldTag::Real, 1);
        let m: Mat<f64> = sample_matrix(&spec, 0);
        assert!(m.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn determinism_per_trial() {
        let spec = EnsembleSpec::new(5, 7, EntryLaw::Gaussian, FieldTag::Real, 42);
        let a: Mat<f64> = sample_matrix(&spec, 3);
        let b: Mat<f64> = sample_matrix(&spec, 3);
        assert_eq!(a, b);
        let c: Mat<f64> = sample_matrix(&spec, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_moments_within_clt_band() {
        let spec = EnsembleSpec::new(200, 200, EntryLaw::Gaussian, FieldTag::Real, 5);
        let m: Mat<f64> = sample_matrix(&spec, 0);
        let n = (200 * 200) as f64;
        let mean = m.iter().sum::<f64>() / n;
        let var = m.iter().map(|x| x * x).sum::<f64>() / n - mean * mean;
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn law_moments_all_builtin() {
        for law in [
            EntryLaw::Gaussian,
            EntryLaw::Rademacher,
            EntryLaw::UniformScaled,
        ] {
            let mut rng = trial_rng(9, 0);
            let total = 100_000;
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for _ in 0..total {
                let x = law.sample_real(&mut rng);
                s1 += x;
                s2 += x * x;
            }
            let mean = s1 / total as f64;
            let var = s2 / total as f64 - mean * mean;
            let band = 3.0 / (total as f64).sqrt();
            assert!(mean.abs() < band * 2.0, "{law:?} mean {mean}");
            assert!((var - 1.0).abs() < band * 10.0, "{law:?} var {var}");
        }
    }

    #[test]
    fn complex_entries_unit_second_moment() {
        let spec = EnsembleSpec::new(150, 150, EntryLaw::Gaussian, FieldTag::Complex, 6);
        let m: Mat<Complex64> = sample_matrix(&spec, 0);
        let n = (150 * 150) as f64;
        let abs2 = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((abs2 - 1.0).abs() < 0.05, "E|xi|^2 = {abs2}");
        let re_var = m.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((re_var - 0.5).abs() < 0.05);
    }

    #[test]
    fn sphere_sampling() {
        let v: Vect<f64> = sample_unit_sphere(1, 99);
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
        for seed in 0..50 {
            let v: Vect<f64> = sample_unit_sphere(10, seed);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_first_coordinate_moment() {
        // E|v_1|^2 = 1/n for the uniform sphere measure
        let n = 10;
        let total = 10_000;
        let mut rng = trial_rng(17, 0);
        let mut acc = 0.0;
        for _ in 0..total {
            let v = unit_sphere::<f64>(n, &mut rng);
            acc += v[0] * v[0];
        }
        let est = acc / total as f64;
        let band = 5.0 / ((total as f64).sqrt() * n as f64);
        assert!((est - 0.1).abs() < band, "E|v1|^2 = {est}");
    }

    #[test]
    fn null_vector_coordinate_cases() {
        let b = Mat::<f64>::from_row_slice(1, 2, &[1.0, 0.0]);
        let u = null_vector(&b).unwrap();
        assert!((u[0].abs()) < 1e-12 && (u[1] - 1.0).abs() < 1e-12);

        let b = Mat::<f64>::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let u = null_vector(&b).unwrap();
        assert!((u[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_vector_gaussian_residual() {
        let spec = EnsembleSpec::new(39, 40, EntryLaw::Gaussian, FieldTag::Real, 2);
        let b: Mat<f64> = sample_matrix(&spec, 0);
        let u = null_vector_checked(&b, 1e-10).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        assert!((&b * &u).norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn null_vector_sphere_law() {
        // |u_1|^2 of the Gaussian kernel vector has mean 1/n
        let n = 12;
        let trials = 4000;
        let spec = EnsembleSpec::new(n - 1, n, EntryLaw::Gaussian, FieldTag::Real, 31);
        let mut acc = 0.0;
        for t in 0..trials {
            let b: Mat<f64> = sample_matrix(&spec, t);
            let u = null_vector(&b).unwrap();
            acc += u[0] * u[0];
        }
        let est = acc / trials as f64;
        let band = 6.0 / ((trials as f64).sqrt() * n as f64);
        assert!((est - 1.0 / n as f64).abs() < band, "est {est}");
    }

    #[test]
    fn discrete_law_validation() {
        let bad = EntryLaw::Discrete {
            values: vec![1.0, -1.0],
            probs: vec![0.7, 0.3],
            k_subgaussian: 1.0,
        };
        assert!(bad.validate().is_err());
        let good = EntryLaw::Discrete {
            values: vec![1.0, -1.0],
            probs: vec![0.5, 0.5],
            k_subgaussian: 1.0,
        };
        assert!(good.validate().is_ok());
    }
}
