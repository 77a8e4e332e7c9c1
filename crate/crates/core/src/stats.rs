//! Delocalization statistics: non-increasing rearrangements, subset norms,
//! distance to sparse vectors, incompressibility, concentration-function
//! estimation, and the closed-form tail/threshold formulas.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::Field;
use crate::linalg::Vect;

/// Magnitudes of a vector sorted non-increasingly: `x*_1 >= ... >= x*_n`.
#[derive(Debug, Clone)]
pub struct OrderStats {
    sorted: Vec<f64>,
}

impl OrderStats {
    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `x*_i`, 1-based.
    pub fn get(&self, i: usize) -> Result<f64, CoreError> {
        if i == 0 || i > self.sorted.len() {
            return Err(CoreError::IndexOutOfRange {
                index: i,
                dim: self.sorted.len(),
            });
        }
        Ok(self.sorted[i - 1])
    }
}

/// Non-increasing rearrangement of the coordinate magnitudes.
pub fn rearrange<S: Field>(x: &Vect<S>) -> OrderStats {
    let mut sorted: Vec<f64> = x.iter().map(|z| z.modulus()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    OrderStats { sorted }
}

/// `x*_i` (1-based), the i-th largest magnitude.
pub fn order_stat<S: Field>(x: &Vect<S>, i: usize) -> Result<f64, CoreError> {
    rearrange(x).get(i)
}

/// `min over |I| = m of ‖x_I‖₂`: the norm of the `m` smallest magnitudes.
pub fn min_subset_norm<S: Field>(x: &Vect<S>, m: usize) -> Result<f64, CoreError> {
    let n = x.nrows();
    if m == 0 || m > n {
        return Err(CoreError::IndexOutOfRange { index: m, dim: n });
    }
    let stats = rearrange(x);
    let sum: f64 = stats.sorted[n - m..].iter().map(|v| v * v).sum();
    Ok(sum.sqrt())
}

/// Euclidean distance from `x` to the set of vectors supported on at most
/// `floor(s)` coordinates: the norm of everything but the largest magnitudes.
pub fn dist_to_sparse<S: Field>(x: &Vect<S>, s: f64) -> f64 {
    let n = x.nrows();
    let keep = (s.max(0.0).floor() as usize).min(n);
    let stats = rearrange(x);
    let sum: f64 = stats.sorted[keep..].iter().map(|v| v * v).sum();
    sum.sqrt()
}

/// Parameters of the incompressible-vector set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IncompParams {
    pub delta: f64,
    pub rho: f64,
}

impl IncompParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0 < self.delta && self.delta < 1.0 && 0.0 < self.rho && self.rho < 1.0) {
            return Err(CoreError::InvalidParameter(
                "incompressibility needs delta, rho in (0,1)".into(),
            ));
        }
        Ok(())
    }
}

/// Whether the unit vector `x` is at distance more than `rho` from all
/// `delta*n`-sparse vectors.
pub fn is_incompressible<S: Field>(x: &Vect<S>, params: IncompParams) -> Result<bool, CoreError> {
    params.validate()?;
    let norm = x.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CoreError::PreconditionViolated(format!(
            "incompressibility is defined for unit vectors, got norm {norm}"
        )));
    }
    let s = params.delta * x.nrows() as f64;
    Ok(dist_to_sparse(x, s) > params.rho)
}

/// Empirical Levy concentration value at radius `t` with a binomial
/// confidence band.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub t: f64,
    pub value: f64,
    pub ci_halfwidth: f64,
}

/// Estimates `sup_w P{‖X - w‖₂ <= t}` by maximizing the empirical ball mass
/// over candidate centers taken from the sample points themselves.
///
/// The restriction to sample centers makes this a surrogate: the reported
/// value sits between the empirical `L(t)` achieved at sample centers and
/// `L(2t)`. At least 100 samples are required.
pub fn concentration_fn_estimate<S: Field>(
    samples: &[Vect<S>],
    t: f64,
) -> Result<ConcentrationEstimate, CoreError> {
    let n = samples.len();
    if n < 100 {
        return Err(CoreError::TooFewSamples { need: 100, got: n });
    }
    if t < 0.0 {
        return Err(CoreError::InvalidParameter("radius t must be >= 0".into()));
    }
    let dim = samples[0].nrows();
    let best = if dim == 1 && S::TAG == crate::field::FieldTag::Real {
        // 1-D real shortcut: sort the points, slide a window of width 2t
        let mut xs: Vec<f64> = samples.iter().map(|v| v[0].to_complex().re).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut best = 0usize;
        let mut lo = 0usize;
        for hi in 0..n {
            while xs[hi] - xs[lo] > 2.0 * t {
                lo += 1;
            }
            best = best.max(hi - lo + 1);
        }
        best
    } else {
        let mut best = 0usize;
        for c in samples {
            let count = samples.iter().filter(|s| (*s - c).norm() <= t).count();
            best = best.max(count);
        }
        best
    };
    let value = best as f64 / n as f64;
    let ci_halfwidth = 1.96 * (value * (1.0 - value) / n as f64).sqrt();
    Ok(ConcentrationEstimate {
        t,
        value,
        ci_halfwidth,
    })
}

fn check_tail_domain(n: usize, i: usize) -> Result<(), CoreError> {
    if n < 2 || i < n / 2 || i >= n {
        return Err(CoreError::InvalidParameter(format!(
            "need n/2 <= i < n, got n = {n}, i = {i}"
        )));
    }
    Ok(())
}

/// Null-vector tail formula: threshold `(n-i) t / n^{3/2}` and probability
/// bound `(C t)^{n-i} + e^{-c n}`.
pub fn bound_a(n: usize, i: usize, t: f64, big_c: f64, c: f64) -> Result<(f64, f64), CoreError> {
    check_tail_domain(n, i)?;
    if t <= 0.0 || big_c <= 0.0 || c <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "t, C, c must be positive".into(),
        ));
    }
    let k = (n - i) as f64;
    let nf = n as f64;
    let threshold = k * t / nf.powf(1.5);
    let prob = (big_c * t).powf(k) + (-c * nf).exp();
    Ok((threshold, prob))
}

/// Real-eigenvector lower threshold `(n-i) / (n^{3/2} ln^C n)`.
pub fn bound_b(n: usize, i: usize, big_c: f64) -> Result<f64, CoreError> {
    check_tail_domain(n, i)?;
    let k = (n - i) as f64;
    let nf = n as f64;
    Ok(k / (nf.powf(1.5) * nf.ln().powf(big_c)))
}

/// Complex-eigenvector lower threshold `sqrt(n-i) / (n ln^C n)`.
pub fn bound_c(n: usize, i: usize, big_c: f64) -> Result<f64, CoreError> {
    check_tail_domain(n, i)?;
    let k = (n - i) as f64;
    let nf = n as f64;
    Ok(k.sqrt() / (nf * nf.ln().powf(big_c)))
}

/// Weighted least-squares slope of `ln p` against `ln t`.
///
/// Weights, when provided, are `1/Var(ln p)` computed from the binomial
/// half-widths; without them the fit is unweighted. Returns `(slope,
/// standard_error)`.
pub fn weighted_loglog_slope(
    ts: &[f64],
    ps: &[f64],
    ci_halfwidths: Option<&[f64]>,
) -> Result<(f64, f64), CoreError> {
    if ts.len() != ps.len() {
        return Err(CoreError::InvalidParameter(
            "grid and probability lengths differ".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (idx, (&t, &p)) in ts.iter().zip(ps).enumerate() {
        if !(p > 0.0 && p < 1.0) || t <= 0.0 {
            continue;
        }
        xs.push(t.ln());
        ys.push(p.ln());
        let w = match ci_halfwidths {
            Some(cis) => {
                let sigma = (cis[idx] / 1.96).max(1e-300);
                let var_log = (sigma / p) * (sigma / p);
                1.0 / var_log.max(1e-12)
            }
            None => 1.0,
        };
        ws.push(w);
    }
    if xs.len() < 4 {
        return Err(CoreError::InvalidParameter(format!(
            "need at least 4 usable grid points with p in (0,1), got {}",
            xs.len()
        )));
    }
    let wsum: f64 = ws.iter().sum();
    let xbar: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar: f64 = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| w * (x - xbar) * (x - xbar))
        .sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    if sxx <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "degenerate grid: zero x-variance".into(),
        ));
    }
    let slope = sxy / sxx;
    let se = match ci_halfwidths {
        // known heteroskedastic variances: Var(slope) = 1/Sxx
        Some(_) => (1.0 / sxx).sqrt(),
        None => {
            let npts = xs.len() as f64;
            if npts > 2.0 {
                let ss_res: f64 = xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| {
                        let fit = ybar + slope * (x - xbar);
                        (y - fit) * (y - fit)
                    })
                    .sum();
                (ss_res / ((npts - 2.0) * sxx)).sqrt()
            } else {
                0.0
            }
        }
    };
    Ok((slope, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{trial_rng, unit_sphere};
    use rand::Rng;
    use rand_distr::Distribution;

    fn vecf(xs: &[f64]) -> Vect<f64> {
        Vect::<f64>::from_column_slice(xs)
    }

    #[test]
    fn rearrange_simple() {
        let st = rearrange(&vecf(&[3.0, -1.0, 2.0]));
        assert_eq!(st.as_slice(), &[3.0, 2.0, 1.0]);
        assert_eq!(order_stat(&vecf(&[1.0, 0.0, 0.0, 0.0, 0.0]), 5).unwrap(), 0.0);
        assert!(order_stat(&vecf(&[1.0]), 2).is_err());
        assert!(order_stat(&vecf(&[1.0]), 0).is_err());
    }

    #[test]
    fn rearrange_minmax_formula_brute_force() {
        // oracle: x*_i = min over |I| = n-i+1 of max_{j in I} |x_j|
        let mut rng = trial_rng(5, 0);
        for _ in 0..20 {
            let n = 1 + rng.gen_range(0..8usize);
            let x: Vect<f64> = Vect::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let st = rearrange(&x);
            for i in 1..=n {
                let size = n - i + 1;
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize != size {
                        continue;
                    }
                    let mx = (0..n)
                        .filter(|j| mask & (1 << j) != 0)
                        .map(|j| x[j].abs())
                        .fold(0.0f64, f64::max);
                    best = best.min(mx);
                }
                assert!((st.get(i).unwrap() - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn min_subset_norm_simple() {
        assert_eq!(min_subset_norm(&vecf(&[1.0, 0.0, 0.0]), 2).unwrap(), 0.0);
        let v = vecf(&[0.5, 0.5, 0.5, 0.5]);
        let got = min_subset_norm(&v, 2).unwrap();
        assert!((got - (0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn min_subset_norm_brute_force() {
        // oracle: exhaustive minimum over all C(n, m) index subsets
        let mut rng = trial_rng(6, 0);
        for _ in 0..10 {
            let n = 4 + rng.gen_range(0..7usize);
            let x: Vect<f64> = Vect::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            for m in 1..=n {
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize != m {
                        continue;
                    }
                    let nrm = (0..n)
                        .filter(|j| mask & (1 << j) != 0)
                        .map(|j| x[j] * x[j])
                        .sum::<f64>()
                        .sqrt();
                    best = best.min(nrm);
                }
                assert!((min_subset_norm(&x, m).unwrap() - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pythagoras_splits_norm() {
        let mut rng = trial_rng(7, 0);
        for _ in 0..20 {
            let x = unit_sphere::<f64>(9, &mut rng);
            for m in 1..=9 {
                let small = min_subset_norm(&x, m).unwrap();
                let top: f64 = rearrange(&x).as_slice()[..9 - m].iter().map(|v| v * v).sum();
                assert!((small * small + top - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dist_to_sparse_cases() {
        assert_eq!(dist_to_sparse(&vecf(&[1.0, 0.0]), 1.0), 0.0);
        let v = vecf(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]);
        assert!((dist_to_sparse(&v, 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(dist_to_sparse(&vecf(&[1.0, 2.0]), 5.0), 0.0);
    }

    #[test]
    fn dist_to_sparse_is_exact_minimizer() {
        // oracle: brute force over support sets
        let mut rng = trial_rng(8, 0);
        for _ in 0..10 {
            let n = 3 + rng.gen_range(0..6usize);
            let x: Vect<f64> = Vect::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            for s in 0..=n {
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize > s {
                        continue;
                    }
                    // nearest vector supported on `mask` keeps those coords
                    let d = (0..n)
                        .filter(|j| mask & (1 << j) == 0)
                        .map(|j| x[j] * x[j])
                        .sum::<f64>()
                        .sqrt();
                    best = best.min(d);
                }
                assert!((dist_to_sparse(&x, s as f64) - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn incompressibility_of_basis_vector() {
        let n = 10;
        let mut e1 = Vect::<f64>::zeros(n);
        e1[0] = 1.0;
        let params = IncompParams {
            delta: 0.1,
            rho: 0.5,
        };
        assert!(!is_incompressible(&e1, params).unwrap());
        let flat = Vect::<f64>::from_element(n, (n as f64).sqrt().recip());
        assert!(is_incompressible(&flat, params).unwrap());
        let not_unit = Vect::<f64>::from_element(n, 1.0);
        assert!(is_incompressible(&not_unit, params).is_err());
    }

    #[test]
    fn concentration_constant_sample() {
        let samples: Vec<Vect<f64>> = (0..150).map(|_| vecf(&[2.5])).collect();
        let est = concentration_fn_estimate(&samples, 0.0).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn concentration_monotone_in_t() {
        let mut rng = trial_rng(9, 0);
        let samples: Vec<Vect<f64>> = (0..400)
            .map(|_| vecf(&[rand_distr::StandardNormal.sample(&mut rng)]))
            .collect();
        let mut prev = 0.0;
        for k in 0..6 {
            let t = 0.2 * k as f64;
            let est = concentration_fn_estimate(&samples, t).unwrap();
            assert!(est.value + 1e-12 >= prev);
            prev = est.value;
        }
    }

    #[test]
    fn concentration_gaussian_closed_form() {
        // P{|xi - w| <= 0.5} is maximized at w = 0 with value erf(0.5/sqrt 2)
        // = 0.3829...; a modest sample size keeps this test quick, the full
        // 1e5-sample version runs in the acceptance suite.
        let mut rng = trial_rng(10, 0);
        let samples: Vec<Vect<f64>> = (0..20_000)
            .map(|_| vecf(&[rand_distr::StandardNormal.sample(&mut rng)]))
            .collect();
        let est = concentration_fn_estimate(&samples, 0.5).unwrap();
        assert!((est.value - 0.3829).abs() < 0.03, "value {}", est.value);
    }

    #[test]
    fn concentration_needs_samples() {
        let samples: Vec<Vect<f64>> = (0..10).map(|_| vecf(&[0.0])).collect();
        assert!(matches!(
            concentration_fn_estimate(&samples, 1.0),
            Err(CoreError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn bound_formulas() {
        let b = bound_b(100, 99, 0.0).unwrap();
        assert!((b - 1.0 / 1000.0).abs() < 1e-15);
        let c = bound_c(100, 99, 0.0).unwrap();
        assert!((c - 0.01).abs() < 1e-15);
        let (thr, p) = bound_a(100, 99, 0.5, 1.0, 1.0).unwrap();
        assert!((thr - 0.5 / 1000.0).abs() < 1e-15);
        assert!((p - (0.5 + (-100.0f64).exp())).abs() < 1e-15);
        assert!(bound_b(100, 10, 1.0).is_err());
        assert!(bound_a(100, 99, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn slope_exact_cubic() {
        let ts: Vec<f64> = (1..=8).map(|k| 0.05 * k as f64).collect();
        let ps: Vec<f64> = ts.iter().map(|t| t * t * t).collect();
        let (slope, se) = weighted_loglog_slope(&ts, &ps, None).unwrap();
        assert!((slope - 3.0).abs() < 1e-9, "slope {slope}");
        assert!(se < 1e-9);
        // constant multiples are absorbed by the intercept
        let ps2: Vec<f64> = ts.iter().map(|t| (5.0 * t * t).min(0.999)).collect();
        let (slope2, _) = weighted_loglog_slope(&ts[..5], &ps2[..5], None).unwrap();
        assert!((slope2 - 2.0).abs() < 1e-9);
    }
}
