//! Randomized Hilbert-Schmidt nets and smallest-singular-value tail
//! experiments for projected random matrices.
//!
//! The net construction is probabilistic-existence in nature: points are
//! sampled uniformly in the shell `(3/2)B₂ \ (1/2)B₂` and the realization is
//! kept once it verifies. Verification samples pairs `(A, X)` with
//! `‖A‖_HS = sqrt(r)` and `X` on the sphere and checks that some net point
//! `X'` has `‖A(X - X')‖₂ <= t`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_vector, trial_rng, unit_sphere, EntryLaw};
use crate::error::CoreError;
use crate::linalg::{singular_values, Mat, Vect};

/// Parameters of the net: dimension `r`, resolution `t`, the constant in the
/// cardinality bound `(C/t)^r`, and the rebuild cap for construct-and-verify.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NetSpec {
    pub r: usize,
    pub t: f64,
    pub card_constant: f64,
    pub retry_cap: usize,
}

impl NetSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.r == 0 || self.r > 12 {
            return Err(CoreError::InvalidParameter(
                "net dimension r must be in 1..=12 at desk scale".into(),
            ));
        }
        let t_floor = (-(2f64.powi(self.r as i32))).exp2();
        if !(self.t > t_floor && self.t <= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "t = {} outside (2^(-2^r), 1]",
                self.t
            )));
        }
        if self.card_constant < 2.0 {
            return Err(CoreError::InvalidParameter(
                "cardinality constant must be >= 2".into(),
            ));
        }
        Ok(())
    }

    /// `ceil((C/t)^r)` points.
    pub fn cardinality(&self) -> usize {
        (self.card_constant / self.t).powi(self.r as i32).ceil() as usize
    }
}

/// Points in the shell `(3/2)B₂^r \ (1/2)B₂^r`, stored flat (point-major).
#[derive(Debug, Clone)]
pub struct Net {
    pub dim: usize,
    points: Vec<f64>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Samples the net: directions uniform on the sphere, radii from the shell
/// density `ρ^{r-1}` via inverse CDF. Deterministic per seed.
pub fn build_hs_net(spec: &NetSpec, seed: u64) -> Result<Net, CoreError> {
    spec.validate()?;
    let card = spec.cardinality();
    let r = spec.r;
    let mut rng = trial_rng(seed, 0);
    let mut points = Vec::with_capacity(card * r);
    let lo_pow = 0.5f64.powi(r as i32);
    let hi_pow = 1.5f64.powi(r as i32);
    for _ in 0..card {
        let dir = unit_sphere::<f64>(r, &mut rng);
        let u: f64 = rng.gen();
        let radius = (lo_pow + u * (hi_pow - lo_pow)).powf(1.0 / r as f64);
        for i in 0..r {
            points.push(dir[i] * radius);
        }
    }
    Ok(Net { dim: r, points })
}

/// Per-pair coverage result of a net verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub pairs: usize,
    pub covered: usize,
    pub uncovered_pair_indices: Vec<usize>,
}

impl CoverageReport {
    pub fn all_covered(&self) -> bool {
        self.covered == self.pairs
    }

    pub fn fraction(&self) -> f64 {
        self.covered as f64 / self.pairs.max(1) as f64
    }
}

/// Verifies coverage: for `n_pairs` sampled `(A, X)` with `A` an `r x r`
/// Gaussian matrix rescaled to `‖A‖_HS = sqrt(r)` and `X` uniform on
/// `S^{r-1}`, checks `min over net of ‖A(X - X')‖₂ <= t`.
pub fn verify_net(net: &Net, n_pairs: usize, seed: u64, t: f64) -> CoverageReport {
    let r = net.dim;
    let mut covered = 0usize;
    let mut uncovered = Vec::new();
    for pair in 0..n_pairs {
        let mut rng = trial_rng(seed, pair as u64 + 1);
        let mut a = Mat::<f64>::zeros(r, r);
        for j in 0..r {
            for i in 0..r {
                a[(i, j)] = EntryLaw::Gaussian.sample_real(&mut rng);
            }
        }
        let hs = a.norm();
        if hs > 0.0 {
            a *= (r as f64).sqrt() / hs;
        }
        let x = unit_sphere::<f64>(r, &mut rng);
        let ax = &a * &x;
        let mut hit = false;
        let mut ap = Vect::<f64>::zeros(r);
        for p in 0..net.len() {
            let pt = net.point(p);
            for i in 0..r {
                let mut acc = 0.0;
                for k in 0..r {
                    acc += a[(i, k)] * pt[k];
                }
                ap[i] = acc;
            }
            let mut dist_sq = 0.0;
            for i in 0..r {
                let d = ax[i] - ap[i];
                dist_sq += d * d;
            }
            if dist_sq <= t * t {
                hit = true;
                break;
            }
        }
        if hit {
            covered += 1;
        } else {
            uncovered.push(pair);
        }
    }
    CoverageReport {
        pairs: n_pairs,
        covered,
        uncovered_pair_indices: uncovered,
    }
}

/// Construct-and-verify with bounded retries; returns the verified net, the
/// seed that produced it, and the number of rebuilds used.
pub fn build_verified_net(
    spec: &NetSpec,
    n_pairs: usize,
    seed: u64,
) -> Result<(Net, u64, usize), CoreError> {
    spec.validate()?;
    for attempt in 0..=spec.retry_cap {
        let net_seed = seed.wrapping_add(attempt as u64);
        let net = build_hs_net(spec, net_seed)?;
        let report = verify_net(&net, n_pairs, seed ^ 0x9e37_79b9_7f4a_7c15, spec.t);
        if report.all_covered() {
            return Ok((net, net_seed, attempt));
        }
    }
    Err(CoreError::InvalidParameter(format!(
        "no verified net realization within {} rebuilds",
        spec.retry_cap
    )))
}

/// Tail statistics of `‖M‖_HS / sqrt(r d)` where the columns of `M` are the
/// projections of `r` i.i.d. isotropic vectors of `R^m` (`m = 2d`) onto a
/// fixed `d`-dimensional subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsConcentrationReport {
    pub d: usize,
    pub r: usize,
    pub trials: usize,
    pub mean_sq: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub tail_at_c0: f64,
    pub c0: f64,
}

pub fn hs_concentration_check(
    d: usize,
    r: usize,
    law: &EntryLaw,
    n_trials: usize,
    seed: u64,
    c0: f64,
) -> Result<HsConcentrationReport, CoreError> {
    if d == 0 || r == 0 || n_trials == 0 {
        return Err(CoreError::InvalidParameter("d, r, trials must be >= 1".into()));
    }
    let m = 2 * d;
    // fixed random subspace: orthonormalized Gaussian frame on stream 0
    let mut rng0 = trial_rng(seed, 0);
    let frame = Mat::<f64>::from_fn(m, d, |_, _| EntryLaw::Gaussian.sample_real(&mut rng0));
    let basis = {
        let (q, _) = crate::linalg::householder_qr_full(&frame);
        q.columns(0, d).into_owned()
    };

    let rd = (r * d) as f64;
    let mut ratios = Vec::with_capacity(n_trials);
    let mut mean_sq = 0.0;
    for trial in 0..n_trials {
        let mut rng = trial_rng(seed, trial as u64 + 1);
        let mut hs_sq = 0.0;
        for _ in 0..r {
            let x = sample_vector::<f64>(m, law, &mut rng);
            let coords = basis.adjoint() * &x;
            hs_sq += coords.norm_squared();
        }
        mean_sq += hs_sq;
        ratios.push((hs_sq / rd).sqrt());
    }
    mean_sq /= n_trials as f64;
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        let idx = ((n_trials as f64 - 1.0) * q).round() as usize;
        ratios[idx]
    };
    let quantiles = vec![
        (0.5, quantile(0.5)),
        (0.9, quantile(0.9)),
        (0.99, quantile(0.99)),
        (1.0, ratios[n_trials - 1]),
    ];
    let tail_at_c0 = ratios.iter().filter(|&&x| x >= c0).count() as f64 / n_trials as f64;
    Ok(HsConcentrationReport {
        d,
        r,
        trials: n_trials,
        mean_sq,
        quantiles,
        tail_at_c0,
        c0,
    })
}

/// Empirical tail curve `P{s_min(M + W) <= sqrt(d) t}` over a grid of `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SminTailReport {
    pub d: usize,
    pub r: usize,
    pub trials: usize,
    pub t_grid: Vec<f64>,
    pub probs: Vec<f64>,
    pub ci_halfwidths: Vec<f64>,
    /// Weighted log-log slope over the decaying region (p <= 1/2), with the
    /// standard error; absent when fewer than 4 usable points exist.
    pub slope: Option<(f64, f64)>,
}

pub fn smin_tail_experiment(
    d: usize,
    r: usize,
    law: &EntryLaw,
    shift: Option<&Mat<f64>>,
    t_grid: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<SminTailReport, CoreError> {
    if d < r || r == 0 {
        return Err(CoreError::InvalidParameter("need d >= r >= 1".into()));
    }
    if t_grid.is_empty() || n_trials == 0 {
        return Err(CoreError::InvalidParameter("empty grid or zero trials".into()));
    }
    let m = 2 * d;
    if let Some(w) = shift {
        if w.nrows() != m || w.ncols() != r {
            return Err(CoreError::InvalidParameter(format!(
                "shift must be {m} x {r}"
            )));
        }
    }
    let mut rng0 = trial_rng(seed, 0);
    let frame = Mat::<f64>::from_fn(m, d, |_, _| EntryLaw::Gaussian.sample_real(&mut rng0));
    let basis = {
        let (q, _) = crate::linalg::householder_qr_full(&frame);
        q.columns(0, d).into_owned()
    };

    let sqrt_d = (d as f64).sqrt();
    let mut counts = vec![0usize; t_grid.len()];
    for trial in 0..n_trials {
        let mut rng = trial_rng(seed, trial as u64 + 1);
        let s_min = if let Some(w) = shift {
            // ambient m x r matrix: projected columns plus the fixed shift
            let mut mat = w.clone();
            for c in 0..r {
                let x = sample_vector::<f64>(m, law, &mut rng);
                let proj = &basis * (basis.adjoint() * &x);
                for i in 0..m {
                    mat[(i, c)] += proj[i];
                }
            }
            singular_values(&mat).last().copied().unwrap_or(0.0)
        } else {
            // unshifted: work in subspace coordinates (same singular values)
            let mut mat = Mat::<f64>::zeros(d, r);
            for c in 0..r {
                let x = sample_vector::<f64>(m, law, &mut rng);
                mat.set_column(c, &(basis.adjoint() * &x));
            }
            singular_values(&mat).last().copied().unwrap_or(0.0)
        };
        for (g, &t) in t_grid.iter().enumerate() {
            if s_min <= sqrt_d * t {
                counts[g] += 1;
            }
        }
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n_trials as f64).collect();
    let ci_halfwidths: Vec<f64> = probs
        .iter()
        .map(|&p| 1.96 * (p * (1.0 - p) / n_trials as f64).sqrt())
        .collect();

    let mut fit_t = Vec::new();
    let mut fit_p = Vec::new();
    let mut fit_ci = Vec::new();
    for ((&t, &p), &ci) in t_grid.iter().zip(&probs).zip(&ci_halfwidths) {
        if p > 0.0 && p <= 0.5 {
            fit_t.push(t);
            fit_p.push(p);
            fit_ci.push(ci);
        }
    }
    let slope = crate::stats::weighted_loglog_slope(&fit_t, &fit_p, Some(&fit_ci)).ok();
    Ok(SminTailReport {
        d,
        r,
        trials: n_trials,
        t_grid: t_grid.to_vec(),
        probs,
        ci_halfwidths,
        slope,
    })
}

/// Anisotropic-vector checks against a fixed matrix `D`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnisoReport {
    /// `(Σ_{l >= h} s_l(D)^2)^{1/2}` (1-based `h` as in the tail-energy
    /// threshold).
    pub psi: f64,
    pub first_type_fraction: f64,
    pub second_type_fraction: f64,
    pub second_type_applicable: usize,
    pub trials: usize,
}

/// Index threshold, norm cap and scaling constant for the two anisotropic
/// distance checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnisoCheckParams {
    /// 1-based index threshold `h` in the tail energy.
    pub h: usize,
    /// Norm cap `R` for admissible `Y` in the second-type check.
    pub r_cap: f64,
    /// Constant `c` scaling the first-type distance threshold.
    pub c: f64,
    /// Number of columns `p` in the first-type check.
    pub p: usize,
}

/// First type: fraction of trials with
/// `min_i d(D X_i, span{D X_j : j != i}) >= c ψ_h`.
/// Second type: for `Y = DX/‖DX‖²` (so `<DX, Y> = 1`), among trials with
/// `‖Y‖ <= R`, the fraction with `‖D* Y‖ >= ψ R / h`.
pub fn aniso_distance_checks(
    d_mat: &Mat<f64>,
    params: &AnisoCheckParams,
    law: &EntryLaw,
    n_trials: usize,
    seed: u64,
) -> Result<AnisoReport, CoreError> {
    let m = d_mat.nrows();
    if d_mat.ncols() != m {
        return Err(CoreError::InvalidParameter("D must be square".into()));
    }
    if params.h == 0 || params.h > m {
        return Err(CoreError::InvalidParameter("need 1 <= h <= m".into()));
    }
    if params.p == 0 || params.p >= m {
        return Err(CoreError::InvalidParameter("need 1 <= p < m".into()));
    }
    let sv = singular_values(d_mat);
    let psi: f64 = sv[params.h - 1..].iter().map(|s| s * s).sum::<f64>().sqrt();

    let mut first_ok = 0usize;
    let mut second_ok = 0usize;
    let mut second_applicable = 0usize;
    for trial in 0..n_trials {
        let mut rng = trial_rng(seed, trial as u64 + 1);
        // first type
        let images: Vec<Vect<f64>> = (0..params.p)
            .map(|_| d_mat * sample_vector::<f64>(m, law, &mut rng))
            .collect();
        let mut min_dist = f64::INFINITY;
        for i in 0..params.p {
            let others: Vec<Vect<f64>> = images
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.clone())
                .collect();
            let mut basis = Vec::new();
            for o in &others {
                if let Some((q, _)) = crate::linalg::orthonormalize_against(&basis, o) {
                    basis.push(q);
                }
            }
            min_dist = min_dist.min(crate::linalg::perp_component(&basis, &images[i]).norm());
        }
        if min_dist >= params.c * psi {
            first_ok += 1;
        }

        // second type
        let x = sample_vector::<f64>(m, law, &mut rng);
        let dx = d_mat * &x;
        let n2 = dx.norm_squared();
        if n2 > 0.0 {
            let y = &dx / n2;
            if y.norm() <= params.r_cap {
                second_applicable += 1;
                let dsy = d_mat.adjoint() * &y;
                if dsy.norm() >= psi * params.r_cap / params.h as f64 {
                    second_ok += 1;
                }
            }
        }
    }
    Ok(AnisoReport {
        psi,
        first_type_fraction: first_ok as f64 / n_trials as f64,
        second_type_fraction: if second_applicable > 0 {
            second_ok as f64 / second_applicable as f64
        } else {
            0.0
        },
        second_type_applicable: second_applicable,
        trials: n_trials,
    })
}
