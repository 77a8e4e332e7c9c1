//! Dyadic classes for ellipsoids and vector sequences, the greedy
//! farthest-point ordering, and the lattice discretization of admissible
//! vectors with its reduction algorithm.
//!
//! The discretized set `Υ(W, δ', T)` contains the vectors `Z ∈ span(W)` with
//! `<Z, W_N> = 1`, `‖Z‖ <= T`, and, for every other vector taken in the
//! greedy order, a product that either lies on the lattice `δ'·Λ` (`Λ = Z` or
//! `Z + iZ`) or equals the product with the projection onto the span of the
//! earlier vectors. Members are pinned down by finitely many parameters
//! `(J, (k_j))`, which makes exhaustive search possible, and every admissible
//! continuum vector reduces to a member by the step-by-step perturbation
//! implemented in [`reduce_to_upsilon`].

use crate::error::CoreError;
use crate::field::{Field, GaussInt};
use crate::linalg::{inner, orthonormalize_against, perp_component, Vect};

/// Dyadic class of an ellipsoid: `min(max(s_i, 1), R) ∈ [2^{b_i}, 2^{b_i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassB {
    pub r_cap: f64,
    pub b: Vec<i64>,
}

/// Dyadic class of a vector sequence: `min(max(d_i, r), 1) ∈ [2^{p_i}, 2^{p_i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassP {
    pub r_floor: f64,
    pub p: Vec<i64>,
}

/// Greedy farthest-point data: `sigma[i]` is the index picked at step `i`,
/// `d[i]` its distance to the span of the earlier picks, and `onb[i]` the
/// orthonormal direction added (absent when the pick was numerically inside
/// the span).
#[derive(Debug, Clone)]
pub struct SigmaOrder<S: Field> {
    pub sigma: Vec<usize>,
    pub d: Vec<f64>,
    pub onb: Vec<Option<Vect<S>>>,
}

impl<S: Field> SigmaOrder<S> {
    /// Position of index `target` in the greedy order (`sigma^{-1}`).
    pub fn position_of(&self, target: usize) -> usize {
        self.sigma.iter().position(|&s| s == target).unwrap()
    }

    /// Orthonormal basis of `span{W_sigma(j) : j < step}`.
    pub fn prefix_basis(&self, step: usize) -> Vec<Vect<S>> {
        self.onb[..step].iter().flatten().cloned().collect()
    }
}

/// Left-closed dyadic bucket index: the unique `b` with
/// `value ∈ [2^b, 2^{b+1})`.
fn dyadic_bucket(value: f64) -> i64 {
    debug_assert!(value > 0.0);
    let mut b = value.log2().floor() as i64;
    // guard the boundary against log roundoff
    if value < (b as f64).exp2() {
        b -= 1;
    } else if value >= ((b + 1) as f64).exp2() {
        b += 1;
    }
    b
}

/// Class of the ellipsoid with the given semi-axes under truncation cap `R`.
pub fn classify_semi_axes(semi_axes: &[f64], r_cap: f64) -> Result<ClassB, CoreError> {
    if r_cap <= 1.0 {
        return Err(CoreError::InvalidParameter("R must exceed 1".into()));
    }
    let b = semi_axes
        .iter()
        .map(|&s| dyadic_bucket(s.max(1.0).min(r_cap)))
        .collect();
    Ok(ClassB { r_cap, b })
}

/// Class of the ellipsoid generated by `e.generators()`.
pub fn classify_ellipsoid<S: Field>(
    e: &crate::ellipsoid::Ellipsoid<S>,
    r_cap: f64,
) -> Result<ClassB, CoreError> {
    classify_semi_axes(e.semi_axes(), r_cap)
}

/// Class of the greedy distances under floor `r`.
pub fn classify_distances<S: Field>(order: &SigmaOrder<S>, r_floor: f64) -> Result<ClassP, CoreError> {
    if !(0.0 < r_floor && r_floor < 1.0) {
        return Err(CoreError::InvalidParameter("need 0 < r < 1".into()));
    }
    let p = order
        .d
        .iter()
        .map(|&d| dyadic_bucket(d.max(r_floor).min(1.0)))
        .collect();
    Ok(ClassP { r_floor, p })
}

/// Upper bound `(log2 R + 2)^N` on the number of ellipsoid classes.
pub fn elclass_count_bound(r_cap: f64, n_gens: usize) -> f64 {
    (r_cap.log2() + 2.0).powi(n_gens as i32)
}

/// Upper bound `(2 - log2 r)^N` on the number of distance classes.
pub fn disclass_count_bound(r_floor: f64, n_gens: usize) -> f64 {
    (2.0 - r_floor.log2()).powi(n_gens as i32)
}

/// Greedy farthest-point permutation: step `i` picks the vector of maximal
/// distance to the span of the earlier picks, ties broken by smallest index.
pub fn sigma_order<S: Field>(w: &[Vect<S>]) -> SigmaOrder<S> {
    let n = w.len();
    let mut chosen = vec![false; n];
    let mut sigma = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut onb: Vec<Option<Vect<S>>> = Vec::with_capacity(n);
    let mut basis: Vec<Vect<S>> = Vec::new();
    for _ in 0..n {
        let mut best_idx = usize::MAX;
        let mut best_dist = -1.0;
        for (idx, wi) in w.iter().enumerate() {
            if chosen[idx] {
                continue;
            }
            let dist = perp_component(&basis, wi).norm();
            if dist > best_dist {
                best_dist = dist;
                best_idx = idx;
            }
        }
        chosen[best_idx] = true;
        sigma.push(best_idx);
        d.push(best_dist);
        match orthonormalize_against(&basis, &w[best_idx]) {
            Some((q, _)) => {
                basis.push(q.clone());
                onb.push(Some(q));
            }
            None => onb.push(None),
        }
    }
    SigmaOrder { sigma, d, onb }
}

/// `Π min(d_i, 1) <= (4N)^{N/2} 2^{-Σ b_i}`, evaluated in log space.
///
/// Precondition (from the truncation argument): `R <= δ^{-1} N^{-1/2}`.
pub fn check_geom_part1<S: Field>(
    order: &SigmaOrder<S>,
    class_b: &ClassB,
    delta: f64,
) -> Result<crate::duality::CheckOutcome, CoreError> {
    let n = order.d.len() as f64;
    if class_b.r_cap > 1.0 / (delta * n.sqrt()) {
        return Err(CoreError::PreconditionViolated(format!(
            "R = {} exceeds 1/(delta sqrt(N)) = {}",
            class_b.r_cap,
            1.0 / (delta * n.sqrt())
        )));
    }
    let lhs: f64 = order.d.iter().map(|&di| di.min(1.0).max(1e-300).ln()).sum();
    let sum_b: i64 = class_b.b.iter().sum();
    let rhs = 0.5 * n * (4.0 * n).ln() - (sum_b as f64) * 2f64.ln();
    Ok(crate::duality::CheckOutcome {
        holds: lhs <= rhs + 1e-12,
        slack: rhs - lhs,
        lhs,
        rhs,
    })
}

/// `2^{Σ p_i} · 2^{Σ b_i} <= (4N)^{N/2}`, evaluated in log space.
pub fn check_class_duality(class_b: &ClassB, class_p: &ClassP) -> crate::duality::CheckOutcome {
    let n = class_p.p.len() as f64;
    let sum: i64 = class_b.b.iter().sum::<i64>() + class_p.p.iter().sum::<i64>();
    let lhs = sum as f64 * 2f64.ln();
    let rhs = 0.5 * n * (4.0 * n).ln();
    crate::duality::CheckOutcome {
        holds: lhs <= rhs + 1e-12,
        slack: rhs - lhs,
        lhs,
        rhs,
    }
}

/// A member of `Υ(W, δ', T)` with the parameters that pin it down.
#[derive(Debug, Clone)]
pub struct UpsilonCertificate<S: Field> {
    /// Greedy permutation (`sigma[i]` = original index of the step-`i` pick).
    pub sigma: Vec<usize>,
    /// Steps (positions in `sigma`) carrying a lattice-valued product.
    pub j_set: Vec<usize>,
    /// Lattice values aligned with `j_set`.
    pub k: Vec<GaussInt>,
    pub z: Vect<S>,
    pub delta_prime: f64,
    pub t_cap: f64,
}

/// The product bound `2√2 (N+1) δ'` of the discretization.
pub fn upsilon_product_bound(n_gens: usize, delta_prime: f64) -> f64 {
    2.0 * 2f64.sqrt() * (n_gens as f64 + 1.0) * delta_prime
}

/// Solves the linear system pinning down `Z ∈ span(W)`:
/// `<Z, W_N> = 1`; `<Z, W_sigma(i)> = k_i δ'` on `J`; `<Z, g_i> = 0`
/// elsewhere, where `g_i` is the component of `W_sigma(i)` orthogonal to the
/// earlier picks.
pub fn construct_z<S: Field>(
    w: &[Vect<S>],
    order: &SigmaOrder<S>,
    j_set: &[usize],
    k: &[GaussInt],
    delta_prime: f64,
) -> Result<Vect<S>, CoreError> {
    let n = w.len();
    if j_set.len() != k.len() {
        return Err(CoreError::InvalidParameter("J and k lengths differ".into()));
    }
    let q_pos = order.position_of(n - 1);
    if j_set.contains(&q_pos) {
        return Err(CoreError::InvalidParameter(
            "J must avoid the step of W_N".into(),
        ));
    }
    let mut gmat = crate::linalg::Mat::<S>::zeros(n, n);
    let mut rhs = Vect::<S>::zeros(n);
    let mut row = 0usize;

    let fill_row = |gmat: &mut crate::linalg::Mat<S>, g: &Vect<S>, row: usize| {
        for (col, wj) in w.iter().enumerate() {
            gmat[(row, col)] = inner(wj, g);
        }
    };

    fill_row(&mut gmat, &w[n - 1], row);
    rhs[row] = S::one();
    row += 1;

    for step in 0..n {
        if step == q_pos {
            continue;
        }
        let idx = order.sigma[step];
        if let Some(pos) = j_set.iter().position(|&s| s == step) {
            fill_row(&mut gmat, &w[idx], row);
            rhs[row] = S::lattice_scalar(k[pos]) * S::from_re(delta_prime);
        } else {
            let basis = order.prefix_basis(step);
            let g = perp_component(&basis, &w[idx]);
            fill_row(&mut gmat, &g, row);
            rhs[row] = S::zero();
        }
        row += 1;
    }
    debug_assert_eq!(row, n);

    let coeffs = gmat.lu().solve(&rhs).ok_or(CoreError::SingularSystem)?;
    let mut z = Vect::<S>::zeros(w[0].nrows());
    for (c, wi) in coeffs.iter().zip(w) {
        z += wi * *c;
    }
    Ok(z)
}

/// Failure detail from a membership verification.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub ok: bool,
    pub detail: String,
}

/// Verifies all `Υ(W, δ', T)` conditions for `z` at tolerance `tol`.
pub fn verify_upsilon_member<S: Field>(
    w: &[Vect<S>],
    order: &SigmaOrder<S>,
    z: &Vect<S>,
    delta_prime: f64,
    t_cap: f64,
    tol: f64,
) -> MembershipReport {
    let n = w.len();
    let q_pos = order.position_of(n - 1);
    let scale = z.norm().max(1.0);

    let span_basis = order.prefix_basis(n);
    let span_residual = perp_component(&span_basis, z).norm();
    if span_residual > tol * scale {
        return MembershipReport {
            ok: false,
            detail: format!("Z leaves span(W) by {span_residual:.3e}"),
        };
    }
    if z.norm() > t_cap * (1.0 + tol) {
        return MembershipReport {
            ok: false,
            detail: format!("‖Z‖ = {:.6e} exceeds T = {t_cap:.6e}", z.norm()),
        };
    }
    let p_last = inner(z, &w[n - 1]);
    if (p_last - S::one()).modulus() > tol * scale.max(1.0) {
        return MembershipReport {
            ok: false,
            detail: format!("<Z, W_N> = {:?} != 1", p_last.to_complex()),
        };
    }
    let bound = upsilon_product_bound(n, delta_prime);
    for step in 0..n {
        if step == q_pos {
            continue;
        }
        let idx = order.sigma[step];
        let prod = inner(z, &w[idx]);
        if prod.modulus() > bound * (1.0 + tol) + tol {
            return MembershipReport {
                ok: false,
                detail: format!(
                    "|<Z, W_sigma({step})>| = {:.3e} exceeds {bound:.3e}",
                    prod.modulus()
                ),
            };
        }
        // lattice or orthogonality
        let ratio = prod * S::from_re(1.0 / delta_prime);
        let lattice_ok = ratio.dist_to_lattice() <= tol * (1.0 + ratio.modulus());
        if !lattice_ok {
            let basis = order.prefix_basis(step);
            let g = perp_component(&basis, &w[idx]);
            let ortho_defect = inner(z, &g).modulus();
            if ortho_defect > tol * scale * g.norm().max(1.0) {
                return MembershipReport {
                    ok: false,
                    detail: format!(
                        "step {step}: product {:.3e} neither on the lattice (defect {:.3e}) nor orthogonal (defect {:.3e})",
                        prod.modulus(),
                        ratio.dist_to_lattice(),
                        ortho_defect
                    ),
                };
            }
        }
    }
    MembershipReport {
        ok: true,
        detail: String::new(),
    }
}

/// Outcome of the exhaustive search over `(J, (k_j))` parameters.
#[derive(Debug)]
pub enum SearchOutcome<S: Field> {
    Found(UpsilonCertificate<S>),
    /// The whole parameter space was enumerated without a member.
    Empty,
}

/// Enumerates `Υ(W, δ', T)` members by the parameters of the defining linear
/// system: all subsets `J`, all lattice assignments with `|k_i|` up to the
/// product bound, in shells of non-decreasing lattice magnitude.
///
/// The enumeration order is deterministic (shell radius, then `J` as an
/// ascending bitmask, then a mixed-radix counter over per-step candidates),
/// and the first member in that order is returned. `budget` caps the number
/// of candidate systems solved; exceeding it yields `BudgetExceeded`, which
/// is distinct from a certified-empty result.
pub fn upsilon_search<S: Field>(
    w: &[Vect<S>],
    delta_prime: f64,
    t_cap: f64,
    budget: usize,
) -> Result<SearchOutcome<S>, CoreError> {
    let n = w.len();
    if n > 10 {
        return Err(CoreError::InvalidParameter(
            "exhaustive enumeration is limited to N <= 10".into(),
        ));
    }
    let order = sigma_order(w);
    let q_pos = order.position_of(n - 1);
    let steps: Vec<usize> = (0..n).filter(|&s| s != q_pos).collect();
    let k_radius = 2.0 * 2f64.sqrt() * (n as f64 + 1.0);
    let all_points = S::lattice_points_in_disc(k_radius);

    let mut tried = 0usize;
    for shell in 0..=(k_radius.floor() as usize) {
        let lo = shell as f64 - 0.5;
        // candidates with |k| in this shell; shell 0 is exactly the origin
        let shell_pts: Vec<GaussInt> = all_points
            .iter()
            .copied()
            .filter(|p| {
                if shell == 0 {
                    p.is_zero()
                } else {
                    p.norm() > lo && p.norm() <= shell as f64 + 0.5
                }
            })
            .collect();
        let inner_pts: Vec<GaussInt> = all_points
            .iter()
            .copied()
            .filter(|p| p.norm() <= lo.max(0.0))
            .collect();

        for mask in 0u32..(1 << steps.len()) {
            let j_set: Vec<usize> = steps
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &s)| s)
                .collect();
            // assignments where at least one entry is in the current shell
            // and the rest are strictly inside
            let mut assignment_sets: Vec<Vec<Vec<GaussInt>>> = Vec::new();
            if shell == 0 {
                if !shell_pts.is_empty() {
                    assignment_sets.push(vec![shell_pts.clone(); j_set.len()]);
                }
            } else {
                for outer in 0..j_set.len() {
                    let mut per_slot = Vec::with_capacity(j_set.len());
                    let mut feasible = true;
                    for slot in 0..j_set.len() {
                        let opts = if slot == outer {
                            shell_pts.clone()
                        } else if slot < outer {
                            // earlier slots range over strictly inner points
                            inner_pts.clone()
                        } else {
                            // later slots may also hit the shell
                            let mut v = inner_pts.clone();
                            v.extend(shell_pts.iter().copied());
                            v
                        };
                        if opts.is_empty() {
                            feasible = false;
                            break;
                        }
                        per_slot.push(opts);
                    }
                    if feasible {
                        assignment_sets.push(per_slot);
                    }
                }
                if j_set.is_empty() {
                    continue;
                }
            }

            for per_slot in assignment_sets {
                let mut counter = vec![0usize; j_set.len()];
                loop {
                    let k: Vec<GaussInt> = counter
                        .iter()
                        .zip(&per_slot)
                        .map(|(&c, opts)| opts[c])
                        .collect();
                    tried += 1;
                    if tried > budget {
                        return Err(CoreError::BudgetExceeded {
                            budget,
                            tried: tried - 1,
                        });
                    }
                    if let Ok(z) = construct_z(w, &order, &j_set, &k, delta_prime) {
                        let report = verify_upsilon_member(w, &order, &z, delta_prime, t_cap, 1e-8);
                        if report.ok {
                            return Ok(SearchOutcome::Found(UpsilonCertificate {
                                sigma: order.sigma.clone(),
                                j_set,
                                k,
                                z,
                                delta_prime,
                                t_cap,
                            }));
                        }
                    }
                    // bump the mixed-radix counter
                    let mut pos = 0;
                    loop {
                        if pos == counter.len() {
                            break;
                        }
                        counter[pos] += 1;
                        if counter[pos] < per_slot[pos].len() {
                            break;
                        }
                        counter[pos] = 0;
                        pos += 1;
                    }
                    if pos == counter.len() {
                        break;
                    }
                    if j_set.is_empty() {
                        break;
                    }
                }
            }
        }
    }
    Ok(SearchOutcome::Empty)
}

/// The inductive reduction: perturbs an admissible `Y` (unit product with
/// `W_N`, small products elsewhere) into a member of
/// `Υ(W, δ', ‖Y‖ + √2 N δ'/δ)` without increasing its norm except at the
/// step handling `W_N`.
///
/// Case analysis per step, on the component `c = <Z, g_m>` along the fresh
/// direction `g_m`:
/// - `g_m` numerically zero: nothing to do (orthogonality holds trivially);
/// - `|c| <= √2 δ'`: drop the component (orthogonality case);
/// - otherwise: move `c` to the nearest lattice point reachable inside the
///   unit disc of admissible multipliers.
pub fn reduce_to_upsilon<S: Field>(
    w: &[Vect<S>],
    y: &Vect<S>,
    delta: f64,
    delta_prime: f64,
) -> Result<UpsilonCertificate<S>, CoreError> {
    let n = w.len();
    if n == 0 {
        return Err(CoreError::InvalidParameter("empty sequence".into()));
    }
    let p_last = inner(y, &w[n - 1]);
    if (p_last.modulus() - 1.0).abs() > 1e-6 {
        return Err(CoreError::HypothesisViolated(format!(
            "|<Y, W_N>| = {} != 1",
            p_last.modulus()
        )));
    }
    for (i, wi) in w[..n - 1].iter().enumerate() {
        let p = inner(y, wi).modulus();
        if p > delta_prime * (1.0 + 1e-9) {
            return Err(CoreError::HypothesisViolated(format!(
                "|<Y, W_{i}>| = {p:.3e} exceeds delta' = {delta_prime:.3e}"
            )));
        }
    }
    {
        let others: Vec<Vect<S>> = w[..n - 1].to_vec();
        let mut basis = Vec::new();
        for o in &others {
            if let Some((q, _)) = orthonormalize_against(&basis, o) {
                basis.push(q);
            }
        }
        let dist = perp_component(&basis, &w[n - 1]).norm();
        if dist < delta * (1.0 - 1e-9) {
            return Err(CoreError::HypothesisViolated(format!(
                "d(W_N, span others) = {dist:.3e} below delta = {delta:.3e}"
            )));
        }
    }

    // normalize the product with W_N to exactly one
    let mut z = y * (S::one() / p_last);
    let norm_y = z.norm();

    let order = sigma_order(w);
    let q_pos = order.position_of(n - 1);
    let mut j_set: Vec<usize> = Vec::new();
    let mut k: Vec<GaussInt> = Vec::new();

    for step in 0..n {
        let idx = order.sigma[step];
        let basis = order.prefix_basis(step);
        let g = perp_component(&basis, &w[idx]);
        let gn2 = g.norm_squared();

        if step == q_pos {
            // rescale the g-component so <Z, W_N> returns to exactly 1;
            // ‖g‖ >= d(W_N, span others) >= delta keeps this stable
            let err = inner(&z, &w[n - 1]) - S::one();
            z.axpy(-(err * S::from_re(1.0 / gn2)), &g, S::one());
            continue;
        }

        if gn2 <= 1e-28 * w[idx].norm_squared().max(1e-300) {
            // the pick is numerically inside the prefix span
            continue;
        }
        let c = inner(&z, &g);
        if c.modulus() <= 2f64.sqrt() * delta_prime {
            // orthogonality case: remove the component entirely
            z.axpy(-(c * S::from_re(1.0 / gn2)), &g, S::one());
            continue;
        }
        // lattice case: <Z(zeta), W_m> = e + zeta c with e the prefix part;
        // admissible zeta lie in the unit disc intersected with
        // |zeta - 1| <= sqrt(2) delta'/|c|, which contains a disc of radius
        // rho/2 around zeta_hat that is guaranteed to catch a lattice image
        let e = inner(&z, &w[idx]) - c;
        let rho = 2f64.sqrt() * delta_prime / c.modulus();
        let zeta_hat = S::from_re(1.0 - 0.5 * rho);
        let mu_hat = (e + zeta_hat * c) * S::from_re(1.0 / delta_prime);

        let center = mu_hat.round_to_lattice();
        let mut candidates: Vec<GaussInt> = Vec::new();
        for dre in -1..=1i64 {
            match S::TAG {
                crate::field::FieldTag::Real => {
                    candidates.push(GaussInt::new(center.re + dre, 0));
                }
                crate::field::FieldTag::Complex => {
                    for dim in -1..=1i64 {
                        candidates.push(GaussInt::new(center.re + dre, center.im + dim));
                    }
                }
            }
        }
        candidates.sort_by(|a, b| {
            let da = (mu_hat - S::lattice_scalar(*a)).modulus();
            let db = (mu_hat - S::lattice_scalar(*b)).modulus();
            (da, a.re, a.im).partial_cmp(&(db, b.re, b.im)).unwrap()
        });

        let mut placed = false;
        for cand in candidates {
            let zeta = (S::lattice_scalar(cand) * S::from_re(delta_prime) - e) * (S::one() / c);
            if zeta.modulus() <= 1.0 + 1e-12 && (zeta - S::one()).modulus() <= rho * (1.0 + 1e-12) {
                z.axpy((zeta - S::one()) * (c * S::from_re(1.0 / gn2)), &g, S::one());
                j_set.push(step);
                k.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(CoreError::LatticePointNotFound);
        }
    }

    // the intermediate Z may carry a component outside span(W) inherited
    // from Y; project it away (products with every W_i are unchanged, the
    // norm can only shrink) and verify membership
    let span_basis = order.prefix_basis(n);
    let mut z_span = Vect::<S>::zeros(z.nrows());
    for b in &span_basis {
        z_span.axpy(inner(&z, b), b, S::one());
    }

    let t_cap = norm_y + 2f64.sqrt() * (n as f64) * delta_prime / delta;
    let report = verify_upsilon_member(w, &order, &z_span, delta_prime, t_cap, 1e-8);
    if !report.ok {
        return Err(CoreError::CertificateInvalid(report.detail));
    }
    Ok(UpsilonCertificate {
        sigma: order.sigma,
        j_set,
        k,
        z: z_span,
        delta_prime,
        t_cap,
    })
}

/// Reads the `(J, k)` parameters back off a member of `Υ`: products on the
/// lattice (up to `tol`) land in `J`, the rest must be orthogonality cases.
pub fn extract_parameters<S: Field>(
    w: &[Vect<S>],
    order: &SigmaOrder<S>,
    z: &Vect<S>,
    delta_prime: f64,
    tol: f64,
) -> Result<(Vec<usize>, Vec<GaussInt>), CoreError> {
    let n = w.len();
    let q_pos = order.position_of(n - 1);
    let mut j_set = Vec::new();
    let mut k = Vec::new();
    for step in 0..n {
        if step == q_pos {
            continue;
        }
        let idx = order.sigma[step];
        let basis = order.prefix_basis(step);
        let g = perp_component(&basis, &w[idx]);
        let ortho_defect = inner(z, &g).modulus();
        if ortho_defect <= tol * z.norm().max(1.0) * g.norm().max(1.0) {
            continue;
        }
        let ratio = inner(z, &w[idx]) * S::from_re(1.0 / delta_prime);
        if ratio.dist_to_lattice() <= tol * (1.0 + ratio.modulus()) {
            j_set.push(step);
            k.push(ratio.round_to_lattice());
        } else {
            return Err(CoreError::CertificateInvalid(format!(
                "step {step} is neither lattice nor orthogonal"
            )));
        }
    }
    Ok((j_set, k))
}
