//! Property tests for the structural invariants of the statistics and
//! geometry primitives.

use nogaps_core::ellipsoid::{dist_to_ellipsoid, Ellipsoid};
use nogaps_core::embed::real_embed;
use nogaps_core::lcd::{dist_to_int_lattice, lcd_vector, LCDParams};
use nogaps_core::linalg::{inner, Mat, Vect};
use nogaps_core::stats::{min_subset_norm, rearrange};
use num_complex::Complex64;
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n..=n)
}

proptest! {
    #[test]
    fn rearrange_preserves_magnitude_multiset(xs in vec_strategy(9)) {
        let v = Vect::<f64>::from_column_slice(&xs);
        let stats = rearrange(&v);
        let mut mags: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in stats.as_slice().iter().zip(&mags) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn subset_norm_splits_total_norm(xs in vec_strategy(8), m in 1usize..=8) {
        let v = Vect::<f64>::from_column_slice(&xs);
        let small = min_subset_norm(&v, m).unwrap();
        let top: f64 = rearrange(&v).as_slice()[..8 - m].iter().map(|x| x * x).sum();
        let total = v.norm_squared();
        prop_assert!((small * small + top - total).abs() <= 1e-9 * total.max(1.0));
    }

    #[test]
    fn ellipsoid_distance_is_lipschitz(
        xs in vec_strategy(4),
        ys in vec_strategy(4),
        gens in prop::collection::vec(-3.0f64..3.0, 12..=12),
        delta in 0.0f64..2.0,
    ) {
        let e = Ellipsoid::from_generators(Mat::<f64>::from_column_slice(4, 3, &gens)).unwrap();
        let x = Vect::<f64>::from_column_slice(&xs);
        let y = Vect::<f64>::from_column_slice(&ys);
        let dx = dist_to_ellipsoid(&x, &e, delta);
        let dy = dist_to_ellipsoid(&y, &e, delta);
        prop_assert!((dx - dy).abs() <= (&x - &y).norm() + 1e-9);
    }

    #[test]
    fn embedding_preserves_inner_products(
        res in vec_strategy(5),
        ims in vec_strategy(5),
        res2 in vec_strategy(5),
        ims2 in vec_strategy(5),
    ) {
        let x = Vect::<Complex64>::from_fn(5, |i, _| Complex64::new(res[i], ims[i]));
        let y = Vect::<Complex64>::from_fn(5, |i, _| Complex64::new(res2[i], ims2[i]));
        let lhs = real_embed(&x).dot(&real_embed(&y));
        let rhs = inner(&x, &y).re;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn lcd_lower_bracket_clears_the_grid(xs in vec_strategy(3), cap_steps in 200u64..400) {
        let v = Vect::<f64>::from_column_slice(&xs);
        prop_assume!(v.norm() > 1e-3);
        let params = LCDParams {
            alpha: 1.0,
            gamma: 0.2,
            theta_cap: cap_steps as f64 * 0.01,
            grid_step: 0.001,
        };
        let bracket = lcd_vector(&v, &params).unwrap();
        let mut k = 1u64;
        loop {
            let theta = k as f64 * params.grid_step;
            if theta >= bracket.lower.min(params.theta_cap) {
                break;
            }
            let d = dist_to_int_lattice(&v, theta);
            prop_assert!(d >= (params.gamma * theta * v.norm()).min(params.alpha));
            k += 1;
        }
    }
}
