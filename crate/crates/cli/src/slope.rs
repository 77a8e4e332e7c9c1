//! Log-log tail slope estimation with binomial weighting.

use crate::error::HarnessError;

/// Weighted least-squares slope of `log p` against `log t`.
///
/// Needs at least 4 grid points with probabilities strictly inside (0, 1);
/// weights come from the binomial confidence half-widths when supplied.
pub fn tail_slope(
    t_grid: &[f64],
    probs: &[f64],
    ci_halfwidths: Option<&[f64]>,
) -> Result<(f64, f64), HarnessError> {
    let usable = t_grid
        .iter()
        .zip(probs)
        .filter(|(&t, &p)| t > 0.0 && p > 0.0 && p < 1.0)
        .count();
    if usable < 4 {
        return Err(HarnessError::DegenerateGrid(format!(
            "only {usable} grid points with p in (0,1)"
        )));
    }
    nogaps_core::stats::weighted_loglog_slope(t_grid, probs, ci_halfwidths)
        .map_err(|e| HarnessError::DegenerateGrid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic() {
        let ts: Vec<f64> = (1..=6).map(|k| 0.1 * k as f64).collect();
        let ps: Vec<f64> = ts.iter().map(|t| t.powi(3)).collect();
        let (slope, _) = tail_slope(&ts, &ps, None).unwrap();
        assert!((slope - 3.0).abs() < 1e-9);
    }

    #[test]
    fn intercept_absorbs_constants() {
        let ts: Vec<f64> = (1..=6).map(|k| 0.05 * k as f64).collect();
        let ps: Vec<f64> = ts.iter().map(|t| 5.0 * t * t).collect();
        let (slope, _) = tail_slope(&ts, &ps, None).unwrap();
        assert!((slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let ts = [0.1, 0.2, 0.3, 0.4];
        let ps = [0.0, 0.0, 1.0, 1.0];
        assert!(matches!(
            tail_slope(&ts, &ps, None),
            Err(HarnessError::DegenerateGrid(_))
        ));
    }
}
