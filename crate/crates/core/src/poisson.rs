//! Poisson point masses and tails.

use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Point masses are dropped once the remaining upper tail is below this.
const TAIL_CUTOFF: f64 = 1e-18;

/// `P{N = j}` for `N ~ Poisson(mean)`, `j = 0..len`, where the array is long
/// enough that the mass beyond it is below 1e-18.
pub fn pmfs(mean: f64) -> Vec<f64> {
    if mean <= 0.0 {
        return vec![1.0];
    }
    let mut out = Vec::with_capacity((mean + 12.0 * mean.sqrt() + 40.0) as usize);
    // the product recurrence is exact enough until e^{-mean} underflows
    let recurrence = mean < 600.0;
    let ln_mean = mean.ln();
    let mut p = (-mean).exp();
    let mut cumulative = 0.0;
    let mut j = 0usize;
    loop {
        if j > 0 {
            p = if recurrence { p * mean / j as f64 } else { (j as f64 * ln_mean - mean - ln_gamma(j as f64 + 1.0)).exp() };
        } else if !recurrence {
            p = (-mean).exp();
        }
        out.push(p);
        cumulative += p;
        if j as f64 > mean && (1.0 - cumulative <= TAIL_CUTOFF || p <= TAIL_CUTOFF * 1e-3) {
            break;
        }
        j += 1;
    }
    out
}

/// `P{N >= r}` for `N ~ Poisson(mean)` via the regularized lower incomplete gamma.
pub fn upper_tail(r: i64, mean: f64) -> f64 {
    if r <= 0 {
        1.0
    } else if mean <= 0.0 {
        0.0
    } else {
        gamma_lr(r as f64, mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmfs_sum_to_one() {
        for &mean in &[0.0, 1e-3, 0.5, 3.0, 27.5, 80.0] {
            let p = pmfs(mean);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-13, "mean {mean}");
        }
    }

    #[test]
    fn tail_matches_direct_sum() {
        for &mean in &[0.2, 2.0, 9.0] {
            let p = pmfs(mean);
            for r in 0..12 {
                let direct: f64 = 1.0 - p[..r.min(p.len())].iter().sum::<f64>();
                assert!((upper_tail(r as i64, mean) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tail_edge_cases() {
        assert_eq!(upper_tail(0, 3.0), 1.0);
        assert_eq!(upper_tail(-2, 3.0), 1.0);
        assert_eq!(upper_tail(1, 0.0), 0.0);
        assert!((upper_tail(1, 2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
    }
}
