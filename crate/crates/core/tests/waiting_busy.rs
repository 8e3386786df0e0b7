//! Waiting-time and busy-period checks against closed forms and the chain.

use erlang_periodic::busy::{busy_oracle, busy_period_cdf};
use erlang_periodic::model::PhaseIndex;
use erlang_periodic::oracle::integrate_periodic;
use erlang_periodic::waiting::{oracle_wait_cdf, WaitKind};
use erlang_periodic::ModelSpec;

/// `I_ν(x)` by its power series; adequate for the moderate arguments used here.
fn bessel_i(nu: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (0..nu).fold(1.0, |acc, i| acc * half / (i + 1) as f64);
    let mut sum = term;
    for r in 1..400 {
        term *= half * half / (r as f64 * (r + nu) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// First-passage density from level `j` to 0 in the M/M/1 queue.
fn first_passage_density(lam: f64, mu: f64, j: usize, t: f64) -> f64 {
    if t == 0.0 {
        return if j == 1 { mu } else { 0.0 };
    }
    let arg = 2.0 * (lam * mu).sqrt() * t;
    j as f64 / t * (mu / lam).powf(j as f64 / 2.0) * (-(lam + mu) * t).exp() * bessel_i(j, arg)
}

/// CDF by composite Simpson on a fine grid.
fn first_passage_cdf(lam: f64, mu: f64, j: usize, t: f64) -> f64 {
    let n = 4000;
    let h = t / n as f64;
    let mut s = first_passage_density(lam, mu, j, 0.0) + first_passage_density(lam, mu, j, t);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * first_passage_density(lam, mu, j, i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn mm1_busy_period_matches_bessel_form() {
    let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
    let origin = PhaseIndex { a: 0, s: 0 };
    for j in [1, 2, 3] {
        let sol = busy_period_cdf(&spec, j, origin, 0.0, 1.0, 0.005).unwrap();
        let totals = sol.totals();
        for t in [0.1, 0.5, 1.0] {
            let i = (t / 0.005_f64).round() as usize;
            let exact = first_passage_cdf(3.0, 5.0, j, t);
            assert!((totals[i] - exact).abs() < 1e-4, "j = {j}, t = {t}: {} vs {exact}", totals[i]);
        }
    }
}

#[test]
fn bessel_oracle_agrees_with_chain() {
    let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
    let chain = busy_oracle(&spec, 2, PhaseIndex { a: 0, s: 0 }, 0.0, 1.0, 0.01).unwrap().totals();
    for t in [0.2, 0.6, 1.0] {
        let i = (t / 0.01_f64).round() as usize;
        assert!((chain[i] - first_passage_cdf(3.0, 5.0, 2, t)).abs() < 1e-7);
    }
}

#[test]
fn e7_e4_level_three_cross_method() {
    let spec = ModelSpec::e7_e4_example();
    let start = PhaseIndex { a: 2, s: 1 };
    let volterra = busy_period_cdf(&spec, 3, start, 0.3, 2.0, 0.005).unwrap();
    let chain = busy_oracle(&spec, 3, start, 0.3, 2.0, 0.005).unwrap();
    let d = volterra.sup_distance(&chain).unwrap();
    assert!(d < 1e-4, "sup distance {d:.3e}");
}

#[test]
fn deeper_start_empties_later() {
    let spec = ModelSpec::e7_e4_example();
    let origin = PhaseIndex { a: 0, s: 0 };
    let one = busy_period_cdf(&spec, 1, origin, 0.0, 2.0, 0.005).unwrap().totals();
    let two = busy_period_cdf(&spec, 2, origin, 0.0, 2.0, 0.005).unwrap().totals();
    for (b, a) in two.iter().zip(&one) {
        assert!(*b <= a + 1e-5);
    }
}

#[test]
fn mm1_oracle_wait_closed_form() {
    let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
    let dist = integrate_periodic(&spec, 80, 64, 1e-12, 2000).unwrap();
    let horizons: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let queue = oracle_wait_cdf(&spec, &dist, 0.3, &horizons, WaitKind::Queue).unwrap();
    let sojourn = oracle_wait_cdf(&spec, &dist, 0.3, &horizons, WaitKind::Sojourn).unwrap();
    for (i, &t) in horizons.iter().enumerate() {
        let q = 1.0 - 0.6 * (-2.0 * t).exp();
        let s = 1.0 - (-2.0 * t).exp();
        assert!((queue.values[i] - q).abs() < 1e-8, "queue t = {t}");
        assert!((sojourn.values[i] - s).abs() < 1e-8, "sojourn t = {t}");
    }
}
