//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits nonzero if any criterion fails.

use std::time::Instant;

use erlang_periodic::bounds::{root_modulus_bracket, truncation_error_bound};
use erlang_periodic::busy::{busy_oracle, busy_period_cdf};
use erlang_periodic::model::PhaseIndex;
use erlang_periodic::oracle::{extract_boundary, integrate_periodic, integrate_periodic_with, OracleConfig, PeriodicDistribution};
use erlang_periodic::roots::{build_root_set, poly_residual, residual_scale, solve_characteristic};
use erlang_periodic::series::{PhiCoefficients, SeriesEvaluator};
use erlang_periodic::waiting::{oracle_wait_cdf, wait_cdf, wait_cdf_from_point, WaitKind};
use erlang_periodic::{ModelSpec, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn sup_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

fn mm1_reduction() -> Result<Outcome> {
    let clock = Instant::now();
    let spec = ModelSpec::mm1(3.0, 5.0)?;
    let cfg = OracleConfig { levels: 80, grid: 64, tol: 1e-12, max_periods: 2000, substeps: 4 };
    let boundary = extract_boundary(&integrate_periodic_with(&spec, &cfg)?)?;
    let roots = build_root_set(&spec, 0)?;
    let root = roots.roots()[0];
    let root_err = (root.y - Complex64::new(5.0 / 3.0, 0.0)).norm();
    let point = SeriesEvaluator::new(&spec, &roots, &boundary).at(0.3)?;
    let mut level_err: f64 = 0.0;
    for j in 1..=20 {
        let exact = 0.4 * 0.6f64.powi(j as i32);
        level_err = level_err.max((point.level(j)?.values[0] - exact).abs());
    }
    let horizons: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
    let curve = wait_cdf(&spec, &roots, &boundary, 0.3, &horizons, WaitKind::Queue)?;
    let closed: Vec<f64> = horizons.iter().map(|t| 1.0 - 0.6 * (-2.0 * t).exp()).collect();
    let wait_err = sup_abs(&curve.values, &closed);
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        root_err < 1e-12 && level_err <= 1e-8 && wait_err <= 1e-6 && secs < 1.0,
        format!("|y − 5/3| = {root_err:.1e}, max |p_j − 0.4·0.6^j| = {level_err:.2e}, queue-wait sup error = {wait_err:.2e}, {secs:.2}s"),
    )
}

fn root_structure() -> Result<Outcome> {
    let clock = Instant::now();
    let spec = ModelSpec::e7_e4_example();
    let mut counts_ok = true;
    let mut worst_residual: f64 = 0.0;
    let mut bracket_misses = 0;
    let mut unit_root: f64 = f64::INFINITY;
    for n in -20i64..=20 {
        let roots = solve_characteristic(&spec, n)?;
        counts_ok &= roots.inside.len() == 7 && roots.outside.len() == 4;
        let scale = residual_scale(&spec, n);
        for y in roots.inside.iter().copied().chain(roots.outside.iter().map(|r| r.y)) {
            worst_residual = worst_residual.max(poly_residual(&spec, n, y) / scale);
        }
        if n == 0 {
            unit_root = roots.inside.iter().map(|y| (y - 1.0).norm()).fold(f64::INFINITY, f64::min);
        }
        if n.abs() >= 3 {
            let (lo, hi) = root_modulus_bracket(&spec, n);
            bracket_misses += roots.outside.iter().filter(|r| {
                let modulus = r.y.norm().powi(4);
                !(lo < modulus && modulus < hi)
            }).count();
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        counts_ok && unit_root < 1e-12 && worst_residual <= 1e-10 && bracket_misses == 0 && secs < 5.0,
        format!("7 inside / 4 outside for all n: {counts_ok}, |y − 1| at n = 0: {unit_root:.1e}, max relative residual {worst_residual:.1e}, bracket misses {bracket_misses}, {secs:.2}s"),
    )
}

fn level_one_series(dist: &PeriodicDistribution, spec: &ModelSpec) -> Result<Outcome> {
    let clock = Instant::now();
    let boundary = extract_boundary(dist)?;
    let roots = build_root_set(spec, 10)?;
    let eval = SeriesEvaluator::new(spec, &roots, &boundary);
    let mut errs = [0.0f64; 3];
    for t in grid(64) {
        let point = eval.at(t)?;
        let oracle = dist.level_at(t, 1);
        for (e, q) in errs.iter_mut().zip([1, 5, 10]) {
            *e = e.max(sup_abs(&point.truncated(q).level(1)?.values, &oracle));
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        errs[2] <= 1e-3 && secs < 120.0,
        format!("sup error of p_1 over 28 phases and 64 times: q=1 {:.2e}, q=5 {:.2e}, q=10 {:.2e}, {secs:.1}s", errs[0], errs[1], errs[2]),
    )
}

fn bound_validity(dist: &PeriodicDistribution, spec: &ModelSpec) -> Result<Outcome> {
    let boundary = extract_boundary(dist)?;
    let roots = build_root_set(spec, 40)?;
    let eval = SeriesEvaluator::new(spec, &roots, &boundary);
    let mut violations = 0;
    let mut checked = 0;
    let mut worst_ratio: f64 = 0.0;
    for t in grid(16) {
        let point = eval.at(t)?;
        for j in 3..=5 {
            let reference = point.level(j)?;
            for q in [3, 5, 10] {
                let measured = sup_abs(&reference.values, &point.truncated(q).level(j)?.values);
                match truncation_error_bound(spec, t, j, q).bound() {
                    Some(b) => {
                        checked += 1;
                        worst_ratio = worst_ratio.max(measured / b);
                        if measured > b {
                            violations += 1;
                        }
                    }
                    None => violations += 1,
                }
            }
        }
    }
    outcome(
        violations == 0 && checked == 144,
        format!("{checked} (t, j, q) cases, {violations} violations, largest measured/bound = {worst_ratio:.1e}"),
    )
}

fn phi_stochastic(spec: &ModelSpec) -> Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    let (k, m) = (spec.k(), spec.m());
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u: f64 = rng.random_range(0.0..1.0);
        let t = u + rng.random_range(0.0..3.0);
        let phi = PhiCoefficients::new(spec, u, t)?;
        let (lo, hi) = phi.support();
        for a1 in 0..k {
            for s1 in 0..m {
                let mut total = 0.0;
                for n in lo..=hi {
                    for a2 in 0..k {
                        for s2 in 0..m {
                            total += phi.entry(n, a1, s1, a2, s2);
                        }
                    }
                }
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    let mut identity = true;
    for t in [0.0, 0.37, 0.9] {
        let phi = PhiCoefficients::new(spec, t, t)?;
        for n in -2..=2 {
            let mat = phi.matrix(n);
            let expected = if n == 0 { nalgebra::DMatrix::identity(k * m, k * m) } else { nalgebra::DMatrix::zeros(k * m, k * m) };
            identity &= mat == expected;
        }
    }
    outcome(worst <= 1e-10 && identity, format!("max |row sum − 1| over 50 pairs = {worst:.1e}, Φ(t,t) = I exactly: {identity}"))
}

fn waiting_cross_check(dist: &PeriodicDistribution, spec: &ModelSpec) -> Result<Outcome> {
    let boundary = extract_boundary(dist)?;
    let roots = build_root_set(spec, 2)?;
    let eval = SeriesEvaluator::new(spec, &roots, &boundary);
    let horizons: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for u in [0.2, 0.7] {
        let point = eval.at(u)?;
        let oracle = oracle_wait_cdf(spec, dist, u, &horizons, WaitKind::Queue)?;
        let d2 = wait_cdf_from_point(&point, &boundary, &horizons, WaitKind::Queue)?.sup_distance(&oracle);
        let d0 = wait_cdf_from_point(&point.truncated(0), &boundary, &horizons, WaitKind::Queue)?.sup_distance(&oracle);
        pass &= d2 <= 5e-3 && d2 < d0;
        detail.push(format!("u={u}: q=2 {d2:.2e}, q=0 {d0:.2e}"));
    }
    outcome(pass, detail.join("; "))
}

fn busy_cross_method(spec: &ModelSpec) -> Result<Outcome> {
    let clock = Instant::now();
    let start = PhaseIndex { a: 0, s: 0 };
    let (t_max, h) = (5.0, 0.005);
    let mut pass = true;
    let mut detail = Vec::new();
    for j in [1, 2] {
        let oracle = busy_oracle(spec, j, start, 0.0, t_max, h)?;
        let fine = busy_period_cdf(spec, j, start, 0.0, t_max, h)?;
        let coarse = busy_period_cdf(spec, j, start, 0.0, t_max, 2.0 * h)?;
        let (e_fine, e_coarse) = (fine.sup_distance(&oracle)?, coarse.sup_distance(&oracle)?);
        let order = (e_coarse / e_fine).log2();
        pass &= e_fine <= 1e-4 && order >= 1.9;
        detail.push(format!("j={j}: sup error {e_fine:.2e} (h={h}), order {order:.2}"));
    }
    let secs = clock.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    outcome(pass, format!("{}, {secs:.1}s", detail.join("; ")))
}

fn mass_closure(dist: &PeriodicDistribution, spec: &ModelSpec) -> Result<Outcome> {
    let boundary = extract_boundary(dist)?;
    let roots = build_root_set(spec, 10)?;
    let eval = SeriesEvaluator::new(spec, &roots, &boundary);
    let mut worst: f64 = 0.0;
    let mut worst_t = 0.0;
    for t in grid(16) {
        let point = eval.at(t)?;
        let mut total = boundary.p0_total(t);
        for j in 1..=30 {
            total += point.level(j)?.total();
        }
        if (total - 1.0).abs() > worst {
            worst = (total - 1.0).abs();
            worst_t = t;
        }
    }
    outcome(worst <= 1e-4, format!("max |Σ mass − 1| = {worst:.2e} at t = {worst_t}"))
}

type Shared = std::result::Result<PeriodicDistribution, String>;

fn with_oracle(shared: &Shared, f: impl Fn(&PeriodicDistribution) -> Result<Outcome>) -> Result<Outcome> {
    match shared {
        Ok(dist) => f(dist),
        Err(e) => outcome(false, format!("oracle failed: {e}")),
    }
}

fn main() {
    let spec = ModelSpec::e7_e4_example();
    let shared: Shared = integrate_periodic(&spec, 50, 512, 1e-10, 2000).map_err(|e| e.to_string());
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome> + '_>)> = vec![
        ("M/M/1 reduction", Box::new(mm1_reduction)),
        ("root structure", Box::new(root_structure)),
        ("level-1 series vs oracle", Box::new(|| with_oracle(&shared, |d| level_one_series(d, &spec)))),
        ("error-bound validity", Box::new(|| with_oracle(&shared, |d| bound_validity(d, &spec)))),
        ("stochasticity of Φ", Box::new(|| phi_stochastic(&spec))),
        ("waiting-time cross-check", Box::new(|| with_oracle(&shared, |d| waiting_cross_check(d, &spec)))),
        ("busy period cross-method", Box::new(|| busy_cross_method(&spec))),
        ("mass closure", Box::new(|| with_oracle(&shared, |d| mass_closure(d, &spec)))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("criterion {} [{}] {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
