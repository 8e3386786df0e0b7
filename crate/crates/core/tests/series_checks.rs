//! Series-level checks against independent constructions.

use std::sync::OnceLock;

use erlang_periodic::bounds::{c_constant, truncation_error_bound};
use erlang_periodic::oracle::{extract_boundary, integrate_periodic, BoundaryFunctions};
use erlang_periodic::roots::{build_root_set, RootSet};
use erlang_periodic::series::{phi_coefficient, PhiCoefficients, QuadratureSpec, SeriesEvaluator};
use erlang_periodic::ModelSpec;
use statrs::distribution::{Discrete, Poisson};

struct Fixture {
    spec: ModelSpec,
    boundary: BoundaryFunctions,
    roots: RootSet,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = ModelSpec::e7_e4_example();
        let dist = integrate_periodic(&spec, 50, 512, 1e-10, 2000).unwrap();
        let boundary = extract_boundary(&dist).unwrap();
        let roots = build_root_set(&spec, 10).unwrap();
        Fixture { spec, boundary, roots }
    })
}

fn poisson_pmf(mean: f64, x: u64) -> f64 {
    if mean == 0.0 {
        return f64::from(u8::from(x == 0));
    }
    Poisson::new(mean).unwrap().pmf(x)
}

/// Enumerates arrival and service phase counts directly.
fn brute_force_phi(k: usize, m: usize, lam: f64, mu: f64, n: i64, a1: usize, s1: usize, a2: usize, s2: usize) -> f64 {
    let mut total = 0.0;
    for na in 0..200u64 {
        let pa = poisson_pmf(lam, na);
        if pa < 1e-300 && na as f64 > lam {
            break;
        }
        let arr = a1 + na as usize;
        if arr % k != a2 {
            continue;
        }
        for ns in 0..200u64 {
            let ps = poisson_pmf(mu, ns);
            if ps < 1e-300 && ns as f64 > mu {
                break;
            }
            let srv = s1 + ns as usize;
            if srv % m == s2 && (arr / k) as i64 - (srv / m) as i64 == n {
                total += pa * ps;
            }
        }
    }
    total
}

#[test]
fn phi_matches_phase_count_enumeration() {
    let spec = ModelSpec::e7_e4_example();
    let (u, t) = (0.15, 1.35);
    let tau = std::f64::consts::TAU;
    let dc = ((tau * t).cos() - (tau * u).cos()) / tau;
    let lam = 3.0 * (t - u) + 2.0 * dc;
    let mu = 5.0 * (t - u) - 4.0 * dc;
    let phi = PhiCoefficients::new(&spec, u, t).unwrap();
    for n in [-3, -1, 0, 1, 2] {
        for (a1, s1, a2, s2) in [(0, 0, 0, 0), (6, 3, 0, 0), (2, 1, 5, 3), (5, 0, 1, 2), (0, 3, 6, 0), (3, 2, 3, 1)] {
            let ours = phi.entry(n, a1, s1, a2, s2);
            let reference = brute_force_phi(7, 4, lam, mu, n, a1, s1, a2, s2);
            assert!((ours - reference).abs() < 1e-14, "n={n} ({a1},{s1})->({a2},{s2}): {ours} vs {reference}");
        }
    }
}

#[test]
fn skellam_by_convolution() {
    let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
    let (u, t) = (0.2, 1.1);
    let (lam, mu) = (3.0 * (t - u), 5.0 * (t - u));
    for n in -8i64..=6 {
        let conv: f64 = (0..200u64)
            .filter(|&b| b as i64 + n >= 0)
            .map(|b| poisson_pmf(lam, (b as i64 + n) as u64) * poisson_pmf(mu, b))
            .sum();
        let ours = phi_coefficient(&spec, u, t, n, 0, 0, 0, 0).unwrap();
        assert!((ours - conv).abs() < 1e-15, "n = {n}: {ours} vs {conv}");
    }
}

#[test]
fn quadrature_refinement_is_invisible() {
    let f = fixture();
    let coarse = SeriesEvaluator::new(&f.spec, &f.roots, &f.boundary);
    let fine = coarse.clone().with_quadrature(QuadratureSpec::default().refined(4));
    for t in [0.0, 0.3, 0.71] {
        let a = coarse.at(t).unwrap().level(1).unwrap();
        let b = fine.at(t).unwrap().level(1).unwrap();
        let d = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-10, "t = {t}: {d:.2e}");
    }
}

#[test]
fn weights_respect_the_c_n_bound() {
    let f = fixture();
    for t in [0.1, 0.55] {
        let point = SeriesEvaluator::new(&f.spec, &f.roots, &f.boundary).at(t).unwrap();
        for (root, w) in point.terms() {
            if let Ok(c) = c_constant(&f.spec, t, root.n) {
                assert!(w.norm() <= root.chi.norm() * c, "n = {}: |f| = {:.3e}", root.n, w.norm());
            }
        }
    }
}

#[test]
fn level_five_low_order_within_bound() {
    let f = fixture();
    let eval = SeriesEvaluator::new(&f.spec, &f.roots, &f.boundary);
    for t in [0.0, 0.25, 0.5, 0.75] {
        let point = eval.at(t).unwrap();
        let high = point.level(5).unwrap();
        let low = point.truncated(2).level(5).unwrap();
        let d = high.values.iter().zip(&low.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let bound = truncation_error_bound(&f.spec, t, 5, 2).bound().unwrap();
        assert!(d <= bound, "t = {t}: {d:.2e} > {bound:.2e}");
    }
}

#[test]
fn estimates_are_real_and_cauchy() {
    let f = fixture();
    let eval = SeriesEvaluator::new(&f.spec, &f.roots, &f.boundary);
    for t in [0.05, 0.4, 0.9] {
        let point = eval.at(t).unwrap();
        for j in 1..=8 {
            let est = point.level(j).unwrap();
            assert!(est.imag_residual < 1e-10, "t = {t}, j = {j}: imag {:.2e}", est.imag_residual);
            let slack = truncation_error_bound(&f.spec, t, j, 10).bound().unwrap_or(0.0).max(1e-6);
            assert!(est.values.iter().all(|&v| v >= -slack));
        }
        for j in 3..=5 {
            for q in 2..10 {
                let a = point.truncated(q).level(j).unwrap();
                let b = point.truncated(q + 1).level(j).unwrap();
                let step = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let bound = truncation_error_bound(&f.spec, t, j, q).bound().unwrap();
                assert!(step <= bound, "t = {t}, j = {j}, q = {q}");
            }
        }
    }
}
