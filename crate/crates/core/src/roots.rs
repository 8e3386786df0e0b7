//! Characteristic roots `λ̄ y^{k+m} − (λ̄ + μ̄ + 2πin) y^k + μ̄ = 0`, one
//! polynomial per Fourier index `n`, in the variable `y = z^{1/(km)}`.
//!
//! Fractional powers of `χ = y^{km}` are always taken through `y`:
//! `χ^{q/k} = y^{qm}` and `χ^{s/m} = y^{sk}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Roots within this distance of the unit circle count as "on" it.
pub const CIRCLE_TIE_TOL: f64 = 1e-9;
const CONTRACTION_MAX_ITER: usize = 200;
const NEWTON_MAX_ITER: usize = 50;

/// One outside-circle root for Fourier index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoot {
    pub n: i64,
    pub branch: usize,
    pub y: Complex64,
    pub chi: Complex64,
    k: usize,
    m: usize,
}

impl CharacteristicRoot {
    pub fn new(n: i64, branch: usize, y: Complex64, k: usize, m: usize) -> Self {
        Self { n, branch, y, chi: y.powi((k * m) as i32), k, m }
    }

    /// `y^e` for a signed integer exponent.
    pub fn y_pow(&self, e: i64) -> Complex64 {
        self.y.powi(e as i32)
    }

    /// `χ^{q/k} = y^{qm}`.
    pub fn pow_k(&self, q: i64) -> Complex64 {
        self.y_pow(q * self.m as i64)
    }

    /// `χ^{s/m} = y^{sk}`.
    pub fn pow_m(&self, s: i64) -> Complex64 {
        self.y_pow(s * self.k as i64)
    }

    pub fn conj(&self) -> Self {
        Self::new(-self.n, self.branch, self.y.conj(), self.k, self.m)
    }
}

/// All `k + m` roots for one `n`, split by the unit circle.
#[derive(Debug, Clone)]
pub struct CharacteristicRoots {
    pub n: i64,
    /// `|y| <= 1` (within [`CIRCLE_TIE_TOL`]); contains `y = 1` when `n = 0`.
    pub inside: Vec<Complex64>,
    /// `|y| > 1`, ordered by `arg y ∈ [0, 2π)`.
    pub outside: Vec<CharacteristicRoot>,
}

fn two_pi_i_n(n: i64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * n as f64)
}

/// `λ̄ y^{k+m} − (λ̄ + μ̄ + 2πin) y^k + μ̄`
pub fn characteristic_poly(spec: &ModelSpec, n: i64, y: Complex64) -> Complex64 {
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let yk = y.powi(spec.k() as i32);
    lb * yk * y.powi(spec.m() as i32) - (lb + mb + two_pi_i_n(n)) * yk + mb
}

fn characteristic_poly_deriv(spec: &ModelSpec, n: i64, y: Complex64) -> Complex64 {
    let (k, m) = (spec.k() as i32, spec.m() as i32);
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    lb * (k + m) as f64 * y.powi(k + m - 1) - (lb + mb + two_pi_i_n(n)) * k as f64 * y.powi(k - 1)
}

/// Scale used for the polynomial residual tolerance.
pub fn residual_scale(spec: &ModelSpec, n: i64) -> f64 {
    spec.lambda_bar() + spec.mu_bar() + 2.0 * PI * n.unsigned_abs() as f64
}

/// Sum of term magnitudes at `y`, floored by [`residual_scale`]; large roots
/// carry rounding in proportion to their biggest term.
pub fn term_scale(spec: &ModelSpec, n: i64, y: Complex64) -> f64 {
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let r = y.norm();
    let terms = lb * r.powi((spec.k() + spec.m()) as i32) + residual_scale(spec, n) * r.powi(spec.k() as i32) + mb;
    terms.max(residual_scale(spec, n))
}

pub fn poly_residual(spec: &ModelSpec, n: i64, y: Complex64) -> f64 {
    characteristic_poly(spec, n, y).norm()
}

/// `|1 − exp{λ̄(y^m − 1) + μ̄(y^{−k} − 1) − 2πin}|`
pub fn denominator_residual(spec: &ModelSpec, n: i64, y: Complex64) -> f64 {
    let e = spec.lambda_bar() * (y.powi(spec.m() as i32) - 1.0)
        + spec.mu_bar() * (y.powi(-(spec.k() as i32)) - 1.0)
        - two_pi_i_n(n);
    (1.0 - e.exp()).norm()
}

fn arg_0_2pi(y: Complex64) -> f64 {
    y.arg().rem_euclid(2.0 * PI)
}

fn polish(spec: &ModelSpec, n: i64, mut y: Complex64) -> Complex64 {
    for _ in 0..NEWTON_MAX_ITER {
        let d = characteristic_poly_deriv(spec, n, y);
        if d.norm() == 0.0 {
            break;
        }
        let step = characteristic_poly(spec, n, y) / d;
        y -= step;
        if step.norm() <= 1e-15 * y.norm().max(1.0) {
            break;
        }
    }
    y
}

/// Eigenvalues of the companion matrix of the monic characteristic polynomial.
fn companion_roots(spec: &ModelSpec, n: i64) -> Result<Vec<Complex64>> {
    let (k, m) = (spec.k(), spec.m());
    let deg = k + m;
    let lb = spec.lambda_bar();
    // monic coefficients a_0..a_{deg-1} of y^deg + Σ a_i y^i
    let mut coeffs = vec![Complex64::new(0.0, 0.0); deg];
    coeffs[0] = Complex64::new(spec.mu_bar() / lb, 0.0);
    coeffs[k] = -(lb + spec.mu_bar() + two_pi_i_n(n)) / lb;

    let mut c = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        c[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        c[(i, deg - 1)] = -coeffs[i];
    }
    let schur = Schur::try_new(c, 1e-15, 10_000)
        .ok_or_else(|| Error::RootSolver(format!("companion Schur failed for n = {n}")))?;
    let (_, t) = schur.unpack();
    Ok((0..deg).map(|i| t[(i, i)]).collect())
}

/// All roots for index `n`, partitioned into `k` inside/on and `m` outside.
pub fn solve_characteristic(spec: &ModelSpec, n: i64) -> Result<CharacteristicRoots> {
    spec.require_ergodic()?;
    let (k, m) = (spec.k(), spec.m());
    let mut inside = Vec::with_capacity(k);
    let mut outside = Vec::with_capacity(m);
    for y in companion_roots(spec, n)? {
        let y = polish(spec, n, y);
        if y.norm() <= 1.0 + CIRCLE_TIE_TOL {
            inside.push(y);
        } else {
            outside.push(y);
        }
    }
    if inside.len() != k || outside.len() != m {
        return Err(Error::RootSolver(format!(
            "n = {n}: found {} roots inside/on and {} outside the unit circle, expected {k} and {m}",
            inside.len(),
            outside.len()
        )));
    }
    for &y in inside.iter().chain(&outside) {
        let r = poly_residual(spec, n, y);
        let tol = 1e-10 * term_scale(spec, n, y);
        if r > tol {
            return Err(Error::RootSolver(format!(
                "n = {n}: root {y} has residual {r:.3e} above {tol:.3e}"
            )));
        }
    }
    inside.sort_by(|a, b| arg_0_2pi(*a).total_cmp(&arg_0_2pi(*b)));
    outside.sort_by(|a, b| arg_0_2pi(*a).total_cmp(&arg_0_2pi(*b)));
    let outside = outside
        .into_iter()
        .enumerate()
        .map(|(branch, y)| CharacteristicRoot::new(n, branch, y, k, m))
        .collect();
    Ok(CharacteristicRoots { n, inside, outside })
}

/// Seeds `e^{2πiq/m} ((2πin + λ̄ + μ̄)/λ̄)^{1/m}` of the outer contraction.
pub fn contraction_seeds(spec: &ModelSpec, n: i64) -> Vec<Complex64> {
    let m = spec.m();
    let base = ((two_pi_i_n(n) + spec.lambda_bar() + spec.mu_bar()) / spec.lambda_bar())
        .powf(1.0 / m as f64);
    (0..m)
        .map(|q| Complex64::from_polar(1.0, 2.0 * PI * q as f64 / m as f64) * base)
        .collect()
}

fn contract(spec: &ModelSpec, n: i64, q: usize, seed: Complex64) -> Option<Complex64> {
    let (k, m) = (spec.k() as i32, spec.m());
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let rot = Complex64::from_polar(1.0, 2.0 * PI * q as f64 / m as f64);
    let mut y = seed;
    for _ in 0..CONTRACTION_MAX_ITER {
        let next = rot
            * ((two_pi_i_n(n) + lb + mb * (1.0 - y.powi(-k))) / lb).powf(1.0 / m as f64);
        let step = (next - y).norm();
        y = next;
        if step <= 1e-15 * y.norm() {
            return Some(y);
        }
    }
    None
}

/// Outside roots via the fixed-point iteration
/// `y ← e^{2πiq/m} ((2πin + λ̄ + μ̄(1 − y^{−k}))/λ̄)^{1/m}`.
///
/// Falls back to [`solve_characteristic`] when any branch fails to converge or
/// the branches do not produce `m` distinct outside roots.
pub fn contraction_outer(spec: &ModelSpec, n: i64) -> Result<Vec<CharacteristicRoot>> {
    spec.require_ergodic()?;
    let (k, m) = (spec.k(), spec.m());
    let found: Option<Vec<Complex64>> = contraction_seeds(spec, n)
        .into_iter()
        .enumerate()
        .map(|(q, seed)| contract(spec, n, q, seed))
        .collect();
    let usable = found.filter(|ys| {
        ys.iter().all(|y| y.norm() > 1.0 + CIRCLE_TIE_TOL)
            && ys.iter().enumerate().all(|(i, a)| ys[i + 1..].iter().all(|b| (a - b).norm() > 1e-8))
    });
    match usable {
        Some(mut ys) => {
            ys.sort_by(|a, b| arg_0_2pi(*a).total_cmp(&arg_0_2pi(*b)));
            Ok(ys
                .into_iter()
                .enumerate()
                .map(|(branch, y)| CharacteristicRoot::new(n, branch, y, k, m))
                .collect())
        }
        None => Ok(solve_characteristic(spec, n)?.outside),
    }
}

/// Greedy nearest-neighbour pairing; returns the largest paired distance.
pub fn max_pairing_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut free: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let Some((idx, d)) = free
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
        else {
            return f64::INFINITY;
        };
        worst = worst.max(d);
        free.swap_remove(idx);
    }
    if free.is_empty() {
        worst
    } else {
        f64::INFINITY
    }
}

/// Outside roots for every `n ∈ [−q, q]`, ordered by `(n, branch)`.
#[derive(Debug, Clone)]
pub struct RootSet {
    spec: ModelSpec,
    q: usize,
    roots: Vec<CharacteristicRoot>,
}

impl RootSet {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn roots(&self) -> &[CharacteristicRoot] {
        &self.roots
    }

    pub fn for_index(&self, n: i64) -> &[CharacteristicRoot] {
        let m = self.spec.m();
        if n.unsigned_abs() as usize > self.q {
            return &[];
        }
        let start = (n + self.q as i64) as usize * m;
        &self.roots[start..start + m]
    }

    /// Restriction to `|n| <= q`.
    pub fn truncate(&self, q: usize) -> RootSet {
        let q = q.min(self.q);
        let roots = self
            .roots
            .iter()
            .filter(|r| r.n.unsigned_abs() as usize <= q)
            .copied()
            .collect();
        RootSet { spec: self.spec.clone(), q, roots }
    }

    /// Smallest pairwise distance among all roots in the set.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.roots.iter().enumerate() {
            for b in &self.roots[i + 1..] {
                best = best.min((a.y - b.y).norm());
            }
        }
        best
    }

    /// Checks `(n, y) ↦ (−n, ȳ)` maps the set onto itself.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.roots.iter().all(|r| {
            let c: Vec<Complex64> = self.for_index(-r.n).iter().map(|x| x.y).collect();
            c.iter().any(|y| (y - r.y.conj()).norm() <= tol)
        })
    }
}

pub fn build_root_set(spec: &ModelSpec, q: usize) -> Result<RootSet> {
    spec.require_ergodic()?;
    let nonneg: Vec<Vec<CharacteristicRoot>> = (0..=q as i64)
        .into_par_iter()
        .map(|n| solve_characteristic(spec, n).map(|r| r.outside))
        .collect::<Result<_>>()?;

    let mut roots = Vec::with_capacity((2 * q + 1) * spec.m());
    for n in (1..=q).rev() {
        let mut conj: Vec<CharacteristicRoot> = nonneg[n].iter().map(|r| r.conj()).collect();
        conj.sort_by(|a, b| arg_0_2pi(a.y).total_cmp(&arg_0_2pi(b.y)));
        for (branch, r) in conj.iter_mut().enumerate() {
            r.branch = branch;
        }
        roots.extend(conj);
    }
    for set in &nonneg {
        roots.extend(set.iter().copied());
    }
    let set = RootSet { spec: spec.clone(), q, roots };
    if !set.is_conjugate_closed(1e-9) {
        return Err(Error::RootSolver("root set is not closed under conjugation".into()));
    }
    Ok(set)
}
