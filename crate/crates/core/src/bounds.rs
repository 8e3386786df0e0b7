//! Truncation error bounds for the root series.
//!
//! The outside roots satisfy `|χ^{1/k}| ∈ 2π|n|/λ̄ ± (λ̄+2μ̄)/(√2 λ̄)`, each
//! weight obeys `|f(χ_{ℓ,n},t)| <= |χ| C_n`, and summing the two tails
//! `|n| > q` against an integral gives a closed form that vanishes as
//! `q → ∞` whenever `j >= 3`. Preconditions are checked rather than clamped:
//! a bound outside its range of validity is reported as not applicable.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::oracle::BoundaryFunctions;
use crate::quadrature::CompositeRule;
use crate::roots::RootSet;
use crate::series::{QuadratureSpec, SeriesEvaluator};

/// `(low, high)` for `|χ^{1/k}| = |y|^m` at index `n`. The width does not depend on `n`.
pub fn root_modulus_bracket(spec: &ModelSpec, n: i64) -> (f64, f64) {
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let centre = 2.0 * PI * n.unsigned_abs() as f64 / lb;
    let half = (lb + 2.0 * mb) / (SQRT_2 * lb);
    (centre - half, centre + half)
}

/// Lower bound on `|f2(χ_{ℓ,n})|` used in the denominator of `C_n`.
pub fn f2_lower_bound(spec: &ModelSpec, n: i64) -> f64 {
    let (k, m) = (spec.k() as f64, spec.m() as f64);
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let nf = n as f64;
    m * ((lb + mb).powi(2) + 4.0 * PI * PI * nf * nf).sqrt() - (k + m) * mb
}

/// `C_n` at time `t`, or an error when the `f2` lower bound is not positive.
pub fn c_constant(spec: &ModelSpec, t: f64, n: i64) -> Result<f64> {
    c_constant_with(spec, t, n, QuadratureSpec::default())
}

pub fn c_constant_with(spec: &ModelSpec, t: f64, n: i64, quad: QuadratureSpec) -> Result<f64> {
    let denom = f2_lower_bound(spec, n);
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "C_n needs a positive |f2| lower bound; got {denom:.6} at n = {n} (increase |n| or check ergodicity)"
        )));
    }
    let ratio = spec.mu_bar() / spec.lambda_bar();
    let rule = CompositeRule::new(t - 1.0, t, quad.panels, quad.order);
    let num = rule.integrate(|u| {
        (spec.lambda().value(u) + spec.mu().value(u)) * (ratio * spec.lambda().integral(u, t)).exp()
    });
    Ok(num / denom)
}

/// Whether a bound could be formed.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundStatus {
    Valid(f64),
    NotApplicable(String),
}

/// Tail bound on `‖p_j(t) − p_j^{(q)}(t)‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    pub j: usize,
    pub q: usize,
    pub t: f64,
    pub c_q: Option<f64>,
    pub status: BoundStatus,
}

impl ErrorBudget {
    pub fn is_valid(&self) -> bool {
        matches!(self.status, BoundStatus::Valid(_))
    }

    pub fn bound(&self) -> Option<f64> {
        match self.status {
            BoundStatus::Valid(b) => Some(b),
            BoundStatus::NotApplicable(_) => None,
        }
    }

    fn not_applicable(j: usize, q: usize, t: f64, c_q: Option<f64>, why: String) -> Self {
        Self { j, q, t, c_q, status: BoundStatus::NotApplicable(why) }
    }
}

pub fn truncation_error_bound(spec: &ModelSpec, t: f64, j: usize, q: usize) -> ErrorBudget {
    let na = |c, why: &str| ErrorBudget::not_applicable(j, q, t, c, why.to_string());
    if j < 3 {
        return na(None, "the tail bound needs j >= 3");
    }
    let k = spec.k() as f64;
    let p = k * (j as f64 - 2.0);
    if p <= 1.0 {
        return na(None, "the tail integral diverges unless k(j-2) > 1");
    }
    let (lb, mb) = (spec.lambda_bar(), spec.mu_bar());
    let base = 2.0 * PI * q as f64 - (lb + 2.0 * mb) / SQRT_2;
    if base <= 0.0 {
        return na(None, "q too small: the root-modulus lower bracket is not positive");
    }
    let c_q = match c_constant(spec, t, q as i64) {
        Ok(c) => c,
        Err(e) => return na(None, &e.to_string()),
    };
    // exp/ln form keeps λ̄^p / base^(p-1) finite for large p
    let log_bound = (spec.m() as f64 * c_q / PI).ln() + p * lb.ln() + (1.0 - p) * base.ln() - (p - 1.0).ln();
    ErrorBudget { j, q, t, c_q: Some(c_q), status: BoundStatus::Valid(log_bound.exp()) }
}

/// One row of [`empirical_decay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub n: i64,
    pub max_abs_f: f64,
    /// `max_ℓ |f| / |χ|`, the quantity `C_n` bounds.
    pub max_scaled: f64,
}

/// `max_ℓ |f(χ_{ℓ,n}, t)|` for every `n` in the root set.
pub fn empirical_decay(
    spec: &ModelSpec,
    roots: &RootSet,
    boundary: &BoundaryFunctions,
    t: f64,
) -> Result<Vec<DecayRow>> {
    let point = SeriesEvaluator::new(spec, roots, boundary).at(t)?;
    let mut rows: Vec<DecayRow> = Vec::new();
    for (root, f) in point.terms() {
        let scaled = f.norm() / root.chi.norm();
        match rows.last_mut() {
            Some(row) if row.n == root.n => {
                row.max_abs_f = row.max_abs_f.max(f.norm());
                row.max_scaled = row.max_scaled.max(scaled);
            }
            _ => rows.push(DecayRow { n: root.n, max_abs_f: f.norm(), max_scaled: scaled }),
        }
    }
    Ok(rows)
}
