//! Waiting-time distributions for a customer arriving at time `u`.
//!
//! Given `j >= 1` customers present and the one in service in phase `s`, the
//! arrival reaches the server after `mj − s` further service phases and leaves
//! after `m` more. Phase completions form a Poisson process of intensity
//! `μ(·)`, so each conditional CDF is an upper Poisson tail. Unconditioning
//! over the series for `P{X(u)=j, J(u)=s}` collapses the level sum into a
//! geometric factor in `w = χ^{−1/m} = y^{−k}`. An arrival finding level 0
//! waits zero, which contributes an atom of mass `Σ_a p_{0,a}(u)` at `t = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::oracle::{BoundaryFunctions, PeriodicDistribution};
use crate::poisson;
use crate::roots::RootSet;
use crate::series::{SeriesEvaluator, SeriesPoint};

/// Wait to reach the server, or until departure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaitKind {
    Queue,
    Sojourn,
}

impl WaitKind {
    /// Extra phases past reaching the server.
    fn extra(self, m: usize) -> i64 {
        match self {
            WaitKind::Queue => 0,
            WaitKind::Sojourn => m as i64,
        }
    }
}

impl std::str::FromStr for WaitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "queue" => Ok(WaitKind::Queue),
            "sojourn" => Ok(WaitKind::Sojourn),
            other => Err(Error::Config(format!("wait kind must be `queue` or `sojourn`, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for WaitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WaitKind::Queue => "queue",
            WaitKind::Sojourn => "sojourn",
        })
    }
}

/// `P{W(u) <= t}` on a grid of horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct CDFCurve {
    pub u: f64,
    pub kind: WaitKind,
    pub horizons: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |Im|` of the series before realization; zero for the oracle.
    pub imag_residual: f64,
}

impl CDFCurve {
    pub fn sup_distance(&self, other: &CDFCurve) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Largest decrease between consecutive horizons.
    pub fn max_decrease(&self) -> f64 {
        self.values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }
}

fn check_horizons(horizons: &[f64]) -> Result<()> {
    if horizons.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Domain("waiting-time horizons must be finite and nonnegative".into()));
    }
    Ok(())
}

/// `P{W_q(u) <= t | X(u) = j, J(u) = s}`.
pub fn conditional_wait_cdf(spec: &ModelSpec, j: usize, s: usize, u: f64, t: f64) -> Result<f64> {
    conditional_cdf(spec, j, s, u, t, WaitKind::Queue)
}

/// Conditional CDF for either kind.
pub fn conditional_cdf(spec: &ModelSpec, j: usize, s: usize, u: f64, t: f64, kind: WaitKind) -> Result<f64> {
    if j < 1 {
        return Err(Error::Domain("conditional waits need j >= 1; level-0 arrivals wait zero".into()));
    }
    if s >= spec.m() {
        return Err(Error::Domain(format!("service phase {s} out of range for m = {}", spec.m())));
    }
    check_horizons(&[t])?;
    let threshold = (spec.m() * j) as i64 - s as i64 + kind.extra(spec.m());
    Ok(poisson::upper_tail(threshold, spec.mu().integral(u, u + t)))
}

/// `Σ_{q>m} π_q(M) w^{q−m}`, the convergent form of `χ e^{−M}(e^{wM} − Σ_{q<=m} (wM)^q/q!)`.
fn shifted_tail(pmf: &[f64], m: usize, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wp = Complex64::new(1.0, 0.0);
    for &p in pmf.iter().skip(m + 1) {
        wp *= w;
        acc += wp * p;
    }
    acc
}

/// Series CDF from precomputed root weights at the arrival time.
pub fn wait_cdf_from_point(
    point: &SeriesPoint,
    boundary: &BoundaryFunctions,
    horizons: &[f64],
    kind: WaitKind,
) -> Result<CDFCurve> {
    check_horizons(horizons)?;
    let spec = point.spec();
    let (k, m) = (spec.k() as i64, spec.m());
    let u = point.t;

    // root-dependent prefactor f·Σ_a χ^{−a/k}·w/(1−w)
    let mut factors = Vec::with_capacity(point.terms().len());
    for (root, f) in point.terms() {
        let w = root.y_pow(-k);
        if (Complex64::new(1.0, 0.0) - w).norm() < 1e-12 {
            return Err(Error::Singular(format!("χ^(−1/m) = 1 at n = {}, branch {}", root.n, root.branch)));
        }
        let phase_sum: Complex64 = (0..k).map(|a| root.pow_k(-a)).sum();
        factors.push((w, f * phase_sum * w / (1.0 - w)));
    }

    let atom = boundary.p0_total(u);
    let mut values = Vec::with_capacity(horizons.len());
    let mut imag_residual: f64 = 0.0;
    for &t in horizons {
        let mass = spec.mu().integral(u, u + t);
        let mut sum = Complex64::new(0.0, 0.0);
        match kind {
            WaitKind::Queue => {
                for &(w, pre) in &factors {
                    sum += pre * (1.0 - ((w - 1.0) * mass).exp());
                }
                sum += atom;
            }
            WaitKind::Sojourn => {
                let pmf = poisson::pmfs(mass);
                let served = poisson::upper_tail(m as i64 + 1, mass);
                for &(w, pre) in &factors {
                    sum += pre * (served - shifted_tail(&pmf, m, w));
                }
                sum += atom * poisson::upper_tail(m as i64, mass);
            }
        }
        imag_residual = imag_residual.max(sum.im.abs());
        values.push(sum.re);
    }
    Ok(CDFCurve { u, kind, horizons: horizons.to_vec(), values, imag_residual })
}

/// Truncated series CDF at the root set's order.
pub fn wait_cdf(
    spec: &ModelSpec,
    roots: &RootSet,
    boundary: &BoundaryFunctions,
    u: f64,
    horizons: &[f64],
    kind: WaitKind,
) -> Result<CDFCurve> {
    let point = SeriesEvaluator::new(spec, roots, boundary).at(u)?;
    wait_cdf_from_point(&point, boundary, horizons, kind)
}

/// Reference CDF summing the oracle's level-and-phase law against the
/// conditional tails, levels `0..=L`.
pub fn oracle_wait_cdf(
    spec: &ModelSpec,
    dist: &PeriodicDistribution,
    u: f64,
    horizons: &[f64],
    kind: WaitKind,
) -> Result<CDFCurve> {
    check_horizons(horizons)?;
    let (k, m) = (spec.k(), spec.m());
    let levels = dist.levels_at(u);
    let atom: f64 = levels[0].iter().sum();
    // mass by threshold r = mj − s
    let mut by_threshold = vec![0.0; m * (levels.len() - 1) + 1];
    for (j, phases) in levels.iter().enumerate().skip(1) {
        for s in 0..m {
            let p: f64 = (0..k).map(|a| phases[a * m + s]).sum();
            by_threshold[m * j - s] += p;
        }
    }
    let extra = kind.extra(m);
    let values = horizons
        .iter()
        .map(|&t| {
            let mass = spec.mu().integral(u, u + t);
            let tail = |r: i64| poisson::upper_tail(r, mass);
            let body: f64 = by_threshold.iter().enumerate().skip(1).map(|(r, p)| p * tail(r as i64 + extra)).sum();
            body + atom * tail(extra)
        })
        .collect();
    Ok(CDFCurve { u, kind, horizons: horizons.to_vec(), values, imag_residual: 0.0 })
}
