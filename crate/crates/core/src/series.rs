//! The characteristic-root series for the periodic level probabilities.
//!
//! For every outside root `χ` the weight
//!
//! ```text
//! f(χ,t) = ∫_{t-1}^t f1(χ,u,t) f3(χ,u) / f2(χ) du
//! f1 = exp{∫_u^t λ(ν)(χ^{1/k} − 1) + μ(ν)(χ^{−1/m} − 1) dν}
//! f2 = mλ̄χ^{1/k} − kμ̄χ^{−1/m}
//! f3 = p_{0,k−1}(u) χ λ(u) − μ(u) Σ_a p_{1,a,m−1}(u) χ^{a/k}
//! ```
//!
//! multiplies `χ^{−j}` and the phase row `[χ^{−a/k}] ⊗ [χ^{s/m}]` to give
//! the level-`j` contribution. Summing `n ∈ [−q, q]` gives the order-`q`
//! estimate. The `u`-exponent uses closed-form cumulative rates.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::oracle::BoundaryFunctions;
use crate::poisson;
use crate::quadrature::CompositeRule;
use crate::roots::{CharacteristicRoot, RootSet};

/// Composite Gauss–Legendre layout for the `u`-integral over `[t−1, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub panels: usize,
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels: 64, order: 8 }
    }
}

impl QuadratureSpec {
    pub fn nodes(&self) -> usize {
        self.panels * self.order
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self { panels: self.panels * factor, order: self.order }
    }
}

/// Everything about the integrand that does not depend on the root.
#[derive(Debug, Clone)]
struct NodeData {
    weights: Vec<f64>,
    lam_cum: Vec<f64>,
    mu_cum: Vec<f64>,
    lam_u: Vec<f64>,
    mu_u: Vec<f64>,
    /// `p_{0,k−1}(u)`
    p0_last: Vec<f64>,
    /// `p_{1,a,m−1}(u)` for `a = 0..k`, node-major.
    p1_last: Vec<Vec<f64>>,
}

impl NodeData {
    fn new(spec: &ModelSpec, boundary: &BoundaryFunctions, t: f64, quad: QuadratureSpec) -> Self {
        let (k, m) = (spec.k(), spec.m());
        let rule = CompositeRule::new(t - 1.0, t, quad.panels, quad.order);
        let pts = &rule.points;
        Self {
            lam_cum: pts.iter().map(|&u| spec.lambda().integral(u, t)).collect(),
            mu_cum: pts.iter().map(|&u| spec.mu().integral(u, t)).collect(),
            lam_u: pts.iter().map(|&u| spec.lambda().value(u)).collect(),
            mu_u: pts.iter().map(|&u| spec.mu().value(u)).collect(),
            p0_last: pts.iter().map(|&u| boundary.p0(k - 1, u)).collect(),
            p1_last: pts.iter().map(|&u| (0..k).map(|a| boundary.p1(a, m - 1, u)).collect()).collect(),
            weights: rule.weights,
        }
    }

    fn f(&self, spec: &ModelSpec, root: &CharacteristicRoot) -> Result<Complex64> {
        let (k, m) = (spec.k() as i64, spec.m() as i64);
        let chi_k = root.pow_k(1);
        let chi_m_inv = root.pow_m(-1);
        let f2 = m as f64 * spec.lambda_bar() * chi_k - k as f64 * spec.mu_bar() * chi_m_inv;
        if f2.norm() < 1e-12 {
            return Err(Error::Singular(format!(
                "|mλ̄χ^(1/k) − kμ̄χ^(−1/m)| = {:.3e} at n = {}, branch {}",
                f2.norm(),
                root.n,
                root.branch
            )));
        }
        let powers: Vec<Complex64> = (0..k).map(|a| root.pow_k(a)).collect();
        let arr = chi_k - 1.0;
        let srv = chi_m_inv - 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.weights.len() {
            let f1 = (arr * self.lam_cum[i] + srv * self.mu_cum[i]).exp();
            let mut busy = Complex64::new(0.0, 0.0);
            for (p, w) in self.p1_last[i].iter().zip(&powers) {
                busy += w * *p;
            }
            let f3 = root.chi * (self.p0_last[i] * self.lam_u[i]) - busy * self.mu_u[i];
            acc += f1 * f3 * self.weights[i];
        }
        Ok(acc / f2)
    }
}

/// Quadrature value of `f(χ, t)` for one root.
pub fn f_of_root(
    root: &CharacteristicRoot,
    t: f64,
    boundary: &BoundaryFunctions,
    spec: &ModelSpec,
    quad: QuadratureSpec,
) -> Result<Complex64> {
    NodeData::new(spec, boundary, t, quad).f(spec, root)
}

/// Phase row `[χ^{−a/k}]_a ⊗ [χ^{s/m}]_s`, entry `a·m + s` equal to `y^{sk − am}`.
pub fn phase_row(root: &CharacteristicRoot, spec: &ModelSpec) -> Vec<Complex64> {
    let (k, m) = (spec.k() as i64, spec.m() as i64);
    let mut row = Vec::with_capacity((k * m) as usize);
    for a in 0..k {
        for s in 0..m {
            row.push(root.y_pow(s * k - a * m));
        }
    }
    row
}

/// Order-`q` estimate of the level-`j` phase vector at time `t`.
#[derive(Debug, Clone)]
pub struct LevelEstimate {
    pub level: usize,
    pub t: f64,
    pub order: usize,
    pub complex: Vec<Complex64>,
    /// Real parts of [`Self::complex`].
    pub values: Vec<f64>,
    /// `max |Im|` over phases.
    pub imag_residual: f64,
}

impl LevelEstimate {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Root weights `f(χ, t)` for one time point.
#[derive(Debug, Clone)]
pub struct SeriesPoint {
    pub t: f64,
    spec: ModelSpec,
    order: usize,
    terms: Vec<(CharacteristicRoot, Complex64)>,
}

impl SeriesPoint {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// `(root, f(root, t))` in `(n, branch)` order.
    pub fn terms(&self) -> &[(CharacteristicRoot, Complex64)] {
        &self.terms
    }

    /// Restriction to `|n| <= q`.
    pub fn truncated(&self, q: usize) -> SeriesPoint {
        SeriesPoint {
            t: self.t,
            spec: self.spec.clone(),
            order: q.min(self.order),
            terms: self.terms.iter().filter(|(r, _)| r.n.unsigned_abs() as usize <= q).copied().collect(),
        }
    }

    /// Level-`j` phase vector, `j >= 1`.
    pub fn level(&self, j: usize) -> Result<LevelEstimate> {
        if j == 0 {
            return Err(Error::Domain("the root series covers levels j >= 1; level 0 comes from the boundary".into()));
        }
        let km = self.spec.km();
        let mut sum = vec![Complex64::new(0.0, 0.0); km];
        let shift = -((j * km) as i64);
        for (root, f) in &self.terms {
            let scale = f * root.y_pow(shift);
            for (acc, r) in sum.iter_mut().zip(phase_row(root, &self.spec)) {
                *acc += scale * r;
            }
        }
        let values = sum.iter().map(|c| c.re).collect();
        let imag_residual = sum.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        Ok(LevelEstimate { level: j, t: self.t, order: self.order, complex: sum, values, imag_residual })
    }
}

/// Bundles the inputs of the series so many `(t, j)` can be evaluated.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator<'a> {
    pub spec: &'a ModelSpec,
    pub roots: &'a RootSet,
    pub boundary: &'a BoundaryFunctions,
    pub quad: QuadratureSpec,
}

impl<'a> SeriesEvaluator<'a> {
    pub fn new(spec: &'a ModelSpec, roots: &'a RootSet, boundary: &'a BoundaryFunctions) -> Self {
        Self { spec, roots, boundary, quad: QuadratureSpec::default() }
    }

    pub fn with_quadrature(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn at(&self, t: f64) -> Result<SeriesPoint> {
        let nodes = NodeData::new(self.spec, self.boundary, t, self.quad);
        let terms = self
            .roots
            .roots()
            .par_iter()
            .map(|r| nodes.f(self.spec, r).map(|f| (*r, f)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesPoint { t, spec: self.spec.clone(), order: self.roots.order(), terms })
    }
}

/// Order-`q` estimate `p_j^{(q)}(t)`, `q` being the root set's order.
pub fn level_probabilities(
    spec: &ModelSpec,
    roots: &RootSet,
    boundary: &BoundaryFunctions,
    j: usize,
    t: f64,
) -> Result<LevelEstimate> {
    SeriesEvaluator::new(spec, roots, boundary).at(t)?.level(j)
}

/// Poisson point masses for the arrival- and service-phase counts over `[u, t]`.
///
/// Coefficient extraction of the unbounded process' evolution operator: the
/// `((a1,s1),(a2,s2))` entry of `[z^n]Φ(z,u,t)` is
/// `Σ_ℓ P{N_μ = ℓm + s} P{N_λ = (n+ℓ)k + a}` with signed phase differences
/// `a = a2 − a1`, `s = s2 − s1`.
#[derive(Debug, Clone)]
pub struct PhiCoefficients {
    k: usize,
    m: usize,
    arrivals: Vec<f64>,
    services: Vec<f64>,
}

impl PhiCoefficients {
    pub fn new(spec: &ModelSpec, u: f64, t: f64) -> Result<Self> {
        if u > t {
            return Err(Error::Domain(format!("Φ(z,u,t) needs u <= t (got u = {u}, t = {t})")));
        }
        Ok(Self::from_means(spec.k(), spec.m(), spec.lambda().integral(u, t), spec.mu().integral(u, t)))
    }

    pub fn from_means(k: usize, m: usize, lambda_mass: f64, mu_mass: f64) -> Self {
        Self { k, m, arrivals: poisson::pmfs(lambda_mass), services: poisson::pmfs(mu_mass) }
    }

    /// Entry for signed phase differences `a = a2 − a1`, `s = s2 − s1`.
    pub fn by_difference(&self, n: i64, a: i64, s: i64) -> f64 {
        let (k, m) = (self.k as i64, self.m as i64);
        // smallest ℓ with ℓm + s >= 0 and (n+ℓ)k + a >= 0
        let lo_s = (-s).div_euclid(m) + i64::from((-s).rem_euclid(m) != 0);
        let lo_a = (-a).div_euclid(k) + i64::from((-a).rem_euclid(k) != 0) - n;
        let mut l = lo_s.max(lo_a);
        let mut acc = 0.0;
        loop {
            let is = l * m + s;
            let ia = (n + l) * k + a;
            if is as usize >= self.services.len() || ia as usize >= self.arrivals.len() {
                break;
            }
            acc += self.services[is as usize] * self.arrivals[ia as usize];
            l += 1;
        }
        acc
    }

    pub fn entry(&self, n: i64, a1: usize, s1: usize, a2: usize, s2: usize) -> f64 {
        self.by_difference(n, a2 as i64 - a1 as i64, s2 as i64 - s1 as i64)
    }

    /// Entries for every `(a, s)` difference, offset by `(k−1, m−1)`, row-major.
    pub(crate) fn difference_table(&self, n: i64) -> Vec<f64> {
        let (k, m) = (self.k, self.m);
        let mut diff = vec![0.0; (2 * k - 1) * (2 * m - 1)];
        for da in 0..2 * k - 1 {
            for ds in 0..2 * m - 1 {
                diff[da * (2 * m - 1) + ds] =
                    self.by_difference(n, da as i64 - (k as i64 - 1), ds as i64 - (m as i64 - 1));
            }
        }
        diff
    }

    /// `[z^n]Φ` as a `km × km` matrix.
    pub fn matrix(&self, n: i64) -> DMatrix<f64> {
        let (k, m) = (self.k, self.m);
        let diff = self.difference_table(n);
        DMatrix::from_fn(k * m, k * m, |r, c| {
            let (a1, s1, a2, s2) = (r / m, r % m, c / m, c % m);
            let da = a2 + k - 1 - a1;
            let ds = s2 + m - 1 - s1;
            diff[da * (2 * m - 1) + ds]
        })
    }

    /// Range of `n` carrying nonzero mass.
    pub fn support(&self) -> (i64, i64) {
        let max_up = (self.arrivals.len() / self.k) as i64 + 1;
        let max_down = (self.services.len() / self.m) as i64 + 1;
        (-max_down, max_up)
    }
}

/// Probability of net level change `n` over `[u, t]` with the given phases.
pub fn phi_coefficient(
    spec: &ModelSpec,
    u: f64,
    t: f64,
    n: i64,
    a1: usize,
    s1: usize,
    a2: usize,
    s2: usize,
) -> Result<f64> {
    Ok(PhiCoefficients::new(spec, u, t)?.entry(n, a1, s1, a2, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::build_root_set;

    #[test]
    fn phase_row_examples() {
        let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
        let r = CharacteristicRoot::new(0, 0, Complex64::new(1.7, 0.2), 1, 1);
        assert_eq!(phase_row(&r, &spec), vec![Complex64::new(1.0, 0.0)]);

        let spec23 = ModelSpec::new(
            2,
            3,
            crate::RateFunction::constant(1.0).unwrap(),
            crate::RateFunction::constant(4.0).unwrap(),
        )
        .unwrap();
        let r = CharacteristicRoot::new(0, 0, Complex64::new(2.0, 0.0), 2, 3);
        let row = phase_row(&r, &spec23);
        assert!((row[3 + 2] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn phase_row_bounded_by_chi() {
        let spec = ModelSpec::e7_e4_example();
        let set = build_root_set(&spec, 6).unwrap();
        for r in set.roots() {
            let max = phase_row(r, &spec).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(max <= r.chi.norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mm1_constant_series() {
        let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
        let roots = build_root_set(&spec, 0).unwrap();
        let b = BoundaryFunctions::constant(1, 1, vec![0.4], vec![0.24]).unwrap();
        let f = f_of_root(&roots.roots()[0], 0.3, &b, &spec, QuadratureSpec::default()).unwrap();
        assert!((f - 0.4).norm() < 1e-12);
        for j in 1..=20 {
            let est = level_probabilities(&spec, &roots, &b, j, 0.3).unwrap();
            assert!((est.values[0] - 0.4 * 0.6f64.powi(j as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn level_zero_rejected() {
        let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
        let roots = build_root_set(&spec, 0).unwrap();
        let b = BoundaryFunctions::constant(1, 1, vec![0.4], vec![0.24]).unwrap();
        assert!(level_probabilities(&spec, &roots, &b, 0, 0.0).is_err());
    }

    #[test]
    fn phi_identity_at_equal_times() {
        let spec = ModelSpec::e7_e4_example();
        let phi = PhiCoefficients::new(&spec, 0.4, 0.4).unwrap();
        let i = phi.matrix(0);
        assert_eq!(i, DMatrix::identity(28, 28));
        assert!(phi.matrix(1).iter().all(|&x| x == 0.0));
        assert!(phi.matrix(-1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn phi_rows_are_stochastic() {
        let spec = ModelSpec::e7_e4_example();
        let phi = PhiCoefficients::new(&spec, 0.15, 1.9).unwrap();
        let (lo, hi) = phi.support();
        let mut total = DMatrix::<f64>::zeros(28, 28);
        for n in lo..=hi {
            total += phi.matrix(n);
        }
        for r in 0..28 {
            assert!((total.row(r).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_rejects_reversed_times() {
        let spec = ModelSpec::e7_e4_example();
        assert!(phi_coefficient(&spec, 0.5, 0.2, 0, 0, 0, 0, 0).is_err());
    }
}
