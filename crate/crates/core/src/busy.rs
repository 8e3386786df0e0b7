//! Busy-period distribution as the solution of a second-kind Volterra equation.
//!
//! Starting from level `j` in phase `(a, s)` at time `u`, the absorbed mass
//! `x(t) = Q_0^{(j)}(t)` satisfies
//!
//! ```text
//! x(t) = e_q [z^{-j}]Φ(u,t) − ∫_u^t x(ν) (A_{-1}(ν)[z^1]Φ(ν,t) + A_0(ν)[z^0]Φ(ν,t) + A_1(ν)[z^{-1}]Φ(ν,t)) dν
//! ```
//!
//! where `Φ` is the evolution operator of the process without a floor and `x`
//! is reported per arrival phase.

use nalgebra::{DMatrix, DVector};

use crate::chain::{Floor, Rk4, TruncatedChain};
use crate::error::{Error, Result};
use crate::model::{generator_blocks, GeneratorBlocks, ModelSpec, PhaseIndex};
use crate::series::PhiCoefficients;

/// `[z^n]Φ(z,u,t)` as a `km × km` matrix.
pub fn phi_coeff_matrix(spec: &ModelSpec, u: f64, t: f64, n: i64) -> Result<DMatrix<f64>> {
    Ok(PhiCoefficients::new(spec, u, t)?.matrix(n))
}

/// Absorbed mass `Q_0^{(j)}` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub u: f64,
    pub j: usize,
    pub start: PhaseIndex,
    pub step: f64,
    /// Elapsed times `0, h, 2h, …`.
    pub times: Vec<f64>,
    /// One row of `k` arrival-phase entries per time.
    pub values: Vec<Vec<f64>>,
}

impl VolterraSolution {
    /// `P{τ_j <= t}` per grid point.
    pub fn totals(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    /// Sup-norm distance over entries at the shared grid points of two solutions.
    pub fn sup_distance(&self, other: &VolterraSolution) -> Result<f64> {
        let ratio = self.step / other.step;
        let (fine, coarse, stride) = if ratio >= 1.0 {
            (other, self, ratio.round() as usize)
        } else {
            (self, other, (1.0 / ratio).round() as usize)
        };
        if (coarse.step - fine.step * stride as f64).abs() > 1e-9 * coarse.step {
            return Err(Error::Domain("grids are not nested".into()));
        }
        let mut worst: f64 = 0.0;
        for (i, row) in coarse.values.iter().enumerate() {
            let Some(other_row) = fine.values.get(i * stride) else { break };
            for (a, b) in row.iter().zip(other_row) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

fn grid_len(t_max: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && t_max > 0.0) {
        return Err(Error::Domain("horizon and step must be positive".into()));
    }
    let steps = (t_max / h).round();
    if (steps * h - t_max).abs() > 1e-9 * t_max.max(1.0) {
        return Err(Error::Domain(format!("step {h} does not divide the horizon {t_max}")));
    }
    Ok(steps as usize)
}

fn check_start(spec: &ModelSpec, j: usize, start: PhaseIndex) -> Result<()> {
    if j < 1 {
        return Err(Error::Domain("a busy period starts from level j >= 1".into()));
    }
    if start.a >= spec.k() || start.s >= spec.m() {
        return Err(Error::Domain(format!("start phase ({}, {}) out of range", start.a, start.s)));
    }
    Ok(())
}

/// Sparse `x·A` restricted to the rows `(a, 0)` where `x` lives, scaled by `weight`.
fn sparse_product(x: &[f64], a: &DMatrix<f64>, m: usize, weight: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for c in 0..a.ncols() {
        let v: f64 = x.iter().enumerate().map(|(a1, xv)| xv * a[(a1 * m, c)]).sum();
        if v != 0.0 {
            out.push((c / m, c % m, v * weight));
        }
    }
    out
}

/// Per shift `n = 1, 0, −1`: sparse `x(ν)·A_n(ν)` at one quadrature node.
type NodeTerms = [Vec<(usize, usize, f64)>; 3];
const SHIFTS: [i64; 3] = [1, 0, -1];

/// `out[a2] += Σ v · [z^n]Φ((a1,s1) → (a2,0))` over the sparse terms.
fn accumulate(phi: &PhiCoefficients, terms: &NodeTerms, k: usize, out: &mut [f64]) {
    for (shift, entries) in SHIFTS.iter().zip(terms) {
        let Some(s_max) = entries.iter().map(|e| e.1).max() else { continue };
        // table over (a2 − a1, s1) for the service phases in use
        let w = s_max + 1;
        let mut table = vec![0.0; (2 * k - 1) * w];
        for da in 0..2 * k - 1 {
            for s1 in 0..w {
                table[da * w + s1] = phi.by_difference(*shift, da as i64 - (k as i64 - 1), -(s1 as i64));
            }
        }
        for &(a1, s1, v) in entries {
            for (a2, o) in out.iter_mut().enumerate() {
                *o += v * table[(a2 + k - 1 - a1) * w + s1];
            }
        }
    }
}

/// Two-point Gauss–Legendre offsets within a panel, as fractions of `h`.
const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Product-trapezoidal solution of the busy-period Volterra equation on
/// `u, u+h, …, u+t_max`.
///
/// `x` is taken piecewise linear between grid points and the kernel is
/// integrated against each linear piece by two-point Gauss–Legendre, so the
/// discretization error is governed by the curvature of `x` alone. Steps with
/// `h·(λ + μ)` much above 0.2 under-resolve the initial layer and can leave
/// small non-monotone wiggles. Absorption
/// enters through `A_{-1}`, which lands on service phase 0; restricted to the
/// `k` components `(a, 0)` the equation closes on itself, and it is solved there.
pub fn busy_period_cdf(
    spec: &ModelSpec,
    j: usize,
    start: PhaseIndex,
    u: f64,
    t_max: f64,
    h: f64,
) -> Result<VolterraSolution> {
    check_start(spec, j, start)?;
    let steps = grid_len(t_max, h)?;
    let (k, m) = (spec.k(), spec.m());
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    let cum = |t: f64| (spec.lambda().integral(u, u + t), spec.mu().integral(u, u + t));
    let grid_cum: Vec<(f64, f64)> = times.iter().map(|&t| cum(t)).collect();
    // nodes of panel p sit at t_p + GAUSS[g]·h
    let node_cum: Vec<[(f64, f64); 2]> =
        (0..steps).map(|p| GAUSS.map(|g| cum(times[p] + g * h))).collect();
    let node_blocks: Vec<[GeneratorBlocks; 2]> =
        (0..steps).map(|p| GAUSS.map(|g| generator_blocks(spec, u + times[p] + g * h))).collect();

    let node_terms = |x: &[f64], blocks: &GeneratorBlocks, weight: f64| -> NodeTerms {
        [
            sparse_product(x, &blocks.a_minus1, m, weight),
            sparse_product(x, &blocks.a0, m, weight),
            sparse_product(x, &blocks.a_plus1, m, weight),
        ]
    };

    // weighted node terms of every closed panel
    let mut closed: Vec<[NodeTerms; 2]> = Vec::with_capacity(steps);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    values.push(vec![0.0; k]); // [z^{-j}]Φ(u,u) = 0 for j >= 1

    for n in 1..=steps {
        let (lam_n, mu_n) = grid_cum[n];
        let phi_at = |(lam, mu): (f64, f64)| PhiCoefficients::from_means(k, m, lam_n - lam, mu_n - mu);

        let forcing = phi_at(grid_cum[0]);
        let mut rhs: Vec<f64> = (0..k)
            .map(|a2| forcing.by_difference(-(j as i64), a2 as i64 - start.a as i64, -(start.s as i64)))
            .collect();

        let mut memory = vec![0.0; k];
        for (p, panel) in closed.iter().enumerate() {
            for g in 0..2 {
                accumulate(&phi_at(node_cum[p][g]), &panel[g], k, &mut memory);
            }
        }

        // open panel: the x_{n-1} part is known, the x_n part goes to the left side
        let prev = &values[n - 1];
        let mut lhs = DMatrix::<f64>::identity(k, k);
        for g in 0..2 {
            let phi = phi_at(node_cum[n - 1][g]);
            let blocks = &node_blocks[n - 1][g];
            let theta = GAUSS[g];
            let w = 0.5 * h;
            accumulate(&phi, &node_terms(prev, blocks, w * (1.0 - theta)), k, &mut memory);
            for a in 0..k {
                let mut unit = vec![0.0; k];
                unit[a] = 1.0;
                let mut row = vec![0.0; k];
                accumulate(&phi, &node_terms(&unit, blocks, w * theta), k, &mut row);
                for (c, r) in row.iter().enumerate() {
                    lhs[(a, c)] += r;
                }
            }
        }
        for (r, mem) in rhs.iter_mut().zip(&memory) {
            *r -= mem;
        }

        // x_n · lhs = rhs
        let x: Vec<f64> = lhs
            .transpose()
            .lu()
            .solve(&DVector::from_vec(rhs))
            .ok_or_else(|| Error::Singular(format!("step matrix singular at t = {}", times[n])))?
            .iter()
            .copied()
            .collect();

        let total: f64 = x.iter().sum();
        if !(-0.01..=1.01).contains(&total) || x.iter().any(|v| !(-0.01..=1.01).contains(v)) {
            return Err(Error::Unstable(format!(
                "busy-period CDF left [0, 1] (total {total:.4}) at t = {}; reduce the step h = {h}",
                times[n]
            )));
        }

        let panel = [0, 1].map(|g| {
            let theta = GAUSS[g];
            let xg: Vec<f64> = prev.iter().zip(&x).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
            node_terms(&xg, &node_blocks[n - 1][g], 0.5 * h)
        });
        closed.push(panel);
        values.push(x);
    }
    Ok(VolterraSolution { u, j, start, step: h, times, values })
}

/// Level cap and RK4 step for [`busy_oracle_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyOracleConfig {
    pub levels: usize,
    /// Upper bound on the internal RK4 step.
    pub max_step: f64,
    /// Largest mass tolerated at the top level.
    pub overflow_tol: f64,
}

impl Default for BusyOracleConfig {
    fn default() -> Self {
        Self { levels: 60, max_step: 1e-3, overflow_tol: 1e-10 }
    }
}

/// First-passage law from integrating the chain with an absorbing floor,
/// sampled on the same grid as [`busy_period_cdf`].
pub fn busy_oracle(
    spec: &ModelSpec,
    j: usize,
    start: PhaseIndex,
    u: f64,
    t_max: f64,
    h: f64,
) -> Result<VolterraSolution> {
    busy_oracle_with(spec, j, start, u, t_max, h, BusyOracleConfig::default())
}

pub fn busy_oracle_with(
    spec: &ModelSpec,
    j: usize,
    start: PhaseIndex,
    u: f64,
    t_max: f64,
    h: f64,
    cfg: BusyOracleConfig,
) -> Result<VolterraSolution> {
    check_start(spec, j, start)?;
    let steps = grid_len(t_max, h)?;
    if j >= cfg.levels {
        return Err(Error::Truncation(format!("start level {j} is at or above the level cap {}", cfg.levels)));
    }
    let (k, m) = (spec.k(), spec.m());
    let chain = TruncatedChain::new(spec, cfg.levels, Floor::Absorbing);
    let top = chain.offset(cfg.levels);
    let mut p = vec![0.0; chain.len()];
    p[chain.offset(j) + start.flatten(m)] = 1.0;
    let mut rk = Rk4::new(chain.len());
    let sub = (h / cfg.max_step).ceil().max(1.0) as usize;

    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(p[..k].to_vec());
    for n in 1..=steps {
        rk.advance(&chain, spec, u + times[n - 1], u + times[n], sub, &mut p);
        let overflow: f64 = p[top..].iter().sum();
        if overflow > cfg.overflow_tol {
            return Err(Error::Truncation(format!(
                "mass {overflow:.2e} reached the level cap {} by t = {}; raise the cap",
                cfg.levels, times[n]
            )));
        }
        values.push(p[..k].to_vec());
    }
    Ok(VolterraSolution { u, j, start, step: h, times, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_matrix_identity_and_rows() {
        let spec = ModelSpec::e7_e4_example();
        assert_eq!(phi_coeff_matrix(&spec, 0.3, 0.3, 0).unwrap(), DMatrix::identity(28, 28));
        let phi = PhiCoefficients::new(&spec, 0.1, 0.8).unwrap();
        let (lo, hi) = phi.support();
        let total: DMatrix<f64> = (lo..=hi).map(|n| phi.matrix(n)).fold(DMatrix::zeros(28, 28), |a, b| a + b);
        for r in 0..28 {
            assert!((total.row(r).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mm1_volterra_matches_absorbing_chain() {
        let spec = ModelSpec::mm1(3.0, 5.0).unwrap();
        let start = PhaseIndex { a: 0, s: 0 };
        let v = busy_period_cdf(&spec, 1, start, 0.0, 1.0, 0.005).unwrap();
        let o = busy_oracle(&spec, 1, start, 0.0, 1.0, 0.005).unwrap();
        assert!(v.sup_distance(&o).unwrap() < 1e-4);
        let totals = o.totals();
        assert!(totals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = ModelSpec::e7_e4_example();
        let start = PhaseIndex { a: 0, s: 0 };
        assert!(busy_period_cdf(&spec, 0, start, 0.0, 1.0, 0.1).is_err());
        assert!(busy_period_cdf(&spec, 1, PhaseIndex { a: 7, s: 0 }, 0.0, 1.0, 0.1).is_err());
        assert!(busy_period_cdf(&spec, 1, start, 0.0, 1.0, 0.3).is_err());
        assert!(busy_oracle(&spec, 1, start, 0.0, 1.0, 0.3).is_err());
    }
}
