//! Truncated-state reference solution of the periodic queue.
//!
//! The level-capped forward equations are integrated with fixed-step RK4,
//! period after period from a uniform start, until two consecutive periods
//! agree on the output grid. The final period is kept as the periodic
//! distribution; its level-0 and level-1 rows are the boundary functions used by
//! the series expansion.

use crate::chain::{Floor, Rk4, TruncatedChain};
use crate::error::{Error, Result};
use crate::interp::PeriodicInterpolant;
use crate::model::ModelSpec;

/// Knobs for [`integrate_periodic_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Level cap `L >= 2`.
    pub levels: usize,
    /// Output grid points per period.
    pub grid: usize,
    /// Sup-norm tolerance between consecutive periods.
    pub tol: f64,
    pub max_periods: usize,
    /// RK4 steps per grid interval.
    pub substeps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { levels: 50, grid: 512, tol: 1e-10, max_periods: 2000, substeps: 2 }
    }
}

/// Level-and-phase distribution over one period, sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct PeriodicDistribution {
    spec: ModelSpec,
    config: OracleConfig,
    /// `states[i]` is the full truncated state at `t = i / grid`.
    states: Vec<Vec<f64>>,
    residual: f64,
    periods: usize,
    mass_drift: f64,
}

impl PeriodicDistribution {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn levels(&self) -> usize {
        self.config.levels
    }

    pub fn grid_len(&self) -> usize {
        self.config.grid
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.config.grid as f64
    }

    /// Sup-norm change over the last period.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Largest `|Σp − 1|` seen at period boundaries.
    pub fn mass_drift(&self) -> f64 {
        self.mass_drift
    }

    fn chain(&self) -> TruncatedChain {
        TruncatedChain::new(&self.spec, self.config.levels, Floor::Reflecting)
    }

    /// Raw state vector at grid point `i`.
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i]
    }

    /// Level-`j` phase vector at grid point `i` (`k` entries for level 0,
    /// `km` otherwise), negatives clipped to zero.
    pub fn level(&self, i: usize, j: usize) -> Vec<f64> {
        level_of(&self.chain(), &self.states[i], j)
    }

    /// Total mass of level `j` at grid point `i`.
    pub fn level_mass(&self, i: usize, j: usize) -> f64 {
        self.level(i, j).iter().sum()
    }

    /// Full state at an arbitrary time, integrated forward from the last grid
    /// point at or before `u`.
    pub fn state_at(&self, u: f64) -> Vec<f64> {
        let g = self.config.grid;
        let u = u.rem_euclid(1.0);
        let scaled = u * g as f64;
        let mut i = scaled.floor() as usize;
        if i >= g {
            i = g - 1;
        }
        let frac = scaled - i as f64;
        let mut p = self.states[i].clone();
        if frac > 1e-12 {
            let chain = self.chain();
            let mut rk = Rk4::new(chain.len());
            let t0 = i as f64 / g as f64;
            rk.advance(&chain, &self.spec, t0, u, self.config.substeps.max(1), &mut p);
        }
        p
    }

    /// Level-`j` phase vector at time `u`.
    pub fn level_at(&self, u: f64, j: usize) -> Vec<f64> {
        level_of(&self.chain(), &self.state_at(u), j)
    }

    /// Phase vectors of levels `0..=L` at time `u`.
    pub fn levels_at(&self, u: f64) -> Vec<Vec<f64>> {
        let chain = self.chain();
        let p = self.state_at(u);
        (0..=chain.levels).map(|j| level_of(&chain, &p, j)).collect()
    }
}

fn level_of(chain: &TruncatedChain, p: &[f64], j: usize) -> Vec<f64> {
    let slice = if j == 0 {
        &p[..chain.k]
    } else if j <= chain.levels {
        let off = chain.offset(j);
        &p[off..off + chain.k * chain.m]
    } else {
        return vec![0.0; chain.k * chain.m];
    };
    slice.iter().map(|&x| x.max(0.0)).collect()
}

/// Integrates with the default configuration at the given level cap, grid,
/// tolerance and period budget.
pub fn integrate_periodic(
    spec: &ModelSpec,
    levels: usize,
    grid: usize,
    tol: f64,
    max_periods: usize,
) -> Result<PeriodicDistribution> {
    integrate_periodic_with(
        spec,
        &OracleConfig { levels, grid, tol, max_periods, ..OracleConfig::default() },
    )
}

pub fn integrate_periodic_with(spec: &ModelSpec, cfg: &OracleConfig) -> Result<PeriodicDistribution> {
    if cfg.levels < 2 {
        return Err(Error::Domain(format!("level cap must be at least 2, got {}", cfg.levels)));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Domain(format!("periodicity tolerance must be positive, got {}", cfg.tol)));
    }
    if cfg.grid == 0 || cfg.substeps == 0 {
        return Err(Error::Domain("grid size and substeps must be positive".into()));
    }
    let chain = TruncatedChain::new(spec, cfg.levels, Floor::Reflecting);
    let n = chain.len();
    let g = cfg.grid;
    let h = 1.0 / (g * cfg.substeps) as f64;

    let mut p = vec![1.0 / n as f64; n];
    let mut rk = Rk4::new(n);
    let mut prev: Vec<Vec<f64>> = vec![Vec::new(); g];
    let mut cur: Vec<Vec<f64>> = vec![vec![0.0; n]; g];
    let mut residual = f64::INFINITY;
    let mut mass_drift: f64 = 0.0;

    for period in 1..=cfg.max_periods {
        for (i, slot) in cur.iter_mut().enumerate() {
            slot.copy_from_slice(&p);
            for s in 0..cfg.substeps {
                let t = (i * cfg.substeps + s) as f64 * h;
                rk.step(&chain, spec, t, h, &mut p);
            }
        }
        mass_drift = mass_drift.max((p.iter().sum::<f64>() - 1.0).abs());
        if period > 1 {
            residual = cur
                .iter()
                .zip(&prev)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            if residual <= cfg.tol {
                return Ok(PeriodicDistribution {
                    spec: spec.clone(),
                    config: cfg.clone(),
                    states: cur,
                    residual,
                    periods: period,
                    mass_drift,
                });
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        if cur[0].len() != n {
            cur = vec![vec![0.0; n]; g];
        }
    }
    Err(Error::NotConverged { periods: cfg.max_periods, residual })
}

/// Level-0 and level-1 probabilities over one period with periodic interpolants.
#[derive(Debug, Clone)]
pub struct BoundaryFunctions {
    k: usize,
    m: usize,
    grid: usize,
    /// `p0[i][a]`
    p0: Vec<Vec<f64>>,
    /// `p1[i][a·m + s]`
    p1: Vec<Vec<f64>>,
    p0_interp: Vec<PeriodicInterpolant>,
    p1_interp: Vec<PeriodicInterpolant>,
}

impl BoundaryFunctions {
    /// Builds boundary functions from grid samples (`grid × k` and `grid × km`).
    pub fn from_grid(k: usize, m: usize, p0: Vec<Vec<f64>>, p1: Vec<Vec<f64>>) -> Result<Self> {
        let grid = p0.len();
        if grid == 0 || p1.len() != grid {
            return Err(Error::Domain("boundary grids must be non-empty and equally long".into()));
        }
        if p0.iter().any(|r| r.len() != k) || p1.iter().any(|r| r.len() != k * m) {
            return Err(Error::Domain("boundary grid rows have the wrong width".into()));
        }
        if p0.iter().chain(&p1).flatten().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("boundary probabilities must be nonnegative".into()));
        }
        let column = |rows: &Vec<Vec<f64>>, c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
        let p0_interp = (0..k).map(|a| PeriodicInterpolant::new(&column(&p0, a))).collect();
        let p1_interp = (0..k * m).map(|c| PeriodicInterpolant::new(&column(&p1, c))).collect();
        Ok(Self { k, m, grid, p0, p1, p0_interp, p1_interp })
    }

    /// Time-constant boundary functions.
    pub fn constant(k: usize, m: usize, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        Self::from_grid(k, m, vec![p0], vec![p1])
    }

    pub fn grid_len(&self) -> usize {
        self.grid
    }

    pub fn p0_grid(&self) -> &[Vec<f64>] {
        &self.p0
    }

    pub fn p1_grid(&self) -> &[Vec<f64>] {
        &self.p1
    }

    /// Interpolated `p_{0,a}(u)`.
    pub fn p0(&self, a: usize, u: f64) -> f64 {
        self.p0_interp[a].eval(u)
    }

    /// Interpolated `p_{1,a,s}(u)`.
    pub fn p1(&self, a: usize, s: usize, u: f64) -> f64 {
        self.p1_interp[a * self.m + s].eval(u)
    }

    /// `Σ_a p_{0,a}(u)`.
    pub fn p0_total(&self, u: f64) -> f64 {
        (0..self.k).map(|a| self.p0(a, u)).sum()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Copies the level-0 and level-1 rows of a converged periodic solution.
pub fn extract_boundary(dist: &PeriodicDistribution) -> Result<BoundaryFunctions> {
    let g = dist.grid_len();
    let p0 = (0..g).map(|i| dist.level(i, 0)).collect();
    let p1 = (0..g).map(|i| dist.level(i, 1)).collect();
    BoundaryFunctions::from_grid(dist.spec.k(), dist.spec.m(), p0, p1)
}
