//! Queue instance, generator blocks and the spectral structure of `A(z,t)`.
//!
//! Phases are 0-based throughout: arrival phase `a ∈ 0..k`, service phase
//! `s ∈ 0..m`, flattened lexicographically as `a·m + s`.

mod eigen;
mod generator;
mod rate;

pub use eigen::{eigensystem, EigenPair, ZBranch};
pub use generator::{generator_blocks, kron, GeneratorBlocks};
pub use rate::{cumulative_rate, rate_value, RateFunction};

use crate::error::{Error, Result};

/// Arrival/service phase pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseIndex {
    pub a: usize,
    pub s: usize,
}

impl PhaseIndex {
    pub fn flatten(self, m: usize) -> usize {
        self.a * m + self.s
    }

    pub fn unflatten(idx: usize, m: usize) -> Self {
        Self { a: idx / m, s: idx % m }
    }
}

/// An `E_k/E_m/1` queue with periodic phase rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    k: usize,
    m: usize,
    lambda: RateFunction,
    mu: RateFunction,
}

/// Outcome of [`ergodic_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicCheck {
    pub ergodic: bool,
    /// `λ̄·m − μ̄·k`; negative exactly when the queue is ergodic.
    pub margin: f64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ModelSpec {
    pub fn new(k: usize, m: usize, lambda: RateFunction, mu: RateFunction) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidModel(format!(
                "phase counts must be at least 1 (k = {k}, m = {m})"
            )));
        }
        if gcd(k, m) != 1 {
            return Err(Error::InvalidModel(format!(
                "k and m must be coprime: gcd({k}, {m}) = {}",
                gcd(k, m)
            )));
        }
        Ok(Self { k, m, lambda, mu })
    }

    /// The `E_7/E_4/1` queue with `λ(t) = 3 − 2 sin 2πt` and `μ(t) = 5 + 4 sin 2πt`.
    pub fn e7_e4_example() -> Self {
        Self::new(
            7,
            4,
            RateFunction::sinusoid(3.0, -2.0).expect("valid rate"),
            RateFunction::sinusoid(5.0, 4.0).expect("valid rate"),
        )
        .expect("valid model")
    }

    /// M/M/1 with constant rates.
    pub fn mm1(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(1, 1, RateFunction::constant(lambda)?, RateFunction::constant(mu)?)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of phases per non-boundary level.
    pub fn km(&self) -> usize {
        self.k * self.m
    }

    pub fn lambda(&self) -> &RateFunction {
        &self.lambda
    }

    pub fn mu(&self) -> &RateFunction {
        &self.mu
    }

    pub fn lambda_bar(&self) -> f64 {
        self.lambda.mean()
    }

    pub fn mu_bar(&self) -> f64 {
        self.mu.mean()
    }

    pub(crate) fn require_ergodic(&self) -> Result<()> {
        let check = ergodic_check(self);
        if check.ergodic {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "queue is not ergodic: λ̄/k = {} >= μ̄/m = {}",
                self.lambda_bar() / self.k as f64,
                self.mu_bar() / self.m as f64
            )))
        }
    }
}

/// Ergodicity test `λ̄/k < μ̄/m`.
pub fn ergodic_check(spec: &ModelSpec) -> ErgodicCheck {
    let margin = spec.lambda_bar() * spec.m as f64 - spec.mu_bar() * spec.k as f64;
    ErgodicCheck { ergodic: margin < 0.0, margin }
}

/// CDF of the time from `u` until the next arrival, given a fresh arrival
/// cycle starts at `u`: `k` exponential phases at rate `λ(·)`.
pub fn interarrival_cdf(spec: &ModelSpec, u: f64, t: f64) -> Result<f64> {
    let mass = spec.lambda.cumulative(u, u + t)?;
    Ok(crate::poisson::upper_tail(spec.k as i64, mass))
}

/// CDF of a full service started at `u`: `m` phases at rate `μ(·)`.
pub fn interdeparture_cdf(spec: &ModelSpec, u: f64, t: f64) -> Result<f64> {
    let mass = spec.mu.cumulative(u, u + t)?;
    Ok(crate::poisson::upper_tail(spec.m as i64, mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(k: usize, m: usize, l: f64, mu: f64) -> ModelSpec {
        ModelSpec::new(k, m, RateFunction::constant(l).unwrap(), RateFunction::constant(mu).unwrap())
            .unwrap()
    }

    #[test]
    fn ergodicity_examples() {
        let c = ergodic_check(&ModelSpec::e7_e4_example());
        assert!(c.ergodic);
        assert!((c.margin - (3.0 * 4.0 - 5.0 * 7.0)).abs() < 1e-12);
        assert!(!ergodic_check(&constant(1, 1, 5.0, 5.0)).ergodic);
        assert!(!ergodic_check(&constant(2, 3, 3.0, 2.0)).ergodic);
    }

    #[test]
    fn coprimality_enforced() {
        let r = RateFunction::constant(1.0).unwrap();
        let err = ModelSpec::new(2, 4, r.clone(), r.clone()).unwrap_err();
        assert!(err.to_string().contains("coprime"));
        assert!(ModelSpec::new(0, 1, r.clone(), r).is_err());
    }

    #[test]
    fn erlang_interval_cdfs() {
        let spec = constant(2, 3, 4.0, 6.0);
        let t: f64 = 0.3;
        let (a, d) = (4.0 * t, 6.0 * t);
        let arrival = 1.0 - (-a).exp() * (1.0 + a);
        let departure = 1.0 - (-d).exp() * (1.0 + d + d * d / 2.0);
        assert!((interarrival_cdf(&spec, 0.7, t).unwrap() - arrival).abs() < 1e-15);
        assert!((interdeparture_cdf(&spec, 0.7, t).unwrap() - departure).abs() < 1e-15);
        assert_eq!(interdeparture_cdf(&spec, 0.2, 0.0).unwrap(), 0.0);
        assert!(interarrival_cdf(&spec, 0.2, -0.1).is_err());
    }

    #[test]
    fn phase_index_bijection() {
        let (k, m) = (7, 4);
        for idx in 0..k * m {
            let p = PhaseIndex::unflatten(idx, m);
            assert!(p.a < k && p.s < m);
            assert_eq!(p.flatten(m), idx);
        }
    }
}
