use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Grid used to validate nonnegativity at construction.
const NONNEG_GRID: usize = 4096;

/// A period-1 rate curve given as a finite trigonometric polynomial
///
/// `r(t) = a0 + Σ c_j cos(2πjt) + Σ s_j sin(2πjt)`.
///
/// Means and cumulative integrals are exact closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    a0: f64,
    cos_coeffs: Vec<(u32, f64)>,
    sin_coeffs: Vec<(u32, f64)>,
}

impl RateFunction {
    pub fn new(a0: f64, cos_coeffs: Vec<(u32, f64)>, sin_coeffs: Vec<(u32, f64)>) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::InvalidModel(format!("rate mean {a0} is not finite")));
        }
        for &(j, c) in cos_coeffs.iter().chain(&sin_coeffs) {
            if j == 0 {
                return Err(Error::InvalidModel(
                    "harmonic index 0 is reserved for the mean level".into(),
                ));
            }
            if !c.is_finite() {
                return Err(Error::InvalidModel(format!("harmonic {j} amplitude is not finite")));
            }
        }
        let rate = Self { a0, cos_coeffs, sin_coeffs };
        for i in 0..NONNEG_GRID {
            let t = i as f64 / NONNEG_GRID as f64;
            let v = rate.value(t);
            if v < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "rate is negative ({v:.6}) at t = {t:.6}"
                )));
            }
        }
        Ok(rate)
    }

    pub fn constant(a0: f64) -> Result<Self> {
        Self::new(a0, vec![], vec![])
    }

    /// `a0 + amplitude·sin(2πt)`
    pub fn sinusoid(a0: f64, amplitude: f64) -> Result<Self> {
        Self::new(a0, vec![], vec![(1, amplitude)])
    }

    pub fn mean(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[(u32, f64)] {
        &self.cos_coeffs
    }

    pub fn sin_coeffs(&self) -> &[(u32, f64)] {
        &self.sin_coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.cos_coeffs.iter().chain(&self.sin_coeffs).all(|&(_, c)| c == 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let mut v = self.a0;
        for &(j, c) in &self.cos_coeffs {
            v += c * (2.0 * PI * j as f64 * t).cos();
        }
        for &(j, s) in &self.sin_coeffs {
            v += s * (2.0 * PI * j as f64 * t).sin();
        }
        v
    }

    /// Periodic part of the antiderivative (the linear `a0·t` term excluded).
    fn periodic_antiderivative(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let mut v = 0.0;
        for &(j, c) in &self.cos_coeffs {
            let w = 2.0 * PI * j as f64;
            v += c * (w * t).sin() / w;
        }
        for &(j, s) in &self.sin_coeffs {
            let w = 2.0 * PI * j as f64;
            v -= s * (w * t).cos() / w;
        }
        v
    }

    /// Exact `∫_u^t r(ν) dν`.
    pub fn cumulative(&self, u: f64, t: f64) -> Result<f64> {
        if u > t {
            return Err(Error::Domain(format!(
                "cumulative rate needs u <= t (got u = {u}, t = {t})"
            )));
        }
        Ok(self.integral(u, t))
    }

    /// Signed `∫_u^t r(ν) dν` without the ordering check.
    pub(crate) fn integral(&self, u: f64, t: f64) -> f64 {
        self.a0 * (t - u) + self.periodic_antiderivative(t) - self.periodic_antiderivative(u)
    }
}

/// Free-function form of [`RateFunction::value`].
pub fn rate_value(r: &RateFunction, t: f64) -> f64 {
    r.value(t)
}

/// Free-function form of [`RateFunction::cumulative`].
pub fn cumulative_rate(r: &RateFunction, u: f64, t: f64) -> Result<f64> {
    r.cumulative(u, t)
}
