//! Trigonometric interpolation of 1-periodic samples on a uniform grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Trigonometric interpolant through `G` equally spaced samples of a real
/// 1-periodic function on `[0, 1)`.
#[derive(Debug, Clone)]
pub struct PeriodicInterpolant {
    len: usize,
    /// DFT coefficients `c_0 ..= c_{G/2}` scaled by `1/G`.
    coeffs: Vec<Complex64>,
}

impl PeriodicInterpolant {
    pub fn new(samples: &[f64]) -> Self {
        let len = samples.len();
        assert!(len > 0, "cannot interpolate an empty grid");
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let scale = 1.0 / len as f64;
        let coeffs = buf[..=len / 2].iter().map(|c| c * scale).collect();
        Self { len, coeffs }
    }

    pub fn grid_len(&self) -> usize {
        self.len
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        let step = Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = self.coeffs[0].re;
        let half = self.len / 2;
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            phase *= step;
            if self.len % 2 == 0 && j == half {
                // Nyquist term, real cosine keeps grid values exact
                acc += c.re * (PI * self.len as f64 * t).cos();
            } else {
                acc += 2.0 * (c * phase).re;
            }
        }
        acc
    }
}
