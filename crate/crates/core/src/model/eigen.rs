use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::ModelSpec;

/// A fixed branch of `z^{1/k}` and `z^{1/m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZBranch {
    pub z: Complex64,
    pub root_k: Complex64,
    pub root_m: Complex64,
}

impl ZBranch {
    /// Principal-branch roots of `z`.
    pub fn principal(z: Complex64, k: usize, m: usize) -> Self {
        Self {
            z,
            root_k: z.powf(1.0 / k as f64),
            root_m: z.powf(1.0 / m as f64),
        }
    }

    /// Branch induced by `y = z^{1/(km)}`: `z^{1/k} = y^m`, `z^{1/m} = y^k`.
    pub fn from_y(y: Complex64, k: usize, m: usize) -> Self {
        Self {
            z: y.powi((k * m) as i32),
            root_k: y.powi(m as i32),
            root_m: y.powi(k as i32),
        }
    }
}

/// One eigenpair of `A(z,t)` with its `(ℓ, j)` labels.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub arrival_branch: usize,
    pub service_branch: usize,
    pub value: Complex64,
    pub vector: DVector<Complex64>,
}

fn unit_root(n: usize, p: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * p as f64 / n as f64)
}

/// Eigenvalues `ξ_ℓ(z,t) + ε_j(z,t)` and eigenvectors `v_ℓ ⊗ u_j` of
/// `A(z,t) = (D_0 + zD_1) ⊕ (C_0 + z⁻¹C_1)`.
pub fn eigensystem(spec: &ModelSpec, branch: ZBranch, t: f64) -> Vec<EigenPair> {
    let (k, m) = (spec.k(), spec.m());
    let lam = spec.lambda().value(t);
    let mu = spec.mu().value(t);
    let norm = 1.0 / ((k * m) as f64).sqrt();
    let inv_root_m = branch.root_m.inv();

    let mut out = Vec::with_capacity(k * m);
    for l in 0..k {
        let xi = lam * (unit_root(k, l as i64) * branch.root_k - 1.0);
        // v_ℓ[a] = z^{(a+1-k)/k} ω_k^{aℓ}
        let v: Vec<Complex64> = (0..k)
            .map(|a| branch.root_k.powi(a as i32 + 1 - k as i32) * unit_root(k, (a * l) as i64))
            .collect();
        for j in 0..m {
            let eps = mu * (unit_root(m, j as i64) * inv_root_m - 1.0);
            // u_j[s] = z^{(m-1-s)/m} ω_m^{sj}
            let u: Vec<Complex64> = (0..m)
                .map(|s| branch.root_m.powi((m - 1 - s) as i32) * unit_root(m, (s * j) as i64))
                .collect();
            let vector = DVector::from_fn(k * m, |idx, _| v[idx / m] * u[idx % m] * norm);
            out.push(EigenPair {
                arrival_branch: l,
                service_branch: j,
                value: xi + eps,
                vector,
            });
        }
    }
    out
}
