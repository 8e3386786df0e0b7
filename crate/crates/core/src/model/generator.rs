use nalgebra::DMatrix;

use super::ModelSpec;

/// Generator blocks of the level-and-phase process at a fixed time.
///
/// Level 0 carries `k` arrival phases; every level `j >= 1` carries `km`
/// phases ordered `(a, s) ↦ a·m + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBlocks {
    /// `I_k ⊗ C_1(t)`: service completions, one level down.
    pub a_minus1: DMatrix<f64>,
    /// `D_0(t) ⊗ I_m + I_k ⊗ C_0(t)`.
    pub a0: DMatrix<f64>,
    /// `D_1(t) ⊗ I_m`: arrivals, one level up.
    pub a_plus1: DMatrix<f64>,
    /// Level-0 block `D_0(t)`.
    pub b: DMatrix<f64>,
    /// Level 0 → level 1 (`k × km`).
    pub q01: DMatrix<f64>,
    /// Level 1 → level 0 (`km × k`).
    pub q10: DMatrix<f64>,
}

/// Kronecker product.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Bidiagonal phase-advance block: `−r` on the diagonal, `r` above it.
pub(crate) fn advance_block(n: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -r
        } else if j == i + 1 {
            r
        } else {
            0.0
        }
    })
}

/// Wrap-around block: `r` in the bottom-left corner.
pub(crate) fn wrap_block(n: usize, r: f64) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    w[(n - 1, 0)] = r;
    w
}

pub fn generator_blocks(spec: &ModelSpec, t: f64) -> GeneratorBlocks {
    let (k, m) = (spec.k(), spec.m());
    let lam = spec.lambda().value(t);
    let mu = spec.mu().value(t);
    let d0 = advance_block(k, lam);
    let d1 = wrap_block(k, lam);
    let c0 = advance_block(m, mu);
    let c1 = wrap_block(m, mu);
    let ik = DMatrix::identity(k, k);
    let im = DMatrix::identity(m, m);

    let mut q01 = DMatrix::zeros(k, k * m);
    q01[(k - 1, 0)] = lam;
    let mut last = DMatrix::zeros(m, 1);
    last[(m - 1, 0)] = mu;

    GeneratorBlocks {
        a_minus1: kron(&ik, &c1),
        a0: kron(&d0, &im) + kron(&ik, &c0),
        a_plus1: kron(&d1, &im),
        b: d0,
        q01,
        q10: kron(&ik, &last),
    }
}
