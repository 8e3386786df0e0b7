//! Level-truncated forward equations `ṗ = p·Q(t)` and a fixed-step RK4 driver.

use crate::model::ModelSpec;

/// Behaviour of level 0 in the truncated chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Floor {
    /// Ordinary queue: arrival phases keep cycling while empty.
    Reflecting,
    /// Level 0 is absorbing (first passage to empty).
    Absorbing,
}

/// State layout: `k` level-0 entries, then levels `1..=levels` with `km` each.
/// Arrivals at the top level are blocked (rate folded into the diagonal).
#[derive(Debug, Clone)]
pub(crate) struct TruncatedChain {
    pub k: usize,
    pub m: usize,
    pub levels: usize,
    pub floor: Floor,
}

impl TruncatedChain {
    pub fn new(spec: &ModelSpec, levels: usize, floor: Floor) -> Self {
        Self { k: spec.k(), m: spec.m(), levels, floor }
    }

    pub fn len(&self) -> usize {
        self.k + self.levels * self.k * self.m
    }

    /// Offset of level `j >= 1`.
    pub fn offset(&self, j: usize) -> usize {
        debug_assert!(j >= 1);
        self.k + (j - 1) * self.k * self.m
    }

    /// `out = p·Q` with rates `lam`, `mu` frozen at the current time.
    pub fn apply(&self, lam: f64, mu: f64, p: &[f64], out: &mut [f64]) {
        let (k, m) = (self.k, self.m);
        let km = k * m;
        out.iter_mut().for_each(|x| *x = 0.0);

        if self.floor == Floor::Reflecting {
            for a in 0..k {
                let flow = lam * p[a];
                out[a] -= flow;
                if a + 1 < k {
                    out[a + 1] += flow;
                } else if self.levels >= 1 {
                    out[self.offset(1)] += flow;
                } else {
                    out[a] += flow;
                }
            }
        }

        for j in 1..=self.levels {
            let base = self.offset(j);
            for a in 0..k {
                for s in 0..m {
                    let idx = base + a * m + s;
                    let x = p[idx];
                    if x == 0.0 {
                        continue;
                    }
                    // arrival phase
                    if a + 1 < k {
                        let flow = lam * x;
                        out[idx] -= flow;
                        out[idx + m] += flow;
                    } else if j < self.levels {
                        let flow = lam * x;
                        out[idx] -= flow;
                        out[base + km + s] += flow;
                    }
                    // service phase
                    let flow = mu * x;
                    out[idx] -= flow;
                    if s + 1 < m {
                        out[idx + 1] += flow;
                    } else if j == 1 {
                        out[a] += flow;
                    } else {
                        out[base - km + a * m] += flow;
                    }
                }
            }
        }
    }
}

/// Classical RK4 over `[t, t+h]` with time-dependent rates.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    pub fn step(&mut self, chain: &TruncatedChain, spec: &ModelSpec, t: f64, h: f64, p: &mut [f64]) {
        let rates = |s: f64| (spec.lambda().value(s), spec.mu().value(s));
        let (l0, m0) = rates(t);
        let (lh, mh) = rates(t + 0.5 * h);
        let (l1, m1) = rates(t + h);

        chain.apply(l0, m0, p, &mut self.k1);
        for i in 0..p.len() {
            self.tmp[i] = p[i] + 0.5 * h * self.k1[i];
        }
        chain.apply(lh, mh, &self.tmp, &mut self.k2);
        for i in 0..p.len() {
            self.tmp[i] = p[i] + 0.5 * h * self.k2[i];
        }
        chain.apply(lh, mh, &self.tmp, &mut self.k3);
        for i in 0..p.len() {
            self.tmp[i] = p[i] + h * self.k3[i];
        }
        chain.apply(l1, m1, &self.tmp, &mut self.k4);
        for i in 0..p.len() {
            p[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// Integrates from `t0` to `t1` with `steps` equal steps.
    pub fn advance(
        &mut self,
        chain: &TruncatedChain,
        spec: &ModelSpec,
        t0: f64,
        t1: f64,
        steps: usize,
        p: &mut [f64],
    ) {
        let h = (t1 - t0) / steps as f64;
        for i in 0..steps {
            self.step(chain, spec, t0 + i as f64 * h, h, p);
        }
    }
}
