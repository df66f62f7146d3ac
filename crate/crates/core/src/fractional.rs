//! Discrete Caputo derivative (L1 scheme) and Riemann-Liouville integral on
//! uniform time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Uniform partition of `[0, T]` into `Nt` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!("time horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(Error::Domain(format!("need at least 2 time steps, got {steps}")));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `Nt + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            self.horizon * k as f64 / self.steps as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// The grid with every step split in `factor` equal parts.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            horizon: self.horizon,
            steps: self.steps * factor.max(1),
        }
    }

    pub(crate) fn check_samples(&self, what: &str, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Contract(format!(
                "{what}: expected {} samples on the time grid, got {len}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// L1 weights `b_j = ((j+1)^{1-α} - j^{1-α}) / Γ(2-α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    pub alpha: f64,
    pub b: Vec<f64>,
}

pub(crate) fn check_fractional_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

pub fn l1_weights(alpha: f64, n: usize) -> Result<L1Weights> {
    check_fractional_order(alpha)?;
    if n == 0 {
        return Err(Error::Domain("l1_weights needs n >= 1".into()));
    }
    let scale = 1.0 / gamma(2.0 - alpha)?;
    let p = 1.0 - alpha;
    let b = (0..n)
        .map(|j| {
            let j = j as f64;
            ((j + 1.0).powf(p) - j.powf(p)) * scale
        })
        .collect();
    Ok(L1Weights { alpha, b })
}

/// L1 approximation of the Caputo derivative at every node. The value at
/// `t_0` is zero by convention.
pub fn caputo_l1(samples: &[f64], alpha: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.check_samples("caputo_l1", samples.len())?;
    let n = grid.steps();
    let w = l1_weights(alpha, n)?;
    let scale = grid.tau().powf(-alpha);
    let mut out = vec![0.0; n + 1];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        // Σ_{j=0}^{k-1} b_j (u_{k-j} - u_{k-j-1})
        let acc: f64 = (0..k)
            .map(|j| w.b[j] * (samples[k - j] - samples[k - j - 1]))
            .sum();
        *slot = scale * acc;
    }
    Ok(out)
}

/// Weights of the product-trapezoid rule for `I^α` on a uniform grid.
///
/// `I^α f(t_k) ≈ τ^α/Γ(α+2) · [start_k f_0 + Σ_{j=1}^{k} interior_{k-j} f_j]`
pub(crate) struct RlWeights {
    pub scale: f64,
    /// `start[k]` multiplies `f_0` at node `k` (index 0 unused)
    pub start: Vec<f64>,
    /// `interior[m]` multiplies `f_{k-m}`; `interior[0] = 1`
    pub interior: Vec<f64>,
}

impl RlWeights {
    pub fn new(alpha: f64, grid: &TimeGrid) -> Result<Self> {
        check_fractional_order(alpha)?;
        let n = grid.steps();
        let ap1 = alpha + 1.0;
        let pw = |m: usize| (m as f64).powf(ap1);
        let mut start = vec![0.0; n + 1];
        for (k, s) in start.iter_mut().enumerate().skip(1) {
            let kf = k as f64;
            *s = pw(k - 1) - (kf - alpha - 1.0) * kf.powf(alpha);
        }
        let mut interior = vec![1.0; n + 1];
        for (m, c) in interior.iter_mut().enumerate().skip(1) {
            *c = pw(m + 1) - 2.0 * pw(m) + pw(m - 1);
        }
        Ok(Self {
            scale: grid.tau().powf(alpha) / gamma(alpha + 2.0)?,
            start,
            interior,
        })
    }

    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        let n = samples.len() - 1;
        let mut out = vec![0.0; n + 1];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let mut acc = self.start[k] * samples[0];
            for j in 1..=k {
                acc += self.interior[k - j] * samples[j];
            }
            *slot = self.scale * acc;
        }
        out
    }
}

/// Riemann-Liouville integral `I^α` at every node, integrating the kernel
/// `(t-s)^{α-1}/Γ(α)` exactly against the piecewise-linear interpolant.
pub fn rl_integral(samples: &[f64], alpha: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.check_samples("rl_integral", samples.len())?;
    Ok(RlWeights::new(alpha, grid)?.apply(samples))
}
