//! Per-mode L1 time stepping of `D^α u_n + λ_n a(t) u_n = F_n(t)`, the flux
//! trace `a(t) ∂u/∂n(x0, t)`, and the constant-coefficient Mittag-Leffler
//! solution used as an oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{check_fractional_order, l1_weights, TimeGrid};
use crate::special::{mittag_leffler, ml_relaxation, MlParams};
use crate::spectral::{EigenSystem, ProblemData};

/// A strictly positive coefficient `a(t)` sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSamples {
    values: Vec<f64>,
    grid: TimeGrid,
}

impl CoefficientSamples {
    pub fn new(values: Vec<f64>, grid: TimeGrid) -> Result<Self> {
        grid.check_samples("coefficient", values.len())?;
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "coefficient must be positive and finite, got {v} at node {k}"
            )));
        }
        Ok(Self { values, grid })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.nodes().into_iter().map(f).collect(), grid)
    }

    pub fn constant(c: f64, grid: TimeGrid) -> Result<Self> {
        Self::new(vec![c; grid.len()], grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `rows[n][k] = u_n(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrace {
    pub rows: Vec<Vec<f64>>,
    pub grid: TimeGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FluxKind {
    Exact,
    Noisy { delta: f64, seed: u64 },
}

/// Flux samples `g(t_k) = a(t_k) ∂u/∂n(x0, t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxTrace {
    pub g: Vec<f64>,
    pub kind: FluxKind,
}

impl FluxTrace {
    pub fn exact(g: Vec<f64>) -> Self {
        Self {
            g,
            kind: FluxKind::Exact,
        }
    }
}

/// L1 stepping weights for one `(α, grid)` pair, shared across modes.
#[derive(Debug, Clone)]
pub struct L1Stepper {
    grid: TimeGrid,
    /// `τ^{-α}`
    scale: f64,
    /// `w_j`, `j = 0..Nt-1`
    w: Vec<f64>,
    /// `w_{j-1} - w_j` at index `j` (index 0 unused)
    drop: Vec<f64>,
}

impl L1Stepper {
    pub fn new(alpha: f64, grid: &TimeGrid) -> Result<Self> {
        let w = l1_weights(alpha, grid.steps())?.b;
        let mut drop = vec![0.0; w.len()];
        for j in 1..w.len() {
            drop[j] = w[j - 1] - w[j];
        }
        Ok(Self {
            grid: *grid,
            scale: grid.tau().powf(-alpha),
            w,
            drop,
        })
    }

    /// Implicit L1 march with the coefficient taken at the new node:
    /// `(w_0 τ^{-α} + λ a_k) u^k = F_k + τ^{-α}(w_{k-1} u^0 + Σ_{j=1}^{k-1} (w_{j-1} - w_j) u^{k-j})`.
    pub fn solve(&self, lambda: f64, a: &[f64], source: &[f64], b0: f64) -> Vec<f64> {
        let n = self.grid.steps();
        let c0 = self.scale * self.w[0];
        let mut u = Vec::with_capacity(n + 1);
        u.push(b0);
        for k in 1..=n {
            let mut hist = self.w[k - 1] * b0;
            for j in 1..k {
                hist += self.drop[j] * u[k - j];
            }
            u.push((source[k] + self.scale * hist) / (c0 + lambda * a[k]));
        }
        u
    }
}

fn check_mode_inputs(lambda: f64, grid: &TimeGrid, source: &[f64]) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("eigenvalue must be positive, got {lambda}")));
    }
    grid.check_samples("mode source", source.len())
}

/// L1 solution of one modal equation with initial value `bn`.
pub fn solve_mode(
    lambda: f64,
    a: &CoefficientSamples,
    source: &[f64],
    bn: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_mode_inputs(lambda, a.grid(), source)?;
    let stepper = L1Stepper::new(alpha, a.grid())?;
    Ok(stepper.solve(lambda, a.values(), source, bn))
}

/// Exact solution for a constant coefficient and piecewise-linear source:
///
/// `u(t) = b E_{α,1}(-μ t^α) + ∫_0^t F(s) (t-s)^{α-1} E_{α,α}(-μ (t-s)^α) ds`, `μ = λ a`.
///
/// The convolution is integrated by parts against `G1(r) = r^α E_{α,α+1}(-μ r^α)`
/// and `G2(r) = r^{α+1} E_{α,α+2}(-μ r^α)`, so it is exact for piecewise-linear `F`.
pub fn analytic_mode_solution(
    lambda: f64,
    a_const: f64,
    source: &[f64],
    bn: f64,
    alpha: f64,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_mode_inputs(lambda, grid, source)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("fractional order must lie in (0, 1], got {alpha}")));
    }
    if !(a_const > 0.0) {
        return Err(Error::Domain(format!("coefficient must be positive, got {a_const}")));
    }
    let mu = lambda * a_const;
    let n = grid.steps();
    let tau = grid.tau();
    let ml1 = MlParams { alpha, beta: alpha + 1.0 };
    let ml2 = MlParams { alpha, beta: alpha + 2.0 };
    let mut g1 = vec![0.0; n + 1];
    let mut g2 = vec![0.0; n + 1];
    for m in 1..=n {
        let r = grid.node(m);
        let ra = r.powf(alpha);
        g1[m] = ra * mittag_leffler(ml1, -mu * ra)?;
        g2[m] = ra * r * mittag_leffler(ml2, -mu * ra)?;
    }
    let slopes: Vec<f64> = source.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    let mut out = Vec::with_capacity(n + 1);
    out.push(bn);
    for k in 1..=n {
        let mut conv = source[0] * g1[k];
        for (j, s) in slopes.iter().enumerate().take(k) {
            conv += s * (g2[k - j] - g2[k - j - 1]);
        }
        out.push(bn * ml_relaxation(alpha, mu, grid.node(k))? + conv);
    }
    Ok(out)
}

/// Solve every retained mode with coefficient `a`.
pub fn solve_direct(
    es: &EigenSystem,
    pd: &ProblemData,
    a: &CoefficientSamples,
    alpha: f64,
) -> Result<ModeTrace> {
    check_fractional_order(alpha)?;
    if pd.b.len() != es.len() || pd.fmat.len() != es.len() {
        return Err(Error::Contract(format!(
            "problem data has {} modes, eigensystem has {}",
            pd.b.len(),
            es.len()
        )));
    }
    if pd.grid != *a.grid() {
        return Err(Error::Contract("coefficient and problem data use different grids".into()));
    }
    for row in &pd.fmat {
        pd.grid.check_samples("source row", row.len())?;
    }
    let stepper = L1Stepper::new(alpha, &pd.grid)?;
    let rows = es
        .modes
        .par_iter()
        .zip(pd.b.par_iter().zip(pd.fmat.par_iter()))
        .map(|(mode, (&bn, row))| {
            if bn == 0.0 && row.iter().all(|f| *f == 0.0) {
                vec![0.0; pd.grid.len()]
            } else {
                stepper.solve(mode.lambda, a.values(), row, bn)
            }
        })
        .collect();
    Ok(ModeTrace {
        rows,
        grid: pd.grid,
    })
}

/// `Σ_n u_n(t_k) d_n`, the modeled normal derivative at `x0`.
pub fn flux_denominator(es: &EigenSystem, mt: &ModeTrace) -> Vec<f64> {
    let mut out = vec![0.0; mt.grid.len()];
    for (row, mode) in mt.rows.iter().zip(&es.modes) {
        if mode.flux_at_x0 == 0.0 {
            continue;
        }
        for (o, u) in out.iter_mut().zip(row) {
            *o += u * mode.flux_at_x0;
        }
    }
    out
}

pub fn flux_trace(es: &EigenSystem, mt: &ModeTrace, a: &CoefficientSamples) -> FluxTrace {
    let d = flux_denominator(es, mt);
    FluxTrace::exact(d.iter().zip(a.values()).map(|(d, a)| a * d).collect())
}

/// `g_δ[k] = (1 + ζ_k δ) g[k]` with `ζ_k` uniform on `[-1, 1]` from a seeded ChaCha8 stream.
pub fn add_noise(g: &FluxTrace, delta: f64, seed: u64) -> Result<FluxTrace> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(g.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = g
        .g
        .iter()
        .map(|v| {
            let zeta: f64 = rng.gen_range(-1.0..=1.0);
            (1.0 + zeta * delta) * v
        })
        .collect();
    Ok(FluxTrace {
        g: noisy,
        kind: FluxKind::Noisy { delta, seed },
    })
}
