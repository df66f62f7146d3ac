//! Monotone fixed-point reconstruction of `a(t)` from flux data.
//!
//! `K ψ(t) = g(t) / Σ_n u_n(t; ψ) d_n`. Starting from the lower bound
//! `ā_0 = g / (∂u0/∂n(x0) + I^α[∂F/∂n(x0, ·)])` the iterates `ā_k = K ā_{k-1}`
//! increase pointwise; the loop stops once the trapezoid L² increment drops
//! to `epsilon0`.

use serde::{Deserialize, Serialize};

use crate::direct::{flux_denominator, solve_direct, CoefficientSamples, FluxTrace, L1Stepper};
use crate::error::{Error, Result};
use crate::fractional::{rl_integral, TimeGrid};
use crate::spectral::{EigenSystem, ProblemData};

/// Denominators below this abort the iteration.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    pub epsilon0: f64,
    pub max_iters: usize,
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record_iterates: bool,
}

impl InverseConfig {
    pub fn new(alpha: f64, epsilon0: f64, max_iters: usize) -> Self {
        Self {
            epsilon0,
            max_iters,
            alpha,
            delta: 0.0,
            seed: 0,
            record_iterates: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0) {
            return Err(Error::Domain(format!("epsilon0 must be positive, got {}", self.epsilon0)));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Domain(format!("delta must be nonnegative, got {}", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Final iterate.
    pub a_rec: CoefficientSamples,
    /// `ā_0` followed by every later iterate, when requested.
    pub iterates: Option<Vec<CoefficientSamples>>,
    pub n_iters: usize,
    pub converged: bool,
    /// `‖ā_k - ā_{k-1}‖` for `k = 1..=n_iters`.
    pub history: Vec<f64>,
}

/// Composite trapezoid approximation of `(∫_0^T f² dt)^{1/2}`.
pub fn l2_norm(f: &[f64], grid: &TimeGrid) -> Result<f64> {
    grid.check_samples("l2_norm", f.len())?;
    let n = f.len() - 1;
    let inner: f64 = f[1..n].iter().map(|v| v * v).sum();
    let ends = 0.5 * (f[0] * f[0] + f[n] * f[n]);
    Ok(((inner + ends) * grid.tau()).sqrt())
}

pub fn l2_distance(a: &[f64], b: &[f64], grid: &TimeGrid) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract("l2_distance: length mismatch".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&d, grid)
}

fn check_flux(g: &FluxTrace, grid: &TimeGrid) -> Result<()> {
    grid.check_samples("flux data", g.g.len())?;
    if let Some((k, v)) = g.g.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Data(format!("flux data must be positive, got {v} at node {k}")));
    }
    Ok(())
}

/// `∂u0/∂n(x0) + I^α[∂F/∂n(x0, ·)](t_k)` at every node.
pub fn lower_bound_denominator(es: &EigenSystem, pd: &ProblemData, alpha: f64) -> Result<Vec<f64>> {
    let d0 = pd.initial_flux(es);
    let integral = rl_integral(&pd.source_flux(es), alpha, &pd.grid)?;
    Ok(integral.into_iter().map(|v| d0 + v).collect())
}

/// `ā_0`, the lower bound of the admissible set.
pub fn initial_guess(
    g: &FluxTrace,
    es: &EigenSystem,
    pd: &ProblemData,
    alpha: f64,
) -> Result<CoefficientSamples> {
    check_flux(g, &pd.grid)?;
    let den = lower_bound_denominator(es, pd, alpha)?;
    if let Some((k, v)) = den.iter().enumerate().find(|(_, v)| !(**v > DENOMINATOR_FLOOR)) {
        return Err(Error::Assumption(format!(
            "initial-guess denominator is {v:e} at node {k}; the data admit no positive lower bound"
        )));
    }
    CoefficientSamples::new(g.g.iter().zip(&den).map(|(g, d)| g / d).collect(), pd.grid)
}

/// `g / ∂u0/∂n(x0)`, the upper bound used when the source is `-L u0 · f(t)`.
pub fn upper_bound(g: &FluxTrace, es: &EigenSystem, pd: &ProblemData) -> Result<Vec<f64>> {
    let d0 = pd.initial_flux(es);
    if !(d0 > DENOMINATOR_FLOOR) {
        return Err(Error::Assumption(format!("initial normal derivative is {d0:e}")));
    }
    Ok(g.g.iter().map(|g| g / d0).collect())
}

fn divide_flux(g: &FluxTrace, den: &[f64], grid: &TimeGrid) -> Result<CoefficientSamples> {
    let mut out = Vec::with_capacity(den.len());
    for (k, (g, d)) in g.g.iter().zip(den).enumerate() {
        if !(*d > DENOMINATOR_FLOOR) {
            return Err(Error::NotWellDefined {
                node: k,
                t: grid.node(k),
                value: *d,
            });
        }
        out.push(g / d);
    }
    CoefficientSamples::new(out, *grid)
}

/// One application of the operator `K`.
pub fn apply_k(
    psi: &CoefficientSamples,
    g: &FluxTrace,
    es: &EigenSystem,
    pd: &ProblemData,
    alpha: f64,
) -> Result<CoefficientSamples> {
    check_flux(g, &pd.grid)?;
    let mt = solve_direct(es, pd, psi, alpha)?;
    divide_flux(g, &flux_denominator(es, &mt), &pd.grid)
}

/// Reusable evaluator of `K` for fixed data; avoids rebuilding L1 weights
/// and skips modes that carry no flux.
struct KOperator<'a> {
    g: &'a FluxTrace,
    pd: &'a ProblemData,
    stepper: L1Stepper,
    /// `(λ_n, d_n, b_n, F_n)` for every mode with `d_n > 0` and nonzero data
    active: Vec<(f64, f64, f64, &'a [f64])>,
}

impl<'a> KOperator<'a> {
    fn new(g: &'a FluxTrace, es: &'a EigenSystem, pd: &'a ProblemData, alpha: f64) -> Result<Self> {
        check_flux(g, &pd.grid)?;
        if pd.b.len() != es.len() || pd.fmat.len() != es.len() {
            return Err(Error::Contract("problem data and eigensystem disagree on mode count".into()));
        }
        let active = es
            .modes
            .iter()
            .zip(pd.b.iter().zip(&pd.fmat))
            .filter(|(m, (b, row))| m.flux_at_x0 > 0.0 && (**b != 0.0 || row.iter().any(|f| *f != 0.0)))
            .map(|(m, (b, row))| (m.lambda, m.flux_at_x0, *b, row.as_slice()))
            .collect();
        Ok(Self {
            g,
            pd,
            stepper: L1Stepper::new(alpha, &pd.grid)?,
            active,
        })
    }

    fn apply(&self, psi: &CoefficientSamples) -> Result<CoefficientSamples> {
        use rayon::prelude::*;
        let grid = self.pd.grid;
        let rows: Vec<Vec<f64>> = self
            .active
            .par_iter()
            .map(|&(lambda, _, b, row)| self.stepper.solve(lambda, psi.values(), row, b))
            .collect();
        // summed in mode order so results do not depend on thread scheduling
        let mut den = vec![0.0; grid.len()];
        for (u, &(_, d, _, _)) in rows.iter().zip(&self.active) {
            den.iter_mut().zip(u).for_each(|(acc, v)| *acc += v * d);
        }
        divide_flux(self.g, &den, &grid)
    }
}

/// Run the monotone iteration from `ā_0`.
pub fn reconstruct(
    g: &FluxTrace,
    es: &EigenSystem,
    pd: &ProblemData,
    cfg: &InverseConfig,
) -> Result<ReconstructionResult> {
    let start = initial_guess(g, es, pd, cfg.alpha)?;
    iterate_from(start, g, es, pd, cfg)
}

/// Run the iteration from an arbitrary positive starting point.
pub fn iterate_from(
    start: CoefficientSamples,
    g: &FluxTrace,
    es: &EigenSystem,
    pd: &ProblemData,
    cfg: &InverseConfig,
) -> Result<ReconstructionResult> {
    cfg.check()?;
    if *start.grid() != pd.grid {
        return Err(Error::Contract("starting iterate is on a different grid".into()));
    }
    let op = KOperator::new(g, es, pd, cfg.alpha)?;
    let grid = pd.grid;
    let mut iterates = cfg.record_iterates.then(|| vec![start.clone()]);
    let mut history = Vec::new();
    let mut current = start;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let next = op.apply(&current)?;
        let step = l2_distance(next.values(), current.values(), &grid)?;
        history.push(step);
        if let Some(list) = iterates.as_mut() {
            list.push(next.clone());
        }
        current = next;
        if step <= cfg.epsilon0 {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult {
        a_rec: current,
        iterates,
        n_iters: history.len(),
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::direct::flux_trace;
    use crate::spectral::{build_interval, project, SourceSpec, SpatialSpec, SpatialTerm, TemporalSpec};

    fn default_setup(n: usize) -> (EigenSystem, ProblemData) {
        let grid = TimeGrid::new(1.0, n).unwrap();
        let es = build_interval(8, 0.0).unwrap();
        let src = SourceSpec::Separable {
            space: SpatialTerm::Function(SpatialSpec::NegSinPiX),
            time: TemporalSpec::TPlusOne,
        };
        let pd = project(&es, &SpatialSpec::NegSinPiX, &src, &grid).unwrap();
        (es, pd)
    }

    #[test]
    fn l2_norm_examples() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_eq!(l2_norm(&vec![0.0; 1001], &g).unwrap(), 0.0);
        assert!((l2_norm(&vec![1.0; 1001], &g).unwrap() - 1.0).abs() < 1e-14);
        let v = l2_norm(&g.nodes(), &g).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        assert!(l2_norm(&[1.0; 3], &g).is_err());
    }

    #[test]
    fn initial_guess_at_zero_uses_initial_flux() {
        let (es, pd) = default_setup(100);
        let g = FluxTrace::exact((0..=100).map(|k| 1.0 + 0.01 * k as f64).collect());
        let a0 = initial_guess(&g, &es, &pd, 0.9).unwrap();
        assert!((a0.values()[0] - 1.0 / PI).abs() < 1e-10);
        assert!(a0.values().iter().all(|v| *v > 0.0));

        let no_source = project(&es, &SpatialSpec::NegSinPiX, &SourceSpec::Zero, &pd.grid).unwrap();
        let a0 = initial_guess(&g, &es, &no_source, 0.9).unwrap();
        for (a, g) in a0.values().iter().zip(&g.g) {
            assert!((a - g / PI).abs() < 1e-10);
        }
    }

    #[test]
    fn nonpositive_flux_is_a_data_error() {
        let (es, pd) = default_setup(10);
        let mut g = FluxTrace::exact(vec![1.0; 11]);
        g.g[3] = 0.0;
        assert!(matches!(initial_guess(&g, &es, &pd, 0.5), Err(Error::Data(_))));
    }

    #[test]
    fn zero_initial_data_without_source_has_no_lower_bound() {
        let (es, pd) = default_setup(10);
        let empty = ProblemData::zeros(es.len(), pd.grid);
        let g = FluxTrace::exact(vec![1.0; 11]);
        assert!(matches!(initial_guess(&g, &es, &empty, 0.5), Err(Error::Assumption(_))));
    }

    #[test]
    fn true_coefficient_is_a_fixed_point() {
        let (es, pd) = default_setup(300);
        let a = CoefficientSamples::from_fn(pd.grid, |t| (5.0 * PI * t).sin() + 1.3).unwrap();
        let mt = solve_direct(&es, &pd, &a, 0.7).unwrap();
        let g = flux_trace(&es, &mt, &a);
        let ka = apply_k(&a, &g, &es, &pd, 0.7).unwrap();
        for (x, y) in ka.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_coefficient_recovered_immediately_from_fixed_point() {
        let (es, pd) = default_setup(200);
        let a = CoefficientSamples::constant(1.7, pd.grid).unwrap();
        let g = flux_trace(&es, &solve_direct(&es, &pd, &a, 0.5).unwrap(), &a);
        let cfg = InverseConfig::new(0.5, 1e-10, 2);
        let res = iterate_from(a.clone(), &g, &es, &pd, &cfg).unwrap();
        assert!(res.converged);
        assert!(res.n_iters <= 2);
        for (x, y) in res.a_rec.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn single_iteration_contract() {
        let (es, pd) = default_setup(100);
        let a = CoefficientSamples::from_fn(pd.grid, |t| 1.0 + t).unwrap();
        let g = flux_trace(&es, &solve_direct(&es, &pd, &a, 0.8).unwrap(), &a);
        let mut cfg = InverseConfig::new(0.8, 1e-12, 1);
        cfg.record_iterates = true;
        let res = reconstruct(&g, &es, &pd, &cfg).unwrap();
        assert_eq!(res.n_iters, 1);
        assert!(!res.converged);
        let list = res.iterates.unwrap();
        assert_eq!(list.len(), 2);
        let a0 = initial_guess(&g, &es, &pd, 0.8).unwrap();
        let a1 = apply_k(&a0, &g, &es, &pd, 0.8).unwrap();
        assert_eq!(list[1], a1);
        assert_eq!(res.a_rec, a1);
        cfg.max_iters = 0;
        assert!(reconstruct(&g, &es, &pd, &cfg).is_err());
    }
}
