//! Truncated Dirichlet-Laplacian eigensystems on the unit interval and unit
//! square, sign-normalized at the observation point, and projection of the
//! initial data and source onto the modes.
//!
//! Every eigenfunction is flipped so that its outward normal derivative at
//! `x0` is nonnegative; that sign choice is what makes the flux denominator
//! of the reconstruction a sum of nonnegative terms.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::direct::FluxTrace;
use crate::error::{Error, Result};
use crate::fractional::TimeGrid;
use crate::quadrature::composite_gauss_legendre;

/// Panels per axis of the projection quadrature (5 Gauss points each).
pub const PROJECTION_PANELS: usize = 64;

// sin(nπ y0) below this is treated as an exact node of the trace
const TRACE_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Square,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Interval => f.write_str("interval"),
            DomainKind::Square => f.write_str("square"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    Interval(u32),
    Square(u32, u32),
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Interval(n) => write!(f, "{n}"),
            ModeLabel::Square(m, n) => write!(f, "{m}_{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: usize,
    pub lambda: f64,
    /// Outward normal derivative of the normalized eigenfunction at `x0`.
    pub flux_at_x0: f64,
    /// `±1` factor applied to the reference eigenfunction.
    pub sign: f64,
    pub label: ModeLabel,
}

/// Choose the sign that makes a raw normal derivative nonnegative.
///
/// Returns `(sign, normalized derivative)`; a zero derivative keeps sign `+1`.
pub fn normalize_sign(raw_flux: f64) -> (f64, f64) {
    if raw_flux < 0.0 {
        (-1.0, -raw_flux)
    } else {
        (1.0, raw_flux)
    }
}

impl Mode {
    /// The same mode with its sign normalized again (a no-op on built modes).
    pub fn renormalized(&self) -> Mode {
        let (s, d) = normalize_sign(self.flux_at_x0);
        Mode {
            sign: self.sign * s,
            flux_at_x0: d,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub modes: Vec<Mode>,
    pub x0: Vec<f64>,
    pub kind: DomainKind,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn fluxes(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.flux_at_x0).collect()
    }

    /// Value of the normalized eigenfunction of `mode` at `p`.
    pub fn eigenfunction(&self, mode: &Mode, p: &[f64]) -> f64 {
        match mode.label {
            ModeLabel::Interval(n) => mode.sign * SQRT_2 * (n as f64 * PI * p[0]).sin(),
            ModeLabel::Square(m, n) => {
                mode.sign * 2.0 * (m as f64 * PI * p[0]).sin() * (n as f64 * PI * p[1]).sin()
            }
        }
    }

    fn check(&self) -> Result<()> {
        if !self.modes.iter().any(|m| m.flux_at_x0 > 0.0) {
            return Err(Error::Domain(
                "no retained mode has a positive normal derivative at x0".into(),
            ));
        }
        Ok(())
    }
}

/// Sine basis of `-d²/dx²` on `(0, 1)` observed at an endpoint.
pub fn build_interval(modes: usize, x0: f64) -> Result<EigenSystem> {
    if modes == 0 {
        return Err(Error::Domain("need at least one mode".into()));
    }
    if x0 != 0.0 && x0 != 1.0 {
        return Err(Error::Domain(format!(
            "interval observation point must be 0 or 1, got {x0}"
        )));
    }
    let list = (1..=modes as u32)
        .enumerate()
        .map(|(index, n)| {
            let nf = n as f64;
            // ∂/∂n of √2 sin(nπx): -√2 nπ at x=0, √2 nπ cos(nπ) at x=1
            let raw = if x0 == 0.0 {
                -SQRT_2 * nf * PI
            } else {
                SQRT_2 * nf * PI * if n % 2 == 0 { 1.0 } else { -1.0 }
            };
            let (sign, flux_at_x0) = normalize_sign(raw);
            Mode {
                index,
                lambda: nf * nf * PI * PI,
                flux_at_x0,
                sign,
                label: ModeLabel::Interval(n),
            }
        })
        .collect();
    let es = EigenSystem {
        modes: list,
        x0: vec![x0],
        kind: DomainKind::Interval,
    };
    es.check()?;
    Ok(es)
}

fn sin_n_pi(n: u32, y: f64) -> f64 {
    let s = (n as f64 * PI * y).sin();
    if s.abs() < TRACE_ZERO {
        0.0
    } else {
        s
    }
}

/// Product sine basis of `-Δ` on `(0, 1)²`, the `modes` lowest eigenvalues
/// with ties broken by `(m, n)`.
pub fn build_square(modes: usize, x0: [f64; 2]) -> Result<EigenSystem> {
    if modes == 0 {
        return Err(Error::Domain("need at least one mode".into()));
    }
    let [x, y] = x0;
    let on_x_edge = x == 0.0 || x == 1.0;
    let on_y_edge = y == 0.0 || y == 1.0;
    let inside = |v: f64| v > 0.0 && v < 1.0;
    if !((on_x_edge && inside(y)) || (on_y_edge && inside(x))) {
        return Err(Error::Domain(format!(
            "observation point ({x}, {y}) is not a smooth boundary point of the unit square"
        )));
    }
    // the `modes` lowest pairs satisfy m² + n² ≲ 4·modes/π, so this side is ample
    let side = ((2.0 * modes as f64).sqrt().ceil() as u32).saturating_add(2);
    let mut pairs: Vec<(u32, u32)> = (1..=side)
        .flat_map(|m| (1..=side).map(move |n| (m, n)))
        .collect();
    pairs.sort_by_key(|&(m, n)| (m * m + n * n, m, n));
    pairs.truncate(modes);

    let list = pairs
        .into_iter()
        .enumerate()
        .map(|(index, (m, n))| {
            let (mf, nf) = (m as f64, n as f64);
            let parity = |k: u32| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            // outward normal derivative of 2 sin(mπx) sin(nπy) at x0
            let raw = if x == 0.0 {
                -2.0 * mf * PI * sin_n_pi(n, y)
            } else if x == 1.0 {
                2.0 * mf * PI * parity(m) * sin_n_pi(n, y)
            } else if y == 0.0 {
                -2.0 * nf * PI * sin_n_pi(m, x)
            } else {
                2.0 * nf * PI * parity(n) * sin_n_pi(m, x)
            };
            let (sign, flux_at_x0) = normalize_sign(raw);
            Mode {
                index,
                lambda: (mf * mf + nf * nf) * PI * PI,
                flux_at_x0,
                sign,
                label: ModeLabel::Square(m, n),
            }
        })
        .collect();
    let es = EigenSystem {
        modes: list,
        x0: vec![x, y],
        kind: DomainKind::Square,
    };
    es.check()?;
    Ok(es)
}

/// Spatial profile of the initial data or of a separable source.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialSpec {
    Zero,
    /// `-sin πx` on the interval, `-sin πx sin πy` on the square.
    NegSinPiX,
    /// `-sin[π x(1-x)]` on the interval, `-sin[π xy(1-x)(1-y)]` on the square.
    NegSinPiXyBubble,
    /// Samples on a uniform grid including the boundary: `n+1` values on the
    /// interval, `(n+1)²` row-major values (`y` outer) on the square.
    Table(Vec<f64>),
}

/// Time profile `f(t)` of a separable source.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalSpec {
    One,
    TPlusOne,
    Const(f64),
    /// `c0 + c1 t + c2 t² + ...`
    Poly(Vec<f64>),
}

impl TemporalSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TemporalSpec::One => 1.0,
            TemporalSpec::TPlusOne => t + 1.0,
            TemporalSpec::Const(c) => *c,
            TemporalSpec::Poly(c) => c.iter().rev().fold(0.0, |acc, ci| acc * t + ci),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialTerm {
    Function(SpatialSpec),
    /// `-L u0`, projected spectrally as `λ_n b_n`.
    MinusLapU0,
}

/// Source term `F(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Zero,
    Separable { space: SpatialTerm, time: TemporalSpec },
}

fn interp_1d(table: &[f64], x: f64) -> f64 {
    let n = table.len() - 1;
    let s = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
    let i = (s.floor() as usize).min(n - 1);
    let f = s - i as f64;
    table[i] * (1.0 - f) + table[i + 1] * f
}

impl SpatialSpec {
    fn check_for(&self, kind: DomainKind) -> Result<()> {
        if let SpatialSpec::Table(v) = self {
            let ok = match kind {
                DomainKind::Interval => v.len() >= 2,
                DomainKind::Square => {
                    let side = (v.len() as f64).sqrt().round() as usize;
                    side >= 2 && side * side == v.len()
                }
            };
            if !ok {
                return Err(Error::Contract(format!(
                    "table of {} samples does not fit a uniform {kind} grid",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Contract("table contains non-finite samples".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, kind: DomainKind, p: &[f64]) -> f64 {
        match (self, kind) {
            (SpatialSpec::Zero, _) => 0.0,
            (SpatialSpec::NegSinPiX, DomainKind::Interval) => -(PI * p[0]).sin(),
            (SpatialSpec::NegSinPiX, DomainKind::Square) => {
                -(PI * p[0]).sin() * (PI * p[1]).sin()
            }
            (SpatialSpec::NegSinPiXyBubble, DomainKind::Interval) => {
                -(PI * p[0] * (1.0 - p[0])).sin()
            }
            (SpatialSpec::NegSinPiXyBubble, DomainKind::Square) => {
                -(PI * p[0] * p[1] * (1.0 - p[0]) * (1.0 - p[1])).sin()
            }
            (SpatialSpec::Table(v), DomainKind::Interval) => interp_1d(v, p[0]),
            (SpatialSpec::Table(v), DomainKind::Square) => {
                let side = (v.len() as f64).sqrt().round() as usize;
                let n = side - 1;
                let sy = (p[1].clamp(0.0, 1.0) * n as f64).min(n as f64);
                let j = (sy.floor() as usize).min(n - 1);
                let fy = sy - j as f64;
                let lo = interp_1d(&v[j * side..(j + 1) * side], p[0]);
                let hi = interp_1d(&v[(j + 1) * side..(j + 2) * side], p[0]);
                lo * (1.0 - fy) + hi * fy
            }
        }
    }
}

/// Projections below this fraction of the largest one are quadrature noise.
const PROJECTION_NOISE: f64 = 1e-13;

fn chop_noise(mut coeffs: Vec<f64>) -> Vec<f64> {
    let top = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for c in coeffs.iter_mut() {
        if c.abs() < PROJECTION_NOISE * top {
            *c = 0.0;
        }
    }
    coeffs
}

/// Inner products `(w, φ_n)` for every retained mode; values below the
/// quadrature noise floor are set to exactly zero.
pub fn project_function(es: &EigenSystem, w: &SpatialSpec) -> Result<Vec<f64>> {
    Ok(chop_noise(project_raw(es, w)?))
}

fn project_raw(es: &EigenSystem, w: &SpatialSpec) -> Result<Vec<f64>> {
    w.check_for(es.kind)?;
    if *w == SpatialSpec::Zero {
        return Ok(vec![0.0; es.len()]);
    }
    let (xs, ws) = composite_gauss_legendre(0.0, 1.0, PROJECTION_PANELS);
    match es.kind {
        DomainKind::Interval => {
            let vals: Vec<f64> = xs.iter().map(|&x| w.eval(es.kind, &[x])).collect();
            Ok(es
                .modes
                .iter()
                .map(|mode| {
                    xs.iter()
                        .zip(&ws)
                        .zip(&vals)
                        .map(|((&x, &wt), &v)| wt * v * es.eigenfunction(mode, &[x]))
                        .sum()
                })
                .collect())
        }
        DomainKind::Square => {
            let q = xs.len();
            // values[j * q + i] = w(x_i, y_j)
            let mut values = Vec::with_capacity(q * q);
            for &y in &xs {
                for &x in &xs {
                    values.push(w.eval(es.kind, &[x, y]));
                }
            }
            let sines = |k: u32| -> Vec<f64> {
                xs.iter().map(|&x| (k as f64 * PI * x).sin()).collect()
            };
            let mut out = Vec::with_capacity(es.len());
            let mut cache: Vec<(u32, Vec<f64>)> = Vec::new();
            for mode in &es.modes {
                let ModeLabel::Square(m, n) = mode.label else {
                    unreachable!("square eigensystem holds square labels")
                };
                // row[j] = Σ_i w_i w(x_i, y_j) sin(mπx_i)
                let row = match cache.iter().find(|(k, _)| *k == m) {
                    Some((_, r)) => r.clone(),
                    None => {
                        let sm = sines(m);
                        let r: Vec<f64> = (0..q)
                            .map(|j| {
                                let line = &values[j * q..(j + 1) * q];
                                line.iter().zip(&ws).zip(&sm).map(|((v, a), s)| v * a * s).sum()
                            })
                            .collect();
                        cache.push((m, r.clone()));
                        r
                    }
                };
                let sn = sines(n);
                let c: f64 = row.iter().zip(&ws).zip(&sn).map(|((r, a), s)| r * a * s).sum();
                out.push(2.0 * mode.sign * c);
            }
            Ok(out)
        }
    }
}

/// Modal coefficients of the initial data and the source on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    /// `b_n = (u0, φ_n)`
    pub b: Vec<f64>,
    /// `fmat[n][k] = (F(·, t_k), φ_n)`
    pub fmat: Vec<Vec<f64>>,
    pub grid: TimeGrid,
}

impl ProblemData {
    pub fn zeros(modes: usize, grid: TimeGrid) -> Self {
        Self {
            b: vec![0.0; modes],
            fmat: vec![vec![0.0; grid.len()]; modes],
            grid,
        }
    }

    /// `Σ_n b_n d_n`, the normal derivative of the initial data at `x0`.
    pub fn initial_flux(&self, es: &EigenSystem) -> f64 {
        self.b.iter().zip(&es.modes).map(|(b, m)| b * m.flux_at_x0).sum()
    }

    /// `Σ_n F_n(t_k) d_n` at every node.
    pub fn source_flux(&self, es: &EigenSystem) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (row, mode) in self.fmat.iter().zip(&es.modes) {
            if mode.flux_at_x0 == 0.0 {
                continue;
            }
            for (o, f) in out.iter_mut().zip(row) {
                *o += f * mode.flux_at_x0;
            }
        }
        out
    }
}

pub fn project(
    es: &EigenSystem,
    u0: &SpatialSpec,
    source: &SourceSpec,
    grid: &TimeGrid,
) -> Result<ProblemData> {
    let b = project_function(es, u0)?;
    let fmat = match source {
        SourceSpec::Zero => vec![vec![0.0; grid.len()]; es.len()],
        SourceSpec::Separable { space, time } => {
            let coeff = match space {
                SpatialTerm::Function(w) => project_function(es, w)?,
                SpatialTerm::MinusLapU0 => {
                    b.iter().zip(&es.modes).map(|(b, m)| m.lambda * b).collect()
                }
            };
            let profile: Vec<f64> = grid.nodes().into_iter().map(|t| time.eval(t)).collect();
            if profile.iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract("source time profile is not finite".into()));
            }
            coeff
                .iter()
                .map(|c| profile.iter().map(|f| c * f).collect())
                .collect()
        }
    };
    Ok(ProblemData {
        b,
        fmat,
        grid: *grid,
    })
}

/// Outcome of the discrete sign and positivity checks on the inverse-problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// every `b_n ≥ 0`
    pub initial_data_nonnegative: bool,
    /// every `F_n(t_k) ≥ 0`
    pub source_nonnegative: bool,
    /// a mode with `d_N > 0`, `b_N > 0` and `F_N(t_k) > 0` at all nodes
    pub anchor_mode: Option<usize>,
    /// `g(t_k) > 0` at all nodes
    pub flux_positive: bool,
    /// `Some(f)` when the source has the form `F = -L u0 · f(t)`
    pub source_profile: Option<Vec<f64>>,
    /// `f(t_k) ≥ g(t_k) / ∂u0/∂n(x0)` at all nodes; `None` if the source is
    /// not of the `-L u0 · f(t)` form
    pub upper_bound_condition: Option<bool>,
}

impl ValidationReport {
    /// All conditions the monotone reconstruction relies on hold.
    pub fn admissible(&self) -> bool {
        self.initial_data_nonnegative
            && self.source_nonnegative
            && self.anchor_mode.is_some()
            && self.flux_positive
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.initial_data_nonnegative {
            out.push("initial data has a negative modal coefficient");
        }
        if !self.source_nonnegative {
            out.push("source has a negative modal coefficient");
        }
        if self.anchor_mode.is_none() {
            out.push("no mode with positive flux, initial coefficient and source");
        }
        if !self.flux_positive {
            out.push("flux data is not strictly positive");
        }
        out
    }
}

pub fn validate_assumptions(pd: &ProblemData, es: &EigenSystem, g: &FluxTrace) -> ValidationReport {
    let scale_b = pd.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale_f = pd
        .fmat
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_b = 1e-12 * scale_b;
    let tol_f = 1e-12 * scale_f;

    let initial_data_nonnegative = pd.b.iter().all(|&b| b >= -tol_b);
    let source_nonnegative = pd.fmat.iter().flatten().all(|&f| f >= -tol_f);
    let anchor_mode = es
        .modes
        .iter()
        .zip(pd.b.iter().zip(&pd.fmat))
        .find(|(m, (b, row))| m.flux_at_x0 > 0.0 && **b > tol_b && row.iter().all(|&f| f > tol_f))
        .map(|(m, _)| m.index);
    let flux_positive = g.g.len() == pd.grid.len() && g.g.iter().all(|&v| v > 0.0);

    let source_profile = detect_source_profile(pd, es, tol_b);
    let upper_bound_condition = source_profile.as_ref().map(|f| {
        let d0 = pd.initial_flux(es);
        d0 > 0.0
            && g.g.len() == f.len()
            && f.iter().zip(&g.g).all(|(f, g)| *f >= g / d0 * (1.0 - 1e-12))
    });

    ValidationReport {
        initial_data_nonnegative,
        source_nonnegative,
        anchor_mode,
        flux_positive,
        source_profile,
        upper_bound_condition,
    }
}

/// Recover `f(t_k)` if `F_n(t_k) = λ_n b_n f(t_k)` for every mode.
fn detect_source_profile(pd: &ProblemData, es: &EigenSystem, tol_b: f64) -> Option<Vec<f64>> {
    let (ref_idx, ref_mode) = es
        .modes
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let wa = (a.1.lambda * pd.b[a.0]).abs();
            let wb = (b.1.lambda * pd.b[b.0]).abs();
            wa.total_cmp(&wb)
        })?;
    let ref_weight = ref_mode.lambda * pd.b[ref_idx];
    if pd.b[ref_idx].abs() <= tol_b || ref_weight == 0.0 {
        return None;
    }
    let profile: Vec<f64> = pd.fmat[ref_idx].iter().map(|f| f / ref_weight).collect();
    for k in 0..pd.grid.len() {
        let scale = pd.fmat.iter().fold(0.0f64, |m, row| m.max(row[k].abs()));
        let tol = 1e-9 * scale.max(f64::MIN_POSITIVE);
        let consistent = es.modes.iter().zip(&pd.b).zip(&pd.fmat).all(|((m, b), row)| {
            (row[k] - m.lambda * b * profile[k]).abs() <= tol
        });
        if !consistent {
            return None;
        }
    }
    Some(profile)
}
