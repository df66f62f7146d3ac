//! Experiment configuration: a TOML document plus the small descriptor
//! language used for initial data, sources and coefficients.
//!
//! ```toml
//! domain = "interval"
//! alpha = 0.9
//! Nt = 1000
//! u0 = "neg_sin_pi_x"
//! source = "separable(neg_sin_pi_x, t_plus_one)"
//! coefficient = "a1"
//! inverse_crime = true
//! ```
//!
//! A `summary.toml` written by a run embeds the resolved config under
//! `[config]` and is accepted by [`parse_config`] as well.

use std::f64::consts::PI;
use std::ops::Range;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::fractional::{check_fractional_order, TimeGrid};
use crate::spectral::{build_interval, build_square, DomainKind, SourceSpec, SpatialSpec, SpatialTerm, TemporalSpec};

pub const DEFAULT_MODES_INTERVAL: usize = 32;
pub const DEFAULT_MODES_SQUARE: usize = 64;
pub const MAX_MODES: usize = 100_000;
pub const MAX_STEPS: usize = 10_000_000;

/// True diffusivity used to synthesize data.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    /// `sin(5πt) + 1.3`
    A1,
    /// Piecewise "smile" profile with jumps at `t = 1/3` and `t = 2/3`.
    A2,
    Constant(f64),
    /// Samples on a uniform grid over `[0, T]`, linearly interpolated.
    Table(Vec<f64>),
}

impl CoefficientSpec {
    pub fn eval(&self, t: f64, horizon: f64) -> f64 {
        match self {
            CoefficientSpec::A1 => (5.0 * PI * t).sin() + 1.3,
            CoefficientSpec::A2 => {
                // left-closed indicators: [0,1/3], (1/3,2/3), [2/3,1]
                if t <= 1.0 / 3.0 {
                    0.8 * (3.0 * PI * t).sin() + 1.5
                } else if t < 2.0 / 3.0 {
                    -0.5 * (3.0 * PI * t - PI).sin() + 0.6
                } else {
                    0.8 * (3.0 * PI * t - 2.0 * PI).sin() + 1.5
                }
            }
            CoefficientSpec::Constant(c) => *c,
            CoefficientSpec::Table(v) => {
                let n = v.len() - 1;
                let s = (t / horizon).clamp(0.0, 1.0) * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let f = s - i as f64;
                v[i] * (1.0 - f) + v[i + 1] * f
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Alpha,
    Epsilon0,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Fully resolved experiment description; every field has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub x0: Vec<f64>,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "Nt")]
    pub steps: usize,
    pub modes: usize,
    pub u0: String,
    pub source: String,
    pub coefficient: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0_table: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_table: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_table: Option<Vec<f64>>,
    pub epsilon0: f64,
    pub max_iters: usize,
    pub delta: f64,
    pub seed: u64,
    pub inverse_crime: bool,
    pub output_dir: PathBuf,
    pub allow_assumption_violations: bool,
    pub record_iterates: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    pub fn u0_spec(&self) -> Result<SpatialSpec> {
        parse_spatial(&self.u0, self.u0_table.as_deref())
    }

    pub fn source_spec(&self) -> Result<SourceSpec> {
        parse_source(&self.source, self.source_table.as_deref())
    }

    pub fn coefficient_spec(&self) -> Result<CoefficientSpec> {
        parse_coefficient(&self.coefficient, self.coefficient_table.as_deref())
    }

    /// Check every field against the preconditions of the solvers.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|e| match e {
            Error::Config { .. } => e,
            other => config_err(None, other.to_string()),
        })
    }

    fn check(&self) -> Result<()> {
        check_fractional_order(self.alpha)?;
        self.grid()?;
        if self.modes == 0 {
            return Err(config_err(None, "modes must be at least 1"));
        }
        let want = match self.domain {
            DomainKind::Interval => 1,
            DomainKind::Square => 2,
        };
        if self.x0.len() != want {
            return Err(config_err(
                None,
                format!("x0 needs {want} coordinate(s) on the {}", self.domain),
            ));
        }
        if !(self.epsilon0 > 0.0) {
            return Err(config_err(None, "epsilon0 must be positive"));
        }
        if self.max_iters == 0 {
            return Err(config_err(None, "max_iters must be at least 1"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(config_err(None, "delta must be a finite nonnegative number"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(config_err(None, "seed must fit in a signed 64-bit integer"));
        }
        if self.modes > MAX_MODES || self.steps > MAX_STEPS {
            return Err(config_err(
                None,
                format!("modes is capped at {MAX_MODES} and Nt at {MAX_STEPS}"),
            ));
        }
        match self.domain {
            DomainKind::Interval => build_interval(1, self.x0[0])?,
            DomainKind::Square => build_square(1, [self.x0[0], self.x0[1]])?,
        };
        let u0 = self.u0_spec()?;
        let source = self.source_spec()?;
        check_table_shape(&u0, self.domain)?;
        if let SourceSpec::Separable {
            space: SpatialTerm::Function(w),
            ..
        } = &source
        {
            check_table_shape(w, self.domain)?;
        }
        self.coefficient_spec()?;
        if let Some(s) = &self.sweep {
            check_sweep(s)?;
        }
        Ok(())
    }
}

fn check_table_shape(w: &SpatialSpec, kind: DomainKind) -> Result<()> {
    if let SpatialSpec::Table(v) = w {
        let ok = match kind {
            DomainKind::Interval => v.len() >= 2,
            DomainKind::Square => {
                let side = (v.len() as f64).sqrt().round() as usize;
                side >= 2 && side * side == v.len()
            }
        };
        if !ok {
            return Err(config_err(
                None,
                format!("a {} table of {} values has the wrong shape", kind, v.len()),
            ));
        }
    }
    Ok(())
}

fn check_sweep(s: &SweepSpec) -> Result<()> {
    if s.values.is_empty() {
        return Err(config_err(None, "sweep needs at least one value"));
    }
    for &v in &s.values {
        let ok = match s.parameter {
            SweepParameter::Alpha => v > 0.0 && v < 1.0,
            SweepParameter::Epsilon0 => v > 0.0 && v.is_finite(),
            SweepParameter::Delta => v >= 0.0 && v.is_finite(),
        };
        if !ok {
            return Err(config_err(
                None,
                format!("sweep value {v} is out of range for {:?}", s.parameter),
            ));
        }
    }
    Ok(())
}

fn config_err(line: Option<usize>, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: Option<Spanned<DomainKind>>,
    x0: Option<Spanned<Vec<f64>>>,
    alpha: Option<Spanned<f64>>,
    #[serde(rename = "T")]
    horizon: Option<Spanned<f64>>,
    #[serde(rename = "Nt")]
    steps: Option<Spanned<i64>>,
    modes: Option<Spanned<i64>>,
    u0: Option<Spanned<String>>,
    source: Option<Spanned<String>>,
    coefficient: Option<Spanned<String>>,
    u0_table: Option<Vec<f64>>,
    source_table: Option<Vec<f64>>,
    coefficient_table: Option<Vec<f64>>,
    epsilon0: Option<Spanned<f64>>,
    max_iters: Option<Spanned<i64>>,
    delta: Option<Spanned<f64>>,
    seed: Option<Spanned<i64>>,
    inverse_crime: Option<bool>,
    output_dir: Option<PathBuf>,
    allow_assumption_violations: Option<bool>,
    record_iterates: Option<bool>,
    sweep: Option<Spanned<SweepSpec>>,
}

#[derive(Debug, Deserialize)]
struct SummaryEnvelope {
    config: RawConfig,
}

struct LineIndex<'a>(&'a str);

impl LineIndex<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0.as_bytes()[..end].iter().filter(|b| **b == b'\n').count() + 1
    }
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map(|s| LineIndex(text).line(s));
    config_err(line, e.message().trim().to_string())
}

/// Parse a config document (or a run summary) and resolve defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let raw = if matches!(table.get("config"), Some(toml::Value::Table(_))) {
        toml::from_str::<SummaryEnvelope>(text)
            .map_err(|e| toml_error(text, e))?
            .config
    } else {
        toml::from_str::<RawConfig>(text).map_err(|e| toml_error(text, e))?
    };
    resolve(raw, &LineIndex(text))
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn count(v: Option<Spanned<i64>>, name: &str, default: usize, lines: &LineIndex) -> Result<usize> {
    match v {
        None => Ok(default),
        Some(s) => {
            let line = lines.line(s.span());
            usize::try_from(*s.get_ref())
                .map_err(|_| config_err(Some(line), format!("{name} must be a nonnegative integer")))
        }
    }
}

fn resolve(raw: RawConfig, lines: &LineIndex) -> Result<ExperimentConfig> {
    let at = |span: Range<usize>| Some(lines.line(span));
    let domain = raw.domain.as_ref().map(|d| *d.get_ref()).unwrap_or(DomainKind::Interval);
    let default_x0 = match domain {
        DomainKind::Interval => vec![0.0],
        DomainKind::Square => vec![0.0, 0.5],
    };
    let default_modes = match domain {
        DomainKind::Interval => DEFAULT_MODES_INTERVAL,
        DomainKind::Square => DEFAULT_MODES_SQUARE,
    };
    let seed_line = raw.seed.as_ref().map(|s| lines.line(s.span()));
    let seed = match raw.seed {
        None => 0,
        Some(s) => u64::try_from(s.into_inner())
            .map_err(|_| config_err(seed_line, "seed must be nonnegative"))?,
    };
    let span_of = |s: &Option<Spanned<String>>| s.as_ref().map(|s| s.span());
    let (u0_span, source_span, coef_span) =
        (span_of(&raw.u0), span_of(&raw.source), span_of(&raw.coefficient));
    let x0_span = raw.x0.as_ref().map(|s| s.span());
    let alpha_span = raw.alpha.as_ref().map(|s| s.span());
    let eps_span = raw.epsilon0.as_ref().map(|s| s.span());
    let delta_span = raw.delta.as_ref().map(|s| s.span());
    let horizon_span = raw.horizon.as_ref().map(|s| s.span());
    let sweep_span = raw.sweep.as_ref().map(|s| s.span());

    let cfg = ExperimentConfig {
        domain,
        x0: raw.x0.map(Spanned::into_inner).unwrap_or(default_x0),
        alpha: raw.alpha.map(Spanned::into_inner).unwrap_or(0.9),
        horizon: raw.horizon.map(Spanned::into_inner).unwrap_or(1.0),
        steps: count(raw.steps, "Nt", 1000, lines)?,
        modes: count(raw.modes, "modes", default_modes, lines)?,
        u0: raw.u0.map(Spanned::into_inner).unwrap_or_else(|| "neg_sin_pi_x".into()),
        source: raw
            .source
            .map(Spanned::into_inner)
            .unwrap_or_else(|| "separable(neg_sin_pi_x, t_plus_one)".into()),
        coefficient: raw.coefficient.map(Spanned::into_inner).unwrap_or_else(|| "a1".into()),
        u0_table: raw.u0_table,
        source_table: raw.source_table,
        coefficient_table: raw.coefficient_table,
        epsilon0: raw.epsilon0.map(Spanned::into_inner).unwrap_or(1e-6),
        max_iters: count(raw.max_iters, "max_iters", 1000, lines)?,
        delta: raw.delta.map(Spanned::into_inner).unwrap_or(0.0),
        seed,
        inverse_crime: raw.inverse_crime.unwrap_or(false),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        allow_assumption_violations: raw.allow_assumption_violations.unwrap_or(false),
        record_iterates: raw.record_iterates.unwrap_or(true),
        sweep: raw.sweep.map(Spanned::into_inner),
    };

    // field-level checks first so the diagnostic can point at a line
    let fail = |span: Option<Range<usize>>, msg: String| Err(config_err(span.and_then(at), msg));
    if check_fractional_order(cfg.alpha).is_err() {
        return fail(alpha_span, format!("alpha must lie in (0, 1), got {}", cfg.alpha));
    }
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
        return fail(horizon_span, format!("T must be positive, got {}", cfg.horizon));
    }
    if !(cfg.epsilon0 > 0.0) {
        return fail(eps_span, format!("epsilon0 must be positive, got {}", cfg.epsilon0));
    }
    if !(cfg.delta >= 0.0 && cfg.delta.is_finite()) {
        return fail(delta_span, format!("delta must be nonnegative, got {}", cfg.delta));
    }
    if let Err(e) = cfg.u0_spec() {
        return fail(u0_span, strip(e));
    }
    if let Err(e) = cfg.source_spec() {
        return fail(source_span, strip(e));
    }
    if let Err(e) = cfg.coefficient_spec() {
        return fail(coef_span, strip(e));
    }
    if let Some(s) = &cfg.sweep {
        if let Err(e) = check_sweep(s) {
            return fail(sweep_span, strip(e));
        }
    }
    let want = if domain == DomainKind::Square { 2 } else { 1 };
    if cfg.x0.len() != want {
        return fail(x0_span, format!("x0 needs {want} coordinate(s) on the {domain}"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn strip(e: Error) -> String {
    match e {
        Error::Config { msg, .. } => msg,
        other => other.to_string(),
    }
}

/// `name` or `name(arg, arg, ...)` with arguments split at top-level commas.
fn split_call(text: &str) -> Result<(&str, Option<Vec<&str>>)> {
    let s = text.trim();
    let Some(open) = s.find('(') else {
        if s.contains(')') || s.contains(',') {
            return Err(config_err(None, format!("malformed descriptor '{s}'")));
        }
        return Ok((s, None));
    };
    if !s.ends_with(')') {
        return Err(config_err(None, format!("missing ')' in '{s}'")));
    }
    let name = s[..open].trim();
    let inner = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(config_err(None, format!("unbalanced ')' in '{s}'")));
                }
            }
            ',' if depth == 0 => {
                args.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(config_err(None, format!("unbalanced '(' in '{s}'")));
    }
    let last = inner[start..].trim();
    if !last.is_empty() || !args.is_empty() {
        args.push(last);
    }
    Ok((name, Some(args)))
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| config_err(None, format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(config_err(None, format!("'{s}' is not finite")));
    }
    Ok(v)
}

fn numbers(args: &[&str]) -> Result<Vec<f64>> {
    args.iter().map(|a| number(a)).collect()
}

fn table_values(inline: Option<Vec<&str>>, external: Option<&[f64]>, what: &str) -> Result<Vec<f64>> {
    let v = match (inline, external) {
        (Some(args), _) => numbers(&args)?,
        (None, Some(t)) => t.to_vec(),
        (None, None) => {
            return Err(config_err(None, format!("'table' needs inline values or {what}")));
        }
    };
    if v.len() < 2 {
        return Err(config_err(None, "a table needs at least two values"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(None, "table values must be finite"));
    }
    Ok(v)
}

fn no_args(name: &str, args: &Option<Vec<&str>>) -> Result<()> {
    if args.is_some() {
        return Err(config_err(None, format!("'{name}' takes no arguments")));
    }
    Ok(())
}

/// Parse a spatial profile: `zero`, `neg_sin_pi_x`, `neg_sin_pi_xy_bubble`,
/// `table` (values from the matching `*_table` key) or `table(v0, v1, ...)`.
pub fn parse_spatial(text: &str, table: Option<&[f64]>) -> Result<SpatialSpec> {
    let (name, args) = split_call(text)?;
    match name {
        "zero" => no_args(name, &args).map(|_| SpatialSpec::Zero),
        "neg_sin_pi_x" => no_args(name, &args).map(|_| SpatialSpec::NegSinPiX),
        "neg_sin_pi_xy_bubble" => no_args(name, &args).map(|_| SpatialSpec::NegSinPiXyBubble),
        "table" => Ok(SpatialSpec::Table(table_values(args, table, "a table key")?)),
        _ => Err(config_err(None, format!("unknown spatial profile '{name}'"))),
    }
}

/// Parse a time profile: `one`, `t_plus_one`, `const(c)` or `poly(c0, c1, ...)`.
pub fn parse_temporal(text: &str) -> Result<TemporalSpec> {
    let (name, args) = split_call(text)?;
    match (name, args) {
        ("one", None) => Ok(TemporalSpec::One),
        ("t_plus_one", None) => Ok(TemporalSpec::TPlusOne),
        ("const", Some(a)) if a.len() == 1 => Ok(TemporalSpec::Const(number(a[0])?)),
        ("poly", Some(a)) if !a.is_empty() => Ok(TemporalSpec::Poly(numbers(&a)?)),
        (n, _) => Err(config_err(None, format!("unknown or malformed time profile '{n}'"))),
    }
}

/// Parse a source: `zero` or `separable(<space>, <time>)` where `<space>`
/// is a spatial profile or `minus_lap_u0`.
pub fn parse_source(text: &str, table: Option<&[f64]>) -> Result<SourceSpec> {
    let (name, args) = split_call(text)?;
    match (name, args) {
        ("zero", None) => Ok(SourceSpec::Zero),
        ("separable", Some(a)) if a.len() == 2 => {
            let space = if a[0] == "minus_lap_u0" {
                SpatialTerm::MinusLapU0
            } else {
                SpatialTerm::Function(parse_spatial(a[0], table)?)
            };
            Ok(SourceSpec::Separable {
                space,
                time: parse_temporal(a[1])?,
            })
        }
        (n, _) => Err(config_err(None, format!("unknown or malformed source '{n}'"))),
    }
}

/// Parse a coefficient: `a1`, `a2`, `constant(c)`, `table` or `table(v0, ...)`.
pub fn parse_coefficient(text: &str, table: Option<&[f64]>) -> Result<CoefficientSpec> {
    let (name, args) = split_call(text)?;
    let spec = match (name, args) {
        ("a1", None) => CoefficientSpec::A1,
        ("a2", None) => CoefficientSpec::A2,
        ("constant", Some(a)) if a.len() == 1 => CoefficientSpec::Constant(number(a[0])?),
        ("table", args) => CoefficientSpec::Table(table_values(args, table, "coefficient_table")?),
        (n, _) => {
            return Err(config_err(None, format!("unknown or malformed coefficient '{n}'")));
        }
    };
    let positive = match &spec {
        CoefficientSpec::Constant(c) => *c > 0.0,
        CoefficientSpec::Table(v) => v.iter().all(|x| *x > 0.0),
        _ => true,
    };
    if !positive {
        return Err(config_err(None, "coefficient must be strictly positive"));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.domain, DomainKind::Interval);
        assert_eq!(cfg.modes, DEFAULT_MODES_INTERVAL);
        assert_eq!(cfg.x0, vec![0.0]);
        assert_eq!(cfg.steps, 1000);
        let sq = parse_config("domain = \"square\"").unwrap();
        assert_eq!(sq.modes, DEFAULT_MODES_SQUARE);
        assert_eq!(sq.x0, vec![0.0, 0.5]);
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            parse_source("separable(neg_sin_pi_x, t_plus_one)", None).unwrap(),
            SourceSpec::Separable {
                space: SpatialTerm::Function(SpatialSpec::NegSinPiX),
                time: TemporalSpec::TPlusOne
            }
        );
        assert_eq!(
            parse_source("separable(minus_lap_u0, const(3))", None).unwrap(),
            SourceSpec::Separable {
                space: SpatialTerm::MinusLapU0,
                time: TemporalSpec::Const(3.0)
            }
        );
        assert_eq!(
            parse_source(" separable( table(0, 1, 0) , poly(1, -2.5) ) ", None).unwrap(),
            SourceSpec::Separable {
                space: SpatialTerm::Function(SpatialSpec::Table(vec![0.0, 1.0, 0.0])),
                time: TemporalSpec::Poly(vec![1.0, -2.5])
            }
        );
        assert_eq!(parse_coefficient("constant(2)", None).unwrap(), CoefficientSpec::Constant(2.0));
        assert!(parse_coefficient("constant(-1)", None).is_err());
        assert!(parse_coefficient("table", None).is_err());
        assert_eq!(
            parse_coefficient("table", Some(&[1.0, 2.0])).unwrap(),
            CoefficientSpec::Table(vec![1.0, 2.0])
        );
        for bad in ["separable(zero)", "separable(zero, one", "a1(", "poly()", "const(nan)", "zero(1)", ")("] {
            assert!(parse_source(bad, None).is_err() || parse_temporal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn smile_uses_left_closed_pieces() {
        let a = CoefficientSpec::A2;
        assert!((a.eval(1.0 / 3.0, 1.0) - (0.8 * PI.sin() + 1.5)).abs() < 1e-12);
        assert!((a.eval(2.0 / 3.0, 1.0) - 1.5).abs() < 1e-12);
        assert!((a.eval(0.5, 1.0) - 0.1).abs() < 1e-12);
        let a1 = CoefficientSpec::A1;
        assert!((a1.eval(0.1, 1.0) - 2.3).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_lines() {
        let text = "alpha = 0.5\n\ncoefficient = \"a3\"\n";
        match parse_config(text) {
            Err(Error::Config { line: Some(3), .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_config("alpha = 1.5\n") {
            Err(Error::Config { line: Some(1), .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_config("alpha = 0.5\nbogus = 1\n") {
            Err(Error::Config { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_config("alpha = \n") {
            Err(Error::Config { line: Some(1), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn summary_round_trip() {
        let cfg = parse_config("alpha = 0.7\nNt = 200\n[sweep]\nparameter = \"delta\"\nvalues = [0.01, 0.02]\n").unwrap();
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a ExperimentConfig,
            result: toml::Table,
        }
        let text = toml::to_string(&Doc {
            config: &cfg,
            result: toml::Table::new(),
        })
        .unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
        let plain = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&plain).unwrap(), cfg);
    }

    #[test]
    fn shape_checks() {
        assert!(parse_config("domain = \"square\"\nx0 = [0.0]").is_err());
        assert!(parse_config("u0 = \"table(1, 2, 3)\"\ndomain = \"square\"").is_err());
        assert!(parse_config("u0 = \"table(0, 1, 2, 3)\"\ndomain = \"square\"").is_ok());
        assert!(parse_config("Nt = -3").is_err());
        assert!(parse_config("seed = -1").is_err());
        assert!(parse_config("x0 = [0.5]").is_err());
        assert!(parse_config("domain = \"square\"\nx0 = [0.0, 1.0]").is_err());
        assert!(parse_config("domain = \"square\"\nx0 = [0.3, 1.0]").is_ok());
        assert!(parse_config("modes = 1000000000").is_err());
        assert!(parse_config("[sweep]\nparameter = \"alpha\"\nvalues = [1.2]").is_err());
    }
}
