//! Declarative problem files: line-oriented `key = value` under a `[kind]`
//! section header. Parsing is strict: unknown keys, duplicate keys, missing
//! required keys, and expressions referencing illegal variables are all
//! errors with line-precise diagnostics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use picardo_core::{ContractionKind, QuadratureRule};
use thiserror::Error;

use crate::expr::{self, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error at line {line}: {msg}")]
    Validation { line: usize, msg: String },
}

impl ProblemError {
    fn parse(line: usize, msg: impl Into<String>) -> Self {
        ProblemError::Parse {
            line,
            msg: msg.into(),
        }
    }

    fn validation(line: usize, msg: impl Into<String>) -> Self {
        ProblemError::Validation {
            line,
            msg: msg.into(),
        }
    }
}

/// Iteration thresholds shared by every problem kind.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationKeys {
    pub eps_step: f64,
    pub eps_res: f64,
    pub max_iter: usize,
}

impl Default for IterationKeys {
    fn default() -> Self {
        IterationKeys {
            eps_step: 1e-10,
            eps_res: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Quadrature selector as written in the file.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureSpec {
    Gauss { nodes: usize },
    Trapezoid { nodes: usize },
    MonteCarlo { points: usize, seed: u64 },
}

impl QuadratureSpec {
    pub fn to_rule(&self) -> QuadratureRule {
        match *self {
            QuadratureSpec::Gauss { nodes } => QuadratureRule::GaussLegendre {
                nodes_per_axis: nodes,
            },
            QuadratureSpec::Trapezoid { nodes } => QuadratureRule::CompositeTrapezoid {
                nodes_per_axis: nodes,
            },
            QuadratureSpec::MonteCarlo { points, seed } => {
                QuadratureRule::MonteCarlo {
                    n_points: points,
                    seed,
                }
            }
        }
    }

    fn render(&self) -> String {
        match self {
            QuadratureSpec::Gauss { nodes } => format!("gauss {nodes}"),
            QuadratureSpec::Trapezoid { nodes } => format!("trapezoid {nodes}"),
            QuadratureSpec::MonteCarlo { points, seed } => format!("montecarlo {points} {seed}"),
        }
    }
}

/// Comparison-function selector.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSpec {
    Constant(f64),
    Reciprocal,
    ExpDecay,
}

impl BetaSpec {
    pub fn to_fn(&self) -> Result<picardo_core::GeraghtyFn, picardo_core::Error> {
        match *self {
            BetaSpec::Constant(c) => picardo_core::GeraghtyFn::constant(c),
            BetaSpec::Reciprocal => Ok(picardo_core::GeraghtyFn::Reciprocal1Plus),
            BetaSpec::ExpDecay => Ok(picardo_core::GeraghtyFn::ExpDecay),
        }
    }

    fn render(&self) -> String {
        match self {
            BetaSpec::Constant(c) => format!("constant {c}"),
            BetaSpec::Reciprocal => "reciprocal".into(),
            BetaSpec::ExpDecay => "exp-decay".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmSpec {
    pub n_trunc: usize,
    pub kernel: String,
    pub forcing: String,
    pub delta: f64,
    pub gamma: f64,
    pub quadrature: QuadratureSpec,
    pub iteration: IterationKeys,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrysohnSpec {
    pub n_trunc: usize,
    pub a: f64,
    pub b: f64,
    pub integrand: String,
    pub forcing: String,
    pub tau: f64,
    pub alpha: f64,
    pub quadrature: QuadratureSpec,
    pub iteration: IterationKeys,
    pub seed: u64,
    pub u_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorIterationSpec {
    pub k: usize,
    pub engine: EngineKind,
    pub operator: String,
    pub a: f64,
    pub b: f64,
    /// Base points; defaults to the domain midpoint replicated `k` times.
    pub base: Option<Vec<f64>>,
    pub beta: Option<BetaSpec>,
    pub iteration: IterationKeys,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCheckSpec {
    pub kind: ContractionKind,
    pub operator: String,
    pub beta: Option<BetaSpec>,
    pub a: f64,
    pub b: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Fredholm(FredholmSpec),
    Urysohn(UrysohnSpec),
    OperatorIteration(OperatorIterationSpec),
    ContractionCheck(ContractionCheckSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub kind: ProblemKind,
}

struct RawEntry {
    line: usize,
    value: String,
}

struct Section {
    name: String,
    name_line: usize,
    entries: BTreeMap<String, RawEntry>,
}

fn split_sections(text: &str) -> Result<Section, ProblemError> {
    let mut section: Option<Section> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let name = stripped
                .strip_suffix(']')
                .ok_or_else(|| ProblemError::parse(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if section.is_some() {
                return Err(ProblemError::parse(
                    line_no,
                    "multiple sections; one problem per file",
                ));
            }
            section = Some(Section {
                name,
                name_line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let current = section
            .as_mut()
            .ok_or_else(|| ProblemError::parse(line_no, "missing kind: no [section] header yet"))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ProblemError::parse(line_no, "expected 'key = value'"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ProblemError::parse(line_no, "empty key"));
        }
        if current.entries.contains_key(&key) {
            return Err(ProblemError::parse(line_no, format!("duplicate key '{key}'")));
        }
        current.entries.insert(
            key,
            RawEntry {
                line: line_no,
                value,
            },
        );
    }
    section.ok_or_else(|| ProblemError::parse(0, "missing kind"))
}

struct Fields {
    entries: BTreeMap<String, RawEntry>,
    section_line: usize,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<RawEntry> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<RawEntry, ProblemError> {
        self.take(key).ok_or_else(|| {
            ProblemError::validation(self.section_line, format!("missing required key '{key}'"))
        })
    }

    fn finish(self) -> Result<(), ProblemError> {
        if let Some((key, entry)) = self.entries.into_iter().next() {
            return Err(ProblemError::validation(
                entry.line,
                format!("unknown key '{key}'"),
            ));
        }
        Ok(())
    }
}

fn parse_f64(entry: &RawEntry, key: &str) -> Result<f64, ProblemError> {
    entry.value.parse().map_err(|_| {
        ProblemError::parse(entry.line, format!("'{key}' expects a real, got '{}'", entry.value))
    })
}

fn parse_usize(entry: &RawEntry, key: &str) -> Result<usize, ProblemError> {
    entry.value.parse().map_err(|_| {
        ProblemError::parse(
            entry.line,
            format!("'{key}' expects an integer, got '{}'", entry.value),
        )
    })
}

fn parse_u64(entry: &RawEntry, key: &str) -> Result<u64, ProblemError> {
    entry.value.parse().map_err(|_| {
        ProblemError::parse(
            entry.line,
            format!("'{key}' expects an integer, got '{}'", entry.value),
        )
    })
}

fn parse_quadrature(entry: &RawEntry) -> Result<QuadratureSpec, ProblemError> {
    let words: Vec<&str> = entry.value.split_whitespace().collect();
    let usage = "expected 'gauss N', 'trapezoid N', or 'montecarlo N SEED'";
    match words.as_slice() {
        ["gauss", n] => Ok(QuadratureSpec::Gauss {
            nodes: n
                .parse()
                .map_err(|_| ProblemError::parse(entry.line, usage))?,
        }),
        ["trapezoid", n] => Ok(QuadratureSpec::Trapezoid {
            nodes: n
                .parse()
                .map_err(|_| ProblemError::parse(entry.line, usage))?,
        }),
        ["montecarlo", n, seed] => Ok(QuadratureSpec::MonteCarlo {
            points: n
                .parse()
                .map_err(|_| ProblemError::parse(entry.line, usage))?,
            seed: seed
                .parse()
                .map_err(|_| ProblemError::parse(entry.line, usage))?,
        }),
        _ => Err(ProblemError::parse(entry.line, usage)),
    }
}

fn parse_beta(entry: &RawEntry) -> Result<BetaSpec, ProblemError> {
    let words: Vec<&str> = entry.value.split_whitespace().collect();
    match words.as_slice() {
        ["constant", c] => Ok(BetaSpec::Constant(c.parse().map_err(|_| {
            ProblemError::parse(entry.line, "expected 'constant C'")
        })?)),
        ["reciprocal"] => Ok(BetaSpec::Reciprocal),
        ["exp-decay"] => Ok(BetaSpec::ExpDecay),
        _ => Err(ProblemError::parse(
            entry.line,
            "expected 'constant C', 'reciprocal', or 'exp-decay'",
        )),
    }
}

fn parse_contraction_kind(entry: &RawEntry) -> Result<ContractionKind, ProblemError> {
    let words: Vec<&str> = entry.value.split_whitespace().collect();
    let bad = || {
        ProblemError::parse(
            entry.line,
            format!("unknown contraction kind '{}'", entry.value),
        )
    };
    let parse_c = |w: &str| w.parse::<f64>().map_err(|_| bad());
    let parse_k = |w: &str| w.parse::<usize>().map_err(|_| bad());
    let kind = match words.as_slice() {
        ["banach", c] => ContractionKind::Banach { c: parse_c(c)? },
        ["geraghty"] => ContractionKind::Geraghty,
        ["kannan", c] => ContractionKind::Kannan { c: parse_c(c)? },
        ["fisher", c] => ContractionKind::Fisher { c: parse_c(c)? },
        ["kannan-geraghty-self"] => ContractionKind::KannanGeraghtySelf,
        ["hk", k] => ContractionKind::Hk { k: parse_k(k)? },
        ["kannan-geraghty", k] => ContractionKind::KannanGeraghtyDimK { k: parse_k(k)? },
        ["ext-kannan-geraghty", k] => ContractionKind::ExtKannanGeraghtyHk { k: parse_k(k)? },
        ["fisher-geraghty", k] => ContractionKind::FisherGeraghtyDimK { k: parse_k(k)? },
        ["ext-fisher-geraghty", k] => ContractionKind::ExtFisherGeraghtyHk { k: parse_k(k)? },
        _ => return Err(bad()),
    };
    kind.validate()
        .map_err(|e| ProblemError::validation(entry.line, e.to_string()))?;
    Ok(kind)
}

fn parse_base_list(entry: &RawEntry) -> Result<Vec<f64>, ProblemError> {
    entry
        .value
        .split(',')
        .map(|w| {
            w.trim().parse::<f64>().map_err(|_| {
                ProblemError::parse(entry.line, format!("bad base point '{}'", w.trim()))
            })
        })
        .collect()
}

/// Checks that an expression parses and references only `legal` variables.
fn validate_expr(entry: &RawEntry, key: &str, legal: &[String]) -> Result<String, ProblemError> {
    let vars = expr::free_variables(&entry.value).map_err(|e| match e {
        ExprError::Parse { offset, msg } => ProblemError::parse(
            entry.line,
            format!("in '{key}' at expression offset {offset}: {msg}"),
        ),
        other => ProblemError::parse(entry.line, format!("in '{key}': {other}")),
    })?;
    for (name, _) in &vars {
        if !legal.iter().any(|l| l == name) {
            return Err(ProblemError::validation(
                entry.line,
                format!("'{key}' references illegal variable '{name}' (legal: {})",
                    legal.join(", ")),
            ));
        }
    }
    Ok(entry.value.clone())
}

fn t_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i}")).collect()
}

fn ts_vars(n: usize) -> Vec<String> {
    let mut v = t_vars(n);
    v.extend((1..=n).map(|i| format!("s{i}")));
    v
}

fn x_vars(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

fn take_iteration_keys(fields: &mut Fields) -> Result<IterationKeys, ProblemError> {
    let mut keys = IterationKeys::default();
    if let Some(e) = fields.take("eps_step") {
        keys.eps_step = parse_f64(&e, "eps_step")?;
    }
    if let Some(e) = fields.take("eps_res") {
        keys.eps_res = parse_f64(&e, "eps_res")?;
    }
    if let Some(e) = fields.take("max_iter") {
        keys.max_iter = parse_usize(&e, "max_iter")?;
    }
    if !(keys.eps_step > 0.0 && keys.eps_res > 0.0) || keys.max_iter == 0 {
        return Err(ProblemError::validation(
            fields.section_line,
            "eps_step, eps_res must be positive and max_iter at least 1",
        ));
    }
    Ok(keys)
}

/// Parses and fully validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let section = split_sections(text)?;
    let mut fields = Fields {
        entries: section.entries,
        section_line: section.name_line,
    };
    let kind = match section.name.as_str() {
        "fredholm" => {
            let n_trunc = parse_usize(&fields.required("n_trunc")?, "n_trunc")?;
            if n_trunc == 0 {
                return Err(ProblemError::validation(
                    section.name_line,
                    "n_trunc must be at least 1",
                ));
            }
            let kernel_entry = fields.required("kernel")?;
            let kernel = validate_expr(&kernel_entry, "kernel", &ts_vars(n_trunc))?;
            let forcing_entry = fields.required("forcing")?;
            let forcing = validate_expr(&forcing_entry, "forcing", &t_vars(n_trunc))?;
            let delta_entry = fields.required("delta")?;
            let delta = parse_f64(&delta_entry, "delta")?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(ProblemError::validation(
                    delta_entry.line,
                    format!("delta must lie in (0, 1), got {delta}"),
                ));
            }
            let gamma_entry = fields.required("gamma")?;
            let gamma = parse_f64(&gamma_entry, "gamma")?;
            if !(gamma > 1.0) {
                return Err(ProblemError::validation(
                    gamma_entry.line,
                    format!("gamma must exceed 1, got {gamma}"),
                ));
            }
            let quadrature = parse_quadrature(&fields.required("quadrature")?)?;
            let seed = match fields.take("seed") {
                Some(e) => parse_u64(&e, "seed")?,
                None => 0,
            };
            let iteration = take_iteration_keys(&mut fields)?;
            ProblemKind::Fredholm(FredholmSpec {
                n_trunc,
                kernel,
                forcing,
                delta,
                gamma,
                quadrature,
                iteration,
                seed,
            })
        }
        "urysohn" => {
            let n_trunc = parse_usize(&fields.required("n_trunc")?, "n_trunc")?;
            if n_trunc == 0 {
                return Err(ProblemError::validation(
                    section.name_line,
                    "n_trunc must be at least 1",
                ));
            }
            let a = parse_f64(&fields.required("a")?, "a")?;
            let b_entry = fields.required("b")?;
            let b = parse_f64(&b_entry, "b")?;
            if !(a < b) {
                return Err(ProblemError::validation(
                    b_entry.line,
                    format!("domain [{a}, {b}] is empty"),
                ));
            }
            let mut legal = ts_vars(n_trunc);
            legal.push("u".into());
            let integrand_entry = fields.required("integrand")?;
            let integrand = validate_expr(&integrand_entry, "integrand", &legal)?;
            let forcing_entry = fields.required("forcing")?;
            let forcing = validate_expr(&forcing_entry, "forcing", &t_vars(n_trunc))?;
            let tau = parse_f64(&fields.required("tau")?, "tau")?;
            let alpha_entry = fields.required("alpha")?;
            let alpha = parse_f64(&alpha_entry, "alpha")?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(ProblemError::validation(
                    alpha_entry.line,
                    format!("alpha must lie in (0, 1], got {alpha}"),
                ));
            }
            let quadrature = parse_quadrature(&fields.required("quadrature")?)?;
            let seed = match fields.take("seed") {
                Some(e) => parse_u64(&e, "seed")?,
                None => 0,
            };
            let u_range = match (fields.take("u_min"), fields.take("u_max")) {
                (Some(lo), Some(hi)) => {
                    Some((parse_f64(&lo, "u_min")?, parse_f64(&hi, "u_max")?))
                }
                (None, None) => None,
                (Some(e), None) | (None, Some(e)) => {
                    return Err(ProblemError::validation(
                        e.line,
                        "u_min and u_max must be given together",
                    ))
                }
            };
            let iteration = take_iteration_keys(&mut fields)?;
            ProblemKind::Urysohn(UrysohnSpec {
                n_trunc,
                a,
                b,
                integrand,
                forcing,
                tau,
                alpha,
                quadrature,
                iteration,
                seed,
                u_range,
            })
        }
        "operator-iteration" => {
            let k = parse_usize(&fields.required("k")?, "k")?;
            if k == 0 {
                return Err(ProblemError::validation(
                    section.name_line,
                    "k must be at least 1",
                ));
            }
            let engine = match fields.take("engine") {
                None => EngineKind::Infinite,
                Some(e) => match e.value.as_str() {
                    "finite" => EngineKind::Finite,
                    "infinite" => EngineKind::Infinite,
                    other => {
                        return Err(ProblemError::parse(
                            e.line,
                            format!("engine must be 'finite' or 'infinite', got '{other}'"),
                        ))
                    }
                },
            };
            let operator_entry = fields.required("operator")?;
            let operator = validate_expr(&operator_entry, "operator", &x_vars(k))?;
            let a = match fields.take("a") {
                Some(e) => parse_f64(&e, "a")?,
                None => 0.0,
            };
            let b = match fields.take("b") {
                Some(e) => parse_f64(&e, "b")?,
                None => 1.0,
            };
            if !(a < b) {
                return Err(ProblemError::validation(
                    section.name_line,
                    format!("domain [{a}, {b}] is empty"),
                ));
            }
            let base = match fields.take("base") {
                Some(e) => {
                    let points = parse_base_list(&e)?;
                    if points.len() != k {
                        return Err(ProblemError::validation(
                            e.line,
                            format!("base needs exactly {k} points, got {}", points.len()),
                        ));
                    }
                    Some(points)
                }
                None => None,
            };
            let beta = match fields.take("beta") {
                Some(e) => Some(parse_beta(&e)?),
                None => None,
            };
            let iteration = take_iteration_keys(&mut fields)?;
            ProblemKind::OperatorIteration(OperatorIterationSpec {
                k,
                engine,
                operator,
                a,
                b,
                base,
                beta,
                iteration,
            })
        }
        "contraction-check" => {
            let kind_entry = fields.required("kind")?;
            let kind = parse_contraction_kind(&kind_entry)?;
            let operator_entry = fields.required("operator")?;
            let operator = validate_expr(&operator_entry, "operator", &x_vars(kind.k()))?;
            let beta = match fields.take("beta") {
                Some(e) => Some(parse_beta(&e)?),
                None => None,
            };
            let needs_beta = !matches!(
                kind,
                ContractionKind::Banach { .. }
                    | ContractionKind::Kannan { .. }
                    | ContractionKind::Fisher { .. }
            );
            if needs_beta && beta.is_none() {
                return Err(ProblemError::validation(
                    kind_entry.line,
                    "this contraction kind requires a 'beta' key",
                ));
            }
            let a = match fields.take("a") {
                Some(e) => parse_f64(&e, "a")?,
                None => 0.0,
            };
            let b = match fields.take("b") {
                Some(e) => parse_f64(&e, "b")?,
                None => 1.0,
            };
            if !(a < b) {
                return Err(ProblemError::validation(
                    section.name_line,
                    format!("domain [{a}, {b}] is empty"),
                ));
            }
            let n_samples = match fields.take("n_samples") {
                Some(e) => parse_usize(&e, "n_samples")?,
                None => 10_000,
            };
            let seed = match fields.take("seed") {
                Some(e) => parse_u64(&e, "seed")?,
                None => 0,
            };
            ProblemKind::ContractionCheck(ContractionCheckSpec {
                kind,
                operator,
                beta,
                a,
                b,
                n_samples,
                seed,
            })
        }
        other => {
            return Err(ProblemError::parse(
                section.name_line,
                format!("unknown problem kind '{other}'"),
            ))
        }
    };
    fields.finish()?;
    Ok(ProblemFile { kind })
}

fn render_contraction_kind(kind: &ContractionKind) -> String {
    match kind {
        ContractionKind::Banach { c } => format!("banach {c}"),
        ContractionKind::Geraghty => "geraghty".into(),
        ContractionKind::Kannan { c } => format!("kannan {c}"),
        ContractionKind::Fisher { c } => format!("fisher {c}"),
        ContractionKind::KannanGeraghtySelf => "kannan-geraghty-self".into(),
        ContractionKind::Hk { k } => format!("hk {k}"),
        ContractionKind::KannanGeraghtyDimK { k } => format!("kannan-geraghty {k}"),
        ContractionKind::ExtKannanGeraghtyHk { k } => format!("ext-kannan-geraghty {k}"),
        ContractionKind::FisherGeraghtyDimK { k } => format!("fisher-geraghty {k}"),
        ContractionKind::ExtFisherGeraghtyHk { k } => format!("ext-fisher-geraghty {k}"),
    }
}

impl ProblemFile {
    /// Renders back to the file format; `parse_problem(rendered)` yields a
    /// structurally identical value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push_iter = |out: &mut String, it: &IterationKeys| {
            let _ = writeln!(out, "eps_step = {}", it.eps_step);
            let _ = writeln!(out, "eps_res = {}", it.eps_res);
            let _ = writeln!(out, "max_iter = {}", it.max_iter);
        };
        match &self.kind {
            ProblemKind::Fredholm(spec) => {
                let _ = writeln!(out, "[fredholm]");
                let _ = writeln!(out, "n_trunc = {}", spec.n_trunc);
                let _ = writeln!(out, "kernel = {}", spec.kernel);
                let _ = writeln!(out, "forcing = {}", spec.forcing);
                let _ = writeln!(out, "delta = {}", spec.delta);
                let _ = writeln!(out, "gamma = {}", spec.gamma);
                let _ = writeln!(out, "quadrature = {}", spec.quadrature.render());
                let _ = writeln!(out, "seed = {}", spec.seed);
                push_iter(&mut out, &spec.iteration);
            }
            ProblemKind::Urysohn(spec) => {
                let _ = writeln!(out, "[urysohn]");
                let _ = writeln!(out, "n_trunc = {}", spec.n_trunc);
                let _ = writeln!(out, "a = {}", spec.a);
                let _ = writeln!(out, "b = {}", spec.b);
                let _ = writeln!(out, "integrand = {}", spec.integrand);
                let _ = writeln!(out, "forcing = {}", spec.forcing);
                let _ = writeln!(out, "tau = {}", spec.tau);
                let _ = writeln!(out, "alpha = {}", spec.alpha);
                let _ = writeln!(out, "quadrature = {}", spec.quadrature.render());
                let _ = writeln!(out, "seed = {}", spec.seed);
                if let Some((lo, hi)) = spec.u_range {
                    let _ = writeln!(out, "u_min = {lo}");
                    let _ = writeln!(out, "u_max = {hi}");
                }
                push_iter(&mut out, &spec.iteration);
            }
            ProblemKind::OperatorIteration(spec) => {
                let _ = writeln!(out, "[operator-iteration]");
                let _ = writeln!(out, "k = {}", spec.k);
                let engine = match spec.engine {
                    EngineKind::Finite => "finite",
                    EngineKind::Infinite => "infinite",
                };
                let _ = writeln!(out, "engine = {engine}");
                let _ = writeln!(out, "operator = {}", spec.operator);
                let _ = writeln!(out, "a = {}", spec.a);
                let _ = writeln!(out, "b = {}", spec.b);
                if let Some(base) = &spec.base {
                    let rendered: Vec<String> = base.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "base = {}", rendered.join(", "));
                }
                if let Some(beta) = &spec.beta {
                    let _ = writeln!(out, "beta = {}", beta.render());
                }
                push_iter(&mut out, &spec.iteration);
            }
            ProblemKind::ContractionCheck(spec) => {
                let _ = writeln!(out, "[contraction-check]");
                let _ = writeln!(out, "kind = {}", render_contraction_kind(&spec.kind));
                let _ = writeln!(out, "operator = {}", spec.operator);
                if let Some(beta) = &spec.beta {
                    let _ = writeln!(out, "beta = {}", beta.render());
                }
                let _ = writeln!(out, "a = {}", spec.a);
                let _ = writeln!(out, "b = {}", spec.b);
                let _ = writeln!(out, "n_samples = {}", spec.n_samples);
                let _ = writeln!(out, "seed = {}", spec.seed);
            }
        }
        out
    }
}
