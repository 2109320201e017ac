//! Flat `key = value` run configuration.
//!
//! ```text
//! # linear relaxation demo
//! threshold.kind = constant
//! threshold.sigma = 0.5
//! init.kind = block
//! tmax = 20
//! snapshots = 0, 20
//! out = linear
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use elapsed_neurons::{InitialDensity, ModelConfig, ThresholdSpec};

use crate::error::{CliError, Result};

const KEYS: &[&str] = &[
    "threshold.kind",
    "threshold.alpha",
    "threshold.sigma",
    "threshold.sigma0",
    "threshold.slope",
    "threshold.floor",
    "J",
    "lambda",
    "ds",
    "smax",
    "tmax",
    "init.kind",
    "init.sigma",
    "snapshots",
    "out",
    "classify.window",
    "classify.tol",
];

/// Default trailing window of the regime classifier (capped at a third of
/// the run).
pub const DEFAULT_WINDOW: f64 = 20.0;
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub snapshots: Vec<f64>,
    pub out: Option<PathBuf>,
    pub window: Option<f64>,
    pub tol: f64,
}

impl RunConfig {
    /// Classifier window for a run of length `t_max`.
    pub fn window_for(&self, t_max: f64) -> f64 {
        self.window.unwrap_or(DEFAULT_WINDOW.min(t_max / 3.0))
    }
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    column: usize,
    value: String,
}

struct Parser<'a> {
    path: &'a str,
    entries: BTreeMap<&'static str, Entry>,
}

impl<'a> Parser<'a> {
    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        let Some(e) = self.raw(key) else {
            return Ok(None);
        };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.error(
                e.line,
                e.column,
                format!("`{key}` expects a finite number, got `{}`", e.value),
            )),
        }
    }

    fn required(&self, key: &str, context: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| self.error(0, 0, format!("`{key}` is required for {context}")))
    }

    /// Wraps a model error so it points at the line that set `key`.
    fn at(&self, key: &str, err: elapsed_neurons::Error) -> CliError {
        match self.raw(key) {
            Some(e) => self.error(e.line, e.column, err.to_string()),
            None => self.error(0, 0, err.to_string()),
        }
    }

    fn threshold(&self) -> Result<ThresholdSpec> {
        let Some(kind) = self.raw("threshold.kind") else {
            return Err(self.error(0, 0, "`threshold.kind` is required"));
        };
        match kind.value.as_str() {
            "constant" => {
                let sigma = self.required("threshold.sigma", "a constant threshold")?;
                ThresholdSpec::constant(sigma).map_err(|e| self.at("threshold.sigma", e))
            }
            "paper" => {
                let alpha = self.required("threshold.alpha", "the piecewise threshold")?;
                ThresholdSpec::paper(alpha).map_err(|e| self.at("threshold.alpha", e))
            }
            "affine" => {
                let s0 = self.required("threshold.sigma0", "an affine threshold")?;
                let slope = self.required("threshold.slope", "an affine threshold")?;
                let floor = self.required("threshold.floor", "an affine threshold")?;
                ThresholdSpec::affine_clipped(s0, slope, floor)
                    .map_err(|e| self.at("threshold.sigma0", e))
            }
            other => Err(self.error(
                kind.line,
                kind.column,
                format!("unknown threshold.kind `{other}` (constant, paper or affine)"),
            )),
        }
    }

    fn initial(&self, threshold: &ThresholdSpec) -> Result<InitialDensity> {
        let kind = self.raw("init.kind");
        match kind.map(|e| e.value.as_str()).unwrap_or("block") {
            "block" => Ok(InitialDensity::UnitBlock),
            "exponential" => Ok(InitialDensity::Exponential),
            "stationary" => {
                let sigma = match (self.number("init.sigma")?, threshold) {
                    (Some(s), _) => s,
                    (None, ThresholdSpec::Constant { sigma }) => *sigma,
                    (None, _) => {
                        return Err(self.error(
                            0,
                            0,
                            "`init.sigma` is required for a stationary start with a non-constant threshold",
                        ))
                    }
                };
                Ok(InitialDensity::LinearStationary { sigma })
            }
            other => {
                let e = kind.expect("a non-default kind comes from the file");
                Err(self.error(
                    e.line,
                    e.column,
                    format!("unknown init.kind `{other}` (block, exponential or stationary)"),
                ))
            }
        }
    }

    fn snapshots(&self) -> Result<Vec<f64>> {
        let Some(e) = self.raw("snapshots") else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        let mut offset = 0;
        for item in e.value.split(',') {
            let t = item.trim();
            let column = e.column + offset + (item.len() - item.trim_start().len());
            offset += item.len() + 1;
            if t.is_empty() {
                continue;
            }
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => out.push(v),
                _ => {
                    return Err(self.error(
                        e.line,
                        column,
                        format!("snapshot time `{t}` is not a non-negative number"),
                    ))
                }
            }
        }
        Ok(out)
    }
}

/// Parses a configuration; `path` is only used in error messages.
pub fn parse(text: &str, path: &str) -> Result<RunConfig> {
    let mut parser = Parser {
        path,
        entries: BTreeMap::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let key_col = content.len() - content.trim_start().len() + 1;
        let Some(eq) = content.find('=') else {
            return Err(parser.error(line, key_col, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        let Some(known) = KEYS.iter().find(|k| **k == key) else {
            return Err(parser.error(line, key_col, format!("unknown key `{key}`")));
        };
        if value.is_empty() {
            return Err(parser.error(line, value_col, format!("`{key}` has no value")));
        }
        if let Some(prev) = parser.entries.get(known) {
            return Err(parser.error(
                line,
                key_col,
                format!("`{key}` already set on line {}", prev.line),
            ));
        }
        parser.entries.insert(
            known,
            Entry {
                line,
                column: value_col,
                value: value.to_string(),
            },
        );
    }

    let threshold = parser.threshold()?;
    let initial = parser.initial(&threshold)?;
    let mut model = ModelConfig::new(threshold, initial);
    if let Some(j) = parser.number("J")? {
        model = model.with_connectivity(j);
    }
    if let Some(l) = parser.number("lambda")? {
        model = model.with_lambda(l);
    }
    if let Some(ds) = parser.number("ds")? {
        model = model.with_ds(ds);
    }
    if let Some(s) = parser.number("smax")? {
        model = model.with_s_max(s);
    }
    if let Some(t) = parser.number("tmax")? {
        model = model.with_t_max(t);
    }
    if let Err(e) = model.validate() {
        return Err(parser.error(0, 0, e.to_string()));
    }
    let window = parser.number("classify.window")?;
    if let Some(w) = window {
        if w <= 0.0 {
            return Err(parser.at(
                "classify.window",
                elapsed_neurons::Error::InvalidConfig("classify.window must be > 0".into()),
            ));
        }
    }
    let tol = parser.number("classify.tol")?.unwrap_or(DEFAULT_TOL);
    if tol <= 0.0 {
        return Err(parser.at(
            "classify.tol",
            elapsed_neurons::Error::InvalidConfig("classify.tol must be > 0".into()),
        ));
    }
    Ok(RunConfig {
        snapshots: parser.snapshots()?,
        out: parser.raw("out").map(|e| PathBuf::from(&e.value)),
        model,
        window,
        tol,
    })
}
