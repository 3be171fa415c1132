//! Run configuration: a flat TOML file plus `key=value` overrides.
//!
//! Every key is optional and unknown keys are rejected, so a misspelled key
//! fails loudly instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::NewtonOptions;
use crate::loopanal::LoopOptions;
use crate::model::{build_model, preset, ModelError, ModelSpec, Order, Overrides};
use crate::signal::SignalKind;
use crate::verdict::{SweepOptions, Thresholds};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("override '{0}' is not of the form key=value")]
    BadOverride(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A parameter value; numbers are accepted and kept as expression text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Text(String),
    Int(i64),
    Float(f64),
}

impl ParamValue {
    pub fn text(&self) -> String {
        match self {
            ParamValue::Text(s) => s.clone(),
            ParamValue::Int(i) => i.to_string(),
            ParamValue::Float(f) => format!("{f:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog model name; exclusive with `rhs`.
    pub preset: Option<String>,
    /// Preset parameter overrides, e.g. `params = { alpha = -1 }`.
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    /// Inline right-hand side over t, x1, x2, u, du.
    pub rhs: Option<String>,
    /// 1 or 2; required with `rhs`.
    pub order: Option<usize>,
    /// Initial state; defaults to zeros with `rhs`.
    pub init: Option<Vec<f64>>,
    /// Right-hand side of the t -> inf limit system, for time-varying `rhs`.
    pub limit_rhs: Option<String>,
    pub search_interval: Option<[f64; 2]>,
    pub input_range: Option<[f64; 2]>,

    /// sine, abs_sine or constant; defaults to the model's own input.
    pub signal: Option<String>,
    /// Frequency for `simulate`.
    pub omega: Option<f64>,
    /// Constant input level, for a constant signal and for `equilibria`.
    pub level: Option<f64>,
    /// Frequencies for `hysteresis`.
    pub omegas: Option<Vec<f64>>,
    pub periods: Option<usize>,
    pub steps_per_period: Option<usize>,
    /// Simulated time for a constant signal.
    pub duration: Option<f64>,
    pub max_refinements: Option<usize>,

    pub closure_tol: Option<f64>,
    pub slope_threshold: Option<f64>,
    pub jump_height_fraction: Option<f64>,
    pub unbounded_exponent: Option<f64>,
    pub degenerate_fraction: Option<f64>,
    pub shrink_exponent: Option<f64>,
    pub rate_tolerance: Option<f64>,

    /// Sign-change scan resolution for equilibria.
    pub grid_n: Option<usize>,
    /// Input levels in a bifurcation diagram.
    pub diagram_points: Option<usize>,
    /// Input levels probed by the multistability check.
    pub multistability_levels: Option<usize>,
    /// Newton seeds per axis for bifurcations.
    pub newton_seeds: Option<usize>,

    pub out_dir: Option<PathBuf>,
    /// Write an SVG next to every loop CSV.
    pub svg: Option<bool>,
    /// Worker threads for sweeps; 0 uses every core.
    pub workers: Option<usize>,
}

pub const DEFAULT_OMEGAS: [f64; 4] = [2.0, 0.5, 0.1, 0.02];

/// Parses `text` as TOML, applies `key=value` overrides, then validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for ov in overrides {
        let (key, value) = ov.split_once('=').ok_or_else(|| ConfigError::BadOverride(ov.clone()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::BadOverride(ov.clone()));
        }
        set_key(&mut table, key, value.trim());
    }
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a config file; `None` starts from an empty config.
pub fn load_config(path: Option<&std::path::Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}

/// Values that parse as TOML keep their type; anything else is a string.
fn toml_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn set_key(table: &mut toml::Table, key: &str, value: &str) {
    match key.split_once('.') {
        Some((head, rest)) => {
            let entry = table.entry(head.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if !entry.is_table() {
                *entry = toml::Value::Table(toml::Table::new());
            }
            set_key(entry.as_table_mut().expect("table"), rest, value);
        }
        None => {
            table.insert(key.to_string(), toml_value(value));
        }
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(ConfigError::Invalid(format!("{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn interval(name: &str, v: Option<[f64; 2]>) -> Result<(), ConfigError> {
    match v {
        Some([lo, hi]) if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
            Err(ConfigError::Invalid(format!("{name} must be [lo, hi] with lo < hi, got [{lo}, {hi}]")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.preset, &self.rhs) {
            (Some(_), Some(_)) => return Err(ConfigError::Invalid("set either preset or rhs, not both".into())),
            (None, Some(_)) if self.order.is_none() => {
                return Err(ConfigError::Invalid("rhs needs order = 1 or 2".into()))
            }
            (None, None) if !self.params.is_empty() => {
                return Err(ConfigError::Invalid("params only apply to a preset".into()))
            }
            _ => {}
        }
        if let Some(o) = self.order {
            if Order::from_dim(o).is_none() {
                return Err(ConfigError::Invalid(format!("order must be 1 or 2, got {o}")));
            }
        }
        if let Some(s) = &self.signal {
            if SignalKind::from_name(s).is_none() {
                return Err(ConfigError::Invalid(format!("unknown signal '{s}' (sine, abs_sine, constant)")));
            }
        }
        positive("omega", self.omega)?;
        positive("duration", self.duration)?;
        positive("closure_tol", self.closure_tol)?;
        positive("slope_threshold", self.slope_threshold)?;
        positive("jump_height_fraction", self.jump_height_fraction)?;
        positive("degenerate_fraction", self.degenerate_fraction)?;
        positive("rate_tolerance", self.rate_tolerance)?;
        if let Some(ws) = &self.omegas {
            for &w in ws {
                positive("every entry of omegas", Some(w))?;
            }
        }
        if let Some(l) = self.level {
            if !l.is_finite() {
                return Err(ConfigError::Invalid(format!("level must be finite, got {l}")));
            }
        }
        interval("search_interval", self.search_interval)?;
        interval("input_range", self.input_range)?;
        if self.periods == Some(0) {
            return Err(ConfigError::Invalid("periods must be at least 1".into()));
        }
        if self.periods == Some(1) && self.omegas.is_some() {
            return Err(ConfigError::Invalid("a sweep needs periods >= 2 so one period can settle".into()));
        }
        Ok(())
    }

    /// Instantiates the selected model.
    pub fn model(&self) -> Result<ModelSpec, ConfigError> {
        let mut model = match (&self.preset, &self.rhs) {
            (Some(name), None) => {
                let ov: Overrides = self.params.iter().map(|(k, v)| (k.clone(), v.text())).collect();
                preset(name, &ov)?
            }
            (None, Some(rhs)) => {
                let order = Order::from_dim(self.order.unwrap_or(1))
                    .ok_or_else(|| ConfigError::Invalid("order must be 1 or 2".into()))?;
                let init = self.init.clone().unwrap_or_else(|| vec![0.0; order.dim()]);
                let mut m = build_model(order, rhs, &init)?;
                if let Some(lt) = &self.limit_rhs {
                    m = m.with_limit(crate::expr::parse(lt).map_err(ModelError::from)?.simplify());
                }
                m
            }
            _ => return Err(ConfigError::Invalid("no model: set preset or rhs".into())),
        };
        if let (Some(init), Some(_)) = (&self.init, &self.preset) {
            if init.len() != model.order.dim() {
                return Err(ModelError::InitialState { order: model.order.dim(), got: init.len() }.into());
            }
            model.initial_state = init.clone();
        }
        if let Some(kind) = self.signal.as_deref().and_then(SignalKind::from_name) {
            model = model.with_signal_kind(kind);
        }
        if let Some([lo, hi]) = self.search_interval {
            model = model.with_search_interval(lo, hi);
        }
        if let Some([lo, hi]) = self.input_range {
            model = model.with_input_range(lo, hi);
        }
        Ok(model)
    }

    pub fn loop_options(&self) -> LoopOptions {
        let d = LoopOptions::default();
        LoopOptions {
            closure_tol: self.closure_tol.unwrap_or(d.closure_tol),
            slope_threshold: self.slope_threshold.unwrap_or(d.slope_threshold),
            jump_height_fraction: self.jump_height_fraction.unwrap_or(d.jump_height_fraction),
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        let d = SweepOptions::default();
        SweepOptions {
            periods: self.periods.unwrap_or(d.periods),
            steps_per_period: self.steps_per_period.unwrap_or(d.steps_per_period),
            max_refinements: self.max_refinements.unwrap_or(d.max_refinements),
            loop_options: self.loop_options(),
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            unbounded_exponent: self.unbounded_exponent.unwrap_or(d.unbounded_exponent),
            degenerate_fraction: self.degenerate_fraction.unwrap_or(d.degenerate_fraction),
            shrink_exponent: self.shrink_exponent.unwrap_or(d.shrink_exponent),
            rate_tolerance: self.rate_tolerance.unwrap_or(d.rate_tolerance),
        }
    }

    pub fn newton_options(&self) -> NewtonOptions {
        let d = NewtonOptions::default();
        NewtonOptions { seeds_per_axis: self.newton_seeds.unwrap_or(d.seeds_per_axis), ..d }
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.omegas.clone().unwrap_or_else(|| DEFAULT_OMEGAS.to_vec())
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n.unwrap_or(2000)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
