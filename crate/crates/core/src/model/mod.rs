//! ODE systems of order one or two driven by a scalar input.
//!
//! First-order systems are `x1' = rhs`. Second-order systems are kept in
//! companion form: `x1' = x2`, `x2' = rhs`.

mod catalog;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Env, Expr, ParseError, Var};
use crate::signal::SignalKind;

pub use catalog::{preset, preset_names, PresetInfo, PRESETS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn dim(self) -> usize {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }

    pub fn from_dim(dim: usize) -> Option<Order> {
        match dim {
            1 => Some(Order::First),
            2 => Some(Order::Second),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot parse right-hand side: {0}")]
    Parse(#[from] ParseError),
    #[error("first-order right-hand side must not reference x2")]
    X2InFirstOrder,
    #[error("initial state has {got} components, order {order} needs {order}")]
    InitialState { order: usize, got: usize },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("preset '{preset}' has no parameter '{key}' (known: {known})")]
    UnknownOverride { preset: String, key: String, known: String },
    #[error("initial-state parameter '{key}' must be a constant expression, got '{text}'")]
    NonConstantState { key: String, text: String },
    #[error("system is time-varying; use asymptotic analysis or simulation only")]
    TimeVarying,
}

/// A validated ODE system.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub order: Order,
    pub rhs: Expr,
    pub initial_state: Vec<f64>,
    /// True iff `rhs` references `t`.
    pub time_varying: bool,
    /// Right-hand side of the `t -> inf` limit system, for models whose time
    /// dependence dies out.
    pub limit_rhs: Option<Expr>,
    /// Input shape the model is normally driven with.
    pub signal_kind: SignalKind,
    /// Default state interval for equilibrium search.
    pub search_interval: (f64, f64),
    /// Default range of constant inputs for bifurcation analysis.
    pub input_range: (f64, f64),
}

impl ModelSpec {
    pub fn asymptotic_autonomous(&self) -> bool {
        self.limit_rhs.is_some()
    }

    /// Right-hand side used for equilibrium analysis: the model itself when
    /// autonomous, its limit system when the time dependence vanishes.
    pub fn analysis_rhs(&self) -> Result<&Expr, ModelError> {
        if !self.time_varying {
            Ok(&self.rhs)
        } else {
            self.limit_rhs.as_ref().ok_or(ModelError::TimeVarying)
        }
    }

    pub fn with_limit(mut self, limit: Expr) -> Self {
        self.limit_rhs = Some(limit);
        self
    }

    pub fn with_signal_kind(mut self, kind: SignalKind) -> Self {
        self.signal_kind = kind;
        self
    }

    pub fn with_search_interval(mut self, lo: f64, hi: f64) -> Self {
        self.search_interval = (lo, hi);
        self
    }

    pub fn with_input_range(mut self, lo: f64, hi: f64) -> Self {
        self.input_range = (lo, hi);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Evaluates the state derivative.
    pub fn derivative(&self, env: &Env) -> Result<[f64; 2], crate::expr::EvalError> {
        let f = self.rhs.eval(env)?;
        Ok(match self.order {
            Order::First => [f, 0.0],
            Order::Second => [env.x2, f],
        })
    }
}

/// Builds and validates a model from right-hand-side text.
pub fn build_model(order: Order, rhs_text: &str, initial_state: &[f64]) -> Result<ModelSpec, ModelError> {
    let rhs = parse(rhs_text)?.simplify();
    from_expr("custom", order, rhs, initial_state)
}

pub(crate) fn from_expr(
    name: &str,
    order: Order,
    rhs: Expr,
    initial_state: &[f64],
) -> Result<ModelSpec, ModelError> {
    if order == Order::First && rhs.contains(Var::X2) {
        return Err(ModelError::X2InFirstOrder);
    }
    if initial_state.len() != order.dim() {
        return Err(ModelError::InitialState { order: order.dim(), got: initial_state.len() });
    }
    Ok(ModelSpec {
        name: name.to_string(),
        order,
        time_varying: rhs.contains(Var::T),
        rhs,
        initial_state: initial_state.to_vec(),
        limit_rhs: None,
        signal_kind: SignalKind::Sine,
        search_interval: (-5.0, 5.0),
        input_range: (-1.0, 1.0),
    })
}

/// The system with its input held at a constant level.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenSystem {
    pub order: Order,
    /// `rhs` with `u := level`, `du := 0`, simplified.
    pub frozen_rhs: Expr,
    pub level: f64,
}

impl FrozenSystem {
    pub fn time_varying(&self) -> bool {
        self.frozen_rhs.contains(Var::T)
    }

    /// Scalar function whose roots are the equilibria: the frozen rhs in
    /// `x1`, with `x2 = 0` for second-order systems.
    pub fn equilibrium_function(&self) -> Expr {
        match self.order {
            Order::First => self.frozen_rhs.clone(),
            Order::Second => self.frozen_rhs.substitute(Var::X2, &Expr::Const(0.0)).simplify(),
        }
    }
}

/// Substitutes a constant input into an arbitrary right-hand side.
pub fn freeze_expr(rhs: &Expr, level: f64) -> Expr {
    rhs.substitute(Var::U, &Expr::Const(level))
        .substitute(Var::Du, &Expr::Const(0.0))
        .simplify()
}

pub fn freeze(model: &ModelSpec, level: f64) -> FrozenSystem {
    FrozenSystem { order: model.order, frozen_rhs: freeze_expr(&model.rhs, level), level }
}

/// True iff every state is an equilibrium of the frozen system.
///
/// For second-order systems the test is on `f(x1, 0)`, since equilibria
/// always have `x2 = 0`. A symbolic zero is confirmed numerically at 64
/// pseudo-random states.
pub fn is_continuum(frozen: &FrozenSystem) -> Result<bool, ModelError> {
    if frozen.time_varying() {
        return Err(ModelError::TimeVarying);
    }
    let g = frozen.equilibrium_function();
    if !g.is_zero() {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let env = Env { x1: rng.gen_range(-10.0..10.0), ..Env::default() };
        match g.eval(&env) {
            Ok(v) if v.abs() < 1e-12 => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Parameter overrides for presets: name to expression text.
pub type Overrides = BTreeMap<String, String>;
