//! Sufficient conditions under which a model cannot be hysteretic because
//! it is never multistable.

use serde::Serialize;

use crate::expr::{Env, Expr, Var};
use crate::model::{ModelError, ModelSpec, Order};

use super::{find_equilibria, EquilibriumError, Stability};

/// Why hysteresis is ruled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpossibilityRule {
    /// First order, linear in `x` with a nonzero constant coefficient.
    ConstantLinearCoefficient,
    /// Second order, linear, with a nonzero constant coefficient on `x1`.
    ConstantStiffness,
    /// Second order, linear, with a damping coefficient that goes negative.
    NegativeDamping,
    /// Every input level gives a continuum that moving inputs destabilize.
    UnstableContinuum,
    /// First order with fewer than two stable equilibria at every level.
    FewerThanTwoStableScalar,
    /// Second order with fewer than two stable equilibria at every level.
    FewerThanTwoStablePlanar,
}

impl ImpossibilityRule {
    pub fn describe(self) -> &'static str {
        match self {
            ImpossibilityRule::ConstantLinearCoefficient => "linear first-order system with nonzero constant coefficient",
            ImpossibilityRule::ConstantStiffness => "linear second-order system with nonzero constant stiffness",
            ImpossibilityRule::NegativeDamping => "linear second-order system whose damping is negative for some t",
            ImpossibilityRule::UnstableContinuum => "continuum of equilibria that is unstable under moving input",
            ImpossibilityRule::FewerThanTwoStableScalar => "first-order system with at most one stable equilibrium",
            ImpossibilityRule::FewerThanTwoStablePlanar => "second-order system with at most one stable equilibrium",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MultistabilityVerdict {
    /// Hysteresis is ruled out.
    Impossible { rule: ImpossibilityRule },
    /// Multistability found at `level`. Necessary for hysteresis, not
    /// sufficient.
    NecessaryConditionMet { level: f64 },
}

fn free_of(e: &Expr, vars: &[Var]) -> bool {
    vars.iter().all(|&v| !e.contains(v))
}

fn nonzero_constant(e: &Expr) -> bool {
    !e.contains_any_var() && e.eval(&Env::default()).is_ok_and(|v| v != 0.0 && v.is_finite())
}

/// Applies the impossibility rules in order: coefficient tests on linear
/// models first, then equilibrium counts at each sampled input level.
pub fn multistability_check(
    model: &ModelSpec,
    levels: &[f64],
    interval: (f64, f64),
    grid_n: usize,
) -> Result<MultistabilityVerdict, EquilibriumError> {
    if levels.is_empty() {
        return Err(EquilibriumError::TooFewSamples { min: 1, got: 0 });
    }
    let impossible = |rule| Ok(MultistabilityVerdict::Impossible { rule });
    let states = [Var::X1, Var::X2];
    let d1 = model.rhs.differentiate(Var::X1);
    match model.order {
        Order::First => {
            if free_of(&d1, &states) && nonzero_constant(&d1) {
                return impossible(ImpossibilityRule::ConstantLinearCoefficient);
            }
        }
        Order::Second => {
            let d2 = model.rhs.differentiate(Var::X2);
            if free_of(&d1, &states) && free_of(&d2, &states) {
                if nonzero_constant(&d1) {
                    return impossible(ImpossibilityRule::ConstantStiffness);
                }
                if free_of(&d2, &[Var::U, Var::Du]) {
                    // damping p(t) = -d2
                    let negative = (0..=1000).any(|i| {
                        let env = Env { t: i as f64 * 0.1, ..Env::default() };
                        d2.eval(&env).is_ok_and(|v| -v < 0.0)
                    });
                    if negative {
                        return impossible(ImpossibilityRule::NegativeDamping);
                    }
                }
            }
        }
    }
    if model.time_varying && model.limit_rhs.is_none() {
        return Err(ModelError::TimeVarying.into());
    }
    let mut all_continua_unstable = true;
    for &level in levels {
        let rep = find_equilibria(model, level, interval, grid_n)?;
        if rep.multistable {
            return Ok(MultistabilityVerdict::NecessaryConditionMet { level });
        }
        if rep.continuum_stability != Some(Stability::Unstable) {
            all_continua_unstable = false;
        }
    }
    impossible(match (all_continua_unstable, model.order) {
        (true, _) => ImpossibilityRule::UnstableContinuum,
        (false, Order::First) => ImpossibilityRule::FewerThanTwoStableScalar,
        (false, Order::Second) => ImpossibilityRule::FewerThanTwoStablePlanar,
    })
}
