//! Built-in example systems.
//!
//! Each preset is a right-hand-side template whose `{name}` placeholders are
//! replaced by parameter text before parsing, so parameters end up as
//! constants (or, for coefficient functions such as `p`, sub-expressions).

use super::{from_expr, ModelError, ModelSpec, Order, Overrides};
use crate::expr::{parse, Env};
use crate::signal::SignalKind;

#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub family: &'static str,
    pub order: Order,
    pub template: &'static str,
    /// Template of the `t -> inf` limit system, if the time dependence decays.
    pub limit_template: Option<&'static str>,
    /// Parameter defaults, including the initial state keys (`x0` for first
    /// order, `y0`/`y1` for second order).
    pub params: &'static [(&'static str, &'static str)],
    pub signal: SignalKind,
    pub search_interval: (f64, f64),
    pub input_range: (f64, f64),
}

const SCALAR: (f64, f64) = (-5.0, 5.0);
const UNIT: (f64, f64) = (-1.0, 1.0);

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "folode_const_a",
        family: "first-order linear, constant a",
        order: Order::First,
        template: "{a}*x + abs(du)*u",
        limit_template: None,
        params: &[("a", "-0.1"), ("x0", "1")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_a0_u",
        family: "first-order linear, a = 0, b = u",
        order: Order::First,
        template: "u",
        limit_template: None,
        params: &[("x0", "-1")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_a0_abs",
        family: "first-order linear, a = 0, b = |du| u",
        order: Order::First,
        template: "abs(du)*u",
        limit_template: None,
        params: &[("x0", "0.5")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_exp",
        family: "first-order linear, a = -exp(-t)",
        order: Order::First,
        template: "-exp(-t)*x + abs(du)*u",
        limit_template: Some("abs(du)*u"),
        params: &[("x0", "0.5")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_rational",
        family: "first-order linear, a = -1/(t+1)",
        order: Order::First,
        template: "-1/(t + 1)*x + abs(du)*u",
        limit_template: Some("abs(du)*u"),
        params: &[("x0", "0.5")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_t",
        family: "first-order linear, a = -t",
        order: Order::First,
        template: "-t*x + abs(du)*u",
        limit_template: None,
        params: &[("x0", "0.5")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "folode_rational_shift",
        family: "first-order linear, a = -1/(t+1) + 1",
        order: Order::First,
        template: "(-1/(t + 1) + 1)*x + abs(du)*u",
        limit_template: None,
        params: &[("x0", "0.5")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "duhem",
        family: "first-order Duhem",
        order: Order::First,
        template: "{alpha}*abs(du)*({beta}*u - x) + {gamma}*du",
        limit_template: None,
        params: &[("alpha", "0.5"), ("beta", "0.5"), ("gamma", "1"), ("x0", "0")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "solode",
        family: "second-order linear, y'' + p y' + q y = b",
        order: Order::Second,
        template: "-({p})*x2 - ({q})*x1 + {b}",
        limit_template: Some("-({p_limit})*x2 - ({q})*x1 + {b}"),
        params: &[
            ("p", "exp(-t) + 1"),
            ("p_limit", "1"),
            ("q", "1"),
            ("b", "abs(du)*u"),
            ("y0", "1"),
            ("y1", "0"),
        ],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "duhem2d",
        family: "second-order Duhem-like",
        order: Order::Second,
        template: "-({p})*x2 - {alpha}*abs(du)*x1 + {alpha}*{beta}*abs(du)*u + {gamma}*du",
        limit_template: Some(
            "-({p_limit})*x2 - {alpha}*abs(du)*x1 + {alpha}*{beta}*abs(du)*u + {gamma}*du",
        ),
        params: &[
            ("p", "0.5"),
            ("p_limit", ""),
            ("alpha", "1"),
            ("beta", "1"),
            ("gamma", "0"),
            ("y0", "-0.225"),
            ("y1", "0"),
        ],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "cubic_continuum",
        family: "first-order nonlinear, continuum of equilibria",
        order: Order::First,
        template: "abs(du)*(x - x^3 + u)",
        limit_template: None,
        params: &[("x0", "1")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "cubic",
        family: "first-order nonlinear, cubic",
        order: Order::First,
        template: "x - x^3 + u",
        limit_template: None,
        params: &[("x0", "-1")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "budworm",
        family: "first-order nonlinear, spruce budworm",
        order: Order::First,
        template: "abs(u)*x*(1 - x/{q}) - x^2/(1 + x^2)",
        limit_template: None,
        params: &[("q", "25"), ("x0", "10")],
        signal: SignalKind::AbsSine,
        search_interval: (-1.0, 30.0),
        input_range: (0.0, 1.0),
    },
    PresetInfo {
        name: "pendulum_like",
        family: "second-order nonlinear, damped pendulum",
        order: Order::Second,
        template: "-x2 - 10*sin(x1) + u",
        limit_template: None,
        params: &[("y0", "0"), ("y1", "0")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "sonode15",
        family: "second-order nonlinear, two stable branches",
        order: Order::Second,
        template: "-5*x2 - x1^2*(x1 + 1) + u",
        limit_template: None,
        params: &[("y0", "-1"), ("y1", "0")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
    PresetInfo {
        name: "sonode35",
        family: "second-order nonlinear, three stable branches",
        order: Order::Second,
        template: "-x2 - 20*x1^3*(x1 - 0.3)*(x1 + 0.5) + u",
        limit_template: None,
        params: &[("y0", "-0.56"), ("y1", "0")],
        signal: SignalKind::Sine,
        search_interval: SCALAR,
        input_range: UNIT,
    },
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn preset_info(name: &str) -> Option<&'static PresetInfo> {
    PRESETS.iter().find(|p| p.name == name)
}

fn fill(template: &str, values: &Overrides) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), &format!("({v})"));
    }
    out
}

fn numeric(key: &str, text: &str) -> Result<f64, ModelError> {
    let e = parse(text)?.simplify();
    e.eval(&Env::default())
        .ok()
        .filter(|v| v.is_finite() && !e.contains_any_var())
        .ok_or_else(|| ModelError::NonConstantState { key: key.into(), text: text.into() })
}

/// Instantiates a preset with parameter overrides.
pub fn preset(name: &str, overrides: &Overrides) -> Result<ModelSpec, ModelError> {
    let info = preset_info(name).ok_or_else(|| ModelError::UnknownPreset(name.into()))?;
    let mut values: Overrides =
        info.params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    for (k, v) in overrides {
        if !values.contains_key(k) {
            let known: Vec<&str> = info.params.iter().map(|(k, _)| *k).collect();
            return Err(ModelError::UnknownOverride {
                preset: name.into(),
                key: k.clone(),
                known: known.join(", "),
            });
        }
        values.insert(k.clone(), v.clone());
    }
    let state_keys: &[&str] = match info.order {
        Order::First => &["x0"],
        Order::Second => &["y0", "y1"],
    };
    let initial = state_keys
        .iter()
        .map(|k| numeric(k, &values[*k]))
        .collect::<Result<Vec<_>, _>>()?;
    let rhs = parse(&fill(info.template, &values))?.simplify();
    let mut model = from_expr(name, info.order, rhs, &initial)?
        .with_signal_kind(info.signal)
        .with_search_interval(info.search_interval.0, info.search_interval.1)
        .with_input_range(info.input_range.0, info.input_range.1);
    // A default limit belongs to the default damping; overriding `p` alone
    // leaves the limit unknown.
    let stale = overrides.contains_key("p") && !overrides.contains_key("p_limit");
    let limit_given = !stale && values.get("p_limit").is_none_or(|v| !v.trim().is_empty());
    if let (Some(lt), true, true) = (info.limit_template, limit_given, model.time_varying) {
        let limit = parse(&fill(lt, &values))?.simplify();
        if !limit.contains(crate::expr::Var::T) {
            model.limit_rhs = Some(limit);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Env};
    use crate::model::{freeze, Overrides};

    fn ov(pairs: &[(&str, &str)]) -> Overrides {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn duhem_parameters_are_substituted() {
        let m = preset("duhem", &ov(&[("alpha", "0.5"), ("beta", "0.5"), ("gamma", "1")])).unwrap();
        assert_eq!(m.rhs, parse("0.5*abs(du)*(0.5*u - x) + du").unwrap());
        assert_eq!(m.initial_state, vec![0.0]);
    }

    #[test]
    fn budworm_defaults() {
        let m = preset("budworm", &Overrides::new()).unwrap();
        assert_eq!(m.initial_state, vec![10.0]);
        assert_eq!(m.rhs, parse("abs(u)*x*(1 - x/25) - x^2/(1 + x^2)").unwrap());
        assert_eq!(m.signal_kind, SignalKind::AbsSine);
        assert_eq!(m.search_interval, (-1.0, 30.0));
    }

    #[test]
    fn cubic_defaults() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        assert_eq!(m.initial_state, vec![-1.0]);
        assert_eq!(freeze(&m, 0.0).frozen_rhs.to_text(), "x1 - x1^3");
    }

    #[test]
    fn unknown_preset_and_override() {
        assert!(matches!(preset("nope", &Overrides::new()), Err(ModelError::UnknownPreset(_))));
        assert!(matches!(
            preset("cubic", &ov(&[("alpha", "1")])),
            Err(ModelError::UnknownOverride { .. })
        ));
    }

    #[test]
    fn initial_state_must_be_constant() {
        assert!(preset("cubic", &ov(&[("x0", "t")])).is_err());
        let m = preset("cubic", &ov(&[("x0", "-2*0.5")])).unwrap();
        assert_eq!(m.initial_state, vec![-1.0]);
    }

    #[test]
    fn asymptotic_flags() {
        let none = Overrides::new();
        assert!(preset("folode_exp", &none).unwrap().asymptotic_autonomous());
        assert!(preset("folode_rational", &none).unwrap().asymptotic_autonomous());
        assert!(!preset("folode_t", &none).unwrap().asymptotic_autonomous());
        assert!(!preset("folode_rational_shift", &none).unwrap().asymptotic_autonomous());
        assert!(preset("solode", &none).unwrap().asymptotic_autonomous());
        assert!(!preset("duhem2d", &none).unwrap().time_varying);
        let fig19 = preset("duhem2d", &ov(&[("p", "exp(-t) + 1"), ("p_limit", "1")])).unwrap();
        assert!(fig19.asymptotic_autonomous());
        assert!(preset("duhem2d", &ov(&[("p", "exp(-t) + 1")])).unwrap().limit_rhs.is_none());
    }

    #[test]
    fn every_preset_is_finite_at_its_initial_state() {
        for info in PRESETS {
            let m = preset(info.name, &Overrides::new()).unwrap();
            let x = &m.initial_state;
            let env = Env {
                t: 0.0,
                x1: x[0],
                x2: x.get(1).copied().unwrap_or(0.0),
                u: 0.0,
                du: 1.0,
            };
            let v = m.rhs.eval(&env).unwrap();
            assert!(v.is_finite(), "{}", info.name);
        }
    }
}
