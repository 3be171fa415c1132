//! A small expression language for ODE right-hand sides.
//!
//! Expressions range over five variables: time `t`, the state components
//! `x1` and `x2` (`x` is accepted as an alias for `x1`), the input `u` and
//! its time derivative `du`. Exponents are restricted to non-negative
//! integer literals so every supported right-hand side stays real-valued.

mod calculus;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};

/// Variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    T,
    X1,
    X2,
    U,
    Du,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::T, Var::X1, Var::X2, Var::U, Var::Du];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::U => "u",
            Var::Du => "du",
        }
    }

    /// Resolves an identifier, accepting `x` as an alias of `x1`.
    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "x" | "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "u" => Some(Var::U),
            "du" => Some(Var::Du),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree.
///
/// `Sign` only arises from differentiating `Abs`; it evaluates to -1, 0 or 1
/// with `sign(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Sign(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

/// Variable bindings for evaluation. Unused names may hold any value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Env {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub u: f64,
    pub du: f64,
}

impl Env {
    pub fn get(&self, var: Var) -> f64 {
        match var {
            Var::T => self.t,
            Var::X1 => self.x1,
            Var::X2 => self.x2,
            Var::U => self.u,
            Var::Du => self.du,
        }
    }

    pub fn with(mut self, var: Var, value: f64) -> Env {
        match var {
            Var::T => self.t = value,
            Var::X1 => self.x1 = value,
            Var::X2 => self.x2 = value,
            Var::U => self.u = value,
            Var::Du => self.du = value,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
}

pub(crate) fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(var: Var) -> Expr {
        Expr::Var(var)
    }

    /// IEEE double evaluation. Only an exactly zero denominator is an error.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => env.get(*v),
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Pow(a, n) => powi(a.eval(env)?, *n),
            Expr::Abs(a) => a.eval(env)?.abs(),
            Expr::Sign(a) => sign(a.eval(env)?),
            Expr::Sin(a) => a.eval(env)?.sin(),
            Expr::Cos(a) => a.eval(env)?.cos(),
            Expr::Exp(a) => a.eval(env)?.exp(),
        })
    }

    /// True if `var` occurs anywhere in the tree.
    pub fn contains(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains(var) || b.contains(var)
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Abs(a)
            | Expr::Sign(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a) => a.contains(var),
        }
    }

    pub fn contains_any_var(&self) -> bool {
        Var::ALL.iter().any(|v| self.contains(*v))
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        self.map_vars(&|v| if v == var { Some(with.clone()) } else { None })
    }

    fn map_vars(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        let un = |a: &Expr| Box::new(a.map_vars(f));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => f(*v).unwrap_or(Expr::Var(*v)),
            Expr::Add(a, b) => Expr::Add(un(a), un(b)),
            Expr::Sub(a, b) => Expr::Sub(un(a), un(b)),
            Expr::Mul(a, b) => Expr::Mul(un(a), un(b)),
            Expr::Div(a, b) => Expr::Div(un(a), un(b)),
            Expr::Neg(a) => Expr::Neg(un(a)),
            Expr::Pow(a, n) => Expr::Pow(un(a), *n),
            Expr::Abs(a) => Expr::Abs(un(a)),
            Expr::Sign(a) => Expr::Sign(un(a)),
            Expr::Sin(a) => Expr::Sin(un(a)),
            Expr::Cos(a) => Expr::Cos(un(a)),
            Expr::Exp(a) => Expr::Exp(un(a)),
        }
    }

    /// Visits every `Abs` argument, used to keep random probes off kinks.
    pub fn abs_arguments(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_abs(&mut out);
        out
    }

    fn collect_abs<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_abs(out);
                b.collect_abs(out);
            }
            Expr::Abs(a) | Expr::Sign(a) => {
                out.push(a);
                a.collect_abs(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.collect_abs(out)
            }
        }
    }

    /// Canonical text form; `parse(e.to_text())` rebuilds the same tree for
    /// simplified expressions.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }
}

fn powi(base: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

// Binding strength used by the printer: higher binds tighter.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_const(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mag = c.abs();
    if mag != 0.0 && !(1e-5..1e16).contains(&mag) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

fn fmt_child(child: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = precedence(self);
        match self {
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                // Left-associative: the right operand needs parentheses at
                // equal precedence.
                fmt_child(a, precedence(a) < p, f)?;
                f.write_str(op)?;
                fmt_child(b, precedence(b) <= p, f)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                // `-3` would re-parse as a literal, so keep Neg(Const) explicit.
                let parens = precedence(a) < 4 || matches!(**a, Expr::Const(_));
                fmt_child(a, parens, f)
            }
            Expr::Pow(a, n) => {
                fmt_child(a, precedence(a) <= 4, f)?;
                write!(f, "^{n}")
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Sign(a) => write!(f, "sign({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_negative_constant() {
        assert_eq!(Expr::Const(-1.0).to_text(), "-1");
    }

    #[test]
    fn prints_integer_power() {
        let e = Expr::Pow(Box::new(Expr::Var(Var::X1)), 3);
        assert_eq!(e.to_text(), "x1^3");
    }

    #[test]
    fn eval_equilibrium_identity() {
        let e = parse("x - x^3 + u").unwrap();
        let env = Env { x1: 1.0, ..Env::default() };
        assert_eq!(e.eval(&env).unwrap(), 0.0);
    }

    #[test]
    fn eval_pole_is_an_error() {
        let e = parse("1/(t+1)").unwrap();
        let env = Env { t: -1.0, ..Env::default() };
        assert_eq!(e.eval(&env), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn eval_budworm_equilibrium() {
        let e = parse("abs(u)*x*(1 - x/25) - x^2/(1 + x^2)").unwrap();
        let env = Env { x1: 22.90502477, u: 0.52, ..Env::default() };
        assert!(e.eval(&env).unwrap().abs() < 1e-6);
    }

    #[test]
    fn substitute_replaces_all_occurrences() {
        let e = parse("u*x + u").unwrap();
        let s = e.substitute(Var::U, &Expr::Const(2.0));
        assert!(!s.contains(Var::U));
        let env = Env { x1: 3.0, ..Env::default() };
        assert_eq!(s.eval(&env).unwrap(), 8.0);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        let e = Expr::Sign(Box::new(Expr::Var(Var::Du)));
        assert_eq!(e.eval(&Env::default()).unwrap(), 0.0);
    }
}
