//! Symbolic differentiation and algebraic clean-up.

use super::{sign, Expr, Var};

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Expr {
    /// Exact symbolic derivative with respect to `var`, simplified.
    ///
    /// `d|z| = sign(z) dz` with `sign(0) = 0`, and `sign` itself has zero
    /// derivative.
    pub fn differentiate(&self, var: Var) -> Expr {
        self.derive(var).simplify()
    }

    fn derive(&self, var: Var) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Add(p, q) => Add(b(p.derive(var)), b(q.derive(var))),
            Sub(p, q) => Sub(b(p.derive(var)), b(q.derive(var))),
            Mul(p, q) => Add(
                b(Mul(b(p.derive(var)), q.clone())),
                b(Mul(p.clone(), b(q.derive(var)))),
            ),
            Div(p, q) => Div(
                b(Sub(
                    b(Mul(b(p.derive(var)), q.clone())),
                    b(Mul(p.clone(), b(q.derive(var)))),
                )),
                b(Pow(q.clone(), 2)),
            ),
            Neg(p) => Neg(b(p.derive(var))),
            Pow(_, 0) => Const(0.0),
            Pow(p, n) => Mul(
                b(Mul(b(Const(*n as f64)), b(Pow(p.clone(), n - 1)))),
                b(p.derive(var)),
            ),
            Abs(p) => Mul(b(Sign(p.clone())), b(p.derive(var))),
            Sign(_) => Const(0.0),
            Sin(p) => Mul(b(Cos(p.clone())), b(p.derive(var))),
            Cos(p) => Neg(b(Mul(b(Sin(p.clone())), b(p.derive(var))))),
            Exp(p) => Mul(b(Exp(p.clone())), b(p.derive(var))),
        }
    }

    /// Constant folding plus 0/1 identities and double-negation removal.
    ///
    /// The result evaluates identically to the input wherever the input is
    /// defined. A constant division by zero is left unfolded.
    pub fn simplify(&self) -> Expr {
        use Expr::*;
        match self {
            Const(_) | Var(_) => self.clone(),
            Add(p, q) => match (p.simplify(), q.simplify()) {
                (Const(x), Const(y)) => Const(x + y),
                (e, Const(z)) | (Const(z), e) if z == 0.0 => e,
                (e, Neg(n)) => Sub(b(e), n).simplify_shallow(),
                (e, f) => Add(b(e), b(f)),
            },
            Sub(p, q) => match (p.simplify(), q.simplify()) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(z)) if z == 0.0 => e,
                (Const(z), e) if z == 0.0 => Neg(b(e)).simplify_shallow(),
                (e, f) if e == f => Const(0.0),
                (e, Neg(n)) => Add(b(e), n),
                (e, f) => Sub(b(e), b(f)),
            },
            Mul(p, q) => match (p.simplify(), q.simplify()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
                (e, Const(z)) | (Const(z), e) if z == 1.0 => e,
                (e, Const(z)) | (Const(z), e) if z == -1.0 => Neg(b(e)).simplify_shallow(),
                (Neg(m), Neg(n)) => Mul(m, n),
                (e, f) => Mul(b(e), b(f)),
            },
            Div(p, q) => match (p.simplify(), q.simplify()) {
                (Const(x), Const(y)) if y != 0.0 => Const(x / y),
                (Const(z), f) if z == 0.0 && !f.is_zero() => Const(0.0),
                (e, Const(z)) if z == 1.0 => e,
                (e, f) => Div(b(e), b(f)),
            },
            Neg(p) => Neg(b(p.simplify())).simplify_shallow(),
            Pow(p, n) => match (p.simplify(), *n) {
                (_, 0) => Const(1.0),
                (e, 1) => e,
                (Const(x), n) => Const(super::powi(x, n)),
                (e, n) => Pow(b(e), n),
            },
            Abs(p) => match p.simplify() {
                Const(x) => Const(x.abs()),
                Abs(inner) => Abs(inner),
                Neg(inner) => Abs(inner),
                e => Abs(b(e)),
            },
            Sign(p) => match p.simplify() {
                Const(x) => Const(sign(x)),
                e => Sign(b(e)),
            },
            Sin(p) => match p.simplify() {
                Const(x) => Const(x.sin()),
                e => Sin(b(e)),
            },
            Cos(p) => match p.simplify() {
                Const(x) => Const(x.cos()),
                e => Cos(b(e)),
            },
            Exp(p) => match p.simplify() {
                Const(x) => Const(x.exp()),
                e => Exp(b(e)),
            },
        }
    }

    // Rules applied to a node whose children are already simplified.
    fn simplify_shallow(self) -> Expr {
        use Expr::*;
        match self {
            Neg(p) => match *p {
                Const(x) => Const(-x),
                Neg(inner) => *inner,
                e => Neg(b(e)),
            },
            Sub(p, q) => match (*p, *q) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(z)) if z == 0.0 => e,
                (e, f) if e == f => Const(0.0),
                (e, Neg(n)) => Add(b(e), n),
                (e, f) => Sub(b(e), b(f)),
            },
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Env};
    use super::*;

    fn simp(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    #[test]
    fn polynomial_derivative() {
        let d = parse("x - x^3 + u").unwrap().differentiate(Var::X1);
        assert_eq!(d, parse("1 - 3*x^2").unwrap());
        assert_eq!(d.to_text(), "1 - 3*x1^2");
    }

    #[test]
    fn abs_factor_independent_of_state() {
        let d = parse("abs(du)*(x - x^3 + u)").unwrap().differentiate(Var::X1);
        assert_eq!(d, parse("abs(du)*(1 - 3*x^2)").unwrap());
    }

    #[test]
    fn abs_derivative_uses_sign() {
        let d = parse("abs(u)*x").unwrap().differentiate(Var::U);
        assert_eq!(d, parse("sign(u)*x").unwrap());
        let env = Env { x1: 2.0, u: 0.0, ..Env::default() };
        assert_eq!(d.eval(&env).unwrap(), 0.0);
    }

    #[test]
    fn identities() {
        assert_eq!(simp("0*sin(t) + x"), parse("x").unwrap());
        assert_eq!(simp("x - x"), Expr::Const(0.0));
        assert_eq!(simp("--x"), parse("x").unwrap());
        assert_eq!(simp("1*x/1"), parse("x").unwrap());
        assert_eq!(simp("2*3 + 1"), Expr::Const(7.0));
        assert_eq!(simp("-(3)"), Expr::Const(-3.0));
        assert_eq!(simp("x^1 + x^0"), parse("x + 1").unwrap());
        assert_eq!(simp("abs(-x)"), parse("abs(x)").unwrap());
    }

    #[test]
    fn independent_variable_derivative_is_zero() {
        let d = parse("u*x").unwrap().differentiate(Var::X2);
        assert_eq!(d, Expr::Const(0.0));
    }

    #[test]
    fn constant_division_by_zero_not_folded() {
        let e = simp("1/(1 - 1)");
        assert!(matches!(e, Expr::Div(..)));
        assert!(e.eval(&Env::default()).is_err());
    }

    #[test]
    fn quotient_rule() {
        let d = parse("x^2/(1 + x^2)").unwrap().differentiate(Var::X1);
        let env = Env { x1: 1.0, ..Env::default() };
        // d/dx x^2/(1+x^2) = 2x/(1+x^2)^2 -> 0.5 at x = 1
        assert!((d.eval(&env).unwrap() - 0.5).abs() < 1e-15);
    }
}
