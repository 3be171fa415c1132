//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Binary operators
//! associate to the left. Functions `abs`, `sign`, `sin`, `cos`, `exp` take one
//! parenthesized argument.

use thiserror::Error;

use super::{Expr, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("exponent must be a non-negative integer literal")]
    BadExponent,
    #[error("chained exponents must be parenthesized")]
    ChainedExponent,
    #[error("invalid number '{0}'")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_, s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => toks.push((i, Tok::Plus)),
            '-' => toks.push((i, Tok::Minus)),
            '*' => toks.push((i, Tok::Star)),
            '/' => toks.push((i, Tok::Slash)),
            '^' => toks.push((i, Tok::Caret)),
            '(' => toks.push((i, Tok::LParen)),
            ')' => toks.push((i, Tok::RParen)),
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Optional exponent part: e, E followed by optional sign and digits.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::BadNumber(s.to_string()),
                })?;
                toks.push((start, Tok::Num(v, s.to_string())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                let ch = text[i..].chars().next().unwrap_or(other);
                return Err(ParseError { pos: i, kind: ParseErrorKind::UnexpectedChar(ch) });
            }
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { pos: self.pos(), kind }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.idx += 1;
                Ok(())
            }
            Some(t) => Err(self.err(ParseErrorKind::UnexpectedToken(t.describe()))),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                // A minus directly on a literal is a negative literal, unless
                // the literal is a power base (`-2^2` is `-(2^2)`).
                if let Some(Tok::Num(v, _)) = self.peek_at(1) {
                    if self.peek_at(2) != Some(&Tok::Caret) {
                        let v = *v;
                        self.idx += 2;
                        return Ok(Expr::Const(-v));
                    }
                }
                self.idx += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.idx += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.idx += 1;
        let n = self.exponent()?;
        if self.peek() == Some(&Tok::Caret) {
            return Err(self.err(ParseErrorKind::ChainedExponent));
        }
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let pos = self.pos();
        let bad = || ParseError { pos, kind: ParseErrorKind::BadExponent };
        let parenthesized = self.peek() == Some(&Tok::LParen);
        if parenthesized {
            self.idx += 1;
        }
        let n = match self.next() {
            Some(Tok::Num(v, _)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                v as u32
            }
            _ => return Err(bad()),
        };
        if parenthesized {
            self.expect(Tok::RParen).map_err(|_| bad())?;
        }
        Ok(n)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(v, _)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let func: Option<fn(Box<Expr>) -> Expr> = match name.as_str() {
                    "abs" => Some(Expr::Abs),
                    "sign" => Some(Expr::Sign),
                    "sin" => Some(Expr::Sin),
                    "cos" => Some(Expr::Cos),
                    "exp" => Some(Expr::Exp),
                    _ => None,
                };
                if let Some(build) = func {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(build(Box::new(arg)));
                }
                match Var::from_name(&name) {
                    Some(v) => Ok(Expr::Var(v)),
                    None => Err(ParseError { pos, kind: ParseErrorKind::UnknownIdentifier(name) }),
                }
            }
            Some(t) => Err(ParseError { pos, kind: ParseErrorKind::UnexpectedToken(t.describe()) }),
            None => Err(ParseError { pos, kind: ParseErrorKind::UnexpectedEnd }),
        }
    }
}

/// Parses an expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError { pos: 0, kind: ParseErrorKind::Empty });
    }
    let mut p = Parser { toks, idx: 0, end: text.len() };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(p.err(ParseErrorKind::UnexpectedToken(t.describe())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Box<Expr> {
        Box::new(Expr::Var(Var::X1))
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0").unwrap(), Expr::Const(0.0));
    }

    #[test]
    fn left_associative_sum() {
        let e = parse("x - x^3 + u").unwrap();
        let want = Expr::Add(
            Box::new(Expr::Sub(x(), Box::new(Expr::Pow(x(), 3)))),
            Box::new(Expr::Var(Var::U)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        assert_eq!(parse("-x^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(x(), 2))));
        assert_eq!(
            parse("-2^2").unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Const(2.0)), 2)))
        );
        assert_eq!(parse("-2").unwrap(), Expr::Const(-2.0));
    }

    #[test]
    fn unary_minus_binds_tighter_than_product() {
        assert_eq!(
            parse("-x*u").unwrap(),
            Expr::Mul(Box::new(Expr::Neg(x())), Box::new(Expr::Var(Var::U)))
        );
    }

    #[test]
    fn x_is_alias_of_x1() {
        assert_eq!(parse("x").unwrap(), parse("x1").unwrap());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1e-3").unwrap(), Expr::Const(1e-3));
        assert_eq!(parse("2.5E2").unwrap(), Expr::Const(250.0));
    }

    #[test]
    fn variable_exponent_rejected() {
        let err = parse("x ^ u").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadExponent);
        assert_eq!(err.pos, 4);
    }

    #[test]
    fn fractional_and_negative_exponents_rejected() {
        assert_eq!(parse("x^2.5").unwrap_err().kind, ParseErrorKind::BadExponent);
        assert_eq!(parse("x^-1").unwrap_err().kind, ParseErrorKind::BadExponent);
        assert_eq!(parse("x^(3)").unwrap(), Expr::Pow(x(), 3));
    }

    #[test]
    fn unknown_identifier_reports_position() {
        let err = parse("x + y").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.pos, 4);
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse("x +").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse("(x").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse("x)").unwrap_err().pos, 1);
        assert_eq!(parse("x $ 1").unwrap_err().kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(parse("x^2^3").unwrap_err().kind, ParseErrorKind::ChainedExponent);
    }

    #[test]
    fn functions() {
        assert_eq!(parse("abs(du)").unwrap(), Expr::Abs(Box::new(Expr::Var(Var::Du))));
        assert!(parse("sin x").is_err());
    }
}
