//! A small closed-form expression language for config-defined maps and
//! homotopies, evaluated entirely through the interval module so the rigor
//! boundary stays auditable.
//!
//! Grammar: `+ - * /`, `^` with a nonnegative integer literal exponent,
//! unary minus, parentheses, the functions `sin(e)`, `cos(e)`, `wrap(e)`,
//! `power(e, n)`, decimal and integer literals, named constants, and the
//! variables `alpha`, `beta`, `theta`, `x`, `y`.
//!
//! Integer literals are exact. Other decimal literals are parsed to the
//! nearest float and widened one ulp to each side, so `1.2` denotes a
//! rigorous enclosure of 12/10; exact rationals can be written directly as
//! quotients (`8/5`).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::wrap;
use crate::interval::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("expression evaluation failed: {0}")]
    Eval(#[from] crate::interval::IntervalError),
}

#[derive(Debug, Clone)]
pub enum Expr {
    Const(Interval),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Wrap(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Alpha,
    Beta,
    Theta,
    X,
    Y,
}

/// Variable bindings for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Env {
    pub alpha: Interval,
    pub beta: Interval,
    pub theta: Interval,
    pub x: Interval,
    pub y: Interval,
    pub period: Interval,
}

impl Env {
    pub fn point_free(theta: Interval, x: Interval, y: Interval) -> Env {
        Env {
            alpha: Interval::point(0.0),
            beta: Interval::point(0.0),
            theta,
            x,
            y,
            period: Interval::TWO_PI,
        }
    }
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<Interval, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::Alpha) => env.alpha,
            Expr::Var(Var::Beta) => env.beta,
            Expr::Var(Var::Theta) => env.theta,
            Expr::Var(Var::X) => env.x,
            Expr::Var(Var::Y) => env.y,
            Expr::Add(a, b) => a.eval(env)?.add(b.eval(env)?),
            Expr::Sub(a, b) => a.eval(env)?.sub(b.eval(env)?),
            Expr::Mul(a, b) => a.eval(env)?.mul(b.eval(env)?),
            Expr::Div(a, b) => a.eval(env)?.div(b.eval(env)?)?,
            Expr::Neg(a) => a.eval(env)?.neg(),
            Expr::Pow(a, n) => a.eval(env)?.power(*n),
            Expr::Sin(a) => a.eval(env)?.sin(),
            Expr::Cos(a) => a.eval(env)?.cos(),
            Expr::Wrap(a) => wrap(a.eval(env)?, env.period),
        })
    }

    /// `(1-alpha) * self + alpha * other`; used to synthesize the standard
    /// interpolation homotopy from a plain map definition.
    pub fn interpolate_to(self, other: Expr) -> Expr {
        let one_minus = Expr::Sub(
            Box::new(Expr::Const(Interval::point(1.0))),
            Box::new(Expr::Var(Var::Alpha)),
        );
        Expr::Add(
            Box::new(Expr::Mul(Box::new(one_minus), Box::new(self))),
            Box::new(Expr::Mul(
                Box::new(Expr::Var(Var::Alpha)),
                Box::new(other),
            )),
        )
    }
}

/// Parses an expression with the given named constants in scope.
pub fn parse(src: &str, constants: &BTreeMap<String, Interval>) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        constants,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    constants: &'a BTreeMap<String, Interval>,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let mut base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.uint()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u32, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a nonnegative integer exponent"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u32>()
            .map_err(|_| self.err("exponent out of range"))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("expected a number, name, or `(`")),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let mut saw_dot = false;
        let mut saw_exp = false;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == b'.' && !saw_dot && !saw_exp {
                saw_dot = true;
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && !saw_exp && self.pos > start {
                saw_exp = true;
                self.pos += 1;
                if self.src.get(self.pos) == Some(&b'+') || self.src.get(self.pos) == Some(&b'-')
                {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(Expr::Const(parse_literal(text).ok_or_else(|| {
            self.err(&format!("bad numeric literal `{text}`"))
        })?))
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
        match name.as_str() {
            "sin" | "cos" | "wrap" => {
                if !self.eat(b'(') {
                    return Err(self.err(&format!("`{name}` needs an argument list")));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(match name.as_str() {
                    "sin" => Expr::Sin(Box::new(arg)),
                    "cos" => Expr::Cos(Box::new(arg)),
                    _ => Expr::Wrap(Box::new(arg)),
                })
            }
            "power" => {
                if !self.eat(b'(') {
                    return Err(self.err("`power` needs an argument list"));
                }
                let arg = self.expr()?;
                if !self.eat(b',') {
                    return Err(self.err("`power` needs an integer exponent"));
                }
                let n = self.uint()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(Expr::Pow(Box::new(arg), n))
            }
            "alpha" => Ok(Expr::Var(Var::Alpha)),
            "beta" => Ok(Expr::Var(Var::Beta)),
            "theta" => Ok(Expr::Var(Var::Theta)),
            "x" => Ok(Expr::Var(Var::X)),
            "y" => Ok(Expr::Var(Var::Y)),
            "pi" => Ok(Expr::Const(Interval::PI)),
            _ => match self.constants.get(&name) {
                Some(c) => Ok(Expr::Const(*c)),
                None => Err(ExprError::UnknownIdent(name)),
            },
        }
    }
}

/// Parses a numeric literal into a rigorous enclosure: exact for integers
/// representable in an f64, one-ulp outward padding otherwise.
pub fn parse_literal(text: &str) -> Option<Interval> {
    let v: f64 = text.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    let is_integer_text = !text.contains('.') && !text.contains('e') && !text.contains('E');
    if is_integer_text && v.abs() <= 2f64.powi(53) {
        return Some(Interval::point(v));
    }
    // Correctly rounded parse: the exact decimal lies within half an ulp.
    Some(Interval::new(v.next_down(), v.next_up()))
}

/// Parses a scalar parameter: either a quotient of integers (`1/10`), a
/// range (`lo:hi`), or a decimal literal.
pub fn parse_param(text: &str) -> Result<Interval, ExprError> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once(':') {
        let lo = parse_param(lo)?;
        let hi = parse_param(hi)?;
        return Interval::checked(lo.lo(), hi.hi()).map_err(ExprError::Eval);
    }
    parse(text, &BTreeMap::new())?.eval(&Env::point_free(
        Interval::point(0.0),
        Interval::point(0.0),
        Interval::point(0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, env: &Env) -> Interval {
        parse(src, &BTreeMap::new()).unwrap().eval(env).unwrap()
    }

    fn env0() -> Env {
        Env::point_free(
            Interval::point(0.5),
            Interval::point(2.0),
            Interval::point(-1.0),
        )
    }

    #[test]
    fn arithmetic_and_precedence() {
        let e = env0();
        assert!(ev("1 + 2 * 3", &e).contains(7.0));
        assert!(ev("(1 + 2) * 3", &e).contains(9.0));
        assert!(ev("2 * x^3", &e).contains(16.0));
        assert!(ev("-x^2", &e).contains(-4.0));
        assert!(ev("power(x, 3) - 8/5*x", &e).contains(8.0 - 3.2));
    }

    #[test]
    fn rational_literals_are_enclosures() {
        let e = env0();
        let v = ev("1/10", &e);
        assert!(v.lo() <= 0.1 && 0.1 <= v.hi());
        let v = ev("1.2", &e);
        assert!(v.lo() <= 1.2 && 1.2 <= v.hi());
        assert!(v.width() <= 3.0 * f64::EPSILON);
    }

    #[test]
    fn trig_and_wrap() {
        let e = env0();
        assert!(ev("sin(theta)", &e).contains(0.5f64.sin()));
        assert!(ev("cos(theta)", &e).contains(0.5f64.cos()));
        assert!(ev("wrap(3*theta + 7)", &e).contains(8.5 - 2.0 * std::f64::consts::PI));
    }

    #[test]
    fn unknown_identifier_rejected() {
        let err = parse("2 * zeta", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, ExprError::UnknownIdent(_)));
    }

    #[test]
    fn malformed_rejected() {
        assert!(parse("2 *", &BTreeMap::new()).is_err());
        assert!(parse("sin 3", &BTreeMap::new()).is_err());
        assert!(parse("(1 + 2", &BTreeMap::new()).is_err());
        assert!(parse("x ^ y", &BTreeMap::new()).is_err());
    }

    #[test]
    fn named_constants() {
        let mut consts = BTreeMap::new();
        consts.insert("mu".to_string(), Interval::from_ratio(1, 10).unwrap());
        let expr = parse("mu * y", &consts).unwrap();
        let v = expr.eval(&env0()).unwrap();
        assert!(v.contains(-0.1));
    }

    #[test]
    fn param_ranges() {
        let v = parse_param("0:1").unwrap();
        assert_eq!(v.lo(), 0.0);
        assert_eq!(v.hi(), 1.0);
        let v = parse_param("1/3").unwrap();
        assert!(v.contains(1.0 / 3.0));
        assert!(parse_param("pi/3").unwrap().contains(std::f64::consts::FRAC_PI_3));
    }
}
