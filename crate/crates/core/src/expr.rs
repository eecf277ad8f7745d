//! Scalar coefficient expressions in the point coordinates and the boundary distance `d`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | factor
//! factor := base ('^' signed-number)?
//! base   := number | ident | '(' expr ')' | func '(' expr (',' expr)* ')'
//! ident  := d | r | z | x | y | x1 | x2 | x3 | pi
//! func   := min | max | abs | pos | neg
//! ```
//!
//! `pos(e) = max(e, 0)` and `neg(e) = max(-e, 0)`, so `e = pos(e) - neg(e)`.
//! In Cartesian problems `r = sqrt(x1² + x2²)` and `z = x3`; in the axisymmetric
//! reduction of the torus the two mesh coordinates are `(r, z)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    D,
    R,
    Z,
    X1,
    X2,
    X3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
    Pos,
    Neg,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::Pos => "pos",
            Func::Neg => "neg",
        }
    }

    fn arity(self) -> Option<usize> {
        match self {
            Func::Min | Func::Max => None,
            _ => Some(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Minus(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Vec<Expr>),
}

/// Where an expression is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalPoint {
    pub x: [f64; 3],
    pub r: f64,
    pub z: f64,
    pub d: f64,
}

impl EvalPoint {
    /// Point given in Cartesian coordinates of dimension 1..=3.
    pub fn cartesian(p: &[f64], d: f64) -> Self {
        let mut x = [0.0; 3];
        for (o, v) in x.iter_mut().zip(p) {
            *o = *v;
        }
        EvalPoint {
            x,
            r: (x[0] * x[0] + x[1] * x[1]).sqrt(),
            z: x[2],
            d,
        }
    }

    /// Point of a meridian half-plane, `(r, z)`, taken at azimuth 0.
    pub fn cylindrical(r: f64, z: f64, d: f64) -> Self {
        EvalPoint { x: [r, 0.0, z], r, z, d }
    }
}

impl Expr {
    pub fn eval(&self, p: &EvalPoint) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(v) => match v {
                Var::D => p.d,
                Var::R => p.r,
                Var::Z => p.z,
                Var::X1 => p.x[0],
                Var::X2 => p.x[1],
                Var::X3 => p.x[2],
            },
            Expr::Minus(e) => -e.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(b, e) => pow(b.eval(p), *e),
            Expr::Call(f, args) => {
                let mut vals = args.iter().map(|a| a.eval(p));
                match f {
                    Func::Min => vals.fold(f64::INFINITY, f64::min),
                    Func::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                    Func::Abs => vals.next().unwrap().abs(),
                    Func::Pos => pos_part(vals.next().unwrap()),
                    Func::Neg => neg_part(vals.next().unwrap()),
                }
            }
        }
    }

    /// Whether the expression mentions a variable.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Minus(e) | Expr::Pow(e, _) => e.uses(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses(var) || b.uses(var)
            }
            Expr::Call(_, args) => args.iter().any(|a| a.uses(var)),
        }
    }
}

fn pow(b: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 64.0 {
        b.powi(e as i32)
    } else {
        b.powf(e)
    }
}

/// `max(v, 0)`.
pub fn pos_part(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// `max(-v, 0)`.
pub fn neg_part(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        0.0
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(match v {
                Var::D => "d",
                Var::R => "r",
                Var::Z => "z",
                Var::X1 => "x1",
                Var::X2 => "x2",
                Var::X3 => "x3",
            }),
            Expr::Minus(e) => write!(f, "minus({e})"),
            Expr::Add(a, b) => write!(f, "sum({a}, {b})"),
            Expr::Sub(a, b) => write!(f, "diff({a}, {b})"),
            Expr::Mul(a, b) => write!(f, "prod({a}, {b})"),
            Expr::Div(a, b) => write!(f, "quot({a}, {b})"),
            Expr::Pow(b, e) => write!(f, "power({b}, {e})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
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
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                offset: start,
                found: s.to_string(),
                expected: vec!["number".into()],
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap();
            return Err(Error::Parse {
                offset: i,
                found: ch.to_string(),
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Minus(Box::new(e)),
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat('^') {
            let sign = if self.eat('-') {
                -1.0
            } else {
                self.eat('+');
                1.0
            };
            match *self.peek() {
                Tok::Num(v) => {
                    self.pos += 1;
                    return Ok(Expr::Pow(Box::new(base), sign * v));
                }
                _ => return self.fail(&["number", "'-'", "'+'"]),
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail(&["')'", "operator"]);
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "d" => Some(Expr::Var(Var::D)),
                    "r" => Some(Expr::Var(Var::R)),
                    "z" => Some(Expr::Var(Var::Z)),
                    "x" | "x1" => Some(Expr::Var(Var::X1)),
                    "y" | "x2" => Some(Expr::Var(Var::X2)),
                    "x3" => Some(Expr::Var(Var::X3)),
                    "pi" => Some(Expr::Num(std::f64::consts::PI)),
                    _ => None,
                };
                if let Some(v) = var {
                    self.pos += 1;
                    return Ok(v);
                }
                let func = match name.as_str() {
                    "min" => Func::Min,
                    "max" => Func::Max,
                    "abs" => Func::Abs,
                    "pos" => Func::Pos,
                    "neg" => Func::Neg,
                    _ => return self.fail(&["number", "variable", "function", "'('"]),
                };
                self.pos += 1;
                if !self.eat('(') {
                    return self.fail(&["'('"]);
                }
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                let arity_open = self.offset();
                if !self.eat(')') {
                    return self.fail(&["')'", "','"]);
                }
                if let Some(n) = func.arity() {
                    if args.len() != n {
                        return Err(Error::Parse {
                            offset: arity_open,
                            found: format!("{} arguments", args.len()),
                            expected: vec![format!("{n} argument(s) to {}", func.name())],
                        });
                    }
                }
                Ok(Expr::Call(func, args))
            }
            _ => self.fail(&["number", "variable", "function", "'('", "'-'"]),
        }
    }
}

/// A parsed coefficient together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientExpr {
    source: String,
    tree: Expr,
}

impl CoefficientExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        let tree = p.expr()?;
        if *p.peek() != Tok::End {
            return p.fail(&["operator", "end of input"]);
        }
        Ok(CoefficientExpr {
            source: text.trim().to_string(),
            tree,
        })
    }

    pub fn constant(v: f64) -> Self {
        CoefficientExpr {
            source: format!("{v:e}"),
            tree: Expr::Num(v),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }

    pub fn eval(&self, p: &EvalPoint) -> f64 {
        self.tree.eval(p)
    }

    pub fn eval_pos(&self, p: &EvalPoint) -> f64 {
        pos_part(self.eval(p))
    }

    pub fn eval_neg(&self, p: &EvalPoint) -> f64 {
        neg_part(self.eval(p))
    }

    pub fn is_zero(&self) -> bool {
        self.tree == Expr::Num(0.0)
    }

    pub fn uses(&self, var: Var) -> bool {
        self.tree.uses(var)
    }
}

impl std::str::FromStr for CoefficientExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Serialize for CoefficientExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for CoefficientExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CoefficientExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for `parse(...).unwrap()` on literals known to be valid.
pub fn coef(text: &str) -> CoefficientExpr {
    CoefficientExpr::parse(text).unwrap_or_else(|e| panic!("invalid coefficient '{text}': {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_tree() {
        assert_eq!(coef("d^-1.5").tree().to_string(), "power(d, -1.5)");
        assert_eq!(
            coef("-0.125*d^-2 + 5").tree().to_string(),
            "sum(prod(-0.125, power(d, -2)), 5)"
        );
        assert_eq!(coef("min(x, y) - neg(z)").tree().to_string(), "diff(min(x1, x2), neg(z))");
    }

    #[test]
    fn error_offsets() {
        match CoefficientExpr::parse("d^^2") {
            Err(Error::Parse { offset, expected, .. }) => {
                assert_eq!(offset, 2);
                assert!(expected.contains(&"number".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(CoefficientExpr::parse("d +"), Err(Error::Parse { offset: 3, .. })));
        assert!(matches!(CoefficientExpr::parse("foo"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(CoefficientExpr::parse("(d"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(CoefficientExpr::parse("abs(d, 1)"), Err(Error::Parse { .. })));
        assert!(matches!(CoefficientExpr::parse("d $"), Err(Error::Parse { offset: 2, .. })));
        assert!(CoefficientExpr::parse("").is_err());
    }

    #[test]
    fn precedence() {
        let p = EvalPoint::cartesian(&[0.5], 0.5);
        assert_eq!(coef("2*d^2").eval(&p), 0.5);
        assert_eq!(coef("-d^2").eval(&p), -0.25);
        assert_eq!(coef("1-2-3").eval(&p), -4.0);
        assert_eq!(coef("8/2/2").eval(&p), 2.0);
        assert_eq!(coef("(1+1)^3").eval(&p), 8.0);
        assert_eq!(coef("1.5e1 + .5").eval(&p), 15.5);
        assert_eq!(coef("pos(-1) + neg(-2) + abs(-3) + max(1, 4, 2)").eval(&p), 9.0);
    }

    #[test]
    fn variables() {
        let p = EvalPoint::cartesian(&[3.0, 4.0, 5.0], 0.1);
        assert_eq!(coef("r").eval(&p), 5.0);
        assert_eq!(coef("z").eval(&p), 5.0);
        assert_eq!(coef("x2").eval(&p), 4.0);
        let c = EvalPoint::cylindrical(3.5, 0.2, 0.4);
        assert_eq!(coef("r*z").eval(&c), 3.5 * 0.2);
        assert!(coef("d^0.5").uses(Var::D));
        assert!(!coef("r^-2").uses(Var::D));
    }

    #[test]
    fn serde_round_trip() {
        let e = coef("-0.03*d^-1.5");
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, "\"-0.03*d^-1.5\"");
        let back: CoefficientExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<CoefficientExpr>("\"d^^2\"").is_err());
    }

    proptest! {
        #[test]
        fn positive_and_negative_parts_split(c in -10.0f64..10.0, e in -2.5f64..2.5, d in 1e-3f64..1.0) {
            let q = CoefficientExpr::parse(&format!("{c}*d^{e} + 0.5")).unwrap();
            let p = EvalPoint::cartesian(&[d], d);
            let v = q.eval(&p);
            prop_assert_eq!(q.eval_pos(&p) - q.eval_neg(&p), v);
            prop_assert!(q.eval_pos(&p) >= 0.0 && q.eval_neg(&p) >= 0.0);
            let via_funcs = CoefficientExpr::parse(&format!("pos({c}*d^{e} + 0.5) - neg({c}*d^{e} + 0.5)")).unwrap();
            prop_assert_eq!(via_funcs.eval(&p), v);
        }
    }
}
