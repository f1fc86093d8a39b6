//! Closed-form meromorphic expressions in one complex variable `z`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' signed-int)?
//! atom   := number | 'i' | 'z' | '(' expr ')' | ('exp' | 'sqrt') '(' expr ')'
//! ```
//!
//! Numbers are decimals with an optional exponent and an optional `i`
//! suffix, so `0.5i` is imaginary and `1+2i` is a sum. Unary minus binds
//! looser than `^`: `-z^2` is `-(z^2)`.
//!
//! Square roots take the branch with non-negative real part at the point of
//! evaluation or expansion, and series arithmetic continues that branch.

use std::fmt;
use std::ops;

use crate::series::{anchored_sqrt, LaurentSeries, SeriesError};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("malformed literal '{text}' at byte {offset}")]
    MalformedLiteral { offset: usize, text: String },
    #[error("pole at {0}")]
    PoleAtPoint(C64),
    #[error("branch point at {0}")]
    BranchPoint(C64),
    #[error("essential singularity at {0}")]
    EssentialSingularity(C64),
    #[error("series expansion at {at} failed: {source}")]
    Series { at: C64, source: SeriesError },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Expr {
    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(C64::new(x, 0.0))
    }

    /// `e^k`; a zero exponent collapses to the constant one.
    pub fn pow(e: Expr, k: i32) -> Expr {
        if k == 0 {
            Expr::Const(ONE)
        } else {
            Expr::Pow(Box::new(e), k)
        }
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::Exp(Box::new(e))
    }

    pub fn sqrt(e: Expr) -> Expr {
        Expr::Sqrt(Box::new(e))
    }

    /// `true` if the expression does not mention `z`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sqrt(a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Symbolic derivative with respect to `z`, with light simplification of
    /// zero and unit factors.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(ZERO),
            Expr::Var => Expr::Const(ONE),
            Expr::Neg(a) => s_neg(a.differentiate()),
            Expr::Add(a, b) => s_add(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => s_sub(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => s_add(
                s_mul(a.differentiate(), (**b).clone()),
                s_mul((**a).clone(), b.differentiate()),
            ),
            Expr::Div(a, b) => s_div(
                s_sub(
                    s_mul(a.differentiate(), (**b).clone()),
                    s_mul((**a).clone(), b.differentiate()),
                ),
                s_pow((**b).clone(), 2),
            ),
            Expr::Pow(a, k) => s_mul(
                s_mul(Expr::real(*k as f64), s_pow((**a).clone(), k - 1)),
                a.differentiate(),
            ),
            Expr::Exp(a) => s_mul(self.clone(), a.differentiate()),
            Expr::Sqrt(a) => s_div(a.differentiate(), s_mul(Expr::real(2.0), self.clone())),
        }
    }

    /// Pointwise value at `z0`.
    pub fn eval(&self, z0: C64) -> Result<C64, ExprError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => z0,
            Expr::Neg(a) => -a.eval(z0)?,
            Expr::Add(a, b) => a.eval(z0)? + b.eval(z0)?,
            Expr::Sub(a, b) => a.eval(z0)? - b.eval(z0)?,
            Expr::Mul(a, b) => a.eval(z0)? * b.eval(z0)?,
            Expr::Div(a, b) => {
                let num = a.eval(z0)?;
                let den = b.eval(z0)?;
                if den == ZERO {
                    return Err(ExprError::PoleAtPoint(z0));
                }
                num / den
            }
            Expr::Pow(a, k) => {
                let x = a.eval(z0)?;
                if *k < 0 && x == ZERO {
                    return Err(ExprError::PoleAtPoint(z0));
                }
                x.powi(*k)
            }
            Expr::Exp(a) => a.eval(z0)?.exp(),
            Expr::Sqrt(a) => {
                let x = a.eval(z0)?;
                if x == ZERO {
                    return Err(ExprError::BranchPoint(z0));
                }
                anchored_sqrt(x)
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::PoleAtPoint(z0))
        }
    }

    /// Value at `z0` with a running bound on its rounding error: the second
    /// component `m` is such that the absolute error is of order `eps * m`.
    pub fn eval_with_error(&self, z0: C64) -> Result<(C64, f64), ExprError> {
        let (v, m) = match self {
            Expr::Const(c) => (*c, c.norm()),
            Expr::Var => (z0, z0.norm()),
            Expr::Neg(a) => {
                let (x, m) = a.eval_with_error(z0)?;
                (-x, m)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (x, mx) = a.eval_with_error(z0)?;
                let (y, my) = b.eval_with_error(z0)?;
                let v = if matches!(self, Expr::Add(..)) { x + y } else { x - y };
                (v, mx + my)
            }
            Expr::Mul(a, b) => {
                let (x, mx) = a.eval_with_error(z0)?;
                let (y, my) = b.eval_with_error(z0)?;
                (x * y, mx * y.norm() + x.norm() * my)
            }
            Expr::Div(a, b) => {
                let (x, mx) = a.eval_with_error(z0)?;
                let (y, my) = b.eval_with_error(z0)?;
                if y == ZERO {
                    return Err(ExprError::PoleAtPoint(z0));
                }
                let v = x / y;
                (v, (mx + v.norm() * my) / y.norm())
            }
            Expr::Pow(a, k) => {
                let (x, mx) = a.eval_with_error(z0)?;
                if x == ZERO {
                    if *k < 0 {
                        return Err(ExprError::PoleAtPoint(z0));
                    }
                    (ZERO, if *k == 1 { mx } else { 0.0 })
                } else {
                    let v = x.powi(*k);
                    (v, v.norm() * (1.0 + k.unsigned_abs() as f64 * mx / x.norm()))
                }
            }
            Expr::Exp(a) => {
                let (x, mx) = a.eval_with_error(z0)?;
                let v = x.exp();
                (v, v.norm() * (1.0 + mx))
            }
            Expr::Sqrt(a) => {
                let (x, mx) = a.eval_with_error(z0)?;
                if x == ZERO {
                    return Err(ExprError::BranchPoint(z0));
                }
                let v = anchored_sqrt(x);
                (v, v.norm() + mx / (2.0 * v.norm()))
            }
        };
        if v.re.is_finite() && v.im.is_finite() && m.is_finite() {
            Ok((v, m))
        } else {
            Err(ExprError::PoleAtPoint(z0))
        }
    }

    /// Value at `z0`, taking the series limit where plain evaluation hits a
    /// removable singularity such as `z/z` at zero. `Ok(None)` is a pole.
    pub fn limit(&self, z0: C64) -> Result<Option<C64>, ExprError> {
        match self.eval(z0) {
            Ok(v) => Ok(Some(v)),
            Err(ExprError::PoleAtPoint(_)) => Ok(self.expand(z0, 4)?.value_at_base()),
            Err(e) => Err(e),
        }
    }

    /// Laurent expansion at `p` with `order` significant coefficients.
    ///
    /// Intermediate series carry extra terms so that cancellation in
    /// quotients does not eat into the requested order.
    pub fn expand(&self, p: C64, order: usize) -> Result<LaurentSeries, ExprError> {
        let order = order.max(1);
        let mut last = None;
        for slack in [4usize, 12, 28, 60] {
            let s = self.series(p, order + slack)?;
            if s.order() >= order {
                return Ok(s.truncated(order));
            }
            last = Some(s);
        }
        Ok(last.expect("at least one attempt"))
    }

    fn series(&self, p: C64, n: usize) -> Result<LaurentSeries, ExprError> {
        let wrap = |source| ExprError::Series { at: p, source };
        Ok(match self {
            Expr::Const(c) => LaurentSeries::constant(p, *c, n),
            Expr::Var => LaurentSeries::variable(p, n),
            Expr::Neg(a) => -a.series(p, n)?,
            Expr::Add(a, b) => a.series(p, n)?.checked_add(&b.series(p, n)?).map_err(wrap)?,
            Expr::Sub(a, b) => a.series(p, n)?.checked_sub(&b.series(p, n)?).map_err(wrap)?,
            Expr::Mul(a, b) => a.series(p, n)?.checked_mul(&b.series(p, n)?).map_err(wrap)?,
            Expr::Div(a, b) => {
                let den = b.series(p, n)?;
                a.series(p, n)?.checked_div(&den).map_err(wrap)?
            }
            Expr::Pow(a, k) => a.series(p, n)?.powi(*k).map_err(wrap)?,
            Expr::Exp(a) => {
                let s = a.series(p, n)?;
                match s.exp() {
                    Err(SeriesError::EssentialSingularity(_)) => {
                        return Err(ExprError::EssentialSingularity(p))
                    }
                    r => r.map_err(wrap)?,
                }
            }
            Expr::Sqrt(a) => {
                let s = a.series(p, n)?;
                match s.effective_valuation() {
                    Some(v) if v == 0 || (v < 0 && v % 2 == 0) => s.sqrt().map_err(wrap)?,
                    _ => return Err(ExprError::BranchPoint(p)),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if !is_plain_const(*c) => 5,
            _ => 5,
        }
    }
}

fn s_neg(a: Expr) -> Expr {
    match a.as_const() {
        Some(c) if c == ZERO => a,
        _ => Expr::Neg(Box::new(a)),
    }
}

fn s_add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), _) if x == ZERO => b,
        (_, Some(y)) if y == ZERO => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn s_sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (_, Some(y)) if y == ZERO => a,
        (Some(x), _) if x == ZERO => s_neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn s_mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), _) if x == ZERO => Expr::Const(ZERO),
        (_, Some(y)) if y == ZERO => Expr::Const(ZERO),
        (Some(x), _) if x == ONE => b,
        (_, Some(y)) if y == ONE => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn s_div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), _) if x == ZERO => Expr::Const(ZERO),
        (_, Some(y)) if y == ONE => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn s_pow(a: Expr, k: i32) -> Expr {
    match k {
        0 => Expr::Const(ONE),
        1 => a,
        _ => Expr::Pow(Box::new(a), k),
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Constants the parser can produce directly: non-negative reals and
/// non-negative multiples of `i`.
fn is_plain_const(c: C64) -> bool {
    (c.im == 0.0 && c.re >= 0.0) || (c.re == 0.0 && c.im > 0.0)
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 && c.re.is_sign_positive() {
        write!(f, "{}", c.re)
    } else if c == C64::new(0.0, 1.0) {
        write!(f, "i")
    } else if c.re == 0.0 && c.im > 0.0 {
        write!(f, "{}i", c.im)
    } else if c.im == 0.0 {
        write!(f, "(-{})", -c.re)
    } else if c.im < 0.0 {
        write!(f, "({}-{}i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var => write!(f, "z"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_at(f, a, 3)
            }
            Expr::Add(a, b) => {
                write_at(f, a, 1)?;
                write!(f, "+")?;
                write_at(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, "-")?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, 2)?;
                write!(f, "*")?;
                write_at(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_at(f, a, 2)?;
                write!(f, "/")?;
                write_at(f, b, 3)
            }
            Expr::Pow(a, k) => {
                write_at(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// Parses an expression in `z`.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
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
                    lhs = lhs * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let a = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(a);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.syntax("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let k: i32 = text.parse().map_err(|_| ExprError::MalformedLiteral {
            offset: start,
            text: text.to_string(),
        })?;
        Ok(Expr::pow(a, k))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) => Err(self.syntax(&format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let s = self.s;
        let digits = |pos: &mut usize| {
            let from = *pos;
            while *pos < s.len() && s[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - from
        };
        let mut n = digits(&mut self.pos);
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        let malformed = |end: usize| ExprError::MalformedLiteral {
            offset: start,
            text: String::from_utf8_lossy(&s[start..end.min(s.len())]).into_owned(),
        };
        if n == 0 {
            return Err(malformed(self.pos));
        }
        if matches!(self.s.get(self.pos), Some(b'e') | Some(b'E'))
            && self.s.get(self.pos + 1) != Some(&b'x')
        {
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
                self.pos += 1;
            }
            if digits(&mut self.pos) == 0 {
                return Err(malformed(self.pos + 1));
            }
        }
        let end = self.pos;
        let imaginary = self.s.get(self.pos) == Some(&b'i');
        if imaginary {
            self.pos += 1;
        }
        if let Some(c) = self.s.get(self.pos) {
            if c.is_ascii_alphanumeric() || *c == b'.' || *c == b'_' {
                return Err(malformed(self.pos + 1));
            }
        }
        let text = std::str::from_utf8(&self.s[start..end]).expect("ascii");
        let x: f64 = text.parse().map_err(|_| malformed(self.pos))?;
        Ok(Expr::Const(if imaginary {
            C64::new(0.0, x)
        } else {
            C64::new(x, 0.0)
        }))
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        match name {
            "i" => Ok(Expr::Const(C64::new(0.0, 1.0))),
            "z" => Ok(Expr::Var),
            "exp" | "sqrt" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(if name == "exp" { Expr::exp(arg) } else { Expr::sqrt(arg) })
            }
            _ => Err(ExprError::UnknownIdentifier {
                offset: start,
                name: name.to_string(),
            }),
        }
    }
}
