//! Truncated Laurent series with complex coefficients.
//!
//! A [`LaurentSeries`] stores the coefficients of `(z - p)^v, (z - p)^(v+1), …`
//! up to, but not including, its *precision* exponent. Every operation
//! propagates precision explicitly, so a product of two series with poles
//! reports only the coefficients that are actually determined by its inputs.
//!
//! Next to each coefficient the series keeps a magnitude envelope: the size
//! of the terms that went into computing it. Products propagate the
//! envelopes of their factors; recurrences (division, roots, exponentials)
//! charge each step with the magnitudes of the values actually combined. Rounding error in a
//! coefficient is proportional to its envelope, so zero detection and the
//! trimming of cancelled leading terms compare each coefficient against its
//! own envelope rather than against a single global scale. Near a
//! singularity coefficients grow geometrically, and a global scale would let
//! the tail drown out the head.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::C64;

/// Default number of stored coefficients.
pub const DEFAULT_ORDER: usize = 24;

/// A series is declared zero when every coefficient is below
/// `ZERO_TOL * max(envelope, 1)`.
pub const ZERO_TOL: f64 = 1e-10;

/// Leading coefficients below `TRIM_TOL * envelope` are treated as cancelled
/// before a series is used as a divisor or its valuation is reported.
pub const TRIM_TOL: f64 = 1e-12;

/// Residues below `RESIDUE_TOL * max(envelope, 1)` are ignored by
/// [`LaurentSeries::antiderivative`].
pub const RESIDUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("base point mismatch: {0} vs {1}")]
    BaseMismatch(C64, C64),
    #[error("division by a series that is declared zero")]
    DivisionByZero,
    #[error("square root of a series with odd valuation {0}")]
    OddValuation(i32),
    #[error("operation requires a non-zero series")]
    ZeroSeries,
    #[error("exponential of a series with a pole of order {0}")]
    EssentialSingularity(i32),
    #[error("antiderivative of a series with non-zero residue {0}")]
    NonzeroResidue(C64),
    #[error("{op} requires {expected}, found valuation {found}")]
    InvalidValuation {
        op: &'static str,
        expected: &'static str,
        found: i32,
    },
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Binary ring operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Analytic function selector for [`analytic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticFn {
    Sqrt,
    Exp,
    LogDerivative,
}

/// Square root anchored to the half plane `Re >= 0`; on the negative real
/// axis the root with positive imaginary part is chosen.
pub fn anchored_sqrt(c: C64) -> C64 {
    // normalise -0.0 so the principal branch lands on +i for negative reals
    let c = Complex64::new(c.re, if c.im == 0.0 { 0.0 } else { c.im });
    c.sqrt()
}

fn max_abs(cs: &[C64]) -> f64 {
    cs.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn same_base(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug)]
pub struct LaurentSeries {
    base: C64,
    valuation: i32,
    coeffs: Vec<C64>,
    mags: Vec<f64>,
}

/// Equality compares base, valuation and coefficients; envelopes are
/// bookkeeping and do not take part.
impl PartialEq for LaurentSeries {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.valuation == other.valuation && self.coeffs == other.coeffs
    }
}

impl LaurentSeries {
    /// Builds a series from coefficients starting at exponent `valuation`.
    /// Exactly-zero leading coefficients are absorbed into the valuation.
    pub fn new(base: C64, valuation: i32, coeffs: Vec<C64>) -> Self {
        let mags = coeffs.iter().map(|c| c.norm()).collect();
        Self::from_parts(base, valuation, coeffs, mags)
    }

    pub(crate) fn from_parts(base: C64, valuation: i32, mut coeffs: Vec<C64>, mut mags: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), mags.len());
        for (m, c) in mags.iter_mut().zip(&coeffs) {
            *m = m.max(c.norm());
        }
        let lead = coeffs.iter().take_while(|c| **c == ZERO).count();
        coeffs.drain(..lead);
        mags.drain(..lead);
        LaurentSeries {
            base,
            valuation: valuation + lead as i32,
            coeffs,
            mags,
        }
    }

    /// The zero series known up to `O((z-p)^precision)`.
    pub fn zero(base: C64, precision: i32) -> Self {
        LaurentSeries {
            base,
            valuation: precision,
            coeffs: Vec::new(),
            mags: Vec::new(),
        }
    }

    /// The constant `c`, stored with `order` coefficients.
    pub fn constant(base: C64, c: C64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order];
        if order > 0 {
            coeffs[0] = c;
        }
        Self::new(base, 0, coeffs)
    }

    /// The coordinate function `z = p + (z - p)`, stored with `order` coefficients
    /// counted from exponent zero.
    pub fn variable(base: C64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order];
        if order > 0 {
            coeffs[0] = base;
        }
        if order > 1 {
            coeffs[1] = ONE;
        }
        Self::new(base, 0, coeffs)
    }

    /// Taylor coefficients at `base` by the trapezoidal Cauchy integral over
    /// `samples` points on the circle of radius `r`. `f` must be holomorphic
    /// on the closed disk; the aliasing error is of order `(r/R)^samples`.
    /// Returns `None` if `f` fails at a sample point.
    pub fn from_circle(
        base: C64,
        r: f64,
        order: usize,
        samples: usize,
        f: impl Fn(C64) -> Option<C64>,
    ) -> Option<Self> {
        Self::from_circle_with_error(base, r, order, samples, |z| f(z).map(|v| (v, v.norm())))
    }

    /// As [`from_circle`](Self::from_circle), with `f` also returning the
    /// rounding magnitude of each sample. Each coefficient averages the
    /// samples, so its envelope is the mean magnitude over `r^k`.
    pub fn from_circle_with_error(
        base: C64,
        r: f64,
        order: usize,
        samples: usize,
        f: impl Fn(C64) -> Option<(C64, f64)>,
    ) -> Option<Self> {
        let n = samples.max(order + 1);
        let roots: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64))
            .collect();
        let values = roots
            .iter()
            .map(|u| f(base + u * r).filter(|(v, m)| v.is_finite() && m.is_finite()))
            .collect::<Option<Vec<(C64, f64)>>>()?;
        let mean = values.iter().map(|(v, m)| v.norm().max(*m)).sum::<f64>() / n as f64;
        let mut coeffs = Vec::with_capacity(order);
        let mut mags = Vec::with_capacity(order);
        for k in 0..order {
            let mut acc = ZERO;
            for (j, (v, _)) in values.iter().enumerate() {
                acc += v * roots[(j * k) % n].conj();
            }
            let rk = r.powi(k as i32);
            coeffs.push(acc / (n as f64 * rk));
            mags.push(mean / rk);
        }
        Some(Self::from_parts(base, 0, coeffs, mags))
    }

    /// The displacement `(z - p)` alone, known up to `O((z-p)^(order+1))`.
    pub fn displacement(base: C64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order];
        if order > 0 {
            coeffs[0] = ONE;
        }
        Self::new(base, 1, coeffs)
    }

    pub fn base(&self) -> C64 {
        self.base
    }

    /// Exponent of the first stored coefficient.
    pub fn valuation(&self) -> i32 {
        self.valuation
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Magnitude envelope of each stored coefficient.
    pub fn envelope(&self) -> &[f64] {
        &self.mags
    }

    /// Number of stored coefficients.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// First exponent that is *not* known: the series is `… + O((z-p)^precision)`.
    pub fn precision(&self) -> i32 {
        self.valuation + self.coeffs.len() as i32
    }

    /// Largest envelope entry.
    pub fn scale(&self) -> f64 {
        self.mags.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest stored coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    /// Coefficient of `(z-p)^k`: `None` beyond the precision, zero below the
    /// valuation.
    pub fn coefficient(&self, k: i32) -> Option<C64> {
        if k >= self.precision() {
            None
        } else if k < self.valuation {
            Some(ZERO)
        } else {
            Some(self.coeffs[(k - self.valuation) as usize])
        }
    }

    fn coeff_or_zero(&self, k: i32) -> C64 {
        self.coefficient(k).unwrap_or(ZERO)
    }

    fn mag_or_zero(&self, k: i32) -> f64 {
        if k < self.valuation || k >= self.precision() {
            0.0
        } else {
            self.mags[(k - self.valuation) as usize]
        }
    }

    /// `true` if every stored coefficient is below the declared-zero threshold.
    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .zip(&self.mags)
            .all(|(c, m)| c.norm() < ZERO_TOL * m.max(1.0))
    }

    /// Largest ratio of a coefficient to its floored envelope; declared zero
    /// below [`ZERO_TOL`].
    pub fn relative_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.mags)
            .map(|(c, m)| c.norm() / m.max(1.0))
            .fold(0.0, f64::max)
    }

    /// Drops leading coefficients below `tol` times their envelope, raising the
    /// valuation.
    pub fn trimmed(&self, tol: f64) -> Self {
        let lead = self
            .coeffs
            .iter()
            .zip(&self.mags)
            .take_while(|(c, m)| c.norm() <= tol * **m)
            .count();
        LaurentSeries {
            base: self.base,
            valuation: self.valuation + lead as i32,
            coeffs: self.coeffs[lead..].to_vec(),
            mags: self.mags[lead..].to_vec(),
        }
    }

    /// Valuation after discarding cancelled leading terms, `None` for a
    /// declared-zero series.
    pub fn effective_valuation(&self) -> Option<i32> {
        if self.is_zero() {
            return None;
        }
        Some(self.trimmed(TRIM_TOL).valuation)
    }

    /// Leading coefficient after trimming, `None` for a declared-zero series.
    pub fn leading(&self) -> Option<(i32, C64)> {
        if self.is_zero() {
            return None;
        }
        let t = self.trimmed(TRIM_TOL);
        t.coeffs.first().map(|c| (t.valuation, *c))
    }

    /// Keeps at most `n` stored coefficients.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.coeffs.len());
        LaurentSeries {
            base: self.base,
            valuation: self.valuation,
            coeffs: self.coeffs[..n].to_vec(),
            mags: self.mags[..n].to_vec(),
        }
    }

    /// Lowers the precision to `precision` if it is currently higher.
    pub fn truncated_precision(&self, precision: i32) -> Self {
        if precision >= self.precision() {
            return self.clone();
        }
        if precision <= self.valuation {
            return Self::zero(self.base, precision);
        }
        self.truncated((precision - self.valuation) as usize)
    }

    /// Zeroes every coefficient with exponent above `max_exponent` and extends
    /// the series with exact zeros up to `precision`. Used to turn a Taylor
    /// series into the exactly-known polynomial of its leading terms.
    pub fn polynomial_part(&self, max_exponent: i32, precision: i32) -> Self {
        let start = self.valuation.min(0);
        let n = (precision - start).max(0) as usize;
        let (coeffs, mags) = (0..n)
            .map(|i| {
                let e = start + i as i32;
                if e <= max_exponent {
                    (self.coeff_or_zero(e), self.mag_or_zero(e))
                } else {
                    (ZERO, 0.0)
                }
            })
            .unzip();
        Self::from_parts(self.base, start, coeffs, mags)
    }

    /// Re-labels the base point; coefficients are untouched.
    pub fn rebased(&self, base: C64) -> Self {
        LaurentSeries {
            base,
            ..self.clone()
        }
    }

    /// Evaluates the truncated sum at `z`.
    pub fn eval(&self, z: C64) -> C64 {
        let t = z - self.base;
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        if self.valuation == 0 {
            acc
        } else {
            acc * t.powi(self.valuation)
        }
    }

    /// Value at the base point: `None` at a pole.
    pub fn value_at_base(&self) -> Option<C64> {
        match self.effective_valuation() {
            None => Some(ZERO),
            Some(v) if v > 0 => Some(ZERO),
            Some(0) => Some(self.coeff_or_zero(0)),
            Some(_) => None,
        }
    }

    /// Root-test estimate of the radius of convergence from the tail of the
    /// stored coefficients that stand above their rounding level. Returns
    /// `f64::INFINITY` when there is no usable tail.
    pub fn radius_estimate(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .coeffs
            .iter()
            .zip(&self.mags)
            .enumerate()
            .filter(|(_, (c, m))| c.norm() > 1e-12 * **m && c.norm() > 0.0)
            .map(|(i, (c, _))| ((self.valuation + i as i32) as f64, c.norm().ln()))
            .collect();
        if pts.len() < 3 {
            return f64::INFINITY;
        }
        let tail = &pts[pts.len() / 2..];
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return f64::INFINITY;
        }
        (-sxy / sxx).exp()
    }

    fn check_base(&self, other: &Self) -> Result<()> {
        if same_base(self.base, other.base) {
            Ok(())
        } else {
            Err(SeriesError::BaseMismatch(self.base, other.base))
        }
    }

    fn add_signed(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_base(other)?;
        let prec = self.precision().min(other.precision());
        let val = self.valuation.min(other.valuation);
        if val >= prec {
            return Ok(Self::zero(self.base, prec));
        }
        let (coeffs, mags) = (val..prec)
            .map(|e| {
                (
                    self.coeff_or_zero(e) + other.coeff_or_zero(e) * sign,
                    self.mag_or_zero(e).max(other.mag_or_zero(e)),
                )
            })
            .unzip();
        Ok(Self::from_parts(self.base, val, coeffs, mags))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.add_signed(other, 1.0)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.add_signed(other, -1.0)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let val = self.valuation + other.valuation;
        let n = self.coeffs.len().min(other.coeffs.len());
        if n == 0 {
            let prec = (self.precision() + other.valuation).min(other.precision() + self.valuation);
            return Ok(Self::zero(self.base, prec));
        }
        let coeffs = conv(&self.coeffs, &other.coeffs, n);
        let mags = conv_env(&self.coeffs, &self.mags, &other.coeffs, &other.mags, n);
        Ok(Self::from_parts(self.base, val, coeffs, mags))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        if other.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        let b = other.trimmed(TRIM_TOL);
        let val = self.valuation - b.valuation;
        let n = self.coeffs.len().min(b.coeffs.len());
        let b0 = b.coeffs[0];
        let inv = 1.0 / b0.norm();
        let mut q: Vec<C64> = Vec::with_capacity(n);
        let mut m: Vec<f64> = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = self.coeffs[k];
            let mut sm = self.mags[k];
            for j in 1..=k {
                s -= b.coeffs[j] * q[k - j];
                sm += b.mags[j] * q[k - j].norm();
            }
            q.push(s / b0);
            m.push(sm * inv);
        }
        Ok(Self::from_parts(self.base, val, q, m))
    }

    /// Multiplicative inverse.
    pub fn recip(&self) -> Result<Self> {
        let n = self.order().max(1);
        Self::constant(self.base, ONE, n).checked_div(self)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        let mags = self.mags.iter().map(|m| m * c.norm()).collect();
        Self::from_parts(self.base, self.valuation, coeffs, mags)
    }

    /// Integer power by repeated squaring; negative powers go through
    /// [`LaurentSeries::recip`].
    pub fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        if k == 0 {
            return Ok(Self::constant(self.base, ONE, self.order().max(1)));
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.checked_mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(result.expect("k > 0"))
    }

    /// Term-wise derivative with respect to `z`.
    pub fn derivative(&self) -> Self {
        if self.coeffs.is_empty() {
            return Self::zero(self.base, self.precision() - 1);
        }
        let (coeffs, mags) = self
            .coeffs
            .iter()
            .zip(&self.mags)
            .enumerate()
            .map(|(i, (c, m))| {
                let e = (self.valuation + i as i32) as f64;
                (c * e, m * e.abs())
            })
            .unzip();
        let s = Self::from_parts(self.base, self.valuation - 1, coeffs, mags);
        if s.coeffs.is_empty() {
            Self::zero(self.base, self.precision() - 1)
        } else {
            s
        }
    }

    /// n-th derivative.
    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |s, _| s.derivative())
    }

    /// Term-wise antiderivative vanishing at the base point. Fails when the
    /// `(z-p)^-1` coefficient is non-zero.
    pub fn antiderivative(&self) -> Result<Self> {
        let res = self.coeff_or_zero(-1);
        if res.norm() >= RESIDUE_TOL * self.mag_or_zero(-1).max(1.0) {
            return Err(SeriesError::NonzeroResidue(res));
        }
        if self.coeffs.is_empty() {
            return Ok(Self::zero(self.base, self.precision() + 1));
        }
        let (coeffs, mags) = self
            .coeffs
            .iter()
            .zip(&self.mags)
            .enumerate()
            .map(|(i, (c, m))| {
                let e = self.valuation + i as i32;
                if e == -1 {
                    (ZERO, 0.0)
                } else {
                    let d = (e + 1) as f64;
                    (c / d, m / d.abs())
                }
            })
            .unzip();
        let s = Self::from_parts(self.base, self.valuation + 1, coeffs, mags);
        Ok(if s.coeffs.is_empty() {
            Self::zero(self.base, self.precision() + 1)
        } else {
            s
        })
    }

    /// Square root on the anchored branch (see [`anchored_sqrt`]).
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(SeriesError::ZeroSeries);
        }
        let a = self.trimmed(TRIM_TOL);
        if a.valuation % 2 != 0 {
            return Err(SeriesError::OddValuation(a.valuation));
        }
        let c0 = a.coeffs[0];
        let inv = 1.0 / c0.norm();
        let u: Vec<C64> = a.coeffs.iter().map(|c| c / c0).collect();
        let um: Vec<f64> = a.mags.iter().map(|m| m * inv).collect();
        let n = u.len();
        let mut s = vec![ZERO; n];
        let mut sm = vec![0.0; n];
        s[0] = ONE;
        sm[0] = 1.0;
        for k in 1..n {
            let mut acc = u[k];
            let mut accm = um[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
                accm += s[j].norm() * s[k - j].norm();
            }
            s[k] = acc / 2.0;
            sm[k] = accm / 2.0;
        }
        let r0 = anchored_sqrt(c0);
        let coeffs = s.into_iter().map(|c| c * r0).collect();
        let mags = sm.into_iter().map(|m| m * r0.norm()).collect();
        Ok(Self::from_parts(a.base, a.valuation / 2, coeffs, mags))
    }

    /// Series exponential; the input must not have a pole.
    pub fn exp(&self) -> Result<Self> {
        if self.valuation < 0 && !self.is_zero() {
            let v = self.trimmed(TRIM_TOL).valuation;
            if v < 0 {
                return Err(SeriesError::EssentialSingularity(-v));
            }
        }
        let prec = self.precision();
        if prec <= 0 {
            return Ok(Self::zero(self.base, prec));
        }
        let n = prec as usize;
        let a: Vec<C64> = (0..n).map(|k| self.coeff_or_zero(k as i32)).collect();
        let am: Vec<f64> = (0..n).map(|k| self.mag_or_zero(k as i32)).collect();
        let mut e = vec![ZERO; n];
        let mut em = vec![0.0; n];
        e[0] = a[0].exp();
        em[0] = e[0].norm();
        for k in 1..n {
            let mut acc = ZERO;
            let mut accm = 0.0;
            for j in 1..=k {
                acc += a[j] * e[k - j] * j as f64;
                accm += am[j] * e[k - j].norm() * j as f64;
            }
            e[k] = acc / k as f64;
            em[k] = accm / k as f64;
        }
        Ok(Self::from_parts(self.base, 0, e, em))
    }

    /// `a' / a`.
    pub fn log_derivative(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(SeriesError::ZeroSeries);
        }
        self.derivative().checked_div(self)
    }

    /// Substitutes `inner` into `self`. `inner` is the displacement of the
    /// outer variable from the outer base point and must vanish at its own
    /// base point; the result lives at `inner`'s base point.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let m = match inner.effective_valuation() {
            Some(v) if v >= 1 => v,
            Some(v) => {
                return Err(SeriesError::InvalidValuation {
                    op: "compose (inner)",
                    expected: "valuation >= 1",
                    found: v,
                })
            }
            None => {
                return Err(SeriesError::InvalidValuation {
                    op: "compose (inner)",
                    expected: "a non-zero series",
                    found: inner.valuation,
                })
            }
        };
        let outer = self.trimmed(TRIM_TOL);
        if outer.valuation < 0 && !outer.coeffs.is_empty() {
            return Err(SeriesError::InvalidValuation {
                op: "compose (outer)",
                expected: "valuation >= 0",
                found: outer.valuation,
            });
        }
        let inner = inner.trimmed(TRIM_TOL);
        let first_power = outer.valuation.max(1);
        let precision = (m * outer.precision()).min(inner.precision() + (first_power - 1) * m);
        let n = precision.max(0) as usize;
        let u: Vec<C64> = (0..n).map(|k| inner.coeff_or_zero(k as i32)).collect();
        let um: Vec<f64> = (0..n).map(|k| inner.mag_or_zero(k as i32)).collect();
        let mut acc = vec![ZERO; n];
        let mut accm = vec![0.0; n];
        let mut pow = vec![ZERO; n];
        let mut powm = vec![0.0; n];
        if n > 0 {
            pow[0] = ONE;
            powm[0] = 1.0;
        }
        for k in 0..outer.precision().max(0) {
            let a = outer.coeff_or_zero(k);
            let am = outer.mag_or_zero(k);
            for i in 0..n {
                acc[i] += a * pow[i];
                accm[i] += am * pow[i].norm() + a.norm() * powm[i];
            }
            powm = conv_env(&pow, &powm, &u, &um, n);
            pow = conv(&pow, &u, n);
            if powm.iter().all(|x| *x == 0.0) {
                break;
            }
        }
        Ok(Self::from_parts(inner.base, 0, acc, accm))
    }

    /// Compositional inverse of a series with valuation exactly one. The
    /// result is a series in the image coordinate, centred at zero.
    pub fn revert(&self) -> Result<Self> {
        let a = self.trimmed(TRIM_TOL);
        if a.is_zero() || a.valuation != 1 {
            return Err(SeriesError::InvalidValuation {
                op: "revert",
                expected: "valuation exactly 1",
                found: if a.is_zero() { a.precision() } else { a.valuation },
            });
        }
        let n = a.precision().max(1) as usize;
        let ac: Vec<C64> = (0..n).map(|k| a.coeff_or_zero(k as i32)).collect();
        let am: Vec<f64> = (0..n).map(|k| a.mag_or_zero(k as i32)).collect();
        let a1 = ac[1];
        let inv = 1.0 / a1.norm();
        let mut b = vec![ZERO; n];
        let mut bm = vec![0.0; n];
        if n > 1 {
            b[1] = ONE / a1;
            bm[1] = inv;
        }
        for k in 2..n {
            let comp = poly_compose(&ac, &b, k + 1);
            let babs: Vec<f64> = b.iter().map(|x| x.norm()).collect();
            let compm = poly_compose_abs(&am, &babs, k + 1);
            b[k] = -comp[k] / a1;
            bm[k] = compm[k] * inv;
        }
        Ok(Self::from_parts(ZERO, 0, b, bm))
    }
}

/// Truncated Cauchy product.
fn conv(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    for (i, x) in a.iter().enumerate().take(n) {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// First-order envelope of a product: each factor's envelope weighted by the
/// size of the other factor's coefficients.
fn conv_env(a: &[C64], am: &[f64], b: &[C64], bm: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n.min(a.len()) {
        for j in 0..(n - i).min(b.len()) {
            out[i + j] += am[i] * b[j].norm() + a[i].norm() * bm[j];
        }
    }
    out
}

fn conv_abs(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, x) in a.iter().enumerate().take(n) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a(b(w))` truncated to `n` coefficients; `b[0]` must be zero.
fn poly_compose(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut acc = vec![ZERO; n];
    for c in a.iter().take(n).rev() {
        acc = conv(&acc, b, n);
        acc[0] += c;
    }
    acc
}

fn poly_compose_abs(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for c in a.iter().take(n).rev() {
        acc = conv_abs(&acc, b, n);
        acc[0] += c;
    }
    acc
}

/// Ring operation dispatch.
pub fn arith(a: &LaurentSeries, b: &LaurentSeries, op: ArithOp) -> Result<LaurentSeries> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => a.checked_div(b),
    }
}

/// Analytic function dispatch.
pub fn analytic(a: &LaurentSeries, f: AnalyticFn) -> Result<LaurentSeries> {
    match f {
        AnalyticFn::Sqrt => a.sqrt(),
        AnalyticFn::Exp => a.exp(),
        AnalyticFn::LogDerivative => a.log_derivative(),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            /// Panics on a base-point mismatch; use the `checked_*` method to
            /// handle that case.
            fn $m(self, rhs: &LaurentSeries) -> LaurentSeries {
                self.$checked(rhs).expect(concat!("series ", stringify!($m)))
            }
        }
        impl $tr<LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: &LaurentSeries) -> LaurentSeries {
                (&self).$m(rhs)
            }
        }
        impl $tr<LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Mul<C64> for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: C64) -> LaurentSeries {
        self.scaled(rhs)
    }
}

impl Mul<C64> for LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: C64) -> LaurentSeries {
        self.scaled(rhs)
    }
}

impl Mul<f64> for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: f64) -> LaurentSeries {
        self.scaled(C64::new(rhs, 0.0))
    }
}

impl Mul<f64> for LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: f64) -> LaurentSeries {
        self.scaled(C64::new(rhs, 0.0))
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

impl Neg for LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        -&self
    }
}

fn fmt_complex(c: &C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.base == ZERO {
            "z".to_string()
        } else {
            format!("(z-{})", fmt_complex(&self.base))
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let e = self.valuation + i as i32;
            match e {
                0 => write!(f, "{} + ", fmt_complex(c))?,
                1 => write!(f, "{}·{} + ", fmt_complex(c), var)?,
                _ => write!(f, "{}·{}^{} + ", fmt_complex(c), var, e)?,
            }
        }
        write!(f, "O({}^{})", var, self.precision())
    }
}
