//! Hopf differential, connection coefficient, entropy differentials and the
//! two families of higher Schwarzian operators.

use crate::expr::{parse, Expr, ExprError};
use crate::series::{LaurentSeries, SeriesError};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("the Hopf differential vanishes identically")]
    ZeroHopf,
    #[error("derivative vanishes identically")]
    ConstantMap,
    #[error("critical point at the base point (derivative has valuation {0})")]
    CriticalPoint(i32),
    #[error("degree {ell} differential has valuation {valuation}, below -{ell}")]
    PoleTooDeep { ell: usize, valuation: i32 },
    #[error("degree must be at least {min}, got {got}")]
    InvalidDegree { min: usize, got: usize },
    #[error("Weierstrass data violates the zero/pole matching at {at}: G has valuation {gauss}, h has valuation {height}")]
    Incompatible { at: C64, gauss: i32, height: i32 },
}

pub type Result<T> = std::result::Result<T, DiffError>;

/// Weierstrass data `(G, h dz)` on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassData {
    pub gauss: Expr,
    pub height: Expr,
    pub label: String,
}

impl WeierstrassData {
    pub fn new(label: impl Into<String>, gauss: Expr, height: Expr) -> Self {
        WeierstrassData {
            gauss,
            height,
            label: label.into(),
        }
    }

    /// Parses `G` and `h` from expression text.
    pub fn parse(label: impl Into<String>, gauss: &str, height: &str) -> Result<Self> {
        Ok(Self::new(label, parse(gauss)?, parse(height)?))
    }

    /// Hopf coefficient `q = -(G'/G) h` as an expression.
    pub fn hopf_expr(&self) -> Expr {
        -(self.gauss.differentiate() * self.height.clone() / self.gauss.clone())
    }

    /// Checks that zeros of `h` sit exactly at zeros and poles of `G`, with
    /// matching order, at each of `points`.
    pub fn check_compatibility(&self, points: &[C64]) -> Result<()> {
        for &p in points {
            let g = self.gauss.expand(p, 8)?;
            let h = self.height.expand(p, 8)?;
            let vg = g.effective_valuation().ok_or(DiffError::ConstantMap)?;
            let vh = h.effective_valuation().unwrap_or(i32::MAX);
            if vh != vg.abs() {
                return Err(DiffError::Incompatible {
                    at: p,
                    gauss: vg,
                    height: vh,
                });
            }
        }
        Ok(())
    }
}

/// A degree-`ell` differential `s dz^ell` in a local chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Differential {
    pub ell: usize,
    pub s: LaurentSeries,
}

impl Differential {
    pub fn new(ell: usize, s: LaurentSeries) -> Self {
        Differential { ell, s }
    }

    pub fn is_zero(&self) -> bool {
        self.s.is_zero()
    }

    pub fn coefficient(&self, k: i32) -> Option<C64> {
        self.s.coefficient(k)
    }

    /// Expresses the differential in the chart `z` given the chart change
    /// `w = w0 + phi(z)`, where `self` lives at `w0` and `phi` vanishes at
    /// its own base point.
    pub fn pullback(&self, phi: &LaurentSeries) -> Result<Differential> {
        let s = self.s.compose(phi)?;
        let d = phi.derivative().powi(self.ell as i32)?;
        Ok(Differential::new(self.ell, s.checked_mul(&d)?))
    }
}

/// Coefficient `gamma` of the connection with `nabla_{dz} dz = gamma dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionChart {
    pub gamma: LaurentSeries,
}

/// `q dz^2` with `q = -(G'/G) h`, expanded at `p`.
pub fn hopf(w: &WeierstrassData, p: C64, order: usize) -> Result<Differential> {
    let g = w.gauss.expand(p, order + 2)?;
    let h = w.height.expand(p, order + 2)?;
    let q = hopf_at(w, &g, &h)?;
    Ok(Differential::new(2, q.truncated(order)))
}

/// Agreement required between samples on two concentric circles, relative
/// to their rounding envelopes.
const CIRCLE_AGREEMENT: f64 = 1e-13;

/// Agreement required on the leading coefficients before samples are
/// trusted, relative to the larger of the two envelopes.
const LEADING_AGREEMENT: f64 = 1e-10;

/// Number of leading coefficients checked against the quotient series.
const LEADING: usize = 4;

/// Rounding floor of a sampled coefficient, relative to the function's size
/// on the circle.
const SAMPLE_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Radii of the sampling circles, largest first.
const RADII: [f64; 11] = [1.0, 0.75, 0.5625, 0.42, 0.32, 0.24, 0.18, 0.13, 0.1, 0.075, 0.056];

/// Cauchy coefficients on one circle with an error estimate per coefficient.
struct CircleFit {
    coeffs: Vec<C64>,
    envelope: Vec<f64>,
    error: Vec<f64>,
}

/// Repairs `direct` with Cauchy samples of `e`.
///
/// Series quotients lose digits geometrically near a zero or pole of the
/// divisor even when the quotient itself is holomorphic there; pointwise
/// evaluation does not. Samples on a circle are trusted when they agree
/// with those on the next smaller circle and with the leading coefficients
/// of `direct`: a pole, branch cut or aliasing between the two circles
/// breaks the first test, a pole inside both the second. The disagreement
/// between the circles serves as the error estimate. For each coefficient
/// the trusted circle with the smallest estimate is used, and the
/// coefficient of `direct` is replaced if it differs by more than that.
fn stabilized(direct: LaurentSeries, e: &Expr) -> LaurentSeries {
    if direct.valuation() < 0 || direct.order() == 0 {
        return direct;
    }
    let n = direct.precision() as usize;
    let v0 = direct.valuation() as usize;
    let denv = |k: usize| if k < v0 { 0.0 } else { direct.envelope()[k - v0] };
    let d: Vec<C64> = (0..n).map(|k| direct.coefficient(k as i32).unwrap_or_default()).collect();
    let samples: Vec<Option<(f64, LaurentSeries)>> = RADII
        .iter()
        .map(|&r| {
            LaurentSeries::from_circle_with_error(direct.base(), r, n, 4 * n.max(32), |z| e.eval_with_error(z).ok())
                .map(|s| (r, s))
        })
        .collect();
    let scale = |r: f64, s: &LaurentSeries| {
        let size = (0..n).map(|k| s.coeffs()[k].norm() * r.powi(k as i32)).fold(0.0, f64::max);
        (0..n).map(|k| size / r.powi(k as i32)).collect::<Vec<f64>>()
    };
    let trusted: Vec<CircleFit> = samples
        .windows(2)
        .filter_map(|w| {
            let [Some((r, s)), Some((_, t))] = w else { return None };
            let (es, et) = (s.envelope(), t.envelope());
            let error: Vec<f64> = (0..n).map(|k| (s.coeffs()[k] - t.coeffs()[k]).norm()).collect();
            let circles = (0..n).all(|k| error[k] <= CIRCLE_AGREEMENT * es[k].max(et[k]));
            let leading = (0..n.min(LEADING))
                .all(|k| (s.coeffs()[k] - d[k]).norm() <= LEADING_AGREEMENT * es[k].max(denv(k)));
            let size = scale(*r, s);
            (circles && leading).then(|| CircleFit {
                coeffs: s.coeffs().to_vec(),
                error: (0..n).map(|k| error[k].max(SAMPLE_FLOOR * size[k])).collect(),
                envelope: es.to_vec(),
            })
        })
        .collect();
    if trusted.is_empty() {
        return direct;
    }
    let (coeffs, mags) = (0..n)
        .map(|k| {
            let best = trusted
                .iter()
                .min_by(|a, b| a.error[k].total_cmp(&b.error[k]))
                .expect("non-empty");
            if (best.coeffs[k] - d[k]).norm() <= best.error[k] {
                (d[k], denv(k))
            } else {
                (best.coeffs[k], best.envelope[k])
            }
        })
        .unzip();
    LaurentSeries::from_parts(direct.base(), 0, coeffs, mags)
}

/// Hopf coefficient for `w` from its series `g`, `h` at a common base point,
/// resampled where the quotient by `G` is ill-conditioned.
pub fn hopf_at(w: &WeierstrassData, g: &LaurentSeries, h: &LaurentSeries) -> Result<LaurentSeries> {
    Ok(stabilized(hopf_series(g, h)?, &w.hopf_expr()))
}

/// Schwarzian of the Gauss map from its series `g`, resampled where the
/// series is ill-conditioned (typically near a pole of `G`).
pub fn schwarzian_at(w: &WeierstrassData, g: &LaurentSeries) -> Result<LaurentSeries> {
    let d1 = w.gauss.differentiate();
    let d2 = d1.differentiate();
    let d3 = d2.differentiate();
    let r = d2 / d1.clone();
    let s = d3 / d1 - Expr::real(1.5) * Expr::pow(r, 2);
    Ok(stabilized(schwarzian(g)?, &s))
}

/// Hopf coefficient from series for `G` and `h`.
pub fn hopf_series(g: &LaurentSeries, h: &LaurentSeries) -> Result<LaurentSeries> {
    if g.derivative().is_zero() {
        return Err(DiffError::ConstantMap);
    }
    Ok(-(g.log_derivative()?.checked_mul(h)?))
}

/// `gamma = q' / (2q)`.
pub fn connection(q: &LaurentSeries) -> Result<ConnectionChart> {
    if q.is_zero() {
        return Err(DiffError::ZeroHopf);
    }
    Ok(ConnectionChart {
        gamma: q.log_derivative()? * 0.5,
    })
}

/// Classical Schwarzian `f'''/f' - (3/2)(f''/f')^2`, computed as
/// `r' - r^2/2` with `r = f''/f'`. Critical points and poles of `f` are
/// allowed; the result is then a Laurent series.
pub fn schwarzian(f: &LaurentSeries) -> Result<LaurentSeries> {
    let d = f.derivative();
    if d.is_zero() {
        return Err(DiffError::ConstantMap);
    }
    let r = d.log_derivative()?;
    Ok(r.derivative().checked_sub(&(r.checked_mul(&r)? * 0.5))?)
}

/// `P_2 = {G, z} + (5/8)(q'/q)^2 - (1/2) q''/q`.
pub fn entropy_p2(g: &LaurentSeries, q: &LaurentSeries) -> Result<Differential> {
    p2_from_schwarzian(&schwarzian(g)?, q)
}

fn p2_from_schwarzian(s: &LaurentSeries, q: &LaurentSeries) -> Result<Differential> {
    if q.is_zero() {
        return Err(DiffError::ZeroHopf);
    }
    let lq = q.log_derivative()?;
    let q2 = q.derivative().derivative().checked_div(q)?;
    let p2 = s
        .checked_add(&(lq.checked_mul(&lq)? * 0.625))?
        .checked_sub(&(q2 * 0.5))?;
    Ok(Differential::new(2, p2))
}

/// `P_{l+1} = (p_l' - l gamma p_l) dz^{l+1}`.
pub fn entropy_next(p: &Differential, c: &ConnectionChart) -> Result<Differential> {
    if p.ell < 2 {
        return Err(DiffError::InvalidDegree { min: 2, got: p.ell });
    }
    let next = p
        .s
        .derivative()
        .checked_sub(&(c.gamma.checked_mul(&p.s)? * p.ell as f64))?;
    Ok(Differential::new(p.ell + 1, next))
}

/// `[P_2, ..., P_ell_max]` from series for `G` and `q` at a common base point.
pub fn entropy_from_series(g: &LaurentSeries, q: &LaurentSeries, ell_max: usize) -> Result<Vec<Differential>> {
    if ell_max < 2 {
        return Err(DiffError::InvalidDegree { min: 2, got: ell_max });
    }
    entropy_from_parts(&schwarzian(g)?, q, ell_max)
}

/// `[P_2, ..., P_ell_max]` from the Schwarzian `{G, z}` and `q`.
fn entropy_from_parts(s: &LaurentSeries, q: &LaurentSeries, ell_max: usize) -> Result<Vec<Differential>> {
    let c = connection(q)?;
    let mut out = vec![p2_from_schwarzian(s, q)?];
    while out.len() < ell_max - 1 {
        let next = entropy_next(out.last().expect("non-empty"), &c)?;
        out.push(next);
    }
    Ok(out)
}

/// Extra coefficients carried internally so that `order` survive the
/// derivatives taken along the way.
pub fn working_order(order: usize, ell_max: usize) -> usize {
    order + ell_max + 6
}

/// `[P_2, ..., P_ell_max]` for `w` expanded at `p`, each with at most
/// `order` stored coefficients.
pub fn entropy_sequence(w: &WeierstrassData, p: C64, ell_max: usize, order: usize) -> Result<Vec<Differential>> {
    let n = working_order(order, ell_max);
    let g = w.gauss.expand(p, n)?;
    let h = w.height.expand(p, n)?;
    if ell_max < 2 {
        return Err(DiffError::InvalidDegree { min: 2, got: ell_max });
    }
    let q = hopf_at(w, &g, &h)?;
    let seq = entropy_from_parts(&schwarzian_at(w, &g)?, &q, ell_max)?;
    Ok(seq
        .into_iter()
        .map(|d| Differential::new(d.ell, d.s.truncated(order)))
        .collect())
}

/// Largest relative difference between two entropy sequences at the same
/// base point, over their first `terms` coefficients weighted by `s^k` with
/// `s` half the convergence radius of the first `P_2` (clamped to
/// `[1e-3, 1]`). Pairs that are both declared zero are skipped.
pub fn sequence_discrepancy(a: &[Differential], b: &[Differential], terms: usize) -> f64 {
    let Some(first) = a.first() else { return 0.0 };
    let s = (first.s.radius_estimate() / 2.0).clamp(1e-3, 1.0);
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() && y.is_zero() {
            continue;
        }
        let lo = x.s.valuation().min(y.s.valuation()).min(0);
        let (mut diff, mut size): (f64, f64) = (0.0, 0.0);
        for k in lo..lo + terms as i32 {
            let w = s.powi(k - lo);
            let (u, v) = (x.coefficient(k).unwrap_or_default(), y.coefficient(k).unwrap_or_default());
            diff = diff.max((u - v).norm() * w);
            size = size.max(u.norm() * w);
        }
        worst = worst.max(if size > 0.0 { diff / size } else { diff });
    }
    if a.len() != b.len() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Coefficient of `(z-p)^-ell`.
pub fn residue(p: &Differential) -> Result<C64> {
    if p.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let ell = p.ell as i32;
    let v = p.s.effective_valuation().unwrap_or(p.s.precision());
    if v < -ell {
        return Err(DiffError::PoleTooDeep {
            ell: p.ell,
            valuation: v,
        });
    }
    Ok(p.s.coefficient(-ell).unwrap_or(C64::new(0.0, 0.0)))
}

/// `(-1/2)^(ell+1) (ell-1)! (n+2)^(ell-2) (3n^2 + 4n)`.
pub fn residue_formula(ell: usize, n: usize) -> f64 {
    let fact: f64 = (1..ell).map(|j| j as f64).product();
    let n = n as f64;
    (-0.5f64).powi(ell as i32 + 1) * fact * (n + 2.0).powi(ell as i32 - 2) * (3.0 * n * n + 4.0 * n)
}

/// Vanishing order of `q` at its base point; zero away from umbilics.
pub fn umbilic_order(q: &LaurentSeries) -> usize {
    match q.effective_valuation() {
        Some(v) if v > 0 => v as usize,
        _ => 0,
    }
}

/// `[S_2, ..., S_ell_max]` with `S_2 = {f, z}` and
/// `S_{l+1} = S_l' - l S_l f''/f'`. Requires `f' != 0` at the base point.
pub fn moebius_schwarzian_seq(f: &LaurentSeries, ell_max: usize) -> Result<Vec<LaurentSeries>> {
    if ell_max < 2 {
        return Err(DiffError::InvalidDegree { min: 2, got: ell_max });
    }
    let d = f.derivative();
    match d.effective_valuation() {
        None => return Err(DiffError::ConstantMap),
        Some(0) => {}
        Some(v) => return Err(DiffError::CriticalPoint(v)),
    }
    let r = d.log_derivative()?;
    let mut out = vec![schwarzian(f)?];
    for ell in 2..ell_max {
        let s = out.last().expect("non-empty");
        let next = s.derivative().checked_sub(&(s.checked_mul(&r)? * ell as f64))?;
        out.push(next);
    }
    Ok(out)
}
