//! Approximation of a minimal surface near a non-umbilic point by surfaces
//! of finite degree.
//!
//! In a coordinate `w` with `Q = dw²` the Gauss map is a ratio `w1/w2` of
//! solutions of Hill's equation `w'' + (ρ/4) w = 0` with `ρ = 2{G, w}`.
//! Truncating `ρ` to a polynomial of degree `n - 3` and solving again with
//! the same initial data gives a Gauss map `G_n` whose surface has degree
//! `n`, with height `h_n = -G_n / G_n' = w1 w2 / W`.

use crate::differentials::{self, DiffError, Differential, WeierstrassData};
use crate::exec::Exec;
use crate::series::{LaurentSeries, SeriesError, ZERO_TOL};
use crate::surface::{self, Grid, SurfaceError, Vec3};
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum ApproxError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("the Hopf differential vanishes at {0}; no adapted coordinate there")]
    Umbilic(C64),
    #[error("approximant index must be at least 3, got {0}")]
    InvalidIndex(usize),
    #[error("the second Hill solution vanishes at the base point")]
    PoleAtBase,
    #[error("the Hill solutions are dependent (Wronskian {0})")]
    DependentSolutions(C64),
    #[error("the grid reaches {reach} from the base point but the series are trusted only to {radius}")]
    OutsideTrust { radius: f64, reach: f64 },
}

pub type Result<T> = std::result::Result<T, ApproxError>;

const WRONSKIAN_TOL: f64 = 1e-10;

/// Hill's equation `w'' + (ρ/4) w = 0` with `w(0) = w0`, `w'(0) = w0prime`.
#[derive(Debug, Clone, PartialEq)]
pub struct HillProblem {
    pub rho: LaurentSeries,
    pub w0: C64,
    pub w0prime: C64,
}

/// One approximant: sup-norm distance of its immersion from the target's
/// over the grid, and the size of its `P_n` relative to its envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximantReport {
    pub n: usize,
    pub sup_error: f64,
    pub p_n_norm: f64,
}

/// Adapted coordinate `w = ∫ sqrt(q) dz` with `w(base) = 0`, and its inverse
/// `z - base` as a series in `w`.
pub fn adapt_coordinate(q: &LaurentSeries) -> Result<(LaurentSeries, LaurentSeries)> {
    match q.effective_valuation() {
        Some(0) => {}
        _ => return Err(ApproxError::Umbilic(q.base())),
    }
    let forward = q.sqrt()?.antiderivative()?;
    let inverse = forward.revert()?;
    Ok((forward, inverse))
}

/// Power series solution, `order` coefficients at the base of `rho`.
pub fn hill_solve(p: &HillProblem, order: usize) -> LaurentSeries {
    let base = p.rho.base();
    let n = order.max(2).min((p.rho.precision().max(0) as usize).saturating_add(2));
    let rho: Vec<C64> = (0..n).map(|k| p.rho.coefficient(k as i32).unwrap_or_default()).collect();
    let mut c = vec![C64::new(0.0, 0.0); n];
    c[0] = p.w0;
    if n > 1 {
        c[1] = p.w0prime;
    }
    for k in 0..n.saturating_sub(2) {
        let s: C64 = (0..=k).map(|j| rho[j] * c[k - j]).sum();
        c[k + 2] = -s * 0.25 / ((k + 2) * (k + 1)) as f64;
    }
    LaurentSeries::new(base, 0, c)
}

/// `w1 w2' - w2 w1'`.
pub fn wronskian(w1: &LaurentSeries, w2: &LaurentSeries) -> Result<LaurentSeries> {
    Ok(w1
        .checked_mul(&w2.derivative())?
        .checked_sub(&w2.checked_mul(&w1.derivative())?)?)
}

fn constant_wronskian(w1: &LaurentSeries, w2: &LaurentSeries) -> Result<C64> {
    let w = wronskian(w1, w2)?;
    let w0 = w.coefficient(0).unwrap_or_default();
    let scale = w.scale().max(1.0);
    let drift = (1..w.precision())
        .map(|k| w.coefficient(k).unwrap_or_default().norm())
        .fold(0.0, f64::max);
    if w0.norm() <= WRONSKIAN_TOL || drift > WRONSKIAN_TOL * scale {
        return Err(ApproxError::DependentSolutions(w0));
    }
    Ok(w0)
}

/// `w1 / w2` after checking that the Wronskian is a non-zero constant.
pub fn gauss_from_solutions(w1: &LaurentSeries, w2: &LaurentSeries) -> Result<LaurentSeries> {
    constant_wronskian(w1, w2)?;
    match w2.value_at_base() {
        Some(v) if v.norm() > WRONSKIAN_TOL => {}
        _ => return Err(ApproxError::PoleAtBase),
    }
    Ok(w1.checked_div(w2)?)
}

/// `ρ = 2{G, w}` for a Gauss map given in an adapted chart.
pub fn potential(g: &LaurentSeries) -> Result<LaurentSeries> {
    Ok(differentials::schwarzian(g)? * 2.0)
}

/// Hill solutions `(w1, w2)` with potential `rho_n`, matched at the base to
/// `w2 = (G')^{-1/2}` and `w1 = G w2`.
fn matched_solutions(g: &LaurentSeries, rho_n: &LaurentSeries, order: usize) -> Result<(LaurentSeries, LaurentSeries)> {
    let w2 = g.derivative().sqrt()?.recip()?;
    let w1 = g.checked_mul(&w2)?;
    let data = |w: &LaurentSeries| {
        (
            w.value_at_base().unwrap_or_default(),
            w.derivative().value_at_base().unwrap_or_default(),
        )
    };
    let (a0, a1) = data(&w1);
    let (b0, b1) = data(&w2);
    if b0.norm() <= WRONSKIAN_TOL {
        return Err(ApproxError::PoleAtBase);
    }
    let hill = |w0, w0prime| {
        hill_solve(
            &HillProblem {
                rho: rho_n.clone(),
                w0,
                w0prime,
            },
            order,
        )
    };
    Ok((hill(a0, a1), hill(b0, b1)))
}

/// Truncates `ρ` to degree `n - 3`, padded with zeros to a long precision.
fn truncated_potential(rho: &LaurentSeries, n: usize, order: usize) -> LaurentSeries {
    rho.polynomial_part(n as i32 - 3, order as i32)
}

/// The approximant `G_n` for a Gauss map `g` given in an adapted chart.
pub fn approximate(g: &LaurentSeries, n: usize, order: usize) -> Result<LaurentSeries> {
    if n < 3 {
        return Err(ApproxError::InvalidIndex(n));
    }
    let rho_n = truncated_potential(&potential(g)?, n, order);
    let (w1, w2) = matched_solutions(g, &rho_n, order)?;
    gauss_from_solutions(&w1, &w2)
}

/// Data `(G_n, h_n)` of the `n`-th approximant, as series in the adapted
/// chart, together with the truncated potential.
pub struct Approximant {
    pub n: usize,
    pub w1: LaurentSeries,
    pub w2: LaurentSeries,
    pub wronskian: C64,
    pub rho_n: LaurentSeries,
}

impl Approximant {
    pub fn new(g: &LaurentSeries, n: usize, order: usize) -> Result<Self> {
        if n < 3 {
            return Err(ApproxError::InvalidIndex(n));
        }
        let rho_n = truncated_potential(&potential(g)?, n, order);
        let (w1, w2) = matched_solutions(g, &rho_n, order)?;
        let wronskian = constant_wronskian(&w1, &w2)?;
        Ok(Approximant {
            n,
            w1,
            w2,
            wronskian,
            rho_n,
        })
    }

    pub fn gauss(&self) -> Result<LaurentSeries> {
        gauss_from_solutions(&self.w1, &self.w2)
    }

    /// `h_n = w1 w2 / W`.
    pub fn height(&self) -> Result<LaurentSeries> {
        Ok(self.w1.checked_mul(&self.w2)? * (C64::new(1.0, 0.0) / self.wronskian))
    }

    /// Antiderivatives of the three immersion components, all entire:
    /// `h/G = w2²/W`, `G h = w1²/W`.
    pub fn primitives(&self) -> Result<[LaurentSeries; 3]> {
        let inv = C64::new(1.0, 0.0) / self.wronskian;
        let a = self.w2.checked_mul(&self.w2)? * inv;
        let b = self.w1.checked_mul(&self.w1)? * inv;
        let h = self.height()?;
        let i = C64::new(0.0, 1.0);
        Ok([
            a.checked_sub(&b)?.antiderivative()? * 0.5,
            a.checked_add(&b)?.antiderivative()? * (i * 0.5),
            h.antiderivative()?,
        ])
    }

    /// `P_2, ..., P_ell_max` of the approximant from its data. The Hopf
    /// coefficient is formed as `-G' (h/G)` with `h/G = w2²/W`, which avoids
    /// dividing by `G` near its zeros.
    pub fn entropy(&self, ell_max: usize) -> Result<Vec<Differential>> {
        let g = self.gauss()?;
        let h_over_g = self.w2.checked_mul(&self.w2)? * (C64::new(1.0, 0.0) / self.wronskian);
        let q = -(g.derivative().checked_mul(&h_over_g)?);
        Ok(differentials::entropy_from_series(&g, &q, ell_max)?)
    }

    /// `P_ell = ½ ∂^(ell-2) ρ_n`.
    pub fn entropy_from_potential(&self, ell: usize) -> Differential {
        Differential::new(ell, self.rho_n.nth_derivative(ell.saturating_sub(2)) * 0.5)
    }
}

/// The target in its adapted chart around `p`.
pub struct AdaptedTarget {
    pub base: C64,
    pub inverse: LaurentSeries,
    pub gauss: LaurentSeries,
    pub height: LaurentSeries,
    /// Half the distance, in the adapted chart, to the nearest detected
    /// singularity of the data or of the coordinate change.
    pub trust_radius: f64,
}

impl AdaptedTarget {
    pub fn new(w: &WeierstrassData, p: C64, order: usize) -> Result<Self> {
        let g = w.gauss.expand(p, order).map_err(DiffError::from)?;
        let h = w.height.expand(p, order).map_err(DiffError::from)?;
        let q = differentials::hopf_at(w, &g, &h)?;
        let (_, inverse) = adapt_coordinate(&q)?;
        let gauss = g.compose(&inverse)?;
        let height = h.compose(&inverse)?.checked_mul(&inverse.derivative())?;
        let trust_radius = 0.5
            * inverse
                .radius_estimate()
                .min(gauss.radius_estimate())
                .min(height.radius_estimate());
        Ok(AdaptedTarget {
            base: p,
            inverse,
            gauss,
            height,
            trust_radius,
        })
    }

    /// Point of the original chart at adapted coordinate `w`.
    pub fn chart_point(&self, w: C64) -> C64 {
        self.base + self.inverse.eval(w)
    }
}

/// Compares the approximants `G_n`, `n` in `ns`, with the target on `grid`
/// (given in the adapted chart at `p`). Both immersions are normalized to
/// vanish at the base point.
pub fn convergence_report(
    w: &WeierstrassData,
    p: C64,
    ns: &[usize],
    grid: &Grid,
    order: usize,
) -> Result<Vec<ApproximantReport>> {
    convergence_report_with(Exec::default(), w, p, ns, grid, order)
}

pub fn convergence_report_with(
    exec: Exec,
    w: &WeierstrassData,
    p: C64,
    ns: &[usize],
    grid: &Grid,
    order: usize,
) -> Result<Vec<ApproximantReport>> {
    if let Some(&n) = ns.iter().find(|&&n| n < 3) {
        return Err(ApproxError::InvalidIndex(n));
    }
    let target = AdaptedTarget::new(w, p, order)?;
    let zero = C64::new(0.0, 0.0);
    let reach = grid.reach(zero);
    if !(reach <= target.trust_radius) {
        return Err(ApproxError::OutsideTrust {
            radius: target.trust_radius,
            reach,
        });
    }
    let params = grid.points();
    let exact = exec
        .map(&params, |u| surface::immersion_at(w, p, target.chart_point(*u), 0.0))
        .into_iter()
        .collect::<std::result::Result<Vec<Vec3>, _>>()?;
    let reports = exec.map(ns, |&n| -> Result<ApproximantReport> {
        let a = Approximant::new(&target.gauss, n, order)?;
        let prim = a.primitives()?;
        let sup_error = params
            .iter()
            .zip(&exact)
            .map(|(u, x)| {
                let y = Vec3::new(prim[0].eval(*u).re, prim[1].eval(*u).re, prim[2].eval(*u).re);
                (y - x).norm()
            })
            .fold(0.0, f64::max);
        let seq = a.entropy(n)?;
        let p_n_norm = seq.last().map(|d| d.s.relative_norm()).unwrap_or(0.0);
        Ok(ApproximantReport { n, sup_error, p_n_norm })
    });
    reports.into_iter().collect()
}

/// `true` when a report's certificate is below the declared-zero threshold.
pub fn certified(r: &ApproximantReport) -> bool {
    r.p_n_norm < ZERO_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    const O: C64 = C64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn series(text: &str, p: C64, n: usize) -> LaurentSeries {
        parse(text).unwrap().expand(p, n).unwrap()
    }

    fn close(a: &LaurentSeries, b: &LaurentSeries, tol: f64) -> bool {
        let n = a.precision().min(b.precision());
        (0..n).all(|k| {
            let x = a.coefficient(k).unwrap_or_default();
            let y = b.coefficient(k).unwrap_or_default();
            (x - y).norm() <= tol * (1.0 + y.norm())
        })
    }

    #[test]
    fn adapted_coordinate_examples() {
        let (f, inv) = adapt_coordinate(&series("4", O, 8)).unwrap();
        assert!(close(&f, &series("2*z", O, 8), 1e-15));
        assert!(close(&inv, &series("z/2", O, 8), 1e-15));

        let (f, _) = adapt_coordinate(&series("2*0.5*exp(z)", O, 16)).unwrap();
        assert!(close(&f, &series("2*(exp(z/2)-1)", O, 16), 1e-14));

        let q = series("1+z+z^3/2", c(0.1, 0.2), 16);
        let (_, inv) = adapt_coordinate(&q).unwrap();
        let d = Differential::new(2, q.clone());
        let pulled = d.pullback(&inv).unwrap();
        assert!(close(&pulled.s, &LaurentSeries::constant(O, c(1.0, 0.0), 12), 1e-9));

        assert!(matches!(adapt_coordinate(&series("z^2", O, 8)), Err(ApproxError::Umbilic(_))));
    }

    #[test]
    fn hill_examples() {
        let zero = LaurentSeries::zero(O, 20);
        let w = hill_solve(&HillProblem { rho: zero, w0: O, w0prime: c(1.0, 0.0) }, 10);
        assert!(close(&w, &series("z", O, 10), 0.0));

        let four = LaurentSeries::constant(O, c(4.0, 0.0), 20);
        let w = hill_solve(&HillProblem { rho: four, w0: c(1.0, 0.0), w0prime: O }, 12);
        let cos = series("(exp(i*z)+exp(-i*z))/2", O, 12);
        assert!(close(&w, &cos, 1e-15));

        let m2 = LaurentSeries::constant(O, c(-2.0, 0.0), 20);
        let w = hill_solve(&HillProblem { rho: m2, w0: c(1.0, 0.0), w0prime: O }, 8);
        let mut fact = 1.0;
        for m in 0..4 {
            if m > 0 {
                fact *= ((2 * m) * (2 * m - 1)) as f64;
            }
            let want = 1.0 / (2f64.powi(m) * fact);
            assert!((w.coefficient(2 * m).unwrap().re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn wronskian_and_ratio() {
        let w1 = series("exp(z/2)", O, 16);
        let w2 = series("exp(-z/2)", O, 16);
        let w = wronskian(&w1, &w2).unwrap();
        assert!((w.coefficient(0).unwrap() + 1.0).norm() < 1e-15);
        let g = gauss_from_solutions(&w1, &w2).unwrap();
        let rho = potential(&g).unwrap();
        assert!(close(&rho, &LaurentSeries::constant(O, c(-1.0, 0.0), 12), 1e-12));
        assert!(matches!(
            gauss_from_solutions(&w1, &w1),
            Err(ApproxError::DependentSolutions(_))
        ));
        assert!(matches!(
            gauss_from_solutions(&series("1", O, 8), &series("z", O, 8)),
            Err(ApproxError::PoleAtBase)
        ));
    }

    #[test]
    fn exact_targets_are_reproduced() {
        let g = series("z", O, 30);
        assert!(close(&approximate(&g, 3, 30).unwrap(), &g, 1e-14));
        let g = series("exp(z)", O, 30);
        for n in [3, 5] {
            assert!(close(&approximate(&g, n, 30).unwrap(), &g, 1e-12));
        }
        // Gauss map whose potential is exactly 1 + w.
        let rho = LaurentSeries::new(O, 0, vec![c(1.0, 0.0), c(1.0, 0.0)]).polynomial_part(1, 40);
        let w1 = hill_solve(&HillProblem { rho: rho.clone(), w0: O, w0prime: c(1.0, 0.0) }, 40);
        let w2 = hill_solve(&HillProblem { rho, w0: c(1.0, 0.0), w0prime: O }, 40);
        let g = gauss_from_solutions(&w1, &w2).unwrap();
        let g4 = approximate(&g, 4, 40).unwrap();
        assert!(close(&g4.truncated(30), &g.truncated(30), 1e-10));
        let g3 = approximate(&g, 3, 40).unwrap();
        assert!(!close(&g3.truncated(30), &g.truncated(30), 1e-6));
        assert!(matches!(approximate(&g, 2, 8), Err(ApproxError::InvalidIndex(2))));
    }

    #[test]
    fn approximant_has_finite_degree() {
        let g = series("z+z^2/5+z^3/7", O, 40);
        for n in [3, 4, 6] {
            let a = Approximant::new(&g, n, 40).unwrap();
            let seq = a.entropy(n).unwrap();
            for d in &seq {
                let direct = a.entropy_from_potential(d.ell);
                assert!(close(&d.s.truncated(16), &direct.s.truncated(16), 1e-9), "n={n} ell={}", d.ell);
            }
            assert!(seq.last().unwrap().is_zero());
        }
    }

    #[test]
    fn trust_radius_is_enforced() {
        let w = WeierstrassData::parse("s", "z", "i*z/(z^4-1)").unwrap();
        let grid = Grid::disk(O, 2.0, 4, 8);
        assert!(matches!(
            convergence_report(&w, O, &[4], &grid, 30),
            Err(ApproxError::OutsideTrust { .. })
        ));
    }
}
