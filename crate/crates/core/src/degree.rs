//! Degree detection: the smallest `n` for which `P_n` is a weighted
//! homogeneous polynomial in `P_2, ..., P_{n-1}`.

use nalgebra::{DMatrix, DVector};

use crate::differentials::{entropy_sequence, hopf, DiffError, Differential, WeierstrassData};
use crate::exec::Exec;
use crate::series::LaurentSeries;
use crate::C64;

/// Default acceptance threshold for a relation's relative residual.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relations whose system has a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DegreeError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("need at least {needed} base points, got {got}")]
    TooFewBasePoints { needed: usize, got: usize },
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(usize),
    #[error("no relation up to degree {n_max} (smallest residual {best_residual:.3e})")]
    NoRelation { n_max: usize, best_residual: f64 },
    #[error("degree {n} system is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { n: usize, condition: f64 },
}

pub type Result<T> = std::result::Result<T, DegreeError>;

/// A product `P_{j1} P_{j2} ...` stored as its parts in descending order.
pub type Monomial = Vec<usize>;

/// Relation `P_n + sum c_m m = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicType {
    pub n: usize,
    pub terms: Vec<(Monomial, C64)>,
    pub residual: f64,
    /// Condition number of the solved system; one when nothing was solved.
    pub condition: f64,
    pub base_points: Vec<C64>,
}

impl AlgebraicType {
    /// Coefficient of the monomial with the given parts, in any order.
    pub fn coefficient(&self, parts: &[usize]) -> Option<C64> {
        let mut key = parts.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        self.terms.iter().find(|(m, _)| *m == key).map(|(_, c)| *c)
    }
}

/// Human-readable form of a monomial such as `P5*P2` or `P3*P2^2`.
pub fn monomial_name(m: &[usize]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < m.len() {
        let j = m[i..].iter().take_while(|x| **x == m[i]).count();
        out.push(if j == 1 {
            format!("P{}", m[i])
        } else {
            format!("P{}^{}", m[i], j)
        });
        i += j;
    }
    out.join("*")
}

/// All multisets of parts in `2..n` summing to `n`, largest part first,
/// listed in decreasing lexicographic order.
pub fn weighted_monomials(n: usize) -> Vec<Monomial> {
    fn rec(rest: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Monomial>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (2..=max_part.min(rest)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 4 {
        rec(n, n - 1, &mut Vec::new(), &mut out);
    }
    out
}

fn monomial_series(seq: &[Differential], m: &[usize]) -> Result<LaurentSeries> {
    let mut acc = seq[m[0] - 2].s.clone();
    for &j in &m[1..] {
        acc = acc.checked_mul(&seq[j - 2].s).map_err(DiffError::from)?;
    }
    Ok(acc)
}

/// Row weight `s^k` for the coefficient of `(z-p)^k`, with `s` half the
/// estimated radius of convergence (capped at one).
fn row_scale(seq: &[Differential]) -> f64 {
    let r = seq[0].s.radius_estimate();
    (r / 2.0).clamp(1e-3, 1.0)
}

/// Rounding level assumed per unit of envelope.
const NOISE_PER_ENVELOPE: f64 = 1e-15;

/// Rows whose estimated rounding error exceeds this fraction of the block's
/// largest entry are left out of the fit.
const ROW_NOISE_TOL: f64 = 1e-10;

/// Weighted, normalized coefficient block for one base point: column 0 is
/// `P_n`, the remaining columns are the monomials. Coefficients that are
/// dominated by rounding, as judged by their envelopes, are dropped.
fn block(seq: &[Differential], n: usize, monomials: &[Monomial]) -> Result<Vec<Vec<C64>>> {
    let mut cols = vec![seq[n - 2].s.clone()];
    for m in monomials {
        cols.push(monomial_series(seq, m)?);
    }
    let lo = cols.iter().map(|s| s.valuation()).min().expect("non-empty").min(0);
    let hi = cols.iter().map(|s| s.precision()).min().expect("non-empty");
    let s = row_scale(seq);
    let mut rows = Vec::new();
    let mut noise = Vec::new();
    for k in lo..hi {
        let w = s.powi(k - lo);
        rows.push(
            cols.iter()
                .map(|c| c.coefficient(k).unwrap_or(C64::new(0.0, 0.0)) * w)
                .collect::<Vec<_>>(),
        );
        noise.push(
            cols.iter()
                .map(|c| envelope_at(c, k) * w * NOISE_PER_ENVELOPE)
                .fold(0.0, f64::max),
        );
    }
    let norm = rows
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if norm == 0.0 {
        return Ok(rows);
    }
    Ok(rows
        .into_iter()
        .zip(noise)
        .filter(|(_, e)| *e <= ROW_NOISE_TOL * norm)
        .map(|(r, _)| r.into_iter().map(|c| c / norm).collect())
        .collect())
}

fn envelope_at(s: &LaurentSeries, k: i32) -> f64 {
    let i = k - s.valuation();
    if i < 0 || i as usize >= s.order() {
        0.0
    } else {
        s.envelope()[i as usize]
    }
}

struct Solved {
    coeffs: Vec<C64>,
    residual: f64,
    condition: f64,
}

fn solve(rows: &[Vec<C64>], unknowns: usize) -> Solved {
    let m = rows.len();
    let k = unknowns;
    if m < 3 * k + 3 {
        return Solved {
            coeffs: vec![C64::new(0.0, 0.0); k],
            residual: f64::INFINITY,
            condition: f64::INFINITY,
        };
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j + 1]);
    let b = DVector::from_fn(m, |i, _| -rows[i][0]);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd
        .solve(&b, smax * 1e-15)
        .unwrap_or_else(|_| DVector::zeros(k));
    let r = &a * &x - &b;
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    Solved {
        coeffs: x.iter().cloned().collect(),
        residual: r.iter().map(|c| c.norm()).fold(0.0, f64::max) / scale,
        condition,
    }
}

/// Detects the degree from entropy sequences expanded at `base_points`.
pub fn detect_degree(
    w: &WeierstrassData,
    base_points: &[C64],
    n_max: usize,
    order: usize,
    tol: f64,
) -> Result<AlgebraicType> {
    detect_degree_with(Exec::default(), w, base_points, n_max, order, tol)
}

pub fn detect_degree_with(
    exec: Exec,
    w: &WeierstrassData,
    base_points: &[C64],
    n_max: usize,
    order: usize,
    tol: f64,
) -> Result<AlgebraicType> {
    if n_max < 2 {
        return Err(DegreeError::InvalidDegree(n_max));
    }
    if base_points.len() < 2 {
        return Err(DegreeError::TooFewBasePoints {
            needed: 2,
            got: base_points.len(),
        });
    }
    let seqs = exec
        .map(base_points, |p| entropy_sequence(w, *p, n_max, order))
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut best = f64::INFINITY;
    for n in 2..=n_max {
        if seqs.iter().all(|s| s[n - 2].is_zero()) {
            let residual = seqs
                .iter()
                .map(|s| s[n - 2].s.relative_norm())
                .fold(0.0, f64::max);
            return Ok(AlgebraicType {
                n,
                terms: Vec::new(),
                residual,
                condition: 1.0,
                base_points: base_points.to_vec(),
            });
        }
        let monomials = weighted_monomials(n);
        if monomials.is_empty() {
            continue;
        }
        let mut rows = Vec::new();
        for s in &seqs {
            rows.extend(block(s, n, &monomials)?);
        }
        let sol = solve(&rows, monomials.len());
        best = best.min(sol.residual);
        if sol.residual < tol {
            if sol.condition > MAX_CONDITION {
                return Err(DegreeError::IllConditioned {
                    n,
                    condition: sol.condition,
                });
            }
            return Ok(AlgebraicType {
                n,
                terms: monomials.into_iter().zip(sol.coeffs).collect(),
                residual: sol.residual,
                condition: sol.condition,
                base_points: base_points.to_vec(),
            });
        }
    }
    Err(DegreeError::NoRelation {
        n_max,
        best_residual: best,
    })
}

/// Rectangle `[x0, x1] x [y0, y1]` in the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Picks up to `count` base points from a 5x5 grid of cell centres in `rect`,
/// skipping poles, branch points and near-umbilics, preferring points where
/// the entropy series and the data feeding them (`G'/G` and `h`) converge on
/// the largest disks.
pub fn auto_base_points(w: &WeierstrassData, rect: Rect, count: usize) -> Vec<C64> {
    let mut grid = Vec::new();
    for j in 0..5 {
        for i in 0..5 {
            let x = rect.x0 + (i as f64 + 0.5) / 5.0 * (rect.x1 - rect.x0);
            let y = rect.y0 + (j as f64 + 0.5) / 5.0 * (rect.y1 - rect.y0);
            grid.push(C64::new(x, y));
        }
    }
    let scored: Vec<Option<(C64, f64, f64)>> = Exec::default().map(&grid, |p| {
        let q = hopf(w, *p, 4).ok()?.s.value_at_base()?.norm();
        w.gauss.eval(*p).ok()?;
        w.height.eval(*p).ok()?;
        let seq = entropy_sequence(w, *p, 2, 12).ok()?;
        let dlog = w.gauss.expand(*p, 12).ok()?.log_derivative().ok()?;
        let h = w.height.expand(*p, 12).ok()?;
        let r = seq[0]
            .s
            .radius_estimate()
            .min(dlog.radius_estimate())
            .min(h.radius_estimate());
        Some((*p, q, r))
    });
    let ok: Vec<(C64, f64, f64)> = scored.into_iter().flatten().collect();
    let qmax = ok.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut kept: Vec<(usize, (C64, f64, f64))> = ok
        .into_iter()
        .filter(|s| s.1 >= 1e-6 * qmax)
        .enumerate()
        .collect();
    kept.sort_by(|a, b| b.1 .2.total_cmp(&a.1 .2).then(a.0.cmp(&b.0)));
    kept.into_iter().take(count).map(|(_, s)| s.0).collect()
}

/// Largest relative residual of `t` at the probe points.
pub fn verify_relation(t: &AlgebraicType, w: &WeierstrassData, probes: &[C64], order: usize) -> Result<f64> {
    let monomials: Vec<Monomial> = t.terms.iter().map(|(m, _)| m.clone()).collect();
    let mut worst: f64 = 0.0;
    for p in probes {
        let seq = entropy_sequence(w, *p, t.n, order)?;
        if monomials.is_empty() {
            worst = worst.max(seq[t.n - 2].s.relative_norm());
            continue;
        }
        let rows = block(&seq, t.n, &monomials)?;
        let scale = rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for r in &rows {
            let v = t.terms.iter().enumerate().fold(r[0], |acc, (j, (_, c))| acc + c * r[j + 1]);
            worst = worst.max(v.norm() / scale);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmbilicTarget {
    Degree4,
    Degree5,
}

/// Coefficient forced on a degree-4 or degree-5 relation by an umbilic of
/// Hopf order `n`: `12(n+2)^2/(3n^2+4n)` and `24(n+2)^2/((3n+4)n)`.
pub fn umbilic_coefficient(n: usize, target: UmbilicTarget) -> f64 {
    let n = n as f64;
    match target {
        UmbilicTarget::Degree4 => 12.0 * (n + 2.0).powi(2) / (3.0 * n * n + 4.0 * n),
        UmbilicTarget::Degree5 => 24.0 * (n + 2.0).powi(2) / ((3.0 * n + 4.0) * n),
    }
}
