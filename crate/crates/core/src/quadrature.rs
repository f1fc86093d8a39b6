//! Adaptive Gauss–Legendre quadrature of vector-valued integrands along
//! straight segments in the complex plane.

use std::sync::OnceLock;

use crate::C64;

/// Panels per rule.
pub const NODES: usize = 15;
/// Panels are halved until the whole and the two halves agree to this.
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand is singular or non-finite at {0}")]
    IntegrandPole(C64),
    #[error("quadrature did not converge on the segment {from} -> {to}")]
    NonConvergence { from: C64, to: C64 },
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre() -> &'static ([f64; NODES], [f64; NODES]) {
    static RULE: OnceLock<([f64; NODES], [f64; NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES;
        let mut x = [0.0; NODES];
        let mut w = [0.0; NODES];
        for i in 0..n {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, t);
                dp = d;
                let dt = p / d;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, t);
            dp = if d != 0.0 { d } else { dp };
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (x, w)
    })
}

/// `P_n(t)` and `P_n'(t)`.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

fn panel<const N: usize, F>(f: &F, a: C64, b: C64) -> Result<[C64; N], QuadratureError>
where
    F: Fn(C64) -> Option<[C64; N]>,
{
    let (x, w) = gauss_legendre();
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut acc = [C64::new(0.0, 0.0); N];
    for (xi, wi) in x.iter().zip(w) {
        let z = mid + half * *xi;
        let v = f(z).ok_or(QuadratureError::IntegrandPole(z))?;
        for (s, vi) in acc.iter_mut().zip(v) {
            if !vi.is_finite() {
                return Err(QuadratureError::IntegrandPole(z));
            }
            *s += vi * *wi;
        }
    }
    Ok(acc.map(|s| s * half))
}

fn gap<const N: usize>(a: &[C64; N], b: &[C64; N]) -> (f64, f64) {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let m = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    (d, m)
}

/// `∫ f(z) dz` along the segment from `a` to `b`. The integrand returns
/// `None` where it cannot be evaluated.
pub fn integrate_segment<const N: usize, F>(f: &F, a: C64, b: C64, tol: f64) -> Result<[C64; N], QuadratureError>
where
    F: Fn(C64) -> Option<[C64; N]>,
{
    if a == b {
        return Ok([C64::new(0.0, 0.0); N]);
    }
    let whole = panel(f, a, b)?;
    refine(f, a, b, whole, tol, 0).map_err(|e| match e {
        QuadratureError::NonConvergence { .. } => QuadratureError::NonConvergence { from: a, to: b },
        other => other,
    })
}

fn refine<const N: usize, F>(
    f: &F,
    a: C64,
    b: C64,
    whole: [C64; N],
    tol: f64,
    depth: u32,
) -> Result<[C64; N], QuadratureError>
where
    F: Fn(C64) -> Option<[C64; N]>,
{
    let m = (a + b) * 0.5;
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let mut both = left;
    for (x, y) in both.iter_mut().zip(right) {
        *x += y;
    }
    let (d, mag) = gap(&whole, &both);
    if d <= tol * mag.max(1.0) {
        return Ok(both);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadratureError::NonConvergence { from: a, to: b });
    }
    let l = refine(f, a, m, left, tol, depth + 1)?;
    let r = refine(f, m, b, right, tol, depth + 1)?;
    let mut out = l;
    for (x, y) in out.iter_mut().zip(r) {
        *x += y;
    }
    Ok(out)
}

/// Integral along the polygonal path through `points`.
pub fn integrate_path<const N: usize, F>(f: &F, points: &[C64], tol: f64) -> Result<[C64; N], QuadratureError>
where
    F: Fn(C64) -> Option<[C64; N]>,
{
    let mut acc = [C64::new(0.0, 0.0); N];
    for seg in points.windows(2) {
        let v = integrate_segment(f, seg[0], seg[1], tol)?;
        for (s, x) in acc.iter_mut().zip(v) {
            *s += x;
        }
    }
    Ok(acc)
}
