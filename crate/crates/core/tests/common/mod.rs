//! Independent oracles shared by the integration tests and the acceptance
//! runner: closed forms, finite differences and comparison helpers.
#![allow(dead_code)]

pub mod criteria;

use minsurf::surface::{self, Vec3};
use minsurf::{LaurentSeries, WeierstrassData, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn data(g: &str, h: &str) -> WeierstrassData {
    WeierstrassData::parse("test", g, h).unwrap()
}

pub fn rel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_err_f(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Closed forms of `P_2..P_4` for `G = z^k`, `h = z^k`.
pub fn enneper_k_closed(k: f64, ell: usize, z: C64) -> C64 {
    match ell {
        2 => -(k - 1.0) * (3.0 * k + 1.0) / (8.0 * z * z),
        3 => (k - 1.0) * (k + 1.0) * (3.0 * k + 1.0) / (8.0 * z.powi(3)),
        4 => -3.0 * (k + 1.0).powi(2) * (k - 1.0) * (3.0 * k + 1.0) / (16.0 * z.powi(4)),
        _ => unreachable!(),
    }
}

/// Closed forms of `P_2..P_5` for `G = z`, `h = iz/(z^4 - 1)`.
pub fn scherk_closed(ell: usize, z: C64) -> C64 {
    let d = z.powi(4) - 1.0;
    match ell {
        2 => -6.0 * z * z / (d * d),
        3 => 12.0 * z * (z.powi(4) + 1.0) / d.powi(3),
        4 => -12.0 * (z.powi(8) + 10.0 * z.powi(4) + 1.0) / d.powi(4),
        5 => 576.0 * z.powi(3) * (z.powi(4) + 1.0) / d.powi(5),
        _ => unreachable!(),
    }
}

/// Closed forms of `P_2..P_5` for `G = z`, `h = z/w` with
/// `w² = z^8 - 14z^4 + 1`; only even powers of `w` occur.
pub fn schwarz_closed(ell: usize, z: C64) -> C64 {
    let w2 = z.powi(8) - 14.0 * z.powi(4) + 1.0;
    let p = |cs: &[f64]| cs.iter().fold(C64::new(0.0, 0.0), |acc, &a| acc * z.powi(4) + a);
    match ell {
        2 => -42.0 * z * z * (z.powi(4) + 1.0).powi(2) / w2.powi(2),
        3 => 84.0 * z * p(&[1.0, 34.0, 0.0, -34.0, -1.0]) / w2.powi(3),
        4 => -84.0 * p(&[1.0, 282.0, 1887.0, -884.0, 1887.0, 282.0, 1.0]) / w2.powi(4),
        5 => 108864.0 * z.powi(3) * p(&[1.0, 36.0, 69.0, 0.0, -69.0, -36.0, -1.0]) / w2.powi(5),
        _ => unreachable!(),
    }
}

/// The k-noid relation `P7 + a P5 P2 + b P4 P3 + c P3 P2² = 0`.
pub fn knoid_coefficients(k: f64) -> (f64, f64, f64) {
    let den = 3.0 * k * k - 16.0 * k + 8.0;
    let a = 16.0 * (3.0 * k - 2.0) * (k - 2.0) / den;
    let b = 8.0 * (27.0 * k.powi(4) - 144.0 * k.powi(3) - 56.0 * k * k + 128.0 * k - 32.0)
        / (den * (k - 2.0) * (3.0 * k - 2.0));
    let c = 192.0 * k * k / den;
    (a, b, c)
}

/// Largest weighted coefficient difference relative to the weighted size of
/// `a`, over the first `n` coefficients with weight `s^k`.
pub fn series_gap(a: &LaurentSeries, b: &LaurentSeries, n: i32, s: f64) -> f64 {
    let lo = a.valuation().min(b.valuation()).min(0);
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for k in lo..lo + n {
        let w = s.powi(k - lo);
        let x = a.coefficient(k).unwrap_or_default();
        let y = b.coefficient(k).unwrap_or_default();
        diff = diff.max((x - y).norm() * w);
        size = size.max(x.norm() * w);
    }
    if size == 0.0 {
        diff
    } else {
        diff / size
    }
}

/// Five-point Laplacian of `f` at `(x, y)`.
pub fn laplacian(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h)
}

/// Gauss curvature of `e^{2u} |dz|²`, i.e. `-e^{-2u} Δu`.
pub fn conformal_curvature(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    -(-2.0 * u(x, y)).exp() * laplacian(u, x, y, h)
}

/// Mean curvature of the sampled immersion at `z` from second differences of
/// surface points, with the normal taken from `X_x × X_y`.
pub fn mean_curvature(w: &WeierstrassData, base: C64, z: C64, theta: f64, h: f64) -> f64 {
    let x = |dx: f64, dy: f64| -> Vec3 { surface::immersion_at(w, base, z + c(dx, dy), theta).unwrap() };
    let x0 = x(0.0, 0.0);
    let (xp, xm, yp, ym) = (x(h, 0.0), x(-h, 0.0), x(0.0, h), x(0.0, -h));
    let xu = (xp - xm) / (2.0 * h);
    let xv = (yp - ym) / (2.0 * h);
    let xuu = (xp - 2.0 * x0 + xm) / (h * h);
    let xvv = (yp - 2.0 * x0 + ym) / (h * h);
    let xuv = (x(h, h) - x(h, -h) - x(-h, h) + x(-h, -h)) / (4.0 * h * h);
    let n = xu.cross(&xv).normalize();
    let (e1, f1, g1) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
    let (e2, f2, g2) = (xuu.dot(&n), xuv.dot(&n), xvv.dot(&n));
    (e2 * g1 - 2.0 * f2 * f1 + g2 * e1) / (2.0 * (e1 * g1 - f1 * f1))
}

/// Interior points of an `n x n` lattice in the rectangle.
pub fn interior(rect: minsurf::Rect, n: usize) -> Vec<C64> {
    let mut out = Vec::new();
    for j in 1..=n {
        for i in 1..=n {
            let x = rect.x0 + (rect.x1 - rect.x0) * i as f64 / (n + 1) as f64;
            let y = rect.y0 + (rect.y1 - rect.y0) * j as f64 / (n + 1) as f64;
            out.push(c(x, y));
        }
    }
    out
}
