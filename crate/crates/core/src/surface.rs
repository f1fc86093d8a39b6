//! Sampled immersions from Weierstrass data, metric quantities, the Goursat
//! and Bonnet transforms, and OBJ export.
//!
//! The immersion is `X = Re ∫ (½(1/G - G), (i/2)(1/G + G), 1) e^{iθ} h dz`,
//! integrated along straight segments from the base point. The normal is the
//! inverse stereographic projection of `G`, `N = (2 Re G, 2 Im G, |G|² - 1) / (|G|² + 1)`.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::differentials::WeierstrassData;
use crate::exec::Exec;
use crate::expr::{Expr, ExprError};
use crate::numfmt::g17;
use crate::quadrature::{self, QuadratureError};
use crate::{Rect, C64};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("the data has a pole at {0}")]
    Pole(C64),
    #[error("Moebius map is degenerate (ad - bc = 0)")]
    DegenerateMoebius,
    #[error("the transformed Gauss map is constant")]
    ConstantGauss,
    #[error("scale factor must be positive, got {0}")]
    InvalidScale(f64),
    #[error("grid needs at least 2x2 samples, got {0}x{1}")]
    GridTooSmall(usize, usize),
    #[error("writing mesh: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SurfaceError>;

/// Sample points in a chart, laid out as `rows x cols` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    /// `nx` columns from `x0` to `x1`, `ny` rows from `y0` to `y1`, ends included.
    Rect { rect: Rect, nx: usize, ny: usize },
    /// Rows are circles of radius `radius * i / rings`, `i = 0..=rings`; the
    /// first row is the centre repeated.
    Disk {
        center: C64,
        radius: f64,
        rings: usize,
        spokes: usize,
    },
}

impl Grid {
    pub fn rect(rect: Rect, nx: usize, ny: usize) -> Self {
        Grid::Rect { rect, nx, ny }
    }

    pub fn disk(center: C64, radius: f64, rings: usize, spokes: usize) -> Self {
        Grid::Disk {
            center,
            radius,
            rings,
            spokes,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Grid::Rect { nx, ny, .. } => (ny, nx),
            Grid::Disk { rings, spokes, .. } => (rings + 1, spokes),
        }
    }

    pub fn points(&self) -> Vec<C64> {
        match *self {
            Grid::Rect { rect, nx, ny } => {
                let step = |a: f64, b: f64, n: usize, i: usize| {
                    if n < 2 {
                        a
                    } else if i + 1 == n {
                        b
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                };
                let mut out = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        out.push(C64::new(step(rect.x0, rect.x1, nx, i), step(rect.y0, rect.y1, ny, j)));
                    }
                }
                out
            }
            Grid::Disk {
                center,
                radius,
                rings,
                spokes,
            } => {
                let mut out = Vec::with_capacity((rings + 1) * spokes);
                for i in 0..=rings {
                    let r = if rings == 0 { 0.0 } else { radius * i as f64 / rings as f64 };
                    for k in 0..spokes {
                        let a = std::f64::consts::TAU * k as f64 / spokes as f64;
                        out.push(center + C64::from_polar(r, a));
                    }
                }
                out
            }
        }
    }

    /// Largest distance from `p` to a sample point.
    pub fn reach(&self, p: C64) -> f64 {
        self.points().iter().map(|z| (z - p).norm()).fold(0.0, f64::max)
    }
}

/// Sampled immersion: chart points, surface points and unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSample {
    pub rows: usize,
    pub cols: usize,
    pub params: Vec<C64>,
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
}

impl ImmersionSample {
    pub fn translated(mut self, v: Vec3) -> Self {
        for p in &mut self.points {
            *p += v;
        }
        self
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

/// The three components of the holomorphic integrand, as expressions in `z`.
struct Integrand {
    over_g: Expr,
    times_g: Expr,
    h: Expr,
    phase: C64,
}

impl Integrand {
    fn new(w: &WeierstrassData, theta: f64) -> Self {
        Integrand {
            over_g: w.height.clone() / w.gauss.clone(),
            times_g: w.gauss.clone() * w.height.clone(),
            h: w.height.clone(),
            phase: C64::from_polar(1.0, theta),
        }
    }

    fn at(&self, z: C64) -> Option<[C64; 3]> {
        let r = self.over_g.limit(z).ok()??;
        let s = self.times_g.limit(z).ok()??;
        let h = self.h.limit(z).ok()??;
        let i = C64::new(0.0, 1.0);
        Some([(r - s) * 0.5 * self.phase, i * (r + s) * 0.5 * self.phase, h * self.phase])
    }
}

/// `X(z) - X(base)` for the data with Bonnet phase `theta`.
pub fn immersion_at(w: &WeierstrassData, base: C64, z: C64, theta: f64) -> Result<Vec3> {
    let f = Integrand::new(w, theta);
    let v = quadrature::integrate_segment(&|u| f.at(u), base, z, quadrature::DEFAULT_TOL)?;
    Ok(Vec3::new(v[0].re, v[1].re, v[2].re))
}

/// Largest difference between the straight path and the path through the
/// corner `(z.re, base.im)`.
pub fn path_discrepancy(w: &WeierstrassData, base: C64, z: C64, theta: f64) -> Result<f64> {
    let f = Integrand::new(w, theta);
    let tol = quadrature::DEFAULT_TOL;
    let a = quadrature::integrate_path(&|u| f.at(u), &[base, z], tol)?;
    let corner = C64::new(z.re, base.im);
    let b = quadrature::integrate_path(&|u| f.at(u), &[base, corner, z], tol)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).re.abs()).fold(0.0, f64::max))
}

/// Unit normal from the value of the Gauss map; `None` stands for `G = ∞`.
pub fn normal_from_gauss(g: Option<C64>) -> Vec3 {
    match g {
        None => Vec3::new(0.0, 0.0, 1.0),
        Some(g) => {
            let m = g.norm_sqr();
            if !m.is_finite() {
                return Vec3::new(0.0, 0.0, 1.0);
            }
            Vec3::new(2.0 * g.re, 2.0 * g.im, m - 1.0) / (m + 1.0)
        }
    }
}

/// Integrates the immersion at every grid point from `base`, with
/// `X(base) = 0`.
pub fn integrate_immersion(w: &WeierstrassData, base: C64, grid: &Grid, theta: f64) -> Result<ImmersionSample> {
    integrate_immersion_with(Exec::default(), w, base, grid, theta)
}

pub fn integrate_immersion_with(
    exec: Exec,
    w: &WeierstrassData,
    base: C64,
    grid: &Grid,
    theta: f64,
) -> Result<ImmersionSample> {
    let (rows, cols) = grid.dims();
    let params = grid.points();
    let f = Integrand::new(w, theta);
    let tol = quadrature::DEFAULT_TOL;
    let samples = exec.map(&params, |z| -> Result<(Vec3, Vec3)> {
        let v = quadrature::integrate_segment(&|u| f.at(u), base, *z, tol)?;
        let g = w.gauss.limit(*z)?;
        Ok((Vec3::new(v[0].re, v[1].re, v[2].re), normal_from_gauss(g)))
    });
    let mut points = Vec::with_capacity(params.len());
    let mut normals = Vec::with_capacity(params.len());
    for s in samples {
        let (p, n) = s?;
        points.push(p);
        normals.push(n);
    }
    Ok(ImmersionSample {
        rows,
        cols,
        params,
        points,
        normals,
    })
}

/// Conformal factor `λ` (with `g = λ² |dz|²`) and Gauss curvature at `z0`:
/// `λ = ½(|G| + 1/|G|)|h|`, `K = -(4|G'||G| / (|h|(1 + |G|²)²))²`.
pub fn metric_and_curvature(w: &WeierstrassData, z0: C64) -> Result<(f64, f64)> {
    let g = w.gauss.limit(z0)?.ok_or(SurfaceError::Pole(z0))?;
    let dg = w.gauss.differentiate().limit(z0)?.ok_or(SurfaceError::Pole(z0))?;
    let over_g = (w.height.clone() / w.gauss.clone()).limit(z0)?.ok_or(SurfaceError::Pole(z0))?;
    let times_g = (w.gauss.clone() * w.height.clone()).limit(z0)?.ok_or(SurfaceError::Pole(z0))?;
    let lambda = 0.5 * (over_g.norm() + times_g.norm());
    let m = g.norm_sqr();
    let k = 4.0 * dg.norm() / (over_g.norm() * (1.0 + m) * (1.0 + m));
    Ok((lambda, -k * k))
}

/// `w ↦ (a w + b) / (c w + d)`, normalized to `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusMap {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(SurfaceError::DegenerateMoebius);
        }
        let s = det.sqrt();
        Ok(MoebiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        let (o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        MoebiusMap { a: i, b: o, c: o, d: i }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, w: C64) -> C64 {
        (self.a * w + self.b) / (self.c * w + self.d)
    }
}

fn affine(a: C64, e: &Expr, b: C64) -> Expr {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let scaled = if a == one { e.clone() } else { Expr::constant(a) * e.clone() };
    if a == zero {
        Expr::constant(b)
    } else if b == zero {
        scaled
    } else {
        scaled + Expr::constant(b)
    }
}

fn times(x: Expr, y: Expr) -> Expr {
    match (&x, &y) {
        (Expr::Const(c), _) if *c == C64::new(1.0, 0.0) => y,
        (_, Expr::Const(c)) if *c == C64::new(1.0, 0.0) => x,
        _ => x * y,
    }
}

/// Goursat transform: `G̃ = m∘G` and `h̃ = h (aG + b)(cG + d) / G`, which
/// keeps the Hopf differential `-(G'/G) h dz²` unchanged.
pub fn goursat_transform(w: &WeierstrassData, m: &MoebiusMap) -> Result<WeierstrassData> {
    if m.det().norm() < 1e-300 {
        return Err(SurfaceError::DegenerateMoebius);
    }
    if w.gauss.is_constant() {
        return Err(SurfaceError::ConstantGauss);
    }
    if *m == MoebiusMap::identity() {
        return Ok(w.clone());
    }
    let num = affine(m.a, &w.gauss, m.b);
    let den = affine(m.c, &w.gauss, m.d);
    let gauss = match &den {
        Expr::Const(c) if *c == C64::new(1.0, 0.0) => num.clone(),
        _ => num.clone() / den.clone(),
    };
    let height = times(w.height.clone(), times(num, den)) / w.gauss.clone();
    Ok(WeierstrassData::new(w.label.clone(), gauss, height))
}

/// Rescaling by `c > 0` and Bonnet rotation by `theta`: `(G, c e^{iθ} h)`.
pub fn scale_and_bonnet(w: &WeierstrassData, c: f64, theta: f64) -> Result<WeierstrassData> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(SurfaceError::InvalidScale(c));
    }
    let f = C64::from_polar(c, theta);
    if f == C64::new(1.0, 0.0) {
        return Ok(w.clone());
    }
    let height = times(Expr::constant(f), w.height.clone());
    Ok(WeierstrassData::new(w.label.clone(), w.gauss.clone(), height))
}

/// Writes the sample as a Wavefront OBJ with quad faces, optionally with
/// per-vertex normals.
pub fn write_obj<W: Write>(s: &ImmersionSample, with_normals: bool, mut out: W) -> Result<()> {
    if s.rows < 2 || s.cols < 2 {
        return Err(SurfaceError::GridTooSmall(s.rows, s.cols));
    }
    for p in &s.points {
        writeln!(out, "v {} {} {}", g17(p.x), g17(p.y), g17(p.z))?;
    }
    if with_normals {
        for n in &s.normals {
            writeln!(out, "vn {} {} {}", g17(n.x), g17(n.y), g17(n.z))?;
        }
    }
    for r in 0..s.rows - 1 {
        for c in 0..s.cols - 1 {
            let v = [s.index(r, c), s.index(r, c + 1), s.index(r + 1, c + 1), s.index(r + 1, c)].map(|i| i + 1);
            if with_normals {
                writeln!(out, "f {0}//{0} {1}//{1} {2}//{2} {3}//{3}", v[0], v[1], v[2], v[3])?;
            } else {
                writeln!(out, "f {} {} {} {}", v[0], v[1], v[2], v[3])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn export_mesh(s: &ImmersionSample, path: &Path, with_normals: bool) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_obj(s, with_normals, std::io::BufWriter::new(file))
}
