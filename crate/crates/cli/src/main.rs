//! `minsurf` command line: entropy sequences, degree detection, approximants,
//! meshes and transforms of minimal surfaces, reported as JSON.
//!
//! Exit codes: 0 on success, 2 for usage or parse errors, 3 when a
//! computation fails. Diagnostics go to standard error.

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use minsurf::approx::{self, ApproximantReport};
use minsurf::degree::{self, DEFAULT_TOL};
use minsurf::differentials::{self, entropy_sequence, residue, Differential};
use minsurf::numfmt::g17;
use minsurf::registry;
use minsurf::surface::{self, Grid, MoebiusMap, Vec3};
use minsurf::{expr, Rect, WeierstrassData, C64};
use serde_json::{json, Map, Number, Value};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "minsurf", version, about = "Entropy differentials of minimal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy differentials P_2..P_l at a base point.
    Entropy(EntropyArgs),
    /// Smallest degree n with an algebraic relation for P_n.
    Degree(DegreeArgs),
    /// Finite-degree approximants in the adapted chart.
    Approx(ApproxArgs),
    /// Sample the immersion and write a Wavefront OBJ mesh.
    Mesh(MeshArgs),
    /// Apply Goursat, Bonnet and scaling transforms.
    Transform(TransformArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Named surface from the registry.
    #[arg(long, conflicts_with_all = ["gauss", "eta"], required_unless_present = "gauss")]
    surface: Option<String>,
    /// Registry parameter, e.g. k=3 (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Gauss map G(z).
    #[arg(long, requires = "eta")]
    gauss: Option<String>,
    /// Height coefficient h(z) of eta = h dz.
    #[arg(long, requires = "gauss")]
    eta: Option<String>,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Base point "a+bi"; defaults to the surface's base point.
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    #[arg(long, default_value_t = 5)]
    max_ell: usize,
    /// Coefficients reported per differential.
    #[arg(long, default_value_t = 12)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DegreeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Base points (repeatable, at least two); chosen automatically in the
    /// chart rectangle when absent.
    #[arg(long = "base", allow_hyphen_values = true)]
    bases: Vec<String>,
    /// Chart rectangle "x0,y0,x1,y1" for automatic base points.
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    #[arg(long, default_value_t = 8)]
    max_degree: usize,
    #[arg(long, default_value_t = 24)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Approximant indices.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    n: Vec<usize>,
    /// Comparison rectangle "x0,y0,x1,y1" in the adapted chart.
    #[arg(long, default_value = "-0.2,-0.2,0.2,0.2", allow_hyphen_values = true)]
    rect: String,
    /// Comparison grid "NXxNY".
    #[arg(long, default_value = "9x9")]
    grid: String,
    #[arg(long, default_value_t = 40)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Chart rectangle "x0,y0,x1,y1"; defaults to the surface's chart.
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    #[arg(long, default_value = "40x40")]
    grid: String,
    /// Bonnet phase; defaults to the surface's own.
    #[arg(long)]
    theta: Option<f64>,
    /// Also write vertex normals.
    #[arg(long)]
    normals: bool,
    /// OBJ file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Moebius map "a,b,c,d" applied to the Gauss map.
    #[arg(long, allow_hyphen_values = true)]
    goursat: Option<String>,
    /// Bonnet phase.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bonnet: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 5)]
    max_ell: usize,
    #[arg(long, default_value_t = 16)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numeric(e: impl Display) -> Failure {
    Failure::Numeric(e.to_string())
}

type Result<T> = std::result::Result<T, Failure>;

/// Resolved Weierstrass data with its defaults.
struct Source {
    surface: Option<String>,
    gauss: String,
    eta: String,
    params: Vec<(String, f64)>,
    data: WeierstrassData,
    rect: Rect,
    base: C64,
    phase: f64,
    origin: Vec3,
}

impl DataArgs {
    fn resolve(&self) -> Result<Source> {
        if let Some(name) = &self.surface {
            let params = self.params.iter().map(|p| parse_param(p)).collect::<Result<Vec<_>>>()?;
            let i = registry::instantiate(name, &params).map_err(usage)?;
            return Ok(Source {
                surface: Some(i.name),
                gauss: i.gauss_text,
                eta: i.height_text,
                params: i.params,
                data: i.data,
                rect: i.rect,
                base: i.base,
                phase: i.phase,
                origin: i.origin,
            });
        }
        if !self.params.is_empty() {
            return Err(usage("--param needs --surface"));
        }
        let (Some(g), Some(h)) = (&self.gauss, &self.eta) else {
            return Err(usage("give --surface or both --gauss and --eta"));
        };
        let data = WeierstrassData::parse("custom", g, h).map_err(usage)?;
        Ok(Source {
            surface: None,
            gauss: g.clone(),
            eta: h.clone(),
            params: Vec::new(),
            data,
            rect: Rect {
                x0: -1.0,
                y0: -1.0,
                x1: 1.0,
                y1: 1.0,
            },
            base: C64::new(0.0, 0.0),
            phase: 0.0,
            origin: Vec3::zeros(),
        })
    }
}

impl Source {
    fn describe(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
        json!({
            "surface": self.surface,
            "gauss": self.gauss,
            "eta": self.eta,
            "params": params,
        })
    }

    fn base_or_default(&self, text: &Option<String>) -> Result<C64> {
        text.as_deref().map(parse_complex).unwrap_or(Ok(self.base))
    }
}

fn parse_param(text: &str) -> Result<(String, f64)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("parameter '{text}' is not NAME=VALUE")))?;
    let v = f64::from_str(v.trim()).map_err(|e| usage(format!("parameter '{text}': {e}")))?;
    Ok((k.trim().to_string(), v))
}

/// Complex literal such as `0.1+0.05i`, `-2` or `i`.
fn parse_complex(text: &str) -> Result<C64> {
    let e = expr::parse(text).map_err(|e| usage(format!("'{text}': {e}")))?;
    if !e.is_constant() {
        return Err(usage(format!("'{text}' is not a complex number")));
    }
    e.eval(C64::new(0.0, 0.0)).map_err(|e| usage(format!("'{text}': {e}")))
}

fn parse_rect(text: &str) -> Result<Rect> {
    let v = text
        .split(',')
        .map(|s| f64::from_str(s.trim()))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|e| usage(format!("rectangle '{text}': {e}")))?;
    match v[..] {
        [x0, y0, x1, y1] if x0 < x1 && y0 < y1 => Ok(Rect { x0, y0, x1, y1 }),
        _ => Err(usage(format!("rectangle '{text}' must be x0,y0,x1,y1 with x0<x1 and y0<y1"))),
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || usage(format!("grid '{text}' must be NXxNY with both at least 2"));
    let (a, b) = text.split_once('x').ok_or_else(bad)?;
    let nx = usize::from_str(a.trim()).map_err(|_| bad())?;
    let ny = usize::from_str(b.trim()).map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(bad());
    }
    Ok((nx, ny))
}

fn parse_moebius(text: &str) -> Result<MoebiusMap> {
    let parts = text.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    let [a, b, c, d] = parts[..] else {
        return Err(usage(format!("Moebius map '{text}' must be a,b,c,d")));
    };
    MoebiusMap::new(a, b, c, d).map_err(usage)
}

/// A number printed with 17 significant digits; non-finite values become
/// `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&g17(x)).expect("finite decimal"))
    } else {
        Value::Null
    }
}

fn complex(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn differential(d: &Differential, order: usize) -> Value {
    let s = d.s.truncated(order);
    json!({
        "ell": d.ell,
        "zero": d.is_zero(),
        "valuation": if d.is_zero() { None } else { d.s.effective_valuation() },
        "residue": residue(d).ok().map(complex),
        "first_exponent": s.valuation(),
        "coefficients": s.coeffs().iter().map(|c| complex(*c)).collect::<Vec<_>>(),
    })
}

fn report(command: &str, mut body: Map<String, Value>) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    out.append(&mut body);
    Value::Object(out)
}

fn emit(v: &Value, out: &Output) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| numeric(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn body(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report bodies are objects"),
    }
}

fn cmd_entropy(a: &EntropyArgs) -> Result<()> {
    if a.max_ell < 2 {
        return Err(usage("--max-ell must be at least 2"));
    }
    let src = a.data.resolve()?;
    let p = src.base_or_default(&a.base)?;
    let seq = entropy_sequence(&src.data, p, a.max_ell, a.order.max(1)).map_err(numeric)?;
    let v = report(
        "entropy",
        body(json!({
            "data": src.describe(),
            "base": complex(p),
            "differentials": seq.iter().map(|d| differential(d, a.order)).collect::<Vec<_>>(),
        })),
    );
    emit(&v, &a.output)
}

fn cmd_degree(a: &DegreeArgs) -> Result<()> {
    if a.max_degree < 2 {
        return Err(usage("--max-degree must be at least 2"));
    }
    let src = a.data.resolve()?;
    let points = if a.bases.is_empty() {
        let rect = a.rect.as_deref().map(parse_rect).transpose()?.unwrap_or(src.rect);
        degree::auto_base_points(&src.data, rect, 3)
    } else {
        a.bases.iter().map(|b| parse_complex(b)).collect::<Result<Vec<_>>>()?
    };
    if points.len() < 2 {
        return Err(usage("need at least two base points"));
    }
    let t = degree::detect_degree(&src.data, &points, a.max_degree, a.order, DEFAULT_TOL).map_err(numeric)?;
    let terms: Vec<Value> = t
        .terms
        .iter()
        .map(|(m, c)| {
            json!({
                "monomial": degree::monomial_name(m),
                "parts": m,
                "coefficient": complex(*c),
            })
        })
        .collect();
    let v = report(
        "degree",
        body(json!({
            "data": src.describe(),
            "degree": t.n,
            "relation": format!("P{} + sum c_m m = 0", t.n),
            "terms": terms,
            "residual": num(t.residual),
            "condition": num(t.condition),
            "base_points": t.base_points.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        })),
    );
    emit(&v, &a.output)
}

fn approximant(r: &ApproximantReport) -> Value {
    json!({
        "n": r.n,
        "sup_error": num(r.sup_error),
        "p_n_norm": num(r.p_n_norm),
        "certified": approx::certified(r),
    })
}

fn cmd_approx(a: &ApproxArgs) -> Result<()> {
    if let Some(n) = a.n.iter().find(|&&n| n < 3) {
        return Err(usage(format!("approximant index must be at least 3, got {n}")));
    }
    let src = a.data.resolve()?;
    let p = src.base_or_default(&a.base)?;
    let rect = parse_rect(&a.rect)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let grid = Grid::rect(rect, nx, ny);
    let reports = approx::convergence_report(&src.data, p, &a.n, &grid, a.order).map_err(numeric)?;
    let v = report(
        "approx",
        body(json!({
            "data": src.describe(),
            "base": complex(p),
            "rect": [num(rect.x0), num(rect.y0), num(rect.x1), num(rect.y1)],
            "grid": [nx, ny],
            "reports": reports.iter().map(approximant).collect::<Vec<_>>(),
        })),
    );
    emit(&v, &a.output)
}

fn cmd_mesh(a: &MeshArgs) -> Result<()> {
    let src = a.data.resolve()?;
    let p = src.base_or_default(&a.base)?;
    let rect = a.rect.as_deref().map(parse_rect).transpose()?.unwrap_or(src.rect);
    let (nx, ny) = parse_grid(&a.grid)?;
    let theta = a.theta.unwrap_or(src.phase);
    // the registry origin places the surface like its usual closed form
    let shift = if a.base.is_none() && a.theta.is_none() { src.origin } else { Vec3::zeros() };
    let s = surface::integrate_immersion(&src.data, p, &Grid::rect(rect, nx, ny), theta)
        .map_err(numeric)?
        .translated(shift);
    surface::export_mesh(&s, &a.out, a.normals).map_err(numeric)?;
    let v = report(
        "mesh",
        body(json!({
            "data": src.describe(),
            "base": complex(p),
            "theta": num(theta),
            "path": a.out.display().to_string(),
            "vertices": s.points.len(),
            "faces": (s.rows - 1) * (s.cols - 1),
        })),
    );
    emit(&v, &Output { out: None })
}

fn cmd_transform(a: &TransformArgs) -> Result<()> {
    if a.max_ell < 2 {
        return Err(usage("--max-ell must be at least 2"));
    }
    if !(a.scale > 0.0) {
        return Err(usage(format!("--scale must be positive, got {}", a.scale)));
    }
    let src = a.data.resolve()?;
    let p = src.base_or_default(&a.base)?;
    let m = a.goursat.as_deref().map(parse_moebius).transpose()?;
    let mut w = src.data.clone();
    if let Some(m) = &m {
        w = surface::goursat_transform(&w, m).map_err(numeric)?;
    }
    w = surface::scale_and_bonnet(&w, a.scale, a.bonnet).map_err(numeric)?;
    let before = entropy_sequence(&src.data, p, a.max_ell, a.order).map_err(numeric)?;
    let after = entropy_sequence(&w, p, a.max_ell, a.order).map_err(numeric)?;
    let residual = differentials::sequence_discrepancy(&before, &after, a.order.min(10));
    let v = report(
        "transform",
        body(json!({
            "data": src.describe(),
            "base": complex(p),
            "goursat": m.map(|m| [m.a, m.b, m.c, m.d].map(complex).to_vec()),
            "bonnet": num(a.bonnet),
            "scale": num(a.scale),
            "gauss": w.gauss.to_string(),
            "eta": w.height.to_string(),
            "invariance_residual": num(residual),
        })),
    );
    emit(&v, &a.output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Entropy(a) => cmd_entropy(a),
        Command::Degree(a) => cmd_degree(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Mesh(a) => cmd_mesh(a),
        Command::Transform(a) => cmd_transform(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
