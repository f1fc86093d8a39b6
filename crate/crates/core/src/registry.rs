//! Named surfaces with their Weierstrass data, parameters and default charts.
//!
//! Parameters are substituted into the expression text before parsing:
//! `{k}`, `{k-1}` and `{t}` are replaced by the parameter values.

use crate::differentials::{DiffError, WeierstrassData};
use crate::surface::Vec3;
use crate::{Rect, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown surface '{0}'")]
    UnknownSurface(String),
    #[error("surface '{surface}' has no parameter '{name}'")]
    UnknownParameter { surface: String, name: String },
    #[error("parameter {name}={value} is invalid: {reason}")]
    InvalidParameter { name: String, value: f64, reason: &'static str },
    #[error(transparent)]
    Data(#[from] DiffError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub integer: bool,
    pub min: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceEntry {
    pub name: &'static str,
    pub gauss: &'static str,
    pub height: &'static str,
    pub params: &'static [ParamSpec],
    pub rect: Rect,
    pub base: C64,
    /// Bonnet phase and position of the base point that reproduce the
    /// surface's usual closed form.
    pub phase: f64,
    pub origin: fn(&[f64]) -> [f64; 3],
}

/// A registry entry with its parameters filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub data: WeierstrassData,
    pub gauss_text: String,
    pub height_text: String,
    pub params: Vec<(String, f64)>,
    pub rect: Rect,
    pub base: C64,
    pub phase: f64,
    pub origin: Vec3,
}

fn at_origin(_: &[f64]) -> [f64; 3] {
    [0.0, 0.0, 0.0]
}

fn limit_origin(p: &[f64]) -> [f64; 3] {
    let t = p[0];
    [-t * t / 2.0, 0.0, -2.0 * t]
}

const K2: &[ParamSpec] = &[ParamSpec {
    name: "k",
    default: 2.0,
    integer: true,
    min: 2.0,
}];
const K3: &[ParamSpec] = &[ParamSpec {
    name: "k",
    default: 3.0,
    integer: true,
    min: 2.0,
}];
const T: &[ParamSpec] = &[ParamSpec {
    name: "t",
    default: 1.0,
    integer: false,
    min: f64::MIN_POSITIVE,
}];

const fn square(a: f64) -> Rect {
    Rect {
        x0: -a,
        y0: -a,
        x1: a,
        y1: a,
    }
}

const PI: f64 = std::f64::consts::PI;

static ENTRIES: [SurfaceEntry; 8] = [
    SurfaceEntry {
        name: "enneper",
        gauss: "z",
        height: "z",
        params: &[],
        rect: square(1.0),
        base: C64::new(0.0, 0.0),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "helicoid",
        gauss: "exp(z)",
        height: "i",
        params: &[],
        rect: Rect {
            x0: -1.0,
            y0: -PI,
            x1: 1.0,
            y1: PI,
        },
        base: C64::new(0.0, 0.0),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "catenoid",
        gauss: "exp(z)",
        height: "-1",
        params: &[],
        rect: Rect {
            x0: -1.0,
            y0: -PI,
            x1: 1.0,
            y1: PI,
        },
        base: C64::new(0.0, 0.0),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "enneper-k",
        gauss: "z^{k}",
        height: "z^{k}",
        params: K2,
        rect: square(1.0),
        base: C64::new(0.5, 0.5),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "limit",
        gauss: "exp(-z)/{t}",
        height: "2*{t}*exp(z)",
        params: T,
        rect: Rect {
            x0: -2.0,
            y0: -PI,
            x1: 0.5,
            y1: PI,
        },
        base: C64::new(0.0, 0.0),
        phase: PI,
        origin: limit_origin,
    },
    SurfaceEntry {
        name: "scherk",
        gauss: "z",
        height: "i*z/(z^4-1)",
        params: &[],
        rect: square(0.6),
        base: C64::new(0.1, 0.05),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "schwarz",
        gauss: "z",
        height: "z/sqrt(z^8-14*z^4+1)",
        params: &[],
        rect: square(0.35),
        base: C64::new(0.0, 0.0),
        phase: 0.0,
        origin: at_origin,
    },
    SurfaceEntry {
        name: "knoid",
        gauss: "z^{k-1}",
        height: "z^{k-1}/(z^{k}-1)^2",
        params: K3,
        rect: square(0.5),
        base: C64::new(0.25, 0.1),
        phase: 0.0,
        origin: at_origin,
    },
];

pub fn entries() -> &'static [SurfaceEntry] {
    &ENTRIES
}

pub fn lookup(name: &str) -> Option<&'static SurfaceEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

fn substitute(text: &str, specs: &[ParamSpec], values: &[f64]) -> String {
    let mut out = text.to_string();
    for (spec, v) in specs.iter().zip(values) {
        let show = |x: f64| {
            if spec.integer {
                format!("{}", x as i64)
            } else {
                format!("{x}")
            }
        };
        out = out.replace(&format!("{{{}-1}}", spec.name), &show(v - 1.0));
        out = out.replace(&format!("{{{}}}", spec.name), &show(*v));
    }
    out
}

/// Fills in `params` (missing ones take their defaults) and parses the data.
pub fn instantiate(name: &str, params: &[(String, f64)]) -> Result<Instance, RegistryError> {
    let entry = lookup(name).ok_or_else(|| RegistryError::UnknownSurface(name.to_string()))?;
    let mut values: Vec<f64> = entry.params.iter().map(|p| p.default).collect();
    for (key, value) in params {
        let i = entry
            .params
            .iter()
            .position(|p| p.name == key)
            .ok_or_else(|| RegistryError::UnknownParameter {
                surface: name.to_string(),
                name: key.clone(),
            })?;
        let spec = entry.params[i];
        let invalid = |reason| RegistryError::InvalidParameter {
            name: key.clone(),
            value: *value,
            reason,
        };
        if !value.is_finite() {
            return Err(invalid("not finite"));
        }
        if spec.integer && value.fract() != 0.0 {
            return Err(invalid("must be an integer"));
        }
        if *value < spec.min {
            return Err(invalid("below the allowed minimum"));
        }
        values[i] = *value;
    }
    let gauss_text = substitute(entry.gauss, entry.params, &values);
    let height_text = substitute(entry.height, entry.params, &values);
    let data = WeierstrassData::parse(name, &gauss_text, &height_text)?;
    let o = (entry.origin)(&values);
    Ok(Instance {
        name: name.to_string(),
        data,
        gauss_text,
        height_text,
        params: entry.params.iter().map(|p| p.name.to_string()).zip(values).collect(),
        rect: entry.rect,
        base: entry.base,
        phase: entry.phase,
        origin: Vec3::new(o[0], o[1], o[2]),
    })
}
