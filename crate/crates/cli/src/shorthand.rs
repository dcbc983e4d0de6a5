//! Compact command-line notation for gluing functions, spaces and points,
//! translated into config definitions.
//!
//! Gluing functions: `euclidean:n`, `weighted-euclidean:w1,w2,..`, `sum:n`,
//! `max:n`, `lp:n:p`, `weighted-lp:p:w1,w2,..`, `two-valued:n`,
//! `coordinate-power:n:i:e`, or an inline JSON definition.
//! Spaces: `line`, `half-line`, `lp:m:p`, `discrete:n`, or inline JSON.
//! Points: comma-separated coordinates, split across product factors in order;
//! `;` separates points.

use crate::config::{PhiDef, SpaceDef};
use crate::CliError;
use phiprod::Exponent;
use serde_json::{json, Value};

fn bad(what: &str, text: &str) -> CliError {
    CliError::Config(format!("cannot parse {what} {text:?}"))
}

fn number<T: std::str::FromStr>(what: &str, text: &str) -> Result<T, CliError> {
    text.trim().parse().map_err(|_| bad(what, text))
}

fn exponent(text: &str) -> Result<Exponent, CliError> {
    match text.trim() {
        "inf" | "infinity" => Ok(Exponent::Infinity),
        p => Ok(Exponent::Finite(number("exponent", p)?)),
    }
}

fn list(what: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(|x| number(what, x)).collect()
}

fn inline_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

pub fn parse_phi(text: &str) -> Result<PhiDef, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return inline_json("phi", text);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let n = |k: usize| -> Result<usize, CliError> {
        number(
            "phi dimension",
            parts.get(k).ok_or_else(|| bad("phi", text))?,
        )
    };
    let def = match (parts[0], parts.len()) {
        ("euclidean", 2) => PhiDef::Euclidean { dimension: n(1)? },
        ("weighted-euclidean", 2) => PhiDef::WeightedEuclidean {
            weights: list("weight", parts[1])?,
        },
        ("sum", 2) => PhiDef::Sum { dimension: n(1)? },
        ("max", 2) => PhiDef::Max { dimension: n(1)? },
        ("lp", 3) => PhiDef::Lp {
            dimension: n(1)?,
            exponent: exponent(parts[2])?,
        },
        ("weighted-lp", 3) => PhiDef::WeightedLp {
            exponent: exponent(parts[1])?,
            weights: list("weight", parts[2])?,
        },
        ("two-valued", 2) => PhiDef::TwoValued { dimension: n(1)? },
        ("coordinate-power", 4) => PhiDef::CoordinatePower {
            dimension: n(1)?,
            index: n(2)?,
            exponent: number("exponent", parts[3])?,
        },
        _ => return Err(bad("phi", text)),
    };
    Ok(def)
}

pub fn parse_space(text: &str) -> Result<SpaceDef, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return inline_json("space", text);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let def = match (parts[0], parts.len()) {
        ("line" | "real-line", 1) => SpaceDef::RealLine,
        ("half-line", 1) => SpaceDef::HalfLine,
        ("lp", 3) => SpaceDef::Lp {
            dimension: number("dimension", parts[1])?,
            exponent: exponent(parts[2])?,
            weights: None,
        },
        ("discrete", 2) => SpaceDef::Discrete {
            points: number("point count", parts[1])?,
        },
        _ => return Err(bad("space", text)),
    };
    Ok(def)
}

/// `"0,0;3,4"` into `[[0, 0], [3, 4]]`.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';').map(|p| list("coordinate", p)).collect()
}

pub fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    list("coordinate", text)
}

/// Number of flat coordinates a point of a simple space occupies.
fn width(space: &SpaceDef) -> Result<usize, CliError> {
    match space {
        SpaceDef::RealLine
        | SpaceDef::HalfLine
        | SpaceDef::Discrete { .. }
        | SpaceDef::Finite { .. } => Ok(1),
        SpaceDef::Lp { dimension, .. } => Ok(*dimension),
        SpaceDef::Product { .. } => Err(CliError::Config(
            "nested products need inline JSON points in a config file".into(),
        )),
    }
}

fn factor_json(space: &SpaceDef, coords: &[f64]) -> Value {
    match space {
        SpaceDef::Lp { .. } => json!(coords),
        SpaceDef::Discrete { .. } | SpaceDef::Finite { .. } => json!(coords[0] as u64),
        _ => json!(coords[0]),
    }
}

/// JSON point of the product of `factors`, or of the single factor when
/// `product` is false, from a flat coordinate vector.
pub fn point_json(factors: &[SpaceDef], product: bool, flat: &[f64]) -> Result<Value, CliError> {
    let widths = factors.iter().map(width).collect::<Result<Vec<_>, _>>()?;
    let total: usize = widths.iter().sum();
    if flat.len() != total {
        return Err(CliError::Config(format!(
            "point has {} coordinates, the space needs {total}",
            flat.len()
        )));
    }
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config("point coordinates must be finite".into()));
    }
    let mut parts = Vec::with_capacity(factors.len());
    let mut at = 0;
    for (f, w) in factors.iter().zip(widths) {
        parts.push(factor_json(f, &flat[at..at + w]));
        at += w;
    }
    Ok(if product {
        Value::Array(parts)
    } else {
        parts.remove(0)
    })
}
