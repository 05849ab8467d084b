//! Unit-suffixed quantities.
//!
//! Every frequency inside the library is an angular frequency in rad/s with
//! ħ = 1. Text inputs such as `"0.5 kHz"` are cycles per second and get the
//! 2π factor on the way in; `"3 rad/s"` and bare numbers pass through.

use std::f64::consts::PI;

use serde_json::Value;

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Physical dimension a parsed quantity must carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Frequency,
    Length,
    Mass,
    Dimensionless,
    /// Effective photon mass, quoted in s·m⁻² per cycle.
    PhotonMass,
}

fn scale_for(dim: Dim, unit: &str) -> Option<f64> {
    let u = unit.trim();
    match dim {
        Dim::Frequency => Some(match u {
            "" | "rad/s" => 1.0,
            "Hz" => 2.0 * PI,
            "kHz" => 2.0 * PI * 1e3,
            "MHz" => 2.0 * PI * 1e6,
            "GHz" => 2.0 * PI * 1e9,
            "THz" => 2.0 * PI * 1e12,
            "krad/s" => 1e3,
            "Mrad/s" => 1e6,
            _ => return None,
        }),
        Dim::Length => Some(match u {
            "" | "m" => 1.0,
            "mm" => 1e-3,
            "um" | "μm" => 1e-6,
            "nm" => 1e-9,
            _ => return None,
        }),
        Dim::Mass => Some(match u {
            "" | "kg" => 1.0,
            "amu" | "u" => AMU,
            _ => return None,
        }),
        Dim::Dimensionless => match u {
            "" => Some(1.0),
            _ => None,
        },
        Dim::PhotonMass => match u {
            "" | "s/m^2" | "Hz^-1/m^2" => Some(1.0),
            _ => None,
        },
    }
}

/// Parses `"<number> <unit>"` (or a bare number) into SI / rad/s.
pub fn parse_quantity(text: &str, dim: Dim) -> std::result::Result<f64, String> {
    let t = text.trim();
    let split = t
        .find(|c: char| c.is_whitespace())
        .unwrap_or_else(|| {
            t.find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
                .unwrap_or(t.len())
        });
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse number in {text:?}"))?;
    let scale = scale_for(dim, unit).ok_or_else(|| format!("unknown unit {:?} for {dim:?}", unit.trim()))?;
    Ok(value * scale)
}

/// Reads a quantity out of a JSON value, which may be a number or a unit string.
pub fn quantity_from_json(v: &Value, dim: Dim, path: &str) -> Result<f64> {
    let parsed = match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| "number out of range".to_string()),
        Value::String(s) => parse_quantity(s, dim),
        _ => Err("expected a number or a unit-suffixed string".to_string()),
    };
    parsed.map_err(|reason| Error::Config {
        path: path.to_string(),
        reason,
    })
}

/// Converts rad/s to cycles per second.
pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}
