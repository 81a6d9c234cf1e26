//! Unit-tagged quantities in configuration files.
//!
//! A quantity is either a bare JSON number, read as SI, or a string
//! `"<number> <unit>"` whose unit must belong to the expected dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Volume,
    Pressure,
    /// m/N, the Green-function correction g3.
    Compliance,
    Angle,
}

impl Dimension {
    fn si_name(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Volume => "m3",
            Dimension::Pressure => "Pa",
            Dimension::Compliance => "m/N",
            Dimension::Angle => "rad",
        }
    }

    fn factor(self, unit: &str) -> Option<Scale> {
        use Scale::{Factor, Pow10};
        let f = match (self, unit) {
            (Dimension::Length, "m") => Pow10(0),
            (Dimension::Length, "mm") => Pow10(-3),
            (Dimension::Length, "um" | "µm" | "μm") => Pow10(-6),
            (Dimension::Length, "nm") => Pow10(-9),
            (Dimension::Volume, "m3" | "m^3" | "m³") => Pow10(0),
            (Dimension::Volume, "mm3" | "mm^3" | "mm³") => Pow10(-9),
            (Dimension::Volume, "um3" | "um^3" | "µm3" | "µm^3" | "µm³" | "μm3" | "μm^3" | "μm³") => Pow10(-18),
            (Dimension::Volume, "nm3" | "nm^3" | "nm³") => Pow10(-27),
            (Dimension::Pressure, "Pa") => Pow10(0),
            (Dimension::Pressure, "kPa") => Pow10(3),
            (Dimension::Pressure, "MPa") => Pow10(6),
            (Dimension::Pressure, "GPa") => Pow10(9),
            (Dimension::Compliance, "m/N" | "nm/nN" | "um/uN" | "µm/µN") => Pow10(0),
            (Dimension::Compliance, "nm/N") => Pow10(-9),
            (Dimension::Compliance, "um/N" | "µm/N") => Pow10(-6),
            (Dimension::Angle, "rad") => Pow10(0),
            (Dimension::Angle, "deg") => Factor(std::f64::consts::PI / 180.0),
            _ => return None,
        };
        Some(f)
    }
}

enum Scale {
    /// Decimal prefix: folded into the exponent so "400 nm" reads as the
    /// double nearest to 4e-7.
    Pow10(i32),
    Factor(f64),
}

/// A configuration value as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Si(f64),
    Tagged(String),
}

impl Quantity {
    /// Value in SI units.
    pub fn si(&self, dim: Dimension) -> Result<f64> {
        match self {
            Quantity::Si(v) => Ok(*v),
            Quantity::Tagged(text) => parse_tagged(text, dim),
        }
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Si(v)
    }
}

fn unit_error(text: &str, reason: impl Into<String>) -> Error {
    Error::Unit { text: text.to_string(), reason: reason.into() }
}

/// Parses `"5 um"`, `"5um"`, `"1e-6 m"`, `"10 kPa"`.
pub fn parse_tagged(text: &str, dim: Dimension) -> Result<f64> {
    let t = text.trim();
    // units never start with e/E, so the exponent marker is unambiguous
    let split = t
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = (t[..split].trim(), t[split..].trim());
    if num.parse::<f64>().is_err() {
        return Err(unit_error(text, "no leading number"));
    }
    if unit.is_empty() {
        return Err(unit_error(text, format!("missing unit; write a bare number for {}", dim.si_name())));
    }
    let f = dim
        .factor(unit)
        .ok_or_else(|| unit_error(text, format!("unit `{unit}` is not a {:?} unit (SI: {})", dim, dim.si_name())))?;
    let v = match f {
        Scale::Pow10(k) => {
            let (mantissa, exp) = match num.find(['e', 'E']) {
                Some(i) => (&num[..i], num[i + 1..].parse::<i32>().map_err(|_| unit_error(text, "bad exponent"))?),
                None => (num, 0),
            };
            format!("{mantissa}e{}", exp + k).parse::<f64>().map_err(|_| unit_error(text, "no leading number"))?
        }
        Scale::Factor(c) => num.parse::<f64>().expect("checked above") * c,
    };
    if !v.is_finite() {
        return Err(unit_error(text, "value is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_values() {
        assert_eq!(parse_tagged("10 kPa", Dimension::Pressure).unwrap(), 1e4);
        assert_eq!(parse_tagged("5um", Dimension::Length).unwrap(), 5e-6);
        assert_eq!(parse_tagged("5 µm", Dimension::Length).unwrap(), 5e-6);
        assert_eq!(parse_tagged("400 nm", Dimension::Length).unwrap(), 4e-7);
        assert_eq!(parse_tagged("-0.7 um", Dimension::Length).unwrap(), -7e-7);
        assert_eq!(parse_tagged("90 deg", Dimension::Angle).unwrap(), std::f64::consts::FRAC_PI_2);
        assert_eq!(parse_tagged("1e-6 m", Dimension::Length).unwrap(), 1e-6);
        assert_eq!(parse_tagged("2.5e-1um3", Dimension::Volume).unwrap(), 2.5e-19);
        assert_eq!(parse_tagged("3 nm/nN", Dimension::Compliance).unwrap(), 3.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(parse_tagged("5 um", Dimension::Pressure), Err(Error::Unit { .. })));
        assert!(matches!(parse_tagged("10 kPa", Dimension::Length), Err(Error::Unit { .. })));
        assert!(parse_tagged("5", Dimension::Length).is_err());
        assert!(parse_tagged("um", Dimension::Length).is_err());
        assert!(parse_tagged("5 furlongs", Dimension::Length).is_err());
    }

    #[test]
    fn untagged_json_forms() {
        let q: Quantity = serde_json::from_str("2.5e-6").unwrap();
        assert_eq!(q.si(Dimension::Length).unwrap(), 2.5e-6);
        let q: Quantity = serde_json::from_str("\"3 mm\"").unwrap();
        assert_eq!(q.si(Dimension::Length).unwrap(), 3e-3);
    }
}
