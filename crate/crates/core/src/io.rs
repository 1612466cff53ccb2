//! Shared serialization helpers: angle literals and deterministic JSON output.

use std::io;

use serde::{Deserialize, Serialize};

/// An angle in a JSON file: a number of radians, or a string such as
/// `"5pi/6"`, `"pi"`, `"-2*pi/3"` or `"π/4"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Value(f64),
    #[serde(deserialize_with = "deserialize_angle_text")]
    Text(f64),
}

impl Angle {
    pub fn radians(&self) -> f64 {
        match *self {
            Angle::Value(v) | Angle::Text(v) => v,
        }
    }
}

fn deserialize_angle_text<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse_angle(&s).map_err(serde::de::Error::custom)
}

/// Parses radians, optionally written as a rational multiple of π.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.trim().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    if !s.contains("pi") {
        return s.parse::<f64>().map_err(|e| format!("bad angle `{text}`: {e}"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d.parse().map_err(|e| format!("bad denominator in `{text}`: {e}"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            (n, d)
        }
        None => (s.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(|| format!("bad angle `{text}`"))?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let c: f64 = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse().map_err(|e| format!("bad coefficient in `{text}`: {e}"))?,
    };
    Ok(c * std::f64::consts::PI / den)
}

/// Formats a float with 17 significant digits, e.g. `7.8539816339744828e-1`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:.16e}")
}

/// JSON formatter that writes every float with 17 significant digits so
/// output is byte-for-byte reproducible and round-trips exactly.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with [`FixedDigits`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
