//! Angles in radians, written either as numbers or as `pi` fraction literals
//! such as `"pi/4"`, `"3pi/8"`, `"-pi"` or `"2*pi/3"`.

use std::f64::consts::PI;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Parses a plain number or a `[sign][k][*]pi[/m]` literal.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Precondition(format!("cannot parse angle '{text}'"));
    if let Ok(x) = s.parse::<f64>() {
        return if x.is_finite() { Ok(x) } else { Err(bad()) };
    }
    let lower = s.to_ascii_lowercase();
    let idx = lower.find("pi").ok_or_else(bad)?;
    let (head, tail) = (&lower[..idx], &lower[idx + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match tail {
        "" => 1.0,
        t => t
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    let x = coef * PI / denom;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Number(f64),
    Text(String),
}

impl RawAngle {
    fn radians<E: de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            RawAngle::Number(x) => Ok(x),
            RawAngle::Text(s) => parse_angle(&s).map_err(E::custom),
        }
    }
}

/// `deserialize_with` helper for a single angle.
pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    RawAngle::deserialize(d)?.radians()
}

/// `deserialize_with` helper for a list of angles.
pub fn deserialize_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    struct AngleList;

    impl<'de> Visitor<'de> for AngleList {
        type Value = Vec<f64>;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a list of angles (numbers or strings like \"pi/4\")")
        }

        fn visit_seq<A: SeqAccess<'de>>(
            self,
            mut seq: A,
        ) -> std::result::Result<Vec<f64>, A::Error> {
            let mut out = Vec::new();
            while let Some(raw) = seq.next_element::<RawAngle>()? {
                out.push(raw.radians()?);
            }
            Ok(out)
        }
    }

    d.deserialize_seq(AngleList)
}
