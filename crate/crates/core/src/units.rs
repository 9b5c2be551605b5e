//! Power and rate unit conversions.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn bpcu_to_nats(bits: f64) -> f64 {
    bits * LN_2
}

pub fn nats_to_bpcu(nats: f64) -> f64 {
    nats / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    Nats,
    Bpcu,
}

/// A rate tagged with the unit it was written in. Config files always carry
/// the unit suffix (`"4 bpcu"`, `"10 nats"`); internally everything is nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub unit: RateUnit,
}

impl Rate {
    pub fn nats(value: f64) -> Self {
        Rate {
            value,
            unit: RateUnit::Nats,
        }
    }

    pub fn bpcu(value: f64) -> Self {
        Rate {
            value,
            unit: RateUnit::Bpcu,
        }
    }

    pub fn to_nats(self) -> f64 {
        match self.unit {
            RateUnit::Nats => self.value,
            RateUnit::Bpcu => bpcu_to_nats(self.value),
        }
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_alphabetic())
            .ok_or_else(|| Error::Config(format!("rate `{s}` is missing a unit suffix (nats|bpcu)")))?;
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("rate `{s}` has no valid number")))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Config(format!("rate `{s}` must be finite and non-negative")));
        }
        let unit = match unit.trim().to_ascii_lowercase().as_str() {
            "nats" | "nat" => RateUnit::Nats,
            "bpcu" | "bits" | "bit" => RateUnit::Bpcu,
            other => return Err(Error::Config(format!("unknown rate unit `{other}`"))),
        };
        Ok(Rate { value, unit })
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            RateUnit::Nats => write!(f, "{} nats", self.value),
            RateUnit::Bpcu => write!(f, "{} bpcu", self.value),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An angle in radians that config files may also spell `"45 deg"` or
/// `"0.25 pi"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("cannot parse angle `{s}`"));
        let (num, scale) = if let Some(n) = t.strip_suffix("deg") {
            (n, std::f64::consts::PI / 180.0)
        } else if let Some(n) = t.strip_suffix("pi") {
            (n, std::f64::consts::PI)
        } else if let Some(n) = t.strip_suffix("rad") {
            (n, 1.0)
        } else {
            (t.as_str(), 1.0)
        };
        let num = num.trim().trim_end_matches('*').trim();
        let v: f64 = if num.is_empty() {
            1.0
        } else {
            num.parse().map_err(|_| bad())?
        };
        Ok(Angle(v * scale))
    }
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
