//! Physical quantities written as `"<number> <unit>"` strings.
//!
//! Bare numbers are taken in SI base units (Hz, W, rad, s). Decibel powers
//! are converted to watts.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Frequency,
    Power,
    Angle,
    Time,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Frequency => "frequency",
            Kind::Power => "power",
            Kind::Angle => "angle",
            Kind::Time => "time",
        }
    }

    fn accepted(self) -> &'static str {
        match self {
            Kind::Frequency => "Hz, kHz, MHz, GHz",
            Kind::Power => "W, mW, dBW, dBm",
            Kind::Angle => "rad, deg",
            Kind::Time => "s, ms, us, ns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot read {text:?} as a {kind}: {reason}")]
pub struct UnitError {
    pub text: String,
    pub kind: &'static str,
    pub reason: String,
}

/// Splits `"2.4 GHz"` or `"2.4GHz"` into the number and the unit suffix.
fn split(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    let end = t
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic()
                && !(matches!(c, 'e' | 'E')
                    && t[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))
        })
        .map_or(t.len(), |(i, _)| i);
    let value = t[..end].trim().parse().ok()?;
    Some((value, t[end..].trim()))
}

pub fn parse(text: &str, kind: Kind) -> Result<f64, UnitError> {
    let error = |reason: String| UnitError {
        text: text.to_string(),
        kind: kind.name(),
        reason,
    };
    let (value, unit) =
        split(text).ok_or_else(|| error("expected a number followed by a unit".into()))?;
    let converted = match (kind, unit) {
        (Kind::Frequency, "" | "Hz") => value,
        (Kind::Frequency, "kHz") => value * 1e3,
        (Kind::Frequency, "MHz") => value * 1e6,
        (Kind::Frequency, "GHz") => value * 1e9,
        (Kind::Power, "" | "W") => value,
        (Kind::Power, "mW") => value / 1e3,
        (Kind::Power, "dBW") => db_to_watts(value),
        (Kind::Power, "dBm" | "dBmW") => db_to_watts(value - 30.0),
        (Kind::Angle, "" | "rad") => value,
        (Kind::Angle, "deg") => value.to_radians(),
        (Kind::Time, "" | "s") => value,
        (Kind::Time, "ms") => value / 1e3,
        (Kind::Time, "us" | "µs") => value / 1e6,
        (Kind::Time, "ns") => value / 1e9,
        _ => {
            return Err(error(format!(
                "unknown unit {unit:?}, expected one of {}",
                kind.accepted()
            )))
        }
    };
    if converted.is_finite() {
        Ok(converted)
    } else {
        Err(error("value is not finite".into()))
    }
}

fn db_to_watts(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn format_mhz(hz: f64) -> String {
    format!("{} MHz", hz / 1e6)
}

pub fn format_dbm(watts: f64) -> String {
    format!("{} dBm", watts_to_dbm(watts))
}

pub fn format_deg(rad: f64) -> String {
    format!("{} deg", rad * 180.0 / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_suffixed_values() {
        assert_eq!(parse("2.4 GHz", Kind::Frequency).unwrap(), 2.4e9);
        assert_eq!(parse("3MHz", Kind::Frequency).unwrap(), 3e6);
        assert_eq!(parse("1e3", Kind::Frequency).unwrap(), 1e3);
        assert_eq!(parse("2.5e-3 GHz", Kind::Frequency).unwrap(), 2.5e6);
        assert!((parse("-100 dBm", Kind::Power).unwrap() / 1e-13 - 1.0).abs() < 1e-12);
        assert!((parse("-130 dBW", Kind::Power).unwrap() / 1e-13 - 1.0).abs() < 1e-12);
        assert_eq!(parse("5 mW", Kind::Power).unwrap(), 5e-3);
        assert!((parse("180 deg", Kind::Angle).unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse("20 us", Kind::Time).unwrap(), 20e-6);
    }

    #[test]
    fn rejects_wrong_units() {
        let err = parse("3 dBm", Kind::Frequency).unwrap_err();
        assert!(err.to_string().contains("dBm"));
        assert!(parse("fast", Kind::Frequency).is_err());
        assert!(parse("", Kind::Power).is_err());
    }

    #[test]
    fn printed_units_read_back() {
        for hz in [2.4e9, 3e6, 1234.5678, 0.0] {
            let back = parse(&format_mhz(hz), Kind::Frequency).unwrap();
            assert!((back - hz).abs() <= 1e-12 * hz.abs());
        }
        for w in [1e-13, 0.01, 3.7, 1e-4] {
            let back = parse(&format_dbm(w), Kind::Power).unwrap();
            assert!((back - w).abs() <= 1e-12 * w);
        }
        let back = parse(&format_deg(1.0), Kind::Angle).unwrap();
        assert!((back - 1.0).abs() < 1e-12);
    }
}
