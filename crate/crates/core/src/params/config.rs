//! Flat `key = value` configuration text.
//!
//! ```text
//! line     := ws* ( comment | entry )? ws*
//! comment  := '#' any*
//! entry    := key ws* '=' ws* value ws* comment?
//! value    := quantity | 'true' | 'false' | 'auto' | 'two_pi' | 'bare'
//! quantity := number ws* suffix?
//! number   := [+-]? digit+ ('.' digit*)? ([eE] [+-]? digit+)?
//! suffix   := 'Hz' | 'kHz' | 'MHz' | 'GHz' | 's' | 'ms' | 'us' | 'ns'
//!           | 'mW' | 'G' | 'V/um' | 'm' | 'nm'
//! ```
//!
//! Suffixes are case-sensitive and must match the key's dimension. A bare
//! number is taken in the base unit of the key (Hz, s, mW, m). `G` and `V/um`
//! are accepted only for the ground-manifold field keys and convert with
//! 2.8 MHz/G and 1.7e5 Hz per V/um respectively.

use std::collections::HashSet;

use serde_json::{Map, Value};

use super::{RateConvention, RunConfig, StepSize};
use crate::error::{Error, Result};

/// Ground-state Zeeman shift per gauss, Hz.
const HZ_PER_GAUSS: f64 = 2.8e6;
/// Ground-state transverse Stark shift per V/um, Hz.
const HZ_PER_V_PER_UM: f64 = 1.7e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    /// Frequency that may also be given as a magnetic (G) or electric (V/um) field.
    GroundField,
    Time,
    Power,
    Length,
    Dimensionless,
    /// `Hz/√mW`, written as a plain frequency.
    RabiCalibration,
    /// Plain number in s⁻¹.
    Rate,
    Flag,
    Convention,
    Step,
}

impl Dimension {
    fn scale(self, suffix: &str) -> Option<f64> {
        let freq = |s: &str| match s {
            "" | "Hz" => Some(1.0),
            "kHz" => Some(1e3),
            "MHz" => Some(1e6),
            "GHz" => Some(1e9),
            _ => None,
        };
        let time = |s: &str| match s {
            "" | "s" => Some(1.0),
            "ms" => Some(1e-3),
            "us" => Some(1e-6),
            "ns" => Some(1e-9),
            _ => None,
        };
        match self {
            Dimension::Frequency | Dimension::RabiCalibration => freq(suffix),
            Dimension::GroundField => match suffix {
                "G" => Some(HZ_PER_GAUSS),
                "V/um" => Some(HZ_PER_V_PER_UM),
                s => freq(s),
            },
            Dimension::Time | Dimension::Step => time(suffix),
            Dimension::Power => match suffix {
                "" | "mW" => Some(1.0),
                _ => None,
            },
            Dimension::Length => match suffix {
                "" | "m" => Some(1.0),
                "nm" => Some(1e-9),
                _ => None,
            },
            Dimension::Dimensionless | Dimension::Rate => suffix.is_empty().then_some(1.0),
            Dimension::Flag | Dimension::Convention => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Parsed {
    Number(f64),
    Flag(bool),
    Convention(RateConvention),
    Step(StepSize),
}

/// One recognised configuration key.
#[derive(Clone, Copy)]
pub struct ConfigKey {
    pub name: &'static str,
    pub dimension: Dimension,
    get: fn(&RunConfig) -> Parsed,
    set: fn(&mut RunConfig, Parsed),
}

impl std::fmt::Debug for ConfigKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConfigKey")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .finish()
    }
}

impl ConfigKey {
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self.dimension,
            Dimension::Flag | Dimension::Convention | Dimension::Step
        )
    }
}

macro_rules! num_key {
    ($name:literal, $dim:expr, $($field:ident).+) => {
        ConfigKey {
            name: $name,
            dimension: $dim,
            get: |c| Parsed::Number(c.$($field).+),
            set: |c, v| {
                if let Parsed::Number(x) = v {
                    c.$($field).+ = x;
                }
            },
        }
    };
}

macro_rules! flag_key {
    ($name:literal, $field:ident) => {
        ConfigKey {
            name: $name,
            dimension: Dimension::Flag,
            get: |c| Parsed::Flag(c.$field),
            set: |c, v| {
                if let Parsed::Flag(x) = v {
                    c.$field = x;
                }
            },
        }
    };
}

/// Every key accepted in a config file, in echo order.
pub const CONFIG_KEYS: &[ConfigKey] = &[
    num_key!("refractive_index", Dimension::Dimensionless, constants.diamond_refractive_index),
    num_key!("zpl_wavelength", Dimension::Length, constants.zpl_wavelength),
    num_key!("radiative_decay_gamma", Dimension::Rate, constants.radiative_decay_gamma),
    num_key!("zpl_branching", Dimension::Dimensionless, constants.zpl_branching),
    num_key!("ex_es", Dimension::Frequency, fields.ex_es),
    num_key!("ey_es", Dimension::Frequency, fields.ey_es),
    num_key!("bz_es", Dimension::Frequency, fields.bz_es),
    num_key!("ex_gs", Dimension::GroundField, fields.ex_gs),
    num_key!("ey_gs", Dimension::GroundField, fields.ey_gs),
    num_key!("bz_gs", Dimension::GroundField, fields.bz_gs),
    num_key!("d_2a1", Dimension::Frequency, spin_spin.d_2a1),
    num_key!("d_2e2", Dimension::Frequency, spin_spin.d_2e2),
    num_key!("d_2e1", Dimension::Frequency, spin_spin.d_2e1),
    num_key!("lambda_par", Dimension::Frequency, spin_spin.lambda_par),
    num_key!("quality_factor", Dimension::Dimensionless, cavity.quality_factor),
    num_key!("mode_volume", Dimension::Dimensionless, cavity.mode_volume),
    num_key!("ensemble_size", Dimension::Dimensionless, cavity.ensemble_size),
    num_key!("rabi_per_sqrt_mw", Dimension::RabiCalibration, control.rabi_per_sqrt_mw),
    num_key!("power_storage", Dimension::Power, control.power_storage_mw),
    num_key!("power_retrieval", Dimension::Power, control.power_retrieval_mw),
    num_key!("detuning", Dimension::Frequency, detuning),
    num_key!("gamma_e", Dimension::Frequency, gamma_e),
    num_key!("gamma_s", Dimension::Frequency, gamma_s),
    num_key!("pulse_width", Dimension::Time, pulse_width),
    num_key!("storage_delay", Dimension::Time, storage_delay),
    num_key!("two_photon_offset", Dimension::Frequency, two_photon_offset),
    num_key!("t_start", Dimension::Time, t_start),
    num_key!("truncation", Dimension::Dimensionless, truncation),
    ConfigKey {
        name: "dt",
        dimension: Dimension::Step,
        get: |c| Parsed::Step(c.dt),
        set: |c, v| {
            if let Parsed::Step(x) = v {
                c.dt = x;
            }
        },
    },
    num_key!("sample_interval", Dimension::Time, sample_interval),
    num_key!("max_storage_time", Dimension::Time, max_storage_time),
    ConfigKey {
        name: "rate_convention",
        dimension: Dimension::Convention,
        get: |c| Parsed::Convention(c.rate_convention),
        set: |c, v| {
            if let Parsed::Convention(x) = v {
                c.rate_convention = x;
            }
        },
    },
    flag_key!("include_lower_branch", include_lower_branch),
    flag_key!("include_control_noise_drive", include_control_noise_drive),
    flag_key!("include_spectator_coherences", include_spectator_coherences),
    flag_key!("convergence_check", convergence_check),
];

fn lookup(name: &str) -> Option<&'static ConfigKey> {
    CONFIG_KEYS.iter().find(|k| k.name == name)
}

/// Splits `text` into its leading number and trailing suffix and returns the
/// value in the base unit of `dimension`.
pub fn parse_quantity(text: &str, dimension: Dimension) -> std::result::Result<f64, String> {
    let text = text.trim();
    let bytes = text.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == int_start {
        return Err(format!("expected a number, found `{text}`"));
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    let mantissa_end = i;
    let mut exponent = 0i32;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            exponent = text[i + 1..j]
                .parse()
                .map_err(|_| format!("malformed exponent in `{text}`"))?;
            i = j;
        }
    }
    let (number, suffix) = text.split_at(i);
    let suffix = suffix.trim_start();
    let scale = dimension
        .scale(suffix)
        .ok_or_else(|| format!("unit `{suffix}` not allowed for a {dimension:?} value"))?;
    // Decimal prefixes shift the exponent so "40ns" is exactly 40e-9.
    let shift = scale.log10().round() as i32;
    if format!("1e{shift}").parse::<f64>() == Ok(scale) {
        let decimal = format!("{}e{}", &text[..mantissa_end], exponent.saturating_add(shift));
        return decimal.parse().map_err(|_| format!("malformed number `{number}`"));
    }
    let value: f64 = number
        .parse()
        .map_err(|_| format!("malformed number `{number}`"))?;
    Ok(value * scale)
}

fn parse_value(text: &str, key: &ConfigKey) -> std::result::Result<Parsed, String> {
    match key.dimension {
        Dimension::Flag => match text {
            "true" => Ok(Parsed::Flag(true)),
            "false" => Ok(Parsed::Flag(false)),
            _ => Err(format!("expected `true` or `false`, found `{text}`")),
        },
        Dimension::Convention => match text {
            "two_pi" => Ok(Parsed::Convention(RateConvention::TwoPi)),
            "bare" => Ok(Parsed::Convention(RateConvention::Bare)),
            _ => Err(format!("expected `two_pi` or `bare`, found `{text}`")),
        },
        Dimension::Step if text == "auto" => Ok(Parsed::Step(StepSize::Auto)),
        Dimension::Step => parse_quantity(text, Dimension::Time).map(|v| Parsed::Step(StepSize::Fixed(v))),
        d => parse_quantity(text, d).map(Parsed::Number),
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        column,
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(parse_error(line_no, col, "expected `key = value`"));
            };
            let key_text = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            let key = lookup(key_text)
                .ok_or_else(|| parse_error(line_no, key_col, format!("unknown key `{key_text}`")))?;
            if !seen.insert(key.name) {
                return Err(parse_error(line_no, key_col, format!("duplicate key `{key_text}`")));
            }
            let rest = &content[eq + 1..];
            let value_text = rest.trim();
            let value_col = eq + 2 + (rest.len() - rest.trim_start().len());
            if value_text.is_empty() {
                return Err(parse_error(line_no, value_col, "missing value"));
            }
            let value =
                parse_value(value_text, key).map_err(|m| parse_error(line_no, value_col, m))?;
            (key.set)(&mut config, value);
        }
        config.validate()?;
        Ok(config)
    }

    /// Canonical config text that parses back to an identical config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let value = match (key.get)(self) {
                Parsed::Number(x) => format!("{x:e}"),
                Parsed::Flag(b) => b.to_string(),
                Parsed::Convention(c) => c.as_str().to_string(),
                Parsed::Step(StepSize::Auto) => "auto".to_string(),
                Parsed::Step(StepSize::Fixed(x)) => format!("{x:e}"),
            };
            out.push_str(key.name);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Fully resolved config as an ordered JSON object, values in base units.
    pub fn echo_json(&self) -> Value {
        let mut map = Map::new();
        for key in CONFIG_KEYS {
            let value = match (key.get)(self) {
                Parsed::Number(x) => Value::from(x),
                Parsed::Flag(b) => Value::from(b),
                Parsed::Convention(c) => Value::from(c.as_str()),
                Parsed::Step(StepSize::Auto) => Value::from("auto"),
                Parsed::Step(StepSize::Fixed(x)) => Value::from(x),
            };
            map.insert(key.name.to_string(), value);
        }
        if self.control.phase_modulation.is_some() {
            map.insert("phase_modulation".into(), Value::from("custom"));
        }
        Value::Object(map)
    }

    /// Reads a numeric key in its base unit.
    pub fn get_numeric(&self, name: &str) -> Result<f64> {
        let key = numeric_key(name)?;
        match (key.get)(self) {
            Parsed::Number(x) => Ok(x),
            _ => unreachable!("numeric keys always hold numbers"),
        }
    }

    /// Overwrites a numeric key, value in its base unit. Does not revalidate.
    pub fn set_numeric(&mut self, name: &str, value: f64) -> Result<()> {
        let key = numeric_key(name)?;
        (key.set)(self, Parsed::Number(value));
        Ok(())
    }

    /// Parses `text` with the unit rules of key `name`.
    pub fn parse_numeric(name: &str, text: &str) -> Result<f64> {
        let key = numeric_key(name)?;
        parse_quantity(text, key.dimension).map_err(|m| Error::invalid(name, m))
    }
}

fn numeric_key(name: &str) -> Result<&'static ConfigKey> {
    match lookup(name) {
        Some(k) if k.is_numeric() => Ok(k),
        Some(_) => Err(Error::invalid(name, "not a numeric key")),
        None => Err(Error::invalid(name, "unknown key")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_suffixes() {
        assert_eq!(parse_quantity("40ns", Dimension::Time).unwrap(), 40e-9);
        assert_eq!(parse_quantity("0.002ns", Dimension::Time).unwrap(), 2e-12);
        assert_eq!(parse_quantity("1.5e3kHz", Dimension::Frequency).unwrap(), 1.5e6);
        assert_eq!(parse_quantity("0.8GHz", Dimension::Frequency).unwrap(), 0.8e9);
        assert_eq!(parse_quantity("6.7 mW", Dimension::Power).unwrap(), 6.7);
        assert_eq!(parse_quantity("-2.5e3", Dimension::Frequency).unwrap(), -2.5e3);
        assert_eq!(parse_quantity("637nm", Dimension::Length).unwrap(), 637.0 * 1e-9);
        assert_eq!(parse_quantity("1G", Dimension::GroundField).unwrap(), 2.8e6);
        assert_eq!(parse_quantity("20V/um", Dimension::GroundField).unwrap(), 3.4e6);
    }

    #[test]
    fn suffixes_are_case_sensitive_and_dimension_checked() {
        assert!(parse_quantity("40NS", Dimension::Time).is_err());
        assert!(parse_quantity("1ghz", Dimension::Frequency).is_err());
        assert!(parse_quantity("1G", Dimension::Frequency).is_err());
        assert!(parse_quantity("3mW", Dimension::Time).is_err());
        assert!(parse_quantity("abc", Dimension::Time).is_err());
        assert!(parse_quantity("", Dimension::Time).is_err());
    }

    #[test]
    fn parse_reports_line_and_column() {
        let err = RunConfig::parse("# header\ndetuning = 0.8GHz\n  pulse_width = 40 parsecs\n")
            .unwrap_err();
        match err {
            Error::ConfigParse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 17);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("nonsense = 1").unwrap_err(),
            Error::ConfigParse { line: 1, column: 1, .. }
        ));
        assert!(RunConfig::parse("detuning = 1GHz\ndetuning = 2GHz").is_err());
        assert!(RunConfig::parse("detuning 1GHz").is_err());
    }

    #[test]
    fn parse_applies_values() {
        let c = RunConfig::parse(
            "detuning = 1.2GHz # comment\nrate_convention = bare\ndt = 2e-12\ninclude_lower_branch = false\n",
        )
        .unwrap();
        assert_eq!(c.detuning, 1.2e9);
        assert_eq!(c.rate_convention, RateConvention::Bare);
        assert_eq!(c.dt, StepSize::Fixed(2e-12));
        assert!(!c.include_lower_branch);
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = RunConfig::default();
        c.detuning = 0.123456789e9;
        c.dt = StepSize::Fixed(1.0 / 3.0 * 1e-12);
        c.constants.radiative_decay_gamma = 1.0 / 11.7e-9;
        c.control.rabi_per_sqrt_mw = 0.1 + 0.2;
        let back = RunConfig::parse(&c.to_config_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_config_text(), c.to_config_text());
    }

    #[test]
    fn echo_is_ordered_and_complete() {
        let v = RunConfig::default().echo_json();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        let expect: Vec<_> = CONFIG_KEYS.iter().map(|k| k.name.to_string()).collect();
        assert_eq!(keys, expect);
    }

    #[test]
    fn numeric_access() {
        let mut c = RunConfig::default();
        c.set_numeric("power_retrieval", 3.0).unwrap();
        assert_eq!(c.get_numeric("power_retrieval").unwrap(), 3.0);
        assert!(c.set_numeric("include_lower_branch", 1.0).is_err());
        assert!(c.get_numeric("missing").is_err());
        assert_eq!(RunConfig::parse_numeric("detuning", "2GHz").unwrap(), 2e9);
    }
}
