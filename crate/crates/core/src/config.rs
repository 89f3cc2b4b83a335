//! Flat key-value parameter files.
//!
//! ```toml
//! detector.eta = 0.78
//! detector.d = 1e-7
//! source.y = 0.9932620530009145
//! channel.variant = "twin-field"
//! ```
//!
//! Keys may also be grouped under `[detector]`-style tables. Keys that are
//! absent keep the reference settings; unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use crate::error::{EsdError, Result};
use crate::params::{ChannelLaw, ParamSet};

/// Every key accepted in a parameter file, in manifest order.
pub const KEYS: &[&str] = &[
    "detector.eta",
    "detector.d",
    "source.y",
    "source.e_p",
    "gate.deflection",
    "gate.epsilon",
    "channel.alpha_db_per_km",
    "channel.length_km",
    "channel.variant",
    "channel.t_override",
    "protocol.e",
    "protocol.e_c",
    "protocol.s",
];

pub fn load(path: &Path) -> Result<ParamSet> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        EsdError::Config(format!("--config: cannot read parameter file {}: {e}", path.display()))
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ParamSet> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| EsdError::Config(e.message().to_string()))?;
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);

    let mut params = ParamSet::reference();
    for (key, value) in flat {
        apply(&mut params, &key, &value)?;
    }
    Ok(params)
}

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn number(key: &str, value: &Value) -> Result<f64> {
    match value {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(EsdError::Config(format!(
            "{key}: expected a number, got {}",
            other.type_str()
        ))),
    }
}

fn apply(params: &mut ParamSet, key: &str, value: &Value) -> Result<()> {
    match key {
        "detector.eta" => params.detector.efficiency = number(key, value)?,
        "detector.d" => params.detector.dark_count = number(key, value)?,
        "source.y" => params.source.empty_rate = number(key, value)?,
        "source.e_p" => params.source.prep_error = number(key, value)?,
        "gate.deflection" => params.gate.deflection = number(key, value)?,
        "gate.epsilon" => params.gate.epsilon = number(key, value)?,
        "channel.alpha_db_per_km" => params.channel.alpha_db_per_km = number(key, value)?,
        "channel.length_km" => params.channel.length_km = number(key, value)?,
        "channel.t_override" => params.channel.t_override = Some(number(key, value)?),
        "channel.variant" => {
            let s = value
                .as_str()
                .ok_or_else(|| EsdError::Config(format!("{key}: expected a string")))?;
            params.channel.variant = s.parse().map_err(|e: EsdError| {
                EsdError::Config(format!("{key}: {e}"))
            })?;
        }
        "protocol.e" => params.protocol.qber_threshold = number(key, value)?,
        "protocol.e_c" => params.protocol.channel_error = number(key, value)?,
        "protocol.s" => params.protocol.sifting = number(key, value)?,
        unknown => return Err(EsdError::Config(format!("unknown key {unknown:?}"))),
    }
    Ok(())
}

/// Renders the resolved parameters as `key=value` lines, one per known key.
pub fn render(params: &ParamSet) -> String {
    let mut out = String::new();
    let ch = &params.channel;
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    line("detector.eta", fmt_num(params.detector.efficiency));
    line("detector.d", fmt_num(params.detector.dark_count));
    line("source.y", fmt_num(params.source.empty_rate));
    line("source.e_p", fmt_num(params.source.prep_error));
    line("gate.deflection", fmt_num(params.gate.deflection));
    line("gate.epsilon", fmt_num(params.gate.epsilon));
    line("channel.alpha_db_per_km", fmt_num(ch.alpha_db_per_km));
    line("channel.length_km", fmt_num(ch.length_km));
    line("channel.variant", ch.variant.to_string());
    line(
        "channel.t_override",
        ch.t_override.map(fmt_num).unwrap_or_else(|| "none".into()),
    );
    line(
        "channel.law",
        match ch.law {
            ChannelLaw::Natural => "natural".into(),
            ChannelLaw::Base10 => "base10".into(),
        },
    );
    line("protocol.e", fmt_num(params.protocol.qber_threshold));
    line("protocol.e_c", fmt_num(params.protocol.channel_error));
    line("protocol.s", fmt_num(params.protocol.sifting));
    out
}

/// 17 significant digits, scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}
