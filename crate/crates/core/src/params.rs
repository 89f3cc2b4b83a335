//! Device, source, gate, channel and protocol parameters.
//!
//! Every value here is a plain scalar. The detector and auxiliary source
//! feed the per-auxiliary report probabilities, the gate sets the deflection
//! the ESD block looks for, the channel yields the transmission rate `t`,
//! and the protocol carries the QBER threshold and sifting rate.

use std::fmt;

use crate::error::{EsdError, Result};

/// Empty rate of an auxiliary source driven with mean photon number 5, as
/// used by the reference simulation settings (`1 - e^-5`).
///
/// Note that a Poisson source of intensity 5 has vacuum probability `e^-5`;
/// the reference settings use the complement, and reproducing the published
/// figure claims requires the value as written.
pub fn reference_empty_rate() -> f64 {
    -(-5.0f64).exp_m1()
}

/// Single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Detection efficiency η, in (0, 1].
    pub efficiency: f64,
    /// Dark count probability per gate window, in [0, 1).
    pub dark_count: f64,
}

/// Auxiliary source feeding the ESD block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxSourceParams {
    /// Probability that an auxiliary is emitted empty.
    pub empty_rate: f64,
    /// Probability that a `|0>`-prepared auxiliary is read out as `|1>`.
    pub prep_error: f64,
}

/// Controlled gate acting on each auxiliary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// `|<1|F|0>|^2`.
    pub deflection: f64,
    /// Additive device disturbance. May be negative.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelVariant {
    #[default]
    Direct,
    /// Single-photon interference protocols: effective transmission `sqrt(t)`.
    TwinField,
}

impl ChannelVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelVariant::Direct => "direct",
            ChannelVariant::TwinField => "twin-field",
        }
    }
}

impl std::str::FromStr for ChannelVariant {
    type Err = EsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(ChannelVariant::Direct),
            "twin-field" | "twin_field" | "tf" => Ok(ChannelVariant::TwinField),
            other => Err(EsdError::invalid(format!(
                "unknown channel variant {other:?} (expected \"direct\" or \"twin-field\")"
            ))),
        }
    }
}

impl fmt::Display for ChannelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which exponential the attenuation law uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelLaw {
    /// `t = e^(-αl/10)`.
    #[default]
    Natural,
    /// `t = 10^(-αl/10)`, the usual dB convention.
    Base10,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub alpha_db_per_km: f64,
    pub length_km: f64,
    pub variant: ChannelVariant,
    /// Supersedes `(alpha, length)` when present. The variant still applies.
    pub t_override: Option<f64>,
    pub law: ChannelLaw,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            alpha_db_per_km: 0.2,
            length_km: 0.0,
            variant: ChannelVariant::Direct,
            t_override: None,
            law: ChannelLaw::Natural,
        }
    }
}

impl ChannelSpec {
    /// Channel with a fixed direct transmission rate.
    pub fn fixed(t: f64) -> Self {
        ChannelSpec {
            t_override: Some(t),
            ..ChannelSpec::default()
        }
    }

    pub fn fiber(alpha_db_per_km: f64, length_km: f64, variant: ChannelVariant) -> Self {
        ChannelSpec {
            alpha_db_per_km,
            length_km,
            variant,
            ..ChannelSpec::default()
        }
    }

    pub fn transmission_rate(&self) -> Result<f64> {
        transmission_rate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// QBER above which post-processing fails, in (0, 0.5).
    pub qber_threshold: f64,
    /// Error rate the channel induces on the encoding degree of freedom.
    pub channel_error: f64,
    /// Ordinary sifting rate on effectively detected signals.
    pub sifting: f64,
}

/// The complete parameter set consumed by every calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub detector: DetectorParams,
    pub source: AuxSourceParams,
    pub gate: GateParams,
    pub channel: ChannelSpec,
    pub protocol: ProtocolParams,
}

impl ParamSet {
    /// Reference simulation settings: η = 0.78, d = 1e-7, e_P = 0.2%,
    /// e_C = 1.5%, y = 1 - e^-5, a C-NOT gate with P = 0.99, a 3% QBER
    /// threshold and BB84 sifting (1/2).
    pub fn reference() -> Self {
        ParamSet {
            detector: DetectorParams {
                efficiency: 0.78,
                dark_count: 1e-7,
            },
            source: AuxSourceParams {
                empty_rate: reference_empty_rate(),
                prep_error: 0.002,
            },
            gate: GateParams {
                deflection: 0.99,
                epsilon: 0.0,
            },
            channel: ChannelSpec::default(),
            protocol: ProtocolParams {
                qber_threshold: 0.03,
                channel_error: 0.015,
                sifting: 0.5,
            },
        }
    }

    pub fn with_deflection(mut self, deflection: f64) -> Self {
        self.gate.deflection = deflection;
        self
    }

    pub fn with_channel(mut self, channel: ChannelSpec) -> Self {
        self.channel = channel;
        self
    }

    /// Fails with the first hard violation reported by [`validate`].
    pub fn check(&self) -> Result<()> {
        let report = validate(self);
        match report.errors.first() {
            Some(issue) => Err(EsdError::invalid(issue.to_string())),
            None => Ok(()),
        }
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet::reference()
    }
}

/// `e^(-αl/10)` (or `10^(-αl/10)` under [`ChannelLaw::Base10`]), square-rooted
/// for the twin-field variant.
pub fn transmission_rate(channel: &ChannelSpec) -> Result<f64> {
    let direct = match channel.t_override {
        Some(t) => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(EsdError::invalid(format!(
                    "channel.t_override must be in (0, 1], got {t}"
                )));
            }
            t
        }
        None => {
            let (alpha, length) = (channel.alpha_db_per_km, channel.length_km);
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(EsdError::invalid(format!(
                    "channel.alpha_db_per_km must be non-negative, got {alpha}"
                )));
            }
            if !(length >= 0.0 && length.is_finite()) {
                return Err(EsdError::invalid(format!(
                    "channel.length_km must be non-negative, got {length}"
                )));
            }
            let exponent = -alpha * length / 10.0;
            match channel.law {
                ChannelLaw::Natural => exponent.exp(),
                ChannelLaw::Base10 => 10f64.powf(exponent),
            }
        }
    };
    let t = match channel.variant {
        ChannelVariant::Direct => direct,
        ChannelVariant::TwinField => direct.sqrt(),
    };
    if t <= 0.0 {
        return Err(EsdError::invalid(format!(
            "channel transmission underflows to zero (alpha={}, length={})",
            channel.alpha_db_per_km, channel.length_km
        )));
    }
    Ok(t)
}

/// Gate deflection after adding the device disturbance, clamped into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDeflection {
    pub value: f64,
    /// `deflection + epsilon` fell outside [0, 1].
    pub clamped: bool,
}

pub fn effective_deflection(gate: &GateParams) -> EffectiveDeflection {
    let raw = gate.deflection + gate.epsilon;
    let value = raw.clamp(0.0, 1.0);
    EffectiveDeflection {
        value,
        clamped: value != raw,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub key: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Hard violations and soft regime warnings for a parameter set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, key: &'static str, message: impl Into<String>) {
        self.errors.push(Issue {
            key,
            message: message.into(),
        });
    }

    fn warn(&mut self, key: &'static str, message: impl Into<String>) {
        self.warnings.push(Issue {
            key,
            message: message.into(),
        });
    }
}

fn in_closed_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

pub fn validate(params: &ParamSet) -> ValidationReport {
    let mut report = ValidationReport::default();

    let det = &params.detector;
    if det.efficiency.is_nan() || det.efficiency <= 0.0 {
        report.error("detector.eta", "eta must be positive");
    } else if det.efficiency > 1.0 {
        report.error("detector.eta", format!("eta must be at most 1, got {}", det.efficiency));
    }
    if !(det.dark_count >= 0.0 && det.dark_count < 1.0) {
        report.error("detector.d", format!("d must be in [0, 1), got {}", det.dark_count));
    } else if det.efficiency > 0.0 && det.dark_count >= det.efficiency {
        report.warn(
            "detector.d",
            format!("d not << eta (d={}, eta={})", det.dark_count, det.efficiency),
        );
    }

    let src = &params.source;
    if !in_closed_unit(src.empty_rate) {
        report.error("source.y", format!("y must be in [0, 1], got {}", src.empty_rate));
    }
    if !(src.prep_error >= 0.0 && src.prep_error < 1.0) {
        report.error("source.e_p", format!("e_p must be in [0, 1), got {}", src.prep_error));
    }

    let gate = &params.gate;
    if !in_closed_unit(gate.deflection) {
        report.error(
            "gate.deflection",
            format!("deflection must be in [0, 1], got {}", gate.deflection),
        );
    }
    if !gate.epsilon.is_finite() {
        report.error("gate.epsilon", "epsilon must be finite");
    } else if in_closed_unit(gate.deflection) && effective_deflection(gate).clamped {
        report.warn(
            "gate.epsilon",
            format!(
                "deflection + epsilon = {} clamped into [0, 1]",
                gate.deflection + gate.epsilon
            ),
        );
    }

    let ch = &params.channel;
    if !(ch.alpha_db_per_km >= 0.0 && ch.alpha_db_per_km.is_finite()) {
        report.error(
            "channel.alpha_db_per_km",
            format!("alpha must be non-negative, got {}", ch.alpha_db_per_km),
        );
    }
    if !(ch.length_km >= 0.0 && ch.length_km.is_finite()) {
        report.error(
            "channel.length_km",
            format!("length must be non-negative, got {}", ch.length_km),
        );
    }
    if let Some(t) = ch.t_override {
        if !(t > 0.0 && t <= 1.0) {
            report.error("channel.t_override", format!("t_override must be in (0, 1], got {t}"));
        }
    }

    let proto = &params.protocol;
    if !(proto.qber_threshold > 0.0 && proto.qber_threshold < 0.5) {
        report.error(
            "protocol.e",
            format!("e must be in (0, 0.5), got {}", proto.qber_threshold),
        );
    }
    if !(proto.channel_error >= 0.0 && proto.channel_error < 0.5) {
        report.error(
            "protocol.e_c",
            format!("e_c must be in [0, 0.5), got {}", proto.channel_error),
        );
    }
    if !(proto.sifting > 0.0 && proto.sifting <= 1.0) {
        report.error("protocol.s", format!("s must be in (0, 1], got {}", proto.sifting));
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_is_lossless() {
        let t = transmission_rate(&ChannelSpec::fiber(0.2, 0.0, ChannelVariant::Direct)).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn hundred_km_direct_and_twin_field() {
        let direct = transmission_rate(&ChannelSpec::fiber(0.2, 100.0, ChannelVariant::Direct));
        let twin = transmission_rate(&ChannelSpec::fiber(0.2, 100.0, ChannelVariant::TwinField));
        // e^-2 and e^-1
        assert!((direct.unwrap() - 0.1353352832366127).abs() < 1e-15);
        assert!((twin.unwrap() - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn base10_law() {
        let mut ch = ChannelSpec::fiber(0.2, 100.0, ChannelVariant::Direct);
        ch.law = ChannelLaw::Base10;
        assert!((ch.transmission_rate().unwrap() - 0.01).abs() < 1e-17);
    }

    #[test]
    fn override_applies_variant() {
        let mut ch = ChannelSpec::fixed(1e-12);
        assert_eq!(ch.transmission_rate().unwrap(), 1e-12);
        ch.variant = ChannelVariant::TwinField;
        assert!((ch.transmission_rate().unwrap() - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn negative_channel_inputs_rejected() {
        let err = transmission_rate(&ChannelSpec::fiber(-0.1, 1.0, ChannelVariant::Direct));
        assert!(matches!(err, Err(EsdError::InvalidParameter(_))));
        let err = transmission_rate(&ChannelSpec::fiber(0.2, -1.0, ChannelVariant::Direct));
        assert!(matches!(err, Err(EsdError::InvalidParameter(_))));
    }

    #[test]
    fn deflection_clamps() {
        let d = effective_deflection(&GateParams { deflection: 0.99, epsilon: 0.0 });
        assert_eq!(d, EffectiveDeflection { value: 0.99, clamped: false });
        let d = effective_deflection(&GateParams { deflection: 1.0, epsilon: 0.0 });
        assert_eq!(d.value, 1.0);
        let d = effective_deflection(&GateParams { deflection: 0.999, epsilon: 0.005 });
        assert_eq!(d, EffectiveDeflection { value: 1.0, clamped: true });
        let d = effective_deflection(&GateParams { deflection: 0.001, epsilon: -0.01 });
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn reference_settings_validate_cleanly() {
        let report = validate(&ParamSet::reference());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    }

    #[test]
    fn zero_efficiency_is_hard_error() {
        let mut p = ParamSet::reference();
        p.detector.efficiency = 0.0;
        let report = validate(&p);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].key, "detector.eta");
        assert_eq!(report.errors[0].message, "eta must be positive");
        assert!(p.check().is_err());
    }

    #[test]
    fn large_dark_count_is_warning() {
        let mut p = ParamSet::reference();
        p.detector.efficiency = 0.3;
        p.detector.dark_count = 0.5;
        let report = validate(&p);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].message.starts_with("d not << eta"));
    }

    #[test]
    fn validate_is_idempotent() {
        let mut p = ParamSet::reference();
        p.protocol.qber_threshold = 0.7;
        p.gate.epsilon = 0.5;
        assert_eq!(validate(&p), validate(&p));
    }
}
