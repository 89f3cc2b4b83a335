//! Closed-form link model of the ESD block.
//!
//! A signal entering the block is copied onto `n` auxiliaries through the
//! controlled gate; each auxiliary reports `|1>` with probability `P_s`
//! when the signal carried a photon and `Q_s` when it was vacuum. The
//! signal is kept when at least `k` auxiliaries report. Everything
//! downstream (NESR, ESD sifting, QBER, rate) follows from the two binomial
//! tails `P_{>=k|n}` and `Q_{>=k|n}`.

mod tail;

use std::fmt;

pub use tail::binomial_tail;

use crate::error::{EsdError, Result};
use crate::params::{
    effective_deflection, AuxSourceParams, DetectorParams, GateParams, ParamSet, ProtocolParams,
};

/// Largest `n` a sweep will evaluate unless the caller raises the cap.
pub const DEFAULT_N_CAP: u32 = 64;

/// Threshold design of the block: keep a signal when at least `k` of the
/// `n` gated auxiliaries report `|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EsdDesign {
    n: u32,
    k: u32,
}

impl EsdDesign {
    /// `(0, 0)`: no ESD block, every signal is kept.
    pub const NONE: EsdDesign = EsdDesign { n: 0, k: 0 };

    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k > n {
            return Err(EsdError::invalid(format!("design threshold k={k} exceeds n={n}")));
        }
        Ok(EsdDesign { n, k })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn is_block(self) -> bool {
        self.k > 0
    }
}

impl fmt::Display for EsdDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.k)
    }
}

impl std::str::FromStr for EsdDesign {
    type Err = EsdError;

    /// Accepts `n:k`, `n,k` or `(n,k)`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (n, k) = inner
            .split_once([':', ','])
            .ok_or_else(|| EsdError::invalid(format!("design {s:?} is not of the form n:k")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| EsdError::invalid(format!("design {s:?}: {v:?} is not a count")))
        };
        EsdDesign::new(parse(n)?, parse(k)?)
    }
}

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(EsdError::invalid(format!("{name} must be in [0, 1], got {x}")))
    }
}

fn check_transmission(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(EsdError::invalid(format!("transmission rate must be in (0, 1], got {t}")))
    }
}

/// Probability that the SPD behind a `|1>`-routed auxiliary clicks.
fn click_given_one(det: &DetectorParams) -> f64 {
    det.efficiency + (1.0 - det.efficiency) * det.dark_count
}

/// `P_s`: single-auxiliary report probability when the signal is non-empty
/// and the gate deflects the auxiliary with probability `deflection`.
pub fn aux_report_prob_nonempty(
    deflection: f64,
    det: &DetectorParams,
    src: &AuxSourceParams,
) -> f64 {
    let d = det.dark_count;
    let y = src.empty_rate;
    (1.0 - y) * (deflection * click_given_one(det) + (1.0 - deflection) * d) + y * d
}

/// `Q_s`: single-auxiliary report probability when the signal is vacuum.
pub fn aux_report_prob_vacuum(det: &DetectorParams, src: &AuxSourceParams) -> f64 {
    aux_report_prob_nonempty(src.prep_error, det, src)
}

/// The pair of acceptance probabilities for one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tails {
    /// `P_{>=k|n}`.
    pub nonempty: f64,
    /// `Q_{>=k|n}`.
    pub vacuum: f64,
}

impl Tails {
    pub fn new(design: EsdDesign, p_s: f64, q_s: f64) -> Result<Self> {
        check_fraction("p_s", p_s)?;
        check_fraction("q_s", q_s)?;
        Ok(Tails {
            nonempty: binomial_tail(design.n, design.k, p_s)?,
            vacuum: binomial_tail(design.n, design.k, q_s)?,
        })
    }

    pub fn nesr(&self, t: f64) -> Result<f64> {
        nesr_from_tails(t, self.nonempty, self.vacuum)
    }

    pub fn sifting(&self, t: f64) -> f64 {
        t * self.nonempty + (1.0 - t) * self.vacuum
    }

    /// `(1 - t) Q / (t P)`: odds that an accepted signal is empty. Ordering
    /// designs by this is the same as ordering by NESR, without NESR's
    /// saturation at 1.0 in double precision.
    pub fn empty_odds(&self, t: f64) -> f64 {
        if self.vacuum == 0.0 {
            0.0
        } else {
            (1.0 - t) * self.vacuum / (t * self.nonempty)
        }
    }
}

pub(crate) fn nesr_from_tails(t: f64, p_tail: f64, q_tail: f64) -> Result<f64> {
    let accepted_nonempty = t * p_tail;
    let denom = accepted_nonempty + (1.0 - t) * q_tail;
    if denom > 0.0 {
        Ok((accepted_nonempty / denom).min(1.0))
    } else {
        Err(EsdError::UndefinedRatio(format!(
            "NESR: no signal is accepted (P_tail={p_tail:e}, Q_tail={q_tail:e})"
        )))
    }
}

/// Non-empty signal rate among accepted signals.
pub fn nesr(t: f64, design: EsdDesign, p_s: f64, q_s: f64) -> Result<f64> {
    check_transmission(t)?;
    Tails::new(design, p_s, q_s)?.nesr(t)
}

/// `S_ESD`: fraction of all incoming signals the block accepts.
pub fn sifting_rate_esd(t: f64, design: EsdDesign, p_s: f64, q_s: f64) -> Result<f64> {
    check_transmission(t)?;
    Ok(Tails::new(design, p_s, q_s)?.sifting(t))
}

/// Correct/incorrect effective report probabilities on the message degree
/// of freedom, for a two-detector measurement where a report is effective
/// only when exactly one detector clicks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportProbs {
    /// `c_t`
    pub correct_nonempty: f64,
    /// `e_t`
    pub error_nonempty: f64,
    /// `c_l`
    pub correct_vacuum: f64,
    /// `e_l`
    pub error_vacuum: f64,
}

pub fn report_probs(channel_error: f64, det: &DetectorParams) -> ReportProbs {
    let d = det.dark_count;
    let hit = click_given_one(det) * (1.0 - d);
    let dark_only = (1.0 - det.efficiency) * d * (1.0 - d);
    let vacuum = d * (1.0 - d);
    ReportProbs {
        correct_nonempty: (1.0 - channel_error) * hit + channel_error * dark_only,
        error_nonempty: channel_error * hit + (1.0 - channel_error) * dark_only,
        correct_vacuum: vacuum,
        error_vacuum: vacuum,
    }
}

pub fn qber(nesr: f64, probs: &ReportProbs) -> Result<f64> {
    check_fraction("nesr", nesr)?;
    let empty = 1.0 - nesr;
    let errors = nesr * probs.error_nonempty + empty * probs.error_vacuum;
    let effective = nesr * (probs.error_nonempty + probs.correct_nonempty)
        + empty * (probs.error_vacuum + probs.correct_vacuum);
    if effective > 0.0 {
        Ok(errors / effective)
    } else {
        Err(EsdError::UndefinedRatio(format!(
            "QBER: no effective report at NESR={nesr:e}"
        )))
    }
}

/// Whether some `(n, k)` can drive NESR arbitrarily close to one: the
/// effective gate deflection must exceed the preparation error, strictly.
pub fn esd_effective(gate: &GateParams, src: &AuxSourceParams) -> bool {
    effective_deflection(gate).value > src.prep_error
}

/// Error-budget verdict for arbitrarily long links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Largest channel error the protocol tolerates: `e - (1-2e)(1-η)d/η`.
    pub error_bound: f64,
    /// Smallest NESR that keeps QBER under the threshold, when the channel
    /// error alone is below it.
    pub nesr_threshold: Option<f64>,
}

pub fn feasibility(protocol: &ProtocolParams, det: &DetectorParams) -> Feasibility {
    let e = protocol.qber_threshold;
    let e_c = protocol.channel_error;
    let eta = det.efficiency;
    let d = det.dark_count;
    let error_bound = e - (1.0 - 2.0 * e) * (1.0 - eta) * d / eta;
    let nesr_threshold = (e_c < e)
        .then(|| (1.0 - 2.0 * e) * d / (eta * ((e - e_c) + d * (1.0 - 2.0 * e))));
    Feasibility {
        feasible: e_c < error_bound,
        error_bound,
        nesr_threshold,
    }
}

/// `R = S * S_ESD * E_o * g`.
pub fn key_rate(sifting: f64, s_esd: f64, effective_detection: f64, post_processing: f64) -> f64 {
    sifting * s_esd * effective_detection * post_processing
}

/// Rate of effective detections in BB84 with a noiseless channel.
pub fn bb84_effective_detection(nesr: f64, det: &DetectorParams) -> f64 {
    let eta = det.efficiency;
    let d = det.dark_count;
    let dark = 2.0 * d * (1.0 - d);
    nesr * (eta * (1.0 - d) + (1.0 - eta) * dark) + (1.0 - nesr) * dark
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Default post-processing efficiency `max(0, 1 - 2 H2(Q))`. This is a
/// stand-in for a protocol-specific error-correction and privacy
/// amplification model.
pub fn default_post_processing(qber: f64) -> f64 {
    (1.0 - 2.0 * binary_entropy(qber)).max(0.0)
}

/// The two protocol-dependent factors of the rate.
#[derive(Debug, Clone, Copy)]
pub struct RateModel {
    /// `E_o(NESR)`
    pub effective_detection: fn(f64, &DetectorParams) -> f64,
    /// `g(QBER)`
    pub post_processing: fn(f64) -> f64,
}

impl Default for RateModel {
    fn default() -> Self {
        RateModel {
            effective_detection: bb84_effective_detection,
            post_processing: default_post_processing,
        }
    }
}

/// Every derived quantity for one `(t, n, k)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub t: f64,
    pub design: EsdDesign,
    pub p_s: f64,
    pub q_s: f64,
    pub p_tail: f64,
    pub q_tail: f64,
    /// `None` when no signal is ever accepted.
    pub nesr: Option<f64>,
    pub s_esd: f64,
    /// `None` when there is no effective report to take a ratio over.
    pub qber: Option<f64>,
    pub rate: f64,
}

impl LinkMetrics {
    pub fn tails(&self) -> Tails {
        Tails {
            nonempty: self.p_tail,
            vacuum: self.q_tail,
        }
    }
}

/// Evaluates the link at transmission `t` with the default rate model.
pub fn link_metrics(t: f64, design: EsdDesign, params: &ParamSet) -> Result<LinkMetrics> {
    link_metrics_with(t, design, params, &RateModel::default())
}

/// Evaluates the link at the transmission rate of `params.channel`.
pub fn link_metrics_for_channel(design: EsdDesign, params: &ParamSet) -> Result<LinkMetrics> {
    let t = params.channel.transmission_rate()?;
    link_metrics(t, design, params)
}

pub fn link_metrics_with(
    t: f64,
    design: EsdDesign,
    params: &ParamSet,
    rate_model: &RateModel,
) -> Result<LinkMetrics> {
    check_transmission(t)?;
    params.check()?;
    let deflection = effective_deflection(&params.gate).value;
    let p_s = aux_report_prob_nonempty(deflection, &params.detector, &params.source);
    let q_s = aux_report_prob_vacuum(&params.detector, &params.source);
    let tails = Tails::new(design, p_s, q_s)?;
    let s_esd = tails.sifting(t);
    let nesr = tails.nesr(t).ok();
    let probs = report_probs(params.protocol.channel_error, &params.detector);
    let qber = nesr.and_then(|v| qber(v, &probs).ok());
    let rate = match (nesr, qber) {
        (Some(n), Some(q)) => key_rate(
            params.protocol.sifting,
            s_esd,
            (rate_model.effective_detection)(n, &params.detector),
            (rate_model.post_processing)(q),
        ),
        _ => 0.0,
    };
    Ok(LinkMetrics {
        t,
        design,
        p_s,
        q_s,
        p_tail: tails.nonempty,
        q_tail: tails.vacuum,
        nesr,
        s_esd,
        qber,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn reference() -> ParamSet {
        ParamSet::reference()
    }

    // Reference values below were evaluated at 50 significant digits with
    // mpmath from the same closed forms, independently of this crate.
    const P_S_099: f64 = 5.203_142_152_389_53e-3;
    const Q_S: f64 = 1.061_119_626_745_359_7e-5;

    #[test]
    fn single_auxiliary_probabilities() {
        let p = reference();
        let p_s = aux_report_prob_nonempty(0.99, &p.detector, &p.source);
        let q_s = aux_report_prob_vacuum(&p.detector, &p.source);
        assert!(rel(p_s, P_S_099) < 1e-13, "{p_s:e}");
        assert!(rel(q_s, Q_S) < 1e-12, "{q_s:e}");

        let perfect = DetectorParams { efficiency: 1.0, dark_count: 0.0 };
        let bright = AuxSourceParams { empty_rate: 0.0, prep_error: 0.0 };
        assert_eq!(aux_report_prob_nonempty(1.0, &perfect, &bright), 1.0);
        assert_eq!(aux_report_prob_vacuum(&perfect, &bright), 0.0);

        let dark_free = DetectorParams { efficiency: 0.6, dark_count: 0.0 };
        let empty = AuxSourceParams { empty_rate: 1.0, prep_error: 0.0 };
        assert_eq!(aux_report_prob_nonempty(0.37, &dark_free, &empty), 0.0);
        assert_eq!(aux_report_prob_vacuum(&dark_free, &empty), 0.0);
    }

    #[test]
    fn no_block_passes_everything() {
        assert_eq!(nesr(0.3, EsdDesign::NONE, 0.01, 0.5).unwrap(), 0.3);
        assert_eq!(sifting_rate_esd(0.3, EsdDesign::NONE, 0.01, 0.5).unwrap(), 1.0);
        assert_eq!(sifting_rate_esd(1e-13, EsdDesign::NONE, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn nesr_reference_points() {
        let design = EsdDesign::new(7, 3).unwrap();
        let v = nesr(1e-13, design, P_S_099, Q_S).unwrap();
        assert!(rel(v, 1.160_708_417_085_957e-5) < 1e-10, "{v:e}");

        let p = reference();
        let p_s_half = aux_report_prob_nonempty(0.5, &p.detector, &p.source);
        let v = nesr(1e-12, design, p_s_half, Q_S).unwrap();
        assert!(rel(v, 1.507_001_668_279_966e-5) < 1e-10, "{v:e}");
    }

    #[test]
    fn nesr_undefined_when_nothing_accepted() {
        let design = EsdDesign::new(3, 1).unwrap();
        let err = nesr(0.5, design, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, EsdError::UndefinedRatio(_)));
        assert!(nesr(0.0, design, 0.1, 0.1).is_err());
    }

    #[test]
    fn sifting_reference_points() {
        let design = EsdDesign::new(7, 3).unwrap();
        let s = sifting_rate_esd(1e-13, design, P_S_099, Q_S).unwrap();
        assert!(rel(s, 4.181_694_507_435_39e-14) < 1e-10, "{s:e}");
        let s = sifting_rate_esd(1.0, EsdDesign::new(5, 5).unwrap(), 0.5, 0.0).unwrap();
        assert_eq!(s, 0.03125);
    }

    #[test]
    fn report_probability_reference() {
        let p = reference();
        let r = report_probs(0.015, &p.detector);
        assert!(rel(r.error_nonempty, 0.011_700_020_829_997_8) < 1e-12);
        assert!(rel(r.correct_nonempty, 0.768_299_945_169_997_8) < 1e-12);
        assert_eq!(r.correct_vacuum, r.error_vacuum);
        assert!(rel(r.correct_vacuum, 9.999_999e-8) < 1e-12);

        let clean = DetectorParams { efficiency: 0.78, dark_count: 0.0 };
        let r = report_probs(0.0, &clean);
        assert_eq!(r.error_nonempty, 0.0);
        assert_eq!(r.correct_nonempty, 0.78);
        assert_eq!(r.correct_vacuum, 0.0);

        let noisy = DetectorParams { efficiency: 0.78, dark_count: 0.5 };
        let r = report_probs(0.015, &noisy);
        assert_eq!(r.correct_vacuum, 0.25);
        assert_eq!(r.error_vacuum, 0.25);
    }

    #[test]
    fn qber_limits() {
        let p = reference();
        let r = report_probs(0.015, &p.detector);
        assert_eq!(qber(0.0, &r).unwrap(), 0.5);

        let clean = DetectorParams { efficiency: 0.78, dark_count: 0.0 };
        let r0 = report_probs(0.015, &clean);
        assert!((qber(1.0, &r0).unwrap() - 0.015).abs() < 1e-17);
        assert!(matches!(qber(0.0, &r0), Err(EsdError::UndefinedRatio(_))));

        let q = qber(1.160_708_417_085_957e-5, &r).unwrap();
        assert!(rel(q, 0.025_482_398_214_810_32) < 1e-9, "{q}");
    }

    #[test]
    fn gate_condition_is_strict() {
        let src = reference().source;
        let gate = |deflection| GateParams { deflection, epsilon: 0.0 };
        assert!(esd_effective(&gate(0.99), &src));
        assert!(!esd_effective(&gate(0.001), &src));
        assert!(!esd_effective(&gate(0.002), &src));
    }

    #[test]
    fn feasibility_reference() {
        let p = reference();
        let f = feasibility(&p.protocol, &p.detector);
        assert!(f.feasible);
        assert!((f.error_bound - 0.029_999_973_487_179_487).abs() < 1e-15);
        assert!(rel(f.nesr_threshold.unwrap(), 8.034_137_686_925_196e-6) < 1e-10);

        let mut proto = p.protocol;
        proto.channel_error = 0.03;
        let f = feasibility(&proto, &p.detector);
        assert!(!f.feasible);
        assert_eq!(f.nesr_threshold, None);

        let clean = DetectorParams { efficiency: 0.78, dark_count: 0.0 };
        let f = feasibility(&p.protocol, &clean);
        assert!(f.feasible);
        assert_eq!(f.nesr_threshold, Some(0.0));
    }

    #[test]
    fn effective_detection_reference() {
        let det = reference().detector;
        let clean = DetectorParams { efficiency: 0.78, dark_count: 0.0 };
        assert_eq!(bb84_effective_detection(1.0, &clean), 0.78);
        assert!(rel(bb84_effective_detection(0.0, &det), 1.999_999_8e-7) < 1e-12);
        let e = bb84_effective_detection(1.160_708_417_085_957e-5, &det);
        assert!(rel(e, 9.253_522_917_212_952e-6) < 1e-10, "{e:e}");
    }

    #[test]
    fn rate_composes_factors() {
        assert_eq!(key_rate(0.5, 1.0, 1.0, 1.0), 0.5);
        assert_eq!(key_rate(0.5, 0.3, 0.2, 0.0), 0.0);
        let det = reference().detector;
        let e_o = bb84_effective_detection(1.160_708_417_085_957e-5, &det);
        let r = key_rate(0.5, 4.181_694_507_435_39e-14, e_o, 1.0);
        assert!(rel(r, 0.5 * 4.181_694_507_435_39e-14 * 9.253_522_917_212_952e-6) < 1e-10);
    }

    #[test]
    fn post_processing_default() {
        assert_eq!(default_post_processing(0.0), 1.0);
        assert_eq!(default_post_processing(0.5), 0.0);
        assert!(default_post_processing(0.11) < 0.005);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn design_parsing() {
        assert_eq!("7:3".parse::<EsdDesign>().unwrap(), EsdDesign::new(7, 3).unwrap());
        assert_eq!("(9,2)".parse::<EsdDesign>().unwrap(), EsdDesign::new(9, 2).unwrap());
        assert!("3:4".parse::<EsdDesign>().is_err());
        assert!("3".parse::<EsdDesign>().is_err());
        assert_eq!(EsdDesign::new(7, 3).unwrap().to_string(), "(7,3)");
    }

    #[test]
    fn link_metrics_reference_point() {
        let m = link_metrics(1e-13, EsdDesign::new(7, 3).unwrap(), &reference()).unwrap();
        assert!(rel(m.p_tail, 4.853_728_012_462_373e-6) < 1e-12);
        assert!(rel(m.nesr.unwrap(), 1.160_708_417_085_957e-5) < 1e-10);
        assert!(rel(m.qber.unwrap(), 0.025_482_398_214_810_32) < 1e-9);
        assert!(m.rate >= 0.0);
    }
}
