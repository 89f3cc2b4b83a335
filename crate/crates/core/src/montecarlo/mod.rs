//! Event-level Monte Carlo of the ESD block and the message measurement.
//!
//! Each auxiliary is simulated as a chain of independent coin flips: the
//! auxiliary source emits or not, the post-gate measurement lands on `|1>`
//! (with the gate deflection when the signal is non-empty, with the
//! preparation error when it is vacuum), and the SPD behind the `|1>`
//! filter clicks. Accepted signals are then measured on the message degree
//! of freedom with two detectors. None of this goes through the closed
//! forms in [`crate::analytics`], which makes it usable as their oracle.
//!
//! Two estimation modes exist. `Direct` samples whether the signal is empty
//! with probability `t` per trial. `Conditional` runs the non-empty and the
//! vacuum branch separately and combines the two acceptance frequencies
//! through the exact NESR, `S_ESD` and QBER expressions, which is the only
//! way to resolve `t` around 1e-13.
//!
//! Trials are cut into fixed-size shards, each with its own ChaCha stream,
//! and merged by integer addition: the result depends only on the seed and
//! the trial count, never on the number of worker threads.

mod estimate;
mod rng;

use std::fmt::{self, Write as _};

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rayon::prelude::*;

pub use estimate::{level_for_z, wilson, z_for_level, EstimateWithCI, THREE_SIGMA};
pub use rng::RngSeed;

use crate::analytics::{self, EsdDesign, LinkMetrics, ReportProbs};
use crate::error::{EsdError, Result};
use crate::params::{effective_deflection, ParamSet};

/// Direct sampling is refused below this transmission rate.
pub const DIRECT_MODE_MIN_T: f64 = 1e-4;

/// Sigma multiple beyond which an analytic value counts as a disagreement.
pub const DISAGREE_SIGMA: f64 = 4.0;

const SHARD_TRIALS: u64 = 1 << 16;

const PURPOSE_DIRECT: u64 = 0;
const PURPOSE_NONEMPTY_BRANCH: u64 = 1;
const PURPOSE_VACUUM_BRANCH: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    Direct,
    Conditional,
}

impl SimulationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimulationMode::Direct => "direct",
            SimulationMode::Conditional => "conditional",
        }
    }
}

impl std::str::FromStr for SimulationMode {
    type Err = EsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SimulationMode::Direct),
            "conditional" => Ok(SimulationMode::Conditional),
            other => Err(EsdError::invalid(format!(
                "unknown simulation mode {other:?} (expected \"direct\" or \"conditional\")"
            ))),
        }
    }
}

impl fmt::Display for SimulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One auxiliary system passing through the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxEvent {
    pub source_nonempty: bool,
    /// Outcome of the projective measurement after the controlled gate.
    /// Only `|1>` is routed to the SPD.
    pub post_measurement_one: bool,
    pub spd_click: bool,
}

fn bernoulli(name: &str, p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| EsdError::invalid(format!("{name} must be in [0, 1], got {p}")))
}

/// Coin flips for a single auxiliary chain.
#[derive(Debug, Clone, Copy)]
struct AuxChain {
    source_nonempty: Bernoulli,
    deflected: Bernoulli,
    prep_error: Bernoulli,
    detected: Bernoulli,
    dark: Bernoulli,
}

impl AuxChain {
    fn new(params: &ParamSet) -> Result<Self> {
        Ok(AuxChain {
            source_nonempty: bernoulli("1 - source.y", 1.0 - params.source.empty_rate)?,
            deflected: bernoulli("gate deflection", effective_deflection(&params.gate).value)?,
            prep_error: bernoulli("source.e_p", params.source.prep_error)?,
            detected: bernoulli("detector.eta", params.detector.efficiency)?,
            dark: bernoulli("detector.d", params.detector.dark_count)?,
        })
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R, control_nonempty: bool) -> AuxEvent {
        let source_nonempty = self.source_nonempty.sample(rng);
        // A vacuum control leaves the target in |0>; an empty auxiliary
        // never reaches the measurement.
        let post_measurement_one = source_nonempty
            && if control_nonempty {
                self.deflected.sample(rng)
            } else {
                self.prep_error.sample(rng)
            };
        let spd_click = (post_measurement_one && self.detected.sample(rng)) || self.dark.sample(rng);
        AuxEvent {
            source_nonempty,
            post_measurement_one,
            spd_click,
        }
    }

    #[inline]
    fn clicks<R: Rng>(&self, rng: &mut R, control_nonempty: bool, n: u32) -> u32 {
        (0..n)
            .map(|_| u32::from(self.sample(rng, control_nonempty).spd_click))
            .sum()
    }
}

/// Two-detector measurement of the message degree of freedom.
#[derive(Debug, Clone, Copy)]
struct MessageMeasurement {
    channel_flip: Bernoulli,
    detected: Bernoulli,
    dark: Bernoulli,
}

/// Outcome of one message measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Report {
    Correct,
    Incorrect,
    /// Both or neither detector clicked.
    Ineffective,
}

impl MessageMeasurement {
    fn new(params: &ParamSet) -> Result<Self> {
        Ok(MessageMeasurement {
            channel_flip: bernoulli("protocol.e_c", params.protocol.channel_error)?,
            detected: bernoulli("detector.eta", params.detector.efficiency)?,
            dark: bernoulli("detector.d", params.detector.dark_count)?,
        })
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R, nonempty: bool) -> Report {
        let (right, wrong) = if nonempty {
            let photon = self.detected.sample(rng);
            let flipped = self.channel_flip.sample(rng);
            let lit = photon || self.dark.sample(rng);
            let other = self.dark.sample(rng);
            if flipped {
                (other, lit)
            } else {
                (lit, other)
            }
        } else {
            (self.dark.sample(rng), self.dark.sample(rng))
        };
        match (right, wrong) {
            (true, false) => Report::Correct,
            (false, true) => Report::Incorrect,
            _ => Report::Ineffective,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(EsdError::invalid("trials must be at least 1"))
    } else {
        Ok(())
    }
}

/// Runs `trials` in fixed shards and sums the per-shard tallies in shard
/// order.
fn run_sharded<T, F>(trials: u64, run: F) -> T
where
    T: Send + Default + Merge,
    F: Fn(u64, u64) -> T + Sync,
{
    let shards = trials.div_ceil(SHARD_TRIALS);
    let parts: Vec<T> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let start = shard * SHARD_TRIALS;
            let len = SHARD_TRIALS.min(trials - start);
            run(shard, len)
        })
        .collect();
    parts.into_iter().fold(T::default(), |mut acc, part| {
        acc.merge(&part);
        acc
    })
}

trait Merge {
    fn merge(&mut self, other: &Self);
}

/// Click-count histogram of one branch: `histogram[c]` trials saw exactly
/// `c` clicks among the `n` auxiliaries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BranchCounts {
    pub trials: u64,
    pub histogram: Vec<u64>,
}

impl Merge for BranchCounts {
    fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }
}

impl BranchCounts {
    /// Trials with at least `k` clicks.
    pub fn at_least(&self, k: u32) -> u64 {
        if k == 0 {
            return self.trials;
        }
        self.histogram.iter().skip(k as usize).sum()
    }

    pub fn tail(&self, k: u32, z: f64) -> EstimateWithCI {
        wilson(self.at_least(k), self.trials, z)
    }
}

fn simulate_branch(
    chain: &AuxChain,
    control_nonempty: bool,
    n: u32,
    trials: u64,
    seed: RngSeed,
    purpose: u64,
) -> BranchCounts {
    run_sharded(trials, |shard, len| {
        let mut rng = seed.shard_rng(purpose, shard);
        let mut histogram = vec![0u64; n as usize + 1];
        for _ in 0..len {
            histogram[chain.clicks(&mut rng, control_nonempty, n) as usize] += 1;
        }
        BranchCounts {
            trials: len,
            histogram,
        }
    })
}

/// Empirical acceptance tails of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchEstimate {
    pub control_nonempty: bool,
    pub design: EsdDesign,
    pub counts: BranchCounts,
    /// `tails[k]` estimates `P(>= k clicks)` for `k = 0..=n`, at three sigma.
    pub tails: Vec<EstimateWithCI>,
}

impl BranchEstimate {
    /// Tail at the design's own threshold.
    pub fn at_threshold(&self) -> EstimateWithCI {
        self.tails[self.design.k() as usize]
    }
}

/// Samples `trials` groups of `n` auxiliaries with the control fixed to the
/// non-empty (gate-deflection) or vacuum (preparation-error) branch.
pub fn simulate_aux_branch(
    control_nonempty: bool,
    design: EsdDesign,
    params: &ParamSet,
    trials: u64,
    seed: RngSeed,
) -> Result<BranchEstimate> {
    check_trials(trials)?;
    params.check()?;
    let chain = AuxChain::new(params)?;
    let purpose = if control_nonempty {
        PURPOSE_NONEMPTY_BRANCH
    } else {
        PURPOSE_VACUUM_BRANCH
    };
    let counts = simulate_branch(&chain, control_nonempty, design.n(), trials, seed, purpose);
    let z = z_for_level(THREE_SIGMA);
    let tails = (0..=design.n()).map(|k| counts.tail(k, z)).collect();
    Ok(BranchEstimate {
        control_nonempty,
        design,
        counts,
        tails,
    })
}

/// Counts gathered by direct-mode sampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DirectTallies {
    pub trials: u64,
    pub nonempty: u64,
    pub nonempty_accepted: u64,
    pub vacuum_accepted: u64,
    /// Accepted trials with exactly one message detector clicking.
    pub effective: u64,
    pub errors: u64,
}

impl DirectTallies {
    pub fn vacuum(&self) -> u64 {
        self.trials - self.nonempty
    }

    pub fn accepted(&self) -> u64 {
        self.nonempty_accepted + self.vacuum_accepted
    }
}

impl Merge for DirectTallies {
    fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.nonempty += other.nonempty;
        self.nonempty_accepted += other.nonempty_accepted;
        self.vacuum_accepted += other.vacuum_accepted;
        self.effective += other.effective;
        self.errors += other.errors;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tallies {
    Direct(DirectTallies),
    Conditional {
        nonempty: BranchCounts,
        vacuum: BranchCounts,
        /// Report probabilities used to turn NESR into QBER.
        probs: ReportProbs,
    },
}

/// Raw output of [`simulate_link`]; interval estimates at any confidence
/// level are derived from it on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSimulation {
    pub t: f64,
    pub design: EsdDesign,
    pub mode: SimulationMode,
    pub seed: RngSeed,
    pub trials: u64,
    pub tallies: Tallies,
}

/// Interval estimates of the link quantities at one confidence level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimates {
    pub p_tail: EstimateWithCI,
    pub q_tail: EstimateWithCI,
    pub nesr: EstimateWithCI,
    pub s_esd: EstimateWithCI,
    /// `None` when no accepted signal produced an effective report.
    pub qber: Option<EstimateWithCI>,
}

/// Estimates at the reporting level and at the disagreement threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMetrics {
    pub reported: MetricEstimates,
    pub wide: MetricEstimates,
}

/// Simulates the full link at transmission `t`.
pub fn simulate_link(
    t: f64,
    design: EsdDesign,
    params: &ParamSet,
    trials: u64,
    seed: RngSeed,
    mode: SimulationMode,
) -> Result<LinkSimulation> {
    check_trials(trials)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(EsdError::invalid(format!("transmission rate must be in (0, 1], got {t}")));
    }
    params.check()?;
    let chain = AuxChain::new(params)?;
    let tallies = match mode {
        SimulationMode::Direct => {
            if t < DIRECT_MODE_MIN_T {
                return Err(EsdError::RareEventRegime {
                    t,
                    min: DIRECT_MODE_MIN_T,
                });
            }
            let signal = bernoulli("t", t)?;
            let message = MessageMeasurement::new(params)?;
            let (n, k) = (design.n(), design.k());
            let tallies: DirectTallies = run_sharded(trials, |shard, len| {
                let mut rng = seed.shard_rng(PURPOSE_DIRECT, shard);
                let mut tally = DirectTallies {
                    trials: len,
                    ..DirectTallies::default()
                };
                for _ in 0..len {
                    let nonempty = signal.sample(&mut rng);
                    tally.nonempty += u64::from(nonempty);
                    if chain.clicks(&mut rng, nonempty, n) < k {
                        continue;
                    }
                    if nonempty {
                        tally.nonempty_accepted += 1;
                    } else {
                        tally.vacuum_accepted += 1;
                    }
                    match message.sample(&mut rng, nonempty) {
                        Report::Correct => tally.effective += 1,
                        Report::Incorrect => {
                            tally.effective += 1;
                            tally.errors += 1;
                        }
                        Report::Ineffective => {}
                    }
                }
                tally
            });
            if tallies.accepted() == 0 {
                return Err(EsdError::UndefinedRatio(format!(
                    "no trial out of {trials} was accepted by design {design}"
                )));
            }
            Tallies::Direct(tallies)
        }
        SimulationMode::Conditional => {
            let n = design.n();
            let nonempty = simulate_branch(&chain, true, n, trials, seed, PURPOSE_NONEMPTY_BRANCH);
            let vacuum = simulate_branch(&chain, false, n, trials, seed, PURPOSE_VACUUM_BRANCH);
            let k = design.k();
            if nonempty.at_least(k) == 0 && vacuum.at_least(k) == 0 {
                return Err(EsdError::UndefinedRatio(format!(
                    "no branch trial out of {trials} was accepted by design {design}"
                )));
            }
            Tallies::Conditional {
                nonempty,
                vacuum,
                probs: analytics::report_probs(params.protocol.channel_error, &params.detector),
            }
        }
    };
    Ok(LinkSimulation {
        t,
        design,
        mode,
        seed,
        trials,
        tallies,
    })
}

fn nesr_or(t: f64, p: f64, q: f64, fallback: f64) -> f64 {
    analytics::nesr_from_tails(t, p, q).unwrap_or(fallback)
}

fn qber_or(nesr: f64, probs: &ReportProbs, fallback: f64) -> f64 {
    analytics::qber(nesr, probs).unwrap_or(fallback)
}

impl LinkSimulation {
    /// Interval estimates at `z` sigma.
    pub fn estimates_at(&self, z: f64) -> MetricEstimates {
        let level = level_for_z(z);
        let k = self.design.k();
        match &self.tallies {
            Tallies::Direct(c) => MetricEstimates {
                p_tail: wilson(c.nonempty_accepted, c.nonempty, z),
                q_tail: wilson(c.vacuum_accepted, c.vacuum(), z),
                nesr: wilson(c.nonempty_accepted, c.accepted(), z),
                s_esd: wilson(c.accepted(), c.trials, z),
                qber: (c.effective > 0).then(|| wilson(c.errors, c.effective, z)),
            },
            Tallies::Conditional {
                nonempty,
                vacuum,
                probs,
            } => {
                let t = self.t;
                let p = nonempty.tail(k, z);
                let q = vacuum.tail(k, z);
                // NESR rises with the non-empty tail and falls with the vacuum
                // tail; S_ESD rises with both.
                let nesr_value = nesr_or(t, p.value, q.value, 0.0);
                let nesr_lo = nesr_or(t, p.lower, q.upper, 0.0);
                let nesr_hi = nesr_or(t, p.upper, q.lower, 1.0);
                let nesr = EstimateWithCI::from_bounds(
                    nesr_value,
                    nesr_lo,
                    nesr_hi,
                    self.trials,
                    level,
                );
                let sift = |pt: f64, qt: f64| t * pt + (1.0 - t) * qt;
                let s_esd = EstimateWithCI::from_bounds(
                    sift(p.value, q.value),
                    sift(p.lower, q.lower),
                    sift(p.upper, q.upper),
                    self.trials,
                    level,
                );
                // QBER is a monotone function of NESR
                let qber = analytics::qber(nesr_value, probs).ok().map(|value| {
                    let a = qber_or(nesr_lo, probs, 0.5);
                    let b = qber_or(nesr_hi, probs, 0.5);
                    EstimateWithCI::from_bounds(value, a.min(b), a.max(b), self.trials, level)
                });
                MetricEstimates {
                    p_tail: p,
                    q_tail: q,
                    nesr,
                    s_esd,
                    qber,
                }
            }
        }
    }

    pub fn estimates(&self, level: f64) -> MetricEstimates {
        self.estimates_at(z_for_level(level))
    }

    /// Estimates at three sigma plus the four-sigma intervals used to flag
    /// disagreement.
    pub fn empirical(&self) -> EmpiricalMetrics {
        EmpiricalMetrics {
            reported: self.estimates(THREE_SIGMA),
            wide: self.estimates_at(DISAGREE_SIGMA),
        }
    }

    /// Per-run record, one `key=value` per line.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("mode", self.mode.to_string());
        line("seed", self.seed.seed.to_string());
        line("stream_id", self.seed.stream_id.to_string());
        line("trials", self.trials.to_string());
        line("t", format!("{:.16e}", self.t));
        line("n", self.design.n().to_string());
        line("k", self.design.k().to_string());
        match &self.tallies {
            Tallies::Direct(c) => {
                line("count.trials", c.trials.to_string());
                line("count.nonempty", c.nonempty.to_string());
                line("count.nonempty_accepted", c.nonempty_accepted.to_string());
                line("count.vacuum_accepted", c.vacuum_accepted.to_string());
                line("count.effective", c.effective.to_string());
                line("count.errors", c.errors.to_string());
            }
            Tallies::Conditional {
                nonempty, vacuum, ..
            } => {
                let k = self.design.k();
                line("count.nonempty_branch_trials", nonempty.trials.to_string());
                line("count.nonempty_branch_accepted", nonempty.at_least(k).to_string());
                line("count.vacuum_branch_trials", vacuum.trials.to_string());
                line("count.vacuum_branch_accepted", vacuum.at_least(k).to_string());
            }
        }
        let est = self.estimates(THREE_SIGMA);
        line("level", format!("{THREE_SIGMA}"));
        let mut field = |name: &str, e: Option<EstimateWithCI>| match e {
            Some(e) => {
                line(&format!("{name}.value"), format!("{:.16e}", e.value));
                line(&format!("{name}.lower"), format!("{:.16e}", e.lower));
                line(&format!("{name}.upper"), format!("{:.16e}", e.upper));
                line(&format!("{name}.half_width"), format!("{:.16e}", e.half_width));
            }
            None => line(&format!("{name}.value"), "undefined".into()),
        };
        field("p_tail", Some(est.p_tail));
        field("q_tail", Some(est.q_tail));
        field("nesr", Some(est.nesr));
        field("s_esd", Some(est.s_esd));
        field("qber", est.qber);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Analytic value inside the reported interval.
    Agree,
    /// Analytic value outside the four-sigma interval.
    Disagree,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "disagree",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldAgreement {
    pub field: &'static str,
    pub analytic: Option<f64>,
    pub estimate: Option<EstimateWithCI>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub fields: Vec<FieldAgreement>,
}

impl AgreementReport {
    /// No field disagrees.
    pub fn pass(&self) -> bool {
        self.fields.iter().all(|f| f.verdict != Verdict::Disagree)
    }

    pub fn verdict(&self, field: &str) -> Option<Verdict> {
        self.fields.iter().find(|f| f.field == field).map(|f| f.verdict)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.fields {
            let analytic = f.analytic.map_or("undefined".into(), |v| format!("{v:.16e}"));
            let _ = writeln!(out, "compare.{}={} analytic={}", f.field, f.verdict.as_str(), analytic);
        }
        let _ = writeln!(out, "compare.pass={}", self.pass());
        out
    }
}

fn judge(
    analytic: Option<f64>,
    reported: Option<EstimateWithCI>,
    wide: Option<EstimateWithCI>,
) -> Verdict {
    match (analytic, reported, wide) {
        (Some(a), Some(r), Some(w)) if r.trials > 0 => {
            if r.contains(a) {
                Verdict::Agree
            } else if !w.contains(a) {
                Verdict::Disagree
            } else {
                Verdict::Inconclusive
            }
        }
        _ => Verdict::Inconclusive,
    }
}

pub fn compare_to_analytic(empirical: &EmpiricalMetrics, analytic: &LinkMetrics) -> AgreementReport {
    let r = &empirical.reported;
    let w = &empirical.wide;
    let fields = vec![
        ("p_tail", Some(analytic.p_tail), Some(r.p_tail), Some(w.p_tail)),
        ("q_tail", Some(analytic.q_tail), Some(r.q_tail), Some(w.q_tail)),
        ("nesr", analytic.nesr, Some(r.nesr), Some(w.nesr)),
        ("s_esd", Some(analytic.s_esd), Some(r.s_esd), Some(w.s_esd)),
        ("qber", analytic.qber, r.qber, w.qber),
    ];
    AgreementReport {
        fields: fields
            .into_iter()
            .map(|(field, a, rep, wide)| FieldAgreement {
                field,
                analytic: a,
                estimate: rep,
                verdict: judge(a, rep, wide),
            })
            .collect(),
    }
}
