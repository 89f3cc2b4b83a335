#![allow(dead_code)]

use esd_core::params::{
    AuxSourceParams, ChannelSpec, DetectorParams, GateParams, ParamSet, ProtocolParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random parameter set that passes validation. Dark counts stay well
/// below the efficiency so that no warning fires either.
pub fn random_params(rng: &mut impl Rng) -> ParamSet {
    let efficiency = rng.random_range(0.05..=1.0);
    ParamSet {
        detector: DetectorParams {
            efficiency,
            dark_count: rng.random_range(0.0..1e-3) * efficiency,
        },
        source: AuxSourceParams {
            empty_rate: rng.random_range(0.0..0.999),
            prep_error: rng.random_range(0.0..0.2),
        },
        gate: GateParams {
            deflection: rng.random_range(0.0..=1.0),
            epsilon: 0.0,
        },
        channel: ChannelSpec::default(),
        protocol: ProtocolParams {
            qber_threshold: rng.random_range(0.01..0.2),
            channel_error: rng.random_range(0.0..0.05),
            sifting: 0.5,
        },
    }
}

/// Like [`random_params`], but biased towards sets where the acceptance
/// tails are large enough for a million-trial simulation to resolve.
pub fn random_simulable_params(rng: &mut impl Rng) -> ParamSet {
    let mut p = random_params(rng);
    p.source.empty_rate = rng.random_range(0.0..0.6);
    p.gate.deflection = rng.random_range(0.5..=1.0);
    p.detector.efficiency = rng.random_range(0.3..=1.0);
    p.detector.dark_count = rng.random_range(0.0..0.02);
    p
}

/// `P(at least k of n succeed)` by summing over all `2^n` outcomes.
pub fn brute_force_tail(n: u32, k: u32, x: f64) -> f64 {
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let ones = mask.count_ones();
        if ones >= k {
            total += x.powi(ones as i32) * (1.0 - x).powi((n - ones) as i32);
        }
    }
    total
}
