mod common;

use esd_core::analytics::{link_metrics, EsdDesign};
use esd_core::montecarlo::{
    compare_to_analytic, simulate_aux_branch, simulate_link, RngSeed, SimulationMode, Verdict,
    THREE_SIGMA,
};
use esd_core::params::ParamSet;

fn design(n: u32, k: u32) -> EsdDesign {
    EsdDesign::new(n, k).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn identical_across_worker_counts() {
    let p = ParamSet::reference();
    let run = |mode| {
        move || {
            simulate_link(0.3, design(3, 2), &ParamSet::reference(), 300_001, RngSeed::with_stream(9, 4), mode)
                .unwrap()
                .summary()
        }
    };
    for mode in [SimulationMode::Direct, SimulationMode::Conditional] {
        let one = in_pool(1, run(mode));
        let three = in_pool(3, run(mode));
        assert_eq!(one, three);
    }
    let a = in_pool(1, || simulate_aux_branch(true, design(7, 3), &p, 200_000, RngSeed::new(3)).unwrap());
    let b = in_pool(3, || simulate_aux_branch(true, design(7, 3), &p, 200_000, RngSeed::new(3)).unwrap());
    assert_eq!(a, b);
}

#[test]
fn streams_and_seeds_are_independent() {
    let p = ParamSet::reference().with_deflection(0.5);
    let sample = |seed| simulate_aux_branch(true, design(5, 1), &p, 100_000, seed).unwrap().counts;
    assert_ne!(sample(RngSeed::with_stream(1, 0)), sample(RngSeed::with_stream(1, 1)));
    assert_ne!(sample(RngSeed::with_stream(1, 0)), sample(RngSeed::with_stream(2, 0)));
}

#[test]
fn ideal_chain_is_deterministic() {
    let mut p = ParamSet::reference().with_deflection(1.0);
    p.detector.efficiency = 1.0;
    p.detector.dark_count = 0.0;
    p.source.empty_rate = 0.0;
    p.source.prep_error = 0.0;
    let hit = simulate_aux_branch(true, design(1, 1), &p, 100_000, RngSeed::new(1)).unwrap();
    let est = hit.at_threshold();
    assert_eq!(est.value, 1.0);
    assert!(est.half_width < 1e-4);
    let miss = simulate_aux_branch(false, design(1, 1), &p, 100_000, RngSeed::new(1)).unwrap();
    assert_eq!(miss.at_threshold().value, 0.0);
}

#[test]
fn half_width_shrinks_like_root_two() {
    let p = ParamSet::reference().with_deflection(0.7);
    let mean_half_width = |trials| {
        let widths: Vec<f64> = (0..16)
            .map(|s| {
                simulate_aux_branch(true, design(3, 1), &p, trials, RngSeed::new(100 + s))
                    .unwrap()
                    .at_threshold()
                    .half_width
            })
            .collect();
        widths.iter().sum::<f64>() / widths.len() as f64
    };
    let ratio = mean_half_width(400_000) / mean_half_width(800_000);
    assert!((1.3..=1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn deep_aux_tail_at_reference_settings() {
    let p = ParamSet::reference();
    let b = simulate_aux_branch(true, design(7, 3), &p, 100_000_000, RngSeed::new(42)).unwrap();
    let analytic = link_metrics(1e-13, design(7, 3), &p).unwrap().p_tail;
    assert!(b.at_threshold().contains(analytic), "{:?} vs {analytic}", b.at_threshold());
}

#[test]
fn half_transmission_without_block() {
    let p = ParamSet::reference();
    let sim = simulate_link(0.5, EsdDesign::NONE, &p, 1_000_000, RngSeed::new(1), SimulationMode::Direct)
        .unwrap();
    assert!(sim.estimates(THREE_SIGMA).nesr.contains(0.5));
}

#[test]
fn branches_recombine_to_direct_nesr() {
    let mut rng = common::rng(21);
    for i in 0..4u32 {
        let p = common::random_simulable_params(&mut rng);
        let t = 0.05 * f64::from(i + 1);
        let d = design(4, 2);
        let direct = simulate_link(t, d, &p, 1_000_000, RngSeed::new(i.into()), SimulationMode::Direct)
            .unwrap();
        let wide = direct.empirical().wide;
        let pn = simulate_aux_branch(true, d, &p, 1_000_000, RngSeed::new(50 + u64::from(i))).unwrap();
        let qn = simulate_aux_branch(false, d, &p, 1_000_000, RngSeed::new(60 + u64::from(i))).unwrap();
        let (pt, qt) = (pn.at_threshold().value, qn.at_threshold().value);
        // branch point estimates through the closed-form NESR
        let combined = t * pt / (t * pt + (1.0 - t) * qt);
        assert!(wide.nesr.contains(combined), "set {i}: {combined} vs {:?}", wide.nesr);
    }
}

#[test]
fn oracle_agrees_on_reference_point() {
    let p = ParamSet::reference().with_deflection(0.6);
    let t = 0.5;
    let sim = simulate_link(t, design(3, 2), &p, 1_000_000, RngSeed::new(1), SimulationMode::Direct)
        .unwrap();
    let report = compare_to_analytic(&sim.empirical(), &link_metrics(t, design(3, 2), &p).unwrap());
    assert!(report.pass(), "{}", report.render());
    assert_eq!(report.verdict("nesr"), Some(Verdict::Agree));
}
