//! Checks the closed forms against the event-level simulation: a direct run
//! at moderate loss, then a conditional (branch-separated) run deep in the
//! lossy regime where direct sampling is refused.

use esd_core::analytics::{link_metrics, EsdDesign};
use esd_core::montecarlo::{compare_to_analytic, simulate_link, RngSeed, SimulationMode};
use esd_core::params::ParamSet;

fn main() -> esd_core::Result<()> {
    let params = ParamSet::reference().with_deflection(0.6);
    let design = EsdDesign::new(3, 2)?;

    let t = 0.2;
    let sim = simulate_link(t, design, &params, 2_000_000, RngSeed::new(1), SimulationMode::Direct)?;
    let report = compare_to_analytic(&sim.empirical(), &link_metrics(t, design, &params)?);
    println!("direct, t = {t}:\n{}", report.render());

    let t = 1e-6;
    match simulate_link(t, design, &params, 1000, RngSeed::new(1), SimulationMode::Direct) {
        Err(e) => println!("direct, t = {t:e}: {e}"),
        Ok(_) => unreachable!("direct mode is refused below 1e-4"),
    }
    let sim = simulate_link(t, design, &params, 4_000_000, RngSeed::new(1), SimulationMode::Conditional)?;
    let report = compare_to_analytic(&sim.empirical(), &link_metrics(t, design, &params)?);
    println!("\nconditional, t = {t:e}:\n{}", report.render());
    Ok(())
}
