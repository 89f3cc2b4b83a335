//! Both feasibility predicates: the gate must deflect better than the
//! preparation error, and the channel error must leave room under the QBER
//! threshold once dark counts are accounted for.

use esd_core::designer::feasibility_report;
use esd_core::params::ParamSet;

fn main() {
    let reference = ParamSet::reference();
    print!("reference\n{}", feasibility_report(&reference).render());

    let weak_gate = reference.with_deflection(0.001);
    println!("\ndeflection 0.001 vs e_P = {}", weak_gate.source.prep_error);
    print!("{}", feasibility_report(&weak_gate).render());

    let mut noisy = reference;
    noisy.protocol.channel_error = 0.03;
    println!("\nchannel error at the threshold");
    print!("{}", feasibility_report(&noisy).render());
}
