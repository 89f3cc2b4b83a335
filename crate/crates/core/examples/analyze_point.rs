//! Every link quantity at one operating point: the reference settings,
//! t = 1e-13 and a 3-of-7 ESD block.
//!
//!     cargo run --example analyze_point -- [t] [n] [k]

use esd_core::analytics::{link_metrics, EsdDesign};
use esd_core::params::ParamSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let t: f64 = args.next().map_or(Ok(1e-13), |s| s.parse())?;
    let n: u32 = args.next().map_or(Ok(7), |s| s.parse())?;
    let k: u32 = args.next().map_or(Ok(3), |s| s.parse())?;

    let params = ParamSet::reference();
    let with_block = link_metrics(t, EsdDesign::new(n, k)?, &params)?;
    let without = link_metrics(t, EsdDesign::NONE, &params)?;

    println!("t = {t:e}, design {}", with_block.design);
    println!("  P_s = {:.6e}   Q_s = {:.6e}", with_block.p_s, with_block.q_s);
    println!("  P_tail = {:.6e}   Q_tail = {:.6e}", with_block.p_tail, with_block.q_tail);
    println!("  S_ESD = {:.6e}", with_block.s_esd);
    println!("  rate = {:.6e}", with_block.rate);
    println!();
    println!("{:>12} {:>14} {:>10}", "", "NESR", "QBER");
    for (label, m) in [("no block", &without), ("ESD", &with_block)] {
        println!(
            "{label:>12} {:>14.6e} {:>10.6}",
            m.nesr.unwrap_or(f64::NAN),
            m.qber.unwrap_or(f64::NAN)
        );
    }
    if let (Some(a), Some(b)) = (without.nesr, with_block.nesr) {
        println!("NESR gain: {:.2} orders of magnitude", (b / a).log10());
    }
    Ok(())
}
