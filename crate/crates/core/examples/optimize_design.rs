//! Searches the (n, k) grid for each objective, with and without a QBER
//! ceiling, and prints the QBER map of the whole grid.

use esd_core::designer::{optimize, sweep, DesignQuery, Objective};
use esd_core::params::ParamSet;

fn main() -> esd_core::Result<()> {
    let params = ParamSet::reference();
    let t = 1e-9;

    for objective in [Objective::MaxNesr, Objective::MinQber, Objective::MaxRate] {
        let mut query = DesignQuery::new(objective, 9);
        query.qber_ceiling = Some(0.03);
        match optimize(t, &params, &query) {
            Ok(best) => println!(
                "{objective:>9}: {} NESR={:.4e} QBER={:.5} rate={:.3e}",
                best.design,
                best.metrics.nesr.unwrap_or(f64::NAN),
                best.metrics.qber.unwrap_or(f64::NAN),
                best.metrics.rate
            ),
            Err(e) => println!("{objective:>9}: {e}"),
        }
    }

    let mut strict = DesignQuery::new(Objective::MaxRate, 9);
    strict.qber_ceiling = Some(1e-9);
    println!("ceiling 1e-9: {}", optimize(t, &params, &strict).unwrap_err());

    println!("\nQBER at t = {t:e} (rows n, columns k)");
    let points = sweep(t, &params, 9)?;
    for n in 0..=9 {
        let row: Vec<String> = points
            .iter()
            .filter(|p| p.design.n() == n)
            .map(|p| format!("{:6.4}", p.metrics.qber.unwrap_or(f64::NAN)))
            .collect();
        println!("n={n} {}", row.join(" "));
    }
    Ok(())
}
