//! CSV of NESR and QBER against a log-spaced transmission grid for a few
//! designs, the data behind a NESR/QBER-vs-t chart.
//!
//!     cargo run --example sweep_transmission > sweep.csv

use esd_core::analytics::{link_metrics, EsdDesign};
use esd_core::params::ParamSet;
use esd_core::report::{csv_table, log_grid};

fn main() -> esd_core::Result<()> {
    let params = ParamSet::reference();
    let designs = [EsdDesign::NONE, EsdDesign::new(3, 2)?, EsdDesign::new(7, 3)?];
    let mut rows = Vec::new();
    for t in log_grid(1e-14, 1.0, 29)? {
        for &d in &designs {
            rows.push(link_metrics(t, d, &params)?);
        }
    }
    print!("{}", csv_table(&rows));
    Ok(())
}
