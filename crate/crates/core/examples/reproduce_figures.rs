//! Writes both reference figures (CSV + SVG) to a directory and prints the
//! claim checks.
//!
//!     cargo run --example reproduce_figures -- out/

use std::path::PathBuf;

use esd_core::params::ParamSet;
use esd_core::report::figures::{reproduce, Figure, ReproduceOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    for figure in [Figure::NesrQber, Figure::NkGrid] {
        let out = reproduce(figure, &ParamSet::reference(), &ReproduceOptions::default())?;
        for (name, contents) in &out.files {
            std::fs::write(dir.join(name), contents)?;
        }
        print!("{}", out.summary());
    }
    println!("written to {}", dir.display());
    Ok(())
}
