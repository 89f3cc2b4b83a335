//! Parameter files: parse, validate and render back.

use esd_core::config;
use esd_core::params::validate;

const FILE: &str = r#"
# reference detector, noisier source
detector.eta = 0.6
detector.d = 2e-6

[source]
e_p = 0.01

[channel]
length_km = 250
variant = "twin-field"
"#;

fn main() -> esd_core::Result<()> {
    let params = config::parse(FILE)?;
    let report = validate(&params);
    println!("valid: {}, warnings: {}", report.is_valid(), report.warnings.len());
    println!("t = {:e}", params.channel.transmission_rate()?);
    print!("{}", config::render(&params));

    let err = config::parse("detector.efficiency = 0.5").unwrap_err();
    println!("\n{err}");
    Ok(())
}
