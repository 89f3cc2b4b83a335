//! Fibre length to transmission rate, for the direct and twin-field
//! channel variants and both attenuation laws.

use esd_core::params::{ChannelLaw, ChannelSpec, ChannelVariant};

fn main() -> esd_core::Result<()> {
    println!("{:>8} {:>14} {:>14} {:>14}", "km", "direct", "twin-field", "direct 10^x");
    for length in [0.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 1500.0] {
        let direct = ChannelSpec::fiber(0.2, length, ChannelVariant::Direct);
        let tf = ChannelSpec::fiber(0.2, length, ChannelVariant::TwinField);
        let base10 = ChannelSpec {
            law: ChannelLaw::Base10,
            ..direct
        };
        println!(
            "{length:>8} {:>14.4e} {:>14.4e} {:>14.4e}",
            direct.transmission_rate()?,
            tf.transmission_rate()?,
            base10.transmission_rate()?
        );
    }
    Ok(())
}
