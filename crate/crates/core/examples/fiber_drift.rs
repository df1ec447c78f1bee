//! Thermal path-length drift of installed fiber and how often it must be corrected.

use homsync::jitterchain::{stabilization_interval, thermal_drift, DiurnalProfile, FiberLink, StabilizationInterval};
use homsync::wavepacket::delay_length_to_time;

fn main() -> homsync::Result<()> {
    let profile = DiurnalProfile::default();
    for km in [0.4, 2.2, 36.0] {
        let link = FiberLink::with_loss(km, 0.2)?;
        println!(
            "{km:>5.1} km: {:.1} ps per kelvin, daily amplitude {:.1} ps",
            thermal_drift(&link, 1.0),
            profile.amplitude_ps(&link)
        );
    }

    let link = FiberLink::with_loss(36.0, 0.2)?;
    let femtosecond = delay_length_to_time(0.040);
    for (label, tolerance) in [("200 fs source", femtosecond), ("20.7 ps diode", 20.7), ("loose", 1e5)] {
        match stabilization_interval(&link, tolerance, &profile)? {
            StabilizationInterval::Every { seconds } => {
                println!("36 km, {label} ({tolerance:.3} ps): stabilize every {seconds:.1} s")
            }
            StabilizationInterval::Never => println!("36 km, {label}: no stabilization needed"),
        }
    }
    Ok(())
}
