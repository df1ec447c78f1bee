//! Visibility ceiling of probabilistic pair sources from photon-number enumeration.

use homsync::hom_engine::{enumerate_multipair_visibility, PairStatistics};
use homsync::pairsource::multipair_visibility_cap;

fn main() -> homsync::Result<()> {
    for stats in [PairStatistics::Thermal, PairStatistics::SinglePhoton] {
        println!("{} low-gain cap: {:.4}", stats.name(), multipair_visibility_cap(stats)?);
    }
    println!("p       thermal   poisson   truncation bound");
    for p in [0.001, 0.01, 0.05, 0.1, 0.2] {
        let thermal = enumerate_multipair_visibility(p, p, PairStatistics::Thermal, 1.0)?;
        let poisson = enumerate_multipair_visibility(p, p, PairStatistics::Poisson, 1.0)?;
        println!(
            "{p:<6}  {:.5}   {:.5}   {:.1e}{}",
            thermal.visibility,
            poisson.visibility,
            thermal.truncation_bound,
            if thermal.truncation_warning { " (warning)" } else { "" }
        );
    }
    Ok(())
}
