//! Combining independent distinguishability penalties into an expected visibility.

use homsync::budget::{compose_budget, walkoff_penalty, PenaltyLedger};
use homsync::hom_engine::{average_visibility, JitterRatio};

fn main() -> homsync::Result<()> {
    let walkoff = walkoff_penalty(7.3, 117.0)?;
    let ledger = PenaltyLedger::default()
        .with_entry("multipair", 0.009)?
        .with_entry("spectral", 0.01)?
        .with_entry("gvd walk-off", walkoff)?
        .with_entry("polarization", 0.03)?;
    let jitter = average_visibility(JitterRatio::new(49.2, 117.0)?);
    let breakdown = compose_budget(&ledger, jitter)?;
    println!("{breakdown}");
    breakdown.write_csv(std::io::stdout())?;
    Ok(())
}
