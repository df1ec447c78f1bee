//! Timing-jitter bookkeeping for a synchronization chain.

use homsync::jitterchain::{
    chain_total_jitter, extract_component, loss_excess_jitter, ExponentialLossJitter, FiberLink, JitterStage,
    LossJitterModel, SyncChain,
};

fn main() -> homsync::Result<()> {
    // Widths inferred from measured cross-correlations.
    let direct = extract_component(27.6, &[20.7, 5.0])?;
    let full_line = extract_component(34.6, &[20.7, 5.0])?;
    let converters = extract_component(full_line, &[direct])?;
    println!("photodetector trigger {direct:.2} ps, full line {full_line:.2} ps, media converters {converters:.2} ps");

    let model = ExponentialLossJitter::new(1.0)?;
    let chain = SyncChain::new(
        vec![
            JitterStage::new("photodetector trigger", direct)?,
            JitterStage::new("media converters", converters)?,
        ],
        Some(FiberLink::with_loss(2.2, 0.2)?),
    );
    let link = chain.link.as_ref().expect("link set above");
    println!(
        "2.2 km link adds {:.3} ps; chain total {:.2} ps",
        loss_excess_jitter(link, &model),
        chain_total_jitter(&chain, &model)?
    );

    println!("loss (dB)  excess jitter (ps)");
    for loss in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
        println!("{loss:>9.1}  {:>18.3}", model.excess_jitter_ps(loss));
    }
    Ok(())
}
