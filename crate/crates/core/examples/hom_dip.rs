//! End-to-end Monte Carlo of a HOM dip between two independently pumped sources.

use homsync::coincidence::{
    run_hom, DetectorModel, HomScenario, DEFAULT_COINCIDENCE_WINDOW_PS, DEFAULT_PULSE_PERIOD_PS,
};
use homsync::correlator::delay_grid;
use homsync::jitterchain::{ExponentialLossJitter, JitterStage, SyncChain};
use homsync::pairsource::{PairStatistics, PhotonSource};
use homsync::wavepacket::{PulseShape, Spectrum};

fn main() -> homsync::Result<()> {
    let source = PhotonSource::new(
        PulseShape::gaussian(29.0)?,
        Spectrum::new(775.0, 30.0)?,
        Spectrum::new(1548.0, 30.0)?,
        0.1,
        PairStatistics::Thermal,
    )?;
    let detector = DetectorModel {
        efficiency: 0.2,
        dark_count_prob_per_gate: 1e-4,
        tdc_bin_ps: 4.0,
    };
    let scenario = HomScenario {
        source_a: source.clone(),
        source_b: source,
        chain: SyncChain::new(vec![JitterStage::new("sync", 27.0)?], None),
        loss_jitter: ExponentialLossJitter::new(0.0)?,
        overlap: 1.0,
        detectors: [detector; 2],
        delay_sweep_ps: delay_grid(-500.0, 500.0, 25.0)?,
        pulses_per_point: 500_000,
        seed: 42,
        pulse_period_ps: DEFAULT_PULSE_PERIOD_PS,
        coincidence_window_ps: DEFAULT_COINCIDENCE_WINDOW_PS,
    };

    let prediction = scenario.predict()?;
    let result = run_hom(&scenario)?;
    let (v, w) = (result.net_visibility(), result.dip_fwhm());
    println!("delay_ps  raw  accidental  net");
    for (i, d) in result.raw.centers().iter().enumerate().step_by(4) {
        println!(
            "{d:>8.0}  {:>4}  {:>10}  {:>5.0}",
            result.raw.counts()[i],
            result.accidentals.counts()[i],
            result.net.values[i]
        );
    }
    println!(
        "net visibility {:.3} ± {:.3} (expected {:.3}), FWHM {:.0} ± {:.0} ps (expected {:.0} ps)",
        v.value, v.error, prediction.expected_visibility, w.value, w.error, prediction.dip_fwhm_ps
    );
    Ok(())
}
