//! Cross- and autocorrelation of laser pulses measured through a jittery trigger.
//!
//! Simulates a delay scan of sum-frequency counts, fits the peak, and infers
//! the trigger jitter from the fitted width.

use homsync::correlator::{
    analytic_autocorr_fwhm, analytic_crosscorr_fwhm, delay_grid, fit_fwhm, simulate_correlation, FitModel,
};
use homsync::jitterchain::extract_component;
use homsync::wavepacket::PulseShape;

fn main() -> homsync::Result<()> {
    let diode = PulseShape::gaussian(20.7)?;
    let modelocked = PulseShape::sech_squared(5.0)?;
    let delays = delay_grid(-80.0, 80.0, 2.0)?;

    for jitter in [0.0, 17.56, 27.27] {
        let hist = simulate_correlation(&diode, &modelocked, jitter, &delays, 50_000, 1)?;
        let fit = fit_fwhm(&hist, FitModel::Gaussian)?;
        let inferred = extract_component(fit.fwhm_ps, &[diode.fwhm_ps(), modelocked.fwhm_ps()]).unwrap_or(0.0);
        println!(
            "trigger jitter {jitter:>6.2} ps: cross-correlation {:.2} ± {:.2} ps (quadrature {:.2}), inferred jitter {inferred:.2} ps",
            fit.fwhm_ps,
            fit.fwhm_error_ps,
            analytic_crosscorr_fwhm(&diode, &modelocked, jitter)
        );
    }

    let hist = simulate_correlation(&modelocked, &modelocked, 0.0, &delay_grid(-20.0, 20.0, 0.25)?, 50_000, 2)?;
    let fit = fit_fwhm(&hist, FitModel::SechSquaredAutocorr)?;
    let factor = analytic_autocorr_fwhm(&modelocked)? / modelocked.fwhm_ps();
    println!(
        "sech² autocorrelation {:.3} ps -> pulse {:.3} ps (deconvolution factor {factor:.4})",
        fit.fwhm_ps,
        fit.fwhm_ps / factor
    );
    Ok(())
}
