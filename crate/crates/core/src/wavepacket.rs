//! Temporal pulse envelopes, spectra and the bandwidth/coherence relation.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{GAUSSIAN_FWHM_PER_SIGMA, MM_PER_NM, MM_PER_PM, SPEED_OF_LIGHT_MM_PER_PS};

/// Time-bandwidth constant of the coherence-length relation l_c = K·λ₀²/Δλ.
pub const COHERENCE_TIME_BANDWIDTH: f64 = 0.44;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeFamily {
    Gaussian,
    #[serde(rename = "sech2")]
    SechSquared,
    Delta,
}

impl ShapeFamily {
    pub fn name(self) -> &'static str {
        match self {
            ShapeFamily::Gaussian => "gaussian",
            ShapeFamily::SechSquared => "sech2",
            ShapeFamily::Delta => "delta",
        }
    }
}

/// Intensity envelope of a pulse, characterised by its family and the FWHM
/// of its temporal intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    family: ShapeFamily,
    fwhm_ps: f64,
}

impl PulseShape {
    pub fn new(family: ShapeFamily, fwhm_ps: f64) -> Result<Self> {
        if !(fwhm_ps.is_finite() && fwhm_ps >= 0.0) {
            return Err(Error::invalid("fwhm_ps", format!("must be finite and >= 0, got {fwhm_ps}")));
        }
        match family {
            ShapeFamily::Delta if fwhm_ps != 0.0 => {
                Err(Error::invalid("fwhm_ps", "a delta pulse has zero width"))
            }
            ShapeFamily::Gaussian | ShapeFamily::SechSquared if fwhm_ps == 0.0 => {
                // A zero-width envelope is a delta.
                Ok(Self::delta())
            }
            _ => Ok(Self { family, fwhm_ps }),
        }
    }

    pub fn gaussian(fwhm_ps: f64) -> Result<Self> {
        Self::new(ShapeFamily::Gaussian, fwhm_ps)
    }

    pub fn sech_squared(fwhm_ps: f64) -> Result<Self> {
        Self::new(ShapeFamily::SechSquared, fwhm_ps)
    }

    pub fn delta() -> Self {
        Self {
            family: ShapeFamily::Delta,
            fwhm_ps: 0.0,
        }
    }

    pub fn family(&self) -> ShapeFamily {
        self.family
    }

    pub fn fwhm_ps(&self) -> f64 {
        self.fwhm_ps
    }

    /// Normalized intensity |ψ(t)|², integrating to one over t.
    pub fn intensity(&self, t_ps: f64) -> Result<f64> {
        Ok(self.envelope_amplitude(t_ps)?.powi(2))
    }

    /// Real field envelope ψ(t) with ∫|ψ|² dt = 1.
    ///
    /// Gaussian: ψ(t) = (σ√(2π))^(-1/2) · exp(−t²/4σ²), where σ is the standard
    /// deviation of |ψ|². Sech²: ψ(t) = sech(t/τ₀)/√(2τ₀).
    pub fn envelope_amplitude(&self, t_ps: f64) -> Result<f64> {
        match self.family {
            ShapeFamily::Gaussian => {
                let sigma = self.fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA;
                let norm = (sigma * (2.0 * PI).sqrt()).sqrt().recip();
                Ok(norm * (-t_ps * t_ps / (4.0 * sigma * sigma)).exp())
            }
            ShapeFamily::SechSquared => {
                let tau0 = self.fwhm_ps / sech2_fwhm_per_tau0();
                Ok((t_ps / tau0).cosh().recip() / (2.0 * tau0).sqrt())
            }
            ShapeFamily::Delta => Err(Error::UnsupportedShape {
                operation: "envelope_amplitude",
                shape: "delta",
            }),
        }
    }

    /// Standard deviation of the temporal intensity distribution.
    pub fn intensity_std_ps(&self) -> f64 {
        match self.family {
            ShapeFamily::Gaussian => self.fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA,
            ShapeFamily::SechSquared => self.fwhm_ps / sech2_fwhm_per_tau0() * PI / 12f64.sqrt(),
            ShapeFamily::Delta => 0.0,
        }
    }

    /// Draws an instant distributed according to the intensity envelope.
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            ShapeFamily::Delta => 0.0,
            ShapeFamily::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                z * self.fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA
            }
            ShapeFamily::SechSquared => {
                // CDF of sech²(t/τ₀)/(2τ₀) is (1 + tanh(t/τ₀))/2.
                let tau0 = self.fwhm_ps / sech2_fwhm_per_tau0();
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                tau0 * (2.0 * u - 1.0).atanh()
            }
        }
    }
}

/// FWHM of sech²(x) in units of x: 2·acosh(√2).
pub fn sech2_fwhm_per_tau0() -> f64 {
    2.0 * SQRT_2.acosh()
}

/// Spectral passband: centre wavelength and FWHM bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    center_wavelength_nm: f64,
    fwhm_bandwidth_pm: f64,
}

impl Spectrum {
    pub fn new(center_wavelength_nm: f64, fwhm_bandwidth_pm: f64) -> Result<Self> {
        if !(center_wavelength_nm.is_finite() && center_wavelength_nm > 0.0) {
            return Err(Error::invalid(
                "center_wavelength_nm",
                format!("must be > 0, got {center_wavelength_nm}"),
            ));
        }
        if !(fwhm_bandwidth_pm.is_finite() && fwhm_bandwidth_pm > 0.0) {
            return Err(Error::invalid(
                "fwhm_bandwidth_pm",
                format!("zero or negative bandwidth {fwhm_bandwidth_pm}"),
            ));
        }
        Ok(Self {
            center_wavelength_nm,
            fwhm_bandwidth_pm,
        })
    }

    pub fn center_wavelength_nm(&self) -> f64 {
        self.center_wavelength_nm
    }

    pub fn fwhm_bandwidth_pm(&self) -> f64 {
        self.fwhm_bandwidth_pm
    }

    /// FWHM bandwidth in optical frequency, THz (= 1/ps).
    pub fn frequency_bandwidth_thz(&self) -> f64 {
        let lambda_mm = self.center_wavelength_nm * MM_PER_NM;
        SPEED_OF_LIGHT_MM_PER_PS * self.fwhm_bandwidth_pm * MM_PER_PM / (lambda_mm * lambda_mm)
    }

    /// Coherence length 0.44·λ₀²/Δλ in millimetres.
    pub fn coherence_length_mm(&self) -> f64 {
        let lambda_mm = self.center_wavelength_nm * MM_PER_NM;
        COHERENCE_TIME_BANDWIDTH * lambda_mm * lambda_mm / (self.fwhm_bandwidth_pm * MM_PER_PM)
    }
}

/// Standard deviation of a Gaussian with the given FWHM.
pub fn fwhm_to_sigma(fwhm_ps: f64, family: ShapeFamily) -> Result<f64> {
    if family != ShapeFamily::Gaussian {
        return Err(Error::UnsupportedShape {
            operation: "fwhm_to_sigma",
            shape: family.name(),
        });
    }
    if !(fwhm_ps >= 0.0) {
        return Err(Error::invalid("fwhm_ps", format!("must be >= 0, got {fwhm_ps}")));
    }
    Ok(fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA)
}

pub fn sigma_to_fwhm(sigma_ps: f64) -> f64 {
    sigma_ps * GAUSSIAN_FWHM_PER_SIGMA
}

/// Free-space propagation time over `path_length_mm`.
pub fn delay_length_to_time(path_length_mm: f64) -> f64 {
    path_length_mm / SPEED_OF_LIGHT_MM_PER_PS
}

pub fn delay_time_to_length(delay_ps: f64) -> f64 {
    delay_ps * SPEED_OF_LIGHT_MM_PER_PS
}

/// Coherence time (ps) of light with the given spectrum.
pub fn coherence_time(spectrum: &Spectrum) -> f64 {
    delay_length_to_time(spectrum.coherence_length_mm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn half_max_crossing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let half = 0.5 * f(0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn fwhm_to_sigma_examples() {
        assert_relative_eq!(fwhm_to_sigma(2.3548, ShapeFamily::Gaussian).unwrap(), 1.0, epsilon = 1e-4);
        assert_eq!(fwhm_to_sigma(0.0, ShapeFamily::Gaussian).unwrap(), 0.0);
        let sigma = fwhm_to_sigma(117.0, ShapeFamily::Gaussian).unwrap();
        assert!((sigma - 49.68).abs() < 0.01);
        // Oracle: half-maximum of exp(-t²/2σ²) sits at FWHM/2.
        let half = half_max_crossing(|t| (-t * t / (2.0 * sigma * sigma)).exp(), 0.0, 500.0);
        assert_relative_eq!(2.0 * half, 117.0, max_relative = 1e-10);
        assert!(matches!(
            fwhm_to_sigma(5.0, ShapeFamily::SechSquared),
            Err(Error::UnsupportedShape { .. })
        ));
    }

    #[test]
    fn delay_length_examples() {
        assert!((delay_length_to_time(8.27) - 27.59).abs() < 0.005);
        assert_eq!(delay_length_to_time(0.0), 0.0);
        assert!((delay_length_to_time(1.0) - 3.336).abs() < 5e-4);
    }

    #[test]
    fn coherence_time_examples() {
        let signal = Spectrum::new(1548.0, 30.0).unwrap();
        assert!((coherence_time(&signal) - 117.2).abs() < 0.1);
        let pump = Spectrum::new(775.0, 30.0).unwrap();
        assert!((coherence_time(&pump) - 29.4).abs() < 0.05);
        let wide = Spectrum::new(1548.0, 60.0).unwrap();
        assert_relative_eq!(coherence_time(&wide), 0.5 * coherence_time(&signal), max_relative = 1e-12);
        assert!(Spectrum::new(1548.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_envelope_is_normalized_and_peaked() {
        let pulse = PulseShape::gaussian(117.0).unwrap();
        let peak = pulse.envelope_amplitude(0.0).unwrap();
        for t in [-50.0, -1.0, 1.0, 30.0] {
            assert!(pulse.envelope_amplitude(t).unwrap() < peak);
        }
        let norm = simpson(|t| pulse.intensity(t).unwrap(), -1500.0, 1500.0, 20_000);
        assert!((norm - 1.0).abs() < 1e-6);
        let at_half = pulse.envelope_amplitude(117.0 / 2.0).unwrap().powi(2);
        assert_relative_eq!(at_half, 0.5 * peak * peak, max_relative = 1e-12);
    }

    #[test]
    fn sech2_envelope_is_normalized_with_numeric_fwhm() {
        let pulse = PulseShape::sech_squared(5.0).unwrap();
        let norm = simpson(|t| pulse.intensity(t).unwrap(), -200.0, 200.0, 40_000);
        assert!((norm - 1.0).abs() < 1e-6);
        let half = half_max_crossing(|t| pulse.intensity(t).unwrap(), 0.0, 50.0);
        assert_relative_eq!(2.0 * half, 5.0, max_relative = 1e-9);
    }

    #[test]
    fn delta_rejects_pointwise_evaluation() {
        assert!(PulseShape::delta().envelope_amplitude(0.0).is_err());
        assert!(PulseShape::new(ShapeFamily::Delta, 1.0).is_err());
        assert!(PulseShape::gaussian(-1.0).is_err());
    }

    #[test]
    fn sampled_times_follow_the_envelope_width() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for pulse in [PulseShape::gaussian(29.0).unwrap(), PulseShape::sech_squared(5.0).unwrap()] {
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| pulse.sample_time(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let std = pulse.intensity_std_ps();
            assert!(mean.abs() < 4.0 * std / (n as f64).sqrt());
            assert!((var.sqrt() / std - 1.0).abs() < 0.02);
        }
    }

    proptest! {
        #[test]
        fn sigma_fwhm_round_trip(sigma in 1e-3f64..1e4) {
            let back = fwhm_to_sigma(sigma_to_fwhm(sigma), ShapeFamily::Gaussian).unwrap();
            prop_assert!((back / sigma - 1.0).abs() < 1e-12);
        }

        #[test]
        fn coherence_time_bandwidth_product_is_constant(bw in 1.0f64..1000.0) {
            let reference = coherence_time(&Spectrum::new(1548.0, 30.0).unwrap()) * 30.0;
            let product = coherence_time(&Spectrum::new(1548.0, bw).unwrap()) * bw;
            prop_assert!((product / reference - 1.0).abs() < 1e-12);
        }

        #[test]
        fn envelopes_are_normalized(fwhm in 0.5f64..200.0, sech in any::<bool>()) {
            let pulse = if sech { PulseShape::sech_squared(fwhm) } else { PulseShape::gaussian(fwhm) }.unwrap();
            let span = 40.0 * fwhm;
            let norm = simpson(|t| pulse.intensity(t).unwrap(), -span, span, 20_000);
            prop_assert!((norm - 1.0).abs() < 1e-6);
        }
    }
}
