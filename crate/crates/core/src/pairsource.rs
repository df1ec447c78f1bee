//! Pulsed down-conversion pair sources.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom_engine::enumeration::{enumerate_multipair_visibility, low_gain_visibility};
pub use crate::hom_engine::enumeration::PairStatistics;
use crate::units::GAUSSIAN_FWHM_PER_SIGMA;
use crate::wavepacket::{PulseShape, Spectrum};

/// A down-conversion source driven by one pump laser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonSource {
    pub pump: PulseShape,
    pub pump_spectrum: Spectrum,
    /// Passband applied to the signal photons.
    pub signal_filter: Spectrum,
    /// Probability of at least one pair per pump pulse.
    pub pair_probability: f64,
    pub statistics: PairStatistics,
}

/// A detected-side photon: emission instant and wavepacket.
///
/// Idler photons are produced alongside but not modelled further.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmittedPhoton {
    pub emission_time_ps: f64,
    pub coherence_fwhm_ps: f64,
    pub spectral_center_nm: f64,
}

impl PhotonSource {
    pub fn new(
        pump: PulseShape,
        pump_spectrum: Spectrum,
        signal_filter: Spectrum,
        pair_probability: f64,
        statistics: PairStatistics,
    ) -> Result<Self> {
        let source = Self {
            pump,
            pump_spectrum,
            signal_filter,
            pair_probability,
            statistics,
        };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.pair_probability) {
            return Err(Error::invalid(
                "pair_probability",
                format!("must be in [0, 1), got {}", self.pair_probability),
            ));
        }
        Ok(())
    }

    /// Mean number of pairs per pulse.
    pub fn mean_pairs(&self) -> f64 {
        self.statistics.mean_for_probability(self.pair_probability)
    }

    /// Coherence time of the pump light after its own filter.
    pub fn pump_coherence(&self) -> f64 {
        crate::wavepacket::coherence_time(&self.pump_spectrum)
    }

    /// Coherence time of the filtered signal photons.
    ///
    /// The narrower (in optical frequency) of the signal filter and the pump
    /// bandwidth sets the photon bandwidth. The result must exceed the pump
    /// pulse duration.
    pub fn filtered_coherence(&self) -> Result<f64> {
        let narrowest = if self.signal_filter.frequency_bandwidth_thz() <= self.pump_spectrum.frequency_bandwidth_thz() {
            &self.signal_filter
        } else {
            &self.pump_spectrum
        };
        let coherence = crate::wavepacket::coherence_time(narrowest);
        if coherence < self.pump.fwhm_ps() {
            return Err(Error::FilterTooWide {
                coherence_ps: coherence,
                pump_fwhm_ps: self.pump.fwhm_ps(),
            });
        }
        Ok(coherence)
    }

    /// Number of pairs emitted in one pump pulse.
    pub fn sample_pair_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let p = self.pair_probability;
        if p == 0.0 {
            return 0;
        }
        match self.statistics {
            // Failures before the first success with success probability 1 − p:
            // P(n) = (1 − p)·pⁿ.
            PairStatistics::Thermal => Geometric::new(1.0 - p).expect("validated probability").sample(rng),
            PairStatistics::Poisson => {
                Poisson::new(self.mean_pairs()).expect("positive mean").sample(rng) as u64
            }
            PairStatistics::SinglePhoton => u64::from(rng.random::<f64>() < p),
        }
    }

    /// Emission instant relative to the nominal trigger: a Gaussian trigger
    /// offset with FWHM `trigger_jitter_fwhm_ps` plus a draw from the pump
    /// pulse intensity.
    pub fn sample_emission_time<R: Rng + ?Sized>(&self, trigger_jitter_fwhm_ps: f64, rng: &mut R) -> f64 {
        let trigger = if trigger_jitter_fwhm_ps > 0.0 {
            Normal::new(0.0, trigger_jitter_fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA)
                .expect("positive width")
                .sample(rng)
        } else {
            0.0
        };
        trigger + self.pump.sample_time(rng)
    }

    pub fn emit<R: Rng + ?Sized>(&self, trigger_jitter_fwhm_ps: f64, rng: &mut R) -> Result<EmittedPhoton> {
        Ok(EmittedPhoton {
            emission_time_ps: self.sample_emission_time(trigger_jitter_fwhm_ps, rng),
            coherence_fwhm_ps: self.filtered_coherence()?,
            spectral_center_nm: self.signal_filter.center_wavelength_nm(),
        })
    }
}

/// Largest dip visibility reachable with two identical sources of the given
/// statistics in the low-gain limit.
pub fn multipair_visibility_cap(statistics: PairStatistics) -> Result<f64> {
    match statistics {
        PairStatistics::Thermal | PairStatistics::SinglePhoton => low_gain_visibility(statistics, 1.0),
        PairStatistics::Poisson => Err(Error::UnsupportedStatistics {
            operation: "multipair_visibility_cap",
            statistics: statistics.name(),
        }),
    }
}

/// Visibility reachable at a finite pair probability, and its signed change
/// relative to the low-gain cap.
pub fn multipair_visibility_at(pair_probability: f64, statistics: PairStatistics) -> Result<(f64, f64)> {
    let cap = multipair_visibility_cap(statistics)?;
    let v = enumerate_multipair_visibility(pair_probability, pair_probability, statistics, 1.0)?.visibility;
    Ok((v, v - cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn source(p: f64, statistics: PairStatistics) -> PhotonSource {
        PhotonSource::new(
            PulseShape::gaussian(29.0).unwrap(),
            Spectrum::new(775.0, 30.0).unwrap(),
            Spectrum::new(1548.0, 30.0).unwrap(),
            p,
            statistics,
        )
        .unwrap()
    }

    #[test]
    fn filtered_coherence_examples() {
        let s = source(0.1, PairStatistics::Thermal);
        assert!((s.filtered_coherence().unwrap() - 117.2).abs() < 0.1);
        assert!((s.pump_coherence() - 29.4).abs() < 0.05);
        let mut wide = s.clone();
        wide.signal_filter = Spectrum::new(1548.0, 60.0).unwrap();
        assert_relative_eq!(
            wide.filtered_coherence().unwrap(),
            0.5 * s.filtered_coherence().unwrap(),
            max_relative = 1e-12
        );
        let mut too_wide = s.clone();
        too_wide.signal_filter = Spectrum::new(1548.0, 200.0).unwrap();
        too_wide.pump_spectrum = Spectrum::new(775.0, 200.0).unwrap();
        assert!(matches!(too_wide.filtered_coherence(), Err(Error::FilterTooWide { .. })));
    }

    #[test]
    fn pair_counts() {
        let mut rng = substream(1, 0);
        let none = source(0.0, PairStatistics::Thermal);
        assert!((0..1000).all(|_| none.sample_pair_count(&mut rng) == 0));

        let s = source(0.1, PairStatistics::Thermal);
        let n = 100_000;
        let counts: Vec<u64> = (0..n).map(|_| s.sample_pair_count(&mut rng)).collect();
        let nonzero = counts.iter().filter(|&&c| c >= 1).count() as f64 / n as f64;
        assert!((nonzero - 0.1).abs() < 0.003, "{nonzero}");
        let ones = counts.iter().filter(|&&c| c == 1).count() as f64;
        let twos = counts.iter().filter(|&&c| c == 2).count() as f64;
        let mu = s.mean_pairs();
        assert!((mu / (1.0 + mu) - 0.1).abs() < 1e-12);
        // Geometric identity P(2)/P(1) = μ/(1 + μ); Poisson error on the ratio.
        let ratio = twos / ones;
        assert!((ratio - 0.1).abs() < 4.0 * ratio * (1.0 / twos + 1.0 / ones).sqrt(), "{ratio}");
    }

    #[test]
    fn emission_times() {
        let mut rng = substream(2, 0);
        let mut delta = source(0.1, PairStatistics::Thermal);
        delta.pump = PulseShape::delta();
        assert!((0..100).all(|_| delta.sample_emission_time(0.0, &mut rng) == 0.0));

        let s = source(0.1, PairStatistics::Thermal);
        let std_fwhm = |jitter: f64, rng: &mut crate::rng::SimRng| {
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| s.sample_emission_time(jitter, rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            (mean, var.sqrt() * GAUSSIAN_FWHM_PER_SIGMA)
        };
        let (mean, fwhm) = std_fwhm(0.0, &mut rng);
        assert!((fwhm - 29.0).abs() < 1.0);
        assert!(mean.abs() < 4.0 * 29.0 / GAUSSIAN_FWHM_PER_SIGMA / (1e5f64).sqrt());
        let (_, fwhm) = std_fwhm(27.0, &mut rng);
        assert!((fwhm - 39.6).abs() < 1.0, "{fwhm}");
    }

    #[test]
    fn visibility_caps() {
        assert!((multipair_visibility_cap(PairStatistics::Thermal).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_relative_eq!(multipair_visibility_cap(PairStatistics::SinglePhoton).unwrap(), 1.0);
        assert!(matches!(
            multipair_visibility_cap(PairStatistics::Poisson),
            Err(Error::UnsupportedStatistics { .. })
        ));
        let (v, shift) = multipair_visibility_at(0.1, PairStatistics::Thermal).unwrap();
        assert!((0.32..=1.0 / 3.0).contains(&v));
        assert!(shift <= 0.0 && shift.abs() < 0.009);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn empirical_pair_probability_matches(p in 0.001f64..0.5, seed in 0u64..1000) {
            let s = source(p, PairStatistics::Thermal);
            let mut rng = substream(seed, 7);
            let n = 100_000;
            let hits = (0..n).filter(|_| s.sample_pair_count(&mut rng) >= 1).count() as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            prop_assert!((hits / n as f64 - p).abs() < 4.0 * sigma);
        }
    }
}
