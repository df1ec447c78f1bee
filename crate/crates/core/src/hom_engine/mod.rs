//! Two-photon interference at a 50/50 beamsplitter.
//!
//! Closed forms for a pair of Gaussian single-photon wavepackets delayed by τ:
//! the probability of the photons leaving through different ports, the
//! pointwise dip visibility and its average over Gaussian timing jitter.
//! [`enumeration`] extends this to probabilistic sources emitting several
//! pairs per pulse.

pub mod enumeration;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jitterchain::compose_quadrature;
use crate::units::GAUSSIAN_FWHM_PER_SIGMA;

pub use enumeration::{
    enumerate_multipair_visibility, enumerate_multipair_visibility_with, enumerate_source_pair, EnumerationConfig,
    MultipairVisibility, OutcomeTable, PairStatistics,
};

/// Timing jitter expressed in units of the photon coherence time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JitterRatio {
    r_j: f64,
}

impl JitterRatio {
    /// r_j = jitter FWHM / coherence FWHM.
    pub fn new(jitter_fwhm_ps: f64, coherence_fwhm_ps: f64) -> Result<Self> {
        if !(coherence_fwhm_ps > 0.0) {
            return Err(Error::invalid("coherence_fwhm_ps", "must be > 0"));
        }
        Self::from_ratio(jitter_fwhm_ps / coherence_fwhm_ps)
    }

    pub fn from_ratio(r_j: f64) -> Result<Self> {
        if !(r_j.is_finite() && r_j >= 0.0) {
            return Err(Error::invalid("r_j", format!("must be finite and >= 0, got {r_j}")));
        }
        Ok(Self { r_j })
    }

    pub fn r_j(&self) -> f64 {
        self.r_j
    }

    /// Spread of the FWHM-scaled delay Δ' = 2√(2 ln 2)·τ/σ, which is
    /// 2√(2 ln 2)·r_j.
    pub fn sigma_delta(&self) -> f64 {
        GAUSSIAN_FWHM_PER_SIGMA * self.r_j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipPrediction {
    pub expected_visibility: f64,
    pub dip_fwhm_ps: f64,
    pub visibility_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    A,
    B,
}

/// Beamsplitter matrix: row = input (a, b), column = output (c, d).
///
/// a† → (i·c† + d†)/√2, b† → (c† + i·d†)/√2.
pub fn beamsplitter_matrix() -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [Complex64::new(0.0, s), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
    ]
}

/// Output-mode amplitudes (c, d) of a single photon entering `input_mode`.
pub fn beamsplitter_transform(input_mode: InputMode) -> [Complex64; 2] {
    let m = beamsplitter_matrix();
    match input_mode {
        InputMode::A => m[0],
        InputMode::B => m[1],
    }
}

/// Probability (normalized so that P(∞) = 2) that two photons with
/// Gaussian envelopes of intensity width σ, delayed by τ, exit through
/// different ports: 2·(1 − e^(−τ²/4σ²)).
pub fn nonbunching_probability(tau_ps: f64, sigma_ps: f64) -> f64 {
    2.0 * (1.0 - visibility_at(tau_ps, sigma_ps))
}

/// Pointwise dip visibility e^(−τ²/4σ²), equal to the squared overlap of the
/// two delayed wavepackets.
pub fn visibility_at(tau_ps: f64, sigma_ps: f64) -> f64 {
    (-tau_ps * tau_ps / (4.0 * sigma_ps * sigma_ps)).exp()
}

/// Squared overlap |⟨ψ_a|ψ_b(τ)⟩|² of Gaussian wavepackets whose intensities
/// have standard deviations `sigma_a` and `sigma_b`.
pub fn mode_overlap(tau_ps: f64, sigma_a_ps: f64, sigma_b_ps: f64) -> f64 {
    let s2 = sigma_a_ps * sigma_a_ps + sigma_b_ps * sigma_b_ps;
    2.0 * sigma_a_ps * sigma_b_ps / s2 * (-tau_ps * tau_ps / (2.0 * s2)).exp()
}

/// Jitter-averaged visibility 1/√(1 + r_j²/2).
pub fn average_visibility(ratio: JitterRatio) -> f64 {
    (1.0 + 0.5 * ratio.r_j * ratio.r_j).sqrt().recip()
}

/// Relative timing jitter between photons from two pumped sources: each
/// pump pulse contributes its emission-time spread, plus the sync jitter.
pub fn total_timing_jitter(pump_a_ps: f64, pump_b_ps: f64, sync_jitter_ps: f64) -> f64 {
    compose_quadrature([pump_a_ps, pump_b_ps, sync_jitter_ps])
}

/// FWHM (in delay) of the jitter-averaged dip, √(2·c² + j²).
///
/// V(τ) is Gaussian in τ with FWHM √2·c; averaging over Gaussian jitter of
/// FWHM j convolves it to the quadrature sum.
pub fn dip_fwhm(coherence_fwhm_ps: f64, jitter_fwhm_ps: f64) -> Result<f64> {
    if !(coherence_fwhm_ps > 0.0) {
        return Err(Error::invalid("coherence_fwhm_ps", "must be > 0"));
    }
    Ok((2.0 * coherence_fwhm_ps * coherence_fwhm_ps + jitter_fwhm_ps * jitter_fwhm_ps).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gauss_hermite_free_integral(f: impl Fn(f64) -> f64, reach: f64, n: usize) -> f64 {
        // Composite Simpson on [-reach, reach].
        let n = n + n % 2;
        let h = 2.0 * reach / n as f64;
        let mut s = f(-reach) + f(reach);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-reach + i as f64 * h);
        }
        s * h / 3.0
    }

    /// ∫ρ(Δ)V(Δ)dΔ with Δ = τ/σ and ρ Gaussian of standard deviation r_j.
    fn quadrature_average(r_j: f64) -> f64 {
        if r_j == 0.0 {
            return 1.0;
        }
        let rho = |d: f64| (-d * d / (2.0 * r_j * r_j)).exp() / (r_j * (2.0 * std::f64::consts::PI).sqrt());
        gauss_hermite_free_integral(|d| rho(d) * (-d * d / 4.0).exp(), 12.0 * r_j, 4000)
    }

    #[test]
    fn beamsplitter_is_unitary() {
        let m = beamsplitter_matrix();
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[i][k] * m[j][k].conj()).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
        for mode in [InputMode::A, InputMode::B] {
            let out = beamsplitter_transform(mode);
            assert_relative_eq!(out[0].norm_sqr(), 0.5, epsilon = 1e-15);
            assert_relative_eq!(out[1].norm_sqr(), 0.5, epsilon = 1e-15);
        }
        // One photon in each input: amplitude of one photon per output is
        // m[a][c]·m[b][d] + m[a][d]·m[b][c], which cancels.
        let split = m[0][0] * m[1][1] + m[0][1] * m[1][0];
        assert!(split.norm() < 1e-15);
    }

    #[test]
    fn nonbunching_examples() {
        assert_eq!(nonbunching_probability(0.0, 10.0), 0.0);
        assert!((nonbunching_probability(100.0, 10.0) - 2.0).abs() < 1e-10);
        assert!((nonbunching_probability(20.0, 10.0) - 1.2642).abs() < 1e-4);
    }

    #[test]
    fn visibility_examples() {
        assert_eq!(visibility_at(0.0, 5.0), 1.0);
        assert_relative_eq!(visibility_at(10.0, 5.0), (-1.0f64).exp(), max_relative = 1e-15);
        for tau in [0.0, 3.0, 17.0] {
            let p_inf = nonbunching_probability(1e6, 5.0);
            let from_p = (p_inf - nonbunching_probability(tau, 5.0)) / p_inf;
            assert!((visibility_at(tau, 5.0) - from_p).abs() < 1e-12);
        }
    }

    #[test]
    fn average_visibility_examples() {
        assert_eq!(average_visibility(JitterRatio::from_ratio(0.0).unwrap()), 1.0);
        let r = JitterRatio::new(50.0, 117.0).unwrap();
        assert!((r.r_j() - 0.427).abs() < 5e-4);
        assert!((average_visibility(r) - 0.957).abs() < 5e-4);
        for r in [0.1, 0.5, 1.0, 2.0] {
            let closed = average_visibility(JitterRatio::from_ratio(r).unwrap());
            assert!((closed - quadrature_average(r)).abs() < 1e-6, "r_j = {r}");
        }
        let r = JitterRatio::from_ratio(0.5).unwrap();
        assert_relative_eq!(r.sigma_delta(), GAUSSIAN_FWHM_PER_SIGMA * 0.5);
    }

    #[test]
    fn timing_jitter_examples() {
        // √(29² + 29² + 27²) = 49.10, quoted as roughly 50 ps.
        assert!((total_timing_jitter(29.0, 29.0, 27.0) - 49.10).abs() < 0.005);
        assert_eq!(total_timing_jitter(0.0, 0.0, 8.0), 8.0);
        assert_relative_eq!(total_timing_jitter(3.0, 3.0, 0.0), 3.0 * 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn dip_width_examples() {
        assert!((dip_fwhm(117.0, 50.0).unwrap() - 172.9).abs() < 0.05);
        assert!((dip_fwhm(117.0, 128.0).unwrap() - 209.2).abs() < 0.05);
        assert!(dip_fwhm(0.0, 1.0).is_err());
        // Half-maximum solve of e^(−τ²/4σ²).
        let sigma = 117.0 / GAUSSIAN_FWHM_PER_SIGMA;
        let (mut lo, mut hi) = (0.0, 1000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if visibility_at(mid, sigma) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(lo + hi, dip_fwhm(117.0, 0.0).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn mode_overlap_reduces_to_visibility_for_equal_widths() {
        for tau in [0.0, 10.0, 80.0] {
            assert_relative_eq!(mode_overlap(tau, 40.0, 40.0), visibility_at(tau, 40.0), max_relative = 1e-14);
        }
        assert!(mode_overlap(0.0, 40.0, 50.0) < 1.0);
    }

    proptest! {
        #[test]
        fn average_visibility_decreases(r in 0.0f64..20.0, dr in 1e-3f64..5.0) {
            let a = average_visibility(JitterRatio::from_ratio(r).unwrap());
            let b = average_visibility(JitterRatio::from_ratio(r + dr).unwrap());
            prop_assert!(b < a);
        }

        #[test]
        fn average_visibility_matches_quadrature(r in 0.0f64..5.0) {
            let closed = average_visibility(JitterRatio::from_ratio(r).unwrap());
            prop_assert!((closed - quadrature_average(r)).abs() < 1e-6);
        }

        #[test]
        fn dip_width_splits_in_quadrature(c in 1.0f64..500.0, j in 0.0f64..500.0) {
            let lhs = dip_fwhm(c, j).unwrap().powi(2);
            let rhs = dip_fwhm(c, 0.0).unwrap().powi(2) + j * j;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }
    }
}
