//! Photon-number enumeration of multi-pair events at the beamsplitter.
//!
//! Input: `n_a` photons in one temporal mode of port a, `n_b` photons in one
//! temporal mode of port b. The b mode is decomposed as √M·(a mode) + √(1−M)·(orthogonal
//! mode), where M is the squared mode overlap. The creation-operator
//! polynomial is pushed through the beamsplitter and expanded over the four
//! output modes (c∥, c⊥, d∥, d⊥). Threshold detectors see c∥+c⊥ and d∥+d⊥.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    /// Single-mode down-conversion: geometric photon-number distribution.
    #[default]
    Thermal,
    /// Many-mode limit.
    Poisson,
    /// Ideal source: at most one photon per pulse.
    SinglePhoton,
}

impl PairStatistics {
    pub fn name(self) -> &'static str {
        match self {
            PairStatistics::Thermal => "thermal",
            PairStatistics::Poisson => "poisson",
            PairStatistics::SinglePhoton => "single_photon",
        }
    }

    /// Mean pair number μ that gives P(n ≥ 1) = `p`.
    pub fn mean_for_probability(self, p: f64) -> f64 {
        match self {
            PairStatistics::Thermal => p / (1.0 - p),
            PairStatistics::Poisson => -(1.0 - p).ln(),
            PairStatistics::SinglePhoton => p,
        }
    }

    /// P(n) for a source with P(n ≥ 1) = `p`.
    pub fn pmf(self, p: f64, n: usize) -> f64 {
        match self {
            // (1 − p)·pⁿ with p = μ/(1 + μ)
            PairStatistics::Thermal => (1.0 - p) * p.powi(n as i32),
            PairStatistics::Poisson => {
                let mu = self.mean_for_probability(p);
                let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                (n as f64 * mu.ln() - mu - log_fact).exp()
            }
            PairStatistics::SinglePhoton => match n {
                0 => 1.0 - p,
                1 => p,
                _ => 0.0,
            },
        }
    }

    /// lim_{p→0} P(n)/pⁿ.
    fn leading_weight(self, n: usize) -> f64 {
        match self {
            PairStatistics::Thermal => 1.0,
            PairStatistics::Poisson => (1..=n).map(|k| k as f64).product::<f64>().recip(),
            PairStatistics::SinglePhoton => {
                if n <= 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OutcomeTerm {
    n_c: usize,
    /// Power of M.
    overlap_power: i32,
    /// Power of (1 − M).
    distinct_power: i32,
    weight: f64,
}

/// Output photon-number distribution for a fixed input (n_a, n_b), as a
/// polynomial in the mode overlap M.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    n_a: usize,
    n_b: usize,
    terms: Vec<OutcomeTerm>,
}

// Output mode indices.
const C_PAR: usize = 0;
const C_PERP: usize = 1;
const D_PAR: usize = 2;
const D_PERP: usize = 3;

impl OutcomeTable {
    pub fn new(n_a: usize, n_b: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, s);
        let r = Complex64::new(s, 0.0);
        // a† → (i·c∥ + d∥)/√2; b∥† → (c∥ + i·d∥)/√2; b⊥† → (c⊥ + i·d⊥)/√2.
        // The √M and √(1−M) factors are tracked through the ⊥ photon count.
        let a_image = [(C_PAR, i), (D_PAR, r)];
        let b_image = [(C_PAR, r), (D_PAR, i), (C_PERP, r), (D_PERP, i)];

        let mut poly: HashMap<[u8; 4], Complex64> = HashMap::from([([0; 4], Complex64::new(1.0, 0.0))]);
        let mut apply = |image: &[(usize, Complex64)]| {
            let mut next: HashMap<[u8; 4], Complex64> = HashMap::with_capacity(poly.len() * image.len());
            for (key, coef) in &poly {
                for &(mode, amp) in image {
                    let mut k = *key;
                    k[mode] += 1;
                    *next.entry(k).or_default() += coef * amp;
                }
            }
            poly = next;
        };
        for _ in 0..n_a {
            apply(&a_image);
        }
        for _ in 0..n_b {
            apply(&b_image);
        }

        let factorial = |n: u8| (1..=n as u32).map(f64::from).product::<f64>();
        let input_norm = factorial(n_a as u8) * factorial(n_b as u8);
        let mut keys: Vec<_> = poly.keys().copied().collect();
        keys.sort_unstable();
        let terms = keys
            .into_iter()
            .filter_map(|k| {
                let coef = poly[&k];
                let weight = coef.norm_sqr() * k.iter().map(|&n| factorial(n)).product::<f64>() / input_norm;
                (weight > 0.0).then(|| {
                    let perp = (k[C_PERP] + k[D_PERP]) as i32;
                    OutcomeTerm {
                        n_c: (k[C_PAR] + k[C_PERP]) as usize,
                        overlap_power: n_b as i32 - perp,
                        distinct_power: perp,
                        weight,
                    }
                })
            })
            .collect();
        Self { n_a, n_b, terms }
    }

    pub fn photons(&self) -> usize {
        self.n_a + self.n_b
    }

    /// P(n_c) for n_c = 0..=n_a+n_b (n_d = total − n_c) at squared overlap `overlap`.
    pub fn distribution(&self, overlap: f64) -> Vec<f64> {
        let mut probs = vec![0.0; self.photons() + 1];
        for t in &self.terms {
            probs[t.n_c] += t.weight * overlap.powi(t.overlap_power) * (1.0 - overlap).powi(t.distinct_power);
        }
        probs
    }

    /// Probability that both threshold detectors fire, with per-photon
    /// detection efficiencies `eta_c` and `eta_d`.
    pub fn coincidence_probability(&self, overlap: f64, eta_c: f64, eta_d: f64) -> f64 {
        let total = self.photons();
        self.distribution(overlap)
            .iter()
            .enumerate()
            .map(|(n_c, p)| {
                let n_d = total - n_c;
                p * (1.0 - (1.0 - eta_c).powi(n_c as i32)) * (1.0 - (1.0 - eta_d).powi(n_d as i32))
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationConfig {
    /// Configurations with n_a + n_b above this are dropped.
    pub max_total_pairs: usize,
    /// Per-photon detection efficiencies of the detectors behind outputs c and d.
    pub efficiencies: [f64; 2],
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            max_total_pairs: 4,
            efficiencies: [1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultipairVisibility {
    pub visibility: f64,
    /// Coincidence probability per pulse with fully distinguishable photons.
    pub far_coincidence: f64,
    /// Coincidence probability per pulse at the given overlap.
    pub dip_coincidence: f64,
    /// Upper bound on |visibility error| from the dropped configurations.
    pub truncation_bound: f64,
    pub truncation_warning: bool,
}

const TRUNCATION_WARNING_LEVEL: f64 = 1e-3;

/// Dip visibility of two probabilistic pair sources, enumerated over
/// photon-number configurations, with the default configuration.
pub fn enumerate_multipair_visibility(
    p_a: f64,
    p_b: f64,
    statistics: PairStatistics,
    overlap: f64,
) -> Result<MultipairVisibility> {
    enumerate_multipair_visibility_with(p_a, p_b, statistics, overlap, &EnumerationConfig::default())
}

pub fn enumerate_multipair_visibility_with(
    p_a: f64,
    p_b: f64,
    statistics: PairStatistics,
    overlap: f64,
    config: &EnumerationConfig,
) -> Result<MultipairVisibility> {
    enumerate_source_pair(p_a, statistics, p_b, statistics, overlap, config)
}

/// As [`enumerate_multipair_visibility_with`], for sources with different statistics.
pub fn enumerate_source_pair(
    p_a: f64,
    statistics_a: PairStatistics,
    p_b: f64,
    statistics_b: PairStatistics,
    overlap: f64,
    config: &EnumerationConfig,
) -> Result<MultipairVisibility> {
    for (name, p) in [("p_a", p_a), ("p_b", p_b)] {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::invalid(name, format!("pair probability must be in [0, 0.5), got {p}")));
        }
    }
    validate_overlap(overlap)?;
    if config.efficiencies.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::invalid("efficiency", "must be in (0, 1]"));
    }
    let [eta_c, eta_d] = config.efficiencies;

    let max = config.max_total_pairs;
    let (mut far, mut dip, mut kept) = (0.0, 0.0, 0.0);
    for n_a in 0..=max {
        for n_b in 0..=max - n_a {
            let w = statistics_a.pmf(p_a, n_a) * statistics_b.pmf(p_b, n_b);
            kept += w;
            if w == 0.0 || n_a + n_b < 2 {
                continue;
            }
            let table = OutcomeTable::new(n_a, n_b);
            far += w * table.coincidence_probability(0.0, eta_c, eta_d);
            dip += w * table.coincidence_probability(overlap, eta_c, eta_d);
        }
    }
    if far <= 0.0 {
        return Err(Error::invalid("pair_probability", "no coincidences possible at these pair probabilities"));
    }
    let dropped = (1.0 - kept).max(0.0);
    let truncation_bound = 2.0 * dropped / far;
    Ok(MultipairVisibility {
        visibility: (far - dip) / far,
        far_coincidence: far,
        dip_coincidence: dip,
        truncation_bound,
        truncation_warning: truncation_bound > TRUNCATION_WARNING_LEVEL,
    })
}

/// Visibility in the limit of vanishing pair probability, where only events
/// with exactly two photons in total contribute.
pub fn low_gain_visibility(statistics: PairStatistics, overlap: f64) -> Result<f64> {
    validate_overlap(overlap)?;
    let (mut far, mut dip) = (0.0, 0.0);
    for n_a in 0..=2 {
        let n_b = 2 - n_a;
        let w = statistics.leading_weight(n_a) * statistics.leading_weight(n_b);
        let table = OutcomeTable::new(n_a, n_b);
        far += w * table.coincidence_probability(0.0, 1.0, 1.0);
        dip += w * table.coincidence_probability(overlap, 1.0, 1.0);
    }
    Ok((far - dip) / far)
}

fn validate_overlap(overlap: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::invalid("overlap", format!("must be in [0, 1], got {overlap}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn distributions_are_normalized() {
        for (n_a, n_b) in [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (4, 3)] {
            let table = OutcomeTable::new(n_a, n_b);
            for m in [0.0, 0.3, 1.0] {
                let total: f64 = table.distribution(m).iter().sum();
                assert_relative_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn textbook_two_photon_cases() {
        // Indistinguishable photons in different inputs always bunch.
        let one_one = OutcomeTable::new(1, 1);
        assert!(one_one.coincidence_probability(1.0, 1.0, 1.0) < 1e-15);
        assert_relative_eq!(one_one.coincidence_probability(0.0, 1.0, 1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(one_one.coincidence_probability(0.4, 1.0, 1.0), 0.3, epsilon = 1e-15);
        // Two photons in one input split half of the time: 1/4, 1/2, 1/4.
        let two_zero = OutcomeTable::new(2, 0).distribution(0.7);
        assert_relative_eq!(two_zero[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(two_zero[1], 0.5, epsilon = 1e-15);
        // |1,1⟩ with identical photons gives |2,0⟩ + |0,2⟩ only.
        let bunched = one_one.distribution(1.0);
        assert_relative_eq!(bunched[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(bunched[2], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn thermal_low_gain_cap_is_one_third() {
        let v = enumerate_multipair_visibility(1e-6, 1e-6, PairStatistics::Thermal, 1.0).unwrap();
        assert!((v.visibility - 1.0 / 3.0).abs() < 1e-4);
        assert!(!v.truncation_warning);
        assert_relative_eq!(low_gain_visibility(PairStatistics::Thermal, 1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(low_gain_visibility(PairStatistics::Poisson, 1.0).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn single_photons_and_distinguishable_photons() {
        let v = enumerate_multipair_visibility(0.2, 0.3, PairStatistics::SinglePhoton, 1.0).unwrap();
        assert_relative_eq!(v.visibility, 1.0, epsilon = 1e-14);
        let v = enumerate_multipair_visibility(0.1, 0.1, PairStatistics::Thermal, 0.0).unwrap();
        assert!(v.visibility.abs() < 1e-15);
    }

    #[test]
    fn partial_overlap_scales_the_cap() {
        let v = enumerate_multipair_visibility(1e-6, 1e-6, PairStatistics::Thermal, 0.957).unwrap();
        assert!((v.visibility - 0.957 / 3.0).abs() < 1e-4);
        assert!((v.visibility - 0.319).abs() < 5e-4);
    }

    #[test]
    fn higher_gain_stays_near_the_cap() {
        let v = enumerate_multipair_visibility(0.1, 0.1, PairStatistics::Thermal, 1.0).unwrap();
        assert!((0.32..=1.0 / 3.0).contains(&v.visibility), "{v:?}");
        assert!(v.truncation_warning);
        let deeper = enumerate_multipair_visibility_with(
            0.1,
            0.1,
            PairStatistics::Thermal,
            1.0,
            &EnumerationConfig {
                max_total_pairs: 8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((deeper.visibility - v.visibility).abs() <= v.truncation_bound);
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(enumerate_multipair_visibility(0.6, 0.1, PairStatistics::Thermal, 1.0).is_err());
        assert!(enumerate_multipair_visibility(0.1, 0.1, PairStatistics::Thermal, 1.5).is_err());
        assert!(enumerate_multipair_visibility(0.0, 0.0, PairStatistics::Thermal, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn thermal_pmf_matches_pair_probability(p in 0.0f64..0.5) {
            let tail: f64 = 1.0 - PairStatistics::Thermal.pmf(p, 0);
            prop_assert!((tail - p).abs() < 1e-14);
            let poisson_tail = 1.0 - PairStatistics::Poisson.pmf(p, 0);
            prop_assert!((poisson_tail - p).abs() < 1e-12);
        }

        #[test]
        fn coincidences_fall_with_overlap_for_one_photon_each(m1 in 0.0f64..1.0, m2 in 0.0f64..1.0) {
            let t = OutcomeTable::new(1, 1);
            let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
            prop_assert!(t.coincidence_probability(hi, 1.0, 1.0) <= t.coincidence_probability(lo, 1.0, 1.0) + 1e-15);
        }
    }
}
