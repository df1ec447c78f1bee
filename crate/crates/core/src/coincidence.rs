//! End-to-end Monte Carlo of a two-source HOM measurement.
//!
//! Each pump period the two sources emit a random number of pairs. The
//! signal photons meet at a 50/50 beamsplitter, where the photon-number
//! split between the outputs is drawn from the enumeration outcome table at
//! the squared mode overlap of that pulse (set by the sampled relative
//! emission time plus the scanned delay). Threshold detectors with finite
//! efficiency and dark counts timestamp their clicks into TDC bins.
//!
//! Coincidences are counted in a window centred on zero lag and, as the
//! accidental estimate, in an equal window centred half a period away.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlator::{edges_from_centers, CorrelationHistogram};
use crate::error::{Error, Result};
use crate::fit::levenberg_marquardt;
use crate::hom_engine::{
    average_visibility, dip_fwhm, enumerate_source_pair, mode_overlap, DipPrediction, EnumerationConfig,
    JitterRatio, OutcomeTable,
};
use crate::jitterchain::{chain_total_jitter, compose_quadrature, ExponentialLossJitter, SyncChain};
use crate::pairsource::PhotonSource;
use crate::rng::substream;
use crate::units::GAUSSIAN_FWHM_PER_SIGMA;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Probability of a dark click somewhere in one pump period.
    pub dark_count_prob_per_gate: f64,
    pub tdc_bin_ps: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_count_prob_per_gate: 0.0,
            tdc_bin_ps: 1.0,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", format!("must be in (0, 1], got {}", self.efficiency)));
        }
        if !(0.0..=1.0).contains(&self.dark_count_prob_per_gate) {
            return Err(Error::invalid(
                "dark_count_prob_per_gate",
                format!("must be in [0, 1], got {}", self.dark_count_prob_per_gate),
            ));
        }
        if !(self.tdc_bin_ps > 0.0 && self.tdc_bin_ps.is_finite()) {
            return Err(Error::invalid("tdc_bin_ps", format!("must be > 0, got {}", self.tdc_bin_ps)));
        }
        Ok(())
    }

    fn quantize(&self, t_ps: f64) -> f64 {
        (t_ps / self.tdc_bin_ps).floor() * self.tdc_bin_ps
    }
}

/// 80 MHz repetition rate.
pub const DEFAULT_PULSE_PERIOD_PS: f64 = 12_500.0;
pub const DEFAULT_COINCIDENCE_WINDOW_PS: f64 = 2_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomScenario {
    pub source_a: PhotonSource,
    pub source_b: PhotonSource,
    /// Trigger path of source B relative to source A.
    pub chain: SyncChain,
    pub loss_jitter: ExponentialLossJitter,
    /// Squared overlap of the photons in all degrees of freedom other than time.
    pub overlap: f64,
    /// Detectors behind outputs c and d.
    pub detectors: [DetectorModel; 2],
    /// Extra path delay of photon B, one histogram bin per entry.
    pub delay_sweep_ps: Vec<f64>,
    pub pulses_per_point: u64,
    pub seed: u64,
    pub pulse_period_ps: f64,
    pub coincidence_window_ps: f64,
}

impl HomScenario {
    pub fn validate(&self) -> Result<()> {
        self.source_a.validate()?;
        self.source_b.validate()?;
        for d in &self.detectors {
            d.validate()?;
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::invalid("overlap", format!("must be in [0, 1], got {}", self.overlap)));
        }
        if self.delay_sweep_ps.is_empty() {
            return Err(Error::invalid("delay_sweep_ps", "must not be empty"));
        }
        if self.pulses_per_point == 0 {
            return Err(Error::invalid("pulses_per_point", "must be >= 1"));
        }
        if !(self.pulse_period_ps > 0.0 && self.pulse_period_ps.is_finite()) {
            return Err(Error::invalid("pulse_period_ps", "must be > 0"));
        }
        if !(self.coincidence_window_ps > 0.0 && self.coincidence_window_ps <= 0.5 * self.pulse_period_ps) {
            return Err(Error::invalid(
                "coincidence_window_ps",
                "must be > 0 and at most half the pulse period",
            ));
        }
        let reach = self.delay_sweep_ps.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if reach + 0.5 * self.coincidence_window_ps >= 0.5 * self.pulse_period_ps {
            return Err(Error::invalid(
                "delay_sweep_ps",
                "delays plus half the coincidence window must stay within half a pulse period",
            ));
        }
        edges_from_centers(&self.delay_sweep_ps)?;
        Ok(())
    }

    /// FWHM of the trigger jitter between the two pumps.
    pub fn sync_jitter_ps(&self) -> Result<f64> {
        chain_total_jitter(&self.chain, &self.loss_jitter)
    }

    /// FWHM of the relative emission-time jitter of the two photons.
    pub fn relative_jitter_ps(&self) -> Result<f64> {
        Ok(compose_quadrature([
            self.source_a.pump.intensity_std_ps() * GAUSSIAN_FWHM_PER_SIGMA,
            self.source_b.pump.intensity_std_ps() * GAUSSIAN_FWHM_PER_SIGMA,
            self.sync_jitter_ps()?,
        ]))
    }

    /// Photon coherence FWHM used for the dip, the mean of the two sources.
    pub fn coherence_ps(&self) -> Result<f64> {
        Ok(0.5 * (self.source_a.filtered_coherence()? + self.source_b.filtered_coherence()?))
    }

    /// Closed-form expectation for the measured dip.
    pub fn predict(&self) -> Result<DipPrediction> {
        self.validate()?;
        let coherence = self.coherence_ps()?;
        let jitter = self.relative_jitter_ps()?;
        let multipair = self.multipair_visibility()?;
        Ok(DipPrediction {
            expected_visibility: multipair * average_visibility(JitterRatio::new(jitter, coherence)?),
            dip_fwhm_ps: dip_fwhm(coherence, jitter)?,
            visibility_cap: multipair,
        })
    }

    fn multipair_visibility(&self) -> Result<f64> {
        // Deepen the enumeration until the dropped configurations cannot matter.
        let mut config = EnumerationConfig {
            max_total_pairs: 4,
            efficiencies: [self.detectors[0].efficiency, self.detectors[1].efficiency],
        };
        loop {
            let v = enumerate_source_pair(
                self.source_a.pair_probability,
                self.source_a.statistics,
                self.source_b.pair_probability,
                self.source_b.statistics,
                self.overlap,
                &config,
            )?;
            if v.truncation_bound < 1e-5 || config.max_total_pairs >= 12 {
                return Ok(v.visibility);
            }
            config.max_total_pairs += 2;
        }
    }
}

/// A value with its one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub value: f64,
    pub error: f64,
}

impl Measurement {
    /// |self − expected| in units of the uncertainty.
    pub fn deviation(&self, expected: f64) -> f64 {
        (self.value - expected).abs() / self.error
    }
}

/// Histogram with signed real contents and per-bin uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetHistogram {
    pub bin_edges: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl NetHistogram {
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Bin-wise raw − accidentals with Poisson errors √(raw + accidentals).
pub fn subtract_accidentals(raw: &CorrelationHistogram, accidentals: &CorrelationHistogram) -> Result<NetHistogram> {
    if raw.bin_edges() != accidentals.bin_edges() {
        return Err(Error::BinningMismatch);
    }
    let (values, errors) = raw
        .counts()
        .iter()
        .zip(accidentals.counts())
        .map(|(&r, &a)| (r as f64 - a as f64, ((r + a) as f64).sqrt()))
        .unzip();
    Ok(NetHistogram {
        bin_edges: raw.bin_edges().to_vec(),
        values,
        errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipFit {
    pub visibility: Measurement,
    /// Error is infinite when the data do not constrain the width.
    pub fwhm_ps: Measurement,
    pub center_ps: f64,
    pub baseline: f64,
    /// False when the dip shape was held fixed because the free fit could not
    /// resolve it (shallow or absent dips).
    pub width_constrained: bool,
}

fn inverted_gaussian(x: f64, p: &[f64]) -> f64 {
    let dx = x - p[2];
    p[0] * (1.0 - p[1] * (-4.0 * LN_2 * dx * dx / (p[3] * p[3])).exp())
}

/// Fits B·(1 − V·exp(−4 ln2 (x − x₀)²/w²)) to the net histogram.
///
/// Zero-count bins are weighted as if they held one count. If the free fit
/// fails or lands outside the scanned range, the centre and width are fixed
/// at the middle of the scan and a quarter of its span and only B and V are
/// fitted.
pub fn visibility_from_dip(net: &NetHistogram) -> Result<DipFit> {
    let x = net.centers();
    if x.len() < 5 {
        return Err(Error::InsufficientCounts(format!("{} delay points, need 5", x.len())));
    }
    let y = &net.values;
    let sigma: Vec<f64> = net.errors.iter().map(|e| e.max(1.0)).collect();
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::InsufficientCounts("no net coincidences".into()));
    }

    let lo = net.bin_edges[0];
    let hi = *net.bin_edges.last().expect("non-empty");
    let span = hi - lo;
    let mid = 0.5 * (lo + hi);
    let min_step = net.bin_edges.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);

    // Baseline from the outer quarter of the scan on each side.
    let wings: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(xi, _)| (**xi - mid).abs() >= 0.25 * span)
        .map(|(_, v)| *v)
        .collect();
    let b0 = if wings.is_empty() {
        y.iter().sum::<f64>() / y.len() as f64
    } else {
        wings.iter().sum::<f64>() / wings.len() as f64
    };
    if !(b0 > 0.0) {
        return Err(Error::NonpositiveBaseline(b0));
    }
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let v0 = (1.0 - ymin / b0).clamp(0.05, 0.95);
    let w0 = 0.25 * span;

    let free = levenberg_marquardt(inverted_gaussian, &x, y, &sigma, &[b0, v0, mid, w0]);
    if let Ok(fit) = free {
        let [b, v, x0, w] = [fit.params[0], fit.params[1], fit.params[2], fit.params[3].abs()];
        let sane = w >= min_step && w <= 2.0 * span && (lo..=hi).contains(&x0);
        let errors_ok = (0..4).all(|i| fit.std_error(i).is_finite());
        if sane && errors_ok {
            if !(b > 0.0) {
                return Err(Error::NonpositiveBaseline(b));
            }
            return Ok(DipFit {
                visibility: Measurement {
                    value: v,
                    error: fit.std_error(1),
                },
                fwhm_ps: Measurement {
                    value: w,
                    error: fit.std_error(3),
                },
                center_ps: x0,
                baseline: b,
                width_constrained: true,
            });
        }
    }

    let fixed = levenberg_marquardt(
        |xi, p| inverted_gaussian(xi, &[p[0], p[1], mid, w0]),
        &x,
        y,
        &sigma,
        &[b0, 0.0],
    )?;
    let b = fixed.params[0];
    if !(b > 0.0) {
        return Err(Error::NonpositiveBaseline(b));
    }
    Ok(DipFit {
        visibility: Measurement {
            value: fixed.params[1],
            error: fixed.std_error(1),
        },
        fwhm_ps: Measurement {
            value: w0,
            error: f64::INFINITY,
        },
        center_ps: mid,
        baseline: b,
        width_constrained: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipResult {
    pub raw: CorrelationHistogram,
    pub accidentals: CorrelationHistogram,
    pub net: NetHistogram,
    pub fit: DipFit,
}

impl DipResult {
    pub fn net_visibility(&self) -> Measurement {
        self.fit.visibility
    }

    pub fn dip_fwhm(&self) -> Measurement {
        self.fit.fwhm_ps
    }

    /// CSV with columns `delay_ps,raw,accidental,net,net_error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["delay_ps", "raw", "accidental", "net", "net_error"])?;
        for (i, delay) in self.raw.centers().iter().enumerate() {
            out.write_record([
                delay.to_string(),
                self.raw.counts()[i].to_string(),
                self.accidentals.counts()[i].to_string(),
                self.net.values[i].to_string(),
                self.net.errors[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Fit summary as ordered key/value pairs.
    pub fn summary(&self) -> Vec<(&'static str, String)> {
        let f = &self.fit;
        vec![
            ("visibility", f.visibility.value.to_string()),
            ("visibility_error", f.visibility.error.to_string()),
            ("dip_fwhm_ps", f.fwhm_ps.value.to_string()),
            ("dip_fwhm_error_ps", f.fwhm_ps.error.to_string()),
            ("center_ps", f.center_ps.to_string()),
            ("baseline", f.baseline.to_string()),
            ("width_constrained", f.width_constrained.to_string()),
        ]
    }
}

/// Up to one photon click and one dark click per detector per period.
#[derive(Debug, Clone, Copy, Default)]
struct Clicks {
    times: [f64; 2],
    len: usize,
}

impl Clicks {
    fn push(&mut self, t: f64) {
        self.times[self.len] = t;
        self.len += 1;
    }

    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.times[..self.len].iter().copied()
    }
}

struct PointSimulator<'a> {
    scenario: &'a HomScenario,
    sync_jitter_ps: f64,
    sigma_a: f64,
    sigma_b: f64,
    tables: HashMap<(usize, usize), OutcomeTable>,
}

impl PointSimulator<'_> {
    /// (central, off-peak) coincidence counts at one delay.
    fn run(&mut self, delay_ps: f64, stream: u64) -> (u64, u64) {
        let s = self.scenario;
        let period = s.pulse_period_ps;
        let half_window = 0.5 * s.coincidence_window_ps;
        let mut rng = substream(s.seed, stream);
        let mut prev = [Clicks::default(); 2];
        let (mut central, mut off_peak) = (0u64, 0u64);
        let mut tally = |diff: f64| {
            if diff.abs() < half_window {
                central += 1;
            } else if (diff - 0.5 * period).abs() < half_window {
                off_peak += 1;
            }
        };

        for _ in 0..s.pulses_per_point {
            let clicks = self.pulse(delay_ps, &mut rng);
            // Pairs within this period and across the boundary with the previous one.
            for tc in clicks[0].iter() {
                for td in clicks[1].iter() {
                    tally(td - tc);
                }
                for td in prev[1].iter() {
                    tally(td - period - tc);
                }
            }
            for tc in prev[0].iter() {
                for td in clicks[1].iter() {
                    tally(td + period - tc);
                }
            }
            prev = clicks;
        }
        (central, off_peak)
    }

    fn pulse<R: Rng + ?Sized>(&mut self, delay_ps: f64, rng: &mut R) -> [Clicks; 2] {
        let s = self.scenario;
        let n_a = s.source_a.sample_pair_count(rng) as usize;
        let n_b = s.source_b.sample_pair_count(rng) as usize;
        let mut clicks = [Clicks::default(); 2];

        if n_a + n_b > 0 {
            let t_a = s.source_a.sample_emission_time(0.0, rng);
            let t_b = s.source_b.sample_emission_time(self.sync_jitter_ps, rng) + delay_ps;
            let overlap = if n_a > 0 && n_b > 0 {
                s.overlap * mode_overlap(t_b - t_a, self.sigma_a, self.sigma_b)
            } else {
                0.0
            };
            let table = self
                .tables
                .entry((n_a, n_b))
                .or_insert_with(|| OutcomeTable::new(n_a, n_b));
            let probs = table.distribution(overlap);
            let mut u = rng.random::<f64>();
            let mut n_c = probs.len() - 1;
            for (k, p) in probs.iter().enumerate() {
                if u < *p {
                    n_c = k;
                    break;
                }
                u -= p;
            }
            let n_d = n_a + n_b - n_c;
            let arrival = match (n_a, n_b) {
                (0, _) => t_b,
                (_, 0) => t_a,
                _ => t_a.min(t_b),
            };
            for (det, n) in [(0, n_c), (1, n_d)] {
                let model = &s.detectors[det];
                if n > 0 && rng.random::<f64>() < 1.0 - (1.0 - model.efficiency).powi(n as i32) {
                    clicks[det].push(model.quantize(arrival));
                }
            }
        }
        for (det, model) in s.detectors.iter().enumerate() {
            let p = model.dark_count_prob_per_gate;
            if p > 0.0 && rng.random::<f64>() < p {
                let t = (rng.random::<f64>() - 0.5) * s.pulse_period_ps;
                clicks[det].push(model.quantize(t));
            }
        }
        clicks
    }
}

/// Simulates the delay scan and fits the accidental-subtracted dip.
///
/// Delay points run in parallel on independent random streams of the
/// scenario seed and are merged in scan order, so the result depends only on
/// the scenario.
pub fn run_hom(scenario: &HomScenario) -> Result<DipResult> {
    scenario.validate()?;
    let sync_jitter_ps = scenario.sync_jitter_ps()?;
    let sigma_a = scenario.source_a.filtered_coherence()? / GAUSSIAN_FWHM_PER_SIGMA;
    let sigma_b = scenario.source_b.filtered_coherence()? / GAUSSIAN_FWHM_PER_SIGMA;

    let counts: Vec<(u64, u64)> = scenario
        .delay_sweep_ps
        .par_iter()
        .enumerate()
        .map(|(i, &delay)| {
            PointSimulator {
                scenario,
                sync_jitter_ps,
                sigma_a,
                sigma_b,
                tables: HashMap::new(),
            }
            .run(delay, i as u64)
        })
        .collect();

    let (raw, acc): (Vec<u64>, Vec<u64>) = counts.into_iter().unzip();
    let raw = CorrelationHistogram::from_centers(&scenario.delay_sweep_ps, raw, scenario.pulses_per_point)?;
    let accidentals = CorrelationHistogram::from_centers(&scenario.delay_sweep_ps, acc, scenario.pulses_per_point)?;
    let net = subtract_accidentals(&raw, &accidentals)?;
    let fit = visibility_from_dip(&net)?;
    Ok(DipResult {
        raw,
        accidentals,
        net,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::delay_grid;
    use crate::jitterchain::JitterStage;
    use crate::pairsource::PairStatistics;
    use crate::wavepacket::{PulseShape, Spectrum};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Poisson};

    fn source(p: f64, statistics: PairStatistics) -> PhotonSource {
        PhotonSource::new(
            PulseShape::delta(),
            Spectrum::new(775.0, 30.0).unwrap(),
            Spectrum::new(1548.0, 30.0).unwrap(),
            p,
            statistics,
        )
        .unwrap()
    }

    fn scenario(p: f64, statistics: PairStatistics, jitter_ps: f64, overlap: f64, pulses: u64) -> HomScenario {
        HomScenario {
            source_a: source(p, statistics),
            source_b: source(p, statistics),
            chain: SyncChain::new(vec![JitterStage::new("sync", jitter_ps).unwrap()], None),
            loss_jitter: ExponentialLossJitter::new(0.0).unwrap(),
            overlap,
            detectors: [DetectorModel::default(); 2],
            delay_sweep_ps: delay_grid(-600.0, 600.0, 40.0).unwrap(),
            pulses_per_point: pulses,
            seed: 11,
            pulse_period_ps: DEFAULT_PULSE_PERIOD_PS,
            coincidence_window_ps: DEFAULT_COINCIDENCE_WINDOW_PS,
        }
    }

    fn hist(counts: &[u64]) -> CorrelationHistogram {
        let centers: Vec<f64> = (0..counts.len()).map(|i| i as f64 * 10.0).collect();
        CorrelationHistogram::from_centers(&centers, counts.to_vec(), 1).unwrap()
    }

    fn synthetic(v: f64, fwhm: f64, baseline: f64, delays: &[f64]) -> Vec<f64> {
        delays
            .iter()
            .map(|&x| inverted_gaussian(x, &[baseline, v, 0.0, fwhm]))
            .collect()
    }

    fn net_from(delays: &[f64], values: Vec<f64>) -> NetHistogram {
        NetHistogram {
            bin_edges: edges_from_centers(delays).unwrap(),
            errors: values.iter().map(|v| v.abs().max(1.0).sqrt()).collect(),
            values,
        }
    }

    #[test]
    fn subtraction_examples() {
        let raw = hist(&[100; 6]);
        let identity = subtract_accidentals(&raw, &hist(&[0; 6])).unwrap();
        assert!(identity.values.iter().all(|v| *v == 100.0));
        let zero = subtract_accidentals(&raw, &raw).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
        assert!(zero.errors.iter().all(|e| (*e - 200f64.sqrt()).abs() < 1e-12));
        let net = subtract_accidentals(&raw, &hist(&[20; 6])).unwrap();
        assert!(net.values.iter().all(|v| *v == 80.0));
        assert!(net.errors.iter().all(|e| (*e - 120f64.sqrt()).abs() < 1e-12));
        assert!(matches!(subtract_accidentals(&raw, &hist(&[0; 5])), Err(Error::BinningMismatch)));
    }

    #[test]
    fn noiseless_dip_round_trip() {
        let delays = delay_grid(-500.0, 500.0, 10.0).unwrap();
        let fit = visibility_from_dip(&net_from(&delays, synthetic(0.3, 170.0, 1000.0, &delays))).unwrap();
        assert!(fit.width_constrained);
        assert!((fit.visibility.value - 0.3).abs() < 1e-3);
        assert!((fit.fwhm_ps.value - 170.0).abs() < 1e-3 * 170.0);
        assert!(fit.center_ps.abs() < 1e-3);
    }

    #[test]
    fn flat_histogram_has_no_dip() {
        let delays = delay_grid(-500.0, 500.0, 20.0).unwrap();
        let fit = visibility_from_dip(&net_from(&delays, vec![400.0; delays.len()])).unwrap();
        assert!(fit.visibility.value.abs() <= fit.visibility.error.max(1e-9));
        assert!(fit.visibility.error >= 0.0);
    }

    #[test]
    fn nonpositive_baseline_is_rejected() {
        let delays = delay_grid(-500.0, 500.0, 20.0).unwrap();
        let r = visibility_from_dip(&net_from(&delays, vec![-5.0; delays.len()]));
        assert!(matches!(r, Err(Error::NonpositiveBaseline(_))));
    }

    #[test]
    fn quoted_error_covers_the_truth() {
        // Realistic dip: a few hundred counts per bin, V = 0.3, FWHM 170 ps.
        let delays = delay_grid(-500.0, 500.0, 20.0).unwrap();
        let expected = synthetic(0.3, 170.0, 400.0, &delays);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let replicas = 100;
        let mut covered = 0;
        for _ in 0..replicas {
            let values: Vec<f64> = expected.iter().map(|&m| Poisson::new(m).unwrap().sample(&mut rng)).collect();
            let fit = visibility_from_dip(&net_from(&delays, values)).unwrap();
            if fit.visibility.deviation(0.3) <= 1.0 {
                covered += 1;
            }
        }
        // 68% coverage; ±3σ of a binomial(100, 0.68) count.
        assert!((54..=82).contains(&covered), "{covered}/100");
    }

    #[test]
    fn ideal_single_photons_give_full_visibility() {
        let mut s = scenario(0.5, PairStatistics::SinglePhoton, 0.0, 1.0, 20_000);
        s.delay_sweep_ps = delay_grid(-400.0, 400.0, 25.0).unwrap();
        let r = run_hom(&s).unwrap();
        let v = r.net_visibility();
        assert!(v.deviation(1.0) < 3.0, "{v:?}");
    }

    #[test]
    fn distinguishable_photons_give_no_dip() {
        let r = run_hom(&scenario(0.1, PairStatistics::Thermal, 27.0, 0.0, 20_000)).unwrap();
        assert!(r.net_visibility().deviation(0.0) < 3.0, "{:?}", r.fit);
    }

    #[test]
    fn reference_scenario_matches_prediction() {
        let mut s = scenario(0.1, PairStatistics::Thermal, 50.0, 1.0, 40_000);
        s.delay_sweep_ps = delay_grid(-500.0, 500.0, 25.0).unwrap();
        let prediction = s.predict().unwrap();
        assert!((prediction.expected_visibility - 0.319).abs() < 2e-3);
        assert!((prediction.dip_fwhm_ps - 173.0).abs() < 1.0);
        let r = run_hom(&s).unwrap();
        assert!(r.net_visibility().deviation(prediction.expected_visibility) < 3.0, "{:?}", r.fit);
        assert!(r.dip_fwhm().deviation(prediction.dip_fwhm_ps) < 3.0, "{:?}", r.fit);
    }

    #[test]
    fn dark_counts_are_removed_by_subtraction() {
        let clean = scenario(0.1, PairStatistics::Thermal, 27.0, 1.0, 30_000);
        let mut noisy = clean.clone();
        for d in &mut noisy.detectors {
            d.dark_count_prob_per_gate = 0.05;
        }
        let (a, b) = (run_hom(&clean).unwrap(), run_hom(&noisy).unwrap());
        assert!(b.raw.total() > a.raw.total());
        assert!(b.accidentals.total() > 0);
        let expected = noisy.predict().unwrap().expected_visibility;
        assert!(b.net_visibility().deviation(expected) < 3.0, "{:?}", b.fit);
    }

    #[test]
    fn identical_seeds_reproduce() {
        let s = scenario(0.1, PairStatistics::Thermal, 50.0, 1.0, 5_000);
        let (a, b) = (run_hom(&s).unwrap(), run_hom(&s).unwrap());
        assert_eq!(a, b);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
        assert!(String::from_utf8(x).unwrap().starts_with("delay_ps,raw,accidental,net,net_error\n"));
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let mut s = scenario(0.1, PairStatistics::Thermal, 0.0, 1.0, 10);
        s.delay_sweep_ps.clear();
        assert!(s.validate().is_err());
        let mut s = scenario(0.1, PairStatistics::Thermal, 0.0, 1.0, 0);
        assert!(s.validate().is_err());
        s.pulses_per_point = 1;
        s.coincidence_window_ps = s.pulse_period_ps;
        assert!(s.validate().is_err());
    }

    #[test]
    fn quantization_floors_to_bins() {
        let d = DetectorModel {
            tdc_bin_ps: 4.0,
            ..DetectorModel::default()
        };
        assert_relative_eq!(d.quantize(9.9), 8.0);
        assert_relative_eq!(d.quantize(-0.1), -4.0);
    }
}
