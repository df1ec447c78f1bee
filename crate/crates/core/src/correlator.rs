//! Intensity auto- and cross-correlation of pulse trains.
//!
//! Sum-frequency generation is treated as an ideal coincidence gate: the
//! up-converted signal at delay `d` is proportional to ∫ I_A(t)·I_B(t − d) dt.
//! Timing jitter between the two pulse trains enters as a random shift of `d`.

use std::f64::consts::LN_2;
use std::io::Write;
use std::sync::OnceLock;

use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::levenberg_marquardt;
use crate::jitterchain::compose_quadrature;
use crate::rng::substream;
use crate::units::GAUSSIAN_FWHM_PER_SIGMA;
use crate::wavepacket::{sech2_fwhm_per_tau0, PulseShape, ShapeFamily};

/// Counts recorded at a set of delay bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    shots: u64,
}

impl CorrelationHistogram {
    pub fn new(bin_edges: Vec<f64>, counts: Vec<u64>, shots: u64) -> Result<Self> {
        if bin_edges.len() != counts.len() + 1 {
            return Err(Error::invalid("bin_edges", "need exactly one more edge than bins"));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("bin_edges", "edges must be strictly increasing"));
        }
        Ok(Self {
            bin_edges,
            counts,
            shots,
        })
    }

    /// Histogram whose bins are centred on the given (strictly increasing) delays.
    pub fn from_centers(delays_ps: &[f64], counts: Vec<u64>, shots: u64) -> Result<Self> {
        Self::new(edges_from_centers(delays_ps)?, counts, shots)
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of trials behind each bin.
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// CSV with columns `delay_ps,counts`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["delay_ps", "counts"])?;
        for (d, c) in self.centers().iter().zip(&self.counts) {
            out.write_record([d.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn edges_from_centers(centers: &[f64]) -> Result<Vec<f64>> {
    match centers {
        [] => Err(Error::invalid("delays_ps", "at least one delay is required")),
        [c] => Ok(vec![c - 0.5, c + 0.5]),
        _ => {
            if centers.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("delays_ps", "delays must be strictly increasing"));
            }
            let mut edges = Vec::with_capacity(centers.len() + 1);
            edges.push(centers[0] - 0.5 * (centers[1] - centers[0]));
            for w in centers.windows(2) {
                edges.push(0.5 * (w[0] + w[1]));
            }
            let n = centers.len();
            edges.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
            Ok(edges)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    #[default]
    Gaussian,
    SechSquaredAutocorr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub fwhm_ps: f64,
    pub fwhm_error_ps: f64,
    pub center_ps: f64,
    pub amplitude: f64,
    pub baseline: f64,
    pub model: FitModel,
    /// Reduced χ² of the fit.
    pub goodness: f64,
}

/// Normalized intensity autocorrelation of a sech² pulse as a function of
/// x = delay/τ₀: 3(x·cosh x − sinh x)/sinh³ x.
pub fn sech2_autocorrelation(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        1.0 - 0.4 * x * x
    } else if x > 30.0 {
        12.0 * (x - 1.0) * (-2.0 * x).exp()
    } else {
        3.0 * (x * x.cosh() - x.sinh()) / x.sinh().powi(3)
    }
}

/// Ratio of the intensity-autocorrelation FWHM to the pulse FWHM for sech²
/// pulses, found by solving for the half maximum of the autocorrelation.
pub fn sech2_autocorr_factor() -> f64 {
    static FACTOR: OnceLock<f64> = OnceLock::new();
    *FACTOR.get_or_init(|| {
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sech2_autocorrelation(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * 0.5 * (lo + hi) / sech2_fwhm_per_tau0()
    })
}

/// FWHM of the intensity autocorrelation of `pulse`.
pub fn analytic_autocorr_fwhm(pulse: &PulseShape) -> Result<f64> {
    Ok(match pulse.family() {
        ShapeFamily::Gaussian => pulse.fwhm_ps() * std::f64::consts::SQRT_2,
        ShapeFamily::SechSquared => pulse.fwhm_ps() * sech2_autocorr_factor(),
        ShapeFamily::Delta => 0.0,
    })
}

/// Cross-correlation width in the Gaussian (quadrature) approximation.
///
/// Exact for Gaussian pulses; for sech² pulses the shape error is about 2%.
pub fn analytic_crosscorr_fwhm(pulse_a: &PulseShape, pulse_b: &PulseShape, sync_jitter_fwhm_ps: f64) -> f64 {
    compose_quadrature([pulse_a.fwhm_ps(), pulse_b.fwhm_ps(), sync_jitter_fwhm_ps])
}

/// Jitter-free SFG response G(x) = ∫ I_A(t)·I_B(t − x) dt, scaled to a peak of one.
#[derive(Debug, Clone)]
enum OverlapKernel {
    Gaussian { sigma: f64 },
    Single(PulseShape),
    Box { half_width: f64 },
    Table { start: f64, step: f64, values: Vec<f64> },
}

impl OverlapKernel {
    fn new(a: &PulseShape, b: &PulseShape, delta_resolution: f64) -> Self {
        use ShapeFamily::*;
        match (a.family(), b.family()) {
            (Delta, Delta) => OverlapKernel::Box {
                half_width: 0.5 * delta_resolution,
            },
            (Delta, _) => OverlapKernel::Single(*b),
            (_, Delta) => OverlapKernel::Single(*a),
            (Gaussian, Gaussian) => OverlapKernel::Gaussian {
                sigma: a.fwhm_ps().hypot(b.fwhm_ps()) / GAUSSIAN_FWHM_PER_SIGMA,
            },
            _ => Self::tabulate(a, b),
        }
    }

    fn tabulate(a: &PulseShape, b: &PulseShape) -> Self {
        let step = a.fwhm_ps().min(b.fwhm_ps()) / 100.0;
        let reach = 15.0 * (a.intensity_std_ps() + b.intensity_std_ps());
        let n = (reach / step).ceil() as usize;
        let grid = |p: &PulseShape| -> Vec<f64> {
            (0..=2 * n)
                .map(|i| p.intensity((i as f64 - n as f64) * step).unwrap_or(0.0))
                .collect()
        };
        let ia = grid(a);
        let ib = grid(b);
        let len = ia.len() as isize;
        // values[k] = G((k − n)·step)
        let mut values: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|k| {
                let shift = k - n as isize;
                let lo = shift.max(0);
                let hi = (len + shift).min(len);
                (lo..hi)
                    .map(|i| ia[i as usize] * ib[(i - shift) as usize])
                    .sum::<f64>()
            })
            .collect();
        let peak = values.iter().copied().fold(0.0, f64::max);
        values.iter_mut().for_each(|v| *v /= peak);
        OverlapKernel::Table {
            start: -(n as f64) * step,
            step,
            values,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            OverlapKernel::Gaussian { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            OverlapKernel::Single(p) => {
                p.intensity(x).unwrap_or(0.0) / p.intensity(0.0).unwrap_or(1.0)
            }
            OverlapKernel::Box { half_width } => {
                if x.abs() < *half_width {
                    1.0
                } else {
                    0.0
                }
            }
            OverlapKernel::Table { start, step, values } => {
                let pos = (x - start) / step;
                if pos < 1.0 || pos >= (values.len() - 2) as f64 {
                    return 0.0;
                }
                let i = pos.floor() as usize;
                let t = pos - i as f64;
                // Catmull-Rom cubic through values[i-1..=i+2].
                let (p0, p1, p2, p3) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
                let v = p1
                    + 0.5
                        * t
                        * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
                v.max(0.0)
            }
        }
    }
}

/// Monte Carlo of a delay-scanned correlation measurement.
///
/// Each shot draws a Gaussian timing offset with FWHM `jitter_fwhm_ps` and
/// records a Poisson number of up-converted photons with mean G(delay + offset)
/// (one photon per shot at perfect overlap), so the expected count at each
/// delay is `shots_per_delay`·E[G]. Delay points are independent streams of
/// `seed`.
pub fn simulate_correlation(
    pulse_a: &PulseShape,
    pulse_b: &PulseShape,
    jitter_fwhm_ps: f64,
    delays_ps: &[f64],
    shots_per_delay: u64,
    seed: u64,
) -> Result<CorrelationHistogram> {
    if shots_per_delay == 0 {
        return Err(Error::invalid("shots_per_delay", "must be >= 1"));
    }
    if !(jitter_fwhm_ps.is_finite() && jitter_fwhm_ps >= 0.0) {
        return Err(Error::invalid("jitter_fwhm_ps", format!("must be >= 0, got {jitter_fwhm_ps}")));
    }
    let edges = edges_from_centers(delays_ps)?;
    let resolution = edges.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let kernel = OverlapKernel::new(pulse_a, pulse_b, resolution);
    let jitter = Normal::new(0.0, jitter_fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA)
        .map_err(|e| Error::invalid("jitter_fwhm_ps", e.to_string()))?;

    let counts: Vec<u64> = delays_ps
        .par_iter()
        .enumerate()
        .map(|(i, &delay)| {
            let mut rng = substream(seed, i as u64);
            let mut hits = 0u64;
            for _ in 0..shots_per_delay {
                let offset = jitter.sample(&mut rng);
                let mean = kernel.eval(delay + offset);
                if mean > 0.0 {
                    hits += Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64;
                }
            }
            hits
        })
        .collect();
    CorrelationHistogram::new(edges, counts, shots_per_delay)
}

fn shape_value(model: FitModel, dx: f64, fwhm: f64) -> f64 {
    match model {
        FitModel::Gaussian => (-4.0 * LN_2 * dx * dx / (fwhm * fwhm)).exp(),
        FitModel::SechSquaredAutocorr => {
            // Autocorrelation FWHM = 2·x_half·τ_ac.
            let x_half = 0.5 * sech2_autocorr_factor() * sech2_fwhm_per_tau0();
            sech2_autocorrelation(2.0 * x_half * dx / fwhm)
        }
    }
}

/// Least-squares fit of a peak with free amplitude, centre, width and baseline.
/// Bins are weighted with Poisson errors.
pub fn fit_fwhm(hist: &CorrelationHistogram, model: FitModel) -> Result<FitResult> {
    let x = hist.centers();
    let y: Vec<f64> = hist.counts().iter().map(|&c| c as f64).collect();
    let nonempty = y.iter().filter(|&&v| v > 0.0).count();
    if nonempty < 5 {
        return Err(Error::InsufficientData(format!("{nonempty} non-empty bins, need 5")));
    }
    let sigma: Vec<f64> = y.iter().map(|v| v.max(1.0).sqrt()).collect();

    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let half = 0.5 * (ymax + ymin);
    let above: Vec<f64> = x.iter().zip(&y).filter(|(_, v)| **v >= half).map(|(xi, _)| *xi).collect();
    let min_step = hist.bin_edges().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let width0 = (above.last().unwrap() - above[0]).max(2.0 * min_step);

    let fit = levenberg_marquardt(
        |xi, p| p[3] + p[0] * shape_value(model, xi - p[1], p[2]),
        &x,
        &y,
        &sigma,
        &[ymax - ymin, x[imax], width0, ymin],
    )?;
    let fwhm = fit.params[2].abs();
    if !(fwhm > 0.0 && fit.params[0] > 0.0) {
        return Err(Error::FitDiverged(format!(
            "non-physical peak (amplitude {}, width {})",
            fit.params[0], fit.params[2]
        )));
    }
    Ok(FitResult {
        fwhm_ps: fwhm,
        fwhm_error_ps: fit.std_error(2),
        center_ps: fit.params[1],
        amplitude: fit.params[0],
        baseline: fit.params[3],
        model,
        goodness: fit.reduced_chi2(),
    })
}

/// Evenly spaced delays from `start` to `stop` inclusive.
pub fn delay_grid(start_ps: f64, stop_ps: f64, step_ps: f64) -> Result<Vec<f64>> {
    if !(step_ps > 0.0 && stop_ps >= start_ps) {
        return Err(Error::invalid("delay_step_ps", "need step > 0 and stop >= start"));
    }
    let n = ((stop_ps - start_ps) / step_ps + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start_ps + i as f64 * step_ps).collect())
}
