//! Trigger-path timing noise: quadrature jitter budgets, loss-induced excess
//! jitter and thermal path-length drift of the synchronization fiber.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{MM_PER_KM, SPEED_OF_LIGHT_MM_PER_PS};
use crate::wavepacket::delay_length_to_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterDistribution {
    #[default]
    Gaussian,
}

/// One independent timing-noise contributor in the trigger path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterStage {
    pub name: String,
    pub fwhm_jitter_ps: f64,
    #[serde(default)]
    pub distribution: JitterDistribution,
}

impl JitterStage {
    pub fn new(name: impl Into<String>, fwhm_jitter_ps: f64) -> Result<Self> {
        if !(fwhm_jitter_ps.is_finite() && fwhm_jitter_ps >= 0.0) {
            return Err(Error::invalid("fwhm_jitter_ps", format!("must be >= 0, got {fwhm_jitter_ps}")));
        }
        Ok(Self {
            name: name.into(),
            fwhm_jitter_ps,
            distribution: JitterDistribution::Gaussian,
        })
    }
}

/// Fractional length change per kelvin of installed fiber (1 cm per km per K).
pub const DEFAULT_THERMAL_COEFFICIENT: f64 = 1.0e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberLink {
    length_km: f64,
    loss_db_per_km: f64,
    thermal_coefficient_per_k: f64,
}

impl FiberLink {
    pub fn new(length_km: f64, loss_db_per_km: f64, thermal_coefficient_per_k: f64) -> Result<Self> {
        if !(length_km.is_finite() && length_km >= 0.0) {
            return Err(Error::invalid("length_km", format!("must be >= 0, got {length_km}")));
        }
        if !(loss_db_per_km.is_finite() && loss_db_per_km >= 0.0) {
            return Err(Error::invalid("loss_db_per_km", format!("must be >= 0, got {loss_db_per_km}")));
        }
        if !(thermal_coefficient_per_k.is_finite() && thermal_coefficient_per_k > 0.0) {
            return Err(Error::invalid(
                "thermal_coefficient_per_k",
                format!("must be > 0, got {thermal_coefficient_per_k}"),
            ));
        }
        Ok(Self {
            length_km,
            loss_db_per_km,
            thermal_coefficient_per_k,
        })
    }

    /// Link with the default thermal coefficient.
    pub fn with_loss(length_km: f64, loss_db_per_km: f64) -> Result<Self> {
        Self::new(length_km, loss_db_per_km, DEFAULT_THERMAL_COEFFICIENT)
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    pub fn loss_db_per_km(&self) -> f64 {
        self.loss_db_per_km
    }

    pub fn thermal_coefficient_per_k(&self) -> f64 {
        self.thermal_coefficient_per_k
    }

    pub fn total_loss_db(&self) -> f64 {
        self.length_km * self.loss_db_per_km
    }

    pub fn length_mm(&self) -> f64 {
        self.length_km * MM_PER_KM
    }
}

/// Excess trigger jitter caused by a reduced signal-to-noise ratio at the
/// receiving photodetector.
pub trait LossJitterModel {
    /// Additional jitter FWHM (ps) at the given link loss. Must vanish at zero
    /// loss and be non-decreasing in loss.
    fn excess_jitter_ps(&self, loss_db: f64) -> f64;
}

/// j(L) = a·(10^(L/10) − 1): jitter growing with the inverse of the received
/// power, scaled by a detector-specific constant `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialLossJitter {
    pub scale_ps: f64,
}

impl ExponentialLossJitter {
    pub fn new(scale_ps: f64) -> Result<Self> {
        if !(scale_ps.is_finite() && scale_ps >= 0.0) {
            return Err(Error::invalid("scale_ps", format!("must be finite and >= 0, got {scale_ps}")));
        }
        Ok(Self { scale_ps })
    }
}

impl LossJitterModel for ExponentialLossJitter {
    fn excess_jitter_ps(&self, loss_db: f64) -> f64 {
        let loss_db = loss_db.max(0.0);
        self.scale_ps * (10f64.powf(loss_db / 10.0) - 1.0)
    }
}

/// Ordered trigger path from the master laser to the slave laser.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyncChain {
    pub stages: Vec<JitterStage>,
    pub link: Option<FiberLink>,
}

impl SyncChain {
    pub fn new(stages: Vec<JitterStage>, link: Option<FiberLink>) -> Self {
        Self { stages, link }
    }

    pub fn stage_widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.stages.iter().map(|s| s.fwhm_jitter_ps)
    }
}

/// √(Σ wᵢ²), the FWHM of a sum of independent Gaussian contributions.
pub fn compose_quadrature<I>(widths: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    widths.into_iter().fold(0.0, f64::hypot)
}

/// Recovers the one unknown contributor from a measured total.
pub fn extract_component(total_ps: f64, known_ps: &[f64]) -> Result<f64> {
    let known_sq: f64 = known_ps.iter().map(|k| k * k).sum();
    let remainder = total_ps * total_ps - known_sq;
    if remainder < 0.0 {
        return Err(Error::InconsistentWidths {
            total_ps,
            known_ps: known_sq.sqrt(),
        });
    }
    Ok(remainder.sqrt())
}

pub fn loss_excess_jitter(link: &FiberLink, model: &impl LossJitterModel) -> f64 {
    model.excess_jitter_ps(link.total_loss_db())
}

/// Propagation-time change of the link for a temperature change `delta_t_k`.
pub fn thermal_drift(link: &FiberLink, delta_t_k: f64) -> f64 {
    delay_length_to_time(link.length_mm() * link.thermal_coefficient_per_k * delta_t_k)
}

/// Slow path-length variation of an installed fiber.
///
/// Modelled as L·A·sin(2πt/P): fractional amplitude A over period P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiurnalProfile {
    pub period_s: f64,
    pub fractional_amplitude: f64,
}

impl Default for DiurnalProfile {
    fn default() -> Self {
        Self {
            period_s: 86_400.0,
            fractional_amplitude: 1.0e-5,
        }
    }
}

impl DiurnalProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.period_s.is_finite() && self.period_s > 0.0) {
            return Err(Error::invalid("period_s", format!("must be > 0, got {}", self.period_s)));
        }
        if !(self.fractional_amplitude.is_finite() && self.fractional_amplitude > 0.0) {
            return Err(Error::invalid(
                "fractional_amplitude",
                format!("must be > 0, got {}", self.fractional_amplitude),
            ));
        }
        Ok(())
    }

    /// Drift amplitude of the link's propagation time, ps.
    pub fn amplitude_ps(&self, link: &FiberLink) -> f64 {
        link.length_mm() * self.fractional_amplitude / SPEED_OF_LIGHT_MM_PER_PS
    }

    /// Peak drift rate π·amplitude/(P/2), ps per second.
    pub fn max_rate_ps_per_s(&self, link: &FiberLink) -> f64 {
        PI * self.amplitude_ps(link) / (0.5 * self.period_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilizationInterval {
    /// Re-measure and correct the link at least this often.
    Every { seconds: f64 },
    /// The drift never exceeds the tolerance.
    Never,
}

impl StabilizationInterval {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            StabilizationInterval::Every { seconds } => Some(*seconds),
            StabilizationInterval::Never => None,
        }
    }
}

/// Longest correction interval that keeps the worst-case drift below
/// `tolerance_ps`, evaluated at the profile's peak drift rate.
pub fn stabilization_interval(
    link: &FiberLink,
    tolerance_ps: f64,
    profile: &DiurnalProfile,
) -> Result<StabilizationInterval> {
    profile.validate()?;
    if tolerance_ps.is_nan() || tolerance_ps <= 0.0 {
        return Err(Error::ToleranceUnreachable { tolerance_ps });
    }
    // Peak-to-peak excursion bounds the drift over any interval.
    if tolerance_ps >= 2.0 * profile.amplitude_ps(link) {
        return Ok(StabilizationInterval::Never);
    }
    Ok(StabilizationInterval::Every {
        seconds: tolerance_ps / profile.max_rate_ps_per_s(link),
    })
}

/// Quadrature total of all stage jitters plus the loss-induced excess.
pub fn chain_total_jitter(chain: &SyncChain, model: &impl LossJitterModel) -> Result<f64> {
    if let Some(bad) = chain.stages.iter().find(|s| !(s.fwhm_jitter_ps >= 0.0)) {
        return Err(Error::invalid(
            "fwhm_jitter_ps",
            format!("stage `{}` has width {}", bad.name, bad.fwhm_jitter_ps),
        ));
    }
    let excess = chain.link.as_ref().map_or(0.0, |l| loss_excess_jitter(l, model));
    Ok(compose_quadrature(chain.stage_widths().chain(std::iter::once(excess))))
}
