//! TOML scenario files and the command runners built on them.
//!
//! A scenario names an experiment, fixes its seed and carries one optional
//! section per kind of calculation. Every physical quantity has its unit in
//! the key name. Unknown keys are rejected, and structural errors report the
//! dotted path of the offending key.
//!
//! ```toml
//! name = "direct trigger"
//! seed = 1
//!
//! [sync]
//! stages = [{ name = "trigger electronics", fwhm_jitter_ps = 17.56 }]
//!
//! [correlation]
//! pulse_a = { shape = "gaussian", fwhm_ps = 20.7 }
//! pulse_b = { shape = "sech2", fwhm_ps = 5.0 }
//! delay_start_ps = -60.0
//! delay_stop_ps = 60.0
//! delay_step_ps = 2.0
//! shots_per_delay = 50000
//! ```

mod commands;

use std::path::Path;

use serde::Deserialize;

use crate::budget::{Penalty, PenaltyLedger};
use crate::coincidence::{DetectorModel, HomScenario, DEFAULT_COINCIDENCE_WINDOW_PS, DEFAULT_PULSE_PERIOD_PS};
use crate::correlator::{delay_grid, FitModel};
use crate::error::{Error, Result};
use crate::jitterchain::{DiurnalProfile, ExponentialLossJitter, FiberLink, JitterStage, SyncChain};
use crate::pairsource::{PairStatistics, PhotonSource};
use crate::wavepacket::{PulseShape, ShapeFamily, Spectrum};

pub use commands::{run_command, Command, RunOutput};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub shape: ShapeFamily,
    pub fwhm_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    pub pulse_a: PulseSpec,
    /// Second pulse for cross-correlation; autocorrelation uses `pulse_a` only.
    pub pulse_b: Option<PulseSpec>,
    pub delay_start_ps: f64,
    pub delay_stop_ps: f64,
    pub delay_step_ps: f64,
    pub shots_per_delay: u64,
    /// Peak model for the fit; defaults to the one matching the pulse shape.
    pub fit_model: Option<FitModel>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub name: String,
    pub fwhm_jitter_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub thermal_coefficient_per_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncSection {
    #[serde(default)]
    pub stages: Vec<StageSpec>,
    pub link: Option<LinkSpec>,
    /// Scale `a` of the loss-jitter model a·(10^(L/10) − 1).
    #[serde(default)]
    pub loss_jitter_scale_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionSpec {
    pub label: String,
    pub total_ps: f64,
    pub known_ps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterBudgetSection {
    #[serde(default)]
    pub extractions: Vec<ExtractionSpec>,
    /// Link losses at which to tabulate the loss-induced excess jitter.
    #[serde(default)]
    pub loss_sweep_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub length_km: f64,
    pub thermal_coefficient_per_k: Option<f64>,
    pub period_s: Option<f64>,
    pub fractional_amplitude: Option<f64>,
    #[serde(default = "one_kelvin")]
    pub delta_t_k: f64,
    pub tolerances_ps: Vec<f64>,
}

fn one_kelvin() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub pump: PulseSpec,
    pub pump_center_nm: f64,
    pub pump_bandwidth_pm: f64,
    pub filter_center_nm: f64,
    pub filter_bandwidth_pm: f64,
    pub pair_probability: f64,
    #[serde(default)]
    pub statistics: PairStatistics,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSpec {
    pub efficiency: f64,
    pub dark_count_prob_per_gate: f64,
    pub tdc_bin_ps: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        let d = DetectorModel::default();
        Self {
            efficiency: d.efficiency,
            dark_count_prob_per_gate: d.dark_count_prob_per_gate,
            tdc_bin_ps: d.tdc_bin_ps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    pub source_a: SourceSpec,
    /// Defaults to a copy of `source_a`.
    pub source_b: Option<SourceSpec>,
    pub overlap: f64,
    /// Applied to both outputs.
    #[serde(default)]
    pub detector: DetectorSpec,
    pub delay_start_ps: f64,
    pub delay_stop_ps: f64,
    pub delay_step_ps: f64,
    pub pulses_per_point: u64,
    pub pulse_period_ps: Option<f64>,
    pub coincidence_window_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySpec {
    pub label: String,
    pub max_visibility_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub base_cap: Option<f64>,
    pub jitter_fwhm_ps: f64,
    pub coherence_fwhm_ps: f64,
    #[serde(default)]
    pub penalties: Vec<PenaltySpec>,
    /// Published expectation to compare against.
    pub reference_visibility: Option<f64>,
    /// Group-velocity walk-off, reported as a computed penalty alongside the ledger.
    pub walkoff_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub r_j_start: f64,
    pub r_j_stop: f64,
    pub r_j_step: f64,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub correlation: Option<CorrelationSection>,
    pub sync: Option<SyncSection>,
    pub jitter_budget: Option<JitterBudgetSection>,
    pub drift: Option<DriftSection>,
    pub hom: Option<HomSection>,
    pub budget: Option<BudgetSection>,
    pub sweep: Option<SweepSection>,
}

/// Turns a parameter error raised while building `section` into a schema error.
fn in_section(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { name, reason } => Error::Schema {
            path: format!("{section}.{name}"),
            message: reason,
        },
        other => Error::Schema {
            path: section.to_string(),
            message: other.to_string(),
        },
    }
}

fn missing(section: &'static str, command: &str) -> Error {
    Error::Schema {
        path: section.to_string(),
        message: format!("section required by command `{command}`"),
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Schema {
            path: ".".into(),
            message: e.message().to_string(),
        })?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Schema {
                path,
                message: e.into_inner().message().to_string(),
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Builds every present section, reporting the first invalid value.
    pub fn validate(&self) -> Result<()> {
        if self.correlation.is_some() {
            self.correlation_setup()?;
        }
        self.chain()?;
        if let Some(d) = &self.drift {
            build_drift(d)?;
        }
        if self.hom.is_some() {
            self.hom_scenario()?;
        }
        if self.budget.is_some() {
            self.budget_ledger()?;
        }
        if let Some(s) = &self.sweep {
            r_j_grid(s)?;
        }
        Ok(())
    }

    /// Sync chain and loss model; an absent `[sync]` section means a jitter-free trigger.
    pub fn chain(&self) -> Result<(SyncChain, ExponentialLossJitter)> {
        let default = SyncSection::default();
        let s = self.sync.as_ref().unwrap_or(&default);
        let err = in_section("sync");
        let stages = s
            .stages
            .iter()
            .map(|st| JitterStage::new(st.name.clone(), st.fwhm_jitter_ps))
            .collect::<Result<Vec<_>>>()
            .map_err(&err)?;
        let link = s
            .link
            .as_ref()
            .map(|l| {
                FiberLink::new(
                    l.length_km,
                    l.loss_db_per_km,
                    l.thermal_coefficient_per_k
                        .unwrap_or(crate::jitterchain::DEFAULT_THERMAL_COEFFICIENT),
                )
            })
            .transpose()
            .map_err(&err)?;
        let model = ExponentialLossJitter::new(s.loss_jitter_scale_ps).map_err(&err)?;
        Ok((SyncChain::new(stages, link), model))
    }

    /// Pulses, delay grid, shots and fit model of the correlation section.
    pub fn correlation_setup(&self) -> Result<CorrelationSetup> {
        let c = self.correlation.as_ref().ok_or_else(|| missing("correlation", "xcorr/autocorr"))?;
        let err = in_section("correlation");
        let pulse_a = PulseShape::new(c.pulse_a.shape, c.pulse_a.fwhm_ps).map_err(&err)?;
        let pulse_b = c
            .pulse_b
            .as_ref()
            .map(|p| PulseShape::new(p.shape, p.fwhm_ps))
            .transpose()
            .map_err(&err)?;
        let delays = delay_grid(c.delay_start_ps, c.delay_stop_ps, c.delay_step_ps).map_err(&err)?;
        if c.shots_per_delay == 0 {
            return Err(err(Error::invalid("shots_per_delay", "must be >= 1")));
        }
        Ok(CorrelationSetup {
            pulse_a,
            pulse_b,
            delays_ps: delays,
            shots_per_delay: c.shots_per_delay,
            fit_model: c.fit_model,
        })
    }

    pub fn hom_scenario(&self) -> Result<HomScenario> {
        let h = self.hom.as_ref().ok_or_else(|| missing("hom", "hom"))?;
        let err = in_section("hom");
        let source_a = build_source(&h.source_a).map_err(&err)?;
        let source_b = h
            .source_b
            .as_ref()
            .map(build_source)
            .transpose()
            .map_err(&err)?
            .unwrap_or_else(|| source_a.clone());
        let detector = DetectorModel {
            efficiency: h.detector.efficiency,
            dark_count_prob_per_gate: h.detector.dark_count_prob_per_gate,
            tdc_bin_ps: h.detector.tdc_bin_ps,
        };
        let (chain, loss_jitter) = self.chain()?;
        let scenario = HomScenario {
            source_a,
            source_b,
            chain,
            loss_jitter,
            overlap: h.overlap,
            detectors: [detector; 2],
            delay_sweep_ps: delay_grid(h.delay_start_ps, h.delay_stop_ps, h.delay_step_ps).map_err(&err)?,
            pulses_per_point: h.pulses_per_point,
            seed: self.seed,
            pulse_period_ps: h.pulse_period_ps.unwrap_or(DEFAULT_PULSE_PERIOD_PS),
            coincidence_window_ps: h.coincidence_window_ps.unwrap_or(DEFAULT_COINCIDENCE_WINDOW_PS),
        };
        scenario.validate().map_err(&err)?;
        scenario.source_a.filtered_coherence().map_err(&err)?;
        scenario.source_b.filtered_coherence().map_err(&err)?;
        Ok(scenario)
    }

    pub fn budget_ledger(&self) -> Result<(PenaltyLedger, &BudgetSection)> {
        let b = self.budget.as_ref().ok_or_else(|| missing("budget", "vis-budget"))?;
        let err = in_section("budget");
        let ledger = PenaltyLedger {
            entries: b
                .penalties
                .iter()
                .map(|p| Penalty {
                    label: p.label.clone(),
                    max_visibility_reduction: p.max_visibility_reduction,
                })
                .collect(),
            base_cap: b.base_cap.unwrap_or(1.0 / 3.0),
        };
        ledger.validate().map_err(&err)?;
        if !(b.coherence_fwhm_ps > 0.0) {
            return Err(err(Error::invalid("coherence_fwhm_ps", "must be > 0")));
        }
        if !(b.jitter_fwhm_ps >= 0.0) {
            return Err(err(Error::invalid("jitter_fwhm_ps", "must be >= 0")));
        }
        Ok((ledger, b))
    }
}

/// Validated inputs of the correlation commands.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSetup {
    pub pulse_a: PulseShape,
    pub pulse_b: Option<PulseShape>,
    pub delays_ps: Vec<f64>,
    pub shots_per_delay: u64,
    pub fit_model: Option<FitModel>,
}

fn build_source(s: &SourceSpec) -> Result<PhotonSource> {
    PhotonSource::new(
        PulseShape::new(s.pump.shape, s.pump.fwhm_ps)?,
        Spectrum::new(s.pump_center_nm, s.pump_bandwidth_pm)?,
        Spectrum::new(s.filter_center_nm, s.filter_bandwidth_pm)?,
        s.pair_probability,
        s.statistics,
    )
}

fn build_drift(d: &DriftSection) -> Result<(FiberLink, DiurnalProfile)> {
    let err = in_section("drift");
    let link = FiberLink::new(
        d.length_km,
        0.0,
        d.thermal_coefficient_per_k
            .unwrap_or(crate::jitterchain::DEFAULT_THERMAL_COEFFICIENT),
    )
    .map_err(&err)?;
    let defaults = DiurnalProfile::default();
    let profile = DiurnalProfile {
        period_s: d.period_s.unwrap_or(defaults.period_s),
        fractional_amplitude: d.fractional_amplitude.unwrap_or(defaults.fractional_amplitude),
    };
    profile.validate().map_err(&err)?;
    if d.tolerances_ps.is_empty() {
        return Err(err(Error::invalid("tolerances_ps", "must not be empty")));
    }
    Ok((link, profile))
}

fn r_j_grid(s: &SweepSection) -> Result<Vec<f64>> {
    if !(s.r_j_start >= 0.0) {
        return Err(in_section("sweep")(Error::invalid("r_j_start", "must be >= 0")));
    }
    delay_grid(s.r_j_start, s.r_j_stop, s.r_j_step).map_err(|_| Error::Schema {
        path: "sweep".into(),
        message: "need r_j_step > 0 and r_j_stop >= r_j_start".into(),
    })
}

/// Scenario files shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("jitter_ratio_sweep", include_str!("../../scenarios/jitter_ratio_sweep.toml")),
    ("direct_trigger", include_str!("../../scenarios/direct_trigger.toml")),
    ("media_converter_trigger", include_str!("../../scenarios/media_converter_trigger.toml")),
    ("link_drift", include_str!("../../scenarios/link_drift.toml")),
    ("hom_dip", include_str!("../../scenarios/hom_dip.toml")),
    ("visibility_budget", include_str!("../../scenarios/visibility_budget.toml")),
];

/// Text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
