//! One runner per command. Each produces a CSV table and a key=value summary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{build_drift, r_j_grid, Scenario};
use crate::budget::{compose_budget, walkoff_penalty};
use crate::coincidence::run_hom;
use crate::correlator::{
    analytic_autocorr_fwhm, analytic_crosscorr_fwhm, fit_fwhm, simulate_correlation, FitModel, FitResult,
};
use crate::error::{Error, Result};
use crate::hom_engine::{average_visibility, JitterRatio};
use crate::jitterchain::{
    chain_total_jitter, extract_component, loss_excess_jitter, stabilization_interval, thermal_drift, FiberLink,
    LossJitterModel,
};
use crate::wavepacket::ShapeFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Xcorr,
    Autocorr,
    Hom,
    JitterBudget,
    VisBudget,
    Drift,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Xcorr,
        Command::Autocorr,
        Command::Hom,
        Command::JitterBudget,
        Command::VisBudget,
        Command::Drift,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Xcorr => "xcorr",
            Command::Autocorr => "autocorr",
            Command::Hom => "hom",
            Command::JitterBudget => "jitter-budget",
            Command::VisBudget => "vis-budget",
            Command::Drift => "drift",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Artifacts of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub command: Command,
    pub csv: Vec<u8>,
    pub summary: Vec<(String, String)>,
}

impl RunOutput {
    pub fn summary_text(&self) -> String {
        self.summary.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Writes `<command>.csv` and `<command>_summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.command));
        let summary_path = dir.join(format!("{}_summary.txt", self.command));
        fs::write(&csv_path, &self.csv)?;
        fs::write(&summary_path, self.summary_text())?;
        Ok((csv_path, summary_path))
    }
}

#[derive(Default)]
struct Summary(Vec<(String, String)>);

impl Summary {
    fn put(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(header)?;
    for row in rows {
        out.write_record(row)?;
    }
    out.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn run_command(scenario: &Scenario, command: Command) -> Result<RunOutput> {
    let mut summary = Summary::default();
    summary.put("scenario", &scenario.name).put("command", command).put("seed", scenario.seed);
    let csv = match command {
        Command::Xcorr => xcorr(scenario, &mut summary)?,
        Command::Autocorr => autocorr(scenario, &mut summary)?,
        Command::Hom => hom(scenario, &mut summary)?,
        Command::JitterBudget => jitter_budget(scenario, &mut summary)?,
        Command::VisBudget => vis_budget(scenario, &mut summary)?,
        Command::Drift => drift(scenario, &mut summary)?,
        Command::Sweep => sweep(scenario, &mut summary)?,
    };
    Ok(RunOutput {
        command,
        csv,
        summary: summary.0,
    })
}

fn put_fit(summary: &mut Summary, fit: &FitResult) {
    let model = match fit.model {
        FitModel::Gaussian => "gaussian",
        FitModel::SechSquaredAutocorr => "sech2_autocorr",
    };
    summary
        .put("fit_model", model)
        .put("fwhm_ps", fit.fwhm_ps)
        .put("fwhm_error_ps", fit.fwhm_error_ps)
        .put("center_ps", fit.center_ps)
        .put("reduced_chi2", fit.goodness);
}

fn xcorr(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let setup = scenario.correlation_setup()?;
    let pulse_b = setup.pulse_b.ok_or_else(|| Error::Schema {
        path: "correlation.pulse_b".into(),
        message: "required by command `xcorr`".into(),
    })?;
    let (chain, model) = scenario.chain()?;
    let sync = chain_total_jitter(&chain, &model)?;
    let hist = simulate_correlation(
        &setup.pulse_a,
        &pulse_b,
        sync,
        &setup.delays_ps,
        setup.shots_per_delay,
        scenario.seed,
    )?;
    let fit = fit_fwhm(&hist, setup.fit_model.unwrap_or_default())?;
    put_fit(summary, &fit);
    summary
        .put("expected_fwhm_ps", analytic_crosscorr_fwhm(&setup.pulse_a, &pulse_b, sync))
        .put("configured_sync_jitter_ps", sync);
    // Sync jitter inferred from the measured width, as done with a real correlator.
    match extract_component(fit.fwhm_ps, &[setup.pulse_a.fwhm_ps(), pulse_b.fwhm_ps()]) {
        Ok(j) if j > 0.0 => {
            summary
                .put("extracted_sync_jitter_ps", j)
                .put("extracted_sync_jitter_error_ps", fit.fwhm_ps / j * fit.fwhm_error_ps);
        }
        _ => {
            summary.put("extracted_sync_jitter_ps", "unresolved");
        }
    }
    let mut csv = Vec::new();
    hist.write_csv(&mut csv)?;
    Ok(csv)
}

fn autocorr(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let setup = scenario.correlation_setup()?;
    let pulse = setup.pulse_a;
    let model = setup.fit_model.unwrap_or(match pulse.family() {
        ShapeFamily::SechSquared => FitModel::SechSquaredAutocorr,
        _ => FitModel::Gaussian,
    });
    let hist = simulate_correlation(&pulse, &pulse, 0.0, &setup.delays_ps, setup.shots_per_delay, scenario.seed)?;
    let fit = fit_fwhm(&hist, model)?;
    put_fit(summary, &fit);
    let expected = analytic_autocorr_fwhm(&pulse)?;
    summary.put("expected_fwhm_ps", expected);
    if pulse.fwhm_ps() > 0.0 {
        let factor = expected / pulse.fwhm_ps();
        summary
            .put("deconvolution_factor", factor)
            .put("pulse_fwhm_ps", fit.fwhm_ps / factor)
            .put("pulse_fwhm_error_ps", fit.fwhm_error_ps / factor);
    }
    let mut csv = Vec::new();
    hist.write_csv(&mut csv)?;
    Ok(csv)
}

fn hom(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let hom = scenario.hom_scenario()?;
    let prediction = hom.predict()?;
    let result = run_hom(&hom)?;
    for (k, v) in result.summary() {
        summary.put(k, v);
    }
    summary
        .put("relative_jitter_ps", hom.relative_jitter_ps()?)
        .put("coherence_ps", hom.coherence_ps()?)
        .put("predicted_visibility", prediction.expected_visibility)
        .put("predicted_dip_fwhm_ps", prediction.dip_fwhm_ps)
        .put("multipair_visibility", prediction.visibility_cap)
        .put(
            "visibility_deviation_sigma",
            result.net_visibility().deviation(prediction.expected_visibility),
        );
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    Ok(csv)
}

fn jitter_budget(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let (chain, model) = scenario.chain()?;
    let mut rows = Vec::new();
    for stage in &chain.stages {
        rows.push(vec!["stage".into(), stage.name.clone(), stage.fwhm_jitter_ps.to_string()]);
    }
    if let Some(link) = &chain.link {
        rows.push(vec![
            "link".into(),
            format!("{} km at {} dB", link.length_km(), link.total_loss_db()),
            loss_excess_jitter(link, &model).to_string(),
        ]);
    }
    let total = chain_total_jitter(&chain, &model)?;
    rows.push(vec!["total".into(), "sync chain".into(), total.to_string()]);
    summary.put("total_jitter_ps", total);

    if let Some(budget) = &scenario.jitter_budget {
        for e in &budget.extractions {
            let value = extract_component(e.total_ps, &e.known_ps)?;
            rows.push(vec!["extracted".into(), e.label.clone(), value.to_string()]);
            summary.put(&format!("extracted[{}]", e.label), value);
        }
        for &loss in &budget.loss_sweep_db {
            if !(loss >= 0.0) {
                return Err(Error::Schema {
                    path: "jitter_budget.loss_sweep_db".into(),
                    message: format!("losses must be >= 0, got {loss}"),
                });
            }
            rows.push(vec![
                "loss_sweep".into(),
                format!("{loss} dB"),
                model.excess_jitter_ps(loss).to_string(),
            ]);
        }
    }
    table(&["kind", "label", "fwhm_ps"], rows)
}

fn vis_budget(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let (ledger, section) = scenario.budget_ledger()?;
    let jitter_visibility =
        average_visibility(JitterRatio::new(section.jitter_fwhm_ps, section.coherence_fwhm_ps)?);
    let breakdown = compose_budget(&ledger, jitter_visibility)?;
    summary
        .put("rule", breakdown.rule)
        .put("jitter_visibility", jitter_visibility)
        .put("expected_visibility", breakdown.total);
    if let Some(reference) = section.reference_visibility {
        summary
            .put("reference_visibility", reference)
            .put("gap", breakdown.total - reference)
            .put("relative_gap", (breakdown.total - reference) / reference);
    }
    if let Some(walkoff) = section.walkoff_ps {
        summary.put("computed_walkoff_reduction", walkoff_penalty(walkoff, section.coherence_fwhm_ps)?);
    }
    let mut csv = Vec::new();
    breakdown.write_csv(&mut csv)?;
    Ok(csv)
}

fn drift(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let section = scenario.drift.as_ref().ok_or_else(|| super::missing("drift", "drift"))?;
    let (link, profile): (FiberLink, _) = build_drift(section)?;
    summary
        .put("length_km", link.length_km())
        .put("thermal_drift_ps", thermal_drift(&link, section.delta_t_k))
        .put("delta_t_k", section.delta_t_k)
        .put("amplitude_ps", profile.amplitude_ps(&link))
        .put("max_rate_ps_per_s", profile.max_rate_ps_per_s(&link));
    let rows = section
        .tolerances_ps
        .iter()
        .map(|&tol| {
            let interval = stabilization_interval(&link, tol, &profile)?;
            Ok(vec![
                tol.to_string(),
                interval.seconds().map_or_else(|| "never".to_string(), |s| s.to_string()),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    table(&["tolerance_ps", "interval_s"], rows)
}

fn sweep(scenario: &Scenario, summary: &mut Summary) -> Result<Vec<u8>> {
    let section = scenario.sweep.as_ref().ok_or_else(|| super::missing("sweep", "sweep"))?;
    let grid = r_j_grid(section)?;
    summary.put("points", grid.len());
    let rows = grid
        .iter()
        .map(|&r| {
            let ratio = JitterRatio::from_ratio(r)?;
            Ok(vec![
                r.to_string(),
                ratio.sigma_delta().to_string(),
                average_visibility(ratio).to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    table(&["r_j", "sigma_delta", "average_visibility"], rows)
}
