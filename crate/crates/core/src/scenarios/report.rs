//! Output files: `report.json` summaries and CSV traces.
//!
//! `traces.csv` has a `t_us` column, then `fidelity`, then one `pop_<state>`
//! column per tracked state. Sweep and spectrum tables have one row per
//! axis value. Empty cells mean "not available".

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExpFit, ScenarioReport, Spectrum, SweepResult};
use crate::device::ScenarioConfig;
use crate::error::{Error, Result};
use crate::lindblad::{EvolutionDiagnostics, SteadyMethodUsed};

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub scenario: String,
    pub target: String,
    pub initial_state: String,
    pub hilbert_dim: usize,
    pub steady_fidelity: f64,
    pub final_fidelity: f64,
    pub asymptotic_fidelity: Option<f64>,
    pub steady_method: Option<SteadyMethodUsed>,
    pub steady_residual: Option<f64>,
    pub fitted_ts_us: Option<f64>,
    pub fit: Option<ExpFit>,
    pub diagnostics: EvolutionDiagnostics,
    pub notes: Vec<String>,
    pub config: ScenarioConfig,
}

impl From<&ScenarioReport> for ReportSummary {
    fn from(r: &ScenarioReport) -> Self {
        Self {
            scenario: r.scenario.clone(),
            target: r.target.clone(),
            initial_state: r.initial_state.clone(),
            hilbert_dim: r.hilbert_dim,
            steady_fidelity: r.steady_fidelity,
            final_fidelity: r.final_fidelity(),
            asymptotic_fidelity: r.asymptotic_fidelity,
            steady_method: r.steady_method,
            steady_residual: r.steady_residual,
            fitted_ts_us: r.fitted_ts_us,
            fit: r.fit,
            diagnostics: r.diagnostics,
            notes: r.notes.clone(),
            config: r.config.clone(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `report.json` and `traces.csv` into `dir` (created if missing).
pub fn write_report(dir: impl AsRef<Path>, report: &ScenarioReport) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), &ReportSummary::from(report))?;
    let mut w = csv::Writer::from_path(dir.join("traces.csv")).map_err(csv_err)?;
    let mut header = vec!["t_us".to_string(), "fidelity".to_string()];
    header.extend(report.populations.iter().map(|p| p.name.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, t) in report.times_us.iter().enumerate() {
        let mut rec = vec![t.to_string(), report.fidelity[i].to_string()];
        rec.extend(report.populations.iter().map(|p| p.values[i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `sweep.csv` and `report.json` for a sweep.
pub fn write_sweep_csv(dir: impl AsRef<Path>, sweep: &SweepResult) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), sweep)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv")).map_err(csv_err)?;
    w.write_record([
        sweep.axis.to_string().as_str(),
        "steady_fidelity",
        "asymptotic_fidelity",
        "fitted_ts_us",
        "gamma_st_sim",
        "gamma_st_golden",
        "error",
    ])
    .map_err(csv_err)?;
    for r in &sweep.rows {
        w.write_record([
            r.value.to_string(),
            cell(r.steady_fidelity),
            cell(r.asymptotic_fidelity),
            cell(r.fitted_ts_us),
            cell(r.gamma_st_sim),
            cell(r.gamma_st_golden),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `spectrum.csv` (frequency, excited population, one column per
/// basis state) and `report.json`.
pub fn write_spectrum(dir: impl AsRef<Path>, spectrum: &Spectrum) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), spectrum)?;
    let mut w = csv::Writer::from_path(dir.join("spectrum.csv")).map_err(csv_err)?;
    let mut header = vec!["frequency_mhz".to_string(), "excited".to_string()];
    header.extend(spectrum.labels.iter().map(|l| format!("pop_{l}")));
    w.write_record(&header).map_err(csv_err)?;
    for (i, f) in spectrum.frequencies_mhz.iter().enumerate() {
        let mut rec = vec![f.to_string(), spectrum.excited[i].to_string()];
        rec.extend(spectrum.populations.iter().map(|p| p[i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
