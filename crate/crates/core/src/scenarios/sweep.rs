//! One-dimensional parameter sweeps.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{bath_only, fit_exponential, run_scenario, transfer_trace};
use crate::device::{Lifetime, ScenarioConfig};
use crate::error::{Error, Result};
use crate::lindblad::EvolutionDiagnostics;
use crate::parallel::Execution;
use crate::rates::rate_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Photon number of every driven resonator.
    NBar,
    /// Cross-Kerr shift of every driven resonator, MHz.
    Chi,
    /// Linewidth of every driven resonator, MHz.
    Kappa,
    /// `T1` of every qubit, μs.
    T1,
    /// Pure-dephasing time of every qubit, μs.
    TPhi,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n_bar" | "nbar" => Ok(Self::NBar),
            "chi" => Ok(Self::Chi),
            "kappa" => Ok(Self::Kappa),
            "t1" => Ok(Self::T1),
            "t_phi" | "tphi" => Ok(Self::TPhi),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep axis `{s}` (expected n_bar, chi, kappa, T1 or T_phi)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NBar => "n_bar",
            Self::Chi => "chi",
            Self::Kappa => "kappa",
            Self::T1 => "T1",
            Self::TPhi => "T_phi",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub steady_fidelity: Option<f64>,
    pub asymptotic_fidelity: Option<f64>,
    pub fitted_ts_us: Option<f64>,
    /// `|S⟩ → |T⟩` rate from a bath-only simulation, μs⁻¹ (two qubits only).
    pub gamma_st_sim: Option<f64>,
    /// Golden-rule `|S⟩ → |T⟩` rate summed over driven resonators, μs⁻¹.
    pub gamma_st_golden: Option<f64>,
    pub diagnostics: Option<EvolutionDiagnostics>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Copy of `cfg` with the axis set to `value`.
pub fn apply_axis(cfg: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    let driven = cfg.driven_resonators();
    match axis {
        SweepAxis::NBar => {
            for r in c.raman.iter_mut().filter(|r| driven.contains(&r.resonator)) {
                r.n_bar = Some(value);
                r.amplitude_mhz = None;
            }
        }
        SweepAxis::Chi => {
            for &k in &driven {
                c.resonators[k].chi_mhz = Some(value);
            }
        }
        SweepAxis::Kappa => {
            for &k in &driven {
                c.resonators[k].kappa_mhz = value;
            }
        }
        SweepAxis::T1 => {
            for q in &mut c.qubits {
                q.t1_us = Lifetime(value);
            }
        }
        SweepAxis::TPhi => {
            for q in &mut c.qubits {
                q.t_phi_us = Some(Lifetime(value));
            }
        }
    }
    c.validate()
}

/// Golden-rule rate from the highest to the lowest single-excitation mode.
pub fn golden_gamma_st(cfg: &ScenarioConfig) -> Result<f64> {
    let top = cfg.n_qubits() - 1;
    Ok(rate_table(cfg)?
        .iter()
        .filter(|r| r.from_mode == top && r.to_mode == 0)
        .map(|r| r.forward)
        .sum())
}

/// `|S⟩ → |T⟩` rate from the decay of `P_S` in a bath-only simulation
/// (pumps off, no intrinsic decoherence). Returns `0` when the bath is off.
pub fn simulated_gamma_st(cfg: &ScenarioConfig) -> Result<f64> {
    if cfg.n_qubits() != 2 {
        return Err(Error::InvalidParameter("the S/T rate needs a two-qubit configuration".into()));
    }
    let golden = golden_gamma_st(cfg)?;
    if golden <= 0.0 {
        return Ok(0.0);
    }
    let kappa_min = cfg
        .driven_resonators()
        .iter()
        .map(|&k| TAU * cfg.resonators[k].kappa_mhz)
        .fold(f64::INFINITY, f64::min);
    let t = (8.0 / golden.min(kappa_min / 2.0)).clamp(2.0, 60.0);
    let bath = bath_only(cfg);
    let (times, traces) = transfer_trace(&bath, "S", &["S"], t, 241)?;
    Ok(fit_exponential(&times, &traces[0])?.rate)
}

fn run_point(cfg: &ScenarioConfig, axis: SweepAxis, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        steady_fidelity: None,
        asymptotic_fidelity: None,
        fitted_ts_us: None,
        gamma_st_sim: None,
        gamma_st_golden: None,
        diagnostics: None,
        error: None,
    };
    let point = match apply_axis(cfg, axis, value) {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let tracked: &[&str] = if point.n_qubits() == 2 { &super::bell::BELL_TRACKED } else { &[] };
    match run_scenario(&point, tracked) {
        Ok(rep) => {
            row.steady_fidelity = Some(rep.steady_fidelity);
            row.asymptotic_fidelity = rep.asymptotic_fidelity;
            row.fitted_ts_us = rep.fitted_ts_us;
            row.diagnostics = Some(rep.diagnostics);
        }
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    if point.n_qubits() == 2 {
        match golden_gamma_st(&point).and_then(|g| Ok((g, simulated_gamma_st(&point)?))) {
            Ok((g, s)) => {
                row.gamma_st_golden = Some(g);
                row.gamma_st_sim = Some(s);
            }
            Err(e) => row.error = Some(format!("rate estimate failed: {e}")),
        }
    }
    row
}

/// Runs one scenario per axis value. Failures are recorded per row and the
/// sweep continues; rows follow the order of `values`.
pub fn run_sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64], execution: Execution) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one value".into()));
    }
    let base = cfg.clone().validate()?;
    let rows = execution.map(values, |&v| run_point(&base, axis, v));
    Ok(SweepResult { axis, values: values.to_vec(), rows })
}

/// Parses `a:b:n` (inclusive, `n` points) or a comma list; `inf` is accepted.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InvalidParameter(format!("bad value list `{text}`: {m}"));
    let num = |s: &str| -> Result<f64> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(f64::INFINITY);
        }
        s.parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<Vec<_>>>().and_then(|v| {
            if v.is_empty() {
                Err(bad("empty"))
            } else {
                Ok(v)
            }
        }),
        3 => {
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|_| bad("point count must be an integer"))?;
            if n == 0 || !a.is_finite() || !b.is_finite() {
                return Err(bad("range needs finite ends and at least one point"));
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
        }
        _ => Err(bad("expected a:b:n or a comma-separated list")),
    }
}
