//! Closed-form engineered-dissipation rates and drive calibration.
//!
//! Public signatures take linear MHz; rates come back in μs⁻¹.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::device::ScenarioConfig;
use crate::error::{Error, Result};

fn check_kappa(kappa_mhz: f64) -> Result<()> {
    if !(kappa_mhz > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa_mhz}")));
    }
    Ok(())
}

/// Mean photon number `|ε|² / (Δ² + (κ/2)²)` of a driven damped resonator.
pub fn photon_number(epsilon_mhz: f64, delta_r_mhz: f64, kappa_mhz: f64) -> Result<f64> {
    check_kappa(kappa_mhz)?;
    Ok(epsilon_mhz.powi(2) / (delta_r_mhz.powi(2) + (kappa_mhz / 2.0).powi(2)))
}

/// Drive amplitude (MHz) that produces `n_bar` photons.
pub fn drive_amplitude_for(n_bar: f64, delta_r_mhz: f64, kappa_mhz: f64) -> Result<f64> {
    check_kappa(kappa_mhz)?;
    if n_bar < 0.0 {
        return Err(Error::InvalidParameter("n_bar must be >= 0".into()));
    }
    Ok((n_bar * (delta_r_mhz.powi(2) + (kappa_mhz / 2.0).powi(2))).sqrt())
}

/// AC Stark shift `2 n̄ χ` in MHz.
pub fn stark_shift(n_bar: f64, chi_mhz: f64) -> f64 {
    2.0 * n_bar * chi_mhz
}

/// Forward/reverse rates of a Raman-assisted transition between two
/// qubit-like modes separated by `gap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Downhill rate p → l, μs⁻¹.
    pub forward: f64,
    /// Uphill rate l → p, μs⁻¹.
    pub reverse: f64,
    pub ratio: f64,
    /// Drive detuning that maximizes the forward rate, MHz.
    pub optimal_detuning: f64,
}

/// Golden-rule rates. The Lorentzian is centred on `Δ_r = gap` for the
/// downhill process and on `Δ_r = −gap` for the uphill one.
pub fn golden_rule_rate(
    chi_kk_mhz: f64,
    m_kl: f64,
    m_kp: f64,
    n_bar: f64,
    kappa_mhz: f64,
    gap_mhz: f64,
    delta_r_mhz: f64,
) -> Result<RateEstimate> {
    check_kappa(kappa_mhz)?;
    let coupling = 4.0 * n_bar * (TAU * chi_kk_mhz * m_kl * m_kp).powi(2);
    let kappa = TAU * kappa_mhz;
    let half = (kappa / 2.0).powi(2);
    let forward = coupling * kappa / ((TAU * (gap_mhz - delta_r_mhz)).powi(2) + half);
    let reverse = coupling * kappa / ((TAU * (gap_mhz + delta_r_mhz)).powi(2) + half);
    let ratio = if reverse > 0.0 { forward / reverse } else { f64::NAN };
    Ok(RateEstimate { forward, reverse, ratio, optimal_detuning: gap_mhz })
}

/// `16 (gap/κ)² + 1`, the forward/reverse ratio at the optimal detuning.
pub fn directionality_ratio(gap_mhz: f64, kappa_mhz: f64) -> Result<f64> {
    check_kappa(kappa_mhz)?;
    Ok(16.0 * (gap_mhz / kappa_mhz).powi(2) + 1.0)
}

/// One row of the rate table printed by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub resonator: String,
    pub from_mode: usize,
    pub to_mode: usize,
    pub gap_mhz: f64,
    pub detuning_mhz: f64,
    pub n_bar: f64,
    pub forward: f64,
    pub reverse: f64,
    pub ratio: f64,
    pub optimal_detuning_mhz: f64,
}

/// Golden-rule rates for every driven resonator and every pair of
/// single-excitation eigenmodes of the qubit array, using the qubit-block
/// eigenvectors for `M`.
pub fn rate_table(cfg: &ScenarioConfig) -> Result<Vec<RateRow>> {
    let modes = crate::modes::qubit_eigenmodes(cfg)?;
    let l = cfg.n_qubits();
    let mut rows = Vec::new();
    for k in cfg.driven_resonators() {
        let res = &cfg.resonators[k];
        let chi = res
            .chi_mhz
            .ok_or_else(|| Error::Model(format!("resonators[{k}].chi_mhz is required")))?;
        let drive = cfg.raman_for(k).expect("driven resonator has a drive");
        let n_bar = drive.photon_number(res.kappa_mhz);
        for p in 0..l {
            for q in 0..p {
                let gap = modes.lambda_q[p] - modes.lambda_q[q];
                if gap <= 0.0 {
                    continue;
                }
                let est = golden_rule_rate(
                    chi,
                    modes.column(q)[k],
                    modes.column(p)[k],
                    n_bar,
                    res.kappa_mhz,
                    gap,
                    drive.detuning_mhz,
                )?;
                rows.push(RateRow {
                    resonator: res.label.clone(),
                    from_mode: p,
                    to_mode: q,
                    gap_mhz: gap,
                    detuning_mhz: drive.detuning_mhz,
                    n_bar,
                    forward: est.forward,
                    reverse: est.reverse,
                    ratio: est.ratio,
                    optimal_detuning_mhz: est.optimal_detuning,
                });
            }
        }
    }
    Ok(rows)
}
