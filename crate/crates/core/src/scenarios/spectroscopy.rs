//! Weak-drive spectroscopy of the coupled qubit array.
//!
//! A long square drive on one qubit is swept in frequency; the response is
//! the time-averaged population of each computational basis state. The
//! resonators are not simulated.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::ScenarioConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::{collapse_set_for, qubit_hamiltonian, Layout};
use crate::hilbert::{lowering_op, DensityMatrix, LinearOperator};
use crate::linalg::SparseMatrix;
use crate::lindblad::{build_liouvillian, evolve, uniform_grid, EvolveOptions, Observable};
use crate::parallel::Execution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopySettings {
    pub drive_qubit: usize,
    pub amplitude_mhz: f64,
    pub duration_us: f64,
    pub samples: usize,
}

impl Default for SpectroscopySettings {
    fn default() -> Self {
        Self { drive_qubit: 0, amplitude_mhz: 0.05, duration_us: 4.0, samples: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies_mhz: Vec<f64>,
    /// Basis labels such as `"eg"`.
    pub labels: Vec<String>,
    /// `populations[k][i]`: mean population of `labels[k]` at frequency `i`.
    pub populations: Vec<Vec<f64>>,
    /// Mean population outside the ground state.
    pub excited: Vec<f64>,
    /// Peak positions of `excited`, refined by a parabola through the
    /// three samples around each local maximum.
    pub peaks_mhz: Vec<f64>,
}

impl Spectrum {
    pub fn population(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|k| self.populations[k].as_slice())
    }
}

fn basis_label(occ: &[usize]) -> String {
    occ.iter().map(|&n| ['g', 'e', 'f', 'h'].get(n).copied().unwrap_or('?')).collect()
}

/// Local maxima above `rel` times the global maximum.
pub fn find_peaks(x: &[f64], y: &[f64], rel: f64) -> Vec<f64> {
    let max = y.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > rel * max {
            let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den.abs() > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            out.push(x[i] + shift.clamp(-0.5, 0.5) * (x[i + 1] - x[i - 1]) / 2.0);
        }
    }
    out
}

/// Mean basis populations under a drive at `freq_mhz`.
fn response(cfg: &ScenarioConfig, layout: &Layout, s: &SpectroscopySettings, freq_mhz: f64) -> Result<Vec<f64>> {
    let space = &layout.space;
    let dq: Vec<f64> = cfg.qubits.iter().map(|q| q.working_freq() - freq_mhz).collect();
    let alphas: Vec<f64> = cfg.qubits.iter().map(|q| q.alpha_mhz).collect();
    let mut h = qubit_hamiltonian(&dq, &alphas, &cfg.j_mhz, layout.qubit_dim)?;
    let b = lowering_op(space, s.drive_qubit)?.into_matrix();
    h = h.add(&b.add(&b.adjoint()).scale(C64::new(TAU * s.amplitude_mhz, 0.0)));
    let h = LinearOperator::new(space.clone(), h)?;
    let collapse = collapse_set_for(cfg, layout)?;
    let liou = build_liouvillian(&h, &collapse)?;
    let d = space.total_dim();
    let obs: Vec<Observable> = (0..d)
        .map(|i| {
            let p = SparseMatrix::from_triplets(d, d, vec![(i, i, C64::new(1.0, 0.0))]);
            Ok(Observable { name: basis_label(&space.occupations(i)), op: LinearOperator::new(space.clone(), p)? })
        })
        .collect::<Result<_>>()?;
    let mut ground = vec![C64::default(); d];
    ground[0] = C64::new(1.0, 0.0);
    let rho0 = DensityMatrix::pure(space, &ground)?;
    let grid = uniform_grid(s.duration_us, s.duration_us / s.samples.max(1) as f64);
    let opts = EvolveOptions { check_positivity: false, ..Default::default() };
    let res = evolve(&liou, &rho0, &grid, &opts, &obs)?;
    Ok(res.observables.iter().map(|o| o.values.iter().sum::<f64>() / o.values.len() as f64).collect())
}

pub fn run_spectroscopy(
    config: &ScenarioConfig,
    frequencies_mhz: &[f64],
    settings: &SpectroscopySettings,
    execution: Execution,
) -> Result<Spectrum> {
    let mut cfg = config.clone().validate()?;
    if settings.drive_qubit >= cfg.n_qubits() {
        return Err(Error::InvalidParameter(format!("drive qubit {} out of range", settings.drive_qubit)));
    }
    if !(settings.amplitude_mhz > 0.0) || !(settings.duration_us > 0.0) {
        return Err(Error::InvalidParameter("spectroscopy amplitude and duration must be positive".into()));
    }
    if frequencies_mhz.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 drive frequencies".into()));
    }
    cfg.raman.clear();
    cfg.pumps.clear();
    let layout = Layout::new(cfg.n_qubits(), cfg.truncation.qubit_dim, vec![], 2)?;
    let rows: Vec<Result<Vec<f64>>> = execution.map(frequencies_mhz, |&f| response(&cfg, &layout, settings, f));
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let d = layout.space.total_dim();
    let labels: Vec<String> = (0..d).map(|i| basis_label(&layout.space.occupations(i))).collect();
    let populations: Vec<Vec<f64>> = (0..d).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let excited: Vec<f64> = rows.iter().map(|r| 1.0 - r[0]).collect();
    let peaks_mhz = find_peaks(frequencies_mhz, &excited, 0.2);
    Ok(Spectrum { frequencies_mhz: frequencies_mhz.to_vec(), labels, populations, excited, peaks_mhz })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_peak() {
        let x: Vec<f64> = (0..21).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|x| 1.0 / (1.0 + (x - 4.3f64).powi(2))).collect();
        let p = find_peaks(&x, &y, 0.2);
        assert_eq!(p.len(), 1);
        assert!((p[0] - 4.3).abs() < 0.1);
    }
}
