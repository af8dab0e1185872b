//! End-to-end scenarios built on the dispersive model.

pub mod bell;
pub mod fit;
pub mod mitigation;
pub mod report;
pub mod spectroscopy;
pub mod sweep;
pub mod w;

use serde::{Deserialize, Serialize};

use crate::device::{InitialState, ScenarioConfig, SteadyMethod};
use crate::error::Result;
use crate::hamiltonian::{build_dispersive, collapse_set, initial_qubit_state, named_qubit_state, HamiltonianModel};
use crate::hilbert::{expectation, DensityMatrix};
use crate::lindblad::{
    build_liouvillian, evolve, steady_state, uniform_grid, EvolutionDiagnostics, EvolveOptions, Liouvillian,
    Observable, ObservableTrace, SteadyMethodUsed, SteadyOptions,
};

pub use bell::{run_bell, Channels, Pumps};
pub use fit::{fit_exponential, ExpFit};
pub use mitigation::{apply_readout_mitigation, Mitigated, ReadoutMatrix};
pub use report::{write_report, write_sweep_csv};
pub use spectroscopy::{run_spectroscopy, Spectrum};
pub use sweep::{run_sweep, SweepAxis, SweepResult, SweepRow};
pub use w::run_w;

/// Everything a scenario run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub target: String,
    pub initial_state: String,
    pub hilbert_dim: usize,
    /// Mean of `F(t)` over the configured window times.
    pub steady_fidelity: f64,
    /// Target fidelity of the Liouvillian steady state, when computed.
    pub asymptotic_fidelity: Option<f64>,
    pub steady_method: Option<SteadyMethodUsed>,
    pub steady_residual: Option<f64>,
    /// `τ` of an exponential fit to `F(t)`.
    pub fitted_ts_us: Option<f64>,
    pub fit: Option<ExpFit>,
    pub times_us: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub populations: Vec<ObservableTrace>,
    pub diagnostics: EvolutionDiagnostics,
    pub notes: Vec<String>,
    pub config: ScenarioConfig,
}

impl ScenarioReport {
    pub fn population(&self, name: &str) -> Option<&[f64]> {
        self.populations.iter().find(|p| p.name == name).map(|p| p.values.as_slice())
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("nonempty trace")
    }
}

/// Model, dissipators and Liouvillian for a configuration.
pub struct Prepared {
    pub model: HamiltonianModel,
    pub liouvillian: Liouvillian,
}

pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    let model = build_dispersive(cfg)?;
    let collapse = collapse_set(cfg, &model)?;
    let liouvillian = build_liouvillian(&model.h, &collapse)?;
    Ok(Prepared { model, liouvillian })
}

/// Average of `values` at the grid points nearest to `window`; window times
/// past the end of the run are ignored, and an empty window falls back to
/// the last sample.
pub fn window_average(times: &[f64], values: &[f64], window: &[f64]) -> f64 {
    let t_end = times.last().copied().unwrap_or(0.0);
    let picks: Vec<f64> = window
        .iter()
        .filter(|&&w| w <= t_end + 1e-9)
        .map(|&w| {
            let i = times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - w).abs().total_cmp(&(b.1 - w).abs()))
                .map(|(i, _)| i)
                .expect("nonempty grid");
            values[i]
        })
        .collect();
    if picks.is_empty() {
        *values.last().expect("nonempty trace")
    } else {
        picks.iter().sum::<f64>() / picks.len() as f64
    }
}

pub(crate) fn evolve_options(cfg: &ScenarioConfig) -> EvolveOptions {
    EvolveOptions {
        rtol: cfg.solver.rtol,
        atol: cfg.solver.atol,
        max_steps: cfg.solver.max_steps,
        ..Default::default()
    }
}

pub(crate) fn steady_options(cfg: &ScenarioConfig) -> SteadyOptions {
    SteadyOptions {
        method: cfg.solver.steady_method,
        tol: cfg.solver.steady_tol,
        ..Default::default()
    }
}

/// Runs `cfg` from its initial state, tracking the target fidelity and the
/// populations of the named qubit states (reported as `pop_<name>`).
pub fn run_scenario(cfg: &ScenarioConfig, tracked: &[&str]) -> Result<ScenarioReport> {
    let cfg = cfg.clone().validate()?;
    let prepared = prepare(&cfg)?;
    let layout = &prepared.model.layout;
    let (l, qd) = (cfg.n_qubits(), cfg.truncation.qubit_dim);

    let target = named_qubit_state(&cfg.target, l, qd)?;
    let target_proj = layout.qubit_projector(&target)?;
    let mut observables = vec![Observable { name: "fidelity".into(), op: target_proj.clone() }];
    for name in tracked {
        let psi = named_qubit_state(name, l, qd)?;
        observables.push(Observable { name: format!("pop_{name}"), op: layout.qubit_projector(&psi)? });
    }
    let psi0 = layout.lift(&initial_qubit_state(&cfg.initial_state, l, qd)?)?;
    let rho0 = DensityMatrix::pure(&layout.space, &psi0)?;
    let grid = uniform_grid(cfg.t_final_us, cfg.t_step_us);
    let res = evolve(&prepared.liouvillian, &rho0, &grid, &evolve_options(&cfg), &observables)?;

    let mut traces = res.observables.into_iter();
    let fidelity = traces.next().expect("fidelity trace").values;
    let populations: Vec<ObservableTrace> = traces.collect();
    let steady_fidelity = window_average(&res.times, &fidelity, &cfg.fidelity_window_us);

    let mut notes = prepared.model.notes.clone();
    let (mut asymptotic_fidelity, mut steady_method, mut steady_residual) = (None, None, None);
    if cfg.solver.compute_steady_state {
        match steady_state(&prepared.liouvillian, &steady_options(&cfg)) {
            Ok(ss) => {
                asymptotic_fidelity = Some(expectation(&target_proj, &ss.rho)?.re);
                steady_method = Some(ss.method);
                steady_residual = Some(ss.residual);
            }
            Err(e) => notes.push(format!("steady state unavailable: {e}")),
        }
    }
    let fit = match fit_exponential(&res.times, &fidelity) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("fidelity fit unavailable: {e}"));
            None
        }
    };
    Ok(ScenarioReport {
        scenario: cfg.name.clone(),
        target: cfg.target.clone(),
        initial_state: cfg.initial_state.to_string(),
        hilbert_dim: layout.space.total_dim(),
        steady_fidelity,
        asymptotic_fidelity,
        steady_method,
        steady_residual,
        fitted_ts_us: fit.map(|f| f.tau),
        fit,
        times_us: res.times,
        fidelity,
        populations,
        diagnostics: res.diagnostics,
        notes,
        config: cfg,
    })
}

/// Target fidelity of the steady state computed with a specific method.
pub fn steady_fidelity_with(cfg: &ScenarioConfig, method: SteadyMethod) -> Result<(f64, f64)> {
    let cfg = cfg.clone().validate()?;
    let prepared = prepare(&cfg)?;
    let layout = &prepared.model.layout;
    let target = named_qubit_state(&cfg.target, cfg.n_qubits(), cfg.truncation.qubit_dim)?;
    let proj = layout.qubit_projector(&target)?;
    let mut opts = steady_options(&cfg);
    opts.method = method;
    let ss = steady_state(&prepared.liouvillian, &opts)?;
    Ok((expectation(&proj, &ss.rho)?.re, ss.residual))
}

/// Population of `to` after evolving the qubit state `from` (resonators in
/// vacuum) for `t_us`, sampled on `n` evenly spaced points.
pub fn transfer_trace(cfg: &ScenarioConfig, from: &str, to: &[&str], t_us: f64, n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let cfg = cfg.clone().validate()?;
    let prepared = prepare(&cfg)?;
    let layout = &prepared.model.layout;
    let (l, qd) = (cfg.n_qubits(), cfg.truncation.qubit_dim);
    let observables = to
        .iter()
        .map(|name| {
            Ok(Observable { name: (*name).into(), op: layout.qubit_projector(&named_qubit_state(name, l, qd)?)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let rho0 = DensityMatrix::pure(&layout.space, &layout.lift(&named_qubit_state(from, l, qd)?)?)?;
    let grid = uniform_grid(t_us, t_us / (n.max(2) - 1) as f64);
    let res = evolve(&prepared.liouvillian, &rho0, &grid, &evolve_options(&cfg), &observables)?;
    Ok((res.times, res.observables.into_iter().map(|o| o.values).collect()))
}

/// Disables every pump and removes all intrinsic qubit decoherence.
pub fn bath_only(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    for p in &mut c.pumps {
        p.enabled = false;
    }
    remove_decoherence(&mut c);
    c
}

/// Sets every qubit lifetime to infinity.
pub fn remove_decoherence(cfg: &mut ScenarioConfig) {
    use crate::device::Lifetime;
    for q in &mut cfg.qubits {
        q.t1_us = Lifetime(f64::INFINITY);
        q.t2e_us = Lifetime(f64::INFINITY);
        q.t_phi_us = Some(Lifetime(f64::INFINITY));
    }
}

/// Replaces the configured initial state.
pub fn with_initial(cfg: &ScenarioConfig, initial: Option<&InitialState>) -> ScenarioConfig {
    let mut c = cfg.clone();
    if let Some(i) = initial {
        c.initial_state = i.clone();
    }
    c
}
