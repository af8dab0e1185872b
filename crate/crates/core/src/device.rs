//! Device parameters, drives and scenario configuration.
//!
//! Every frequency in a configuration is linear (MHz, the value of ω/2π);
//! lifetimes are in μs. Conversion to angular units happens where formulas
//! are evaluated.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A lifetime in μs that may be infinite (`"inf"` in JSON).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Lifetime(pub f64);

impl Lifetime {
    pub const INFINITE: Lifetime = Lifetime(f64::INFINITY);

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/T`, zero for an infinite lifetime.
    pub fn rate(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl Serialize for Lifetime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Lifetime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Lifetime(v)),
            Repr::Text(s) => parse_lifetime(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a lifetime token such as `27`, `inf` or `infinity`.
pub fn parse_lifetime(s: &str) -> std::result::Result<Lifetime, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(Lifetime::INFINITE),
        other => other
            .parse::<f64>()
            .map(Lifetime)
            .map_err(|_| format!("expected a number or \"inf\", got {s:?}")),
    }
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// A drive amplitude in MHz: a plain number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitude(pub C64);

impl Serialize for Amplitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Amplitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Complex([f64; 2]),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => Amplitude(C64::new(re, 0.0)),
            Repr::Complex([re, im]) => Amplitude(C64::new(re, im)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    #[serde(default)]
    pub label: String,
    pub omega_q_mhz: f64,
    pub alpha_mhz: f64,
    pub t1_us: Lifetime,
    pub t2e_us: Lifetime,
    /// Explicit dephasing time; overrides the value derived from `t2e_us`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_phi_us: Option<Lifetime>,
    /// Frequency the qubit is tuned to during the experiment; defaults to `omega_q_mhz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_freq_mhz: Option<f64>,
}

impl QubitParams {
    pub fn working_freq(&self) -> f64 {
        self.working_freq_mhz.unwrap_or(self.omega_q_mhz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorParams {
    #[serde(default)]
    pub label: String,
    pub omega_r_mhz: f64,
    pub kappa_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mhz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpDrive {
    /// One amplitude per qubit, Ω/2π in MHz.
    pub amplitudes_mhz: Vec<Amplitude>,
    pub frequency_mhz: f64,
    #[serde(default = "yes")]
    pub enabled: bool,
}

impl PumpDrive {
    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes_mhz.iter().map(|a| a.0.norm()).fold(0.0, f64::max)
    }

    pub fn is_active(&self) -> bool {
        self.enabled && self.max_amplitude() > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanDrive {
    /// Index of the driven resonator.
    pub resonator: usize,
    /// Δ_r = ω_r − ω_d in MHz.
    pub detuning_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bar: Option<f64>,
}

impl RamanDrive {
    /// Drive amplitude ε/2π in MHz, derived from `n_bar` if that is what was given.
    pub fn amplitude(&self, kappa_mhz: f64) -> f64 {
        match (self.amplitude_mhz, self.n_bar) {
            (Some(eps), _) => eps,
            (None, Some(n)) => crate::rates::drive_amplitude_for(n, self.detuning_mhz, kappa_mhz)
                .unwrap_or(0.0),
            (None, None) => 0.0,
        }
    }

    /// Mean photon number, derived from the amplitude if that is what was given.
    pub fn photon_number(&self, kappa_mhz: f64) -> f64 {
        match (self.n_bar, self.amplitude_mhz) {
            (Some(n), _) => n,
            (None, Some(eps)) => {
                crate::rates::photon_number(eps, self.detuning_mhz, kappa_mhz).unwrap_or(0.0)
            }
            (None, None) => 0.0,
        }
    }

    pub fn is_active(&self, kappa_mhz: f64) -> bool {
        self.amplitude(kappa_mhz) != 0.0
    }
}

/// Either a named state (`"gg"`, `"T"`, `"W"`, ...) or qubit occupations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(String),
    Occupations(Vec<usize>),
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Named(s) => write!(f, "{s}"),
            InitialState::Occupations(o) => {
                let parts: Vec<String> = o.iter().map(|n| n.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingConvention {
    /// Γφ = 1/T2e.
    Direct,
    /// Γφ = 1/T2e − 1/(2T1).
    PureDephasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonatorFrame {
    /// Resonators written as a coherent displacement plus a fluctuation mode.
    Displaced,
    /// Bare resonator operators with an explicit drive term.
    Lab,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    Auto,
    Nullspace,
    LongTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default = "two")]
    pub qubit_dim: usize,
    #[serde(default = "four")]
    pub resonator_dim: usize,
    /// Keep resonators without a Raman drive in the simulated space. They
    /// stay in vacuum, so dropping them is exact.
    #[serde(default)]
    pub keep_idle_resonators: bool,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { qubit_dim: 2, resonator_dim: 4, keep_idle_resonators: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_steady_method")]
    pub steady_method: SteadyMethod,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
    /// Whether reports include the Liouvillian steady state alongside the trajectory.
    #[serde(default = "yes")]
    pub compute_steady_state: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
            max_steps: default_max_steps(),
            steady_method: default_steady_method(),
            steady_tol: default_steady_tol(),
            compute_steady_state: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub qubits: Vec<QubitParams>,
    pub resonators: Vec<ResonatorParams>,
    /// Nearest-neighbour couplings J/2π in MHz, one per adjacent pair.
    pub j_mhz: Vec<f64>,
    #[serde(default)]
    pub pumps: Vec<PumpDrive>,
    #[serde(default)]
    pub raman: Vec<RamanDrive>,
    pub initial_state: InitialState,
    pub target: String,
    pub t_final_us: f64,
    pub t_step_us: f64,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_dephasing")]
    pub dephasing_convention: DephasingConvention,
    #[serde(default = "yes")]
    pub stark_compensation: bool,
    #[serde(default = "default_frame")]
    pub resonator_frame: ResonatorFrame,
    /// Times at which the fidelity is averaged to give the steady fidelity.
    #[serde(default = "default_window")]
    pub fidelity_window_us: Vec<f64>,
}

fn yes() -> bool {
    true
}
fn two() -> usize {
    2
}
fn four() -> usize {
    4
}
fn default_rtol() -> f64 {
    1e-7
}
fn default_atol() -> f64 {
    1e-9
}
fn default_max_steps() -> usize {
    2_000_000
}
fn default_steady_method() -> SteadyMethod {
    SteadyMethod::Auto
}
fn default_steady_tol() -> f64 {
    1e-8
}
fn default_dephasing() -> DephasingConvention {
    DephasingConvention::Direct
}
fn default_frame() -> ResonatorFrame {
    ResonatorFrame::Displaced
}
fn default_window() -> Vec<f64> {
    vec![4.0, 6.0, 8.0, 10.0]
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl ScenarioConfig {
    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Resonator indices with a nonzero Raman drive, ascending.
    pub fn driven_resonators(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .raman
            .iter()
            .filter(|r| r.resonator < self.resonators.len())
            .filter(|r| r.is_active(self.resonators[r.resonator].kappa_mhz))
            .map(|r| r.resonator)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn raman_for(&self, resonator: usize) -> Option<&RamanDrive> {
        self.raman.iter().find(|r| r.resonator == resonator)
    }

    /// Resonators present in the simulated space.
    pub fn simulated_resonators(&self) -> Vec<usize> {
        if self.truncation.keep_idle_resonators {
            (0..self.resonators.len()).collect()
        } else {
            self.driven_resonators()
        }
    }

    /// Fills defaults (labels) and checks every invariant, naming the
    /// offending field on failure.
    pub fn validate(mut self) -> Result<Self> {
        let l = self.qubits.len();
        if l == 0 {
            return Err(invalid("qubits", "at least one qubit is required"));
        }
        for (i, q) in self.qubits.iter_mut().enumerate() {
            if q.label.is_empty() {
                q.label = format!("Q{}", i + 1);
            }
        }
        for (i, r) in self.resonators.iter_mut().enumerate() {
            if r.label.is_empty() {
                r.label = format!("R{}", i + 1);
            }
        }
        for (i, q) in self.qubits.iter().enumerate() {
            let p = |f: &str| format!("qubits[{i}].{f}");
            if !(q.t1_us.0 > 0.0) {
                return Err(invalid(p("t1_us"), "T1 must be positive"));
            }
            if !(q.t2e_us.0 > 0.0) {
                return Err(invalid(p("t2e_us"), "T2e must be positive"));
            }
            if q.t2e_us.0 > 2.0 * q.t1_us.0 * 1.1 {
                return Err(invalid(p("t2e_us"), "T2e exceeds 2·T1 by more than 10%"));
            }
            if let Some(tp) = q.t_phi_us {
                if !(tp.0 > 0.0) {
                    return Err(invalid(p("t_phi_us"), "Tphi must be positive"));
                }
            }
            if !q.omega_q_mhz.is_finite() || !q.alpha_mhz.is_finite() {
                return Err(invalid(p("omega_q_mhz"), "frequencies must be finite"));
            }
        }
        if self.resonators.len() != l {
            return Err(invalid(
                "resonators",
                format!("expected one dedicated resonator per qubit ({l}), got {}", self.resonators.len()),
            ));
        }
        for (i, r) in self.resonators.iter().enumerate() {
            if !(r.kappa_mhz > 0.0) {
                return Err(invalid(format!("resonators[{i}].kappa_mhz"), "kappa must be positive"));
            }
        }
        if self.j_mhz.len() != l - 1 {
            return Err(invalid("j_mhz", format!("expected {} couplings, got {}", l - 1, self.j_mhz.len())));
        }
        for (k, pump) in self.pumps.iter().enumerate() {
            if pump.amplitudes_mhz.len() != l {
                return Err(invalid(
                    format!("pumps[{k}].amplitudes_mhz"),
                    format!("expected {l} amplitudes, got {}", pump.amplitudes_mhz.len()),
                ));
            }
            if pump.enabled && pump.max_amplitude() == 0.0 {
                return Err(invalid(
                    format!("pumps[{k}].amplitudes_mhz"),
                    "an enabled pump needs at least one nonzero amplitude",
                ));
            }
        }
        for (k, r) in self.raman.iter().enumerate() {
            let p = |f: &str| format!("raman[{k}].{f}");
            if r.resonator >= l {
                return Err(invalid(p("resonator"), format!("resonator index {} out of range", r.resonator)));
            }
            match (r.amplitude_mhz, r.n_bar) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(invalid(p("n_bar"), "give exactly one of amplitude_mhz and n_bar"))
                }
                (None, Some(n)) if !(n >= 0.0) => return Err(invalid(p("n_bar"), "n_bar must be >= 0")),
                _ => {}
            }
            if self.raman[..k].iter().any(|o| o.resonator == r.resonator) {
                return Err(invalid(p("resonator"), "resonator driven twice"));
            }
        }
        if !(self.t_final_us > 0.0) {
            return Err(invalid("t_final_us", "must be positive"));
        }
        if !(self.t_step_us > 0.0) || self.t_step_us > self.t_final_us {
            return Err(invalid("t_step_us", "must be positive and not exceed t_final_us"));
        }
        if self.truncation.qubit_dim < 2 {
            return Err(invalid("truncation.qubit_dim", "must be >= 2"));
        }
        if self.truncation.resonator_dim < 2 {
            return Err(invalid("truncation.resonator_dim", "must be >= 2"));
        }
        if !(self.solver.rtol > 0.0) || !(self.solver.atol > 0.0) {
            return Err(invalid("solver.rtol", "tolerances must be positive"));
        }
        if !(self.solver.steady_tol > 0.0) {
            return Err(invalid("solver.steady_tol", "must be positive"));
        }
        if self.fidelity_window_us.is_empty() {
            return Err(invalid("fidelity_window_us", "needs at least one time"));
        }
        if let Some(t) = self.fidelity_window_us.iter().find(|&&t| !(0.0..=self.t_final_us).contains(&t)) {
            return Err(invalid("fidelity_window_us", format!("time {t} outside [0, t_final_us]")));
        }
        match &self.initial_state {
            InitialState::Occupations(o) => {
                if o.len() != l {
                    return Err(invalid("initial_state", format!("expected {l} qubit occupations")));
                }
                if o.iter().any(|&n| n >= self.truncation.qubit_dim) {
                    return Err(invalid("initial_state", "occupation exceeds qubit truncation"));
                }
            }
            InitialState::Named(name) => {
                crate::hamiltonian::named_qubit_state(name, l, self.truncation.qubit_dim)
                    .map_err(|e| invalid("initial_state", e.to_string()))?;
            }
        }
        crate::hamiltonian::named_qubit_state(&self.target, l, self.truncation.qubit_dim)
            .map_err(|e| invalid("target", e.to_string()))?;
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parses and validates a JSON scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config { path, message: e.into_inner().to_string() }
    })?;
    cfg.validate()
}

pub fn load_scenario_file(path: impl AsRef<std::path::Path>) -> Result<ScenarioConfig> {
    load_scenario(&std::fs::read_to_string(path)?)
}

pub const BELL_JSON: &str = include_str!("../scenarios/bell.json");
pub const BELL_SINGLE_CHANNEL_JSON: &str = include_str!("../scenarios/bell_single_channel.json");
pub const BELL_PUMP2_JSON: &str = include_str!("../scenarios/bell_pump2.json");
pub const W_JSON: &str = include_str!("../scenarios/w.json");

/// Bundled scenarios by name.
pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    match name {
        "bell" => Some(BELL_JSON),
        "bell_single_channel" => Some(BELL_SINGLE_CHANNEL_JSON),
        "bell_pump2" => Some(BELL_PUMP2_JSON),
        "w" => Some(W_JSON),
        _ => None,
    }
}

pub fn default_bell_scenario() -> ScenarioConfig {
    load_scenario(BELL_JSON).expect("bundled bell.json is valid")
}

pub fn default_w_scenario() -> ScenarioConfig {
    load_scenario(W_JSON).expect("bundled w.json is valid")
}

pub fn default_bell_single_channel_scenario() -> ScenarioConfig {
    load_scenario(BELL_SINGLE_CHANNEL_JSON).expect("bundled bell_single_channel.json is valid")
}

pub fn default_bell_pump2_scenario() -> ScenarioConfig {
    load_scenario(BELL_PUMP2_JSON).expect("bundled bell_pump2.json is valid")
}

/// Relaxation and dephasing rates (μs⁻¹) of one qubit.
pub fn derive_rates(q: &QubitParams, convention: DephasingConvention) -> Result<(f64, f64)> {
    if !(q.t1_us.0 > 0.0) || !(q.t2e_us.0 > 0.0) {
        return Err(Error::InvalidParameter("lifetimes must be positive".into()));
    }
    let gamma1 = q.t1_us.rate();
    let gamma_phi = match q.t_phi_us {
        Some(tp) if !(tp.0 > 0.0) => {
            return Err(Error::InvalidParameter("Tphi must be positive".into()))
        }
        Some(tp) => tp.rate(),
        None => match convention {
            DephasingConvention::Direct => q.t2e_us.rate(),
            DephasingConvention::PureDephasing => (q.t2e_us.rate() - 0.5 * gamma1).max(0.0),
        },
    };
    Ok((gamma1, gamma_phi))
}
