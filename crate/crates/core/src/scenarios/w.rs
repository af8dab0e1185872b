//! Three-qubit W-state stabilization.

use super::{run_scenario, with_initial, ScenarioReport};
use crate::device::{InitialState, ScenarioConfig};
use crate::error::{Error, Result};

pub const W_TRACKED: [&str; 8] = ["ggg", "W", "A", "B", "C", "D", "E", "eee"];

pub fn run_w(config: &ScenarioConfig, initial: Option<&InitialState>) -> Result<ScenarioReport> {
    if config.n_qubits() != 3 {
        return Err(Error::InvalidParameter(format!("W scenario needs 3 qubits, got {}", config.n_qubits())));
    }
    run_scenario(&with_initial(config, initial), &W_TRACKED)
}
