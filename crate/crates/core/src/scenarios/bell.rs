//! Two-qubit Bell-state stabilization.

use serde::{Deserialize, Serialize};

use super::{run_scenario, with_initial, ScenarioReport};
use crate::device::{InitialState, PumpDrive, ScenarioConfig};
use crate::error::{Error, Result};

/// Populations reported for every Bell run.
pub const BELL_TRACKED: [&str; 6] = ["gg", "ge", "eg", "ee", "T", "S"];

/// Which engineered-dissipation channels are driven.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channels {
    R1,
    R2,
    Both,
}

/// Which pumps are on. `P1P2` adds a second pump at the `|T⟩` transition
/// (`2J` below the first) when the configuration does not define one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pumps {
    P1,
    P1P2,
}

/// Applies the channel and pump selection to a Bell configuration.
pub fn bell_config(config: &ScenarioConfig, channels: Channels, pumps: Pumps) -> Result<ScenarioConfig> {
    if config.n_qubits() != 2 {
        return Err(Error::InvalidParameter(format!("Bell scenario needs 2 qubits, got {}", config.n_qubits())));
    }
    let mut cfg = config.clone();
    let keep: &[usize] = match channels {
        Channels::R1 => &[0],
        Channels::R2 => &[1],
        Channels::Both => &[0, 1],
    };
    for &k in keep {
        if !cfg.driven_resonators().contains(&k) {
            return Err(Error::InvalidParameter(format!("channel R{} has no Raman drive in `{}`", k + 1, cfg.name)));
        }
    }
    cfg.raman.retain(|r| keep.contains(&r.resonator));

    match pumps {
        Pumps::P1 => {
            for p in cfg.pumps.iter_mut().skip(1) {
                p.enabled = false;
            }
        }
        Pumps::P1P2 => {
            let first = cfg
                .pumps
                .first()
                .cloned()
                .ok_or_else(|| Error::InvalidParameter("no pump configured".into()))?;
            if cfg.pumps.len() < 2 {
                cfg.pumps.push(PumpDrive {
                    frequency_mhz: first.frequency_mhz - 2.0 * cfg.j_mhz[0],
                    ..first
                });
            }
            for p in &mut cfg.pumps {
                p.enabled = true;
            }
        }
    }
    Ok(cfg)
}

/// Runs the Bell scenario with `|T⟩` fidelity and basis-state populations.
pub fn run_bell(
    config: &ScenarioConfig,
    channels: Channels,
    pumps: Pumps,
    initial: Option<&InitialState>,
) -> Result<ScenarioReport> {
    let cfg = with_initial(&bell_config(config, channels, pumps)?, initial);
    run_scenario(&cfg, &BELL_TRACKED)
}
