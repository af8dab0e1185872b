//! Simulation of engineered dissipative entanglement stabilization in
//! coupled transmon arrays.

pub mod device;
pub mod effective;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod modes;
pub mod parallel;
pub mod rates;
pub mod scenarios;

pub use error::{Error, Result};
