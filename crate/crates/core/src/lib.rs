//! Holevo information of a qubit probe driven by a classical oscillator
//! coordinate: the truncated Floquet propagator, closed-form position averages,
//! the asymptotic and short-time laws, and brute-force oracles for all of them.

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod holevo;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
