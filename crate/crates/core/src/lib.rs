//! Dispersion, phase matching and photon-flux model for mono-stimulated
//! triple-photon generation in KTP.

pub mod config;
pub mod dispersion;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod phase_matching;
pub mod tpg_model;
pub mod units;

pub use error::{Result, TpgError};
