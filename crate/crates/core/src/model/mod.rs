//! Averaged resonant spin-orbit Hamiltonian built from physical parameters.

pub mod angles;
mod hamiltonian;
mod params;
mod potential;

pub use hamiltonian::{assemble_hamiltonian, obliquity_from_actions, HamiltonianModel};
pub use params::{derive_params, BodyParams, DerivedParams, G_SI, JULIAN_YEAR_S};
pub use potential::{averaged_potential, body_direction_series, AveragedPotential, Harmonic, KPoly};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid body parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Kepler(#[from] crate::orbexp::KeplerError),
}
