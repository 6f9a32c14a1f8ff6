//! Cassini equilibrium, Taylor expansion about it, untangling of the
//! quadratic part and the action-angle Taylor-Fourier Hamiltonian.

mod action_angle;
pub mod bivariate;
mod cassini;
mod expand;
mod untangle;

pub use action_angle::{to_action_angle, to_action_angle_with, Linearization};
pub use cassini::{solve_cassini, CassiniState, GRADIENT_TOL};
pub use expand::{local_expansion, taylor_expand, LINEAR_TOL};
pub use untangle::{untangle, untangle_with, Quadratic, Untangled, MIXED_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilError {
    #[error("equilibrium not found: {0}")]
    EquilibriumNotFound(String),
    #[error("inconsistent equilibrium: linear terms {0:e}, {1:e} do not vanish")]
    InconsistentEquilibrium(f64, f64),
    #[error("untangling failed: {0}")]
    UntanglingFailed(String),
    #[error("equilibrium is not elliptic: {0}")]
    NotElliptic(String),
    #[error("cannot expand at Sigma3 = {0}: sin K is not analytic there")]
    SingularExpansionPoint(f64),
}
