//! Series algebra and perturbation machinery for resonant spin-orbit
//! Hamiltonians around a Cassini state.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`orbexp`] expands the two-body functions in eccentricity and mean anomaly.
//! 2. [`model`] builds the averaged potential and the resonant Hamiltonian.
//! 3. [`equil`] finds the Cassini equilibrium, Taylor-expands about it,
//!    diagonalizes the quadratic part and moves to action-angle variables.
//! 4. [`birkhoff`] computes the Birkhoff normal form by Lie series.
//! 5. [`stab`] turns the remainder into effective stability times.
//!
//! [`pipeline`] strings the steps together for one parameter set.

// `!(x > y)` is used on purpose to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birkhoff;
pub mod equil;
pub mod exec;
pub mod integrate;
pub mod model;
pub mod orbexp;
pub mod pipeline;
pub mod pseries;
pub mod stab;

pub use exec::Exec;
pub use pseries::{Poly4, PoissonSeries, PoissonTerm, TermKey, TrigKind, TruncationPolicy, WeightVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
