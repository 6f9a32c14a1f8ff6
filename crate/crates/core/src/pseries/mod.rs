//! Sparse Poisson series in half-integer action powers and plain
//! four-variable polynomials.

pub(crate) mod accum;
pub mod io;
mod poisson;
mod poly4;
pub mod trig;

pub use accum::NOISE_REL;
pub use poisson::{
    multiply, multiply_with, poisson_bracket, poisson_bracket_with, PoissonSeries, PoissonTerm, SeriesEvaluator, TermKey,
};
pub use poly4::Poly4;
pub use trig::TrigKind;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("singular derivative: result would carry negative sqrt-action exponents {exponents:?}")]
    SingularDerivative { exponents: (i64, i64) },
    #[error("negative action {0} in evaluation")]
    NegativeAction(f64),
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid truncation policy: {0}")]
    InvalidTruncation(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_sqrtu_degree: u32,
    pub max_poly_degree: u32,
    pub max_ecc_degree: u32,
}

impl TruncationPolicy {
    pub fn new(max_sqrtu_degree: u32, max_poly_degree: u32, max_ecc_degree: u32) -> Result<Self, SeriesError> {
        if max_sqrtu_degree < 1 || max_poly_degree < 1 || max_ecc_degree < 1 {
            return Err(SeriesError::InvalidTruncation(format!(
                "all degrees must be >= 1, got ({max_sqrtu_degree}, {max_poly_degree}, {max_ecc_degree})"
            )));
        }
        Ok(Self { max_sqrtu_degree, max_poly_degree, max_ecc_degree })
    }

    /// Same degree for the Poisson series and the polynomial expansion.
    pub fn uniform(degree: u32, max_ecc_degree: u32) -> Result<Self, SeriesError> {
        Self::new(degree, degree, max_ecc_degree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub r1: f64,
    pub r3: f64,
}

impl WeightVector {
    pub fn new(r1: f64, r3: f64) -> Result<Self, SeriesError> {
        if !(r1 > 0.0 && r3 > 0.0 && r1.is_finite() && r3.is_finite()) {
            return Err(SeriesError::InvalidWeights(format!("R must be positive, got ({r1}, {r3})")));
        }
        Ok(Self { r1, r3 })
    }

    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            self.r1
        } else {
            self.r3
        }
    }

    pub fn scaled(&self, rho: f64) -> Self {
        Self { r1: rho * self.r1, r3: rho * self.r3 }
    }
}
