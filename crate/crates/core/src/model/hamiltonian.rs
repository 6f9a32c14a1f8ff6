use super::params::BodyParams;
use super::potential::{averaged_potential, AveragedPotential};
use super::ModelError;
use crate::pseries::TruncationPolicy;
use serde::{Deserialize, Serialize};

/// H(Σ₁, Σ₃, σ₁, σ₃) = n_o Σ₁²/2 − n_o Σ₁ + Ω̇ Σ₃ + ⟨V⟩, in rad/year.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub n_o: f64,
    pub omega_dot: f64,
    pub potential: AveragedPotential,
    pub params: BodyParams,
    pub trunc: TruncationPolicy,
}

/// cos K and sin K from the actions: cos K = 1 − Σ₃/Σ₁.
pub fn obliquity_from_actions(sigma1: f64, sigma3: f64) -> (f64, f64) {
    let c = 1.0 - sigma3 / sigma1;
    let s = (sigma3 * (2.0 * sigma1 - sigma3)).max(0.0).sqrt() / sigma1;
    (c, s)
}

impl HamiltonianModel {
    pub fn kinetic(&self, sigma1: f64, sigma3: f64) -> f64 {
        0.5 * self.n_o * sigma1 * sigma1 - self.n_o * sigma1 + self.omega_dot * sigma3
    }

    pub fn evaluate(&self, sigma1: f64, sigma3: f64, angle1: f64, angle3: f64) -> f64 {
        let (c, s) = obliquity_from_actions(sigma1, sigma3);
        self.kinetic(sigma1, sigma3) + self.potential.evaluate(c, s, angle1, angle3)
    }
}

pub fn assemble_hamiltonian(p: &BodyParams, trunc: &TruncationPolicy) -> Result<HamiltonianModel, ModelError> {
    let potential = averaged_potential(p, trunc)?;
    Ok(HamiltonianModel { n_o: p.n_o, omega_dot: p.omega_dot, potential, params: *p, trunc: *trunc })
}
