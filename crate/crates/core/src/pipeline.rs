//! Physical parameters to normal form in one call.

use crate::birkhoff::{normalize_with, BirkhoffError, NormalForm, DEFAULT_RESONANCE_THRESHOLD};
use crate::equil::{
    solve_cassini, taylor_expand, to_action_angle_with, untangle_with, CassiniState, EquilError, Linearization, Quadratic,
    Untangled,
};
use crate::exec::Exec;
use crate::model::{assemble_hamiltonian, BodyParams, HamiltonianModel, ModelError};
use crate::pseries::{Poly4, PoissonSeries, SeriesError, TruncationPolicy, WeightVector};
use crate::stab::{self, ExponentVariant, StabError, StabilityEstimate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("equil: {0}")]
    Equil(#[from] EquilError),
    #[error("birkhoff: {0}")]
    Birkhoff(#[from] BirkhoffError),
    #[error("stab: {0}")]
    Stab(#[from] StabError),
    #[error("pseries: {0}")]
    Series(#[from] SeriesError),
}

/// How the polydisk weights R_j are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSpec {
    /// R_j = a²/(2U_j*): ρ = 1 is a libration of amplitude `a` rad in σ'_j.
    Libration(f64),
    Fixed(WeightVector),
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Libration(0.1)
    }
}

impl WeightSpec {
    pub fn resolve(&self, u_star: [f64; 2]) -> Result<WeightVector, SeriesError> {
        match *self {
            WeightSpec::Libration(a) => WeightVector::new(a * a / (2.0 * u_star[0]), a * a / (2.0 * u_star[1])),
            WeightSpec::Fixed(w) => WeightVector::new(w.r1, w.r3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub trunc: TruncationPolicy,
    /// Normalization order r.
    pub order: usize,
    pub resonance_threshold: f64,
    pub c: f64,
    pub weights: WeightSpec,
    pub variant: ExponentVariant,
}

impl Settings {
    /// Order `r` with the smallest truncation that supports it and eccentricity degree 8.
    pub fn for_order(order: usize) -> Self {
        let deg = (order as u32 + 3).max(3);
        Self {
            trunc: TruncationPolicy::uniform(deg, 8).expect("positive degree"),
            order,
            resonance_threshold: DEFAULT_RESONANCE_THRESHOLD,
            c: 2.0,
            weights: WeightSpec::default(),
            variant: ExponentVariant::Printed,
        }
    }
}

/// Everything up to and including H⁽⁰⁾.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub model: HamiltonianModel,
    pub equilibrium: CassiniState,
    /// Taylor polynomial about the equilibrium in (ΔΣ₁, ΔΣ₃, σ₁, σ₃).
    pub taylor: Poly4,
    pub untangled: Untangled,
    pub h0: PoissonSeries,
    pub linearization: Linearization,
}

pub fn reduce(params: &BodyParams, trunc: &TruncationPolicy, exec: Exec) -> Result<Reduction, PipelineError> {
    let model = assemble_hamiltonian(params, trunc)?;
    let equilibrium = solve_cassini(&model)?;
    let taylor = taylor_expand(&model, &equilibrium, trunc)?;
    let untangled = untangle_with(&taylor, exec)?;
    let (h0, mut linearization) = to_action_angle_with(&untangled.poly, exec)?;
    let q = Quadratic::of(&taylor);
    linearization.mu = [q.actions[0], q.actions[1], q.actions[2], q.angles[0], q.angles[1], q.angles[2]];
    linearization.alpha = untangled.alpha;
    linearization.beta = untangled.beta;
    Ok(Reduction { model, equilibrium, taylor, untangled, h0, linearization })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub settings: Settings,
    pub reduction: Reduction,
    pub normal_form: NormalForm,
    pub weights: WeightVector,
}

impl Run {
    /// Remainder norms for even r up to the run's order.
    pub fn remainder_norms(&self) -> Result<Vec<(usize, f64)>, PipelineError> {
        Ok(stab::remainder_norms(&self.normal_form, &self.weights, self.settings.order)?)
    }

    pub fn estimate(&self, rho0: f64) -> Result<StabilityEstimate, PipelineError> {
        self.estimate_up_to(rho0, self.settings.order)
    }

    /// T(ρ₀) using only orders up to `r_max`.
    pub fn estimate_up_to(&self, rho0: f64, r_max: usize) -> Result<StabilityEstimate, PipelineError> {
        Ok(stab::effective_stability_time(
            &self.normal_form,
            rho0,
            &self.weights,
            self.settings.c,
            r_max,
            self.settings.variant,
        )?)
    }
}

pub fn run(params: &BodyParams, settings: &Settings) -> Result<Run, PipelineError> {
    run_with(params, settings, Exec::default())
}

pub fn run_with(params: &BodyParams, settings: &Settings, exec: Exec) -> Result<Run, PipelineError> {
    let reduction = reduce(params, &settings.trunc, exec)?;
    let normal_form = normalize_with(&reduction.h0, settings.order, settings.resonance_threshold, exec)?;
    let weights = settings.weights.resolve(reduction.linearization.u_star)?;
    Ok(Run { settings: *settings, reduction, normal_form, weights })
}
