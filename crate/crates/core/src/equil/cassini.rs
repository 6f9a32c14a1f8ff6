use super::expand::local_expansion;
use super::EquilError;
use crate::model::HamiltonianModel;
use crate::pseries::TrigKind;
use serde::{Deserialize, Serialize};

const MAX_ITER: usize = 100;
pub const GRADIENT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CassiniState {
    pub sigma1_star: f64,
    pub sigma3_star: f64,
    /// Obliquity at equilibrium, cos K* = 1 − Σ₃*/Σ₁*.
    pub k_star: f64,
    /// max |∂H/∂Σ_j| / n_o at the returned point.
    pub gradient_residual: f64,
    pub iterations: usize,
}

/// Gradient and Hessian of H(Σ₁, Σ₃, 0, 0).
fn grad_hess(h: &HamiltonianModel, s1: f64, s3: f64) -> Result<([f64; 2], [[f64; 2]; 2]), EquilError> {
    let (kin, harmonics) = local_expansion(h, s1, s3, 2)?;
    let mut tot = kin;
    for (hm, p) in &harmonics {
        if hm.kind == TrigKind::Cos {
            tot = tot.add(p);
        }
    }
    let g = [tot.get(1, 0), tot.get(0, 1)];
    let hs = [[2.0 * tot.get(2, 0), tot.get(1, 1)], [tot.get(1, 1), 2.0 * tot.get(0, 2)]];
    Ok((g, hs))
}

/// Newton iteration on ∇H = 0 at σ₁ = σ₃ = 0, seeded at (1, 1 − cos i).
pub fn solve_cassini(h: &HamiltonianModel) -> Result<CassiniState, EquilError> {
    let mut s1 = 1.0;
    let mut s3 = 1.0 - h.params.i_rad.cos();
    let scale = h.n_o.abs();
    let mut residual = f64::INFINITY;
    for it in 0..MAX_ITER {
        let (g, hs) = grad_hess(h, s1, s3)?;
        residual = g[0].abs().max(g[1].abs()) / scale;
        if !residual.is_finite() {
            break;
        }
        if residual <= 1e-3 * GRADIENT_TOL {
            let k_star = (1.0 - s3 / s1).clamp(-1.0, 1.0).acos();
            return Ok(CassiniState { sigma1_star: s1, sigma3_star: s3, k_star, gradient_residual: residual, iterations: it });
        }
        let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(EquilError::EquilibriumNotFound(format!("singular Hessian at ({s1}, {s3})")));
        }
        let d1 = -(hs[1][1] * g[0] - hs[0][1] * g[1]) / det;
        let d3 = -(-hs[1][0] * g[0] + hs[0][0] * g[1]) / det;
        // the obliquity action must stay inside (0, 2Σ₁]
        let mut t = 1.0;
        while s3 > 0.0 && (s3 + t * d3 <= 0.0 || s1 + t * d1 <= 0.0) && t > 1e-12 {
            t *= 0.5;
        }
        let (n1, n3) = (s1 + t * d1, s3 + t * d3);
        let small = (t * d1).abs() <= 4.0 * f64::EPSILON * s1.abs().max(1.0)
            && (t * d3).abs() <= 4.0 * f64::EPSILON * s3.abs().max(f64::MIN_POSITIVE);
        s1 = n1;
        s3 = n3;
        if small || residual == 0.0 {
            let (g, _) = grad_hess(h, s1, s3)?;
            residual = g[0].abs().max(g[1].abs()) / scale;
            if residual <= GRADIENT_TOL {
                let k_star = (1.0 - s3 / s1).clamp(-1.0, 1.0).acos();
                return Ok(CassiniState { sigma1_star: s1, sigma3_star: s3, k_star, gradient_residual: residual, iterations: it + 1 });
            }
        }
    }
    Err(EquilError::EquilibriumNotFound(format!(
        "no convergence after {MAX_ITER} iterations (last point ({s1}, {s3}), residual {residual:e})"
    )))
}
