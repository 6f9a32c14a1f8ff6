use super::EquilError;
use crate::exec::Exec;
use crate::pseries::Poly4;
use serde::{Deserialize, Serialize};

pub const MIXED_TOL: f64 = 1e-14;

/// Result of removing the mixed quadratic couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct Untangled {
    pub alpha: f64,
    pub beta: f64,
    pub poly: Poly4,
    /// Largest |mixed quadratic coefficient| relative to the diagonal ones, before clean-up.
    pub mixed_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    /// Coefficients of Σ₁², Σ₁Σ₃, Σ₃²
    pub actions: [f64; 3],
    /// Coefficients of σ₁², σ₁σ₃, σ₃²
    pub angles: [f64; 3],
}

impl Quadratic {
    pub fn of(q: &Poly4) -> Self {
        Self {
            actions: [q.get([2, 0, 0, 0]), q.get([1, 1, 0, 0]), q.get([0, 2, 0, 0])],
            angles: [q.get([0, 0, 2, 0]), q.get([0, 0, 1, 1]), q.get([0, 0, 0, 2])],
        }
    }
}

/// Σ = A Σ', σ = B σ' for the untangling parameters.
pub fn substitution(alpha: f64, beta: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let g = 1.0 - alpha * beta;
    ([[g, -alpha], [beta, 1.0]], [[1.0, -beta], [alpha, g]])
}

/// Mixed coefficients after substitution, as functions of (α, β), and their Jacobian.
fn conditions(q: &Quadratic, a: f64, b: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let [m11, m13, m33] = q.actions;
    let [n11, n13, n33] = q.angles;
    let g = 1.0 - a * b;
    let f1 = -2.0 * a * g * m11 + (1.0 - 2.0 * a * b) * m13 + 2.0 * b * m33;
    let f2 = -2.0 * b * n11 + (1.0 - 2.0 * a * b) * n13 + 2.0 * a * g * n33;
    let j = [
        [-2.0 * m11 * (1.0 - 2.0 * a * b) - 2.0 * b * m13, 2.0 * a * a * m11 - 2.0 * a * m13 + 2.0 * m33],
        [-2.0 * b * n13 + 2.0 * n33 * (1.0 - 2.0 * a * b), -2.0 * n11 - 2.0 * a * n13 - 2.0 * a * a * n33],
    ];
    ([f1, f2], j)
}

pub fn untangle(q: &Poly4) -> Result<Untangled, EquilError> {
    untangle_with(q, Exec::default())
}

/// Newton on (α, β) from (0, 0), then the linear substitution of the full polynomial.
pub fn untangle_with(q: &Poly4, exec: Exec) -> Result<Untangled, EquilError> {
    let quad = Quadratic::of(q);
    let scale_a = quad.actions.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale_s = quad.angles.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale_a == 0.0 || scale_s == 0.0 {
        return Err(EquilError::UntanglingFailed("quadratic part is degenerate".into()));
    }
    let (mut a, mut b) = (0.0, 0.0);
    let mut converged = false;
    for _ in 0..60 {
        let (f, j) = conditions(&quad, a, b);
        if f[0].abs() <= 1e-16 * scale_a && f[1].abs() <= 1e-16 * scale_s {
            converged = true;
            break;
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(EquilError::UntanglingFailed("singular Jacobian".into()));
        }
        let da = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let db = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        a += da;
        b += db;
        if !(a.is_finite() && b.is_finite()) {
            break;
        }
        if da.abs() <= 2.0 * f64::EPSILON * a.abs() && db.abs() <= 2.0 * f64::EPSILON * b.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EquilError::UntanglingFailed(format!("Newton did not converge (alpha {a}, beta {b})")));
    }
    let (sa, sb) = substitution(a, b);
    let mut poly = q.linear_substitute(sa, sb, exec);
    let diag = Quadratic::of(&poly);
    let rel_a = diag.actions[1].abs() / diag.actions[0].abs().max(diag.actions[2].abs());
    let rel_s = diag.angles[1].abs() / diag.angles[0].abs().max(diag.angles[2].abs());
    let mixed_residual = rel_a.max(rel_s);
    if mixed_residual > MIXED_TOL {
        return Err(EquilError::UntanglingFailed(format!("mixed quadratic terms remain at {mixed_residual:e}")));
    }
    poly.remove([1, 1, 0, 0]);
    poly.remove([0, 0, 1, 1]);
    Ok(Untangled { alpha: a, beta: b, poly, mixed_residual })
}
