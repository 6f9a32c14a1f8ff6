use super::untangle::Quadratic;
use super::EquilError;
use crate::exec::Exec;
use crate::pseries::accum::{merge_all, Accumulator};
use crate::pseries::trig::{self, TrigKind};
use crate::pseries::{Poly4, PoissonSeries, TermKey};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    /// Quadratic coefficients before untangling: Σ₁², Σ₁Σ₃, Σ₃², σ₁², σ₁σ₃, σ₃².
    pub mu: [f64; 6],
    /// Diagonal coefficients after untangling: Σ'₁², Σ'₃², σ'₁², σ'₃².
    pub mu_diag: [f64; 4],
    pub alpha: f64,
    pub beta: f64,
    pub u_star: [f64; 2],
    pub omega: [f64; 2],
}

type TrigTerms = Vec<(f64, TrigKind, i32)>;

/// cos^a u · sin^c u as (coeff, kind, k ≥ 0).
fn trig_power(a: u32, c: u32, cache: &mut HashMap<(u32, u32), TrigTerms>) -> TrigTerms {
    if let Some(v) = cache.get(&(a, c)) {
        return v.clone();
    }
    let v = if a == 0 && c == 0 {
        vec![(1.0, TrigKind::Cos, 0)]
    } else {
        let (prev, kind) = if a > 0 { (trig_power(a - 1, c, cache), TrigKind::Cos) } else { (trig_power(a, c - 1, cache), TrigKind::Sin) };
        let mut acc: Accumulator<(i32, TrigKind)> = Accumulator::new();
        for (coef, pk, k) in prev {
            for (f, kk, [w]) in trig::product(pk, &[k], kind, &[1]) {
                if let Some((s, kk, [w])) = trig::canonical(kk, [w]) {
                    acc.add((w, kk), s * f * coef);
                }
            }
        }
        let (m, _) = acc.finish();
        m.into_iter().map(|((k, kind), c)| (c, kind, k)).collect()
    };
    cache.insert((a, c), v.clone());
    v
}

pub fn to_action_angle(q: &Poly4) -> Result<(PoissonSeries, Linearization), EquilError> {
    to_action_angle_with(q, Exec::default())
}

/// Rescaled polar substitution Σ'_j = √(2U_j/U_j*) cos u_j, σ'_j = √(2U_jU_j*) sin u_j.
///
/// The returned [`Linearization`] describes `q` itself (α = β = 0); callers that
/// untangled first fill in the original coefficients and parameters.
pub fn to_action_angle_with(q: &Poly4, exec: Exec) -> Result<(PoissonSeries, Linearization), EquilError> {
    let quad = Quadratic::of(q);
    if quad.actions[1] != 0.0 || quad.angles[1] != 0.0 {
        return Err(EquilError::NotElliptic("quadratic part is not diagonal".into()));
    }
    let ms = [quad.actions[0], quad.actions[2]];
    let ma = [quad.angles[0], quad.angles[2]];
    let mut u_star = [0.0; 2];
    let mut omega = [0.0; 2];
    for j in 0..2 {
        if !(ms[j] * ma[j] > 0.0) {
            return Err(EquilError::NotElliptic(format!(
                "degree of freedom {}: product of diagonal coefficients {:e} is not positive",
                j + 1,
                ms[j] * ma[j]
            )));
        }
        u_star[j] = (ms[j] / ma[j]).sqrt();
        omega[j] = 2.0 * ms[j].signum() * (ms[j] * ma[j]).sqrt();
    }
    let trunc = q.trunc();
    let maxd = q.max_degree();
    let mut cache = HashMap::new();
    for a in 0..=maxd {
        for c in 0..=(maxd - a) {
            trig_power(a, c, &mut cache);
        }
    }
    // per-variable scale factors √(2/U*) for Σ' and √(2U*) for σ'
    let fac = [(2.0 / u_star[0]).sqrt(), (2.0 / u_star[1]).sqrt(), (2.0 * u_star[0]).sqrt(), (2.0 * u_star[1]).sqrt()];
    let items: Vec<([u32; 4], f64)> = q.iter().collect();
    let blocks = exec.map_blocks(&items, 64, |chunk| {
        let mut acc = Accumulator::new();
        for (e, coef) in chunk {
            let [a, b, c, d] = *e;
            let m1 = a + c;
            let m3 = b + d;
            if m1 + m3 > trunc.max_sqrtu_degree {
                acc.dropped += coef.abs();
                continue;
            }
            let scale = coef * (0..4).map(|j| fac[j].powi(e[j] as i32)).product::<f64>();
            let t1 = &cache[&(a, c)];
            let t3 = &cache[&(b, d)];
            for (c1, kind1, k1) in t1 {
                for (c3, kind3, k3) in t3 {
                    for (f, kind, w) in trig::product(*kind1, &[*k1, 0], *kind3, &[0, *k3]) {
                        if let Some((s, kind, [w1, w3])) = trig::canonical(kind, w) {
                            acc.add(TermKey::new(m1, m3, kind, w1, w3), s * f * scale * c1 * c3);
                        }
                    }
                }
            }
        }
        acc
    });
    let h0 = PoissonSeries::from_accumulator(merge_all(blocks), trunc, 0.0);
    let mu = [ms[0], 0.0, ms[1], ma[0], 0.0, ma[1]];
    let lin = Linearization { mu, alpha: 0.0, beta: 0.0, mu_diag: [ms[0], ms[1], ma[0], ma[1]], u_star, omega };
    Ok((h0, lin))
}
