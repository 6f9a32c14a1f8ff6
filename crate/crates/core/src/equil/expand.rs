use super::bivariate::{binomial_series, Biv};
use super::{CassiniState, EquilError};
use crate::model::{Harmonic, HamiltonianModel};
use crate::pseries::accum::Accumulator;
use crate::pseries::{Poly4, TrigKind, TruncationPolicy};

/// Linear terms of the expansion must fall below this (rad/year).
pub const LINEAR_TOL: f64 = 1e-12;

/// Expansions about (Σ₁*, Σ₃*) in (ΔΣ₁, ΔΣ₃): the kinetic part and each
/// harmonic's (cos K, sin K) coefficient.
pub fn local_expansion(
    h: &HamiltonianModel,
    sigma1: f64,
    sigma3: f64,
    deg: usize,
) -> Result<(Biv, Vec<(Harmonic, Biv)>), EquilError> {
    let n_o = h.n_o;
    let mut kin = Biv::linear(0.5 * n_o * sigma1 * sigma1 - n_o * sigma1 + h.omega_dot * sigma3, n_o * (sigma1 - 1.0), h.omega_dot, deg);
    if deg >= 2 {
        kin.set(2, 0, 0.5 * n_o);
    }

    let max_a = h.potential.harmonics.values().flat_map(|p| p.coeffs.keys().map(|k| k.0)).max().unwrap_or(0);
    let max_b = h.potential.harmonics.values().flat_map(|p| p.coeffs.keys().map(|k| k.1)).max().unwrap_or(0);

    // 1/Σ₁
    let x = Biv::linear(0.0, 1.0, 0.0, deg);
    let inv: Vec<f64> = (0..=deg).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / sigma1.powi(k as i32 + 1)).collect();
    let inv_s1 = x.compose(&inv);
    // cos K = 1 − Σ₃/Σ₁
    let s3 = Biv::linear(sigma3, 0.0, 1.0, deg);
    let cos_k = Biv::constant(1.0, deg).axpy(-1.0, &s3.mul(&inv_s1));
    let sin_k = if max_b > 0 {
        if sigma3 <= 0.0 {
            return Err(EquilError::SingularExpansionPoint(sigma3));
        }
        // sin K = √Σ₃ · √(2Σ₁ − Σ₃) / Σ₁
        let root = binomial_series(0.5, deg);
        let y = Biv::linear(0.0, 0.0, 1.0 / sigma3, deg);
        let sqrt_s3 = y.compose(&root).scale(sigma3.sqrt());
        let q0 = 2.0 * sigma1 - sigma3;
        let t = Biv::linear(0.0, 2.0 / q0, -1.0 / q0, deg);
        let sqrt_q = t.compose(&root).scale(q0.sqrt());
        sqrt_s3.mul(&sqrt_q).mul(&inv_s1)
    } else {
        Biv::zero(deg)
    };

    let mut cpow = vec![Biv::constant(1.0, deg)];
    for a in 1..=max_a as usize {
        cpow.push(cpow[a - 1].mul(&cos_k));
    }
    let mut spow = vec![Biv::constant(1.0, deg)];
    for b in 1..=max_b as usize {
        spow.push(spow[b - 1].mul(&sin_k));
    }

    let mut out = Vec::new();
    for (hm, poly) in &h.potential.harmonics {
        let mut acc = Biv::zero(deg);
        for (&(a, b), &c) in &poly.coeffs {
            acc = acc.axpy(c, &cpow[a as usize].mul(&spow[b as usize]));
        }
        out.push((*hm, acc));
    }
    Ok((kin, out))
}

/// Taylor coefficients of kind(k1σ₁ + k3σ₃) as (c, d, coefficient of σ₁^c σ₃^d).
fn trig_taylor(kind: TrigKind, k1: i32, k3: i32, deg: usize) -> Vec<(usize, usize, f64)> {
    let mut fact = vec![1.0f64; deg + 1];
    for i in 1..=deg {
        fact[i] = fact[i - 1] * i as f64;
    }
    let mut out = Vec::new();
    for n in 0..=deg {
        let parity_ok = match kind {
            TrigKind::Cos => n % 2 == 0,
            TrigKind::Sin => n % 2 == 1,
        };
        if !parity_ok {
            continue;
        }
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for c in 0..=n {
            let d = n - c;
            let v = sign * (k1 as f64).powi(c as i32) * (k3 as f64).powi(d as i32) / (fact[c] * fact[d]);
            if v != 0.0 {
                out.push((c, d, v));
            }
        }
    }
    out
}

/// Poly4 of H about the equilibrium in (ΔΣ₁, ΔΣ₃, σ₁, σ₃); constant and
/// (checked) linear terms removed.
pub fn taylor_expand(h: &HamiltonianModel, eq: &CassiniState, trunc: &TruncationPolicy) -> Result<Poly4, EquilError> {
    let deg = trunc.max_poly_degree as usize;
    let (kin, harmonics) = local_expansion(h, eq.sigma1_star, eq.sigma3_star, deg)?;
    let mut acc: Accumulator<[u32; 4]> = Accumulator::new();
    for (i, j, c) in kin.iter() {
        if c != 0.0 {
            acc.add([i as u32, j as u32, 0, 0], c);
        }
    }
    for (hm, p) in &harmonics {
        let tt = trig_taylor(hm.kind, hm.k1, hm.k3, deg);
        for (i, j, pc) in p.iter() {
            if pc == 0.0 {
                continue;
            }
            for &(c, d, tc) in &tt {
                if i + j + c + d <= deg {
                    acc.add([i as u32, j as u32, c as u32, d as u32], pc * tc);
                }
            }
        }
    }
    let (map, _) = acc.finish();
    let mut poly = Poly4::from_map(map, *trunc);
    poly.remove([0, 0, 0, 0]);
    let lin = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]].map(|e| poly.remove(e));
    let worst = lin.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if worst > LINEAR_TOL {
        return Err(EquilError::InconsistentEquilibrium(lin[0], lin[1]));
    }
    Ok(poly)
}
