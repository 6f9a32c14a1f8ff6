//! Birkhoff normal form of H⁽⁰⁾ by Lie series.
//!
//! Order `s` refers to the block of √U-degree `s + 2`; normalizing to order `r`
//! leaves H^(r) angle-free up to degree `r + 2`.

use crate::exec::Exec;
use crate::pseries::{poisson_bracket_with, PoissonSeries, PoissonTerm, SeriesError, TermKey, TrigKind, TruncationPolicy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_RESONANCE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BirkhoffError {
    #[error("small divisor {divisor:e} for wave ({}, {}) at order {step}", k[0], k[1])]
    Resonance { step: usize, k: [i32; 2], divisor: f64 },
    #[error("truncation degree {have} is too low for order {order} (need at least {need})")]
    TruncationTooLow { order: usize, have: u32, need: u32 },
    #[error("quadratic part is not of the form omega . U")]
    MissingLinearPart,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorEntry {
    pub k: [i32; 2],
    pub divisor: f64,
    pub degree: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmallDivisorLog {
    pub entries: Vec<DivisorEntry>,
    pub min_abs_divisor: f64,
}

impl SmallDivisorLog {
    fn new() -> Self {
        Self { entries: Vec::new(), min_abs_divisor: f64::INFINITY }
    }

    fn record(&mut self, seen: BTreeMap<(u32, [i32; 2]), f64>) {
        for ((degree, k), divisor) in seen {
            self.min_abs_divisor = self.min_abs_divisor.min(divisor.abs());
            self.entries.push(DivisorEntry { k, divisor, degree });
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,k2,divisor\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{:.12e}\n", e.k[0], e.k[1], e.divisor));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub order: usize,
    pub omega: [f64; 2],
    /// H^(r), the full transformed Hamiltonian.
    pub hamiltonian: PoissonSeries,
    /// `z[s]` is the normal-form block of √U-degree `s + 2`.
    pub z: Vec<PoissonSeries>,
    /// `chi[s - 1]` is χ^(s).
    pub chi: Vec<PoissonSeries>,
    /// Terms of H^(r) above √U-degree `r + 2`.
    pub remainder: PoissonSeries,
    /// `stage_remainders[r']` is the degree-(r' + 3) block of H^(r'), for r' = 0..=order.
    pub stage_remainders: Vec<PoissonSeries>,
    pub divisor_log: SmallDivisorLog,
    /// Relative residual of the homological equation at each step.
    pub residuals: Vec<f64>,
}

impl NormalForm {
    /// Term counts of the normal-form blocks, indexed by √U-degree.
    pub fn z_counts(&self) -> Vec<(u32, usize)> {
        self.z.iter().enumerate().map(|(s, z)| (s as u32 + 2, z.len())).collect()
    }
}

fn omega_of(h: &PoissonSeries) -> Result<[f64; 2], BirkhoffError> {
    let w1 = h.coeff(2, 0, TrigKind::Cos, 0, 0);
    let w3 = h.coeff(0, 2, TrigKind::Cos, 0, 0);
    if w1 == 0.0 || w3 == 0.0 || h.homogeneous_part(2).len() != 2 {
        return Err(BirkhoffError::MissingLinearPart);
    }
    Ok([w1, w3])
}

fn linear_part(omega: [f64; 2], trunc: TruncationPolicy) -> PoissonSeries {
    PoissonSeries::action(0, trunc).scale(omega[0]).add(&PoissonSeries::action(1, trunc).scale(omega[1]))
}

/// Solves {χ, ω·U} + R = Z for a homogeneous block R.
pub fn solve_homological(
    rterm: &PoissonSeries,
    omega: [f64; 2],
    threshold: f64,
) -> Result<(PoissonSeries, PoissonSeries), BirkhoffError> {
    let (chi, z, _) = solve_logged(rterm, omega, threshold, 0)?;
    Ok((chi, z))
}

/// Generator, normal-form part and the divisors used, keyed by (degree, k).
type Solved = (PoissonSeries, PoissonSeries, BTreeMap<(u32, [i32; 2]), f64>);

fn solve_logged(
    rterm: &PoissonSeries,
    omega: [f64; 2],
    threshold: f64,
    step: usize,
) -> Result<Solved, BirkhoffError> {
    let trunc = rterm.trunc();
    let mut chi = Vec::new();
    let mut z = Vec::new();
    let mut seen = BTreeMap::new();
    for t in rterm.iter() {
        let k = t.key.wave();
        if t.key.is_angle_free() {
            z.push(t);
            continue;
        }
        let d = k[0] as f64 * omega[0] + k[1] as f64 * omega[1];
        if !(d.abs() > threshold) {
            return Err(BirkhoffError::Resonance { step, k, divisor: d });
        }
        seen.insert((t.key.degree(), k), d);
        let (kind, c) = match t.key.kind {
            TrigKind::Cos => (TrigKind::Sin, -t.coeff / d),
            TrigKind::Sin => (TrigKind::Cos, t.coeff / d),
        };
        chi.push(PoissonTerm { coeff: c, key: TermKey { kind, ..t.key } });
    }
    Ok((PoissonSeries::from_terms(chi, trunc), PoissonSeries::from_terms(z, trunc), seen))
}

/// exp(L_χ) H = Σ_n L_χⁿ H / n!, truncated.
pub fn lie_transform(h: &PoissonSeries, chi: &PoissonSeries, trunc: &TruncationPolicy) -> Result<PoissonSeries, SeriesError> {
    lie_transform_with(h, chi, trunc, Exec::default())
}

pub fn lie_transform_with(
    h: &PoissonSeries,
    chi: &PoissonSeries,
    trunc: &TruncationPolicy,
    exec: Exec,
) -> Result<PoissonSeries, SeriesError> {
    let mut out = h.with_trunc(*trunc);
    if chi.is_empty() {
        return Ok(out);
    }
    let mut term = out.clone();
    let mut n = 1.0;
    loop {
        term = poisson_bracket_with(chi, &term, trunc, exec)?.scale(1.0 / n);
        if term.is_empty() {
            break;
        }
        out = out.add(&term);
        n += 1.0;
    }
    Ok(out)
}

fn max_rel(a: &PoissonSeries, scale: f64) -> f64 {
    let m = a.terms().values().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale > 0.0 {
        m / scale
    } else {
        m
    }
}

/// Normalizes H⁽⁰⁾ to order `r` (blocks up to √U-degree `r + 2`).
pub fn normalize(h0: &PoissonSeries, r: usize, threshold: f64) -> Result<NormalForm, BirkhoffError> {
    normalize_with(h0, r, threshold, Exec::default())
}

pub fn normalize_with(h0: &PoissonSeries, r: usize, threshold: f64, exec: Exec) -> Result<NormalForm, BirkhoffError> {
    let trunc = h0.trunc();
    let need = r as u32 + 3;
    if r > 0 && trunc.max_sqrtu_degree < need {
        return Err(BirkhoffError::TruncationTooLow { order: r, have: trunc.max_sqrtu_degree, need });
    }
    let omega = omega_of(h0)?;
    let lin = linear_part(omega, trunc);
    let mut h = h0.clone();
    let mut chis = Vec::with_capacity(r);
    let mut stage = Vec::with_capacity(r + 1);
    let mut residuals = Vec::with_capacity(r);
    let mut log = SmallDivisorLog::new();
    stage.push(h.homogeneous_part(3));
    for s in 1..=r {
        let deg = s as u32 + 2;
        let block = h.homogeneous_part(deg);
        let (chi, z, seen) = solve_logged(&block, omega, threshold, s)?;
        log.record(seen);
        let check = poisson_bracket_with(&chi, &lin, &trunc, exec)?.add(&block).sub(&z);
        let scale = block.terms().values().fold(0.0f64, |m, c| m.max(c.abs()));
        residuals.push(max_rel(&check, scale));
        h = lie_transform_with(&h, &chi, &trunc, exec)?;
        h.replace_block(deg, &z);
        stage.push(h.homogeneous_part(deg + 1));
        chis.push(chi);
    }
    let top = r as u32 + 2;
    let z = (0..=r as u32).map(|s| h.homogeneous_part(s + 2)).collect();
    let remainder = h.filter(|k| k.degree() > top);
    Ok(NormalForm {
        order: r,
        omega,
        hamiltonian: h,
        z,
        chi: chis,
        remainder,
        stage_remainders: stage,
        divisor_log: log,
        residuals,
    })
}
