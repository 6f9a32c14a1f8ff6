//! Eccentricity / mean-anomaly Fourier expansions of the two-body functions
//! (a/r)³, cos v and sin v, generated by inverting Kepler's equation as a
//! truncated series.

use crate::pseries::accum::Accumulator;
use crate::pseries::TrigKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeplerError {
    #[error("Kepler iteration did not converge for e = {e}, M = {mean_anomaly}")]
    NoConvergence { e: f64, mean_anomaly: f64 },
    #[error("eccentricity {0} outside [0, 1)")]
    BadEccentricity(f64),
    #[error("eccentricity degree {0} outside 1..=12")]
    BadDegree(u32),
}

/// Key of `e^p · kind(k·M)` with k ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EccKey {
    pub p: u32,
    pub k: i32,
    pub kind: TrigKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EccExpansion {
    pub series: BTreeMap<EccKey, f64>,
    pub max_ecc_degree: u32,
}

impl EccExpansion {
    pub fn zero(max_ecc_degree: u32) -> Self {
        Self { series: BTreeMap::new(), max_ecc_degree }
    }

    pub fn constant(c: f64, max_ecc_degree: u32) -> Self {
        let mut s = Self::zero(max_ecc_degree);
        s.push(0, TrigKind::Cos, 0, c);
        s
    }

    pub fn trig(kind: TrigKind, k: i32, max_ecc_degree: u32) -> Self {
        let mut s = Self::zero(max_ecc_degree);
        s.push(0, kind, k, 1.0);
        s
    }

    fn push(&mut self, p: u32, kind: TrigKind, k: i32, c: f64) {
        if p > self.max_ecc_degree || c == 0.0 {
            return;
        }
        let (sign, kind, k) = match (k < 0, kind) {
            (false, _) => (1.0, kind, k),
            (true, TrigKind::Cos) => (1.0, kind, -k),
            (true, TrigKind::Sin) => (-1.0, kind, -k),
        };
        if k == 0 && kind == TrigKind::Sin {
            return;
        }
        let key = EccKey { p, k, kind };
        let v = self.series.entry(key).or_insert(0.0);
        *v += sign * c;
        if *v == 0.0 {
            self.series.remove(&key);
        }
    }

    fn from_acc(acc: Accumulator<(u32, i32, TrigKind)>, max: u32) -> Self {
        let mut s = Self::zero(max);
        let (map, _) = acc.finish();
        for ((p, k, kind), c) in map {
            s.push(p, kind, k, c);
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let mut acc = Accumulator::new();
        for (key, c) in &self.series {
            acc.add((key.p, key.k, key.kind), *c);
        }
        for (key, c) in &other.series {
            acc.add((key.p, key.k, key.kind), a * c);
        }
        Self::from_acc(acc, self.max_ecc_degree)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut s = Self::zero(self.max_ecc_degree);
        for (key, c) in &self.series {
            s.push(key.p, key.kind, key.k, a * c);
        }
        s
    }

    /// Multiplies by e^n.
    pub fn shift_e(&self, n: u32) -> Self {
        let mut s = Self::zero(self.max_ecc_degree);
        for (key, c) in &self.series {
            s.push(key.p + n, key.kind, key.k, *c);
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        let max = self.max_ecc_degree;
        let mut acc = Accumulator::new();
        for (a, ca) in &self.series {
            for (b, cb) in &other.series {
                let p = a.p + b.p;
                if p > max {
                    continue;
                }
                for (f, kind, [k]) in crate::pseries::trig::product(a.kind, &[a.k], b.kind, &[b.k]) {
                    let (sign, kind, k) = match (k < 0, kind) {
                        (true, TrigKind::Sin) => (-1.0, kind, -k),
                        (true, TrigKind::Cos) => (1.0, kind, -k),
                        _ => (1.0, kind, k),
                    };
                    if k == 0 && kind == TrigKind::Sin {
                        continue;
                    }
                    acc.add((p, k, kind), sign * f * ca * cb);
                }
            }
        }
        Self::from_acc(acc, max)
    }

    /// Value at eccentricity `e` and mean anomaly `m`.
    pub fn evaluate(&self, e: f64, m: f64) -> f64 {
        self.series.iter().map(|(key, c)| c * e.powi(key.p as i32) * key.kind.eval(key.k as f64 * m)).sum()
    }

    /// Coefficient of kind(k·M) summed over eccentricity powers at `e`.
    pub fn harmonic(&self, e: f64, k: i32, kind: TrigKind) -> f64 {
        self.series
            .iter()
            .filter(|(key, _)| key.k == k && key.kind == kind)
            .map(|(key, c)| c * e.powi(key.p as i32))
            .sum()
    }

    /// Mean over the mean anomaly at `e`.
    pub fn mean(&self, e: f64) -> f64 {
        self.harmonic(e, 0, TrigKind::Cos)
    }

    pub fn max_harmonic(&self) -> i32 {
        self.series.keys().map(|k| k.k).max().unwrap_or(0)
    }

    /// d'Alembert check: |k| - offset ≤ p with matching parity.
    pub fn is_dalembert(&self, offset: i32) -> bool {
        self.series.keys().all(|key| {
            let d = key.k - offset;
            d.abs() <= key.p as i32 && (key.p as i32 - d.abs()) % 2 == 0
        })
    }

    /// Text format: `coeff p kind k`, ordered by (p, k, kind).
    pub fn to_text(&self) -> String {
        self.series.iter().map(|(k, c)| format!("{:e} {} {} {}\n", c, k.p, k.kind, k.k)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeplerExpansions {
    pub a_over_r_cubed: EccExpansion,
    pub cos_v: EccExpansion,
    pub sin_v: EccExpansion,
}

/// cos δ and sin δ for a series δ = O(e).
fn cos_sin_of_small(delta: &EccExpansion) -> (EccExpansion, EccExpansion) {
    let max = delta.max_ecc_degree;
    let mut c = EccExpansion::constant(1.0, max);
    let mut s = EccExpansion::zero(max);
    let mut pow = EccExpansion::constant(1.0, max);
    let mut fact = 1.0;
    for n in 1..=max {
        pow = pow.mul(delta);
        if pow.series.is_empty() {
            break;
        }
        fact *= n as f64;
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if n % 2 == 0 {
            c = c.axpy(sign / fact, &pow);
        } else {
            s = s.axpy(sign / fact, &pow);
        }
    }
    (c, s)
}

pub fn kepler_expansions(max_ecc_degree: u32) -> Result<KeplerExpansions, KeplerError> {
    if !(1..=12).contains(&max_ecc_degree) {
        return Err(KeplerError::BadDegree(max_ecc_degree));
    }
    let n = max_ecc_degree;
    let cos_m = EccExpansion::trig(TrigKind::Cos, 1, n);
    let sin_m = EccExpansion::trig(TrigKind::Sin, 1, n);

    // E = M + δ with δ = e sin E; each pass fixes one more power of e
    let mut delta = EccExpansion::zero(n);
    for _ in 0..=n {
        let (cd, sd) = cos_sin_of_small(&delta);
        let sin_e = sin_m.mul(&cd).add(&cos_m.mul(&sd));
        delta = sin_e.shift_e(1);
    }
    let (cd, sd) = cos_sin_of_small(&delta);
    let cos_e = cos_m.mul(&cd).axpy(-1.0, &sin_m.mul(&sd));
    let sin_e = sin_m.mul(&cd).add(&cos_m.mul(&sd));

    // a/r = 1/(1 - e cos E)
    let x = cos_e.shift_e(1);
    let mut a_over_r = EccExpansion::constant(1.0, n);
    let mut pow = EccExpansion::constant(1.0, n);
    for _ in 1..=n {
        pow = pow.mul(&x);
        a_over_r = a_over_r.add(&pow);
    }
    let a_over_r_cubed = a_over_r.mul(&a_over_r).mul(&a_over_r);

    // √(1 − e²) by the binomial series
    let mut root = EccExpansion::zero(n);
    let mut b = 1.0;
    for j in 0..=(n / 2) {
        if j > 0 {
            b *= (0.5 - (j - 1) as f64) / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        root = root.add(&EccExpansion::constant(sign * b, n).shift_e(2 * j));
    }

    let cos_v = cos_e.axpy(-1.0, &EccExpansion::constant(1.0, n).shift_e(1)).mul(&a_over_r);
    let sin_v = root.mul(&sin_e).mul(&a_over_r);
    Ok(KeplerExpansions { a_over_r_cubed, cos_v, sin_v })
}

/// Solves Kepler's equation by Newton iteration; returns (r/a, v).
pub fn numeric_kepler(e: f64, mean_anomaly: f64) -> Result<(f64, f64), KeplerError> {
    if !(0.0..1.0).contains(&e) {
        return Err(KeplerError::BadEccentricity(e));
    }
    let m = mean_anomaly;
    let mut ea = if e < 0.8 { m + e * m.sin() } else { std::f64::consts::PI };
    let mut converged = false;
    for _ in 0..50 {
        let f = ea - e * ea.sin() - m;
        let step = f / (1.0 - e * ea.cos());
        ea -= step;
        if step.abs() <= 1e-15 * (1.0 + ea.abs()) {
            converged = (ea - e * ea.sin() - m).abs() <= 1e-14 * (1.0 + m.abs());
            if converged {
                break;
            }
        }
    }
    if !converged {
        return Err(KeplerError::NoConvergence { e, mean_anomaly });
    }
    let r = 1.0 - e * ea.cos();
    let v = 2.0 * ((1.0 + e).sqrt() * (0.5 * ea).sin()).atan2((1.0 - e).sqrt() * (0.5 * ea).cos());
    Ok((r, v))
}
