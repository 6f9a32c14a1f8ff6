//! Trig series in the five angles (σ₁, σ₃, l₄, l₅, l₆) with coefficients
//! that are monomials e^p cos^a K sin^b K.

use crate::orbexp::EccExpansion;
use crate::pseries::accum::Accumulator;
use crate::pseries::trig::{self, TrigKind};
use std::collections::BTreeMap;

pub const SIGMA1: usize = 0;
pub const SIGMA3: usize = 1;
pub const L4: usize = 2;
pub const L5: usize = 3;
pub const L6: usize = 4;
pub const N_ANGLES: usize = 5;

pub type Wave = [i32; N_ANGLES];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AngleKey {
    /// eccentricity power
    pub p: u32,
    /// power of cos K
    pub a: u32,
    /// power of sin K
    pub b: u32,
    pub kind: TrigKind,
    pub k: Wave,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleSeries {
    pub terms: BTreeMap<AngleKey, f64>,
    pub max_ecc_degree: u32,
}

impl AngleSeries {
    pub fn zero(max_ecc_degree: u32) -> Self {
        Self { terms: BTreeMap::new(), max_ecc_degree }
    }

    pub fn term(c: f64, p: u32, a: u32, b: u32, kind: TrigKind, k: Wave, max_ecc_degree: u32) -> Self {
        let mut acc = Accumulator::new();
        push(&mut acc, c, AngleKey { p, a, b, kind, k }, max_ecc_degree);
        Self::from_acc(acc, max_ecc_degree)
    }

    pub fn constant(c: f64, max_ecc_degree: u32) -> Self {
        Self::term(c, 0, 0, 0, TrigKind::Cos, [0; N_ANGLES], max_ecc_degree)
    }

    pub fn trig(kind: TrigKind, k: Wave, max_ecc_degree: u32) -> Self {
        Self::term(1.0, 0, 0, 0, kind, k, max_ecc_degree)
    }

    pub fn cos_k(max_ecc_degree: u32) -> Self {
        Self::term(1.0, 0, 1, 0, TrigKind::Cos, [0; N_ANGLES], max_ecc_degree)
    }

    pub fn sin_k(max_ecc_degree: u32) -> Self {
        Self::term(1.0, 0, 0, 1, TrigKind::Cos, [0; N_ANGLES], max_ecc_degree)
    }

    /// Lifts an e/M expansion with M replaced by the angle combination `m_wave`.
    pub fn lift(exp: &EccExpansion, m_wave: Wave, max_ecc_degree: u32) -> Self {
        let mut acc = Accumulator::new();
        for (key, c) in &exp.series {
            let mut k = [0; N_ANGLES];
            for (dst, src) in k.iter_mut().zip(m_wave.iter()) {
                *dst = src * key.k;
            }
            push(&mut acc, *c, AngleKey { p: key.p, a: 0, b: 0, kind: key.kind, k }, max_ecc_degree);
        }
        Self::from_acc(acc, max_ecc_degree)
    }

    fn from_acc(acc: Accumulator<AngleKey>, max_ecc_degree: u32) -> Self {
        let (terms, _) = acc.finish();
        Self { terms, max_ecc_degree }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        let mut acc = Accumulator::with_capacity(self.len() + other.len());
        for (k, c) in &self.terms {
            acc.add(*k, *c);
        }
        for (k, c) in &other.terms {
            acc.add(*k, alpha * c);
        }
        Self::from_acc(acc, self.max_ecc_degree)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::zero(self.max_ecc_degree).axpy(alpha, self)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_filtered(other, |_| true)
    }

    /// Product keeping only result waves accepted by `keep`.
    pub fn mul_filtered(&self, other: &Self, keep: impl Fn(&Wave) -> bool) -> Self {
        let max = self.max_ecc_degree;
        let mut acc = Accumulator::with_capacity(self.len() * 4);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let p = ka.p + kb.p;
                if p > max {
                    continue;
                }
                for (f, kind, w) in trig::product(ka.kind, &ka.k, kb.kind, &kb.k) {
                    if !keep(&w) {
                        continue;
                    }
                    push(&mut acc, f * ca * cb, AngleKey { p, a: ka.a + kb.a, b: ka.b + kb.b, kind, k: w }, max);
                }
            }
        }
        Self::from_acc(acc, max)
    }

    pub fn filter(&self, keep: impl Fn(&AngleKey) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (*k, *c)).collect(),
            max_ecc_degree: self.max_ecc_degree,
        }
    }

    pub fn evaluate(&self, e: f64, cos_k: f64, sin_k: f64, angles: &[f64; N_ANGLES]) -> f64 {
        self.terms
            .iter()
            .map(|(key, c)| {
                let phase: f64 = key.k.iter().zip(angles).map(|(k, x)| *k as f64 * x).sum();
                c * e.powi(key.p as i32) * cos_k.powi(key.a as i32) * sin_k.powi(key.b as i32) * key.kind.eval(phase)
            })
            .sum()
    }
}

fn push(acc: &mut Accumulator<AngleKey>, c: f64, key: AngleKey, max: u32) {
    if key.p > max {
        return;
    }
    if let Some((sign, kind, k)) = trig::canonical(key.kind, key.k) {
        acc.add(AngleKey { kind, k, ..key }, sign * c);
    }
}

pub type Vector3 = [AngleSeries; 3];

/// A rotation angle as (cos φ, sin φ) series.
pub struct Angle {
    pub cos: AngleSeries,
    pub sin: AngleSeries,
}

impl Angle {
    pub fn wave(k: Wave, max: u32) -> Self {
        Self { cos: AngleSeries::trig(TrigKind::Cos, k, max), sin: AngleSeries::trig(TrigKind::Sin, k, max) }
    }

    pub fn numeric(phi: f64, max: u32) -> Self {
        Self { cos: AngleSeries::constant(phi.cos(), max), sin: AngleSeries::constant(phi.sin(), max) }
    }

    /// The obliquity K, kept symbolic.
    pub fn obliquity(max: u32) -> Self {
        Self { cos: AngleSeries::cos_k(max), sin: AngleSeries::sin_k(max) }
    }
}

/// Passive rotation about the third axis: (c x + s y, −s x + c y, z).
pub fn rot3(phi: &Angle, v: &Vector3) -> Vector3 {
    [
        phi.cos.mul(&v[0]).add(&phi.sin.mul(&v[1])),
        phi.cos.mul(&v[1]).axpy(-1.0, &phi.sin.mul(&v[0])),
        v[2].clone(),
    ]
}

/// Passive rotation about the first axis: (x, c y + s z, −s y + c z).
pub fn rot1(phi: &Angle, v: &Vector3) -> Vector3 {
    [
        v[0].clone(),
        phi.cos.mul(&v[1]).add(&phi.sin.mul(&v[2])),
        phi.cos.mul(&v[2]).axpy(-1.0, &phi.sin.mul(&v[1])),
    ]
}
