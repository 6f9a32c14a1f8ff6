use super::accum::{merge_all, Accumulator};
use super::TruncationPolicy;
use crate::exec::Exec;
use std::collections::BTreeMap;

/// Polynomial in (Σ₁, Σ₃, σ₁, σ₃); exponent array `[a, b, c, d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly4 {
    monomials: BTreeMap<[u32; 4], f64>,
    trunc: TruncationPolicy,
}

fn degree(e: &[u32; 4]) -> u32 {
    e.iter().sum()
}

impl Poly4 {
    pub fn zero(trunc: TruncationPolicy) -> Self {
        Self { monomials: BTreeMap::new(), trunc }
    }

    pub fn trunc(&self) -> TruncationPolicy {
        self.trunc
    }

    /// Adds `c` to the coefficient of `e`; over-degree monomials are ignored.
    pub fn add(&mut self, e: [u32; 4], c: f64) {
        if degree(&e) > self.trunc.max_poly_degree || c == 0.0 {
            return;
        }
        let v = self.monomials.entry(e).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.monomials.remove(&e);
        }
    }

    pub(crate) fn from_map(monomials: BTreeMap<[u32; 4], f64>, trunc: TruncationPolicy) -> Self {
        let monomials = monomials
            .into_iter()
            .filter(|(e, c)| *c != 0.0 && degree(e) <= trunc.max_poly_degree)
            .collect();
        Self { monomials, trunc }
    }

    pub fn get(&self, e: [u32; 4]) -> f64 {
        self.monomials.get(&e).copied().unwrap_or(0.0)
    }

    pub fn remove(&mut self, e: [u32; 4]) -> f64 {
        self.monomials.remove(&e).unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([u32; 4], f64)> + '_ {
        self.monomials.iter().map(|(e, c)| (*e, *c))
    }

    /// Monomials ordered by total degree, then exponents.
    pub fn iter_graded(&self) -> impl Iterator<Item = ([u32; 4], f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by_key(|(e, _)| (degree(e), *e));
        v.into_iter()
    }

    pub fn max_degree(&self) -> u32 {
        self.monomials.keys().map(degree).max().unwrap_or(0)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        let monomials = self.monomials.iter().filter(|(e, _)| degree(e) == d).map(|(e, c)| (*e, *c)).collect();
        Self { monomials, trunc: self.trunc }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_map(self.monomials.iter().map(|(e, c)| (*e, c * a)).collect(), self.trunc)
    }

    pub fn evaluate(&self, x: [f64; 4]) -> f64 {
        let max = self.max_degree() as usize;
        let pows: Vec<Vec<f64>> = x
            .iter()
            .map(|&v| {
                let mut p = Vec::with_capacity(max + 1);
                let mut a = 1.0;
                for _ in 0..=max {
                    p.push(a);
                    a *= v;
                }
                p
            })
            .collect();
        self.monomials
            .iter()
            .map(|(e, c)| c * (0..4).map(|j| pows[j][e[j] as usize]).product::<f64>())
            .sum()
    }

    /// Substitutes Σ = A·Σ' and σ = B·σ' (2×2 blocks), preserving degrees.
    /// Cancellation residue is removed using the contribution mass.
    pub fn linear_substitute(&self, a: [[f64; 2]; 2], b: [[f64; 2]; 2], exec: Exec) -> Self {
        let items: Vec<([u32; 4], f64)> = self.iter().collect();
        let maxd = self.max_degree() as usize;
        let binom = binomials(maxd);
        let blocks = exec.map_blocks(&items, 64, |chunk| {
            let mut acc = Accumulator::new();
            for (e, c) in chunk {
                let (sig, sig_m) = expand_pair(a, e[0], e[1], &binom);
                let (ang, ang_m) = expand_pair(b, e[2], e[3], &binom);
                let ns = (e[0] + e[1]) as usize;
                let na = (e[2] + e[3]) as usize;
                for i in 0..=ns {
                    if sig[i] == 0.0 {
                        continue;
                    }
                    for j in 0..=na {
                        if ang[j] == 0.0 {
                            continue;
                        }
                        let key = [i as u32, (ns - i) as u32, j as u32, (na - j) as u32];
                        acc.add_with_mass(key, c * sig[i] * ang[j], c.abs() * sig_m[i] * ang_m[j]);
                    }
                }
            }
            acc
        });
        let (map, _) = merge_all(blocks).finish();
        Self::from_map(map, self.trunc)
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let mut row = vec![1.0; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        t.push(row);
    }
    t
}

/// (m00 x + m01 y)^p (m10 x + m11 y)^q as coefficients of x^i y^(p+q-i), plus absolute masses.
fn expand_pair(m: [[f64; 2]; 2], p: u32, q: u32, binom: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (p, q) = (p as usize, q as usize);
    let first: Vec<f64> = (0..=p).map(|i| binom[p][i] * m[0][0].powi(i as i32) * m[0][1].powi((p - i) as i32)).collect();
    let second: Vec<f64> = (0..=q).map(|i| binom[q][i] * m[1][0].powi(i as i32) * m[1][1].powi((q - i) as i32)).collect();
    let mut out = vec![0.0; p + q + 1];
    let mut mass = vec![0.0; p + q + 1];
    for (i, a) in first.iter().enumerate() {
        for (j, b) in second.iter().enumerate() {
            out[i + j] += a * b;
            mass[i + j] += (a * b).abs();
        }
    }
    (out, mass)
}
