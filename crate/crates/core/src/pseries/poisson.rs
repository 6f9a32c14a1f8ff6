use super::accum::{merge_all, Accumulator};
use super::trig::{self, TrigKind};
use super::{SeriesError, TruncationPolicy, WeightVector};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

const BLOCK: usize = 32;

/// Key of a Poisson term: (√U₁)^m1 (√U₃)^m3 · kind(k1·u₁ + k3·u₃).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermKey {
    pub m1: u32,
    pub m3: u32,
    pub kind: TrigKind,
    pub k1: i32,
    pub k3: i32,
}

impl TermKey {
    pub fn new(m1: u32, m3: u32, kind: TrigKind, k1: i32, k3: i32) -> Self {
        Self { m1, m3, kind, k1, k3 }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m1 + self.m3
    }

    #[inline]
    pub fn wave(&self) -> [i32; 2] {
        [self.k1, self.k3]
    }

    pub fn is_angle_free(&self) -> bool {
        self.k1 == 0 && self.k3 == 0
    }

    pub fn is_canonical(&self) -> bool {
        trig::is_canonical(self.kind, &self.wave())
    }

    /// d'Alembert parity: m_j and k_j share parity and |k_j| <= m_j.
    pub fn is_dalembert(&self) -> bool {
        (self.m1 as i64 - self.k1 as i64) % 2 == 0
            && (self.m3 as i64 - self.k3 as i64) % 2 == 0
            && self.k1.unsigned_abs() <= self.m1
            && self.k3.unsigned_abs() <= self.m3
    }

    fn sort_tuple(&self) -> (u32, u32, i32, i32, TrigKind) {
        (self.degree(), self.m1, self.k1, self.k3, self.kind)
    }
}

impl Ord for TermKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_tuple().cmp(&other.sort_tuple())
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonTerm {
    pub coeff: f64,
    pub key: TermKey,
}

/// Sparse Poisson series in (√U₁, √U₃; u₁, u₃), canonical sin/cos basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSeries {
    terms: BTreeMap<TermKey, f64>,
    trunc: TruncationPolicy,
    dropped_mass: f64,
}

impl PoissonSeries {
    pub fn zero(trunc: TruncationPolicy) -> Self {
        Self { terms: BTreeMap::new(), trunc, dropped_mass: 0.0 }
    }

    pub fn constant(c: f64, trunc: TruncationPolicy) -> Self {
        let mut s = Self::zero(trunc);
        s.add_term(c, TermKey::new(0, 0, TrigKind::Cos, 0, 0));
        s
    }

    /// Single term `coeff·(√U₁)^m1 (√U₃)^m3 · kind(k1u₁+k3u₃)`, canonicalized.
    pub fn monomial(coeff: f64, m1: u32, m3: u32, kind: TrigKind, k1: i32, k3: i32, trunc: TruncationPolicy) -> Self {
        let mut s = Self::zero(trunc);
        s.add_term(coeff, TermKey::new(m1, m3, kind, k1, k3));
        s
    }

    /// Action U_j as a series (j = 0 for U₁, 1 for U₃).
    pub fn action(j: usize, trunc: TruncationPolicy) -> Self {
        let (m1, m3) = if j == 0 { (2, 0) } else { (0, 2) };
        Self::monomial(1.0, m1, m3, TrigKind::Cos, 0, 0, trunc)
    }

    /// Builds a series from arbitrary terms: canonicalizes, merges duplicates,
    /// drops zeros and over-degree terms.
    pub fn from_terms<I: IntoIterator<Item = PoissonTerm>>(terms: I, trunc: TruncationPolicy) -> Self {
        let mut s = Self::zero(trunc);
        for t in terms {
            s.add_term(t.coeff, t.key);
        }
        s
    }

    /// Builds a series from canonical terms, rejecting anything that would need fixing.
    pub fn try_from_canonical<I: IntoIterator<Item = PoissonTerm>>(
        terms: I,
        trunc: TruncationPolicy,
    ) -> Result<Self, SeriesError> {
        let mut map = BTreeMap::new();
        for t in terms {
            if !t.coeff.is_finite() || t.coeff == 0.0 {
                return Err(SeriesError::InvalidTerm(format!("coefficient {} for {:?}", t.coeff, t.key)));
            }
            if !t.key.is_canonical() {
                return Err(SeriesError::InvalidTerm(format!("non-canonical wave {:?}", t.key)));
            }
            if t.key.degree() > trunc.max_sqrtu_degree {
                return Err(SeriesError::InvalidTerm(format!("degree {} above truncation", t.key.degree())));
            }
            if map.insert(t.key, t.coeff).is_some() {
                return Err(SeriesError::InvalidTerm(format!("duplicate key {:?}", t.key)));
            }
        }
        Ok(Self { terms: map, trunc, dropped_mass: 0.0 })
    }

    fn add_term(&mut self, coeff: f64, key: TermKey) {
        let Some((sign, kind, [k1, k3])) = trig::canonical(key.kind, key.wave()) else {
            return;
        };
        let key = TermKey { kind, k1, k3, ..key };
        if key.degree() > self.trunc.max_sqrtu_degree {
            self.dropped_mass += coeff.abs();
            return;
        }
        let c = sign * coeff;
        let e = self.terms.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub(crate) fn from_accumulator(acc: Accumulator<TermKey>, trunc: TruncationPolicy, dropped: f64) -> Self {
        let (terms, d) = acc.finish();
        Self { terms, trunc, dropped_mass: dropped + d }
    }

    pub fn trunc(&self) -> TruncationPolicy {
        self.trunc
    }

    /// Total |coeff| discarded by truncation while building this series.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped_mass
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, key: &TermKey) -> f64 {
        self.terms.get(key).copied().unwrap_or(0.0)
    }

    /// Coefficient lookup with the wave canonicalized first.
    pub fn coeff(&self, m1: u32, m3: u32, kind: TrigKind, k1: i32, k3: i32) -> f64 {
        match trig::canonical(kind, [k1, k3]) {
            None => 0.0,
            Some((sign, kind, [k1, k3])) => sign * self.get(&TermKey::new(m1, m3, kind, k1, k3)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = PoissonTerm> + '_ {
        self.terms.iter().map(|(k, &c)| PoissonTerm { coeff: c, key: *k })
    }

    pub fn terms(&self) -> &BTreeMap<TermKey, f64> {
        &self.terms
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|k| k.degree())
    }

    /// Re-truncates to a new policy, counting any dropped mass.
    pub fn with_trunc(&self, trunc: TruncationPolicy) -> Self {
        let mut out = Self::zero(trunc);
        out.dropped_mass = self.dropped_mass;
        for (k, &c) in &self.terms {
            if k.degree() <= trunc.max_sqrtu_degree {
                out.terms.insert(*k, c);
            } else {
                out.dropped_mass += c.abs();
            }
        }
        out
    }

    /// Terms of √U-degree exactly `s`.
    pub fn homogeneous_part(&self, s: u32) -> Self {
        self.degree_range(s, s)
    }

    /// Terms with √U-degree in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| (lo..=hi).contains(&k.degree()))
            .map(|(k, c)| (*k, *c))
            .collect();
        Self { terms, trunc: self.trunc, dropped_mass: 0.0 }
    }

    /// Replaces the degree-`s` block by `block` (which must be homogeneous of degree `s`).
    pub fn replace_block(&mut self, s: u32, block: &PoissonSeries) {
        self.terms.retain(|k, _| k.degree() != s);
        for (k, &c) in &block.terms {
            debug_assert_eq!(k.degree(), s);
            self.terms.insert(*k, c);
        }
    }

    /// Number of terms for each √U-degree `0..=max`.
    pub fn term_counts(&self) -> Vec<usize> {
        let max = self.max_degree().unwrap_or(0) as usize;
        let mut v = vec![0; max + 1];
        for k in self.terms.keys() {
            v[k.degree() as usize] += 1;
        }
        v
    }

    pub fn is_angle_free(&self) -> bool {
        self.terms.keys().all(|k| k.is_angle_free())
    }

    pub fn angle_free_part(&self) -> Self {
        self.filter(|k| k.is_angle_free())
    }

    pub fn angle_dependent_part(&self) -> Self {
        self.filter(|k| !k.is_angle_free())
    }

    pub fn filter(&self, keep: impl Fn(&TermKey) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (*k, *c)).collect();
        Self { terms, trunc: self.trunc, dropped_mass: 0.0 }
    }

    /// Re-canonicalizes every stored term. A no-op on valid series.
    pub fn canonicalized(&self) -> Self {
        let mut out = Self::zero(self.trunc);
        out.dropped_mass = self.dropped_mass;
        for t in self.iter() {
            out.add_term(t.coeff, t.key);
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        if a == 0.0 {
            return Self::zero(self.trunc);
        }
        let terms = self.terms.iter().map(|(k, c)| (*k, c * a)).collect();
        Self { terms, trunc: self.trunc, dropped_mass: self.dropped_mass * a.abs() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// self + a·other, truncated to self's policy.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let mut acc = Accumulator::with_capacity(self.len() + other.len());
        let mut dropped = self.dropped_mass + a.abs() * other.dropped_mass;
        for (k, &c) in &self.terms {
            acc.add(*k, c);
        }
        for (k, &c) in &other.terms {
            if k.degree() > self.trunc.max_sqrtu_degree {
                dropped += (a * c).abs();
            } else {
                acc.add(*k, a * c);
            }
        }
        Self::from_accumulator(acc, self.trunc, dropped)
    }

    /// Σ |coeff|·R₁^{m1/2}·R₃^{m3/2}.
    pub fn weighted_norm(&self, r: &WeightVector) -> f64 {
        let (s1, s3) = (r.r1.sqrt(), r.r3.sqrt());
        self.terms
            .iter()
            .map(|(k, c)| c.abs() * s1.powi(k.m1 as i32) * s3.powi(k.m3 as i32))
            .sum()
    }

    /// ∂f/∂u_j (j = 0 for u₁, 1 for u₃).
    pub fn d_du(&self, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (k, &c) in &self.terms {
            let kj = if j == 0 { k.k1 } else { k.k3 };
            if kj == 0 {
                continue;
            }
            let (sign, kind) = k.kind.derivative();
            terms.insert(TermKey { kind, ..*k }, c * sign * kj as f64);
        }
        Self { terms, trunc: self.trunc, dropped_mass: 0.0 }
    }

    /// Value at actions `u_act` (must be ≥ 0) and angles `ang`.
    pub fn evaluate(&self, u_act: [f64; 2], ang: [f64; 2]) -> Result<f64, SeriesError> {
        SeriesEvaluator::new(self).value(u_act, ang)
    }
}

/// Σ over terms, grouped by block, with deterministic merge.
fn blockwise<F>(a: &PoissonSeries, exec: Exec, f: F) -> Result<Accumulator<TermKey>, SeriesError>
where
    F: Fn(&TermKey, f64, &mut Accumulator<TermKey>) -> Result<(), SeriesError> + Sync + Send,
{
    let items: Vec<(TermKey, f64)> = a.terms.iter().map(|(k, c)| (*k, *c)).collect();
    let blocks = exec.map_blocks(&items, BLOCK, |chunk| {
        let mut acc = Accumulator::new();
        for (k, c) in chunk {
            f(k, *c, &mut acc)?;
        }
        Ok(acc)
    });
    let blocks: Result<Vec<_>, SeriesError> = blocks.into_iter().collect();
    Ok(merge_all(blocks?))
}

fn sorted_by_degree(b: &PoissonSeries) -> (Vec<(TermKey, f64)>, Vec<u32>) {
    let items: Vec<(TermKey, f64)> = b.terms.iter().map(|(k, c)| (*k, *c)).collect();
    let degs = items.iter().map(|(k, _)| k.degree()).collect();
    (items, degs)
}

/// Truncated product with product-to-sum linearization.
pub fn multiply(a: &PoissonSeries, b: &PoissonSeries, trunc: &TruncationPolicy) -> PoissonSeries {
    multiply_with(a, b, trunc, Exec::default())
}

pub fn multiply_with(a: &PoissonSeries, b: &PoissonSeries, trunc: &TruncationPolicy, exec: Exec) -> PoissonSeries {
    let max = trunc.max_sqrtu_degree;
    let (bs, degs) = sorted_by_degree(b);
    let acc = blockwise(a, exec, |ka, ca, acc| {
        let da = ka.degree();
        let end = if da > max { 0 } else { degs.partition_point(|&d| d <= max - da) };
        for (kb, cb) in &bs[..end] {
            let m1 = ka.m1 + kb.m1;
            let m3 = ka.m3 + kb.m3;
            for (f, kind, w) in trig::product(ka.kind, &ka.wave(), kb.kind, &kb.wave()) {
                if let Some((sign, kind, [k1, k3])) = trig::canonical(kind, w) {
                    acc.add(TermKey { m1, m3, kind, k1, k3 }, sign * f * ca * cb);
                }
            }
        }
        for (_, cb) in &bs[end..] {
            acc.dropped += (ca * cb).abs();
        }
        Ok(())
    })
    .expect("multiply is infallible");
    PoissonSeries::from_accumulator(acc, *trunc, 0.0)
}

/// {f,g} = Σ_j (∂f/∂u_j ∂g/∂U_j − ∂f/∂U_j ∂g/∂u_j).
pub fn poisson_bracket(f: &PoissonSeries, g: &PoissonSeries, trunc: &TruncationPolicy) -> Result<PoissonSeries, SeriesError> {
    poisson_bracket_with(f, g, trunc, Exec::default())
}

pub fn poisson_bracket_with(
    f: &PoissonSeries,
    g: &PoissonSeries,
    trunc: &TruncationPolicy,
    exec: Exec,
) -> Result<PoissonSeries, SeriesError> {
    let max = trunc.max_sqrtu_degree;
    let (gs, degs) = sorted_by_degree(g);
    let acc = blockwise(f, exec, |kf, cf, acc| {
        let df = kf.degree();
        // the bracket lowers the total degree by two
        let end = degs.partition_point(|&d| d + df <= max + 2);
        for (kg, cg) in &gs[..end] {
            bracket_pair(kf, cf, kg, *cg, acc)?;
        }
        for (kg, cg) in &gs[end..] {
            if kg.degree() + df >= 2 {
                acc.dropped += (cf * cg).abs();
            }
        }
        Ok(())
    })?;
    Ok(PoissonSeries::from_accumulator(acc, *trunc, 0.0))
}

#[inline]
fn bracket_pair(
    kf: &TermKey,
    cf: f64,
    kg: &TermKey,
    cg: f64,
    acc: &mut Accumulator<TermKey>,
) -> Result<(), SeriesError> {
    let wf = kf.wave();
    let wg = kg.wave();
    let mf = [kf.m1, kf.m3];
    let mg = [kg.m1, kg.m3];
    for j in 0..2 {
        // ∂f/∂u_j · ∂g/∂U_j
        if wf[j] != 0 && mg[j] != 0 {
            let (s, kind_f) = kf.kind.derivative();
            let c = cf * s * wf[j] as f64 * cg * 0.5 * mg[j] as f64;
            emit(acc, c, mf, mg, j, kind_f, &wf, kg.kind, &wg)?;
        }
        // − ∂f/∂U_j · ∂g/∂u_j
        if mf[j] != 0 && wg[j] != 0 {
            let (s, kind_g) = kg.kind.derivative();
            let c = -(cf * 0.5 * mf[j] as f64) * (cg * s * wg[j] as f64);
            emit(acc, c, mf, mg, j, kf.kind, &wf, kind_g, &wg)?;
        }
    }
    Ok(())
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn emit(
    acc: &mut Accumulator<TermKey>,
    c: f64,
    mf: [u32; 2],
    mg: [u32; 2],
    j: usize,
    ka: TrigKind,
    wa: &[i32; 2],
    kb: TrigKind,
    wb: &[i32; 2],
) -> Result<(), SeriesError> {
    let mut m = [(mf[0] + mg[0]) as i64, (mf[1] + mg[1]) as i64];
    m[j] -= 2;
    if m[j] < 0 {
        return Err(SeriesError::SingularDerivative { exponents: (m[0], m[1]) });
    }
    for (f, kind, w) in trig::product(ka, wa, kb, wb) {
        if let Some((sign, kind, [k1, k3])) = trig::canonical(kind, w) {
            acc.add(TermKey { m1: m[0] as u32, m3: m[1] as u32, kind, k1, k3 }, sign * f * c);
        }
    }
    Ok(())
}

/// Flattened series for repeated evaluation (integrator right-hand sides).
#[derive(Clone, Debug)]
pub struct SeriesEvaluator {
    coeff: Vec<f64>,
    m: Vec<[u32; 2]>,
    k: Vec<[i32; 2]>,
    kind: Vec<TrigKind>,
    max_m: [usize; 2],
    max_k: [usize; 2],
}

impl SeriesEvaluator {
    pub fn new(f: &PoissonSeries) -> Self {
        let mut e = Self {
            coeff: Vec::with_capacity(f.len()),
            m: Vec::with_capacity(f.len()),
            k: Vec::with_capacity(f.len()),
            kind: Vec::with_capacity(f.len()),
            max_m: [0, 0],
            max_k: [0, 0],
        };
        for t in f.iter() {
            e.coeff.push(t.coeff);
            e.m.push([t.key.m1, t.key.m3]);
            e.k.push(t.key.wave());
            e.kind.push(t.key.kind);
            e.max_m[0] = e.max_m[0].max(t.key.m1 as usize);
            e.max_m[1] = e.max_m[1].max(t.key.m3 as usize);
            e.max_k[0] = e.max_k[0].max(t.key.k1.unsigned_abs() as usize);
            e.max_k[1] = e.max_k[1].max(t.key.k3.unsigned_abs() as usize);
        }
        e
    }

    fn tables(&self, u_act: [f64; 2], ang: [f64; 2]) -> Result<Tables, SeriesError> {
        if u_act[0] < 0.0 || u_act[1] < 0.0 || !u_act[0].is_finite() || !u_act[1].is_finite() {
            return Err(SeriesError::NegativeAction(u_act[0].min(u_act[1])));
        }
        let mut pw = [Vec::new(), Vec::new()];
        let mut cs = [Vec::new(), Vec::new()];
        for j in 0..2 {
            let r = u_act[j].sqrt();
            let mut p = 1.0;
            for _ in 0..=self.max_m[j] {
                pw[j].push(p);
                p *= r;
            }
            for n in 0..=self.max_k[j] {
                let a = n as f64 * ang[j];
                cs[j].push((a.cos(), a.sin()));
            }
        }
        Ok(Tables { pw, cs })
    }

    #[inline]
    fn trig(&self, t: &Tables, i: usize) -> (f64, f64) {
        // cos and sin of k1 u1 + k3 u3 by angle addition
        let [k1, k3] = self.k[i];
        let (c1, s1) = t.cs[0][k1.unsigned_abs() as usize];
        let s1 = if k1 < 0 { -s1 } else { s1 };
        let (c3, s3) = t.cs[1][k3.unsigned_abs() as usize];
        let s3 = if k3 < 0 { -s3 } else { s3 };
        (c1 * c3 - s1 * s3, s1 * c3 + c1 * s3)
    }

    pub fn value(&self, u_act: [f64; 2], ang: [f64; 2]) -> Result<f64, SeriesError> {
        let t = self.tables(u_act, ang)?;
        let mut s = 0.0;
        for i in 0..self.coeff.len() {
            let (c, sn) = self.trig(&t, i);
            let tr = if self.kind[i] == TrigKind::Cos { c } else { sn };
            s += self.coeff[i] * t.pw[0][self.m[i][0] as usize] * t.pw[1][self.m[i][1] as usize] * tr;
        }
        Ok(s)
    }

    /// Value, ∂/∂U_j and ∂/∂u_j. Actions must be strictly positive.
    pub fn value_and_gradient(&self, u_act: [f64; 2], ang: [f64; 2]) -> Result<(f64, [f64; 2], [f64; 2]), SeriesError> {
        let t = self.tables(u_act, ang)?;
        let mut h = 0.0;
        let mut du = [0.0; 2];
        let mut dang = [0.0; 2];
        for i in 0..self.coeff.len() {
            let (c, sn) = self.trig(&t, i);
            let (tr, dtr) = if self.kind[i] == TrigKind::Cos { (c, -sn) } else { (sn, c) };
            let [m1, m3] = self.m[i];
            let p1 = t.pw[0][m1 as usize];
            let p3 = t.pw[1][m3 as usize];
            let a = self.coeff[i];
            h += a * p1 * p3 * tr;
            if m1 > 0 {
                du[0] += a * 0.5 * m1 as f64 * t.pw[0][m1 as usize - 1] / t.pw[0][1] * p3 * tr;
            }
            if m3 > 0 {
                du[1] += a * 0.5 * m3 as f64 * p1 * t.pw[1][m3 as usize - 1] / t.pw[1][1] * tr;
            }
            let base = a * p1 * p3 * dtr;
            dang[0] += base * self.k[i][0] as f64;
            dang[1] += base * self.k[i][1] as f64;
        }
        Ok((h, du, dang))
    }
}

struct Tables {
    pw: [Vec<f64>; 2],
    cs: [Vec<(f64, f64)>; 2],
}
