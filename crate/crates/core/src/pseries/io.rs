//! Text and JSON serialization.
//!
//! Text: one term per line, `coeff m1 m3 kind k1 k3`, ordered by
//! (total degree, m1, k1, k3, kind). Lines starting with `#` are ignored.
//! Coefficients use the shortest representation that round-trips exactly.

use super::{Poly4, PoissonSeries, PoissonTerm, SeriesError, TermKey, TrigKind, TruncationPolicy};

pub fn to_text(s: &PoissonSeries) -> String {
    let mut out = String::with_capacity(s.len() * 32);
    for t in s.iter() {
        let k = t.key;
        out.push_str(&format!("{:e} {} {} {} {} {}\n", t.coeff, k.m1, k.m3, k.kind, k.k1, k.k3));
    }
    out
}

pub fn from_text(text: &str, trunc: TruncationPolicy) -> Result<PoissonSeries, SeriesError> {
    let mut terms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| SeriesError::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", f.len())));
        }
        let coeff: f64 = f[0].parse().map_err(|e| err(format!("coefficient `{}`: {e}", f[0])))?;
        let m1: u32 = f[1].parse().map_err(|e| err(format!("m1 `{}`: {e}", f[1])))?;
        let m3: u32 = f[2].parse().map_err(|e| err(format!("m3 `{}`: {e}", f[2])))?;
        let kind: TrigKind = f[3].parse().map_err(err)?;
        let k1: i32 = f[4].parse().map_err(|e| err(format!("k1 `{}`: {e}", f[4])))?;
        let k3: i32 = f[5].parse().map_err(|e| err(format!("k3 `{}`: {e}", f[5])))?;
        terms.push(PoissonTerm { coeff, key: TermKey::new(m1, m3, kind, k1, k3) });
    }
    PoissonSeries::try_from_canonical(terms, trunc)
}

type JsonTerm = (f64, u32, u32, TrigKind, i32, i32);

pub fn to_json(s: &PoissonSeries) -> String {
    let v: Vec<JsonTerm> = s.iter().map(|t| (t.coeff, t.key.m1, t.key.m3, t.key.kind, t.key.k1, t.key.k3)).collect();
    serde_json::to_string(&v).expect("series serialization cannot fail")
}

pub fn from_json(text: &str, trunc: TruncationPolicy) -> Result<PoissonSeries, SeriesError> {
    let v: Vec<JsonTerm> =
        serde_json::from_str(text).map_err(|e| SeriesError::Parse { line: e.line(), msg: e.to_string() })?;
    PoissonSeries::try_from_canonical(
        v.into_iter().map(|(coeff, m1, m3, kind, k1, k3)| PoissonTerm { coeff, key: TermKey::new(m1, m3, kind, k1, k3) }),
        trunc,
    )
}

/// Poly4 text: `coeff a b c d` for Σ₁^a Σ₃^b σ₁^c σ₃^d, graded order.
pub fn poly4_to_text(p: &Poly4) -> String {
    let mut out = String::new();
    for (e, c) in p.iter_graded() {
        out.push_str(&format!("{:e} {} {} {} {}\n", c, e[0], e[1], e[2], e[3]));
    }
    out
}

pub fn poly4_from_text(text: &str, trunc: TruncationPolicy) -> Result<Poly4, SeriesError> {
    let mut p = Poly4::zero(trunc);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| SeriesError::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let c: f64 = f[0].parse().map_err(|e| err(format!("coefficient: {e}")))?;
        let mut e = [0u32; 4];
        for j in 0..4 {
            e[j] = f[j + 1].parse().map_err(|x| err(format!("exponent: {x}")))?;
        }
        p.add(e, c);
    }
    Ok(p)
}
