//! Randomized algebra properties on d'Alembert-shaped series.
//!
//! Generated terms have m_j ≥ |k_j| with matching parity, so brackets never
//! produce negative √U powers. With at most √U-degree 8 per factor and
//! truncation 24, nothing is truncated in any property below.

use cassini_core::pseries::{io, multiply, poisson_bracket};
use cassini_core::{PoissonSeries, PoissonTerm, TermKey, TrigKind, TruncationPolicy, WeightVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"cassini-stab property suite seed";
pub const CASES: u32 = 1000;

pub fn trunc() -> TruncationPolicy {
    TruncationPolicy::uniform(24, 8).unwrap()
}

pub fn runner() -> TestRunner {
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

pub fn check<S>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

pub fn term() -> impl Strategy<Value = PoissonTerm> {
    (-2i32..=2, -2i32..=2, 0u32..=1, 0u32..=1, any::<bool>(), 0.1f64..1.0, any::<bool>()).prop_map(
        |(k1, k3, a1, a3, cos, mag, neg)| {
            let kind = if cos || (k1 == 0 && k3 == 0) { TrigKind::Cos } else { TrigKind::Sin };
            let m1 = k1.unsigned_abs() + 2 * a1;
            let m3 = k3.unsigned_abs() + 2 * a3;
            PoissonTerm { coeff: if neg { -mag } else { mag }, key: TermKey::new(m1, m3, kind, k1, k3) }
        },
    )
}

pub fn series(max_terms: usize) -> impl Strategy<Value = PoissonSeries> {
    prop::collection::vec(term(), 1..=max_terms).prop_map(|t| PoissonSeries::from_terms(t, trunc()))
}

fn l1(f: &PoissonSeries) -> f64 {
    f.terms().values().map(|c| c.abs()).sum()
}

/// max |coeff(a − b)| ≤ tol · scale.
fn close(a: &PoissonSeries, b: &PoissonSeries, tol: f64, scale: f64) -> Result<(), TestCaseError> {
    let d = a.sub(b);
    let m = d.terms().values().fold(0.0f64, |m, c| m.max(c.abs()));
    prop_assert!(m <= tol * scale.max(f64::MIN_POSITIVE), "max difference {m:e} exceeds {tol:e} x {scale:e}");
    Ok(())
}

fn br(f: &PoissonSeries, g: &PoissonSeries) -> Result<PoissonSeries, TestCaseError> {
    poisson_bracket(f, g, &trunc()).map_err(|e| TestCaseError::fail(e.to_string()))
}

fn mul(f: &PoissonSeries, g: &PoissonSeries) -> PoissonSeries {
    multiply(f, g, &trunc())
}

const TOL: f64 = 1e-13;

pub fn mul_commutative() -> Result<(), String> {
    check((series(6), series(6)), |(f, g)| close(&mul(&f, &g), &mul(&g, &f), TOL, l1(&f) * l1(&g)))
}

pub fn mul_associative() -> Result<(), String> {
    check((series(4), series(4), series(4)), |(f, g, h)| {
        close(&mul(&mul(&f, &g), &h), &mul(&f, &mul(&g, &h)), TOL, l1(&f) * l1(&g) * l1(&h))
    })
}

pub fn mul_distributive() -> Result<(), String> {
    check((series(5), series(5), series(5)), |(f, g, h)| {
        close(&mul(&f, &g.add(&h)), &mul(&f, &g).add(&mul(&f, &h)), TOL, l1(&f) * (l1(&g) + l1(&h)))
    })
}

pub fn mul_identity() -> Result<(), String> {
    check(series(8), |f| close(&mul(&f, &PoissonSeries::constant(1.0, trunc())), &f, TOL, l1(&f)))
}

pub fn additive_inverse() -> Result<(), String> {
    check(series(8), |f| {
        prop_assert!(f.sub(&f).is_empty());
        prop_assert!(f.add(&f.neg()).is_empty());
        Ok(())
    })
}

pub fn bracket_antisymmetric() -> Result<(), String> {
    check((series(6), series(6)), |(f, g)| {
        let fg = br(&f, &g)?;
        close(&fg, &br(&g, &f)?.neg(), TOL, l1(&f) * l1(&g) * 16.0)?;
        close(&br(&f, &f)?, &PoissonSeries::zero(trunc()), TOL, l1(&f) * l1(&f) * 16.0)
    })
}

pub fn bracket_bilinear() -> Result<(), String> {
    check((series(5), series(5), series(5), -2.0f64..2.0), |(f, g, h, a)| {
        let lhs = br(&f.scale(a).add(&g), &h)?;
        let rhs = br(&f, &h)?.scale(a).add(&br(&g, &h)?);
        close(&lhs, &rhs, TOL, (a.abs() * l1(&f) + l1(&g)) * l1(&h) * 16.0)
    })
}

pub fn bracket_leibniz() -> Result<(), String> {
    check((series(4), series(4), series(4)), |(f, g, h)| {
        let lhs = br(&f, &mul(&g, &h))?;
        let rhs = mul(&br(&f, &g)?, &h).add(&mul(&g, &br(&f, &h)?));
        close(&lhs, &rhs, TOL, l1(&f) * l1(&g) * l1(&h) * 64.0)
    })
}

pub fn bracket_jacobi() -> Result<(), String> {
    check((series(4), series(4), series(4)), |(f, g, h)| {
        let j = br(&f, &br(&g, &h)?)?.add(&br(&g, &br(&h, &f)?)?).add(&br(&h, &br(&f, &g)?)?);
        close(&j, &PoissonSeries::zero(trunc()), 1e-12, l1(&f) * l1(&g) * l1(&h) * 256.0)
    })
}

pub fn norm_submultiplicative() -> Result<(), String> {
    check((series(6), series(6), 0.1f64..10.0, 0.1f64..10.0), |(f, g, r1, r3)| {
        let w = WeightVector::new(r1, r3).unwrap();
        let lhs = mul(&f, &g).weighted_norm(&w);
        let rhs = f.weighted_norm(&w) * g.weighted_norm(&w);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "|fg| = {lhs:e} > |f||g| = {rhs:e}");
        Ok(())
    })
}

pub fn serialization_round_trip() -> Result<(), String> {
    check(series(10), |f| {
        let t = io::from_text(&io::to_text(&f), trunc()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&t, &f);
        let j = io::from_json(&io::to_json(&f), trunc()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&j, &f);
        Ok(())
    })
}

pub fn canonicalization_idempotent() -> Result<(), String> {
    check(series(10), |f| {
        prop_assert_eq!(f.canonicalized(), f.clone());
        prop_assert!(f.iter().all(|t| t.key.is_canonical() && t.coeff != 0.0));
        Ok(())
    })
}

pub fn product_evaluates_pointwise() -> Result<(), String> {
    let point = (0.0f64..2.0, 0.0f64..2.0, -3.2f64..3.2, -3.2f64..3.2);
    check((series(6), series(6), point), |(f, g, (u1, u3, a1, a3))| {
        let ev = |s: &PoissonSeries| s.evaluate([u1, u3], [a1, a3]).map_err(|e| TestCaseError::fail(e.to_string()));
        let lhs = ev(&mul(&f, &g))?;
        let rhs = ev(&f)? * ev(&g)?;
        // |f| ≤ Σ|c|·U^{m/2} ≤ l1·2^4 on this box
        let scale = l1(&f) * l1(&g) * 256.0;
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale, "{lhs:e} vs {rhs:e}");
        Ok(())
    })
}

pub type Property = fn() -> Result<(), String>;

/// Every property checked by criterion 11, by name.
pub const PROPERTIES: &[(&str, Property)] = &[
    ("multiply commutative", mul_commutative),
    ("multiply associative", mul_associative),
    ("multiply distributive", mul_distributive),
    ("multiplicative identity", mul_identity),
    ("additive inverse", additive_inverse),
    ("bracket antisymmetric", bracket_antisymmetric),
    ("bracket bilinear", bracket_bilinear),
    ("bracket Leibniz rule", bracket_leibniz),
    ("bracket Jacobi identity", bracket_jacobi),
    ("majorant submultiplicative", norm_submultiplicative),
    ("serialization round-trip", serialization_round_trip),
    ("canonicalization idempotent", canonicalization_idempotent),
    ("product evaluates pointwise", product_evaluates_pointwise),
];
