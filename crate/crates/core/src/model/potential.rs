use super::angles::{rot1, rot3, Angle, AngleSeries, Vector3, L4, L5, L6, N_ANGLES, SIGMA1, SIGMA3};
use super::params::{derive_params, BodyParams};
use super::ModelError;
use crate::orbexp::kepler_expansions;
use crate::pseries::{TrigKind, TruncationPolicy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Polynomial in (cos K, sin K): (a, b) → coefficient of cos^a K sin^b K.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KPoly {
    pub coeffs: BTreeMap<(u32, u32), f64>,
}

impl KPoly {
    pub fn get(&self, a: u32, b: u32) -> f64 {
        self.coeffs.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, a: u32, b: u32, c: f64) {
        *self.coeffs.entry((a, b)).or_insert(0.0) += c;
    }

    pub fn evaluate(&self, cos_k: f64, sin_k: f64) -> f64 {
        self.coeffs.iter().map(|((a, b), c)| c * cos_k.powi(*a as i32) * sin_k.powi(*b as i32)).sum()
    }

    /// Rewrites even powers of sin K through sin² = 1 − cos², leaving b ≤ 1.
    pub fn reduced(&self) -> KPoly {
        let mut out = KPoly::default();
        for (&(a, b), &c) in &self.coeffs {
            let j = b / 2;
            // (1 − c²)^j = Σ_i C(j,i) (−1)^i c^{2i}
            let mut binom = 1.0;
            for i in 0..=j {
                if i > 0 {
                    binom = binom * (j - i + 1) as f64 / i as f64;
                }
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                out.add(a + 2 * i, b % 2, c * sign * binom);
            }
        }
        out.coeffs.retain(|_, c| *c != 0.0);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Harmonic of the averaged potential: kind(k1 σ₁ + k3 σ₃).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Harmonic {
    pub kind: TrigKind,
    pub k1: i32,
    pub k3: i32,
}

/// ⟨V⟩ in rad/year as harmonics in (σ₁, σ₃) with (cos K, sin K) polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedPotential {
    pub harmonics: BTreeMap<Harmonic, KPoly>,
    /// Largest coefficient of the discarded terms that depend on the
    /// orbital pericenter (l₅, l₆); they enter at order e².
    pub pericenter_residual: f64,
}

impl AveragedPotential {
    pub fn zero() -> Self {
        Self { harmonics: BTreeMap::new(), pericenter_residual: 0.0 }
    }

    pub fn harmonic(&self, kind: TrigKind, k1: i32, k3: i32) -> Option<&KPoly> {
        self.harmonics.get(&Harmonic { kind, k1, k3 })
    }

    pub fn evaluate(&self, cos_k: f64, sin_k: f64, sigma1: f64, sigma3: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|(h, p)| p.evaluate(cos_k, sin_k) * h.kind.eval(h.k1 as f64 * sigma1 + h.k3 as f64 * sigma3))
            .sum()
    }

    /// Text dump: `coeff a b kind k1 k3` for cos^a K sin^b K · kind(k1σ₁+k3σ₃).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (h, p) in &self.harmonics {
            for ((a, b), c) in &p.coeffs {
                out.push_str(&format!("{:e} {} {} {} {} {}\n", c, a, b, h.kind, h.k1, h.k3));
            }
        }
        out
    }
}

const M_WAVE: [i32; N_ANGLES] = [0, 0, 1, 1, 0];
const THETA_WAVE: [i32; N_ANGLES] = [1, 1, 1, 0, 1];

/// Body-frame direction before the final spin rotation about the third axis.
fn pre_spin_direction(p: &BodyParams, trunc: &TruncationPolicy) -> Result<Vector3, ModelError> {
    let n = trunc.max_ecc_degree;
    let kep = kepler_expansions(n)?;
    let mut v: Vector3 =
        [AngleSeries::lift(&kep.cos_v, M_WAVE, n), AngleSeries::lift(&kep.sin_v, M_WAVE, n), AngleSeries::zero(n)];
    // orbit plane: argument of pericenter, then inclination
    v = rot3(&Angle::wave([0, 0, 0, 1, -1], n), &v);
    v = rot1(&Angle::numeric(-p.i_rad, n), &v);
    // node offset, then obliquity
    v = rot3(&Angle::wave([0, -1, 0, 0, 0], n), &v);
    v = rot1(&Angle::obliquity(n), &v);
    Ok(v)
}

/// Direction to the perturber in the body frame, (x₃, y₃, z₃), with no wobble.
pub fn body_direction_series(p: &BodyParams, trunc: &TruncationPolicy) -> Result<Vector3, ModelError> {
    let v = pre_spin_direction(p, trunc)?;
    Ok(rot3(&Angle::wave(THETA_WAVE, trunc.max_ecc_degree), &v))
}

/// ⟨V⟩ averaged over the fast angle l₄ (and the pericenter, see
/// [`AveragedPotential::pericenter_residual`]).
pub fn averaged_potential(p: &BodyParams, trunc: &TruncationPolicy) -> Result<AveragedPotential, ModelError> {
    p.validate()?;
    let n = trunc.max_ecc_degree;
    let d = derive_params(p);
    if d.delta1 == 0.0 && d.delta2 == 0.0 {
        return Ok(AveragedPotential::zero());
    }
    let kep = kepler_expansions(n)?;
    let v = pre_spin_direction(p, trunc)?;
    let xx = v[0].mul(&v[0]);
    let yy = v[1].mul(&v[1]);
    let xy = v[0].mul(&v[1]);
    // x²+y² is invariant under the spin rotation; x²−y² picks up 2θ
    let sum = xx.add(&yy);
    let diff = xx.axpy(-1.0, &yy);
    let two_theta = Angle::wave(THETA_WAVE.map(|k| 2 * k), n);
    let diff = two_theta.cos.mul(&diff).add(&two_theta.sin.mul(&xy.scale(2.0)));
    let inner = sum.scale(d.delta1).add(&diff.scale(d.delta2));
    let ar3 = AngleSeries::lift(&kep.a_over_r_cubed, M_WAVE, n);
    let v_avg = ar3.mul_filtered(&inner, |w| w[L4] == 0).scale(p.n_o);

    let mut harmonics: BTreeMap<Harmonic, KPoly> = BTreeMap::new();
    let mut residual: BTreeMap<(Harmonic, [i32; 2], u32, u32), f64> = BTreeMap::new();
    for (key, c) in &v_avg.terms {
        let value = c * p.e.powi(key.p as i32);
        let h = Harmonic { kind: key.kind, k1: key.k[SIGMA1], k3: key.k[SIGMA3] };
        if key.k[L5] != 0 || key.k[L6] != 0 {
            *residual.entry((h, [key.k[L5], key.k[L6]], key.a, key.b)).or_insert(0.0) += value;
        } else {
            harmonics.entry(h).or_default().add(key.a, key.b, value);
        }
    }
    for poly in harmonics.values_mut() {
        poly.coeffs.retain(|_, c| *c != 0.0);
    }
    harmonics.retain(|_, poly| !poly.coeffs.is_empty());
    let pericenter_residual = residual.values().fold(0.0f64, |m, c| m.max(c.abs()));
    Ok(AveragedPotential { harmonics, pericenter_residual })
}
