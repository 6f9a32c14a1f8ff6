//! Adaptive Gragg-Bulirsch-Stoer integration and the H⁽⁰⁾ flow check.

use crate::exec::Exec;
use crate::pseries::{PoissonSeries, SeriesError, SeriesEvaluator, WeightVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs { t: f64, source: SeriesError },
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("step limit of {0} reached")]
    TooManySteps(usize),
    #[error("sample {index}: {source}")]
    Sample { index: usize, source: Box<IntegrateError> },
    #[error("invalid integration request: {0}")]
    Invalid(String),
}

/// Extrapolation integrator on the modified midpoint rule with step
/// sequence 2, 4, 6, ...
#[derive(Clone, Debug, PartialEq)]
pub struct Gbs {
    pub rtol: f64,
    /// Absolute tolerance per component.
    pub atol: Vec<f64>,
    /// Deepest extrapolation column.
    pub k_max: usize,
    pub max_steps: usize,
    pub h_init: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Gbs {
    pub fn new(rtol: f64, atol: Vec<f64>) -> Self {
        Self { rtol, atol, k_max: 8, max_steps: 10_000_000, h_init: None }
    }

    /// Integrates y' = f(t, y) from t0 to t1. `after_step` runs on every
    /// accepted state and may replace it by an equivalent one (angle wrapping).
    pub fn integrate<F, G>(
        &self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t1: f64,
        mut after_step: G,
    ) -> Result<(Vec<f64>, IntegrationStats), IntegrateError>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SeriesError>,
        G: FnMut(f64, &mut [f64]),
    {
        let n = y0.len();
        if self.atol.len() != n {
            return Err(IntegrateError::Invalid(format!("atol has {} entries for {} unknowns", self.atol.len(), n)));
        }
        if !(self.rtol > 0.0) || self.k_max < 2 {
            return Err(IntegrateError::Invalid("need rtol > 0 and k_max >= 2".into()));
        }
        let mut stats = IntegrationStats::default();
        let mut t = t0;
        let mut y = y0.to_vec();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok((y, stats));
        }
        let dir = span.signum();
        let mut h = self.h_init.unwrap_or(span.abs() * 1e-3).min(span.abs()) * dir;
        let mut k_target = (self.k_max / 2).max(2);
        let seq: Vec<usize> = (1..=self.k_max).map(|k| 2 * k).collect();

        let mut f0 = vec![0.0; n];
        let mut z0 = vec![0.0; n];
        let mut z1 = vec![0.0; n];
        let mut dz = vec![0.0; n];
        let mut table: Vec<Vec<f64>> = vec![vec![0.0; n]; self.k_max];

        while (t1 - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(IntegrateError::TooManySteps(self.max_steps));
            }
            let last = (t + h - t1) * dir >= 0.0;
            if last {
                h = t1 - t;
            }
            if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(IntegrateError::StepUnderflow(t));
            }
            f(t, &y, &mut f0).map_err(|source| IntegrateError::Rhs { t, source })?;
            stats.evaluations += 1;

            let mut accepted = None;
            let k_limit = (k_target + 1).min(self.k_max);
            let mut last_err = f64::INFINITY;
            for k in 0..k_limit {
                let m = seq[k];
                let hs = h / m as f64;
                // modified midpoint
                for i in 0..n {
                    z0[i] = y[i];
                    z1[i] = y[i] + hs * f0[i];
                }
                for step in 1..m {
                    f(t + hs * step as f64, &z1, &mut dz).map_err(|source| IntegrateError::Rhs { t, source })?;
                    stats.evaluations += 1;
                    for i in 0..n {
                        let z2 = z0[i] + 2.0 * hs * dz[i];
                        z0[i] = z1[i];
                        z1[i] = z2;
                    }
                }
                f(t + h, &z1, &mut dz).map_err(|source| IntegrateError::Rhs { t, source })?;
                stats.evaluations += 1;
                for i in 0..n {
                    table[k][i] = 0.5 * (z0[i] + z1[i] + hs * dz[i]);
                }
                // Aitken-Neville in h²
                for j in (0..k).rev() {
                    let ratio = (seq[k] as f64 / seq[j] as f64).powi(2) - 1.0;
                    let (lo, hi) = table.split_at_mut(j + 1);
                    for (a, b) in lo[j].iter_mut().zip(&hi[0]).take(n) {
                        *a = b + (b - *a) / ratio;
                    }
                }
                if k == 0 {
                    continue;
                }
                // table[0] is the highest-order value, table[1] the previous diagonal
                let mut err = 0.0;
                for i in 0..n {
                    let sc = self.atol[i] + self.rtol * y[i].abs().max(table[0][i].abs());
                    let d = (table[0][i] - table[1][i]) / sc;
                    err += d * d;
                }
                err = (err / n as f64).sqrt();
                last_err = err;
                if err <= 1.0 {
                    accepted = Some((k, err));
                    break;
                }
            }
            match accepted {
                Some((k, err)) => {
                    t = if last { t1 } else { t + h };
                    y.copy_from_slice(&table[0]);
                    after_step(t, &mut y);
                    stats.accepted += 1;
                    let expo = 1.0 / (2 * k + 1) as f64;
                    let mut fac = 0.94 * (0.65 / err.max(1e-10)).powf(expo);
                    fac = fac.clamp(0.2, 4.0);
                    if k + 1 < k_target && k_target > 2 {
                        k_target -= 1;
                    } else if k + 1 >= k_limit && k_target + 1 < self.k_max {
                        k_target += 1;
                    }
                    h *= fac;
                }
                None => {
                    stats.rejected += 1;
                    let expo = 1.0 / (2 * k_limit - 1) as f64;
                    let fac = (0.94 * (0.65 / last_err).powf(expo)).clamp(0.05, 0.5);
                    h *= fac;
                }
            }
        }
        Ok((y, stats))
    }
}

/// Hamilton's equations for a Poisson series in (U₁, U₃, u₁, u₃).
#[derive(Clone, Debug)]
pub struct HamiltonianFlow {
    eval: SeriesEvaluator,
}

impl HamiltonianFlow {
    pub fn new(h: &PoissonSeries) -> Self {
        Self { eval: SeriesEvaluator::new(h) }
    }

    /// dU/dt = −∂H/∂u, du/dt = ∂H/∂U.
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<(), SeriesError> {
        let (_, d_act, d_ang) = self.eval.value_and_gradient([y[0], y[1]], [y[2], y[3]])?;
        dy[0] = -d_ang[0];
        dy[1] = -d_ang[1];
        dy[2] = d_act[0];
        dy[3] = d_act[1];
        Ok(())
    }

    pub fn energy(&self, y: &[f64]) -> Result<f64, SeriesError> {
        self.eval.value([y[0], y[1]], [y[2], y[3]])
    }
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub index: usize,
    /// Initial (U₁, U₃, u₁, u₃).
    pub initial: [f64; 4],
    /// max over time of U_j(t)/(ρ_opt R_j).
    pub max_ratio: [f64; 2],
    pub energy_drift: f64,
    pub stats: IntegrationStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub rho0: f64,
    pub rho_opt: f64,
    pub t_span: f64,
    pub samples: Vec<SampleReport>,
    pub max_ratio: f64,
    pub max_energy_drift: f64,
}

impl CheckReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sample,U1_0,U3_0,u1_0,u3_0,max_ratio_1,max_ratio_3,energy_drift,steps\n");
        for r in &self.samples {
            s.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                r.index,
                r.initial[0],
                r.initial[1],
                r.initial[2],
                r.initial[3],
                r.max_ratio[0],
                r.max_ratio[1],
                r.energy_drift,
                r.stats.accepted
            ));
        }
        s
    }
}

/// Initial condition `k` of `n` on the boundary of Δ_{ρ₀R}: one action sits on
/// its face and the other at a fraction of it; angles spread over the torus.
pub fn boundary_sample(k: usize, n: usize, rho0: f64, weights: &WeightVector) -> [f64; 4] {
    let phi = 0.5 * PI * ((k % 4) as f64 + 0.5) / 4.0;
    let (c, s) = (phi.cos(), phi.sin());
    let m = c.max(s);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let u1 = TAU * k as f64 / n as f64;
    let u3 = TAU * (k as f64 * golden).fract();
    [rho0 * weights.r1 * c / m, rho0 * weights.r3 * s / m, wrap(u1), wrap(u3)]
}

/// Integrates H from `n_samples` boundary points of Δ_{ρ₀R} over `t_span`
/// years and tracks the actions against Δ_{ρ_opt R} and the energy drift.
#[allow(clippy::too_many_arguments)]
pub fn check_integrate(
    h: &PoissonSeries,
    weights: &WeightVector,
    rho0: f64,
    rho_opt: f64,
    t_span: f64,
    n_samples: usize,
    rtol: f64,
    exec: Exec,
) -> Result<CheckReport, IntegrateError> {
    if n_samples == 0 || !(t_span > 0.0) || !(rho0 > 0.0) || !(rho_opt > 0.0) {
        return Err(IntegrateError::Invalid("need n_samples > 0 and positive t_span, rho0, rho_opt".into()));
    }
    let flow = HamiltonianFlow::new(h);
    let atol = vec![rtol * rho0 * weights.r1, rtol * rho0 * weights.r3, rtol, rtol];
    let gbs = Gbs::new(rtol, atol);
    let bound = [rho_opt * weights.r1, rho_opt * weights.r3];
    let results = exec.map_indices(n_samples, |index| {
        let y0 = boundary_sample(index, n_samples, rho0, weights);
        let e0 = flow.energy(&y0).map_err(|source| IntegrateError::Rhs { t: 0.0, source })?;
        let mut max_ratio = [y0[0] / bound[0], y0[1] / bound[1]];
        let mut drift = 0.0f64;
        let mut energy_err = None;
        let (_, stats) = gbs.integrate(
            |_, y, dy| flow.rhs(y, dy),
            0.0,
            &y0,
            t_span,
            |t, y| {
                y[2] = wrap(y[2]);
                y[3] = wrap(y[3]);
                max_ratio[0] = max_ratio[0].max(y[0] / bound[0]);
                max_ratio[1] = max_ratio[1].max(y[1] / bound[1]);
                match flow.energy(y) {
                    Ok(e) => drift = drift.max(((e - e0) / e0).abs()),
                    Err(source) => energy_err = Some(IntegrateError::Rhs { t, source }),
                }
            },
        )?;
        if let Some(e) = energy_err {
            return Err(e);
        }
        Ok(SampleReport { index, initial: y0, max_ratio, energy_drift: drift, stats })
    });
    let mut samples = Vec::with_capacity(n_samples);
    for (index, r) in results.into_iter().enumerate() {
        samples.push(r.map_err(|e| IntegrateError::Sample { index, source: Box::new(e) })?);
    }
    let max_ratio = samples.iter().map(|s| s.max_ratio[0].max(s.max_ratio[1])).fold(0.0, f64::max);
    let max_energy_drift = samples.iter().map(|s| s.energy_drift).fold(0.0, f64::max);
    Ok(CheckReport { rho0, rho_opt, t_span, samples, max_ratio, max_energy_drift })
}
