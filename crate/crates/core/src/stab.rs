//! Effective stability time from the normal-form remainder.

use crate::birkhoff::NormalForm;
use crate::exec::Exec;
use crate::model::BodyParams;
use crate::pipeline::{self, PipelineError, Settings, WeightSpec};
use crate::pseries::{PoissonSeries, WeightVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate estimate: no order between 2 and {0} gives a finite escape time")]
    Degenerate(usize),
    #[error("normal form has order {have}, estimate needs {need}")]
    OrderTooLow { have: usize, need: usize },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

/// Power of ρ in the escape-time denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentVariant {
    /// ρ^(r/2 + 1)
    #[default]
    Printed,
    /// ρ^((r + 1)/2), the homogeneity degree of {U, R_{r+1}} in U.
    Homogeneous,
}

impl ExponentVariant {
    pub fn exponent(self, r: usize) -> f64 {
        match self {
            ExponentVariant::Printed => r as f64 / 2.0 + 1.0,
            ExponentVariant::Homogeneous => (r as f64 + 1.0) / 2.0,
        }
    }
}

impl fmt::Display for ExponentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentVariant::Printed => "printed",
            ExponentVariant::Homogeneous => "homogeneous",
        })
    }
}

impl FromStr for ExponentVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "printed" => Ok(Self::Printed),
            "homogeneous" => Ok(Self::Homogeneous),
            _ => Err(format!("unknown exponent variant `{s}` (expected printed or homogeneous)")),
        }
    }
}

/// max_j |{U_j, R}|_R / R_j with {U_j, R} = −∂R/∂u_j.
pub fn remainder_velocity_norm(block: &PoissonSeries, weights: &WeightVector) -> f64 {
    (0..2).map(|j| block.d_du(j).weighted_norm(weights) / weights.get(j)).fold(0.0, f64::max)
}

/// τ(ρ₀, ρ, r) = (ρ − ρ₀) / (c · norm · ρ^p). A zero norm gives +∞.
pub fn escape_time_tau(
    rho0: f64,
    rho: f64,
    r: usize,
    rem_norm: f64,
    c: f64,
    variant: ExponentVariant,
) -> Result<f64, StabError> {
    if !(rho0 > 0.0) || !(rho > rho0) {
        return Err(StabError::Domain(format!("need 0 < rho0 < rho, got rho0 = {rho0}, rho = {rho}")));
    }
    if !(c >= 1.0) {
        return Err(StabError::Domain(format!("c must be at least 1, got {c}")));
    }
    if !(rem_norm >= 0.0) {
        return Err(StabError::Domain(format!("remainder norm must be nonnegative, got {rem_norm}")));
    }
    if rem_norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((rho - rho0) / (c * rem_norm * rho.powf(variant.exponent(r))))
}

/// Maximizer of τ over ρ: p/(p − 1)·ρ₀, i.e. ((r + 2)/r)·ρ₀ for the printed exponent.
pub fn rho_opt(rho0: f64, r: usize, variant: ExponentVariant) -> Result<f64, StabError> {
    let p = variant.exponent(r);
    if !(p > 1.0) {
        return Err(StabError::Domain(format!("tau has no interior maximum for r = {r} ({variant} exponent)")));
    }
    Ok(p / (p - 1.0) * rho0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub r: usize,
    pub rho_opt: f64,
    pub remainder_norm: f64,
    pub tau_tilde: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub rho0: f64,
    pub c: f64,
    pub weights: WeightVector,
    pub variant: ExponentVariant,
    pub per_order: Vec<OrderRow>,
    pub r_opt: usize,
    /// Years.
    pub t: f64,
}

impl StabilityEstimate {
    pub fn row(&self, r: usize) -> Option<&OrderRow> {
        self.per_order.iter().find(|row| row.r == r)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,rho_opt,remainder_norm,tau_tilde\n");
        for row in &self.per_order {
            s.push_str(&format!("{},{:.12e},{:.12e},{:.12e}\n", row.r, row.rho_opt, row.remainder_norm, row.tau_tilde));
        }
        s
    }
}

/// Remainder norms |{U, R^(r)_{r+1}}|_R for even r in 2..=r_max.
pub fn remainder_norms(nf: &NormalForm, weights: &WeightVector, r_max: usize) -> Result<Vec<(usize, f64)>, StabError> {
    if nf.order < r_max {
        return Err(StabError::OrderTooLow { have: nf.order, need: r_max });
    }
    Ok((2..=r_max).step_by(2).map(|r| (r, remainder_velocity_norm(&nf.stage_remainders[r], weights))).collect())
}

/// T(ρ₀) = max over even r ≤ r_max of τ(ρ₀, ρ_opt(r), r).
pub fn effective_stability_time(
    nf: &NormalForm,
    rho0: f64,
    weights: &WeightVector,
    c: f64,
    r_max: usize,
    variant: ExponentVariant,
) -> Result<StabilityEstimate, StabError> {
    let norms = remainder_norms(nf, weights, r_max)?;
    estimate_from_norms(&norms, rho0, weights, c, variant)
}

/// Same as [`effective_stability_time`] from precomputed remainder norms.
pub fn estimate_from_norms(
    norms: &[(usize, f64)],
    rho0: f64,
    weights: &WeightVector,
    c: f64,
    variant: ExponentVariant,
) -> Result<StabilityEstimate, StabError> {
    let mut rows = Vec::with_capacity(norms.len());
    for &(r, n) in norms {
        let rho = rho_opt(rho0, r, variant)?;
        let tau = escape_time_tau(rho0, rho, r, n, c, variant)?;
        rows.push(OrderRow { r, rho_opt: rho, remainder_norm: n, tau_tilde: tau });
    }
    let r_max = norms.last().map(|x| x.0).unwrap_or(0);
    if rows.is_empty() || rows.iter().all(|row| !row.tau_tilde.is_finite() || row.tau_tilde <= 0.0) {
        return Err(StabError::Degenerate(r_max));
    }
    let best = rows.iter().fold(&rows[0], |b, row| if row.tau_tilde > b.tau_tilde { row } else { b });
    Ok(StabilityEstimate {
        rho0,
        c,
        weights: *weights,
        variant,
        r_opt: best.r,
        t: best.tau_tilde,
        per_order: rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanParam {
    #[serde(rename = "i")]
    Inclination,
    #[serde(rename = "Omega_dot")]
    OmegaDot,
    #[serde(rename = "C_norm")]
    CNorm,
}

impl ScanParam {
    pub fn apply(self, p: &mut BodyParams, v: f64) {
        match self {
            ScanParam::Inclination => p.i_rad = v,
            ScanParam::OmegaDot => p.omega_dot = v,
            ScanParam::CNorm => p.c_norm = v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanParam::Inclination => "i",
            ScanParam::OmegaDot => "Omega_dot",
            ScanParam::CNorm => "C_norm",
        }
    }
}

impl FromStr for ScanParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "i" | "i_rad" | "inclination" => Ok(Self::Inclination),
            "Omega_dot" | "omega_dot" | "Omega_dot_rad_per_year" => Ok(Self::OmegaDot),
            "C_norm" | "c_norm" | "C_over_mRe2" => Ok(Self::CNorm),
            _ => Err(format!("unknown scan parameter `{s}` (expected i, Omega_dot or C_norm)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub param: ScanParam,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl ScanAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|k| if k + 1 == self.n { self.max } else { self.min + h * k as f64 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub x: ScanAxis,
    pub y: ScanAxis,
    pub base: BodyParams,
    pub settings: Settings,
    pub rho0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoleKind {
    EquilibriumNotFound,
    NotElliptic,
    Resonance,
    /// Any other pipeline failure (degenerate estimate, series error).
    Other,
}

impl HoleKind {
    pub fn of(e: &PipelineError) -> Self {
        use crate::birkhoff::BirkhoffError;
        use crate::equil::EquilError;
        match e {
            PipelineError::Equil(EquilError::EquilibriumNotFound(_))
            | PipelineError::Equil(EquilError::InconsistentEquilibrium(..))
            | PipelineError::Equil(EquilError::SingularExpansionPoint(_)) => HoleKind::EquilibriumNotFound,
            PipelineError::Equil(EquilError::NotElliptic(_)) | PipelineError::Equil(EquilError::UntanglingFailed(_)) => {
                HoleKind::NotElliptic
            }
            PipelineError::Birkhoff(BirkhoffError::Resonance { .. }) => HoleKind::Resonance,
            _ => HoleKind::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HoleKind::EquilibriumNotFound => "equilibrium-not-found",
            HoleKind::NotElliptic => "not-elliptic",
            HoleKind::Resonance => "resonance",
            HoleKind::Other => "other",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanCell {
    /// log10 T
    Value(f64),
    Hole(HoleKind),
}

impl ScanCell {
    pub fn value(&self) -> Option<f64> {
        match self {
            ScanCell::Value(v) => Some(*v),
            ScanCell::Hole(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub x: ScanAxis,
    pub y: ScanAxis,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `cells[iy * nx + ix]`.
    pub cells: Vec<ScanCell>,
}

impl ScanResult {
    pub fn get(&self, ix: usize, iy: usize) -> ScanCell {
        self.cells[iy * self.xs.len() + ix]
    }

    /// Cells at fixed y, in x order.
    pub fn row(&self, iy: usize) -> &[ScanCell] {
        let nx = self.xs.len();
        &self.cells[iy * nx..(iy + 1) * nx]
    }

    /// Cells at fixed x, in y order.
    pub fn column(&self, ix: usize) -> Vec<ScanCell> {
        (0..self.ys.len()).map(|iy| self.get(ix, iy)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},log10_T\n", self.x.param.name(), self.y.param.name());
        for (iy, y) in self.ys.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                let v = match self.get(ix, iy) {
                    ScanCell::Value(v) => format!("{v:.12e}"),
                    ScanCell::Hole(k) => format!("hole:{}", k.as_str()),
                };
                s.push_str(&format!("{x:.12e},{y:.12e},{v}\n"));
            }
        }
        s
    }

    /// gnuplot `matrix nonuniform` layout; holes are written as NaN.
    pub fn to_gnuplot(&self) -> String {
        let mut s = format!("{}", self.xs.len());
        for x in &self.xs {
            s.push_str(&format!(" {x:.12e}"));
        }
        s.push('\n');
        for (iy, y) in self.ys.iter().enumerate() {
            s.push_str(&format!("{y:.12e}"));
            for c in self.row(iy) {
                match c.value() {
                    Some(v) => s.push_str(&format!(" {v:.12e}")),
                    None => s.push_str(" NaN"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// log10 T at one parameter point, or the hole kind.
pub fn scan_point(params: &BodyParams, settings: &Settings, rho0: f64) -> ScanCell {
    match pipeline::run_with(params, settings, Exec::Sequential).and_then(|run| run.estimate(rho0)) {
        Ok(est) => ScanCell::Value(est.t.log10()),
        Err(e) => ScanCell::Hole(HoleKind::of(&e)),
    }
}

/// The polydisk is one fixed domain for the whole grid: weights given as a
/// libration amplitude are resolved once, at the base parameters.
pub fn fixed_weights(spec: &ScanSpec) -> Result<Settings, StabError> {
    let mut settings = spec.settings;
    if let WeightSpec::Libration(_) = settings.weights {
        let red = pipeline::reduce(&spec.base, &settings.trunc, Exec::Sequential)
            .map_err(|e| StabError::InvalidScan(format!("base point: {e}")))?;
        let w = settings
            .weights
            .resolve(red.linearization.u_star)
            .map_err(|e| StabError::InvalidScan(format!("base point: {e}")))?;
        settings.weights = WeightSpec::Fixed(w);
    }
    Ok(settings)
}

/// Runs the pipeline on every grid point. Points are independent; results
/// are written by index, so the output does not depend on scheduling.
pub fn parameter_scan(spec: &ScanSpec, exec: Exec) -> Result<ScanResult, StabError> {
    if spec.x.n == 0 || spec.y.n == 0 {
        return Err(StabError::InvalidScan("grid sizes must be positive".into()));
    }
    if spec.x.param == spec.y.param {
        return Err(StabError::InvalidScan("the two axes must scan different parameters".into()));
    }
    for a in [&spec.x, &spec.y] {
        if !(a.min.is_finite() && a.max.is_finite()) || (a.n > 1 && a.max == a.min) {
            return Err(StabError::InvalidScan(format!("bad range for {}", a.param.name())));
        }
    }
    let settings = fixed_weights(spec)?;
    let xs = spec.x.values();
    let ys = spec.y.values();
    let nx = xs.len();
    let cells = exec.map_indices(nx * ys.len(), |idx| {
        let mut p = spec.base;
        spec.x.param.apply(&mut p, xs[idx % nx]);
        spec.y.param.apply(&mut p, ys[idx / nx]);
        scan_point(&p, &settings, spec.rho0)
    });
    Ok(ScanResult { x: spec.x, y: spec.y, xs, ys, cells })
}
