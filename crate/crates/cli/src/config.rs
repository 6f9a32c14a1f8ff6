//! `key = value` run configuration.

use cassini_core::birkhoff::DEFAULT_RESONANCE_THRESHOLD;
use cassini_core::model::BodyParams;
use cassini_core::pipeline::{Settings, WeightSpec};
use cassini_core::stab::{ExponentVariant, ScanAxis, ScanParam};
use cassini_core::{TruncationPolicy, WeightVector};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

pub const MANDATORY: &[&str] = &[
    "M_kg",
    "J2",
    "C22",
    "C_over_mRe2",
    "a_km",
    "e",
    "i_rad",
    "Omega_dot_rad_per_year",
    "n_o_rad_per_year",
    "sqrtU_degree",
    "r",
    "rho0",
];

const OPTIONAL: &[&str] = &[
    "G_const",
    "year_seconds",
    "ecc_degree",
    "poly_degree",
    "R1",
    "R3",
    "libration_amplitude",
    "c",
    "resonance_threshold",
    "exponent_variant",
    "curve_rho0_range",
    "curve_points",
    "curve_orders",
    "scan_axes",
    "scan_x_range",
    "scan_y_range",
    "scan_grid",
    "scan_order",
    "integrate_years",
    "integrate_samples",
    "integrate_rtol",
    "integrate_degree",
    "format",
    "directory",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue { line: usize, key: String, msg: String },
    #[error("missing mandatory keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Gnuplot,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Gnuplot => "dat",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "gnuplot" => Ok(Format::Gnuplot),
            _ => Err(format!("unknown format `{s}` (expected csv, json or gnuplot)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Gnuplot => "gnuplot",
        })
    }
}

/// T(ρ₀) curve sampled on a log grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub rho0_min: f64,
    pub rho0_max: f64,
    pub points: usize,
    /// Extra columns: T using orders up to each of these.
    pub orders: Vec<usize>,
}

impl CurveConfig {
    pub fn rho0_values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.rho0_min];
        }
        let (a, b) = (self.rho0_min.log10(), self.rho0_max.log10());
        (0..self.points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (self.points - 1) as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub x: ScanAxis,
    pub y: ScanAxis,
    /// Normalization order for the scan; `None` uses the main order.
    pub order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateConfig {
    pub years: f64,
    pub samples: usize,
    pub rtol: f64,
    /// √U degree of the integrated H⁽⁰⁾.
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: BodyParams,
    pub trunc: TruncationPolicy,
    pub order: usize,
    pub rho0: f64,
    pub weights: WeightSpec,
    pub c: f64,
    pub resonance_threshold: f64,
    pub variant: ExponentVariant,
    pub curve: CurveConfig,
    pub scan: ScanConfig,
    pub integrate: IntegrateConfig,
    pub format: Format,
    pub directory: PathBuf,
}

impl RunConfig {
    pub fn settings(&self) -> Settings {
        Settings {
            trunc: self.trunc,
            order: self.order,
            resonance_threshold: self.resonance_threshold,
            c: self.c,
            weights: self.weights,
            variant: self.variant,
        }
    }

    /// Settings for the scan order; the main truncation is kept when the orders agree.
    pub fn scan_settings(&self) -> Result<Settings, ConfigError> {
        let order = self.scan.order.unwrap_or(self.order);
        let mut s = self.settings();
        if order != self.order {
            let deg = order as u32 + 3;
            s.trunc = TruncationPolicy::new(deg, deg, self.trunc.max_ecc_degree)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            s.order = order;
        }
        Ok(s)
    }

    /// Range checks that span several keys; run again after command-line overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.order == 0 {
            return bad("r must be at least 1".into());
        }
        let need = self.order as u32 + 3;
        if self.trunc.max_sqrtu_degree < need {
            return bad(format!("r = {} needs sqrtU_degree >= {need}, got {}", self.order, self.trunc.max_sqrtu_degree));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return bad(format!("rho0 must be positive, got {}", self.rho0));
        }
        if !(self.c >= 1.0) {
            return bad(format!("c must be at least 1, got {}", self.c));
        }
        if !(self.resonance_threshold > 0.0) {
            return bad("resonance_threshold must be positive".into());
        }
        let cv = &self.curve;
        if !(cv.rho0_min > 0.0 && cv.rho0_max >= cv.rho0_min) || cv.points == 0 {
            return bad("curve_rho0_range must be 0 < min <= max and curve_points positive".into());
        }
        if let Some(&m) = cv.orders.iter().find(|&&m| m < 2 || m > self.order) {
            return bad(format!("curve order {m} is outside 2..={}", self.order));
        }
        let sc = &self.scan;
        if sc.x.param == sc.y.param {
            return bad("scan_axes must name two different parameters".into());
        }
        if sc.x.n == 0 || sc.y.n == 0 {
            return bad("scan_grid sizes must be positive".into());
        }
        if sc.order == Some(0) {
            return bad("scan_order must be at least 1".into());
        }
        let ig = &self.integrate;
        if !(ig.years > 0.0) || ig.samples == 0 || !(ig.rtol > 0.0) || ig.degree < 2 {
            return bad("integration needs positive years, samples, rtol and degree >= 2".into());
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct Parsed {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::BadValue {
                line: e.line,
                key: key.to_string(),
                msg: format!("`{}`: {err}", e.value),
            }),
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn req<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| ConfigError::Missing(vec![key.to_string()]))
    }

    fn list<T: FromStr>(&self, key: &str, len: Option<usize>) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(e) = self.raw(key) else { return Ok(None) };
        let bad = |msg: String| ConfigError::BadValue { line: e.line, key: key.to_string(), msg };
        let items = e
            .value
            .split(',')
            .map(|s| s.trim().parse::<T>().map_err(|err| bad(format!("`{}`: {err}", s.trim()))))
            .collect::<Result<Vec<T>, _>>()?;
        if let Some(n) = len {
            if items.len() != n {
                return Err(bad(format!("expected {n} comma-separated values, got {}", items.len())));
            }
        }
        Ok(Some(items))
    }

    fn pair<T: FromStr + Copy>(&self, key: &str, default: (T, T)) -> Result<(T, T), ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.list::<T>(key, Some(2))?.map_or(default, |v| (v[0], v[1])))
    }
}

pub fn parse_config(path: &Path) -> Result<Parsed, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<Parsed, ConfigError> {
    let mut warnings = Vec::new();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line, msg: format!("bad key `{key}`") });
        }
        if !MANDATORY.contains(&key) && !OPTIONAL.contains(&key) {
            warnings.push(format!("line {line}: unknown key `{key}` ignored"));
        }
        if let Some(prev) = entries.insert(key.to_string(), Entry { line, value: value.to_string() }) {
            warnings.push(format!("line {line}: duplicate key `{key}` overrides line {}", prev.line));
        }
    }
    let missing: Vec<String> = MANDATORY.iter().filter(|k| !entries.contains_key(**k)).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    let t = Table { entries };
    let config = build(&t)?;
    config.validate()?;
    Ok(Parsed { config, warnings })
}

fn build(t: &Table) -> Result<RunConfig, ConfigError> {
    let defaults = BodyParams::titan();
    let params = BodyParams {
        mass_kg: t.req("M_kg")?,
        j2: t.req("J2")?,
        c22: t.req("C22")?,
        c_norm: t.req("C_over_mRe2")?,
        a_km: t.req("a_km")?,
        e: t.req("e")?,
        i_rad: t.req("i_rad")?,
        omega_dot: t.req("Omega_dot_rad_per_year")?,
        n_o: t.req("n_o_rad_per_year")?,
        g_const: t.get("G_const", defaults.g_const)?,
        year_s: t.get("year_seconds", defaults.year_s)?,
    };
    let sqrtu: u32 = t.req("sqrtU_degree")?;
    let trunc = TruncationPolicy::new(sqrtu, t.get("poly_degree", sqrtu)?, t.get("ecc_degree", 8)?)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let order: usize = t.req("r")?;

    let weights = match (t.parse::<f64>("R1")?, t.parse::<f64>("R3")?) {
        (Some(r1), Some(r3)) => {
            WeightSpec::Fixed(WeightVector::new(r1, r3).map_err(|e| ConfigError::Invalid(e.to_string()))?)
        }
        (None, None) => {
            let a: f64 = t.get("libration_amplitude", 0.1)?;
            if !(a > 0.0) {
                return Err(ConfigError::Invalid(format!("libration_amplitude must be positive, got {a}")));
            }
            WeightSpec::Libration(a)
        }
        _ => return Err(ConfigError::Invalid("R1 and R3 must be given together".into())),
    };

    let (rho0_min, rho0_max) = t.pair("curve_rho0_range", (0.01, 10.0))?;
    let default_orders: Vec<usize> = [10, 20, 30].into_iter().filter(|&m| m <= order).collect();
    let curve = CurveConfig {
        rho0_min,
        rho0_max,
        points: t.get("curve_points", 41)?,
        orders: t.list("curve_orders", None)?.unwrap_or(default_orders),
    };

    let (px, py) = t.pair::<ScanParam>("scan_axes", (ScanParam::Inclination, ScanParam::OmegaDot))?;
    let range = |p: ScanParam| match p {
        ScanParam::Inclination => (0.004, 0.016),
        ScanParam::OmegaDot => (-0.016, -0.006),
        ScanParam::CNorm => (0.3, 0.4),
    };
    let (xmin, xmax) = t.pair("scan_x_range", range(px))?;
    let (ymin, ymax) = t.pair("scan_y_range", range(py))?;
    let (nx, ny) = t.pair("scan_grid", (20usize, 20usize))?;
    let scan = ScanConfig {
        x: ScanAxis { param: px, min: xmin, max: xmax, n: nx },
        y: ScanAxis { param: py, min: ymin, max: ymax, n: ny },
        order: t.parse("scan_order")?,
    };

    let integrate = IntegrateConfig {
        years: t.get("integrate_years", 1e4)?,
        samples: t.get("integrate_samples", 16)?,
        rtol: t.get("integrate_rtol", 1e-12)?,
        degree: t.get("integrate_degree", 8)?,
    };

    Ok(RunConfig {
        params,
        trunc,
        order,
        rho0: t.req("rho0")?,
        weights,
        c: t.get("c", 2.0)?,
        resonance_threshold: t.get("resonance_threshold", DEFAULT_RESONANCE_THRESHOLD)?,
        variant: t.get("exponent_variant", ExponentVariant::Printed)?,
        curve,
        scan,
        integrate,
        format: t.get("format", Format::Csv)?,
        directory: PathBuf::from(t.get("directory", String::from("out"))?),
    })
}
