use serde::{Deserialize, Serialize};

use super::ModelError;

pub const JULIAN_YEAR_S: f64 = 365.25 * 86400.0;
pub const G_SI: f64 = 6.67428e-11;

/// Physical inputs. Units: kg, km, rad, rad/year.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    /// Central (planet) mass in kg.
    pub mass_kg: f64,
    pub j2: f64,
    pub c22: f64,
    /// C/(m·R_e²) of the rotating body.
    pub c_norm: f64,
    pub a_km: f64,
    pub e: f64,
    pub i_rad: f64,
    pub omega_dot: f64,
    pub n_o: f64,
    pub g_const: f64,
    pub year_s: f64,
}

impl BodyParams {
    /// Titan around Saturn.
    pub fn titan() -> Self {
        Self {
            mass_kg: 5.6832e26,
            j2: 3.1808e-5,
            c22: 9.983e-6,
            c_norm: 0.3414,
            a_km: 1.221865e6,
            e: 0.0289,
            i_rad: 5.579818e-3,
            omega_dot: -8.931240e-3,
            n_o: 143.924,
            g_const: G_SI,
            year_s: JULIAN_YEAR_S,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("mass", self.mass_kg),
            ("C/mRe^2", self.c_norm),
            ("a", self.a_km),
            ("n_o", self.n_o),
            ("G", self.g_const),
            ("year", self.year_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("J2", self.j2), ("C22", self.c22)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidParams(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(ModelError::InvalidParams(format!("e must lie in [0, 1), got {}", self.e)));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.i_rad) {
            return Err(ModelError::InvalidParams(format!("i must lie in [0, pi/2), got {}", self.i_rad)));
        }
        if !self.omega_dot.is_finite() {
            return Err(ModelError::InvalidParams("Omega_dot must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// √(GM/a³) in rad/year.
    pub n_o_star: f64,
    pub delta1: f64,
    pub delta2: f64,
}

pub fn derive_params(p: &BodyParams) -> DerivedParams {
    let gamma1 = p.j2 / p.c_norm;
    let gamma2 = 2.0 * p.c22 / p.c_norm;
    let a_m = p.a_km * 1e3;
    let n_o_star = (p.g_const * p.mass_kg / (a_m * a_m * a_m)).sqrt() * p.year_s;
    let ratio = (n_o_star / p.n_o).powi(2);
    DerivedParams { gamma1, gamma2, n_o_star, delta1: -1.5 * ratio * gamma1, delta2: -1.5 * ratio * gamma2 }
}
