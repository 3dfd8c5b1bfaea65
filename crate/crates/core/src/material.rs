//! Isotropic elastic material parameters.

use serde::{Deserialize, Serialize};

use crate::constants::AMU;
use crate::error::{Error, Result};

/// Elastic and atomic parameters of the object's material.
///
/// Sound speeds and the reference atomic mass are configuration values; the
/// bundled presets are representative room-temperature numbers, not
/// reference data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Transverse (shear) sound speed, m/s.
    #[serde(rename = "c_t_m_per_s")]
    pub c_t: f64,
    /// Longitudinal sound speed, m/s.
    #[serde(rename = "c_l_m_per_s")]
    pub c_l: f64,
    /// Mass density, kg/m^3.
    #[serde(rename = "rho_kg_m3")]
    pub rho: f64,
    /// Reference atomic mass in atomic mass units.
    #[serde(rename = "m1_amu")]
    pub m1_amu: f64,
}

impl Material {
    pub fn new(name: &str, c_t: f64, c_l: f64, rho: f64, m1_amu: f64) -> Result<Self> {
        let m = Self {
            name: name.to_owned(),
            c_t,
            c_l,
            rho,
            m1_amu,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.c_t, self.c_l, self.rho, self.m1_amu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(format!(
                "material '{}' has non-finite parameters",
                self.name
            )));
        }
        if !(self.c_t > 0.0 && self.c_l > self.c_t) {
            return Err(Error::InvalidParameter(format!(
                "material '{}': need c_L > c_T > 0, got c_T = {}, c_L = {}",
                self.name, self.c_t, self.c_l
            )));
        }
        if self.rho <= 0.0 || self.m1_amu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "material '{}': density and atomic mass must be positive",
                self.name
            )));
        }
        Ok(())
    }

    /// Silicon. The shear speed is set so that the l = 2 torsional
    /// fundamental of a 1 um diameter sphere sits at 4.652 GHz.
    pub fn silicon() -> Self {
        Self {
            name: "silicon".into(),
            c_t: 5843.0,
            c_l: 8433.0,
            rho: 2329.0,
            m1_amu: 28.0,
        }
    }

    /// Steel, used for the slow edge of the regime band.
    pub fn steel() -> Self {
        Self {
            name: "steel".into(),
            c_t: 3200.0,
            c_l: 5900.0,
            rho: 7850.0,
            m1_amu: 56.0,
        }
    }

    /// Diamond, used for the fast edge of the regime band.
    pub fn diamond() -> Self {
        Self {
            name: "diamond".into(),
            c_t: 12800.0,
            c_l: 18000.0,
            rho: 3515.0,
            m1_amu: 12.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "silicon" | "si" => Some(Self::silicon()),
            "steel" => Some(Self::steel()),
            "diamond" | "c" => Some(Self::diamond()),
            _ => None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let m: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Reference atomic mass in kg.
    pub fn m1(&self) -> f64 {
        self.m1_amu * AMU
    }

    /// c_L / c_T.
    pub fn speed_ratio(&self) -> f64 {
        self.c_l / self.c_t
    }

    /// Debye-averaged sound speed: 3 / c^3 = 1 / c_L^3 + 2 / c_T^3.
    pub fn mean_sound_speed(&self) -> f64 {
        (3.0 / (self.c_l.powi(-3) + 2.0 * self.c_t.powi(-3))).cbrt()
    }

    /// Atoms per cubic metre, counting every atom at the reference mass.
    pub fn number_density(&self) -> f64 {
        self.rho / self.m1()
    }

    /// Upper edge of the acoustic spectrum, c (6 pi^2 n)^(1/3).
    pub fn debye_omega(&self) -> f64 {
        self.mean_sound_speed() * (6.0 * std::f64::consts::PI.powi(2) * self.number_density()).cbrt()
    }
}
