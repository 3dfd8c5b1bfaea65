//! Decoherence by scattering, absorption and emission of thermal photons.
//!
//! The channel is characterised by a momentum-diffusion constant `D_p`; a
//! superposition of separation `dx(t)` loses
//! `(D_p / hbar^2) int dx(t)^2 dt` of log-contrast. Two limiting laws are
//! blended:
//!
//! * objects well below the thermal wavelength act as point dipoles
//!   (Rayleigh scattering `~R^6 T^9`, absorption plus emission `~R^3 T^6`),
//! * large objects absorb and emit through their geometric cross-section
//!   (`~R^2 T^5`).
//!
//! The optical constants are configuration, not data: the defaults are a
//! representative dielectric and a grey-body emissivity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, HBAR, K_B, WIEN_B};
use crate::error::{Error, Result};
use crate::pulses::PulseProtocol;

const ZETA_5: f64 = 1.036_927_755_143_37;
const ZETA_9: f64 = 1.002_008_392_826_082_2;

/// Optical parameters of the object. Every field must be present when the
/// section is given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbrParams {
    /// Real part of the (infrared-averaged) permittivity.
    pub epsilon_re: Option<f64>,
    /// Imaginary part of the permittivity.
    pub epsilon_im: Option<f64>,
    /// Grey-body emissivity of a large object.
    pub emissivity: Option<f64>,
    /// Exponent of the blend between the small- and large-object laws.
    #[serde(default = "default_pade_p")]
    pub pade_p: f64,
}

fn default_pade_p() -> f64 {
    3.0
}

impl Default for BbrParams {
    fn default() -> Self {
        Self {
            epsilon_re: Some(2.1),
            epsilon_im: Some(0.57),
            emissivity: Some(0.3),
            pade_p: default_pade_p(),
        }
    }
}

/// Blackbody channel at one environment temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BbrModel {
    pub t_env: f64,
    /// Point-dipole localisation rate per R^3 (absorption plus emission), m^-5 s^-1.
    pub small_r3: f64,
    /// Point-dipole localisation rate per R^6 (scattering), m^-8 s^-1.
    pub small_r6: f64,
    /// Geometric localisation rate per R^2, m^-4 s^-1.
    pub large_r2: f64,
    pub pade_p: f64,
}

impl BbrModel {
    pub fn new(params: &BbrParams, t_env: f64) -> Result<Self> {
        let (Some(er), Some(ei), Some(emis)) = (params.epsilon_re, params.epsilon_im, params.emissivity) else {
            return Err(Error::Config(
                "[bbr] needs epsilon_re, epsilon_im and emissivity".into(),
            ));
        };
        if !(t_env >= 0.0 && t_env.is_finite()) {
            return Err(Error::InvalidParameter(format!("environment temperature {t_env} must be >= 0")));
        }
        if !(ei >= 0.0 && (0.0..=1.0).contains(&emis) && params.pade_p > 0.0 && er.is_finite()) {
            return Err(Error::Config(format!(
                "invalid optical parameters: eps = {er} + {ei}i, emissivity = {emis}, p = {}",
                params.pade_p
            )));
        }
        // (eps - 1) / (eps + 2)
        let num = num_complex::Complex64::new(er - 1.0, ei);
        let den = num_complex::Complex64::new(er + 2.0, ei);
        let pol = num / den;
        let k = K_B * t_env / (HBAR * C_LIGHT);
        let small_r3 = 2.0 * 16.0 * PI.powi(5) * C_LIGHT / 189.0 * k.powi(6) * pol.im;
        let small_r6 = 40320.0 * 8.0 * ZETA_9 * C_LIGHT / (9.0 * PI) * k.powi(9) * pol.re * pol.re;
        let large_r2 = emis * 8.0 * ZETA_5 * C_LIGHT / PI * k.powi(5);
        Ok(Self {
            t_env,
            small_r3,
            small_r6,
            large_r2,
            pade_p: params.pade_p,
        })
    }

    pub fn wien_wavelength(&self) -> f64 {
        wien_wavelength(self.t_env)
    }

    fn rates(&self, radius: f64) -> (f64, f64) {
        let small = self.small_r3 * radius.powi(3) + self.small_r6 * radius.powi(6);
        let large = self.large_r2 * radius * radius;
        (small, large)
    }

    /// Localisation rate `D_p / hbar^2`, m^-2 s^-1.
    pub fn localization_rate(&self, radius: f64) -> Result<f64> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
        }
        let (s, l) = self.rates(radius);
        if s == 0.0 || l == 0.0 {
            return Ok(0.0);
        }
        let p = self.pade_p;
        // Work with the ratio to avoid overflow of the individual powers.
        let (lo, hi) = if s < l { (s, l) } else { (l, s) };
        Ok(lo * (1.0 + (lo / hi).powf(p)).powf(-1.0 / p))
    }

    /// Momentum-diffusion constant `D_p`, (kg m/s)^2 / s.
    pub fn momentum_diffusion(&self, radius: f64) -> Result<f64> {
        Ok(HBAR * HBAR * self.localization_rate(radius)?)
    }

    /// Small-object law alone.
    pub fn small_limit(&self, radius: f64) -> f64 {
        HBAR * HBAR * self.rates(radius).0
    }

    /// Large-object law alone.
    pub fn large_limit(&self, radius: f64) -> f64 {
        HBAR * HBAR * self.rates(radius).1
    }

    pub fn evaluate(&self, pulse: &PulseProtocol, radius: f64) -> Result<BbrOutcome> {
        let d = self.momentum_diffusion(radius)?;
        Ok(BbrOutcome {
            log_c: bbr_log_contrast(pulse, d),
            d_p: d,
            coherence_warning: pulse.dx > self.wien_wavelength(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BbrOutcome {
    pub log_c: f64,
    pub d_p: f64,
    /// The splitting exceeds the thermal photon wavelength, where the
    /// quadratic law overestimates the loss.
    pub coherence_warning: bool,
}

/// Peak thermal-photon wavelength `b / T`.
pub fn wien_wavelength(t: f64) -> f64 {
    WIEN_B / t
}

/// `-(D_p / hbar^2) s_n dx^2 dt`.
pub fn bbr_log_contrast(pulse: &PulseProtocol, d_p: f64) -> f64 {
    -d_p / (HBAR * HBAR) * pulse.shape.exposure() * pulse.dx * pulse.dx * pulse.dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::Protocol;

    fn model(t: f64) -> BbrModel {
        BbrModel::new(&BbrParams::default(), t).unwrap()
    }

    #[test]
    fn limits_are_recovered() {
        let m = model(293.0);
        let tiny = 1e-9;
        let d = m.momentum_diffusion(tiny).unwrap();
        assert!((d / m.small_limit(tiny) - 1.0).abs() < 1e-9);
        let big = 1.0;
        let d = m.momentum_diffusion(big).unwrap();
        assert!((d / m.large_limit(big) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_diffusion_is_harmless() {
        let p = PulseProtocol::new(Protocol::Quartic, 1e-6, 1e-3).unwrap();
        assert_eq!(bbr_log_contrast(&p, 0.0), 0.0);
    }

    #[test]
    fn missing_constants_are_a_config_error() {
        let params = BbrParams {
            emissivity: None,
            ..BbrParams::default()
        };
        assert!(matches!(BbrModel::new(&params, 300.0), Err(Error::Config(_))));
    }

    #[test]
    fn monotone_in_temperature() {
        let mut last = 0.0;
        for i in 1..200 {
            let t = 0.01 * 1.05f64.powi(i);
            let d = model(t).momentum_diffusion(1e-4).unwrap();
            assert!(d > last, "T = {t}");
            last = d;
        }
    }

    #[test]
    fn warns_beyond_wien_wavelength() {
        let m = model(293.0);
        let near = PulseProtocol::new(Protocol::Rectangular, 1e-6, 1e-3).unwrap();
        let far = PulseProtocol::new(Protocol::Rectangular, 1e-4, 1e-3).unwrap();
        assert!(!m.evaluate(&near, 1e-6).unwrap().coherence_warning);
        assert!(m.evaluate(&far, 1e-6).unwrap().coherence_warning);
    }
}
