//! TOML run configuration.
//!
//! ```toml
//! [material]
//! preset = "silicon"        # or give every field explicitly
//!
//! [experiment]
//! radius_m = 0.5e-6
//! dx_m = 1e-7
//! a_max_m_s2 = 98.1
//! protocol = 2
//! temperature_k = 4.0
//! dff = 0.01
//!
//! [bbr]
//! epsilon_re = 2.1
//! epsilon_im = 0.57
//! emissivity = 0.3
//!
//! [sweep]
//! size_min_m = 1e-8
//! size_max_m = 1e2
//! temperatures_k = [293.0, 1.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bbr::BbrParams;
use crate::contrast::ExperimentConfig;
use crate::error::{Error, Result};
use crate::material::Material;
use crate::pulses::Protocol;
use crate::sweep::{Channel, SweepSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub bbr: BbrParams,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub numerics: NumericsSection,
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn material(&self) -> Result<Material> {
        self.material.resolve()
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        self.experiment.resolve(self.material()?)
    }

    pub fn sweep_spec(&self, seed: u64) -> Result<SweepSpec> {
        self.sweep.resolve(self.material()?, self.bbr.clone(), seed)
    }
}

/// Either a named preset, optionally with overrides, or a full set of
/// values. An empty section means silicon.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub c_t_m_per_s: Option<f64>,
    pub c_l_m_per_s: Option<f64>,
    pub rho_kg_m3: Option<f64>,
    pub m1_amu: Option<f64>,
}

impl MaterialSection {
    pub fn resolve(&self) -> Result<Material> {
        let explicit = [self.c_t_m_per_s, self.c_l_m_per_s, self.rho_kg_m3, self.m1_amu];
        let base = match &self.preset {
            Some(p) => Material::preset(p).ok_or_else(|| Error::Config(format!("unknown material preset '{p}'")))?,
            None if explicit.iter().all(Option::is_none) => Material::silicon(),
            None => {
                let [Some(c_t), Some(c_l), Some(rho), Some(m1)] = explicit else {
                    return Err(Error::Config(
                        "[material] without a preset needs c_t_m_per_s, c_l_m_per_s, rho_kg_m3 and m1_amu".into(),
                    ));
                };
                Material {
                    name: self.name.clone().unwrap_or_else(|| "custom".into()),
                    c_t,
                    c_l,
                    rho,
                    m1_amu: m1,
                }
            }
        };
        let m = Material {
            name: self.name.clone().unwrap_or(base.name),
            c_t: self.c_t_m_per_s.unwrap_or(base.c_t),
            c_l: self.c_l_m_per_s.unwrap_or(base.c_l),
            rho: self.rho_kg_m3.unwrap_or(base.rho),
            m1_amu: self.m1_amu.unwrap_or(base.m1_amu),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub radius_m: Option<f64>,
    pub dx_m: Option<f64>,
    pub a_max_m_s2: Option<f64>,
    pub protocol: Option<u8>,
    pub temperature_k: Option<f64>,
    pub dff: Option<f64>,
    pub sigma_x_m: Option<f64>,
    pub duration_s: Option<f64>,
}

/// 10 g.
pub const DEFAULT_A_MAX: f64 = 98.1;

impl ExperimentSection {
    pub fn resolve(&self, material: Material) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            material,
            radius: self.radius_m.unwrap_or(0.5e-6),
            dx: self.dx_m.unwrap_or(1e-7),
            a_max: self.a_max_m_s2.unwrap_or(DEFAULT_A_MAX),
            protocol: Protocol::from_index(self.protocol.unwrap_or(2))?,
            temperature: self.temperature_k.unwrap_or(4.0),
            dff: self.dff.unwrap_or(0.01),
            sigma_x: self.sigma_x_m.unwrap_or(1e-9),
            duration: self.duration_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Object size L = 2R, log grid.
    pub size_min_m: f64,
    pub size_max_m: f64,
    pub sizes_per_decade: u32,
    /// Splitting grid used to bracket the 1/e crossings.
    pub dx_min_m: f64,
    pub dx_max_m: f64,
    pub dx_per_decade: u32,
    pub channels: Vec<Channel>,
    pub temperatures_k: Vec<f64>,
    pub protocols: Vec<u8>,
    pub a_max_m_s2: f64,
    pub dff: f64,
    pub sigma_x_m: f64,
    /// Also emit the full log-contrast grid per (channel, T, protocol).
    pub write_grid: bool,
    /// Extra materials whose regime band is written for comparison.
    pub band_materials: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            size_min_m: 1e-8,
            size_max_m: 1e2,
            sizes_per_decade: 10,
            dx_min_m: 1e-12,
            dx_max_m: 1.0,
            dx_per_decade: 10,
            channels: vec![Channel::PhononDiscrete, Channel::PhononClosedForm, Channel::Bbr],
            temperatures_k: vec![293.0, 1.0, 0.01, 0.001],
            protocols: vec![0, 1, 2],
            a_max_m_s2: DEFAULT_A_MAX,
            dff: 0.01,
            sigma_x_m: 1e-9,
            write_grid: false,
            band_materials: vec!["steel".into(), "diamond".into()],
        }
    }
}

/// Log-spaced grid from `lo` to `hi` inclusive with `per_decade` points per
/// decade (at least two points).
pub fn log_grid(lo: f64, hi: f64, per_decade: u32) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || per_decade == 0 {
        return Err(Error::Config(format!(
            "log grid needs 0 < lo < hi and a positive density, got [{lo:e}, {hi:e}], {per_decade}/decade"
        )));
    }
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    Ok((0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / n as f64)
            }
        })
        .collect())
}

impl SweepSection {
    pub fn resolve(&self, material: Material, bbr: BbrParams, seed: u64) -> Result<SweepSpec> {
        let protocols = self
            .protocols
            .iter()
            .map(|&n| Protocol::from_index(n))
            .collect::<Result<Vec<_>>>()?;
        let band_materials = self
            .band_materials
            .iter()
            .map(|name| Material::preset(name).ok_or_else(|| Error::Config(format!("unknown band material '{name}'"))))
            .collect::<Result<Vec<_>>>()?;
        let spec = SweepSpec {
            material,
            sizes: log_grid(self.size_min_m, self.size_max_m, self.sizes_per_decade)?,
            dx_grid: log_grid(self.dx_min_m, self.dx_max_m, self.dx_per_decade)?,
            channels: self.channels.clone(),
            temperatures: self.temperatures_k.clone(),
            protocols,
            a_max: self.a_max_m_s2,
            dff: self.dff,
            sigma_x: self.sigma_x_m,
            bbr,
            write_grid: self.write_grid,
            band_materials,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    /// First dimensionless cutoff of the discrete mode sum.
    pub x_start: f64,
    /// Largest dimensionless cutoff.
    pub x_max: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            x_start: 20.0,
            x_max: 160.0,
        }
    }
}
