//! Interference contrast lost to internal phonons.
//!
//! A splitting force that is not exactly proportional to each atom's mass
//! leaves the two arms with different phonon states. For uncorrelated
//! per-atom force errors of relative size `dF/F` the averaged log-contrast is
//!
//! `log C = -(dF/F)^2 m1 sum_k coth(theta_k / 2) / (hbar omega_k) |a~(omega_k)|^2`
//!
//! summed over all internal modes with their degeneracy. The sum is
//! evaluated exactly over the discrete sphere spectrum up to a cutoff and
//! continued with the three-branch continuum density of states up to the
//! Debye frequency. Two closed-form estimates bracket the limits of few and
//! of many thermally relevant modes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bbr::{BbrModel, BbrParams};
use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::material::Material;
use crate::pulses::{duration_for, spectrum_a, Protocol, PulseProtocol};
use crate::quad::{for_each_panel, gl16};
use crate::response::{coth_half, thermal_wavelength_sq};
use crate::spectrum::{
    fit_surface_coefficient, mode_density, sphere_volume, weyl_volume_coefficient, DimensionlessSpectrum,
    ModeSpectrum,
};

/// One experimental configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub material: Material,
    /// Sphere radius, m.
    pub radius: f64,
    /// Maximum splitting, m.
    pub dx: f64,
    /// Peak acceleration, m/s^2; fixes the pulse duration unless
    /// `duration` is given.
    pub a_max: f64,
    pub protocol: Protocol,
    /// Temperature of the object's phonons (and of the environment for the
    /// blackbody channel), K.
    pub temperature: f64,
    /// Relative force heterogeneity dF/F.
    pub dff: f64,
    /// Initial c.m. wave-packet width, m.
    pub sigma_x: f64,
    /// Explicit pulse duration, s, overriding the acceleration cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        let positive = [
            ("radius", self.radius),
            ("dx", self.dx),
            ("a_max", self.a_max),
            ("temperature", self.temperature),
            ("sigma_x", self.sigma_x),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.dff) {
            return Err(Error::InvalidParameter(format!("dF/F = {} not in [0, 1]", self.dff)));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!("duration {d} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> Result<f64> {
        match self.duration {
            Some(d) => Ok(d),
            None => duration_for(self.dx, self.a_max, self.protocol),
        }
    }

    pub fn pulse(&self) -> Result<PulseProtocol> {
        PulseProtocol::new(self.protocol, self.dx, self.dt()?)
    }

    pub fn volume(&self) -> f64 {
        sphere_volume(self.radius)
    }

    /// `lambda_1^2 = hbar^2 / (m1 k_B T)` for one reference atom.
    pub fn lambda1_sq(&self) -> f64 {
        thermal_wavelength_sq(self.material.m1(), self.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FewMode,
    Crossover,
    ManyMode,
}

impl Regime {
    pub fn classify(omega1_dt: f64) -> Self {
        if omega1_dt > 2.0 * PI {
            Regime::FewMode
        } else if omega1_dt < 1.0 {
            Regime::ManyMode
        } else {
            Regime::Crossover
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FewMode => "few_mode",
            Regime::Crossover => "crossover",
            Regime::ManyMode => "many_mode",
        }
    }
}

/// Result of a converged discrete mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSum {
    pub log_c: f64,
    /// Frequency up to which modes were summed individually, rad/s.
    pub omega_cutoff: f64,
    /// Modes summed individually, counting degeneracy.
    pub n_modes: u64,
    /// Relative change against half the cutoff.
    pub relative_change: f64,
}

/// All channels for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    /// Discrete mode sum; absent when it did not converge.
    pub log_c_discrete: Option<f64>,
    /// Why the discrete sum is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrete_error: Option<String>,
    pub log_c_few: f64,
    pub log_c_many: f64,
    /// Few-mode estimate for omega1 dt >= 1, many-mode estimate below.
    pub log_c_closed_form: f64,
    pub log_c_bbr: f64,
    /// Splitting exceeds the thermal photon wavelength.
    pub bbr_coherence_warning: bool,
    pub regime: Regime,
    pub omega1: f64,
    pub omega1_dt: f64,
    pub dt: f64,
    pub n_modes_used: u64,
}

impl ContrastReport {
    /// Best available phonon log-contrast.
    pub fn log_c_phonon(&self) -> f64 {
        self.log_c_discrete.unwrap_or(self.log_c_closed_form)
    }
}

/// `coth(theta/2) / (hbar omega)`, the thermal weight of one mode.
pub fn thermal_weight(omega: f64, temperature: f64) -> f64 {
    let theta = if temperature > 0.0 {
        HBAR * omega / (K_B * temperature)
    } else {
        f64::INFINITY
    };
    coth_half(theta) / (HBAR * omega)
}

/// Degeneracy-weighted sum over `modes` (ascending `(omega, degeneracy)`)
/// below `min(omega_cut, omega_D)`, plus the continuum above it.
/// Returns `(sum of w |A|^2, modes used)`; multiply by
/// `-(dF/F)^2 m1 (dx/dt)^2` for the log-contrast. `surface` is the fitted
/// `b` of the staircase `N(x) ~ a x^3 + b x^2` used by the continuum.
fn truncated_sum<I>(
    cfg: &ExperimentConfig,
    dt: f64,
    modes: I,
    omega_cut: f64,
    surface: f64,
) -> Result<(f64, u64)>
where
    I: Iterator<Item = (f64, u32)>,
{
    let omega_top = omega_cut.min(cfg.material.debye_omega());
    let mut sum = 0.0;
    let mut count = 0u64;
    for (omega, deg) in modes.take_while(|m| m.0 <= omega_top) {
        let a = spectrum_a(cfg.protocol, omega * dt);
        sum += deg as f64 * thermal_weight(omega, cfg.temperature) * a * a;
        count += deg as u64;
    }
    sum += continuum_tail(cfg, dt, omega_top, cfg.material.debye_omega(), surface)?;
    Ok((sum, count))
}

/// `int g(omega) w(omega) A(omega dt)^2 d omega` over `[omega_a, omega_b]`.
///
/// `A^2` is used exactly for `40 pi` past the lower end and replaced by its
/// mean power law beyond that. The bulk density carries the surface
/// correction `1 + 2b / (3 a x)`; the free surface adds Rayleigh-like
/// branches that the bulk count misses by several percent at `x ~ 100`.
fn continuum_tail(cfg: &ExperimentConfig, dt: f64, omega_a: f64, omega_b: f64, surface: f64) -> Result<f64> {
    if omega_b <= omega_a {
        return Ok(0.0);
    }
    let (wa, wb) = (omega_a * dt, omega_b * dt);
    let v = cfg.volume();
    let t = cfg.temperature;
    let shape = cfg.protocol;
    let surface_scale = 2.0 * surface / (3.0 * weyl_volume_coefficient(cfg.material.speed_ratio()))
        * cfg.material.c_t
        / cfg.radius;
    let dens = |w: f64| {
        let omega = w / dt;
        mode_density(&cfg.material, v, omega) * (1.0 + surface_scale / omega) * thermal_weight(omega, t) / dt
    };
    let exact = |w: f64| {
        let a = spectrum_a(shape, w);
        dens(w) * a * a
    };
    let envelope = |w: f64| dens(w) * shape.tail_coefficient() / w.powi(shape.tail_exponent());
    let rule = gl16();
    let mut total = 0.0;

    let w_switch = wa + 40.0 * PI;
    // Below pi, geometric panels resolve the small-argument rise of A^2 and
    // the quantum-to-classical turnover of the thermal weight.
    let low_end = wb.min(PI).min(w_switch);
    if wa < low_end {
        // The integrand vanishes at W = 0, so a positive floor loses nothing.
        let mut lo = wa.max(1e-12 * low_end);
        while lo < low_end {
            let hi = (2.0 * lo).min(low_end);
            total += rule.integrate(lo, hi, exact);
            lo = hi;
        }
    }
    let mid_lo = wa.max(PI).min(w_switch);
    let mid_hi = wb.min(w_switch);
    if mid_hi > mid_lo {
        for_each_panel(mid_lo, mid_hi, &[], PI, |lo, hi| total += rule.integrate(lo, hi, exact));
    }
    let env_lo = wa.max(w_switch);
    if wb > env_lo {
        // Panels of 1/4 in ln(W).
        let (la, lb) = (env_lo.ln(), wb.ln());
        for_each_panel(la, lb, &[], 0.25, |lo, hi| {
            total += rule.integrate(lo, hi, |s| {
                let w = s.exp();
                envelope(w) * w
            })
        });
    }
    if !total.is_finite() {
        return Err(Error::Integration(format!(
            "continuum tail over [{omega_a:e}, {omega_b:e}] rad/s is not finite"
        )));
    }
    Ok(total)
}

fn log_c_prefactor(cfg: &ExperimentConfig, dt: f64) -> f64 {
    let v = cfg.dx / dt;
    -cfg.dff * cfg.dff * cfg.material.m1() * v * v
}

/// Relative change of the mode sum between two cutoffs.
const CONVERGENCE_TOL: f64 = 1e-3;

fn relative_change(full: f64, half: f64) -> f64 {
    if full == 0.0 && half == 0.0 {
        0.0
    } else {
        ((full - half) / full).abs()
    }
}

fn convergence_check(cutoff: f64, full: f64, half: f64) -> Result<f64> {
    let rel = relative_change(full, half);
    if rel < CONVERGENCE_TOL {
        Ok(rel)
    } else {
        Err(Error::Convergence {
            cutoff,
            value: full,
            half,
            relative_change: rel,
        })
    }
}

/// Averaged log-contrast from the explicit modes of `spectrum` (all modes
/// below its cutoff) plus the continuum above. The result must change by
/// less than 0.1% when the cutoff is halved, unless the cutoff already
/// reaches the Debye frequency and the sum is complete.
pub fn averaged_log_contrast_discrete(cfg: &ExperimentConfig, spectrum: &ModeSpectrum) -> Result<DiscreteSum> {
    cfg.validate()?;
    if (spectrum.radius - cfg.radius).abs() > 1e-12 * cfg.radius || spectrum.material != cfg.material {
        return Err(Error::InvalidParameter(
            "spectrum was built for a different sphere".into(),
        ));
    }
    let dt = cfg.dt()?;
    let pref = log_c_prefactor(cfg, dt);
    let modes = || spectrum.modes.iter().map(|m| (m.omega, m.degeneracy));
    let unit = cfg.material.c_t / cfg.radius;
    let surface = fit_surface_coefficient(
        spectrum.modes.iter().map(|m| (m.x, m.degeneracy)),
        cfg.material.speed_ratio(),
        spectrum.omega_cutoff / unit,
    );
    let (full, n) = truncated_sum(cfg, dt, modes(), spectrum.omega_cutoff, surface)?;
    let (half, _) = truncated_sum(cfg, dt, modes(), 0.5 * spectrum.omega_cutoff, surface)?;
    let relative_change = if spectrum.omega_cutoff >= cfg.material.debye_omega() {
        // Every mode up to the Debye cutoff is explicit; nothing to converge.
        relative_change(pref * full, pref * half)
    } else {
        convergence_check(spectrum.omega_cutoff, pref * full, pref * half)?
    };
    Ok(DiscreteSum {
        log_c: pref * full,
        omega_cutoff: spectrum.omega_cutoff,
        n_modes: n,
        relative_change,
    })
}

/// Few-mode estimate from the two lowest five-fold multiplets.
pub fn few_mode_estimate(cfg: &ExperimentConfig, omega1: f64) -> Result<f64> {
    cfg.validate()?;
    let w = omega1 * cfg.dt()?;
    let a = spectrum_a(cfg.protocol, w);
    Ok(-10.0 * cfg.dff * cfg.dff * cfg.dx * cfg.dx / cfg.lambda1_sq() * a * a / (w * w))
}

/// Continuum (many-mode) estimate; depends on the object only through its
/// volume.
pub fn many_mode_estimate(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.validate()?;
    let c = cfg.material.mean_sound_speed();
    let dt = cfg.dt()?;
    Ok(-3.0 * cfg.protocol.alpha() / PI * cfg.dff * cfg.dff * cfg.volume() / (c * dt).powi(3) * cfg.dx
        * cfg.dx
        / cfg.lambda1_sq())
}

/// Splitting at which `omega1 dt` equals `omega1_dt` when the duration is
/// set by the acceleration cap; `x1` is the dimensionless fundamental.
pub fn regime_boundary_dx(
    material: &Material,
    x1: f64,
    radius: f64,
    a_max: f64,
    protocol: Protocol,
    omega1_dt: f64,
) -> f64 {
    omega1_dt * omega1_dt * a_max * radius * radius / (protocol.kappa() * x1 * x1 * material.c_t * material.c_t)
}

/// Per-mode projections of a uniform gravitational force `F_i = m_i g`.
pub fn gravity_sanity(lattice: &Lattice, g: f64) -> Result<Vec<f64>> {
    let modes = lattice.normal_modes()?;
    let forces: Vec<f64> = lattice.masses().iter().map(|m| m * g).collect();
    Ok(modes.project_force(&forces))
}

/// Monte-Carlo comparison of the averaged contrast with its Jensen bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenReport {
    pub n_samples: usize,
    /// Sample mean of `exp(-xi)`.
    pub mean_contrast: f64,
    pub contrast_std_err: f64,
    /// `exp(-<xi>)` with the analytic mean.
    pub bound: f64,
    pub sampled_mean_xi: f64,
    pub xi_std_err: f64,
    pub analytic_mean_xi: f64,
    /// `(mean_contrast - bound) / contrast_std_err`.
    pub margin_sigma: f64,
    /// Set when the margin is under three standard errors.
    pub underpowered: bool,
}

/// Draw per-atom forces `F_i = (m_i + eta_i sqrt(m_i m1) dF/F) a(t)` with
/// independent standard normal `eta_i`, and compare the mean single-shot
/// contrast with `exp(-<xi>)`.
pub fn jensen_check(lattice: &Lattice, cfg: &ExperimentConfig, n_samples: usize, seed: u64) -> Result<JensenReport> {
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "Jensen check needs at least 1000 samples, got {n_samples}"
        )));
    }
    cfg.validate()?;
    let pulse = cfg.pulse()?;
    let modes = lattice.normal_modes()?;
    let omega_max = modes.omegas.last().copied().unwrap_or(0.0);
    let m1 = cfg.material.m1();
    let scale = m1.sqrt() * cfg.dff;
    // Internal modes and their weights coth/(hbar omega) |a~|^2.
    let internal: Vec<(usize, f64)> = modes
        .omegas
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-9 * omega_max)
        .map(|(k, &w)| (k, thermal_weight(w, cfg.temperature) * pulse.a_tilde_norm_sqr(w)))
        .collect();
    let analytic: f64 = internal.iter().map(|(_, w)| w * scale * scale).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lattice.len();
    let mut eta = vec![0.0; n];
    let (mut s_c, mut s_c2, mut s_x, mut s_x2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n_samples {
        for e in eta.iter_mut() {
            *e = StandardNormal.sample(&mut rng);
        }
        let xi: f64 = internal
            .iter()
            .map(|&(k, w)| {
                let c: f64 = scale * modes.vectors[k].iter().zip(&eta).map(|(u, e)| u * e).sum::<f64>();
                w * c * c
            })
            .sum();
        let c = (-xi).exp();
        s_c += c;
        s_c2 += c * c;
        s_x += xi;
        s_x2 += xi * xi;
    }
    let nf = n_samples as f64;
    let std_err = |s: f64, s2: f64| {
        let mean = s / nf;
        ((s2 / nf - mean * mean).max(0.0) / (nf - 1.0)).sqrt()
    };
    let mean_contrast = s_c / nf;
    let contrast_std_err = std_err(s_c, s_c2);
    let bound = (-analytic).exp();
    let diff = mean_contrast - bound;
    let margin_sigma = if contrast_std_err > 0.0 {
        diff / contrast_std_err
    } else if diff >= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(JensenReport {
        n_samples,
        mean_contrast,
        contrast_std_err,
        bound,
        sampled_mean_xi: s_x / nf,
        xi_std_err: std_err(s_x, s_x2),
        analytic_mean_xi: analytic,
        margin_sigma,
        underpowered: margin_sigma < 3.0,
    })
}

/// Per-mode contributions to the discrete log-contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeContribution {
    pub family: crate::spectrum::Family,
    pub l: u32,
    pub n: u32,
    pub omega: f64,
    pub degeneracy: u32,
    pub log_c: f64,
}

pub fn mode_contributions(cfg: &ExperimentConfig, spectrum: &ModeSpectrum) -> Result<Vec<ModeContribution>> {
    cfg.validate()?;
    let dt = cfg.dt()?;
    let pref = log_c_prefactor(cfg, dt);
    Ok(spectrum
        .modes
        .iter()
        .map(|m| {
            let a = spectrum_a(cfg.protocol, m.omega * dt);
            ModeContribution {
                family: m.family,
                l: m.l,
                n: m.n,
                omega: m.omega,
                degeneracy: m.degeneracy,
                log_c: pref * m.degeneracy as f64 * thermal_weight(m.omega, cfg.temperature) * a * a,
            }
        })
        .collect())
}

/// Shared state for repeated evaluations: per-material spectra and the
/// blackbody optical parameters.
#[derive(Debug)]
pub struct ContrastModel {
    pub bbr: BbrParams,
    /// First dimensionless cutoff tried by the discrete sum.
    pub x_start: f64,
    /// Largest dimensionless cutoff; also the extent of the cached spectra.
    pub x_max: f64,
    spectra: Mutex<HashMap<u64, Arc<DimensionlessSpectrum>>>,
}

impl Default for ContrastModel {
    fn default() -> Self {
        Self::new(BbrParams::default())
    }
}

impl ContrastModel {
    pub fn new(bbr: BbrParams) -> Self {
        Self {
            bbr,
            x_start: 20.0,
            x_max: 160.0,
            spectra: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_cutoffs(mut self, x_start: f64, x_max: f64) -> Self {
        self.x_start = x_start;
        self.x_max = x_max.max(x_start);
        self
    }

    /// Dimensionless spectrum for `material`, computed once per speed ratio.
    pub fn spectrum(&self, material: &Material) -> Result<Arc<DimensionlessSpectrum>> {
        let key = material.speed_ratio().to_bits();
        if let Some(s) = self.spectra.lock().expect("spectrum cache").get(&key) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(DimensionlessSpectrum::compute(material.speed_ratio(), self.x_max)?);
        let mut cache = self.spectra.lock().expect("spectrum cache");
        Ok(Arc::clone(cache.entry(key).or_insert(s)))
    }

    /// Dimensionless fundamental of `material`.
    pub fn fundamental_x(&self, material: &Material) -> Result<f64> {
        let s = self.spectrum(material)?;
        s.roots
            .first()
            .map(|r| r.x)
            .ok_or_else(|| Error::InvalidParameter("spectrum cutoff below the fundamental".into()))
    }

    pub fn omega1(&self, cfg: &ExperimentConfig) -> Result<f64> {
        Ok(self.fundamental_x(&cfg.material)? * cfg.material.c_t / cfg.radius)
    }

    fn surface(&self, spec: &DimensionlessSpectrum) -> f64 {
        fit_surface_coefficient(
            spec.roots.iter().map(|r| (r.x, r.degeneracy())),
            spec.speed_ratio,
            spec.x_max,
        )
    }

    /// Discrete sum with a fixed dimensionless cutoff `x_cut <= x_max` and
    /// no convergence check. Returns the log-contrast and the number of
    /// modes summed individually.
    pub fn discrete_at(&self, cfg: &ExperimentConfig, x_cut: f64) -> Result<(f64, u64)> {
        cfg.validate()?;
        if !(x_cut > 0.0 && x_cut <= self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "cutoff x = {x_cut} outside (0, {}]",
                self.x_max
            )));
        }
        let spec = self.spectrum(&cfg.material)?;
        let dt = cfg.dt()?;
        let unit = cfg.material.c_t / cfg.radius;
        let modes = spec.roots.iter().map(|r| (r.x * unit, r.degeneracy()));
        let (sum, n) = truncated_sum(cfg, dt, modes, x_cut * unit, self.surface(&spec))?;
        Ok((log_c_prefactor(cfg, dt) * sum, n))
    }

    /// Discrete sum, doubling the cutoff from `x_start` until the result
    /// is stable.
    pub fn discrete(&self, cfg: &ExperimentConfig) -> Result<DiscreteSum> {
        cfg.validate()?;
        let spec = self.spectrum(&cfg.material)?;
        let dt = cfg.dt()?;
        let unit = cfg.material.c_t / cfg.radius;
        let pref = log_c_prefactor(cfg, dt);
        let modes = || spec.roots.iter().map(|r| (r.x * unit, r.degeneracy()));
        let surface = self.surface(&spec);
        let mut x = self.x_start.min(self.x_max);
        let (mut half, _) = truncated_sum(cfg, dt, modes(), 0.5 * x * unit, surface)?;
        loop {
            let (full, n) = truncated_sum(cfg, dt, modes(), x * unit, surface)?;
            let check = if x * unit >= cfg.material.debye_omega() {
                Ok(relative_change(pref * full, pref * half))
            } else {
                convergence_check(x * unit, pref * full, pref * half)
            };
            match check {
                Ok(rel) => {
                    return Ok(DiscreteSum {
                        log_c: pref * full,
                        omega_cutoff: x * unit,
                        n_modes: n,
                        relative_change: rel,
                    })
                }
                Err(e) if x >= self.x_max => return Err(e),
                Err(_) => {}
            }
            // The next comparison is against this cutoff.
            if 2.0 * x <= self.x_max {
                half = full;
                x *= 2.0;
            } else {
                x = self.x_max;
                half = truncated_sum(cfg, dt, modes(), 0.5 * x * unit, surface)?.0;
            }
        }
    }

    /// Closed-form phonon estimate appropriate to the regime.
    pub fn closed_form(&self, cfg: &ExperimentConfig) -> Result<f64> {
        let w1dt = self.omega1(cfg)? * cfg.dt()?;
        if w1dt >= 1.0 {
            few_mode_estimate(cfg, self.omega1(cfg)?)
        } else {
            many_mode_estimate(cfg)
        }
    }

    pub fn bbr_model(&self, temperature: f64) -> Result<BbrModel> {
        BbrModel::new(&self.bbr, temperature)
    }

    /// Blackbody log-contrast and the coherence-length warning flag.
    pub fn bbr(&self, cfg: &ExperimentConfig) -> Result<(f64, bool)> {
        cfg.validate()?;
        let model = self.bbr_model(cfg.temperature)?;
        let out = model.evaluate(&cfg.pulse()?, cfg.radius)?;
        Ok((out.log_c, out.coherence_warning))
    }

    pub fn evaluate(&self, cfg: &ExperimentConfig) -> Result<ContrastReport> {
        cfg.validate()?;
        let dt = cfg.dt()?;
        let omega1 = self.omega1(cfg)?;
        let omega1_dt = omega1 * dt;
        let (log_c_discrete, discrete_error, n_modes_used) = match self.discrete(cfg) {
            Ok(d) => (Some(d.log_c), None, d.n_modes),
            Err(e) if e.is_numerical() => (None, Some(e.to_string()), 0),
            Err(e) => return Err(e),
        };
        let log_c_few = few_mode_estimate(cfg, omega1)?;
        let log_c_many = many_mode_estimate(cfg)?;
        let log_c_closed_form = if omega1_dt >= 1.0 { log_c_few } else { log_c_many };
        let (log_c_bbr, bbr_coherence_warning) = self.bbr(cfg)?;
        Ok(ContrastReport {
            log_c_discrete,
            discrete_error,
            log_c_few,
            log_c_many,
            log_c_closed_form,
            log_c_bbr,
            bbr_coherence_warning,
            regime: Regime::classify(omega1_dt),
            omega1,
            omega1_dt,
            dt,
            n_modes_used,
        })
    }
}
