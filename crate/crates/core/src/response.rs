//! Driven-oscillator response of a single normal mode and its thermal
//! Glauber overlap.
//!
//! A mode of frequency `omega` driven by a force per root-mass `f(t)` from
//! rest has the Duhamel solution
//! `q(t) = int_0^t sin(omega (t - s)) / omega f(s) ds`. The kernel is
//! evaluated exactly; only the force is sampled, on Gauss-Legendre panels
//! aligned with the drive's breakpoints.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::pulses::PulseProtocol;
use crate::quad::{for_each_panel, gl16};

/// A force per root-mass, supported on `[0, duration]`.
pub trait Drive: Sync {
    fn duration(&self) -> f64;

    /// Value at `t`; callers only ask for `t` inside the window.
    fn value(&self, t: f64) -> f64;

    /// Points where the drive or its derivatives jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Spacing of the underlying samples, for tabulated drives.
    fn sample_step(&self) -> Option<f64> {
        None
    }
}

impl Drive for PulseProtocol {
    fn duration(&self) -> f64 {
        self.dt
    }

    fn value(&self, t: f64) -> f64 {
        self.accel(t.clamp(0.0, self.dt)).unwrap_or(0.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        PulseProtocol::breakpoints(self)
    }
}

/// `scale * inner(t)`, e.g. the projection `sqrt(m1) dF/F a(t)` of a pulse
/// onto one mode.
#[derive(Debug, Clone, Copy)]
pub struct ScaledDrive<D> {
    pub inner: D,
    pub scale: f64,
}

impl<D: Drive> Drive for ScaledDrive<D> {
    fn duration(&self) -> f64 {
        self.inner.duration()
    }
    fn value(&self, t: f64) -> f64 {
        self.scale * self.inner.value(t)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn sample_step(&self) -> Option<f64> {
        self.inner.sample_step()
    }
}

impl ScaledDrive<PulseProtocol> {
    /// Force per root-mass seen by one mode under white-noise impurity
    /// forces: a unit-variance projection gives `sqrt(m1) dF/F a(t)`.
    pub fn representative(pulse: PulseProtocol, dff: f64, m1: f64) -> Self {
        Self {
            inner: pulse,
            scale: dff * m1.sqrt(),
        }
    }
}

/// Uniformly sampled force, linearly interpolated between samples.
#[derive(Debug, Clone)]
pub struct SampledDrive {
    step: f64,
    values: Vec<f64>,
}

impl SampledDrive {
    /// `values[i]` is the force at `t = i * step`.
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || values.len() < 2 {
            return Err(Error::InvalidParameter(
                "sampled drive needs a positive step and at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sampled drive has non-finite values".into()));
        }
        Ok(Self { step, values })
    }

    /// Sample `drive` at `n + 1` evenly spaced points.
    pub fn from_drive<D: Drive>(drive: &D, n: usize) -> Result<Self> {
        let n = n.max(1);
        let step = drive.duration() / n as f64;
        let values = (0..=n).map(|i| drive.value(i as f64 * step)).collect();
        Self::new(step, values)
    }
}

impl Drive for SampledDrive {
    fn duration(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn value(&self, t: f64) -> f64 {
        let last = self.values.len() - 1;
        let pos = (t / self.step).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    fn breakpoints(&self) -> Vec<f64> {
        (1..self.values.len() - 1).map(|i| i as f64 * self.step).collect()
    }

    fn sample_step(&self) -> Option<f64> {
        Some(self.step)
    }
}

/// Largest `omega * step` accepted for a tabulated drive.
pub const MAX_PHASE_PER_SAMPLE: f64 = 0.1;
/// Largest phase advance inside one quadrature panel.
const MAX_PHASE_PER_PANEL: f64 = 1.5;

fn check_resolution<D: Drive + ?Sized>(omega: f64, drive: &D) -> Result<()> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("mode frequency {omega} must be finite and >= 0")));
    }
    if let Some(h) = drive.sample_step() {
        if omega * h >= MAX_PHASE_PER_SAMPLE {
            return Err(Error::Resolution(omega * h));
        }
    }
    Ok(())
}

/// Running integrals `C = int cos(omega s) f ds`, `S = int sin(omega s) f ds`
/// (for `omega = 0`: `C = int f ds`, `S = int s f ds`).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    c: f64,
    s: f64,
}

fn accumulate<D: Drive + ?Sized>(omega: f64, drive: &D, bps: &[f64], a: f64, b: f64, m: &mut Moments) {
    let width = if omega > 0.0 {
        MAX_PHASE_PER_PANEL / omega
    } else {
        f64::INFINITY
    };
    let rule = gl16();
    for_each_panel(a, b, bps, width, |lo, hi| {
        rule.for_each_point(lo, hi, |t, w| {
            let f = drive.value(t) * w;
            if omega > 0.0 {
                let (s, c) = (omega * t).sin_cos();
                m.c += c * f;
                m.s += s * f;
            } else {
                m.c += f;
                m.s += t * f;
            }
        });
    });
}

/// Single-arm state at time `t` given the moments accumulated up to
/// `min(t, duration)`.
fn state(omega: f64, t: f64, m: Moments) -> (f64, f64) {
    if omega > 0.0 {
        let (s, c) = (omega * t).sin_cos();
        ((s * m.c - c * m.s) / omega, c * m.c + s * m.s)
    } else {
        (t * m.c - m.s, m.c)
    }
}

/// Differential displacement `(dq, dqdot)` between the two arms at the end
/// of the drive, the arms being driven by `+f` and `-f`.
pub fn mode_displacement<D: Drive + ?Sized>(omega: f64, drive: &D) -> Result<(f64, f64)> {
    check_resolution(omega, drive)?;
    let mut m = Moments::default();
    let t_end = drive.duration();
    accumulate(omega, drive, &drive.breakpoints(), 0.0, t_end, &mut m);
    let (q, qd) = state(omega, t_end, m);
    Ok((2.0 * q, 2.0 * qd))
}

/// `int_0^duration exp(i omega t) f(t) dt`.
pub fn windowed_transform<D: Drive + ?Sized>(omega: f64, drive: &D) -> Result<Complex64> {
    check_resolution(omega, drive)?;
    let mut m = Moments::default();
    accumulate(omega, drive, &drive.breakpoints(), 0.0, drive.duration(), &mut m);
    if omega > 0.0 {
        Ok(Complex64::new(m.c, m.s))
    } else {
        Ok(Complex64::new(m.c, 0.0))
    }
}

/// Thermal Wigner variances of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalVariances {
    /// Position variance of the mass-weighted coordinate, m^2 kg.
    pub sigma_u2: f64,
    /// Velocity variance, m^2 kg / s^2.
    pub sigma_v2: f64,
    /// hbar omega / (k_B T); infinite at T = 0.
    pub theta: f64,
}

/// `coth(theta / 2)` with the T = 0 and classical limits handled.
pub fn coth_half(theta: f64) -> f64 {
    let h = 0.5 * theta;
    if h > 20.0 {
        1.0
    } else if h < 1e-4 {
        // coth h = 1/h + h/3 - h^3/45
        1.0 / h + h / 3.0 - h * h * h / 45.0
    } else {
        1.0 / h.tanh()
    }
}

pub fn thermal_variances(omega: f64, temperature: f64) -> Result<ThermalVariances> {
    if !(omega > 0.0 && omega.is_finite()) || !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "thermal variances need omega > 0 and T >= 0, got {omega:e}, {temperature}"
        )));
    }
    let theta = if temperature == 0.0 {
        f64::INFINITY
    } else {
        HBAR * omega / (K_B * temperature)
    };
    let ch = coth_half(theta);
    Ok(ThermalVariances {
        sigma_u2: HBAR / (2.0 * omega) * ch,
        sigma_v2: HBAR * omega / 2.0 * ch,
        theta,
    })
}

/// Logarithm of the Glauber overlap of two thermal states displaced by
/// `(dq, dqdot)` relative to each other.
pub fn mode_log_overlap(dq: f64, dqdot: f64, v: &ThermalVariances) -> f64 {
    -(dq * dq * v.sigma_v2 + dqdot * dqdot * v.sigma_u2) / (2.0 * HBAR * HBAR)
}

/// Single-arm phase-space point. `big_q`, `big_p` are scaled so that the
/// arms' final overlap is `exp(-4 (Q^2 + P^2))`: contrast 1/e on the circle
/// of unit diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub t: f64,
    pub q: f64,
    pub qdot: f64,
    #[serde(rename = "Q")]
    pub big_q: f64,
    #[serde(rename = "P")]
    pub big_p: f64,
}

impl PhaseSpacePoint {
    pub fn radius(&self) -> f64 {
        self.big_q.hypot(self.big_p)
    }
}

/// Path of the `+` arm (the other arm is its mirror image) sampled on
/// `t_grid`, which must be ascending and start at or after 0. Times past
/// the end of the drive continue with free rotation.
pub fn trajectory<D: Drive + ?Sized>(
    omega: f64,
    drive: &D,
    t_grid: &[f64],
    variances: &ThermalVariances,
) -> Result<Vec<PhaseSpacePoint>> {
    check_resolution(omega, drive)?;
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("trajectory grid must be ascending from t >= 0".into()));
    }
    let t_end = drive.duration();
    let bps = drive.breakpoints();
    let norm = std::f64::consts::SQRT_2 * HBAR;
    let (sv, su) = (variances.sigma_v2.sqrt(), variances.sigma_u2.sqrt());
    let mut m = Moments::default();
    let mut reached = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let upto = t.min(t_end);
        if upto > reached {
            accumulate(omega, drive, &bps, reached, upto, &mut m);
            reached = upto;
        }
        let (q, qdot) = state(omega, t, m);
        out.push(PhaseSpacePoint {
            t,
            q,
            qdot,
            big_q: q * sv / norm,
            big_p: qdot * su / norm,
        });
    }
    Ok(out)
}

/// Log-contrast from imperfect recombination of the centre of mass.
///
/// `dx_f`, `dp_f` are the final differential position and momentum; the
/// c.m. starts in a thermal state of width `sigma_x`.
pub fn cm_log_contrast(dx_f: f64, dp_f: f64, sigma_x: f64, temperature: f64, mass: f64) -> Result<f64> {
    if !(sigma_x > 0.0 && temperature > 0.0 && mass > 0.0) {
        return Err(Error::InvalidParameter(
            "c.m. contrast needs sigma_x, T and M positive".into(),
        ));
    }
    let lambda2 = thermal_wavelength_sq(mass, temperature);
    let p = dp_f * sigma_x / HBAR;
    Ok(-dx_f * dx_f / (2.0 * lambda2) - 0.5 * p * p)
}

/// `lambda_T^2 = hbar^2 / (M k_B T)`.
pub fn thermal_wavelength_sq(mass: f64, temperature: f64) -> f64 {
    HBAR * HBAR / (mass * K_B * temperature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{spectrum_a, Protocol};

    struct Cosine {
        omega: f64,
        dt: f64,
    }
    impl Drive for Cosine {
        fn duration(&self) -> f64 {
            self.dt
        }
        fn value(&self, t: f64) -> f64 {
            (self.omega * t).cos()
        }
    }

    #[test]
    fn zero_force_gives_no_displacement() {
        let d = SampledDrive::new(1e-3, vec![0.0; 100]).unwrap();
        assert_eq!(mode_displacement(5.0, &d).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn pulse_drive_matches_spectrum() {
        let eps = 3e-4;
        for s in Protocol::ALL {
            let p = PulseProtocol::new(s, 1e-7, 1e-5).unwrap();
            let drive = ScaledDrive { inner: p, scale: eps };
            for &w in &[0.5, 3.0, 8.17, 29.8, 90.0] {
                let omega = w / p.dt;
                let (dq, dqd) = mode_displacement(omega, &drive).unwrap();
                let got = Complex64::new(dqd, omega * dq).norm() / 2.0;
                let want = eps * p.dx / p.dt * spectrum_a(s, w).abs();
                assert!((got - want).abs() < 1e-9 * want, "{s:?} W={w}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn resonant_drive_grows_secularly() {
        let omega = 2.0 * std::f64::consts::PI;
        let short = mode_displacement(omega, &Cosine { omega, dt: 10.0 }).unwrap().1;
        let long = mode_displacement(omega, &Cosine { omega, dt: 20.0 }).unwrap().1;
        assert!((short - 10.0).abs() < 1e-9 && (long - 20.0).abs() < 1e-9);
    }

    #[test]
    fn coarse_samples_are_rejected() {
        let d = SampledDrive::new(0.1, vec![1.0; 50]).unwrap();
        assert!(matches!(mode_displacement(2.0, &d), Err(Error::Resolution(_))));
        assert!(mode_displacement(0.5, &d).is_ok());
    }

    #[test]
    fn ground_state_is_minimum_uncertainty() {
        let v = thermal_variances(1e9, 0.0).unwrap();
        let prod = v.sigma_u2 * v.sigma_v2;
        assert!((prod - HBAR * HBAR / 4.0).abs() < 1e-12 * prod);
    }

    #[test]
    fn classical_limit_and_thermal_time() {
        let v = thermal_variances(1e6, 300.0).unwrap();
        assert!((v.sigma_v2 / (K_B * 300.0) - 1.0).abs() < 1e-6);
        let beta = HBAR / (K_B * 4.0);
        assert!((beta - 1.91e-12).abs() < 0.01e-12);
    }

    #[test]
    fn overlap_is_quadratic() {
        let v = thermal_variances(1e8, 4.0).unwrap();
        assert_eq!(mode_log_overlap(0.0, 0.0, &v), 0.0);
        let a = mode_log_overlap(1e-20, 3e-14, &v);
        let b = mode_log_overlap(2e-20, 6e-14, &v);
        assert!(a < 0.0 && (b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cm_contrast_at_thermal_wavelength() {
        let (m, t) = (1e-20, 4.0);
        let lam = thermal_wavelength_sq(m, t).sqrt();
        assert!((cm_log_contrast(lam, 0.0, 1e-9, t, m).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(cm_log_contrast(0.0, 0.0, 1e-9, t, m).unwrap(), 0.0);
    }

    #[test]
    fn trajectory_endpoint_is_half_the_displacement() {
        let p = PulseProtocol::new(Protocol::Quartic, 1e-7, 1e-5).unwrap();
        let omega = 2.0 * std::f64::consts::PI * 1.3 / p.dt;
        let v = thermal_variances(omega, 4.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * p.dt / 50.0).collect();
        let path = trajectory(omega, &p, &grid, &v).unwrap();
        let (dq, dqd) = mode_displacement(omega, &p).unwrap();
        let end = path.last().unwrap();
        assert!((end.q - dq / 2.0).abs() < 1e-12 * dq.abs());
        assert!((end.qdot - dqd / 2.0).abs() < 1e-12 * dqd.abs());
        assert_eq!(path[0].q, 0.0);
    }

    #[test]
    fn free_rotation_conserves_amplitude() {
        let p = PulseProtocol::new(Protocol::Rectangular, 1.0, 1.0).unwrap();
        let omega = 7.3;
        let v = thermal_variances(omega, 1.0).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| 1.0 + i as f64 * 0.37).collect();
        let path = trajectory(omega, &p, &grid, &v).unwrap();
        let amp = |pt: &PhaseSpacePoint| pt.q.hypot(pt.qdot / omega);
        let a0 = amp(&path[0]);
        for pt in &path {
            assert!((amp(pt) - a0).abs() < 1e-10 * a0);
        }
    }
}
