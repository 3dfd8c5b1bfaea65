//! Splitting-force protocols.
//!
//! Each arm of the interferometer is accelerated by `a(t)` and the other by
//! `-a(t)` over a window `[0, dt]`. All three profiles are symmetric about
//! `dt / 2`, carry zero net impulse, reach the full separation `dx` at
//! mid-time and bring the arms back together at rest at `dt`.
//!
//! In the frequency domain the windowed transform factorises as
//! `a~(omega) = exp(i omega dt / 2) (dx / dt) A_n(omega dt)` with real
//! dimensionless spectra `A_n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three force profiles, in increasing order of smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Protocol {
    /// Piecewise constant, flipping sign at a quarter and three quarters.
    Rectangular,
    /// Quartic polynomial vanishing at the window edges.
    Quartic,
    /// Difference of two cosines; smooth switch-on with vanishing slope.
    TwoCosine,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Rectangular, Protocol::Quartic, Protocol::TwoCosine];

    pub fn index(self) -> u8 {
        match self {
            Protocol::Rectangular => 0,
            Protocol::Quartic => 1,
            Protocol::TwoCosine => 2,
        }
    }

    pub fn from_index(n: u8) -> Result<Self> {
        match n {
            0 => Ok(Protocol::Rectangular),
            1 => Ok(Protocol::Quartic),
            2 => Ok(Protocol::TwoCosine),
            _ => Err(Error::InvalidParameter(format!(
                "protocol index {n} not in {{0, 1, 2}}"
            ))),
        }
    }

    /// Peak acceleration in units of dx / dt^2.
    pub fn kappa(self) -> f64 {
        match self {
            Protocol::Rectangular => 8.0,
            Protocol::Quartic => 12.0,
            Protocol::TwoCosine => 2.0 * PI * PI,
        }
    }

    /// `(1/pi) int_0^inf A_n(W)^2 dW`, equal to `int_0^1 (a dt^2/dx)^2 dtau`.
    pub fn alpha(self) -> f64 {
        match self {
            Protocol::Rectangular => 64.0,
            Protocol::Quartic => 2048.0 / 35.0,
            Protocol::TwoCosine => PI.powi(4),
        }
    }

    /// `int_0^dt sep(t)^2 dt / (dx^2 dt)`.
    pub fn exposure(self) -> f64 {
        match self {
            Protocol::Rectangular => 23.0 / 60.0,
            Protocol::Quartic => 1024.0 / 3003.0,
            Protocol::TwoCosine => 35.0 / 128.0,
        }
    }

    /// Large-W mean of `A_n(W)^2`, i.e. `coeff / W^(2n+2)`.
    pub fn tail_coefficient(self) -> f64 {
        match self {
            Protocol::Rectangular => 640.0,
            Protocol::Quartic => 73_728.0,
            Protocol::TwoCosine => 288.0 * PI.powi(8),
        }
    }

    pub fn tail_exponent(self) -> i32 {
        2 * (self.index() as i32 + 1)
    }

    /// Interior points where the profile or a derivative jumps, as
    /// fractions of the window.
    pub fn breakpoints(self) -> &'static [f64] {
        match self {
            Protocol::Rectangular => &[0.25, 0.5, 0.75],
            Protocol::Quartic | Protocol::TwoCosine => &[0.5],
        }
    }
}

impl TryFrom<u8> for Protocol {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        Protocol::from_index(n)
    }
}

impl From<Protocol> for u8 {
    fn from(p: Protocol) -> u8 {
        p.index()
    }
}

/// Dimensionless acceleration `a dt^2 / dx` at `tau = t / dt` in `[0, 1]`.
///
/// For the rectangular profile the value at a switching instant is the
/// limit from the right, or from the left when `from_left` is set.
fn unit_accel(shape: Protocol, tau: f64, from_left: bool) -> f64 {
    match shape {
        Protocol::Rectangular => {
            let inner = if from_left {
                tau > 0.25 && tau <= 0.75
            } else {
                (0.25..0.75).contains(&tau)
            };
            if inner {
                -8.0
            } else {
                8.0
            }
        }
        Protocol::Quartic => {
            let u = 2.0 * tau - 1.0;
            let u2 = u * u;
            60.0 * (1.0 - u2) * (u2 - 0.2)
        }
        Protocol::TwoCosine => PI * PI * ((2.0 * PI * tau).cos() - (4.0 * PI * tau).cos()),
    }
}

/// A concrete protocol: shape, target separation and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseProtocol {
    pub shape: Protocol,
    /// Maximum separation of the two arms, m.
    pub dx: f64,
    /// Total duration, s.
    pub dt: f64,
}

impl PulseProtocol {
    pub fn new(shape: Protocol, dx: f64, dt: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pulse needs dx > 0 and dt > 0, got dx = {dx}, dt = {dt}"
            )));
        }
        Ok(Self { shape, dx, dt })
    }

    /// Protocol whose peak acceleration equals `a_max`.
    pub fn with_acceleration_cap(shape: Protocol, dx: f64, a_max: f64) -> Result<Self> {
        let dt = duration_for(dx, a_max, shape)?;
        Self::new(shape, dx, dt)
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        // Allow a few ulps of slack at the window edges.
        let slack = 4.0 * f64::EPSILON * self.dt;
        if !(t >= -slack && t <= self.dt + slack) {
            return Err(Error::Domain(format!(
                "t = {t:e} outside pulse window [0, {:e}]",
                self.dt
            )));
        }
        Ok((t / self.dt).clamp(0.0, 1.0))
    }

    /// Acceleration of the `+` arm at time `t`, m/s^2.
    pub fn accel(&self, t: f64) -> Result<f64> {
        let tau = self.check_time(t)?;
        Ok(self.unit() * unit_accel(self.shape, tau, false))
    }

    /// One-sided limit of the acceleration; differs from [`accel`](Self::accel)
    /// only at the switching instants of the rectangular profile.
    pub fn accel_limit(&self, t: f64, from_left: bool) -> Result<f64> {
        let tau = self.check_time(t)?;
        Ok(self.unit() * unit_accel(self.shape, tau, from_left))
    }

    fn unit(&self) -> f64 {
        self.dx / (self.dt * self.dt)
    }

    pub fn peak_accel(&self) -> f64 {
        self.shape.kappa() * self.unit()
    }

    /// Windowed Fourier transform `int_0^dt exp(i omega t) a(t) dt`.
    pub fn a_tilde(&self, omega: f64) -> Complex64 {
        let w = omega * self.dt;
        let amp = self.dx / self.dt * spectrum_a(self.shape, w.abs());
        Complex64::from_polar(1.0, 0.5 * w) * amp
    }

    /// `|a~(omega)|^2` without forming the phase.
    pub fn a_tilde_norm_sqr(&self, omega: f64) -> f64 {
        let a = self.dx / self.dt * spectrum_a(self.shape, (omega * self.dt).abs());
        a * a
    }

    /// Separation of the arms and its rate of change at time `t`.
    pub fn rel_trajectory(&self, t: f64) -> Result<(f64, f64)> {
        let tau = self.check_time(t)?;
        let (s, v) = unit_separation(self.shape, tau);
        Ok((self.dx * s, self.dx / self.dt * v))
    }

    /// Window-fraction breakpoints in seconds.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.shape.breakpoints().iter().map(|b| b * self.dt).collect()
    }
}

/// Separation in units of dx and its tau-derivative.
fn unit_separation(shape: Protocol, tau: f64) -> (f64, f64) {
    match shape {
        Protocol::Rectangular => {
            if tau <= 0.25 {
                (8.0 * tau * tau, 16.0 * tau)
            } else if tau <= 0.75 {
                let s = tau - 0.25;
                (0.5 + 4.0 * s - 8.0 * s * s, 4.0 - 16.0 * s)
            } else {
                let s = tau - 0.75;
                (0.5 - 4.0 * s + 8.0 * s * s, -4.0 + 16.0 * s)
            }
        }
        Protocol::Quartic => {
            let u = 2.0 * tau - 1.0;
            let w = 1.0 - u * u;
            (w * w * w, -12.0 * u * w * w)
        }
        Protocol::TwoCosine => {
            let (s2, c2) = (2.0 * PI * tau).sin_cos();
            let (s4, c4) = (4.0 * PI * tau).sin_cos();
            (
                0.5 * (1.0 - c2) - 0.125 * (1.0 - c4),
                PI * s2 - 0.5 * PI * s4,
            )
        }
    }
}

/// Duration for which the peak acceleration equals `a_max`:
/// `dt = sqrt(kappa_n dx / a_max)`.
pub fn duration_for(dx: f64, a_max: f64, shape: Protocol) -> Result<f64> {
    if !(dx > 0.0 && a_max > 0.0 && dx.is_finite() && a_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration needs dx > 0 and a_max > 0, got {dx}, {a_max}"
        )));
    }
    Ok((shape.kappa() * dx / a_max).sqrt())
}

/// Below this `W` the rectangular and quartic spectra switch to their
/// moment series (the closed forms cancel catastrophically).
const SERIES_BELOW: f64 = 1.0;
/// Half-width of the window around the removable poles of `A_2`.
const POLE_WINDOW: f64 = 1e-3;

/// Dimensionless spectrum `A_n(W)`, `W = omega dt`.
pub fn spectrum_a(shape: Protocol, w: f64) -> f64 {
    let w = w.abs();
    match shape {
        Protocol::Rectangular => {
            if w < SERIES_BELOW {
                moment_series(w, rectangular_moment)
            } else {
                rectangular_closed(w)
            }
        }
        Protocol::Quartic => {
            if w < SERIES_BELOW {
                moment_series(w, quartic_moment)
            } else {
                quartic_closed(w)
            }
        }
        Protocol::TwoCosine => {
            let near_pole = [0.0, 2.0 * PI, 4.0 * PI]
                .iter()
                .any(|p| (w - p).abs() < POLE_WINDOW);
            if near_pole {
                two_cosine_regular(w)
            } else {
                let h = 0.5 * w;
                let p1 = 1.0 - (2.0 * PI / w).powi(2);
                let p2 = 1.0 - (4.0 * PI / w).powi(2);
                -3.0 * PI.powi(4) * h.sin() / (h * h * h) / (p1 * p2)
            }
        }
    }
}

fn rectangular_closed(w: f64) -> f64 {
    16.0 / w * ((0.5 * w).sin() - 2.0 * (0.25 * w).sin())
}

fn quartic_closed(w: f64) -> f64 {
    let h = 0.5 * w;
    let r = 60.0 / (w * w);
    -96.0 / (h * h) * (h.cos() * (1.0 - r) - h.sin() / h * (6.0 - r))
}

/// `A(W) = sum_k (-1)^k W^(2k) / (2k)! * M_k` with the even moments
/// `M_k = 2 int_0^(1/2) s^(2k) a(1/2 + s) ds` of the unit profile.
fn moment_series(w: f64, moment: fn(i32) -> f64) -> f64 {
    let w2 = w * w;
    let mut sum = 0.0;
    let mut factor = 1.0; // (-1)^k W^(2k) / (2k)!
    for k in 0..40 {
        if k > 0 {
            let kk = 2.0 * k as f64;
            factor *= -w2 / ((kk - 1.0) * kk);
        }
        let term = factor * moment(k);
        sum += term;
        if k > 2 && term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn rectangular_moment(k: i32) -> f64 {
    let p = 2 * k + 1;
    16.0 / p as f64 * (0.5f64.powi(p) - 2.0 * 0.25f64.powi(p))
}

fn quartic_moment(k: i32) -> f64 {
    // a(1/2 + s) = -960 s^4 + 288 s^2 - 12
    let h = 0.5f64;
    let p = 2 * k;
    2.0 * (-960.0 * h.powi(p + 5) / (p + 5) as f64 + 288.0 * h.powi(p + 3) / (p + 3) as f64
        - 12.0 * h.powi(p + 1) / (p + 1) as f64)
}

/// `A_2` written as a sum of sinc functions; regular at W = 0, 2 pi, 4 pi.
fn two_cosine_regular(w: f64) -> f64 {
    // a(1/2 + s) = -pi^2 [cos(2 pi s) + cos(4 pi s)], so
    // A_2 = -pi^2 [I(2 pi) + I(4 pi)], I(b) = 2 int_0^(1/2) cos(W s) cos(b s) ds.
    let i = |b: f64| 0.5 * (sinc(0.5 * (w - b)) + sinc(0.5 * (w + b)));
    -PI * PI * (i(2.0 * PI) + i(4.0 * PI))
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}
