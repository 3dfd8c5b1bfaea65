//! Acoustic eigenmodes of a free, homogeneous, isotropic elastic sphere.
//!
//! Eigenfrequencies are found in the dimensionless variable
//! `x = omega R / c_T`, which depends only on the ratio `c_L / c_T`. A
//! [`DimensionlessSpectrum`] is therefore computed once per material and
//! rescaled to any radius.
//!
//! Torsional modes satisfy `(l - 1) j_l(x) = x j_{l+1}(x)`. Spheroidal modes
//! are the zeros of the 2x2 free-surface traction determinant in
//! `(x, x / (c_L / c_T))`; the breathing family `l = 0` keeps only the
//! compressional entry. Rigid motions (zero frequency) are never returned.

mod bessel;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bessel::spherical_bessel_j;
pub(crate) use bessel::fill_spherical_j;

use crate::error::{Error, Result};
use crate::material::Material;
use crate::quad;

/// Sign-change scan step in x.
pub const SCAN_STEP: f64 = 0.05;
/// Largest dimensionless cutoff accepted by the root finders.
pub const MAX_X: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Torsional,
    Spheroidal,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Torsional => "torsional",
            Family::Spheroidal => "spheroidal",
        }
    }
}

/// One eigenmode (a (2l+1)-fold degenerate multiplet).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub family: Family,
    pub l: u32,
    /// Overtone index, 1 for the lowest root of its (family, l) branch.
    pub n: u32,
    /// Dimensionless eigenvalue omega R / c_T.
    pub x: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub degeneracy: u32,
}

/// Residual of the torsional frequency equation, `(l-1) j_l(x) - x j_{l+1}(x)`.
pub fn torsional_char(l: u32, x: f64) -> f64 {
    let mut j = vec![0.0; l as usize + 2];
    fill_spherical_j(x.abs(), &mut j);
    torsional_from(l, x, &j)
}

fn torsional_from(l: u32, x: f64, j: &[f64]) -> f64 {
    let l = l as usize;
    (l as f64 - 1.0) * j[l] - x * j[l + 1]
}

/// Spheroidal frequency determinant at `x = omega R / c_T`.
pub fn spheroidal_char(l: u32, speed_ratio: f64, x: f64) -> f64 {
    let eta = x / speed_ratio;
    let mut jx = vec![0.0; l as usize + 2];
    let mut je = vec![0.0; l as usize + 2];
    fill_spherical_j(x.abs(), &mut jx);
    fill_spherical_j(eta.abs(), &mut je);
    spheroidal_from(l, x, eta, &jx, &je)
}

fn spheroidal_from(l: u32, xi: f64, eta: f64, jx: &[f64], je: &[f64]) -> f64 {
    let li = l as usize;
    let lf = l as f64;
    let half_xi2 = 0.5 * xi * xi;
    let t11 = (lf * lf - lf - half_xi2) * je[li] + 2.0 * eta * je[li + 1];
    if l == 0 {
        return t11;
    }
    let t12 = lf * (lf + 1.0) * ((lf - 1.0) * jx[li] - xi * jx[li + 1]);
    let t21 = (lf - 1.0) * je[li] - eta * je[li + 1];
    let t22 = (lf * lf - 1.0 - half_xi2) * jx[li] + xi * jx[li + 1];
    t11 * t22 - t12 * t21
}

/// Bisect a sign change of `f` on `[a, b]` to near machine precision.
fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= 1e-14 * b.abs().max(1.0) || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Bracket every sign change of `f` on `(0, x_max]` and bisect it.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, x_max: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut a = step;
    let mut fa = f(a);
    while a < x_max {
        let b = (a + step).min(x_max);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect(&mut f, a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 && roots.last() != Some(&a) {
        roots.push(a);
    }
    roots
}

fn check_x_max(x_max: f64) -> Result<()> {
    if !(x_max.is_finite() && x_max <= MAX_X) {
        return Err(Error::InvalidParameter(format!(
            "dimensionless cutoff {x_max} must be finite and <= {MAX_X}"
        )));
    }
    Ok(())
}

/// Torsional eigenvalues `x = omega R / c_T` in `(0, x_max]`, ascending.
///
/// `l = 1` yields the vibrational overtones only; its rigid rotation sits
/// at `x = 0` and is never bracketed.
pub fn torsional_roots(l: u32, x_max: f64) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::InvalidParameter(
            "torsional modes need l >= 1".into(),
        ));
    }
    check_x_max(x_max)?;
    Ok(scan_roots(|x| torsional_char(l, x), x_max, SCAN_STEP))
}

/// Spheroidal eigenvalues `x = omega R / c_T` in `(0, x_max]`, ascending.
pub fn spheroidal_roots(l: u32, speed_ratio: f64, x_max: f64) -> Result<Vec<f64>> {
    check_ratio(speed_ratio)?;
    check_x_max(x_max)?;
    Ok(scan_roots(
        |x| spheroidal_char(l, speed_ratio, x),
        x_max,
        SCAN_STEP,
    ))
}

fn check_ratio(speed_ratio: f64) -> Result<()> {
    if !(speed_ratio > 1.0 && speed_ratio < 4.0) {
        return Err(Error::InvalidParameter(format!(
            "speed ratio c_L/c_T = {speed_ratio} outside (1, 4)"
        )));
    }
    Ok(())
}

/// Lowest nonzero eigenvalue of the sphere (the l = 2 torsional tone for
/// ordinary solids).
pub fn fundamental_x(speed_ratio: f64) -> Result<f64> {
    let t = torsional_roots(2, 4.0)?;
    let mut best = t[0];
    for l in 0..4 {
        if let Some(&x) = spheroidal_roots(l, speed_ratio, best)?.first() {
            best = best.min(x);
        }
    }
    Ok(best)
}

/// A dimensionless eigenvalue with its labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledRoot {
    pub family: Family,
    pub l: u32,
    pub n: u32,
    pub x: f64,
}

impl ScaledRoot {
    pub fn degeneracy(&self) -> u32 {
        2 * self.l + 1
    }
}

/// All eigenvalues `x <= x_max` for one speed ratio, sorted ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionlessSpectrum {
    pub speed_ratio: f64,
    pub x_max: f64,
    pub roots: Vec<ScaledRoot>,
}

impl DimensionlessSpectrum {
    pub fn compute(speed_ratio: f64, x_max: f64) -> Result<Self> {
        check_ratio(speed_ratio)?;
        check_x_max(x_max)?;
        if x_max <= SCAN_STEP {
            return Ok(Self {
                speed_ratio,
                x_max,
                roots: Vec::new(),
            });
        }
        // Surface (Rayleigh-like) branches reach down to x ~ 0.85 l, so an
        // l range of 1.6 x_max is comfortably complete; widen if not.
        let mut l_cap = (1.6 * x_max).ceil() as usize + 6;
        loop {
            let brackets = bracket_all(speed_ratio, x_max, l_cap);
            let top = brackets.iter().map(|b| b.1 as usize).max().unwrap_or(0);
            if top + 3 < l_cap {
                let mut roots: Vec<ScaledRoot> = brackets
                    .par_iter()
                    .map(|&(family, l, a, b)| {
                        let x = match family {
                            Family::Torsional => bisect(|x| torsional_char(l, x), a, b),
                            Family::Spheroidal => {
                                bisect(|x| spheroidal_char(l, speed_ratio, x), a, b)
                            }
                        };
                        ScaledRoot { family, l, n: 0, x }
                    })
                    .collect();
                roots.sort_by(|p, q| {
                    (p.family, p.l)
                        .cmp(&(q.family, q.l))
                        .then(p.x.total_cmp(&q.x))
                });
                let mut prev: Option<(Family, u32)> = None;
                let mut n = 0;
                for r in roots.iter_mut() {
                    if prev == Some((r.family, r.l)) {
                        n += 1;
                    } else {
                        n = 1;
                        prev = Some((r.family, r.l));
                    }
                    r.n = n;
                }
                roots.sort_by(|p, q| p.x.total_cmp(&q.x));
                return Ok(Self {
                    speed_ratio,
                    x_max,
                    roots,
                });
            }
            l_cap *= 2;
        }
    }

    /// Physical spectrum of a sphere of radius `radius`, truncated at
    /// `omega_cutoff`. The cutoff is clamped to the computed range.
    pub fn scale(&self, material: &Material, radius: f64, omega_cutoff: f64) -> ModeSpectrum {
        let unit = material.c_t / radius;
        let omega_cutoff = omega_cutoff.min(self.x_max * unit);
        let modes = self
            .roots
            .iter()
            .filter(|r| r.x * unit <= omega_cutoff)
            .map(|r| Mode {
                family: r.family,
                l: r.l,
                n: r.n,
                x: r.x,
                omega: r.x * unit,
                degeneracy: r.degeneracy(),
            })
            .collect();
        ModeSpectrum {
            modes,
            radius,
            material: material.clone(),
            omega_cutoff,
        }
    }

    /// Total number of modes counting degeneracy.
    pub fn mode_count(&self) -> u64 {
        self.roots.iter().map(|r| r.degeneracy() as u64).sum()
    }
}

/// Scan every (family, l <= l_cap) branch at once; returns sign-change brackets.
fn bracket_all(speed_ratio: f64, x_max: f64, l_cap: usize) -> Vec<(Family, u32, f64, f64)> {
    let mut out = Vec::new();
    let mut jx = vec![0.0; l_cap + 2];
    let mut je = vec![0.0; l_cap + 2];
    let mut prev_t = vec![0.0; l_cap + 1];
    let mut prev_s = vec![0.0; l_cap + 1];
    let steps = (x_max / SCAN_STEP).ceil() as usize;
    let mut x_prev = 0.0;
    for i in 1..=steps {
        let x = (i as f64 * SCAN_STEP).min(x_max);
        let eta = x / speed_ratio;
        fill_spherical_j(x, &mut jx);
        fill_spherical_j(eta, &mut je);
        // Every branch starts above x ~ (c_R / c_T) l. Far below that the Bessel
        // values underflow and the residual sign is noise, so those
        // branches are not evaluated yet.
        let l_live = ((LIVE_BRANCH_SLOPE * x).floor() as usize + 2).min(l_cap);
        for l in 0..=l_live {
            let s = spheroidal_from(l as u32, x, eta, &jx, &je);
            let t = if l >= 1 { torsional_from(l as u32, x, &jx) } else { 0.0 };
            if i > 1 {
                if crosses(prev_s[l], s) {
                    out.push((Family::Spheroidal, l as u32, x_prev, x));
                }
                if l >= 1 && crosses(prev_t[l], t) {
                    out.push((Family::Torsional, l as u32, x_prev, x));
                }
            }
            prev_s[l] = s;
            prev_t[l] = t;
        }
        x_prev = x;
    }
    out
}

/// Rayleigh speeds exceed 0.69 c_T for every isotropic solid.
const LIVE_BRANCH_SLOPE: f64 = 1.5;

fn crosses(a: f64, b: f64) -> bool {
    // A residual that is exactly zero at the left grid point is reported
    // by the bracket ending there.
    a != 0.0 && (b == 0.0 || (a < 0.0) != (b < 0.0))
}

/// Physical eigenmodes of one sphere, ascending in frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub modes: Vec<Mode>,
    pub radius: f64,
    pub material: Material,
    pub omega_cutoff: f64,
}

impl ModeSpectrum {
    pub fn fundamental(&self) -> Option<&Mode> {
        self.modes.first()
    }

    pub fn mode_count(&self) -> u64 {
        self.modes.iter().map(|m| m.degeneracy as u64).sum()
    }

    pub fn volume(&self) -> f64 {
        sphere_volume(self.radius)
    }
}

pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
}

/// Enumerate the eigenmodes of a sphere of radius `radius` below `omega_cutoff`.
pub fn build_spectrum(material: &Material, radius: f64, omega_cutoff: f64) -> Result<ModeSpectrum> {
    material.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
    }
    let unit = material.c_t / radius;
    let x_max = omega_cutoff / unit;
    check_x_max(x_max)?;
    let dimless = DimensionlessSpectrum::compute(material.speed_ratio(), x_max)?;
    let spectrum = dimless.scale(material, radius, omega_cutoff);
    if spectrum.modes.is_empty() {
        let fundamental = fundamental_x(material.speed_ratio())? * unit;
        return Err(Error::CutoffTooLow {
            omega_cutoff,
            fundamental,
        });
    }
    Ok(spectrum)
}

/// Continuum mode density of three acoustic branches,
/// `g(omega) = 3 V omega^2 / (2 pi^2 c^3)` with the Debye-averaged speed.
pub fn mode_density(material: &Material, volume: f64, omega: f64) -> f64 {
    let c = material.mean_sound_speed();
    3.0 * volume * omega * omega / (2.0 * std::f64::consts::PI.powi(2) * c.powi(3))
}

/// Leading Weyl coefficient: `N(x) ~ a x^3` modes below `x = omega R / c_T`.
pub fn weyl_volume_coefficient(speed_ratio: f64) -> f64 {
    2.0 * (2.0 + speed_ratio.powi(-3)) / (9.0 * std::f64::consts::PI)
}

/// Fits the surface term `b` of `N(x) ~ a x^3 + b x^2` to a mode staircase.
///
/// `modes` yields `(x, degeneracy)` in ascending `x`; the fit uses the
/// counts on `[x_fit / 2, x_fit]`. Returns 0 when `x_fit` is too small for
/// the asymptotic form to mean anything.
pub fn fit_surface_coefficient<I>(modes: I, speed_ratio: f64, x_fit: f64) -> f64
where
    I: Iterator<Item = (f64, u32)>,
{
    const MIN_FIT_X: f64 = 10.0;
    const SAMPLES: usize = 64;
    if !(x_fit >= MIN_FIT_X) {
        return 0.0;
    }
    let a = weyl_volume_coefficient(speed_ratio);
    let mut modes = modes.peekable();
    let mut count = 0u64;
    let mut acc = 0.0;
    for j in 0..SAMPLES {
        let x = x_fit * (0.5 + 0.5 * (j as f64 + 0.5) / SAMPLES as f64);
        while let Some(&(xm, deg)) = modes.peek() {
            if xm > x {
                break;
            }
            count += deg as u64;
            modes.next();
        }
        acc += (count as f64 - a * x * x * x) / (x * x);
    }
    acc / SAMPLES as f64
}

/// `integral_0^omega_max g(omega) weight(omega) d omega`, the continuum
/// limit of a degeneracy-weighted mode sum.
pub fn dos_integral<F: Fn(f64) -> f64>(
    material: &Material,
    volume: f64,
    weight: F,
    omega_max: f64,
) -> Result<f64> {
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "upper frequency {omega_max} must be positive and finite"
        )));
    }
    // Integrate in the scaled variable u = omega / omega_max.
    let v = quad::adaptive(
        |u| {
            let w = u * omega_max;
            mode_density(material, volume, w) * weight(w)
        },
        0.0,
        1.0,
        0.0,
        1e-10,
        4000,
    )?;
    Ok(v * omega_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torsional_l2_fundamental() {
        let r = torsional_roots(2, 3.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.501).abs() < 1e-3, "{}", r[0]);
        assert!(torsional_char(2, r[0]).abs() < 1e-12);
    }

    #[test]
    fn no_torsional_root_below_one() {
        assert!(torsional_roots(2, 1.0).unwrap().is_empty());
        assert!(torsional_char(2, 1.0).abs() > 1e-3);
    }

    #[test]
    fn residual_vanishes_at_origin_without_a_root() {
        let tiny = torsional_char(3, 1e-6);
        assert!(tiny.abs() < 1e-18);
        assert!(torsional_roots(3, 0.5).unwrap().is_empty());
    }

    #[test]
    fn spheroidal_quadrupole_sits_above_torsional() {
        let si = Material::silicon();
        let s = spheroidal_roots(2, si.speed_ratio(), 5.0).unwrap();
        assert!(s[0] > 2.501 && s[0] < 2.8, "{:?}", s);
    }

    #[test]
    fn classical_poisson_quarter_anchor() {
        // Free sphere with Poisson ratio 1/4: lowest l = 2 spheroidal root.
        let s = spheroidal_roots(2, 3f64.sqrt(), 3.0).unwrap();
        assert!((s[0] - 2.639_87).abs() < 1e-4, "{}", s[0]);
    }

    #[test]
    fn breathing_mode_satisfies_its_scalar_equation() {
        let ratio = Material::silicon().speed_ratio();
        let x = spheroidal_roots(0, ratio, 6.0).unwrap()[0];
        // eta cot eta = 1 - x^2 / 4 for l = 0.
        let eta = x / ratio;
        assert!((eta / eta.tan() - (1.0 - x * x / 4.0)).abs() < 1e-9);
    }

    #[test]
    fn translation_mode_is_excluded() {
        let ratio = Material::silicon().speed_ratio();
        let r = spheroidal_roots(1, ratio, 1.0).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn torsional_rejects_l_zero() {
        assert!(torsional_roots(0, 5.0).is_err());
        assert!(spheroidal_roots(2, 0.9, 5.0).is_err());
        assert!(torsional_roots(2, 1e9).is_err());
    }

    #[test]
    fn batched_scan_matches_per_branch_search() {
        let ratio = Material::silicon().speed_ratio();
        let spec = DimensionlessSpectrum::compute(ratio, 15.0).unwrap();
        for l in 0..6 {
            let s = spheroidal_roots(l, ratio, 15.0).unwrap();
            let from_batch: Vec<f64> = spec
                .roots
                .iter()
                .filter(|r| r.family == Family::Spheroidal && r.l == l)
                .map(|r| r.x)
                .collect();
            assert_eq!(s.len(), from_batch.len(), "l = {l}");
            for (a, b) in s.iter().zip(&from_batch) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn silicon_micron_sphere_fundamental() {
        let si = Material::silicon();
        let radius = 0.5e-6;
        let spec = build_spectrum(&si, radius, 3.0e10 * 2.0 * std::f64::consts::PI).unwrap();
        let f = spec.fundamental().unwrap().omega / (2.0 * std::f64::consts::PI);
        assert!((f / 4.652e9 - 1.0).abs() < 2e-3, "{f:e}");
        assert_eq!(spec.modes[0].family, Family::Torsional);
        assert_eq!(spec.modes[0].degeneracy, 5);
    }

    #[test]
    fn cutoff_below_fundamental_is_an_error() {
        let si = Material::silicon();
        let err = build_spectrum(&si, 1e-6, 1.5 * si.c_t / 1e-6).unwrap_err();
        assert!(matches!(err, Error::CutoffTooLow { .. }));
    }

    #[test]
    fn overtones_strictly_increase() {
        let spec = DimensionlessSpectrum::compute(1.6, 30.0).unwrap();
        let mut seen = std::collections::BTreeMap::new();
        for r in &spec.roots {
            assert!(r.x > 0.0);
            let e = seen.entry((r.family, r.l)).or_insert((0u32, 0.0f64));
            assert_eq!(r.n, e.0 + 1);
            assert!(r.x > e.1);
            *e = (r.n, r.x);
        }
    }

    #[test]
    fn dos_integral_of_zero_is_zero() {
        let si = Material::silicon();
        assert_eq!(dos_integral(&si, 1e-18, |_| 0.0, 1e12).unwrap(), 0.0);
        assert!(dos_integral(&si, 1e-18, |_| 1.0, -1.0).is_err());
    }

    #[test]
    fn dos_integral_counts_debye_modes() {
        let si = Material::silicon();
        let v = 1e-18;
        let wd = 1e12;
        let n = dos_integral(&si, v, |_| 1.0, wd).unwrap();
        let c = si.mean_sound_speed();
        let want = v * wd.powi(3) / (2.0 * std::f64::consts::PI.powi(2) * c.powi(3));
        assert!((n / want - 1.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_weight_is_an_integration_failure() {
        let si = Material::silicon();
        let r = dos_integral(&si, 1.0, |w| 1.0 / (w * w * w * w), 1.0);
        assert!(matches!(r, Err(Error::Integration(_))));
    }

    #[test]
    fn low_spectrum_independent_of_cutoff() {
        let ratio = Material::silicon().speed_ratio();
        let small = DimensionlessSpectrum::compute(ratio, 12.0).unwrap();
        let large = DimensionlessSpectrum::compute(ratio, 80.0).unwrap();
        let low = |s: &DimensionlessSpectrum| -> Vec<(Family, u32, u32)> {
            s.roots.iter().filter(|r| r.x <= 10.0).map(|r| (r.family, r.l, r.n)).collect()
        };
        assert_eq!(low(&small), low(&large));
        assert_eq!(small.roots.iter().filter(|r| r.x <= 10.0).map(|r| r.degeneracy()).sum::<u32>(), 260);
    }
}
