//! Spherical Bessel functions of the first kind, j_l(x).

use crate::error::{Error, Result};

/// j_l(x) for a single order.
///
/// Accurate to about 12 significant digits for l <= 50 and x <= 1e4.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("spherical_bessel_j: x = {x} must be >= 0")));
    }
    if !x.is_finite() {
        return Err(Error::Domain("spherical_bessel_j: x must be finite".into()));
    }
    let mut out = vec![0.0; l as usize + 1];
    fill_spherical_j(x, &mut out);
    Ok(out[l as usize])
}

/// Fill `out[l] = j_l(x)` for `l = 0..out.len()`; `x` must be finite and >= 0.
///
/// Below x = 1 every order comes from its power series. Above, orders up to
/// floor(x) use upward recurrence and higher orders a normalised downward
/// (Miller) recurrence.
pub(crate) fn fill_spherical_j(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if x < 1.0 {
        series_all(x, out);
        return;
    }
    let lmax = n - 1;
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = (s / x - c) / x;
    out[0] = j0;
    if lmax == 0 {
        return;
    }
    out[1] = j1;
    let l_up = (x.floor() as usize).min(lmax);
    for l in 1..l_up {
        out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
    }
    if l_up == lmax {
        return;
    }

    // Miller recurrence from well above the turning point.
    let start = lmax + 40 + (10.0 * x.cbrt()).ceil() as usize;
    let mut f_next = 0.0; // f_{l+1}
    let mut f_cur = 1.0; // f_l
    let mut l = start;
    let mut tail = vec![0.0; lmax - l_up + 2]; // indices l_up-1 ..= lmax
    loop {
        if l <= lmax && l + 1 >= l_up {
            tail[l + 1 - l_up] = f_cur;
        }
        if l + 1 == l_up || l == 0 {
            break;
        }
        let f_prev = (2 * l + 1) as f64 / x * f_cur - f_next;
        f_next = f_cur;
        f_cur = f_prev;
        l -= 1;
        if f_cur.abs() > 1e250 {
            f_cur *= 1e-250;
            f_next *= 1e-250;
            for v in tail.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Least-squares match to the two upward values; normalise first so the
    // squares cannot underflow.
    let big = tail[0].abs().max(tail[1].abs());
    let a = tail[1] / big; // l_up
    let b = tail[0] / big; // l_up - 1
    let scale = (out[l_up] * a + out[l_up - 1] * b) / (a * a + b * b) / big;
    for l in l_up + 1..=lmax {
        out[l] = scale * tail[l + 1 - l_up];
    }
}

fn series_all(x: f64, out: &mut [f64]) {
    let z = -0.5 * x * x;
    let mut pref = 1.0; // x^l / (2l+1)!!
    for (l, slot) in out.iter_mut().enumerate() {
        if l > 0 {
            pref *= x / (2 * l + 1) as f64;
        }
        if pref == 0.0 {
            *slot = 0.0;
            continue;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= z / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        *slot = pref * sum;
    }
}
