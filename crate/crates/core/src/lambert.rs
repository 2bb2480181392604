//! All branches of the Lambert W function.
//!
//! `W_n(z)` solves `w e^w = z`. Branch ranges follow the usual convention:
//! the cuts run along the negative real axis and values on a cut are taken
//! from the side reached by counter-clockwise continuity, so
//! `W_0(x + 0i)` and `W_{-1}(x + 0i)` are real on `[-1/e, 0)`.
//!
//! Every value is refined by Halley iteration on `w - z e^{-w}`, which avoids
//! overflowing `e^w` for large arguments.
//!
//! ```
//! use num_complex::Complex64;
//! use wgqed::lambert::lambert_w;
//!
//! let w = lambert_w(1, Complex64::new(1.0, 0.0)).unwrap();
//! assert!((w * w.exp() - 1.0).norm() < 1e-14);
//! assert!(w.im > std::f64::consts::PI && w.im < 3.0 * std::f64::consts::PI);
//! ```

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `-1/e`, the common branch point of `W_0`, `W_{-1}` and (from below) `W_1`.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// Arguments this close to `-1/e` return the branch-point value `-1`.
///
/// The radius is kept at a few ulp so the returned value still meets the
/// residual bound `|w e^w - z| <= 4 eps max(1, |z|)`.
pub const BRANCH_POINT_RADIUS: f64 = 4.0 * f64::EPSILON;

const MAX_ITER: usize = 50;

/// Evaluates branch `n` of the Lambert W function at complex `z`.
pub fn lambert_w(n: i64, z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("lambert argument must be finite, got {z}")));
    }
    // -0.0 sits on the upper side of the cut.
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });

    if z.im == 0.0 {
        let x = z.re;
        if n == 0 && x >= BRANCH_POINT - BRANCH_POINT_RADIUS {
            return lambert_w_real(0, x).map(|w| Complex64::new(w, 0.0));
        }
        if n == -1 && (BRANCH_POINT - BRANCH_POINT_RADIUS..0.0).contains(&x) {
            return lambert_w_real(-1, x).map(|w| Complex64::new(w, 0.0));
        }
    }

    if z == Complex64::new(0.0, 0.0) {
        return if n == 0 {
            Ok(z)
        } else {
            Err(Error::InvalidBranch { n })
        };
    }

    if (z - BRANCH_POINT).norm() <= BRANCH_POINT_RADIUS
        && (n == 0 || (n == -1 && z.im >= 0.0) || (n == 1 && z.im < 0.0))
    {
        return Ok(Complex64::new(-1.0, 0.0));
    }

    let w0 = initial_guess(n, z);
    halley(w0, z).ok_or_else(|| Error::NonConvergence {
        n,
        z,
        last: last_iterate(w0, z),
    })
}

/// Real-argument evaluation on branches 0 and -1.
pub fn lambert_w_real(n: i64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert argument must be finite, got {x}")));
    }
    let below = x < BRANCH_POINT - BRANCH_POINT_RADIUS;
    match n {
        0 if below => Err(Error::Domain(format!("W_0 needs x >= -1/e, got {x}"))),
        -1 if below || x >= 0.0 => {
            Err(Error::Domain(format!("W_-1 needs -1/e <= x < 0, got {x}")))
        }
        0 | -1 => {
            if (x - BRANCH_POINT).abs() <= BRANCH_POINT_RADIUS {
                return Ok(-1.0);
            }
            if x == 0.0 {
                return Ok(0.0);
            }
            let w0 = real_guess(n, x);
            halley_real(w0, x).ok_or(Error::NonConvergence {
                n,
                z: Complex64::new(x, 0.0),
                last: Complex64::new(w0, 0.0),
            })
        }
        _ => Err(Error::Domain(format!("real lambert W has branches 0 and -1 only, got {n}"))),
    }
}

fn initial_guess(n: i64, z: Complex64) -> Complex64 {
    let near = (z - BRANCH_POINT).norm() < 0.3;
    if near {
        let sign = match n {
            0 => Some(1.0),
            -1 if z.im >= 0.0 => Some(-1.0),
            1 if z.im < 0.0 => Some(-1.0),
            _ => None,
        };
        if let Some(s) = sign {
            let p = s * (2.0 * (E * z + 1.0)).sqrt();
            return branch_point_series(p);
        }
    }
    if n == 0 && z.re > -1.0 && z.re < 1.5 && z.im.abs() < 1.0 && z.re > -2.5 * z.im.abs() - 0.2
    {
        return pade(z);
    }
    let l1 = z.ln() + Complex64::new(0.0, 2.0 * PI * n as f64);
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn branch_point_series(p: Complex64) -> Complex64 {
    let p2 = p * p;
    -1.0 + p - p2 / 3.0 + 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2
}

/// [2/2] Padé approximant of `W_0(z)/z` about the origin.
fn pade(z: Complex64) -> Complex64 {
    z * (1.0 + z * (1.9 + z * (17.0 / 60.0))) / (1.0 + z * (2.9 + z * (101.0 / 60.0)))
}

fn real_guess(n: i64, x: f64) -> f64 {
    if x - BRANCH_POINT < 0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        let p = if n == 0 { p } else { -p };
        return branch_point_series(Complex64::new(p, 0.0)).re;
    }
    if n == 0 {
        if x < 3.0 {
            return pade(Complex64::new(x, 0.0)).re;
        }
        let l1 = x.ln();
        let l2 = l1.ln();
        return l1 - l2 + l2 / l1;
    }
    let l1 = (-x).ln();
    let l2 = (-l1).ln();
    l1 - l2 + l2 / l1
}

fn halley_step(w: Complex64, z: Complex64) -> Complex64 {
    let g = w - z * (-w).exp();
    let wp1 = w + 1.0;
    g / (wp1 - (w + 2.0) * g / (2.0 * wp1))
}

fn halley(mut w: Complex64, z: Complex64) -> Option<Complex64> {
    for _ in 0..MAX_ITER {
        let dw = halley_step(w, z);
        if !dw.re.is_finite() || !dw.im.is_finite() {
            return None;
        }
        w -= dw;
        let scale = w.norm().max(f64::MIN_POSITIVE);
        if dw.norm() <= 4.0 * f64::EPSILON * scale {
            return Some(w);
        }
        if dw.norm() <= 1e-6 * scale {
            // Cubic convergence: one more step reaches the rounding floor.
            let dw = halley_step(w, z);
            if dw.re.is_finite() && dw.im.is_finite() {
                w -= dw;
            }
            return Some(w);
        }
    }
    None
}

fn last_iterate(mut w: Complex64, z: Complex64) -> Complex64 {
    for _ in 0..MAX_ITER {
        let dw = halley_step(w, z);
        if !dw.re.is_finite() || !dw.im.is_finite() {
            break;
        }
        w -= dw;
    }
    w
}

fn halley_real(mut w: f64, x: f64) -> Option<f64> {
    for _ in 0..MAX_ITER {
        let g = w - x * (-w).exp();
        let wp1 = w + 1.0;
        let dw = g / (wp1 - (w + 2.0) * g / (2.0 * wp1));
        if !dw.is_finite() {
            return None;
        }
        w -= dw;
        let scale = w.abs().max(f64::MIN_POSITIVE);
        if dw.abs() <= 4.0 * f64::EPSILON * scale {
            return Some(w);
        }
        if dw.abs() <= 1e-6 * scale {
            let g = w - x * (-w).exp();
            let wp1 = w + 1.0;
            let dw = g / (wp1 - (w + 2.0) * g / (2.0 * wp1));
            if dw.is_finite() {
                w -= dw;
            }
            return Some(w);
        }
    }
    None
}
