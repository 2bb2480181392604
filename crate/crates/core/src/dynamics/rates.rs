use std::f64::consts::E;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambert::{lambert_w, lambert_w_real, BRANCH_POINT};
use crate::params::{ModelParams, Parity};

/// Arguments this far below `-1/e` are rounding noise from
/// `eta = critical_separation(beta)` and are treated as on the branch point.
const CRITICAL_SLACK: f64 = 64.0 * f64::EPSILON;

/// `eta_c = 2 W_0(1 / (e beta))`.
pub fn critical_separation(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(2.0 * lambert_w_real(0, 1.0 / (E * beta))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstantaneousRate {
    /// Real part of `1 - W_0(z) / (eta/2)` in units of `gamma`.
    pub rate: f64,
    /// The principal root is complex (`eta > eta_c`).
    pub oscillatory: bool,
}

/// Symmetric-state decay rate once the delayed field has arrived.
pub fn instantaneous_rate(params: &ModelParams) -> Result<InstantaneousRate> {
    params.validate()?;
    let eta = params.eta;
    if eta == 0.0 {
        return Err(Error::Domain("instantaneous rate needs eta > 0".into()));
    }
    let half = 0.5 * eta;
    let mut z = -half * params.beta * half.exp();
    if z < BRANCH_POINT && z > BRANCH_POINT - CRITICAL_SLACK {
        z = BRANCH_POINT;
    }
    if z >= BRANCH_POINT {
        Ok(InstantaneousRate {
            rate: 1.0 - lambert_w_real(0, z)? / half,
            oscillatory: false,
        })
    } else {
        let w = lambert_w(0, Complex64::new(z, 0.0))?;
        Ok(InstantaneousRate {
            rate: 1.0 - w.re / half,
            oscillatory: true,
        })
    }
}

/// `1 - W_0(-1/e) / W_0(1/(e beta))`, the rate at `eta = eta_c`.
pub fn max_instantaneous_rate(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(1.0 - lambert_w_real(0, BRANCH_POINT)? / lambert_w_real(0, 1.0 / (E * beta))?)
}

/// Inverse of [`max_instantaneous_rate`]: the `beta` whose peak rate is `rate`.
pub fn beta_for_max_rate(rate: f64) -> Result<f64> {
    if !(rate > 1.0) {
        return Err(Error::Domain(format!("peak rate must exceed 1, got {rate}")));
    }
    let w = 1.0 / (rate - 1.0);
    let beta = 1.0 / (E * w * w.exp());
    if beta > 1.0 {
        return Err(Error::Domain(format!(
            "peak rate {rate} exceeds the lossless maximum"
        )));
    }
    Ok(beta)
}

/// First-order-in-`eta` rate `(1 +/- beta) / (1 -/+ beta eta / 2)`.
pub fn effective_rate_small_eta(params: &ModelParams, parity: Parity) -> Result<f64> {
    params.validate()?;
    let s = parity.sign();
    let denom = 1.0 - s * params.beta * params.eta / 2.0;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "small-eta rate needs beta eta < 2, got {}",
            params.beta * params.eta
        )));
    }
    Ok((1.0 + s * params.beta) / denom)
}

/// Per-emitter long-time population of the antisymmetric state.
pub fn subradiant_steady_population(params: &ModelParams) -> f64 {
    if params.beta < 1.0 {
        return 0.0;
    }
    let d = 1.0 + 0.5 * params.eta;
    0.5 / (d * d)
}

/// Overlap of the long-time antisymmetric state with the bound state.
pub fn bic_overlap(params: &ModelParams) -> f64 {
    1.0 / (1.0 + 0.5 * params.eta)
}
