//! Direct integration of the delayed equations of motion
//!
//! `dc_m/dtau = -(1/2) [c_m(tau) + beta e^{i phi} c_n(tau - eta) Theta(tau - eta)]`
//!
//! on a grid whose step divides `eta`, so every delayed lookup at a step
//! endpoint is a stored node. Within a step the delayed term is a known
//! forcing: the free decay is propagated exactly and the forcing integral
//! uses Simpson's rule, the exponential form of classical Runge-Kutta.
//! Midpoint values interpolate the stored history with a cubic through
//! four nodes taken from the same light-cone segment `[j eta, (j+1) eta]`;
//! the solution is smooth inside a segment and kinks only at its ends.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{GeneralInitialState, ModelParams};

/// Below this separation the delay is folded into a first-order
/// expansion `c(tau - eta) ~ c(tau) - eta c'(tau)`; the neglected terms
/// are `O(eta^2)`.
pub const SHORT_DELAY: f64 = 1e-6;

/// Both emitter amplitudes on the integration grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTrace {
    pub tau: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
    pub params: ModelParams,
    pub init: GeneralInitialState,
    /// Propagation phase used for the feedback term.
    pub phase: f64,
    pub step: f64,
}

impl PairTrace {
    pub fn norm(&self) -> Vec<f64> {
        self.c1
            .iter()
            .zip(&self.c2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }
}

/// Integrates with the phase fixed by the winding, `2 pi p`.
pub fn integrate_dde(
    params: &ModelParams,
    init: GeneralInitialState,
    tau_max: f64,
    step_hint: f64,
) -> Result<PairTrace> {
    integrate_dde_with_phase(params, init, tau_max, step_hint, params.phase())
}

/// Integrates with an arbitrary propagation phase.
pub fn integrate_dde_with_phase(
    params: &ModelParams,
    init: GeneralInitialState,
    tau_max: f64,
    step_hint: f64,
    phase: f64,
) -> Result<PairTrace> {
    params.validate()?;
    if !(tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(Error::Config(format!("tau_max must be >= 0, got {tau_max}")));
    }
    if !(step_hint > 0.0 && step_hint.is_finite()) {
        return Err(Error::Config(format!("step_hint must be > 0, got {step_hint}")));
    }
    let eta = params.eta;
    let feedback = Complex64::from_polar(params.beta, phase);
    let (a1, a2) = init.amplitudes();

    if eta < SHORT_DELAY {
        let steps = (tau_max / step_hint).ceil() as usize;
        let (c1, c2) = integrate_local(feedback, eta, a1, a2, step_hint, steps);
        return Ok(PairTrace {
            tau: (0..=steps).map(|k| k as f64 * step_hint).collect(),
            c1,
            c2,
            params: *params,
            init,
            phase,
            step: step_hint,
        });
    }

    let per_delay = (eta / step_hint).ceil() as usize;
    let h = eta / per_delay as f64;
    if per_delay < 4 {
        return Err(Error::StepTooLarge { step: h, eta });
    }
    let steps = (tau_max / h - 1e-9).ceil().max(0.0) as usize;
    let mut c1 = Vec::with_capacity(steps + 1);
    let mut c2 = Vec::with_capacity(steps + 1);
    c1.push(a1);
    c2.push(a2);
    let d = per_delay;
    let zero = Complex64::new(0.0, 0.0);
    let decay = (-0.5 * h).exp();
    let half_decay = (-0.25 * h).exp();
    for k in 0..steps {
        let seg = k / d;
        // Delayed values at tau_k - eta, its midpoint, and tau_{k+1} - eta.
        let (del1, mid, del2) = if seg == 0 {
            ([zero; 2], [zero; 2], [zero; 2])
        } else {
            let lo = (seg - 1) * d;
            let hi = seg * d;
            let i = k - d;
            let start = i.saturating_sub(1).clamp(lo, hi - 3);
            let wts = lagrange4_weights(i as f64 + 0.5 - start as f64);
            let interp = |v: &[Complex64]| -> Complex64 {
                (0..4).map(|m| v[start + m] * wts[m]).sum()
            };
            (
                [c1[i], c2[i]],
                [interp(&c1), interp(&c2)],
                [c1[i + 1], c2[i + 1]],
            )
        };
        // Variation of constants: the delayed term is a known forcing on
        // this step, integrated against e^{-(h - s)/2} by Simpson's rule.
        let force = |del: [Complex64; 2]| [-0.5 * feedback * del[1], -0.5 * feedback * del[0]];
        let (f0, fm, f1) = (force(del1), force(mid), force(del2));
        let next: Vec<Complex64> = (0..2)
            .map(|m| {
                let y = if m == 0 { c1[k] } else { c2[k] };
                decay * y + h / 6.0 * (decay * f0[m] + 4.0 * half_decay * fm[m] + f1[m])
            })
            .collect();
        c1.push(next[0]);
        c2.push(next[1]);
    }
    Ok(PairTrace {
        tau: (0..=steps).map(|k| k as f64 * h).collect(),
        c1,
        c2,
        params: *params,
        init,
        phase,
        step: h,
    })
}

/// Lagrange weights on nodes `0..4` evaluated at position `s`.
fn lagrange4_weights(s: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for (i, wi) in w.iter_mut().enumerate() {
        for j in 0..4 {
            if i != j {
                *wi *= (s - j as f64) / (i as f64 - j as f64);
            }
        }
    }
    w
}

/// Short or vanishing delay: `(1 - kappa P) c' = -(1/2)(1 + beta e^{i phi} P) c`
/// with `P` swapping the emitters and `kappa = beta eta e^{i phi} / 2`.
/// In the symmetric/antisymmetric basis `P = +/-1`, so each component
/// is an exponential.
fn integrate_local(
    feedback: Complex64,
    eta: f64,
    a1: Complex64,
    a2: Complex64,
    h: f64,
    steps: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let s0 = 0.5 * (a1 + a2);
    let b0 = 0.5 * (a1 - a2);
    let kappa = 0.5 * eta * feedback;
    let rate_s = -0.5 * (1.0 + feedback) / (1.0 - kappa);
    let rate_b = -0.5 * (1.0 - feedback) / (1.0 + kappa);
    let mut c1 = Vec::with_capacity(steps + 1);
    let mut c2 = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * h;
        let s = s0 * (rate_s * t).exp();
        let b = b0 * (rate_b * t).exp();
        c1.push(s + b);
        c2.push(s - b);
    }
    (c1, c2)
}

/// Outcome of the step-halving self test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConvergenceOrder {
    /// Empirical order from differences at `h`, `h/2`, `h/4`.
    Order(f64),
    /// No feedback: the free exponential is reproduced; largest deviation.
    Exact { max_error: f64 },
}

/// Empirical global order on `[0, 4 eta]`.
pub fn convergence_order(params: &ModelParams, init: GeneralInitialState) -> Result<ConvergenceOrder> {
    let eta = params.eta;
    if !(eta >= SHORT_DELAY) {
        return Err(Error::Domain(format!("convergence order needs eta >= {SHORT_DELAY}, got {eta}")));
    }
    let tau_max = 4.0 * eta;
    if params.beta == 0.0 {
        let tr = integrate_dde(params, init, tau_max, eta / 16.0)?;
        let (a1, a2) = init.amplitudes();
        let max_error = tr
            .tau
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let decay = (-0.5 * t).exp();
                (tr.c1[i] - a1 * decay).norm().max((tr.c2[i] - a2 * decay).norm())
            })
            .fold(0.0, f64::max);
        return Ok(ConvergenceOrder::Exact { max_error });
    }
    let runs = [16.0, 32.0, 64.0]
        .iter()
        .map(|&m| integrate_dde(params, init, tau_max, eta / m))
        .collect::<Result<Vec<_>>>()?;
    let diff = |a: &PairTrace, b: &PairTrace| {
        let r = (b.c1.len() - 1) / (a.c1.len() - 1);
        (0..a.c1.len())
            .map(|i| (a.c1[i] - b.c1[i * r]).norm().max((a.c2[i] - b.c2[i * r]).norm()))
            .fold(0.0, f64::max)
    };
    let e1 = diff(&runs[0], &runs[1]);
    let e2 = diff(&runs[1], &runs[2]);
    Ok(ConvergenceOrder::Order((e1 / e2).log2()))
}
