//! Emitter amplitudes and decay-rate observables.
//!
//! Three routes to `c(tau)` for the symmetric/antisymmetric states:
//! the Lambert branch-mode sum, the finite round-trip series, and the
//! coincident-emitter exponential. The delay-equation integrator in
//! [`crate::ddesolver`] is the fourth, independent one.

mod expansion;
mod rates;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{InitialState, ModelParams, Parity};

pub use expansion::{
    branch_mode, lambert_argument, BranchMode, ModeExpansion, DEFAULT_WINDOW,
};
pub use rates::{
    beta_for_max_rate, bic_overlap, critical_separation, effective_rate_small_eta,
    instantaneous_rate, max_instantaneous_rate, subradiant_steady_population, InstantaneousRate,
};

/// Which solver produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Source {
    BranchSum,
    Series,
    Markovian,
    Dde,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::BranchSum => "branch_sum",
            Source::Series => "series",
            Source::Markovian => "markovian",
            Source::Dde => "dde",
        }
    }
}

/// Branch-sum truncation report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    /// Largest `|n|` summed exactly.
    pub n_max: usize,
    /// Largest tail error estimate over the grid.
    pub tail_estimate: f64,
    /// Window sum of residues. The full symmetric sum tends to 1/2,
    /// the midpoint of the jump of `c` at `tau = 0`.
    pub residue_sum: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTrace {
    pub tau: Vec<f64>,
    pub values: Vec<Complex64>,
    pub source: Source,
    pub params: ModelParams,
    pub state: InitialState,
    pub truncation: Option<Truncation>,
}

impl AmplitudeTrace {
    pub fn populations(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// How the branches beyond the exact window are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailMode {
    /// Add the contour-integral tail.
    Corrected,
    /// Drop the tail; its size becomes the error estimate.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSumOptions {
    /// Exact-window half-width; `None` uses [`DEFAULT_WINDOW`].
    pub n_max: Option<usize>,
    pub tail: TailMode,
    /// Largest admissible tail error estimate at any grid point.
    pub tolerance: f64,
}

impl Default for BranchSumOptions {
    fn default() -> Self {
        BranchSumOptions {
            n_max: None,
            tail: TailMode::Corrected,
            tolerance: 1e-9,
        }
    }
}

/// Modes `n` in `[-n_max, n_max]`.
pub fn branch_modes(params: &ModelParams, parity: Parity, n_max: usize) -> Result<Vec<BranchMode>> {
    params.validate()?;
    let n = n_max as i64;
    (-n..=n).map(|k| branch_mode(params, parity, k)).collect()
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("{name} grid contains non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain(format!("{name} grid must be ascending")));
    }
    Ok(())
}

fn check_tau(grid: &[f64]) -> Result<()> {
    check_grid("tau", grid)?;
    if grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("tau grid must be non-negative".into()));
    }
    Ok(())
}

/// `c(tau) = (1/sqrt 2) sum_n alpha_n exp(-gamma_n tau / 2)`.
pub fn amplitude_branch_sum(
    params: &ModelParams,
    parity: Parity,
    tau: &[f64],
    options: &BranchSumOptions,
) -> Result<AmplitudeTrace> {
    check_tau(tau)?;
    if params.eta == 0.0 {
        return Err(Error::Domain(
            "branch sum needs eta > 0; use amplitude_markovian".into(),
        ));
    }
    let exp = ModeExpansion::with_window(params, parity, options.n_max.unwrap_or(DEFAULT_WINDOW))?;
    let eta = params.eta;
    let evaluated: Vec<(Complex64, f64)> = tau
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return (Complex64::new(FRAC_1_SQRT_2, 0.0), 0.0);
            }
            let offset = Complex64::new(-0.5 * t, 0.0);
            let x = t / eta;
            let window = exp.window_sum(x, offset, |m| m.residue);
            let (tail, err) = exp.tail_sum(x, offset, |u| 1.0 / (1.0 + u));
            match options.tail {
                TailMode::Corrected => ((window + tail) * FRAC_1_SQRT_2, err * FRAC_1_SQRT_2),
                TailMode::Truncated => (window * FRAC_1_SQRT_2, tail.norm() * FRAC_1_SQRT_2),
            }
        })
        .collect();
    let tail_estimate = evaluated.iter().map(|e| e.1).fold(0.0, f64::max);
    let n_max = exp.window();
    if tail_estimate > options.tolerance {
        return Err(Error::TruncationNotConverged {
            estimate: tail_estimate,
            tolerance: options.tolerance,
            n_max,
        });
    }
    Ok(AmplitudeTrace {
        tau: tau.to_vec(),
        values: evaluated.into_iter().map(|e| e.0).collect(),
        source: Source::BranchSum,
        params: *params,
        state: InitialState::Parity(parity),
        truncation: Some(Truncation {
            n_max,
            tail_estimate,
            residue_sum: exp.modes().iter().map(|m| m.residue).sum(),
        }),
    })
}

/// Finite round-trip series; term `j` switches on at `tau = j eta`.
pub fn amplitude_series(params: &ModelParams, parity: Parity, tau: &[f64]) -> Result<AmplitudeTrace> {
    params.validate()?;
    check_tau(tau)?;
    if params.eta == 0.0 {
        return Err(Error::Domain(
            "round-trip series needs eta > 0; use amplitude_markovian".into(),
        ));
    }
    let values = tau
        .par_iter()
        .map(|&t| Complex64::new(series_value(params.beta, params.eta, parity, t), 0.0))
        .collect();
    Ok(AmplitudeTrace {
        tau: tau.to_vec(),
        values,
        source: Source::Series,
        params: *params,
        state: InitialState::Parity(parity),
        truncation: None,
    })
}

fn series_value(beta: f64, eta: f64, parity: Parity, tau: f64) -> f64 {
    // Terms are evaluated in log space: (beta y)^j / j! overflows long
    // before the sum itself does for small eta.
    let mut total = (-0.5 * tau).exp();
    let mut ln_fact = 0.0;
    let mut j = 1usize;
    while beta > 0.0 && tau >= j as f64 * eta {
        let y = 0.5 * (tau - j as f64 * eta);
        ln_fact += (j as f64).ln();
        if y > 0.0 {
            let mag = (j as f64 * (beta * y).ln() - ln_fact - y).exp();
            let sign = if parity == Parity::Sup && j % 2 == 1 { -1.0 } else { 1.0 };
            total += sign * mag;
        }
        j += 1;
    }
    total * FRAC_1_SQRT_2
}

/// Coincident-emitter limit `c = e^{-(1 +/- beta) tau / 2} / sqrt 2`.
pub fn amplitude_markovian(params: &ModelParams, parity: Parity, tau: &[f64]) -> Result<AmplitudeTrace> {
    check_tau(tau)?;
    let rate = 1.0 + parity.sign() * params.beta;
    Ok(AmplitudeTrace {
        tau: tau.to_vec(),
        values: tau
            .iter()
            .map(|&t| Complex64::new((-0.5 * rate * t).exp() * FRAC_1_SQRT_2, 0.0))
            .collect(),
        source: Source::Markovian,
        params: *params,
        state: InitialState::Parity(parity),
        truncation: None,
    })
}

/// Emitters that never see each other's field: `c = e^{-tau/2} / sqrt 2`.
pub fn amplitude_independent(tau: &[f64]) -> Vec<Complex64> {
    tau.iter()
        .map(|&t| Complex64::new((-0.5 * t).exp() * FRAC_1_SQRT_2, 0.0))
        .collect()
}
