//! Scalar observables: cooperativity, coherence non-Markovianity and
//! emitter-field linear entropy.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{check_grid, subradiant_steady_population, ModeExpansion};
use crate::error::{Error, Result};
use crate::params::{GeneralInitialState, ModelParams, Parity};

/// Default half-width of the smallest window in the cooperativity sum.
pub const COOPERATIVITY_WINDOW: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObservableKind {
    Cooperativity,
    NonMarkovianity,
    LinearEntropy,
    BicOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableScalar {
    pub name: ObservableKind,
    pub value: f64,
    pub params: ModelParams,
    pub metadata: BTreeMap<String, f64>,
}

impl ObservableScalar {
    fn new(name: ObservableKind, value: f64, params: &ModelParams) -> Self {
        ObservableScalar {
            name,
            value,
            params: *params,
            metadata: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }
}

/// `B(tau) = sqrt(2) c(tau)` for one parity at arbitrary times.
struct Collective {
    expansion: Option<ModeExpansion>,
    markov_rate: f64,
}

impl Collective {
    fn new(params: &ModelParams, parity: Parity) -> Result<Self> {
        params.validate()?;
        let expansion = if params.eta > 0.0 {
            Some(ModeExpansion::new(params, parity)?)
        } else {
            None
        };
        Ok(Collective {
            expansion,
            markov_rate: 1.0 + parity.sign() * params.beta,
        })
    }

    fn at(&self, tau: f64) -> Complex64 {
        match &self.expansion {
            Some(e) => e.collective(tau).0,
            None => Complex64::new((-0.5 * self.markov_rate * tau).exp(), 0.0),
        }
    }
}

/// Guided-to-free-space emission ratio `gamma_in / gamma_3D`.
///
/// The double branch sum is evaluated on windows `n_max`, `2 n_max` and
/// `4 n_max`; its truncation error falls like `1 / n_max`, which the
/// reported value removes by Richardson extrapolation. Metadata key
/// `extrapolation_change` is the difference of the two extrapolants.
pub fn cooperativity(params: &ModelParams, parity: Parity, n_max: Option<usize>) -> Result<ObservableScalar> {
    params.validate()?;
    let beta = params.beta;
    if beta == 0.0 {
        return Ok(ObservableScalar::new(ObservableKind::Cooperativity, 0.0, params));
    }
    if beta == 1.0 {
        return Err(Error::Divergent(
            "cooperativity is infinite without free-space loss (beta = 1)".into(),
        ));
    }
    let eta = params.eta;
    if eta == 0.0 {
        let value = match parity {
            Parity::Sup => 2.0 * beta / ((1.0 - beta) * (1.0 + beta)),
            Parity::Sub => 0.0,
        };
        return Ok(ObservableScalar::new(ObservableKind::Cooperativity, value, params));
    }
    let n = n_max.unwrap_or(COOPERATIVITY_WINDOW).max(1);
    let sums = [n, 2 * n, 4 * n]
        .par_iter()
        .map(|&w| cooperativity_window(params, parity, w))
        .collect::<Result<Vec<_>>>()?;
    let r1 = 2.0 * sums[1] - sums[0];
    let r2 = 2.0 * sums[2] - sums[1];
    let change = (r2 - r1).abs();
    let tolerance = 1e-5 * r2.abs().max(1.0);
    if change > tolerance {
        return Err(Error::TruncationNotConverged {
            estimate: change,
            tolerance,
            n_max: 4 * n,
        });
    }
    Ok(ObservableScalar::new(ObservableKind::Cooperativity, r2, params)
        .with("n_max", (4 * n) as f64)
        .with("truncated_sum", sums[2])
        .with("extrapolation_change", change))
}

/// `beta/(1-beta) sum_{n,m} alpha_n alpha_m^* / (gamma_n + gamma_m^*)
/// [2 +/- (e^{-eta gamma_n/2} + e^{-eta gamma_m^*/2})]` over one window.
fn cooperativity_window(params: &ModelParams, parity: Parity, half: usize) -> Result<f64> {
    let exp = ModeExpansion::with_window(params, parity, half)?;
    let eta = params.eta;
    let s = parity.sign();
    let terms: Vec<(Complex64, Complex64, Complex64)> = exp
        .terms()
        .iter()
        .map(|(m, wt)| (wt * m.residue, m.rate, (-0.5 * eta * m.rate).exp()))
        .collect();
    let mut total = 0.0;
    for &(a, g, e) in &terms {
        for &(b, h, f) in &terms {
            let v = a * b.conj() / (g + h.conj()) * (2.0 + s * (e + f.conj()));
            total += v.re;
        }
    }
    Ok(params.beta / (1.0 - params.beta) * total)
}

/// l1 coherence of the emitter pair on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceTrace {
    pub tau: Vec<f64>,
    /// `2 |c_1| |c_2|`.
    pub coherence: Vec<f64>,
    /// `2 [cos^2(theta) |c_sup|^2 - sin^2(theta) |c_sub|^2]`; may be negative.
    pub difference_form: Vec<f64>,
    pub state: GeneralInitialState,
    pub params: ModelParams,
}

/// `c_1 = (cos(theta) B_sup + e^{i phi} sin(theta) B_sub) / sqrt 2`, and
/// `c_2` with the antisymmetric part reversed.
fn pair_amplitudes(state: &GeneralInitialState, sup: Complex64, sub: Complex64) -> (Complex64, Complex64) {
    let (ws, wb) = state.weights();
    let s = ws * sup * FRAC_1_SQRT_2;
    let b = wb * sub * FRAC_1_SQRT_2;
    (s + b, s - b)
}

pub fn coherence_trace(params: &ModelParams, state: GeneralInitialState, tau: &[f64]) -> Result<CoherenceTrace> {
    check_grid("tau", tau)?;
    if tau.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("tau grid must be non-negative".into()));
    }
    let sup = Collective::new(params, Parity::Sup)?;
    let sub = Collective::new(params, Parity::Sub)?;
    let (cos2, sin2) = (state.theta.cos().powi(2), state.theta.sin().powi(2));
    let rows: Vec<(f64, f64)> = tau
        .par_iter()
        .map(|&t| {
            let (bs, bb) = (sup.at(t), sub.at(t));
            let (c1, c2) = pair_amplitudes(&state, bs, bb);
            (2.0 * c1.norm() * c2.norm(), cos2 * bs.norm_sqr() - sin2 * bb.norm_sqr())
        })
        .collect();
    Ok(CoherenceTrace {
        tau: tau.to_vec(),
        coherence: rows.iter().map(|r| r.0).collect(),
        difference_form: rows.iter().map(|r| r.1).collect(),
        state,
        params: *params,
    })
}

/// Initial-state phase used in the `theta` scan of [`non_markovianity`].
/// With `phi = pi/2` and real amplitudes the l1 coherence is
/// `cos^2(theta) B_sup^2 + sin^2(theta) B_sub^2`.
pub const SCAN_PHASE: f64 = FRAC_PI_2;

/// Default horizon `50 max(1, eta)`.
pub fn default_horizon(params: &ModelParams) -> f64 {
    50.0 * params.eta.max(1.0)
}

/// Total increase of the l1 coherence, maximised over `theta` samples in
/// `[0, pi/2]` at phase [`SCAN_PHASE`]. Metadata holds `argmax_theta`.
pub fn non_markovianity(params: &ModelParams, tau_max: Option<f64>, theta_samples: usize) -> Result<ObservableScalar> {
    params.validate()?;
    let tau_max = tau_max.unwrap_or_else(|| default_horizon(params));
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::Config(format!("tau_max must be > 0, got {tau_max}")));
    }
    if theta_samples < 2 {
        return Err(Error::Config("need at least 2 theta samples".into()));
    }
    let sup = Collective::new(params, Parity::Sup)?;
    let sub = Collective::new(params, Parity::Sub)?;
    let plateau = 2.0 * subradiant_steady_population(params);
    for (name, b, rest) in [("symmetric", &sup, 0.0), ("antisymmetric", &sub, plateau)] {
        let left = (b.at(tau_max).norm_sqr() - rest).abs();
        if left > 1e-6 {
            return Err(Error::Config(format!(
                "{name} trace has not settled by tau_max = {tau_max} (residual {left:.2e})"
            )));
        }
    }
    let grid = scan_grid(params.eta, tau_max);
    let traces: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| (sup.at(t).norm_sqr(), sub.at(t).norm_sqr()))
        .collect();
    let state = |theta: f64| GeneralInitialState::new(theta, SCAN_PHASE);
    let results = (0..theta_samples)
        .into_par_iter()
        .map(|k| {
            let theta = FRAC_PI_2 * k as f64 / (theta_samples - 1) as f64;
            let st = state(theta)?;
            let (cos2, sin2) = (theta.cos().powi(2), theta.sin().powi(2));
            let samples: Vec<f64> = traces.iter().map(|&(s, b)| cos2 * s + sin2 * b).collect();
            let value = |t: f64| {
                let (c1, c2) = pair_amplitudes(&st, sup.at(t), sub.at(t));
                2.0 * c1.norm() * c2.norm()
            };
            Ok((theta, positive_variation(&grid, &samples, value)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (theta, best) = results
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc });
    let at = |target: f64| {
        results
            .iter()
            .find(|r| (r.0 - target).abs() < 1e-12)
            .map_or(f64::NAN, |r| r.1)
    };
    Ok(ObservableScalar::new(ObservableKind::NonMarkovianity, best, params)
        .with("argmax_theta", theta)
        .with("symmetric", at(0.0))
        .with("antisymmetric", at(FRAC_PI_2))
        .with("tau_max", tau_max)
        .with("theta_samples", theta_samples as f64))
}

/// Step `min(0.01, eta/32)` through the first twenty round trips, `0.01` after.
fn scan_grid(eta: f64, tau_max: f64) -> Vec<f64> {
    let fine = if eta > 0.0 { (eta / 32.0).min(0.01) } else { 0.01 };
    let switch = (20.0 * eta).min(tau_max);
    let mut grid = Vec::new();
    let n1 = (switch / fine).ceil() as usize;
    for k in 0..n1 {
        grid.push(k as f64 * switch / n1 as f64);
    }
    let n2 = ((tau_max - switch) / 0.01).ceil().max(1.0) as usize;
    for k in 0..=n2 {
        grid.push(switch + k as f64 * (tau_max - switch) / n2 as f64);
    }
    grid.dedup();
    grid
}

/// Sample differences below this are rounding noise and not refined.
const RESOLVED: f64 = 1e-12;

/// Sum of increases of `f` between successive extrema. Extrema bracketed
/// by the samples are located by golden-section search on `f`.
fn positive_variation<F: Fn(f64) -> f64>(grid: &[f64], samples: &[f64], f: F) -> f64 {
    let n = samples.len();
    let mut points = vec![samples[0]];
    for k in 1..n - 1 {
        let (a, b, c) = (samples[k - 1], samples[k], samples[k + 1]);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if (is_max || is_min) && (b - a).abs().max((b - c).abs()) < RESOLVED {
            points.push(b);
        } else if is_max || is_min {
            let sign = if is_max { 1.0 } else { -1.0 };
            let (_, v) = golden_max(|t| sign * f(t), grid[k - 1], grid[k + 1], 1e-10);
            points.push(sign * v);
        }
    }
    points.push(samples[n - 1]);
    points.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
}

/// Maximiser of a unimodal `f` on `[a, b]` and its value.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x).max(f1).max(f2);
    (x, v)
}

/// `S = 4 |c|^2 (1 - 2 |c|^2)` for a parity state.
pub fn linear_entropy_trace(params: &ModelParams, parity: Parity, tau: &[f64]) -> Result<Vec<f64>> {
    check_grid("tau", tau)?;
    if tau.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("tau grid must be non-negative".into()));
    }
    let b = Collective::new(params, parity)?;
    Ok(tau
        .par_iter()
        .map(|&t| {
            let p = 0.5 * b.at(t).norm_sqr();
            4.0 * p * (1.0 - 2.0 * p)
        })
        .collect())
}

/// Separation maximising the steady linear entropy of the lossless
/// antisymmetric state, `2 (sqrt 2 - 1)`.
pub fn optimal_bic_delay() -> f64 {
    2.0 * (SQRT_2 - 1.0)
}

/// Numerical maximiser of the late-time entropy from the branch sum,
/// evaluated at `tau = 60 max(1, eta)` over `eta` in `[lo, hi]`.
pub fn scan_bic_delay(lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let entropy = |eta: f64| -> Result<f64> {
        let p = ModelParams::new(1.0, eta)?;
        let t = 60.0 * eta.max(1.0);
        Ok(linear_entropy_trace(&p, Parity::Sub, &[t])?[0])
    };
    // Coarse scan, then refine around the best sample.
    let samples = 41;
    let step = (hi - lo) / (samples - 1) as f64;
    let values = (0..samples)
        .map(|k| entropy(lo + k as f64 * step))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, &v)| if v > values[b] { k } else { b });
    let a = (lo + (best as f64 - 1.0) * step).max(lo);
    let b = (lo + (best as f64 + 1.0) * step).min(hi);
    let (eta, _) = golden_max(|e| entropy(e).unwrap_or(f64::NEG_INFINITY), a, b, 1e-7);
    Ok(eta)
}

/// Overlap of the late antisymmetric state with the bound state, as a scalar.
pub fn bic_overlap_scalar(params: &ModelParams) -> Result<ObservableScalar> {
    params.validate()?;
    let v = crate::dynamics::bic_overlap(params);
    Ok(ObservableScalar::new(ObservableKind::BicOverlap, v, params))
}
