//! Guided field: spectral amplitudes, emitted norm and space-time intensity.
//!
//! Detunings are `Delta = (omega - omega_0) / gamma`; positions are
//! `xi = gamma x / v_g` with the emitters at `xi = -/+ eta/2`.
//! Intensities are photon densities per unit `xi`, so the integral of an
//! envelope map over `xi` equals the guided norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{check_grid, ModeExpansion, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::params::{ModelParams, Parity};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Evaluation time for spectral quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Time {
    Finite(f64),
    /// Long-time limit. Bound (zero-rate) modes keep the time-averaged
    /// weight of their oscillating part.
    Infinite,
}

impl Time {
    fn check(self) -> Result<()> {
        match self {
            Time::Finite(t) if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::Domain(format!("tau must be finite and >= 0, got {t}")))
            }
            _ => Ok(()),
        }
    }
}

/// `c_a(Delta)`, `c_b(Delta)` on a detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralAmplitude {
    pub detuning: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub tau: Time,
    pub params: ModelParams,
    pub parity: Parity,
    pub n_max: usize,
}

/// Closed-form spectral evaluator for one `(params, parity, tau)`.
///
/// `c_a = -i sqrt(beta / 2 pi) f(kd/2) sum_n alpha_n (e^{D_n tau} - 1) / D_n`
/// with `D_n = i Delta - gamma_n / 2`, `f = cos` (symmetric) or `sin`,
/// and `kd/2 = pi p + eta Delta / 2`. Everything independent of `Delta`
/// is precomputed.
struct Spectrum {
    expansion: Option<ModeExpansion>,
    params: ModelParams,
    parity: Parity,
    tau: Time,
    /// Residue of the zero-rate mode (lossless antisymmetric state).
    bound: Option<Complex64>,
    prefactor: f64,
    /// Decaying window modes: weighted residue, `W / eta`, `e^{W tau / eta}`.
    modes: Vec<(Complex64, Complex64, Complex64)>,
    /// Tail nodes `(u / eta, c / (1 + u))` at `x = tau / eta` and at `x = 0`.
    moving: Vec<(Complex64, Complex64)>,
    still: Vec<(Complex64, Complex64)>,
}

impl Spectrum {
    fn new(params: &ModelParams, parity: Parity, tau: Time, max_detuning: f64, n_max: Option<usize>) -> Result<Self> {
        params.validate()?;
        let sign = if params.winding % 2 == 0 { 1.0 } else { -1.0 };
        let prefactor = sign * (params.beta / (2.0 * PI)).sqrt();
        let eta = params.eta;
        let t = match tau {
            Time::Finite(t) => t,
            Time::Infinite => 0.0,
        };
        if eta == 0.0 {
            let w = Complex64::new(-0.5 * parity.sign() * params.beta, 0.0);
            return Ok(Spectrum {
                expansion: None,
                params: *params,
                parity,
                tau,
                bound: None,
                prefactor,
                modes: vec![(Complex64::new(1.0, 0.0), w, (w * t).exp())],
                moving: Vec::new(),
                still: Vec::new(),
            });
        }
        let needed = (eta * max_detuning / (2.0 * PI)).ceil() as usize + 8;
        let half = n_max.unwrap_or(DEFAULT_WINDOW).max(needed);
        let expansion = ModeExpansion::with_window(params, parity, half)?;
        let zero = Complex64::new(0.0, 0.0);
        let bound = expansion.modes().iter().find(|m| m.rate == zero).map(|m| m.residue);
        let modes = expansion
            .terms()
            .iter()
            .filter(|(m, _)| m.rate != zero)
            .map(|(m, wt)| (wt * m.residue, m.w / eta, (m.w * (t / eta)).exp()))
            .collect();
        let prepare = |nodes: Vec<(Complex64, Complex64)>| -> Vec<(Complex64, Complex64)> {
            nodes.into_iter().map(|(u, c)| (u / eta, c / (1.0 + u))).collect()
        };
        let still = prepare(expansion.tail_nodes(0.0, 4));
        let moving = match tau {
            Time::Finite(t) if t > 0.0 => prepare(expansion.tail_nodes(t / eta, 1)),
            _ => Vec::new(),
        };
        Ok(Spectrum {
            expansion: Some(expansion),
            params: *params,
            parity,
            tau,
            bound,
            prefactor,
            modes,
            moving,
            still,
        })
    }

    fn window(&self) -> usize {
        self.expansion.as_ref().map_or(0, |e| e.window())
    }

    fn form(&self, delta: f64) -> f64 {
        let y = 0.5 * self.params.eta * delta;
        match self.parity {
            Parity::Sup => y.cos(),
            Parity::Sub => y.sin(),
        }
    }

    /// `sum_n alpha_n phi(D_n)` over decaying modes, and the bound-mode
    /// contribution already multiplied by the form factor.
    fn parts(&self, delta: f64) -> (Complex64, Complex64) {
        if self.tau == Time::Finite(0.0) {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let base = Complex64::new(-0.5, delta);
        let node_sum = |nodes: &[(Complex64, Complex64)]| -> Complex64 {
            nodes.iter().map(|&(v, c)| c / (base + v)).sum()
        };
        let mut total = -node_sum(&self.still);
        match self.tau {
            Time::Finite(t) => {
                let common = (base * t).exp();
                for &(a, v, growth) in &self.modes {
                    let d = base + v;
                    let dt = d * t;
                    total += a * if dt.norm() < 0.1 { phi1(d, t) } else { (common * growth - 1.0) / d };
                }
                if !self.moving.is_empty() {
                    total += common * node_sum(&self.moving);
                }
            }
            Time::Infinite => {
                for &(a, v, _) in &self.modes {
                    total -= a / (base + v);
                }
            }
        }
        let bound = match self.bound {
            None => Complex64::new(0.0, 0.0),
            Some(alpha) => match self.tau {
                Time::Finite(t) => self.form(delta) * alpha * phi1(I * delta, t),
                // sin(eta Delta / 2) / (i Delta) at its finite limit.
                Time::Infinite => I * alpha * (0.5 * self.params.eta) * sinc(0.5 * self.params.eta * delta),
            },
        };
        (total, bound)
    }

    fn amplitude(&self, delta: f64) -> Complex64 {
        let (f, bound) = self.parts(delta);
        -I * self.prefactor * (self.form(delta) * f + bound)
    }

    /// `|c_a|^2 + |c_b|^2`.
    fn density(&self, delta: f64) -> f64 {
        let (f, bound) = self.parts(delta);
        let k2 = self.prefactor * self.prefactor;
        let mut total = (self.form(delta) * f + bound).norm_sqr();
        if self.tau == Time::Infinite {
            total += bound.norm_sqr();
        }
        2.0 * k2 * total
    }
}

/// `(e^{d t} - 1) / d`, accurate as `d t -> 0`.
fn phi1(d: Complex64, t: f64) -> Complex64 {
    let x = d * t;
    if x.norm() < 0.1 {
        let mut term = Complex64::new(t, 0.0);
        let mut sum = term;
        for k in 2..12 {
            term *= x / k as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0) / d
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spectral amplitudes of the emitted guided field at time `tau`.
///
/// With `eta = 0` the antisymmetric amplitude vanishes identically.
pub fn spectral_amplitudes(
    params: &ModelParams,
    parity: Parity,
    tau: Time,
    detuning: &[f64],
    n_max: Option<usize>,
) -> Result<SpectralAmplitude> {
    tau.check()?;
    check_grid("detuning", detuning)?;
    let max = detuning.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let spec = Spectrum::new(params, parity, tau, max, n_max)?;
    let a: Vec<Complex64> = detuning.par_iter().map(|&d| spec.amplitude(d)).collect();
    let b = match parity {
        Parity::Sup => a.clone(),
        Parity::Sub => a.iter().map(|v| -v).collect(),
    };
    Ok(SpectralAmplitude {
        detuning: detuning.to_vec(),
        a,
        b,
        tau,
        params: *params,
        parity,
        n_max: spec.window(),
    })
}

/// Frequency quadrature settings for [`guided_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    /// Integrate over `Delta` in `[-cutoff, cutoff]`.
    pub cutoff: f64,
    /// Odd number of trapezoid nodes.
    pub points: usize,
    /// Required stability under doubling of cutoff and node count;
    /// `None` skips the refinement check.
    pub tolerance: Option<f64>,
    pub n_max: Option<usize>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            cutoff: 50.0,
            points: 20001,
            tolerance: Some(1e-5),
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidedNorm {
    pub value: f64,
    pub cutoff: f64,
    pub points: usize,
    /// Analytic estimate of the integral beyond the cutoff (included).
    pub tail_correction: f64,
    /// Largest change under doubling, if checked.
    pub refinement_change: Option<f64>,
}

/// Probability emitted into the guided modes by time `tau`.
pub fn guided_norm(params: &ModelParams, parity: Parity, tau: Time, quad: &Quadrature) -> Result<GuidedNorm> {
    tau.check()?;
    if !(quad.cutoff > 0.0) || quad.points < 3 {
        return Err(Error::Domain("quadrature needs cutoff > 0 and at least 3 points".into()));
    }
    if tau == Time::Finite(0.0) {
        return Ok(GuidedNorm {
            value: 0.0,
            cutoff: quad.cutoff,
            points: quad.points,
            tail_correction: 0.0,
            refinement_change: quad.tolerance.map(|_| 0.0),
        });
    }
    let points = quad.points | 1;
    let Some(tol) = quad.tolerance else {
        let spec = Spectrum::new(params, parity, tau, quad.cutoff, quad.n_max)?;
        let h = 2.0 * quad.cutoff / (points - 1) as f64;
        let values = sample(&spec, points, h);
        let tail = cutoff_tail(&spec, tau, quad.cutoff);
        return Ok(GuidedNorm {
            value: trapezoid(&values, h) + tail,
            cutoff: quad.cutoff,
            points,
            tail_correction: tail,
            refinement_change: None,
        });
    };

    let mut cutoff = quad.cutoff;
    let mut points = points;
    let mut last_change = f64::INFINITY;
    for _ in 0..3 {
        // One fine grid on [-2L, 2L] at half spacing holds all three rules.
        let spec = Spectrum::new(params, parity, tau, 2.0 * cutoff, quad.n_max)?;
        let h = 2.0 * cutoff / (points - 1) as f64;
        let fine_points = 4 * (points - 1) + 1;
        let fine = sample(&spec, fine_points, 0.5 * h);
        let inner = (points - 1) + 1;
        let lo = (fine_points - 1) / 4;
        let inner_slice = &fine[lo..lo + 2 * (inner - 1) + 1];
        let coarse: Vec<f64> = inner_slice.iter().step_by(2).copied().collect();
        let wide: Vec<f64> = fine.iter().step_by(2).copied().collect();
        let tail = cutoff_tail(&spec, tau, cutoff);
        let base = trapezoid(&coarse, h) + tail;
        let wide_v = trapezoid(&wide, h) + cutoff_tail(&spec, tau, 2.0 * cutoff);
        let dense = trapezoid(inner_slice, 0.5 * h) + tail;
        let change = (wide_v - base).abs().max((dense - base).abs());
        if change <= tol {
            return Ok(GuidedNorm {
                value: base,
                cutoff,
                points,
                tail_correction: tail,
                refinement_change: Some(change),
            });
        }
        last_change = change;
        cutoff *= 2.0;
        points = 4 * (points - 1) + 1;
    }
    Err(Error::QuadratureNotConverged {
        change: last_change,
        tolerance: tol,
    })
}

fn sample(spec: &Spectrum, points: usize, h: f64) -> Vec<f64> {
    let half = (points - 1) / 2;
    (0..points)
        .into_par_iter()
        .map(|k| spec.density((k as f64 - half as f64) * h))
        .collect()
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Integral of the density beyond `|Delta| > cutoff` from its leading
/// large-`Delta` form
/// `(beta / 2 pi)(1 +/- cos eta Delta)(1 + B^2 - 2 B cos Delta tau) / Delta^2`,
/// with `B` the collective amplitude at `tau`.
fn cutoff_tail(spec: &Spectrum, tau: Time, cutoff: f64) -> f64 {
    let beta = spec.params.beta;
    let eta = spec.params.eta;
    let s = spec.parity.sign();
    let j = |k: f64| oscillatory_tail(k.abs(), cutoff);
    match tau {
        Time::Infinite => {
            let b = spec.bound.map_or(0.0, |a| a.re);
            beta / PI * (1.0 + b * b) * (j(0.0) + s * j(eta))
        }
        Time::Finite(t) => {
            let b = match &spec.expansion {
                Some(e) => e.collective(t).0.re,
                None => (-0.5 * (1.0 + s * beta) * t).exp(),
            };
            beta / PI
                * ((1.0 + b * b) * (j(0.0) + s * j(eta))
                    - 2.0 * b * j(t)
                    - s * b * (j(t + eta) + j(t - eta)))
        }
    }
}

/// `int_L^inf cos(k x) / x^2 dx` for `k >= 0`.
fn oscillatory_tail(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / l;
    }
    (k * l).cos() / l - k * si_complement(k * l)
}

/// `pi/2 - Si(x)` for `x > 0`.
fn si_complement(x: f64) -> f64 {
    if x <= 2.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut k = 0;
        loop {
            k += 1;
            let n = (2 * k) as f64;
            term *= -x2 / (n * (n + 1.0));
            let add = term / (n + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return 0.5 * PI - sum;
    }
    // Continued fraction for E1(i x) (modified Lentz).
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let h = h * Complex64::new(x.cos(), -x.sin());
    -h.im
}

/// How counter-propagating components are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntensityMode {
    /// `|right|^2 + |left|^2`: no carrier-scale fringes.
    Envelope,
    /// `|right + left|^2` with the optical carrier kept.
    FullFringe,
}

/// Intensity on a `tau x xi` grid, stored row-major by `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub xi: Vec<f64>,
    pub tau: Vec<f64>,
    /// Photon density per unit `xi`, `intensity[i * xi.len() + j]` at
    /// `(tau[i], xi[j])`.
    pub intensity: Vec<f64>,
    pub mode: IntensityMode,
    pub params: ModelParams,
    pub parity: Parity,
}

impl FieldGrid {
    pub fn at(&self, i_tau: usize, j_xi: usize) -> f64 {
        self.intensity[i_tau * self.xi.len() + j_xi]
    }

    pub fn max(&self) -> f64 {
        self.intensity.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Intensities divided by the map maximum, and that maximum.
    pub fn normalized(&self) -> (Vec<f64>, f64) {
        let peak = self.max();
        let scale = if peak > 0.0 { peak } else { 1.0 };
        (self.intensity.iter().map(|v| v / scale).collect(), peak)
    }
}

/// Light-cone intensity map.
///
/// Emitter `m` at `x_m` contributes `sqrt(beta/2) c_m(tau - |xi - x_m|)`
/// to the component travelling away from it, for retarded times `>= 0`.
pub fn intensity_map(
    params: &ModelParams,
    parity: Parity,
    xi: &[f64],
    tau: &[f64],
    n_max: Option<usize>,
    mode: IntensityMode,
) -> Result<FieldGrid> {
    params.validate()?;
    if !(params.eta > 0.0) {
        return Err(Error::Domain(format!("intensity map needs eta > 0, got {}", params.eta)));
    }
    check_grid("xi", xi)?;
    check_grid("tau", tau)?;
    let exp = ModeExpansion::with_window(params, parity, n_max.unwrap_or(DEFAULT_WINDOW))?;
    let horizon = tau.last().copied().unwrap_or(0.0);
    let table = Retarded::build(&exp, params, parity, horizon, 2 * xi.len() * tau.len());
    let half = 0.5 * params.eta;
    let omega0 = params.carrier_ratio().unwrap_or(0.0);
    let positions = [(-half, 1.0), (half, parity.sign())];
    let beta = params.beta;
    let zero = Complex64::new(0.0, 0.0);
    let intensity = tau
        .par_iter()
        .flat_map_iter(|&t| {
            let table = &table;
            xi.iter().map(move |&x| {
                let mut right = zero;
                let mut left = zero;
                for &(xm, s) in &positions {
                    let r = t - (x - xm).abs();
                    if r < 0.0 {
                        continue;
                    }
                    let mut v = s * table.at(r);
                    if mode == IntensityMode::FullFringe {
                        v *= Complex64::from_polar(1.0, -omega0 * r);
                    }
                    // At an emitter's own position its field counts as
                    // travelling into the pair, which keeps maps mirror-symmetric.
                    if x > xm || (x == xm && xm < 0.0) {
                        right += v;
                    } else {
                        left += v;
                    }
                }
                0.25 * beta
                    * match mode {
                        IntensityMode::Envelope => right.norm_sqr() + left.norm_sqr(),
                        IntensityMode::FullFringe => (right + left).norm_sqr(),
                    }
            })
        })
        .collect();
    Ok(FieldGrid {
        xi: xi.to_vec(),
        tau: tau.to_vec(),
        intensity,
        mode,
        params: *params,
        parity,
    })
}

/// Spacing cap for the retarded-time table; Hermite error is `h^4/384`.
const TABLE_STEP: f64 = 0.004;

/// Collective amplitude `B(r)` as a function of retarded time.
///
/// Large maps sample the closed form on nodes whose spacing divides `eta`
/// and interpolate with cubic Hermite using the exact slope
/// `B' = -B/2 -/+ (beta/2) B(r - eta)`. Kinks sit on multiples of `eta`,
/// which are nodes, so every panel is smooth.
enum Retarded<'a> {
    Direct(&'a ModeExpansion),
    Table { step: f64, per_delay: usize, feedback: f64, values: Vec<Complex64> },
}

impl<'a> Retarded<'a> {
    fn build(exp: &'a ModeExpansion, params: &ModelParams, parity: Parity, horizon: f64, calls: usize) -> Self {
        let per_delay = ((params.eta / TABLE_STEP).ceil() as usize).max(64);
        let step = params.eta / per_delay as f64;
        let nodes = (horizon / step).ceil() as usize + 2;
        if nodes >= calls {
            return Retarded::Direct(exp);
        }
        let values = (0..nodes).into_par_iter().map(|k| exp.collective(k as f64 * step).0).collect();
        Retarded::Table { step, per_delay, feedback: -0.5 * parity.sign() * params.beta, values }
    }

    fn at(&self, r: f64) -> Complex64 {
        let (step, per_delay, feedback, values) = match self {
            Retarded::Direct(exp) => return exp.collective(r).0,
            Retarded::Table { step, per_delay, feedback, values } => (*step, *per_delay, *feedback, values),
        };
        let k = ((r / step) as usize).min(values.len() - 2);
        let s = r / step - k as f64;
        let slope = |j: usize| {
            let delayed = if k >= per_delay { values[j - per_delay] } else { Complex64::new(0.0, 0.0) };
            (-0.5 * values[j] + feedback * delayed) * step
        };
        let (y0, y1, d0, d1) = (values[k], values[k + 1], slope(k), slope(k + 1));
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + d0 * (s3 - 2.0 * s2 + s) + y1 * (3.0 * s2 - 2.0 * s3) + d1 * (s3 - s2)
    }
}
