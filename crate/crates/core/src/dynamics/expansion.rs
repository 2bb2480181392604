//! Branch-mode sums with a contour-integral tail.
//!
//! Sums of the form `S(x) = sum_n A(u_n) exp(x u_n)` over all Lambert
//! branches `u_n = W_n(z)` converge slowly: the terms only decay like
//! `1/n` at `x = 0` and carry the Gibbs oscillation of the jump at
//! `tau = 0`. A window of modes is summed exactly; the two remaining tails
//! are converted to integrals along `Re(nu) = a` with the Abel-Plana
//! formula, using the continuous branch interpolant `u(nu)` solving
//! `u + ln u = ln z + 2 pi i nu`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lambert::{lambert_w, BRANCH_POINT};
use crate::params::{ModelParams, Parity};

/// Default half-width of the exactly summed window.
pub const DEFAULT_WINDOW: usize = 24;

const DE_STEP: f64 = 0.025;
const DE_SPAN: f64 = 4.5;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radius of the circle about `w = -1` that replaces the two principal
/// modes when they nearly coalesce (`eta` close to `eta_c`).
const PAIR_RADIUS: f64 = 0.1;
const PAIR_NODES: usize = 48;

/// One pole of the Laplace-domain amplitude.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BranchMode {
    pub n: i64,
    /// `W_n(z)` at the parity's Lambert argument.
    pub w: Complex64,
    /// `alpha_n = 1 / (1 + W_n)`.
    pub residue: Complex64,
    /// `gamma_n / gamma = 1 - 2 W_n / eta`.
    pub rate: Complex64,
}

/// `z = -/+ (eta/2) beta e^{eta/2}` (upper sign symmetric).
pub fn lambert_argument(params: &ModelParams, parity: Parity) -> f64 {
    -parity.sign() * 0.5 * params.eta * params.beta * (0.5 * params.eta).exp()
}

/// Single branch mode; the lossless antisymmetric `n = 0` mode is pinned
/// to `W_0 = eta/2` so that its rate is exactly zero.
pub fn branch_mode(params: &ModelParams, parity: Parity, n: i64) -> Result<BranchMode> {
    let eta = params.eta;
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("branch modes need eta > 0, got {eta}")));
    }
    let w = if n == 0 && parity == Parity::Sub && params.beta == 1.0 {
        Complex64::new(0.5 * eta, 0.0)
    } else {
        lambert_w(n, Complex64::new(lambert_argument(params, parity), 0.0))?
    };
    Ok(BranchMode {
        n,
        w,
        residue: 1.0 / (1.0 + w),
        rate: 1.0 - 2.0 * w / eta,
    })
}

#[derive(Debug, Clone, Copy)]
struct Point {
    /// `d nu` where `d` is the side's direction.
    nu: Complex64,
    u: Complex64,
    ln_u: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    ln_weight: f64,
    /// `ln(1 / (1 + e^{-2 pi t}))` and `ln(1 / (1 + e^{2 pi t}))`.
    ln_hi: f64,
    ln_lo: f64,
    /// Position in the node list; coarser rules take every `m`-th node.
    index: usize,
    up: Point,
    down: Point,
}

#[derive(Debug, Clone)]
struct Side {
    dir: f64,
    nodes: Vec<Node>,
}

/// Precomputed modes and tail nodes for one `(params, parity)` pair.
#[derive(Debug, Clone)]
pub struct ModeExpansion {
    eta: f64,
    ln_z: Complex64,
    modes: Vec<BranchMode>,
    /// Modes with quadrature weights; equals `modes` with unit weights
    /// unless the principal pair is replaced by contour nodes.
    terms: Vec<(BranchMode, Complex64)>,
    sides: Vec<Side>,
}

impl ModeExpansion {
    pub fn new(params: &ModelParams, parity: Parity) -> Result<Self> {
        Self::with_window(params, parity, DEFAULT_WINDOW)
    }

    /// Exact modes `n` in `[-half - 1, half]` (symmetric) or
    /// `[-half, half]` (antisymmetric); these are the conjugate-closed windows.
    pub fn with_window(params: &ModelParams, parity: Parity, half: usize) -> Result<Self> {
        params.validate()?;
        let eta = params.eta;
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("branch sums need eta > 0, got {eta}")));
        }
        if params.beta == 0.0 {
            let free = BranchMode {
                n: 0,
                w: Complex64::new(0.0, 0.0),
                residue: Complex64::new(1.0, 0.0),
                rate: Complex64::new(1.0, 0.0),
            };
            return Ok(ModeExpansion {
                eta,
                ln_z: Complex64::new(f64::NEG_INFINITY, 0.0),
                modes: vec![free],
                terms: vec![(free, Complex64::new(1.0, 0.0))],
                sides: Vec::new(),
            });
        }
        let half = half as i64;
        let lo = match parity {
            Parity::Sup => -half - 1,
            Parity::Sub => -half,
        };
        let modes = (lo..=half)
            .map(|n| branch_mode(params, parity, n))
            .collect::<Result<Vec<_>>>()?;
        let z = lambert_argument(params, parity);
        let coalescing = parity == Parity::Sup
            && modes.iter().any(|m| m.n == 0 && (m.w + 1.0).norm() < 0.4 * PAIR_RADIUS);
        let mut terms: Vec<_> = modes
            .iter()
            .filter(|m| !(coalescing && (m.n == 0 || m.n == -1)))
            .map(|m| (*m, Complex64::new(1.0, 0.0)))
            .collect();
        if coalescing {
            terms.extend(pair_nodes(z, eta));
        }
        let ln_z = Complex64::new(z, 0.0).ln();
        let sides = vec![
            Side::build(ln_z, 1.0, half as f64 + 0.5)?,
            Side::build(ln_z, -1.0, (-lo) as f64 + 0.5)?,
        ];
        Ok(ModeExpansion {
            eta,
            ln_z,
            modes,
            terms,
            sides,
        })
    }

    /// Weighted terms whose sum over any analytic `G(w)` reproduces
    /// `sum_n G(W_n)` over the window.
    pub fn terms(&self) -> &[(BranchMode, Complex64)] {
        &self.terms
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn modes(&self) -> &[BranchMode] {
        &self.modes
    }

    /// Largest `|n|` summed exactly.
    pub fn window(&self) -> usize {
        self.modes.iter().map(|m| m.n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `sum_n A(u_n) exp(x u_n + offset)` over the window only.
    pub fn window_sum<A>(&self, x: f64, offset: Complex64, amp: A) -> Complex64
    where
        A: Fn(&BranchMode) -> Complex64,
    {
        self.terms
            .iter()
            .map(|(m, wt)| wt * amp(m) * (x * m.w + offset).exp())
            .sum()
    }

    /// Tail beyond the window and an error estimate.
    ///
    /// The estimate compares the trapezoid rule at steps `h`, `2h`, `4h`;
    /// for double-exponential rules the error at `h` is close to
    /// `d_1^2 / d_2` with `d_k` the successive differences.
    ///
    /// `amp` must be analytic to the right of the contour; poles inside
    /// the tail region call for a wider window.
    pub fn tail_sum<A>(&self, x: f64, offset: Complex64, amp: A) -> (Complex64, f64)
    where
        A: Fn(Complex64) -> Complex64,
    {
        self.tail_sum_strided(x, offset, amp, 1)
    }

    /// [`Self::tail_sum`] on every `stride`-th node. Smooth integrands
    /// (`x = 0` with `A(u) = O(u^-2)`) are resolved by `stride = 4`.
    pub fn tail_sum_strided<A>(&self, x: f64, offset: Complex64, amp: A, stride: usize) -> (Complex64, f64)
    where
        A: Fn(Complex64) -> Complex64,
    {
        let xp = x - x.round();
        let mut levels = [Complex64::new(0.0, 0.0); 3];
        for side in &self.sides {
            let s = side.dir * xp;
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for node in side.nodes.iter().step_by(stride) {
                let (w_up, w_down) = if s >= 0.0 {
                    (node.ln_hi, node.ln_lo)
                } else {
                    (node.ln_lo, node.ln_hi)
                };
                let mut term = Complex64::new(0.0, 0.0);
                for (p, lw) in [(&node.up, w_up), (&node.down, w_down)] {
                    let e = x * (self.ln_z - p.ln_u)
                        + 2.0 * PI * I * p.nu * xp
                        + offset
                        + (lw + node.ln_weight);
                    if e.re < -80.0 {
                        continue;
                    }
                    term += amp(p.u) * e.exp();
                }
                acc[0] += term;
                if node.index % (2 * stride) == 0 {
                    acc[1] += term;
                }
                if node.index % (4 * stride) == 0 {
                    acc[2] += term;
                }
            }
            let rot = if s >= 0.0 { I } else { -I };
            let h = (stride as f64) * DE_STEP;
            levels[0] += rot * acc[0] * (h / DE_STEP);
            levels[1] += rot * acc[1] * (2.0 * h / DE_STEP);
            levels[2] += rot * acc[2] * (4.0 * h / DE_STEP);
        }
        let d1 = (levels[0] - levels[1]).norm();
        let d2 = (levels[1] - levels[2]).norm();
        let estimate = if d2 > d1 { d1 * d1 / d2 } else { d1 };
        (levels[0], estimate.max(f64::EPSILON * levels[0].norm()))
    }

    /// Tail nodes `(u_k, c_k)` with `tail_sum(x, offset, A)` equal to
    /// `e^offset sum_k c_k A(u_k)` at the finest level, for repeated sums
    /// at fixed `x`. Nodes with `|c_k| < e^-40` are dropped.
    pub fn tail_nodes(&self, x: f64, stride: usize) -> Vec<(Complex64, Complex64)> {
        let xp = x - x.round();
        let scale = stride as f64;
        let mut out = Vec::new();
        for side in &self.sides {
            let s = side.dir * xp;
            let rot = if s >= 0.0 { I } else { -I };
            for node in side.nodes.iter().step_by(stride) {
                let (w_up, w_down) = if s >= 0.0 {
                    (node.ln_hi, node.ln_lo)
                } else {
                    (node.ln_lo, node.ln_hi)
                };
                for (p, lw) in [(&node.up, w_up), (&node.down, w_down)] {
                    let e = x * (self.ln_z - p.ln_u) + 2.0 * PI * I * p.nu * xp + (lw + node.ln_weight);
                    if e.re < -40.0 {
                        continue;
                    }
                    out.push((p.u, rot * scale * e.exp()));
                }
            }
        }
        out
    }

    /// `sum_n A(u_n) exp(x u_n + offset)` including the tail.
    pub fn sum<A, B>(&self, x: f64, offset: Complex64, amp_mode: A, amp: B) -> (Complex64, f64)
    where
        A: Fn(&BranchMode) -> Complex64,
        B: Fn(Complex64) -> Complex64,
    {
        let (tail, err) = self.tail_sum(x, offset, amp);
        (self.window_sum(x, offset, amp_mode) + tail, err)
    }

    /// `B(tau) = sum_n alpha_n e^{-gamma_n tau / 2}` for `tau > 0`, with the
    /// tail error estimate. `B(0) = 1` by the initial condition.
    pub fn collective(&self, tau: f64) -> (Complex64, f64) {
        if tau == 0.0 {
            return (Complex64::new(1.0, 0.0), 0.0);
        }
        let x = tau / self.eta;
        let offset = Complex64::new(-0.5 * tau, 0.0);
        self.sum(x, offset, |m| m.residue, |u| 1.0 / (1.0 + u))
    }

    /// Emitter amplitude `c(tau) = B(tau) / sqrt(2)`.
    pub fn amplitude(&self, tau: f64) -> Complex64 {
        self.collective(tau).0 * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Contour nodes on `|w + 1| = PAIR_RADIUS`. With
/// `K(w) = (1 + w) z / (w (w e^w - z))`, every root `W_n` inside the circle
/// has `Res K = 1`, so `sum G(W_n) = (1/2 pi i) \oint G K dw`.
fn pair_nodes(z: f64, eta: f64) -> Vec<(BranchMode, Complex64)> {
    let delta = z - BRANCH_POINT;
    (0..PAIR_NODES)
        .map(|k| {
            let theta = 2.0 * PI * (k as f64 + 0.5) / PAIR_NODES as f64;
            let v = Complex64::from_polar(PAIR_RADIUS, theta);
            let w = v - 1.0;
            // w e^w + 1/e = e^{-1} sum_{j>=2} (j - 1) v^j / j!
            let mut series = Complex64::new(0.0, 0.0);
            let mut pow = v;
            let mut fact = 1.0;
            for j in 2..24 {
                pow *= v;
                fact *= j as f64;
                series += pow * ((j - 1) as f64 / fact);
            }
            let f = series * (-1.0f64).exp() - delta;
            let weight = v * v * z / (w * f * PAIR_NODES as f64);
            let mode = BranchMode {
                n: 0,
                w,
                residue: 1.0 / v,
                rate: 1.0 - 2.0 * w / eta,
            };
            (mode, weight)
        })
        .collect()
}

impl Side {
    fn build(ln_z: Complex64, dir: f64, a: f64) -> Result<Side> {
        let count = (2.0 * DE_SPAN / DE_STEP).round() as i64;
        let mut nodes = Vec::with_capacity(count as usize + 1);
        for k in 0..=count {
            let s = -DE_SPAN + k as f64 * DE_STEP;
            let arg = 0.5 * PI * s.sinh();
            let t = arg.exp();
            let ln_weight = (DE_STEP * 0.5 * PI * s.cosh()).ln() + arg;
            let up = Point::solve(ln_z, dir, Complex64::new(a, t))?;
            let down = Point::solve(ln_z, dir, Complex64::new(a, -t))?;
            nodes.push(Node {
                ln_weight,
                ln_hi: -ln_1p_exp(-2.0 * PI * t),
                ln_lo: -ln_1p_exp(2.0 * PI * t),
                index: k as usize,
                up,
                down,
            });
        }
        Ok(Side { dir, nodes })
    }
}

impl Point {
    fn solve(ln_z: Complex64, dir: f64, nu: Complex64) -> Result<Point> {
        let nu = dir * nu;
        let r = ln_z + 2.0 * PI * I * nu;
        let mut u = r - r.ln();
        for _ in 0..60 {
            let du = (u + u.ln() - r) / (1.0 + 1.0 / u);
            u -= du;
            if du.norm() <= 1e-15 * u.norm() {
                return Ok(Point { nu, u, ln_u: u.ln() });
            }
        }
        Err(Error::NonConvergence {
            n: nu.re.round() as i64,
            z: ln_z.exp(),
            last: u,
        })
    }
}

/// `ln(1 + e^x)` without overflow.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
