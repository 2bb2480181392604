//! Model configuration shared by every solver.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two emitters on a waveguide, in units where the total single-emitter
/// decay rate `gamma` sets the time scale (`tau = gamma t`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Total single-emitter decay rate.
    pub gamma: f64,
    /// Fraction of `gamma` emitted into the guided modes.
    pub beta: f64,
    /// Separation in units of the photon coherence length, `d gamma / v_g`.
    pub eta: f64,
    /// Propagation phase between the emitters is `2 pi winding`.
    pub winding: u32,
}

impl ModelParams {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        let p = ModelParams {
            gamma: 1.0,
            beta,
            eta,
            winding: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_winding(mut self, winding: u32) -> Self {
        self.winding = winding;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Domain(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Domain(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        Ok(())
    }

    pub fn gamma_1d(&self) -> f64 {
        self.beta * self.gamma
    }

    pub fn gamma_3d(&self) -> f64 {
        (1.0 - self.beta) * self.gamma
    }

    /// `k_0 d = 2 pi p`.
    pub fn phase(&self) -> f64 {
        2.0 * PI * self.winding as f64
    }

    /// `omega_0 / gamma`, pinned to the winding by `omega_0 d / v_g = 2 pi p`.
    pub fn carrier_ratio(&self) -> Option<f64> {
        (self.eta > 0.0 && self.winding > 0).then(|| self.phase() / self.eta)
    }
}

/// Symmetric (superradiant) or antisymmetric (subradiant) single excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Sup,
    Sub,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Sup, Parity::Sub];

    /// `+1` for the symmetric state, `-1` for the antisymmetric one.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Sup => 1.0,
            Parity::Sub => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Sup => "sup",
            Parity::Sub => "sub",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "+" => Ok(Parity::Sup),
            "sub" | "-" => Ok(Parity::Sub),
            _ => Err(Error::Config(format!("parity must be `sup` or `sub`, got `{s}`"))),
        }
    }
}

/// `cos(theta) |sup> + e^{i phi} sin(theta) |sub>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralInitialState {
    pub theta: f64,
    pub phi: f64,
}

impl GeneralInitialState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::Domain(format!("theta must lie in [0, pi/2], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::Domain(format!("phi must lie in [0, 2 pi), got {phi}")));
        }
        Ok(GeneralInitialState { theta, phi })
    }

    pub fn from_parity(parity: Parity) -> Self {
        match parity {
            Parity::Sup => GeneralInitialState { theta: 0.0, phi: 0.0 },
            Parity::Sub => GeneralInitialState {
                theta: PI / 2.0,
                phi: 0.0,
            },
        }
    }

    /// Weights on the symmetric and antisymmetric components.
    pub fn weights(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.theta.cos(), 0.0),
            Complex64::from_polar(self.theta.sin(), self.phi),
        )
    }

    /// `(c_1(0), c_2(0))`.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let (s, b) = self.weights();
        ((s + b) * FRAC_1_SQRT_2, (s - b) * FRAC_1_SQRT_2)
    }
}

/// Initial condition attached to a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Parity(Parity),
    General(GeneralInitialState),
}
