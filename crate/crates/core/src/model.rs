//! Dimensionless model of twisted rapid passage.
//!
//! Internal units set `hbar = b = 1`. Time is `tau = (a/b) t` and the pulse is
//! described by the inversion rate `lambda = hbar a / b^2`, the twist strength
//! `eta_n = hbar B b^(n-2) / a^(n-1)` and the twist order `n`. The polynomial
//! twist is `phi_n(t) = (2/n) B t^n`.
//!
//! Every twist-dependent quantity below is computed from [`twist_angle`] and
//! [`twist_rate`]; a non-polynomial profile (periodic twist, say) only has to
//! supply those two functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field parameters of the lab-frame Hamiltonian `H(t) = sigma . F(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabFieldParams {
    /// Field inversion rate (energy / time).
    pub a: f64,
    /// Transverse field amplitude (energy).
    pub b: f64,
    /// Twist strength `B` with the `c_n = 2/n` convention (rad / time^n).
    pub twist_strength: f64,
    pub n: u32,
    pub hbar: f64,
}

impl LabFieldParams {
    pub fn new(a: f64, b: f64, twist_strength: f64, n: u32, hbar: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "field amplitudes must be positive, got a = {a}, b = {b}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) || !twist_strength.is_finite() {
            return Err(Error::InvalidParams("hbar and B must be finite, hbar > 0".into()));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("twist order must be >= 2, got {n}")));
        }
        Ok(Self { a, b, twist_strength, n, hbar })
    }

    /// Reduce to the dimensionless pulse description.
    pub fn to_pulse(&self) -> PulseParams {
        let lambda = self.hbar * self.a / (self.b * self.b);
        let eta = self.hbar * self.twist_strength * self.b.powi(self.n as i32 - 2)
            / self.a.powi(self.n as i32 - 1);
        PulseParams { lambda, eta, n: self.n }
    }
}

/// Dimensionless description of one rapid-passage pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    /// Dimensionless inversion rate; `lambda > 1` is non-adiabatic.
    pub lambda: f64,
    /// Dimensionless twist strength `eta_n` (for `n = 2` this is `hbar B / a`).
    pub eta: f64,
    /// Twist order.
    pub n: u32,
}

impl PulseParams {
    pub fn new(lambda: f64, eta: f64, n: u32) -> Result<Self> {
        let p = Self { lambda, eta, n };
        p.validate()?;
        Ok(p)
    }

    pub fn twistless(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !self.eta.is_finite() {
            return Err(Error::InvalidParams(format!("eta must be finite, got {}", self.eta)));
        }
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("twist order must be >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Instantaneous eigensystem of the lab-frame Hamiltonian at `tau`.
///
/// The polar angle is only ever carried as `cos_theta` / `sin_theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub tau: f64,
    /// `E(tau) / b = sqrt(1 + tau^2)`.
    pub energy: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

impl EigenFrame {
    pub fn at(tau: f64, params: &PulseParams) -> Self {
        let energy = 1.0_f64.hypot(tau);
        Self {
            tau,
            energy,
            cos_theta: tau / energy,
            sin_theta: 1.0 / energy,
            phi: twist_angle(tau, params),
            phi_dot: twist_rate(tau, params),
        }
    }
}

/// `phi_n(tau) = (2/n) (eta/lambda) tau^n`.
pub fn twist_angle(tau: f64, params: &PulseParams) -> f64 {
    let n = params.n as i32;
    (2.0 / n as f64) * (params.eta / params.lambda) * tau.powi(n)
}

/// `(b/a) dphi_n/dt = 2 (eta/lambda) tau^(n-1)`, the tau-derivative of [`twist_angle`].
pub fn twist_rate(tau: f64, params: &PulseParams) -> f64 {
    2.0 * (params.eta / params.lambda) * tau.powi(params.n as i32 - 1)
}

/// Geometric-phase rates `(gamma_dot_plus, gamma_dot_minus)`, each
/// `-(phi_dot/2)(1 -/+ cos theta)`.
pub fn gamma_dot_pm(tau: f64, params: &PulseParams) -> (f64, f64) {
    let frame = EigenFrame::at(tau, params);
    let half_rate = 0.5 * frame.phi_dot;
    (
        -half_rate * (1.0 - frame.cos_theta),
        -half_rate * (1.0 + frame.cos_theta),
    )
}

/// Non-adiabatic coupling `Gamma_bar = theta'/2 - i (phi'/2) sin theta`.
pub fn coupling(tau: f64, params: &PulseParams) -> Complex64 {
    let frame = EigenFrame::at(tau, params);
    Complex64::new(
        -0.5 / (1.0 + tau * tau),
        -0.5 * frame.phi_dot * frame.sin_theta,
    )
}

/// Detuning `delta_bar = (2/lambda) E - phi' cos theta`, the rate of the
/// dynamical-plus-geometric relative phase.
pub fn detuning(tau: f64, params: &PulseParams) -> f64 {
    let frame = EigenFrame::at(tau, params);
    (2.0 / params.lambda) * frame.energy - frame.phi_dot * frame.cos_theta
}

/// Rotating-frame energy gap `2 sqrt(1 + (tau - eta tau^(n-1))^2)` in units of `b`.
pub fn rotating_gap(tau: f64, params: &PulseParams) -> f64 {
    let offset = tau - params.eta * tau.powi(params.n as i32 - 1);
    2.0 * 1.0_f64.hypot(offset)
}

/// `|Gamma_bar / delta_bar|`, the size of the first-order admixture of the other
/// level in the adiabatic state. Infinite where the detuning vanishes.
pub fn adiabaticity_ratio(tau: f64, params: &PulseParams) -> f64 {
    let delta = detuning(tau, params);
    if delta == 0.0 {
        return f64::INFINITY;
    }
    coupling(tau, params).norm() / delta.abs()
}
