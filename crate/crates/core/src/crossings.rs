//! Avoided-crossing locations for polynomial twist.
//!
//! In the rotating frame the gap is `2 sqrt(1 + (tau - eta tau^(n-1))^2)`, which
//! is minimal wherever `tau = eta tau^(n-1)`. Besides `tau = 0` the real roots
//! satisfy `tau^(n-2) = 1/eta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PulseParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSet {
    /// Sorted ascending; always contains 0.
    pub locations: Vec<f64>,
    /// Spacing between adjacent crossings, `None` for a lone crossing at 0.
    pub separation: Option<f64>,
}

impl CrossingSet {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.locations.iter().fold(0.0, |m, t| m.max(t.abs()))
    }
}

fn residual(tau: f64, eta: f64, n: u32) -> f64 {
    tau - eta * tau.powi(n as i32 - 1)
}

fn newton_polish(tau: f64, eta: f64, n: u32) -> f64 {
    let k = n as i32;
    let slope = 1.0 - (n as f64 - 1.0) * eta * tau.powi(k - 2);
    if slope == 0.0 || !slope.is_finite() {
        return tau;
    }
    let polished = tau - residual(tau, eta, n) / slope;
    if residual(polished, eta, n).abs() <= residual(tau, eta, n).abs() {
        polished
    } else {
        tau
    }
}

/// Magnitude of the nonzero crossings, `(1/|eta|)^(1/(n-2))`, when they exist.
fn outer_radius(params: &PulseParams) -> Option<f64> {
    if params.n <= 2 || params.eta == 0.0 {
        return None;
    }
    let even = params.n.is_multiple_of(2);
    if even && params.eta < 0.0 {
        return None;
    }
    let k = (params.n - 2) as f64;
    Some((1.0 / params.eta.abs()).powf(1.0 / k))
}

pub fn predict_crossings(params: &PulseParams) -> CrossingSet {
    let mut locations = vec![0.0];
    if let Some(r) = outer_radius(params) {
        if params.n.is_multiple_of(2) {
            let r = newton_polish(r, params.eta, params.n);
            locations.push(-r);
            locations.push(r);
        } else {
            let t = params.eta.signum() * r;
            locations.push(newton_polish(t, params.eta, params.n));
        }
    }
    locations.sort_by(|a, b| a.total_cmp(b));
    let separation = outer_radius(params).map(|_| {
        let nonzero = locations.iter().find(|t| **t != 0.0).copied().unwrap_or(0.0);
        nonzero.abs()
    });
    CrossingSet { locations, separation }
}

/// Spacing between adjacent avoided crossings.
pub fn crossing_separation(params: &PulseParams) -> Result<f64> {
    predict_crossings(params).separation.ok_or(Error::SingleCrossing)
}
