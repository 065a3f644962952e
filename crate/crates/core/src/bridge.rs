//! Spectrometer conventions: conversion between dimensionless pulses and the
//! experimental parameters (A, B, omega1, T), pulse-duration arithmetic and the
//! two-spin CNOT level structure.
//!
//! Frequencies are angular frequencies stored as plain reals (the spectrometer
//! literature calls them Hz). The transverse field is `b = hbar omega1 / 2`,
//! the inversion rate `a = hbar A / T`, and the pulse runs over
//! `t in [-T/2, T/2]`.
//!
//! Two twist-strength conventions are in play. Internally the twist angle is
//! `(2/n) B_int t^n`; spectrometer settings use `B_exp = (2 B_int / n) T^n`, a
//! dimensionless number of radians. Public interfaces take and return `B_exp`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::crossings::predict_crossings;
use crate::error::{Error, Result};
use crate::model::PulseParams;

/// Largest `omega1/|A|` for which the sweep still starts far from resonance.
pub const MAX_SWEEP_RATIO: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Detector sweep amplitude `A`.
    #[serde(rename = "A")]
    pub sweep_amplitude: f64,
    /// Experimental twist strength `B_exp` (radians).
    #[serde(rename = "B_exp")]
    pub twist_strength: f64,
    /// rf amplitude `omega1`.
    pub omega1: f64,
    /// Pulse duration `T` (seconds).
    #[serde(rename = "T")]
    pub duration: f64,
    pub n: u32,
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega1 > 0.0 && self.omega1.is_finite()) {
            return Err(Error::InvalidParams(format!("omega1 must be positive, got {}", self.omega1)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParams(format!("T must be positive, got {}", self.duration)));
        }
        if !(self.sweep_amplitude != 0.0 && self.sweep_amplitude.is_finite()) {
            return Err(Error::InvalidParams("A must be nonzero and finite".into()));
        }
        if !self.twist_strength.is_finite() {
            return Err(Error::InvalidParams("B_exp must be finite".into()));
        }
        Ok(())
    }

    /// `omega1 / |A|`, the tangent of the initial field tilt.
    pub fn sweep_ratio(&self) -> f64 {
        self.omega1 / self.sweep_amplitude.abs()
    }

    /// Twist strength in the internal convention, `n B_exp / (2 T^n)`.
    pub fn internal_twist_strength(&self) -> f64 {
        experimental_to_internal_twist(self.twist_strength, self.duration, self.n)
    }

    /// Detector offset `omega_rf(t) - omega0` at reduced time `u = t/T`:
    /// `2 A u - (n B_exp / T) u^(n-1)`. It vanishes exactly at avoided crossings.
    pub fn rf_offset(&self, u: f64) -> f64 {
        2.0 * self.sweep_amplitude * u
            - self.n as f64 * self.twist_strength / self.duration * u.powi(self.n as i32 - 1)
    }
}

pub fn experimental_to_internal_twist(b_exp: f64, duration: f64, n: u32) -> f64 {
    n as f64 * b_exp / (2.0 * duration.powi(n as i32))
}

pub fn internal_to_experimental_twist(b_int: f64, duration: f64, n: u32) -> f64 {
    2.0 * b_int / n as f64 * duration.powi(n as i32)
}

fn check_twist_order(n: u32) -> Result<()> {
    match n {
        3 | 4 => Ok(()),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// `lambda = 4 |A| / (omega1^2 T)`, defined for every twist order.
pub fn inversion_rate(exp: &ExperimentParams) -> Result<f64> {
    exp.validate()?;
    Ok(4.0 * exp.sweep_amplitude.abs() / (exp.omega1 * exp.omega1 * exp.duration))
}

/// Dimensionless `eta_n = n B omega1^(n-2) / (2^(n-1) A^(n-1) T)`; cubic and
/// quartic twist only.
fn twist_eta(exp: &ExperimentParams) -> f64 {
    let (a, b, w, t) = (exp.sweep_amplitude, exp.twist_strength, exp.omega1, exp.duration);
    match exp.n {
        3 => 0.75 * b * w / (a * a * t),
        _ => b * w * w / (2.0 * a * a * a * t),
    }
}

pub fn to_dimensionless(exp: &ExperimentParams) -> Result<PulseParams> {
    let lambda = inversion_rate(exp)?;
    check_twist_order(exp.n)?;
    PulseParams::new(lambda, twist_eta(exp), exp.n)
}

/// Spectrometer settings realising `params` with rf amplitude `omega1` and
/// tilt ratio `f = omega1/|A|`.
pub fn from_dimensionless(params: &PulseParams, omega1: f64, f: f64) -> Result<ExperimentParams> {
    params.validate()?;
    check_twist_order(params.n)?;
    if !(omega1 > 0.0 && omega1.is_finite()) {
        return Err(Error::InvalidParams(format!("omega1 must be positive, got {omega1}")));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidParams(format!("f must be positive, got {f}")));
    }
    if f > MAX_SWEEP_RATIO {
        return Err(Error::SweepWindowTooNarrow(f));
    }
    let a = omega1 / f;
    let t = inversion_time(f, omega1, params.lambda)?;
    let b = match params.n {
        3 => params.eta * a * a * t / (0.75 * omega1),
        _ => 2.0 * params.eta * a * a * a * t / (omega1 * omega1),
    };
    Ok(ExperimentParams { sweep_amplitude: a, twist_strength: b, omega1, duration: t, n: params.n })
}

/// Pulse duration `4 / (f omega1 lambda)` of a twisted rapid passage.
pub fn inversion_time(f: f64, omega1: f64, lambda: f64) -> Result<f64> {
    if !(f > 0.0 && omega1 > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParams(format!(
            "inversion time needs positive inputs, got f = {f}, omega1 = {omega1}, lambda = {lambda}"
        )));
    }
    Ok(4.0 / (f * omega1 * lambda))
}

/// Duration `pi / omega1` of a resonant inversion pulse.
pub fn pi_pulse_time(omega1: f64) -> Result<f64> {
    if omega1.is_nan() || omega1 <= 0.0 {
        return Err(Error::InvalidParams(format!("omega1 must be positive, got {omega1}")));
    }
    Ok(PI / omega1)
}

/// The finite pulse only covers `|tau| <= 1/f`.
pub fn pulse_half_window(f: f64) -> f64 {
    1.0 / f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingResonance {
    pub tau: f64,
    /// Reduced time `t/T` of the crossing.
    pub u: f64,
    /// `omega_rf - omega0` there, relative to `2 |A u|` (0 at `u = 0`).
    pub relative_offset: f64,
    /// Whether the crossing falls inside the finite pulse.
    pub inside_pulse: bool,
}

/// Map each predicted crossing onto the experimental time axis and evaluate
/// the detector offset there.
pub fn crossing_resonances(params: &PulseParams, omega1: f64, f: f64) -> Result<Vec<CrossingResonance>> {
    let exp = from_dimensionless(params, omega1, f)?;
    Ok(predict_crossings(params)
        .locations
        .into_iter()
        .map(|tau| {
            let u = f * tau / 2.0;
            let offset = exp.rf_offset(u);
            let scale = 2.0 * (exp.sweep_amplitude * u).abs();
            CrossingResonance {
                tau,
                u,
                relative_offset: if scale > 0.0 { offset / scale } else { offset },
                inside_pulse: u.abs() <= 0.5,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEnergies {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotLevels {
    pub omega_c: f64,
    pub omega_t: f64,
    pub j: f64,
    /// Energies / hbar of `|control target>`, with `|0>` the `I_z = +1/2` state.
    pub levels: LevelEnergies,
    /// `|10> <-> |11>` frequency, the transition a CNOT pulse sweeps through.
    pub omega_plus: f64,
    /// `|00> <-> |01>` frequency.
    pub omega_minus: f64,
}

/// Diagonal of `H/hbar = -omega_c Iz_c - omega_t Iz_t + 2 pi J Iz_c Iz_t`.
pub fn cnot_level_structure(omega_c: f64, omega_t: f64, j: f64) -> Result<CnotLevels> {
    let pj = PI * j;
    if !(omega_c > omega_t && omega_t > pj && pj > 0.0) {
        return Err(Error::OrderingViolation(format!(
            "need omega_c > omega_t > pi J > 0, got omega_c = {omega_c}, omega_t = {omega_t}, pi J = {pj}"
        )));
    }
    let energy = |mc: f64, mt: f64| -omega_c * mc - omega_t * mt + 2.0 * PI * j * mc * mt;
    let (up, down) = (0.5, -0.5);
    Ok(CnotLevels {
        omega_c,
        omega_t,
        j,
        levels: LevelEnergies {
            e00: energy(up, up),
            e01: energy(up, down),
            e10: energy(down, up),
            e11: energy(down, down),
        },
        omega_plus: omega_t + pj,
        omega_minus: omega_t - pj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn section_params() -> ExperimentParams {
        ExperimentParams { sweep_amplitude: 4e4, twist_strength: 0.0, omega1: 4000.0, duration: 2e-3, n: 4 }
    }

    #[test]
    fn inversion_rate_from_experiment() {
        assert_eq!(inversion_rate(&section_params()).unwrap(), 5.0);
        let p = to_dimensionless(&section_params()).unwrap();
        assert_eq!(p.lambda, 5.0);
        assert_eq!(p.eta, 0.0);
        let n5 = ExperimentParams { n: 5, ..section_params() };
        assert_eq!(inversion_rate(&n5).unwrap(), 5.0);
        assert_eq!(to_dimensionless(&n5), Err(Error::UnsupportedOrder(5)));
    }

    #[test]
    fn experiment_from_pulse() {
        let p = PulseParams::new(5.0, 4.0e-3, 4).unwrap();
        let e = from_dimensionless(&p, 4000.0, 0.1).unwrap();
        assert_relative_eq!(e.duration, 2e-3, max_relative = 1e-15);
        assert_relative_eq!(e.sweep_amplitude, 4e4, max_relative = 1e-15);
        assert_relative_eq!(e.twist_strength, 2.0 * 4.0e-3 * 6.4e13 * 2e-3 / 1.6e7, max_relative = 1e-14);
        assert!(matches!(from_dimensionless(&p, 4000.0, 0.25), Err(Error::SweepWindowTooNarrow(_))));
        assert!(from_dimensionless(&p, 4000.0, 0.0).is_err());
        assert!(from_dimensionless(&PulseParams::new(5.0, 0.1, 2).unwrap(), 4000.0, 0.1).is_err());
    }

    #[test]
    fn pulse_durations() {
        assert_relative_eq!(inversion_time(0.1, 4000.0, 5.0).unwrap(), 2e-3, max_relative = 1e-15);
        assert_relative_eq!(inversion_time(0.1, 4000.0, 0.5).unwrap(), 2e-2, max_relative = 1e-15);
        assert_relative_eq!(pi_pulse_time(4000.0).unwrap(), 7.853_981_633_974_483e-4, max_relative = 1e-15);
        assert_eq!(pi_pulse_time(PI).unwrap(), 1.0);
        for w in [1.0, 4000.0, 3.3e5] {
            let ratio = inversion_time(0.1, w, 5.0).unwrap() / pi_pulse_time(w).unwrap();
            assert_relative_eq!(ratio, 8.0 / PI, max_relative = 1e-14);
        }
        assert!(inversion_time(0.0, 1.0, 1.0).is_err());
        assert!(pi_pulse_time(-1.0).is_err());
    }

    #[test]
    fn twist_conventions_invert() {
        let b_int = experimental_to_internal_twist(3.7, 2e-3, 4);
        assert_relative_eq!(internal_to_experimental_twist(b_int, 2e-3, 4), 3.7, max_relative = 1e-15);
        assert_relative_eq!(b_int, 4.0 * 3.7 / (2.0 * 1.6e-11), max_relative = 1e-15);
    }

    #[test]
    fn quartic_crossings_and_the_finite_pulse() {
        let p = PulseParams::new(0.5, 6.45e-3, 4).unwrap();
        let res = crossing_resonances(&p, 4000.0, 0.05).unwrap();
        assert_eq!(res.len(), 3);
        assert!(res.iter().all(|r| r.relative_offset.abs() < 1e-9 && r.inside_pulse));
        // at f = 0.1 the +-12.45 crossings already fall outside the pulse
        let res = crossing_resonances(&p, 4000.0, 0.1).unwrap();
        assert!(res.iter().all(|r| r.relative_offset.abs() < 1e-9));
        assert!(!res[0].inside_pulse && res[1].inside_pulse && !res[2].inside_pulse);
        // crossings at +-46.6 lie beyond the +-1/f = +-10 covered by an f = 0.1 pulse
        let p = PulseParams::new(5.0, 4.6e-4, 4).unwrap();
        let res = crossing_resonances(&p, 4000.0, 0.1).unwrap();
        assert!(!res[0].inside_pulse && res[1].inside_pulse && !res[2].inside_pulse);
        assert_eq!(pulse_half_window(0.1), 10.0);
    }

    #[test]
    fn cnot_example() {
        let l = cnot_level_structure(500.0, 100.0, 10.0).unwrap();
        assert_relative_eq!(l.omega_plus, 131.415_926_535_897_93, max_relative = 1e-15);
        assert_relative_eq!(l.omega_minus, 68.584_073_464_102_07, max_relative = 1e-15);
        assert_eq!(l.levels.e00, -500.0 / 2.0 - 100.0 / 2.0 + PI * 10.0 / 2.0);
        let tiny = cnot_level_structure(500.0, 100.0, 1e-300).unwrap();
        assert_eq!(tiny.omega_plus, 100.0);
        assert_eq!(tiny.omega_minus, 100.0);
        assert!(cnot_level_structure(100.0, 500.0, 10.0).is_err());
        assert!(cnot_level_structure(500.0, 20.0, 10.0).is_err());
        assert!(cnot_level_structure(500.0, 100.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(lambda in 0.1f64..20.0, eta in -0.1f64..0.1, n in 3u32..5, w in 10.0f64..1e5, f in 0.01f64..0.2) {
            let p = PulseParams::new(lambda, eta, n).unwrap();
            let back = to_dimensionless(&from_dimensionless(&p, w, f).unwrap()).unwrap();
            prop_assert!((back.lambda - lambda).abs() <= 1e-12 * lambda);
            prop_assert!((back.eta - eta).abs() <= 1e-12 * eta.abs());
        }

        #[test]
        fn level_gaps(wt in 1.0f64..1e3, extra in 1e-3f64..1e3, frac in 1e-3f64..0.999) {
            let wc = wt + extra;
            let j = frac * wt / PI;
            let l = cnot_level_structure(wc, wt, j).unwrap();
            let scale = wc + wt;
            prop_assert!(((l.levels.e11 - l.levels.e10) - l.omega_plus).abs() <= 1e-13 * scale);
            prop_assert!(((l.levels.e01 - l.levels.e00) - l.omega_minus).abs() <= 1e-13 * scale);
        }
    }
}
