//! Amplitude dynamics in the adiabatic representation, plus a lab-frame oracle.

mod adiabatic;
mod lab_frame;

pub use adiabatic::{asymptotic_probability, asymptotic_report, integrate, rhs, AdiabaticSystem};
pub use lab_frame::{lab_frame_oracle, lab_frame_report, LabFrameSystem};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::crossings::predict_crossings;
use crate::error::{Error, Result};
use crate::model::{adiabaticity_ratio, PulseParams};
use crate::rk4::StepControl;

/// Amplitudes of the lower (`s`) and upper (`i`) instantaneous levels and the
/// accumulated relative phase `phase = integral of detuning`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub s: Complex64,
    pub i: Complex64,
    pub phase: f64,
}

impl AmplitudeState {
    pub fn ground() -> Self {
        Self { s: Complex64::new(1.0, 0.0), i: Complex64::new(0.0, 0.0), phase: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.s.norm_sqr() + self.i.norm_sqr()
    }

    pub fn upper_population(&self) -> f64 {
        self.i.norm_sqr()
    }

    pub(crate) fn to_array(self) -> [f64; 5] {
        [self.s.re, self.s.im, self.i.re, self.i.im, self.phase]
    }

    pub(crate) fn from_array(y: &[f64; 5]) -> Self {
        Self { s: Complex64::new(y[0], y[1]), i: Complex64::new(y[2], y[3]), phase: y[4] }
    }
}

/// How the asymptotic transition probability is read out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Start in, and project onto, the first-order dressed (superadiabatic)
    /// levels. Removes the slowly decaying `|coupling/detuning|` admixture that
    /// otherwise makes the late-time `|I|^2` depend on the window.
    #[default]
    Dressed,
    /// Start at `(S, I) = (1, 0)` and average the raw `|I|^2`.
    Bare,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Dressed => "dressed",
            Estimator::Bare => "bare",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dressed" => Ok(Estimator::Dressed),
            "bare" => Ok(Estimator::Bare),
            other => Err(Error::InvalidConfig(format!("unknown estimator '{other}' (expected dressed or bare)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Total window length; the run covers `[-tau0/2, tau0/2]`. `None` picks
    /// the window automatically from the pulse.
    pub tau0: Option<f64>,
    /// Trajectory sampling interval for [`integrate`]; `None` keeps only the
    /// endpoints and the averaging times.
    pub output_step: Option<f64>,
    pub estimator: Estimator,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            initial_step: 1e-3,
            max_step: 0.5,
            tau0: None,
            output_step: Some(0.1),
            estimator: Estimator::Dressed,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.step_control().validate()?;
        if let Some(t) = self.tau0 {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("tau0 must be positive, got {t}")));
            }
        }
        if let Some(dt) = self.output_step {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!("output_step must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    pub(crate) fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            min_step: MIN_STEP,
        }
    }

    /// Half-width of the integration window for `params`.
    pub fn half_window(&self, params: &PulseParams) -> Result<f64> {
        match self.tau0 {
            Some(t) => Ok(0.5 * t),
            None => automatic_half_window(params),
        }
    }
}

pub const MIN_STEP: f64 = 1e-12;
pub const MIN_HALF_WINDOW: f64 = 40.0;
pub const MAX_HALF_WINDOW: f64 = 1e5;
/// Largest `|coupling/detuning|` tolerated at either end of the window.
pub const EDGE_RATIO: f64 = 1.0 / 64.0;
/// Number of late-time samples averaged for the asymptotic probability.
pub const AVERAGING_SAMPLES: usize = 10;
/// Fraction of the full window, at its end, over which samples are spread.
pub const AVERAGING_FRACTION: f64 = 0.15;

/// Automatic half-window: at least 40, at least 2.5x the outermost crossing,
/// then widened until the pulse is adiabatic at both ends.
pub fn automatic_half_window(params: &PulseParams) -> Result<f64> {
    params.validate()?;
    let crossings = predict_crossings(params);
    let mut half = MIN_HALF_WINDOW.max(2.5 * crossings.max_abs());
    while adiabaticity_ratio(half, params).max(adiabaticity_ratio(-half, params)) > EDGE_RATIO {
        half *= 1.25;
        if half > MAX_HALF_WINDOW {
            return Err(Error::WindowTooLarge { required: half, limit: MAX_HALF_WINDOW });
        }
    }
    Ok(half)
}

/// Sample times for the asymptotic average: evenly spaced in the final 15% of
/// `[-half, half]`, ending on `half`.
pub fn averaging_times(half: f64) -> [f64; AVERAGING_SAMPLES] {
    let span = AVERAGING_FRACTION * 2.0 * half;
    let start = half - span;
    let mut out = [0.0; AVERAGING_SAMPLES];
    for (k, t) in out.iter_mut().enumerate() {
        *t = start + span * (k + 1) as f64 / AVERAGING_SAMPLES as f64;
    }
    out[AVERAGING_SAMPLES - 1] = half;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub s: Complex64,
    pub i: Complex64,
    /// `|I|^2`.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: PulseParams,
    pub samples: Vec<Sample>,
    pub steps_taken: u64,
    pub rejected_steps: u64,
    /// Largest `| |S|^2 + |I|^2 - 1 |` over accepted steps.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn final_sample(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Result of an asymptotic-probability run, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub probability: f64,
    pub half_window: f64,
    pub estimator: Estimator,
    /// Per-sample estimates that were averaged.
    pub samples: Vec<(f64, f64)>,
    pub steps_taken: u64,
    pub rejected_steps: u64,
    pub max_norm_drift: f64,
}

impl AsymptoticReport {
    /// Spread of the averaged samples.
    pub fn oscillation_band(&self) -> f64 {
        let (lo, hi) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, p)| (lo.min(*p), hi.max(*p)));
        hi - lo
    }
}

/// Sorted, de-duplicated union of the output grid, the averaging times and the
/// window endpoint.
pub(crate) fn sample_grid(half: f64, output_step: Option<f64>) -> Vec<f64> {
    let mut grid = vec![-half];
    if let Some(dt) = output_step {
        let count = ((2.0 * half) / dt).floor() as u64;
        grid.extend((1..=count).map(|k| -half + k as f64 * dt));
    }
    grid.extend(averaging_times(half));
    grid.push(half);
    grid.sort_by(|a, b| a.total_cmp(b));
    let tol = 1e-9 * half.max(1.0);
    grid.dedup_by(|b, a| (*b - *a).abs() <= tol);
    grid.retain(|t| *t <= half);
    if let Some(last) = grid.last_mut() {
        *last = half;
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaging_window() {
        let t = averaging_times(40.0);
        assert!((t[0] - 29.2).abs() < 1e-12);
        assert_eq!(t[9], 40.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn automatic_window_rule() {
        let w = |l, e, n| automatic_half_window(&PulseParams::new(l, e, n).unwrap()).unwrap();
        assert_eq!(w(5.0, 0.0, 3), 40.0);
        assert_eq!(w(5.0, 0.02, 3), 125.0);
        assert!((w(5.0, 4.6e-4, 4) - 2.5 * 46.625_240_412_015_69).abs() < 1e-9);
        assert_eq!(w(0.5, 6.45e-3, 4), 40.0);
        // an effective sweep rate near zero needs a much longer run
        assert!(w(10.0, 0.85, 2) > 150.0);
        let quench = automatic_half_window(&PulseParams::new(10.0, 1.0, 2).unwrap());
        assert!(matches!(quench, Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn grid_is_strictly_increasing() {
        let g = sample_grid(40.0, Some(0.1));
        assert_eq!(g[0], -40.0);
        assert_eq!(*g.last().unwrap(), 40.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(sample_grid(40.0, None).len(), 11);
    }

    #[test]
    fn estimator_parsing() {
        assert_eq!("Dressed".parse::<Estimator>().unwrap(), Estimator::Dressed);
        assert_eq!("bare".parse::<Estimator>().unwrap(), Estimator::Bare);
        assert!("raw".parse::<Estimator>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig { tau0: Some(-1.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { max_step: 1e-4, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
