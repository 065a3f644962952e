//! Adaptive classical Runge-Kutta with step doubling.
//!
//! Each attempt takes one full step and two half steps; their difference
//! estimates the local error and is also used for Richardson extrapolation
//! (`y = y_half + (y_half - y_full) / 15`), giving a fifth-order update.

use crate::error::{Error, Result};

pub trait OdeSystem<const N: usize> {
    fn derivative(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Tolerance scale for component `i`. The default mixes absolute and
    /// relative tolerance on the larger of the old and new magnitudes.
    fn error_scale(&self, i: usize, old: &[f64; N], new: &[f64; N], rel_tol: f64, abs_tol: f64) -> f64 {
        abs_tol + rel_tol * old[i].abs().max(new[i].abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, initial_step: 1e-3, max_step: 1.0, min_step: 1e-12 }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !positive(self.initial_step) || !positive(self.max_step) {
            return Err(Error::InvalidConfig("step sizes must be positive".into()));
        }
        if self.max_step < self.initial_step {
            return Err(Error::InvalidConfig(format!(
                "max_step {} is smaller than initial_step {}",
                self.max_step, self.initial_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
}

const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct AdaptiveRk4<const N: usize> {
    control: StepControl,
    t: f64,
    y: [f64; N],
    h: f64,
    stats: StepStats,
}

fn axpy<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

fn rk4_step<const N: usize, S: OdeSystem<N>>(sys: &S, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> [f64; N] {
    let half = 0.5 * h;
    let k2 = sys.derivative(t + half, &axpy(y, k1, half));
    let k3 = sys.derivative(t + half, &axpy(y, &k2, half));
    let k4 = sys.derivative(t + h, &axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

impl<const N: usize> AdaptiveRk4<N> {
    pub fn new(control: StepControl, t0: f64, y0: [f64; N]) -> Result<Self> {
        control.validate()?;
        Ok(Self { control, t: t0, y: y0, h: control.initial_step, stats: StepStats::default() })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn advance_to<S: OdeSystem<N>>(&mut self, sys: &S, target: f64) -> Result<()> {
        self.advance_to_with(sys, target, |_, _| {})
    }

    /// Integrate forward to exactly `target`, calling `on_accept` after every
    /// accepted step.
    pub fn advance_to_with<S, F>(&mut self, sys: &S, target: f64, mut on_accept: F) -> Result<()>
    where
        S: OdeSystem<N>,
        F: FnMut(f64, &[f64; N]),
    {
        if target < self.t {
            return Err(Error::InvalidConfig(format!(
                "cannot integrate backwards from {} to {}",
                self.t, target
            )));
        }
        let c = self.control;
        // remainders this small are absorbed into the previous step
        let snap = 1e-12 * target.abs().max(1.0);
        while self.t < target {
            let remaining = target - self.t;
            let landing = self.h >= remaining - snap;
            let h = if landing { remaining } else { self.h };

            let k1 = sys.derivative(self.t, &self.y);
            let full = rk4_step(sys, self.t, &self.y, &k1, h);
            let mid = rk4_step(sys, self.t, &self.y, &k1, 0.5 * h);
            let k_mid = sys.derivative(self.t + 0.5 * h, &mid);
            let two = rk4_step(sys, self.t + 0.5 * h, &mid, &k_mid, 0.5 * h);

            let mut err = 0.0_f64;
            for i in 0..N {
                let scale = sys.error_scale(i, &self.y, &two, c.rel_tol, c.abs_tol);
                err = err.max((two[i] - full[i]).abs() / 15.0 / scale);
            }
            if !err.is_finite() {
                err = f64::INFINITY;
            }

            if err <= 1.0 {
                for i in 0..N {
                    self.y[i] = two[i] + (two[i] - full[i]) / 15.0;
                }
                self.t = if landing { target } else { self.t + h };
                self.stats.accepted += 1;
                on_accept(self.t, &self.y);
                let factor = if err == 0.0 { GROW_MAX } else { (SAFETY * err.powf(-0.2)).clamp(0.2, GROW_MAX) };
                // a step shortened to land on the target says little about the natural step
                if !landing || factor < 1.0 {
                    self.h = (h * factor).min(c.max_step);
                }
            } else {
                self.stats.rejected += 1;
                let factor = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(SHRINK_MIN) } else { SHRINK_MIN };
                self.h = h * factor;
                if self.h < c.min_step {
                    return Err(Error::StepUnderflow { tau: self.t, step: self.h, min_step: c.min_step });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Decay;
    impl OdeSystem<1> for Decay {
        fn derivative(&self, _t: f64, y: &[f64; 1]) -> [f64; 1] {
            [-y[0]]
        }
    }

    struct Oscillator(f64);
    impl OdeSystem<2> for Oscillator {
        fn derivative(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -self.0 * self.0 * y[0]]
        }
    }

    struct Kink;
    impl OdeSystem<1> for Kink {
        fn derivative(&self, t: f64, _y: &[f64; 1]) -> [f64; 1] {
            [if t < 1.0 { 0.0 } else { 1e8 }]
        }
    }

    #[test]
    fn exponential_decay() {
        let mut rk = AdaptiveRk4::new(StepControl::default(), 0.0, [1.0]).unwrap();
        rk.advance_to(&Decay, 5.0).unwrap();
        assert_eq!(rk.t(), 5.0);
        assert_relative_eq!(rk.state()[0], (-5.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn harmonic_oscillator_lands_on_targets() {
        let w = 3.0;
        let mut rk = AdaptiveRk4::new(StepControl::default(), 0.0, [1.0, 0.0]).unwrap();
        for k in 1..=20 {
            let t = 0.5 * k as f64;
            rk.advance_to(&Oscillator(w), t).unwrap();
            assert_eq!(rk.t(), t);
            assert!((rk.state()[0] - (w * t).cos()).abs() < 1e-8);
        }
        assert!(rk.stats().accepted > 20);
    }

    #[test]
    fn unresolvable_jump_underflows() {
        let mut rk = AdaptiveRk4::new(StepControl::default(), 0.0, [1.0]).unwrap();
        let err = rk.advance_to(&Kink, 2.0).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { tau, .. } if (tau - 1.0).abs() < 1e-3));
    }

    #[test]
    fn config_checks() {
        let bad = StepControl { initial_step: 2.0, max_step: 1.0, ..StepControl::default() };
        assert!(AdaptiveRk4::new(bad, 0.0, [0.0]).is_err());
        let bad = StepControl { rel_tol: 0.0, ..StepControl::default() };
        assert!(AdaptiveRk4::new(bad, 0.0, [0.0]).is_err());
        let mut rk = AdaptiveRk4::new(StepControl::default(), 1.0, [0.0]).unwrap();
        assert!(rk.advance_to(&Decay, 0.0).is_err());
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut rk = AdaptiveRk4::new(StepControl::default(), 0.0, [1.0, 0.0]).unwrap();
            rk.advance_to(&Oscillator(7.0), 13.0).unwrap();
            (rk.state()[0].to_bits(), rk.state()[1].to_bits(), rk.stats())
        };
        assert_eq!(run(), run());
    }
}
