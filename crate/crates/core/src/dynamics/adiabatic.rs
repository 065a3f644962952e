use num_complex::Complex64;

use super::{averaging_times, sample_grid, AmplitudeState, AsymptoticReport, Estimator, IntegratorConfig, Sample, Trajectory};
use crate::error::Result;
use crate::model::{coupling, detuning, PulseParams};
use crate::rk4::{AdaptiveRk4, OdeSystem};

/// `(dS/dtau, dI/dtau, dPhase/dtau)` for the adiabatic-representation equations.
pub fn rhs(tau: f64, state: &AmplitudeState, params: &PulseParams) -> AmplitudeState {
    let g = coupling(tau, params);
    let rot = Complex64::cis(state.phase);
    AmplitudeState {
        s: -g.conj() * rot.conj() * state.i,
        i: g * rot * state.s,
        phase: detuning(tau, params),
    }
}

pub struct AdiabaticSystem {
    pub params: PulseParams,
}

impl OdeSystem<5> for AdiabaticSystem {
    fn derivative(&self, t: f64, y: &[f64; 5]) -> [f64; 5] {
        rhs(t, &AmplitudeState::from_array(y), &self.params).to_array()
    }

    fn error_scale(&self, i: usize, old: &[f64; 5], new: &[f64; 5], rel_tol: f64, abs_tol: f64) -> f64 {
        if i == 4 {
            // the phase only enters through exp(i phase): hold it to rel_tol radians
            abs_tol + rel_tol
        } else {
            abs_tol + rel_tol * old[i].abs().max(new[i].abs())
        }
    }
}

/// First-order admixture `coupling / (i detuning)` of the upper level in the
/// dressed lower level.
fn dressing(tau: f64, params: &PulseParams) -> Complex64 {
    coupling(tau, params) / Complex64::new(0.0, detuning(tau, params))
}

fn dressed_start(tau: f64, params: &PulseParams) -> AmplitudeState {
    let eps = dressing(tau, params);
    let norm = (1.0 + eps.norm_sqr()).sqrt();
    AmplitudeState { s: Complex64::new(1.0 / norm, 0.0), i: eps / norm, phase: 0.0 }
}

/// Population of the dressed upper level.
fn dressed_upper(tau: f64, state: &AmplitudeState, params: &PulseParams) -> f64 {
    let eps = dressing(tau, params);
    let amp = state.i - eps * Complex64::cis(state.phase) * state.s;
    amp.norm_sqr() / (1.0 + eps.norm_sqr())
}

struct Run {
    steps: u64,
    rejected: u64,
    max_drift: f64,
}

fn run<F>(params: &PulseParams, config: &IntegratorConfig, start: AmplitudeState, half: f64, times: &[f64], mut visit: F) -> Result<Run>
where
    F: FnMut(f64, &AmplitudeState),
{
    let system = AdiabaticSystem { params: *params };
    let mut rk = AdaptiveRk4::new(config.step_control(), -half, start.to_array())?;
    let norm0 = start.norm_sqr();
    let mut max_drift = 0.0_f64;
    for &t in times {
        rk.advance_to_with(&system, t, |_, y| {
            let drift = (AmplitudeState::from_array(y).norm_sqr() - norm0).abs();
            max_drift = max_drift.max(drift);
        })?;
        visit(t, &AmplitudeState::from_array(rk.state()));
    }
    let stats = rk.stats();
    Ok(Run { steps: stats.accepted, rejected: stats.rejected, max_drift })
}

/// Integrate from `(S, I, phase) = (1, 0, 0)` at the left edge of the window to
/// the right edge, sampling `|I|^2` on the configured grid.
pub fn integrate(params: &PulseParams, config: &IntegratorConfig) -> Result<Trajectory> {
    params.validate()?;
    config.validate()?;
    let half = config.half_window(params)?;
    let grid = sample_grid(half, config.output_step);
    let mut samples = Vec::with_capacity(grid.len());
    samples.push(Sample { tau: -half, s: Complex64::new(1.0, 0.0), i: Complex64::new(0.0, 0.0), p: 0.0 });
    let stats = run(params, config, AmplitudeState::ground(), half, &grid[1..], |tau, st| {
        samples.push(Sample { tau, s: st.s, i: st.i, p: st.upper_population().min(1.0) });
    })?;
    Ok(Trajectory {
        params: *params,
        samples,
        steps_taken: stats.steps,
        rejected_steps: stats.rejected,
        max_norm_drift: stats.max_drift,
    })
}

/// Asymptotic transition probability with run diagnostics.
pub fn asymptotic_report(params: &PulseParams, config: &IntegratorConfig) -> Result<AsymptoticReport> {
    params.validate()?;
    config.validate()?;
    let half = config.half_window(params)?;
    let times = averaging_times(half);
    let start = match config.estimator {
        Estimator::Dressed => dressed_start(-half, params),
        Estimator::Bare => AmplitudeState::ground(),
    };
    let mut samples = Vec::with_capacity(times.len());
    let stats = run(params, config, start, half, &times, |tau, st| {
        let p = match config.estimator {
            Estimator::Dressed => dressed_upper(tau, st, params),
            Estimator::Bare => st.upper_population(),
        };
        samples.push((tau, p));
    })?;
    let mean = samples.iter().map(|(_, p)| p).sum::<f64>() / samples.len() as f64;
    Ok(AsymptoticReport {
        probability: mean.clamp(0.0, 1.0),
        half_window: half,
        estimator: config.estimator,
        samples,
        steps_taken: stats.steps,
        rejected_steps: stats.rejected,
        max_norm_drift: stats.max_drift,
    })
}

/// Mean late-time upper-level population, see [`asymptotic_report`].
pub fn asymptotic_probability(params: &PulseParams, config: &IntegratorConfig) -> Result<f64> {
    asymptotic_report(params, config).map(|r| r.probability)
}
