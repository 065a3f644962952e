//! C ABI over the `twisted-passage` library.
//!
//! Every fallible function returns a [`TpStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`tp_last_error_message`]. Handles are opaque and must be released with their
//! matching `_free` function. Panics never cross the boundary; they surface as
//! `TP_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access their type implies:
//! handles must come from this library and not be freed yet, out-pointers must
//! be writable, and buffers must hold the stated number of elements. Null
//! handles and out-pointers are reported as `TP_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twisted_passage::analytic::{landau_zener, quadratic_exact};
use twisted_passage::bridge::{cnot_level_structure, from_dimensionless, to_dimensionless, ExperimentParams};
use twisted_passage::dynamics::{asymptotic_report, integrate, lab_frame_report, AsymptoticReport, Estimator, IntegratorConfig};
use twisted_passage::sweep::{optimize, OptimumReport, SearchGoal};
use twisted_passage::{predict_crossings, Error, PulseParams, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    InvalidConfig = 3,
    StepUnderflow = 4,
    WindowTooLarge = 5,
    SingleCrossing = 6,
    NoInteriorExtremum = 7,
    UnsupportedOrder = 8,
    SweepWindowTooNarrow = 9,
    OrderingViolation = 10,
    /// Output buffer too small; the required length was written back.
    BufferTooSmall = 11,
    IndexOutOfRange = 12,
    Panic = 99,
}

impl From<&Error> for TpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParams(_) => TpStatus::InvalidParams,
            Error::InvalidConfig(_) => TpStatus::InvalidConfig,
            Error::StepUnderflow { .. } => TpStatus::StepUnderflow,
            Error::WindowTooLarge { .. } => TpStatus::WindowTooLarge,
            Error::SingleCrossing => TpStatus::SingleCrossing,
            Error::NoInteriorExtremum(_) => TpStatus::NoInteriorExtremum,
            Error::UnsupportedOrder(_) => TpStatus::UnsupportedOrder,
            Error::SweepWindowTooNarrow(_) => TpStatus::SweepWindowTooNarrow,
            Error::OrderingViolation(_) => TpStatus::OrderingViolation,
        }
    }
}

struct Failure(TpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(TpStatus::from(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TpStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(TpStatus::NullPointer, format!("{name} is null"))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message for the most recent failure on this thread, or null after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque pulse description.
pub struct TpPulse {
    params: PulseParams,
}

/// Opaque sampled trajectory.
pub struct TpTrajectory {
    inner: Trajectory,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpEstimator {
    Dressed = 0,
    Bare = 1,
}

/// Integrator settings. `tau0 <= 0` picks the window from the pulse;
/// `output_step <= 0` keeps only the endpoints and averaging samples.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TpIntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub tau0: f64,
    pub output_step: f64,
    pub estimator: TpEstimator,
}

impl From<IntegratorConfig> for TpIntegratorConfig {
    fn from(c: IntegratorConfig) -> Self {
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            initial_step: c.initial_step,
            max_step: c.max_step,
            tau0: c.tau0.unwrap_or(0.0),
            output_step: c.output_step.unwrap_or(0.0),
            estimator: match c.estimator {
                Estimator::Dressed => TpEstimator::Dressed,
                Estimator::Bare => TpEstimator::Bare,
            },
        }
    }
}

impl From<&TpIntegratorConfig> for IntegratorConfig {
    fn from(c: &TpIntegratorConfig) -> Self {
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            initial_step: c.initial_step,
            max_step: c.max_step,
            tau0: (c.tau0 > 0.0).then_some(c.tau0),
            output_step: (c.output_step > 0.0).then_some(c.output_step),
            estimator: match c.estimator {
                TpEstimator::Dressed => Estimator::Dressed,
                TpEstimator::Bare => Estimator::Bare,
            },
        }
    }
}

/// Null selects the defaults.
unsafe fn config(p: *const TpIntegratorConfig) -> IntegratorConfig {
    p.as_ref().map(IntegratorConfig::from).unwrap_or_default()
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TpReport {
    pub probability: f64,
    pub half_window: f64,
    /// Spread of the averaged samples.
    pub oscillation_band: f64,
    pub steps_taken: u64,
    pub rejected_steps: u64,
    pub max_norm_drift: f64,
}

impl From<&AsymptoticReport> for TpReport {
    fn from(r: &AsymptoticReport) -> Self {
        Self {
            probability: r.probability,
            half_window: r.half_window,
            oscillation_band: r.oscillation_band(),
            steps_taken: r.steps_taken,
            rejected_steps: r.rejected_steps,
            max_norm_drift: r.max_norm_drift,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TpSample {
    pub tau: f64,
    pub re_s: f64,
    pub im_s: f64,
    pub re_i: f64,
    pub im_i: f64,
    pub p: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TpExperimentParams {
    /// Sweep amplitude `A`.
    pub sweep_amplitude: f64,
    /// Twist strength `B_exp`.
    pub twist_strength: f64,
    pub omega1: f64,
    /// Pulse duration `T`.
    pub duration: f64,
    pub n: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TpCnotLevels {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TpOptimum {
    pub eta_star: f64,
    pub p_star: f64,
    pub fidelity: f64,
    pub fault_tolerant: bool,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub evaluations: usize,
    pub failed_evaluations: usize,
}

impl From<&OptimumReport> for TpOptimum {
    fn from(r: &OptimumReport) -> Self {
        Self {
            eta_star: r.eta_star,
            p_star: r.p_star,
            fidelity: r.fidelity,
            fault_tolerant: r.fault_tolerant,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            evaluations: r.evaluations,
            failed_evaluations: r.failed_evaluations,
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn tp_integrator_config_default(out_config: *mut TpIntegratorConfig) -> TpStatus {
    guard(|| {
        *out(out_config, "out_config")? = IntegratorConfig::default().into();
        Ok(())
    })
}

/// Create a pulse. Release with [`tp_pulse_free`].
#[no_mangle]
pub unsafe extern "C" fn tp_pulse_new(lambda: f64, eta: f64, n: u32, out_pulse: *mut *mut TpPulse) -> TpStatus {
    guard(|| {
        let slot = out(out_pulse, "out_pulse")?;
        *slot = ptr::null_mut();
        let params = PulseParams::new(lambda, eta, n)?;
        *slot = Box::into_raw(Box::new(TpPulse { params }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tp_pulse_free(pulse: *mut TpPulse) {
    if !pulse.is_null() {
        drop(Box::from_raw(pulse));
    }
}

/// Asymptotic transition probability with diagnostics. `config` may be null.
#[no_mangle]
pub unsafe extern "C" fn tp_asymptotic_report(
    pulse: *const TpPulse,
    config: *const TpIntegratorConfig,
    out_report: *mut TpReport,
) -> TpStatus {
    guard(|| {
        let pulse = input(pulse, "pulse")?;
        let slot = out(out_report, "out_report")?;
        *slot = TpReport::from(&asymptotic_report(&pulse.params, &self::config(config))?);
        Ok(())
    })
}

/// Same quantity from the independent lab-frame spinor integration.
#[no_mangle]
pub unsafe extern "C" fn tp_lab_frame_report(
    pulse: *const TpPulse,
    config: *const TpIntegratorConfig,
    out_report: *mut TpReport,
) -> TpStatus {
    guard(|| {
        let pulse = input(pulse, "pulse")?;
        let slot = out(out_report, "out_report")?;
        *slot = TpReport::from(&lab_frame_report(&pulse.params, &self::config(config))?);
        Ok(())
    })
}

/// Integrate and keep the sampled trajectory. Release with [`tp_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn tp_integrate(
    pulse: *const TpPulse,
    config: *const TpIntegratorConfig,
    out_trajectory: *mut *mut TpTrajectory,
) -> TpStatus {
    guard(|| {
        let pulse = input(pulse, "pulse")?;
        let slot = out(out_trajectory, "out_trajectory")?;
        *slot = ptr::null_mut();
        let inner = integrate(&pulse.params, &self::config(config))?;
        *slot = Box::into_raw(Box::new(TpTrajectory { inner }));
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tp_trajectory_len(trajectory: *const TpTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.samples.len())
}

#[no_mangle]
pub unsafe extern "C" fn tp_trajectory_max_norm_drift(trajectory: *const TpTrajectory) -> f64 {
    trajectory.as_ref().map_or(f64::NAN, |t| t.inner.max_norm_drift)
}

#[no_mangle]
pub unsafe extern "C" fn tp_trajectory_sample(
    trajectory: *const TpTrajectory,
    index: usize,
    out_sample: *mut TpSample,
) -> TpStatus {
    guard(|| {
        let t = input(trajectory, "trajectory")?;
        let slot = out(out_sample, "out_sample")?;
        let s = t.inner.samples.get(index).ok_or_else(|| {
            Failure(TpStatus::IndexOutOfRange, format!("sample {index} of {}", t.inner.samples.len()))
        })?;
        *slot = TpSample { tau: s.tau, re_s: s.s.re, im_s: s.s.im, re_i: s.i.re, im_i: s.i.im, p: s.p };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tp_trajectory_free(trajectory: *mut TpTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Predicted avoided-crossing times in ascending order. `*inout_len` holds the
/// buffer capacity on entry and the number of crossings on return; when the
/// buffer is too small nothing is copied and `TP_STATUS_BUFFER_TOO_SMALL` is
/// returned. `out_crossings` may be null when the capacity is 0.
#[no_mangle]
pub unsafe extern "C" fn tp_crossings(pulse: *const TpPulse, out_crossings: *mut f64, inout_len: *mut usize) -> TpStatus {
    guard(|| {
        let pulse = input(pulse, "pulse")?;
        let len = out(inout_len, "inout_len")?;
        let locations = predict_crossings(&pulse.params).locations;
        let capacity = *len;
        *len = locations.len();
        if capacity < locations.len() {
            return Err(Failure(
                TpStatus::BufferTooSmall,
                format!("{} crossings, buffer holds {capacity}", locations.len()),
            ));
        }
        if !locations.is_empty() {
            if out_crossings.is_null() {
                return Err(null("out_crossings"));
            }
            ptr::copy_nonoverlapping(locations.as_ptr(), out_crossings, locations.len());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tp_landau_zener(lambda: f64, out_probability: *mut f64) -> TpStatus {
    guard(|| {
        *out(out_probability, "out_probability")? = landau_zener(lambda)?;
        Ok(())
    })
}

/// Exact transition probability for quadratic twist.
#[no_mangle]
pub unsafe extern "C" fn tp_quadratic_exact(lambda: f64, eta2: f64, out_probability: *mut f64) -> TpStatus {
    guard(|| {
        *out(out_probability, "out_probability")? = quadratic_exact(lambda, eta2)?;
        Ok(())
    })
}

unsafe fn search(
    goal: SearchGoal,
    lambda: f64,
    n: u32,
    bracket: (f64, f64),
    tol_eta: f64,
    config: *const TpIntegratorConfig,
    out_optimum: *mut TpOptimum,
) -> TpStatus {
    guard(|| {
        let slot = out(out_optimum, "out_optimum")?;
        *slot = TpOptimum::from(&optimize(goal, lambda, n, bracket, tol_eta, &self::config(config))?);
        Ok(())
    })
}

/// Twist strength in `[lo, hi]` minimising the transition probability.
#[no_mangle]
pub unsafe extern "C" fn tp_find_quench(
    lambda: f64,
    n: u32,
    lo: f64,
    hi: f64,
    tol_eta: f64,
    config: *const TpIntegratorConfig,
    out_optimum: *mut TpOptimum,
) -> TpStatus {
    search(SearchGoal::Quench, lambda, n, (lo, hi), tol_eta, config, out_optimum)
}

/// Twist strength in `[lo, hi]` maximising the transition probability.
#[no_mangle]
pub unsafe extern "C" fn tp_find_pump(
    lambda: f64,
    n: u32,
    lo: f64,
    hi: f64,
    tol_eta: f64,
    config: *const TpIntegratorConfig,
    out_optimum: *mut TpOptimum,
) -> TpStatus {
    search(SearchGoal::Pump, lambda, n, (lo, hi), tol_eta, config, out_optimum)
}

/// Spectrometer parameters for `pulse` at Rabi frequency `omega1` and sweep ratio `f`.
#[no_mangle]
pub unsafe extern "C" fn tp_to_experiment(
    pulse: *const TpPulse,
    omega1: f64,
    f: f64,
    out_params: *mut TpExperimentParams,
) -> TpStatus {
    guard(|| {
        let pulse = input(pulse, "pulse")?;
        let slot = out(out_params, "out_params")?;
        let e = from_dimensionless(&pulse.params, omega1, f)?;
        *slot = TpExperimentParams {
            sweep_amplitude: e.sweep_amplitude,
            twist_strength: e.twist_strength,
            omega1: e.omega1,
            duration: e.duration,
            n: e.n,
        };
        Ok(())
    })
}

/// Dimensionless pulse for spectrometer parameters. Release with [`tp_pulse_free`].
#[no_mangle]
pub unsafe extern "C" fn tp_from_experiment(params: *const TpExperimentParams, out_pulse: *mut *mut TpPulse) -> TpStatus {
    guard(|| {
        let p = input(params, "params")?;
        let slot = out(out_pulse, "out_pulse")?;
        *slot = ptr::null_mut();
        let exp = ExperimentParams {
            sweep_amplitude: p.sweep_amplitude,
            twist_strength: p.twist_strength,
            omega1: p.omega1,
            duration: p.duration,
            n: p.n,
        };
        let params = to_dimensionless(&exp)?;
        *slot = Box::into_raw(Box::new(TpPulse { params }));
        Ok(())
    })
}

/// Reads back the parameters of a pulse handle.
#[no_mangle]
pub unsafe extern "C" fn tp_pulse_params(
    pulse: *const TpPulse,
    out_lambda: *mut f64,
    out_eta: *mut f64,
    out_n: *mut u32,
) -> TpStatus {
    guard(|| {
        let p = input(pulse, "pulse")?.params;
        *out(out_lambda, "out_lambda")? = p.lambda;
        *out(out_eta, "out_eta")? = p.eta;
        *out(out_n, "out_n")? = p.n;
        Ok(())
    })
}

/// Two-qubit levels for a CNOT built from a single rapid passage.
#[no_mangle]
pub unsafe extern "C" fn tp_cnot_levels(omega_c: f64, omega_t: f64, j: f64, out_levels: *mut TpCnotLevels) -> TpStatus {
    guard(|| {
        let slot = out(out_levels, "out_levels")?;
        let l = cnot_level_structure(omega_c, omega_t, j)?;
        *slot = TpCnotLevels {
            e00: l.levels.e00,
            e01: l.levels.e01,
            e10: l.levels.e10,
            e11: l.levels.e11,
            omega_plus: l.omega_plus,
            omega_minus: l.omega_minus,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_distinct_codes() {
        let cases = [
            Error::InvalidParams(String::new()),
            Error::InvalidConfig(String::new()),
            Error::StepUnderflow { tau: 0.0, step: 0.0, min_step: 0.0 },
            Error::WindowTooLarge { required: 0.0, limit: 0.0 },
            Error::SingleCrossing,
            Error::NoInteriorExtremum("minimum"),
            Error::UnsupportedOrder(5),
            Error::SweepWindowTooNarrow(0.3),
            Error::OrderingViolation(String::new()),
        ];
        let mut codes: Vec<i32> = cases.iter().map(|e| TpStatus::from(e) as i32).collect();
        codes.dedup();
        assert_eq!(codes.len(), cases.len());
        assert!(!codes.contains(&0));
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), TpStatus::Panic);
        let msg = unsafe { std::ffi::CStr::from_ptr(tp_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
        assert_eq!(guard(|| Ok(())), TpStatus::Ok);
        assert!(tp_last_error_message().is_null());
    }

    #[test]
    fn config_round_trip() {
        let mut c = std::mem::MaybeUninit::<TpIntegratorConfig>::uninit();
        assert_eq!(unsafe { tp_integrator_config_default(c.as_mut_ptr()) }, TpStatus::Ok);
        let c = unsafe { c.assume_init() };
        assert_eq!(IntegratorConfig::from(&c), IntegratorConfig::default());
    }
}
