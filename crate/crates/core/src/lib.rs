//! Twisted rapid passage of a two-level system.
//!
//! The model works in dimensionless units (`hbar = b = 1`, `tau = (a/b) t`); a
//! pulse is fully described by [`PulseParams`]. See [`dynamics`] for the
//! integrators and [`bridge`] for spectrometer conventions.

pub mod analytic;
pub mod bridge;
pub mod crossings;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod plot;
pub mod rk4;
pub mod sweep;
pub mod validate;

pub use crossings::{crossing_separation, predict_crossings, CrossingSet};
pub use dynamics::{
    asymptotic_probability, integrate, lab_frame_oracle, AmplitudeState, Estimator, IntegratorConfig, Trajectory,
};
pub use error::{Error, Result};
pub use model::{LabFieldParams, PulseParams};
pub use sweep::{find_pump, find_quench, sweep, EtaGrid, OptimumReport, SweepResult, SweepSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
