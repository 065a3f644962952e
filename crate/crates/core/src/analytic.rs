//! Closed-form transition probabilities.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")))
    }
}

/// Landau-Zener probability `exp(-pi/lambda)` for an untwisted sweep.
pub fn landau_zener(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((-PI / lambda).exp())
}

/// Exact probability for quadratic twist, `exp(-pi / (lambda |1 - eta2|))`.
/// The twist cancels the sweep entirely at `eta2 = 1`, where this is 0.
pub fn quadratic_exact(lambda: f64, eta2: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let detune = (1.0 - eta2).abs();
    if detune == 0.0 {
        return Ok(0.0);
    }
    Ok((-PI / (lambda * detune)).exp())
}

/// Geometric exponent `-pi eta2 / lambda`; in the adiabatic limit the quadratic
/// result is `landau_zener * exp(geometric_exponent)` to first order in `eta2`.
pub fn geometric_exponent(lambda: f64, eta2: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(-PI * eta2 / lambda)
}
