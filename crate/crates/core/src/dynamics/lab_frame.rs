//! Direct integration of the Schrodinger equation in the fixed spinor basis.
//!
//! Nothing here uses the closed-form coupling or detuning: the instantaneous
//! eigenvectors come from diagonalising the 2x2 Hamiltonian numerically, and
//! the coupling and geometric-phase rates are finite differences of them.

use num_complex::Complex64;

use super::{averaging_times, AsymptoticReport, Estimator, IntegratorConfig};
use crate::error::Result;
use crate::model::{twist_angle, PulseParams};
use crate::rk4::{AdaptiveRk4, OdeSystem};

type Spinor = [Complex64; 2];
type Matrix = [[Complex64; 2]; 2];

/// Lab Hamiltonian in units of `b`: `[[tau, e^{-i phi}], [e^{i phi}, -tau]]`.
fn hamiltonian(tau: f64, params: &PulseParams) -> Matrix {
    let phi = twist_angle(tau, params);
    let off = Complex64::cis(phi);
    [[Complex64::new(tau, 0.0), off.conj()], [off, Complex64::new(-tau, 0.0)]]
}

pub struct LabFrameSystem {
    pub params: PulseParams,
}

impl OdeSystem<4> for LabFrameSystem {
    fn derivative(&self, t: f64, y: &[f64; 4]) -> [f64; 4] {
        let h = hamiltonian(t, &self.params);
        let psi = [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])];
        let k = Complex64::new(0.0, -1.0 / self.params.lambda);
        let d0 = k * (h[0][0] * psi[0] + h[0][1] * psi[1]);
        let d1 = k * (h[1][0] * psi[0] + h[1][1] * psi[1]);
        [d0.re, d0.im, d1.re, d1.im]
    }
}

fn normalise(v: Spinor) -> Spinor {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    // fix the gauge: first component real and non-negative
    let gauge = if v[0].norm() > 0.0 { v[0].conj() / v[0].norm() } else { Complex64::new(1.0, 0.0) };
    [v[0] * gauge / n, v[1] * gauge / n]
}

/// Eigenvector of a Hermitian 2x2 matrix for eigenvalue `e`, picking the
/// better-conditioned row of `(H - e) v = 0`.
fn eigenvector(h: &Matrix, e: f64) -> Spinor {
    let a = h[0][0] - e;
    let d = h[1][1] - e;
    let from_row0 = [h[0][1], -a];
    let from_row1 = [-d, h[1][0]];
    let n0 = from_row0[0].norm_sqr() + from_row0[1].norm_sqr();
    let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
    normalise(if n0 >= n1 { from_row0 } else { from_row1 })
}

/// `(e_plus, e_minus, v_plus, v_minus)`.
fn eigensystem(tau: f64, params: &PulseParams) -> (f64, f64, Spinor, Spinor) {
    let h = hamiltonian(tau, params);
    let mean = 0.5 * (h[0][0].re + h[1][1].re);
    let half_diff = 0.5 * (h[0][0].re - h[1][1].re);
    let radius = half_diff.hypot(h[0][1].norm());
    let (ep, em) = (mean + radius, mean - radius);
    (ep, em, eigenvector(&h, ep), eigenvector(&h, em))
}

fn inner(a: &Spinor, b: &Spinor) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Coupling `<E+|d E->` and detuning, both by finite differences of the
/// numerically gauge-fixed eigenvectors.
struct LocalRates {
    coupling: Complex64,
    detuning: f64,
    v_plus: Spinor,
    v_minus: Spinor,
}

fn local_rates(tau: f64, params: &PulseParams) -> LocalRates {
    let (ep, em, vp, vm) = eigensystem(tau, params);
    // resolve the twist: the eigenvectors rotate at about the twist rate
    let probe = 1e-4;
    let phi_rate = (twist_angle(tau + probe, params) - twist_angle(tau - probe, params)) / (2.0 * probe);
    let h = 1e-3 / (2.0 + phi_rate.abs());

    let diff = |step: f64| -> (Spinor, Spinor) {
        let (_, _, p1, m1) = eigensystem(tau + step, params);
        let (_, _, p0, m0) = eigensystem(tau - step, params);
        let s = 1.0 / (2.0 * step);
        ([(p1[0] - p0[0]) * s, (p1[1] - p0[1]) * s], [(m1[0] - m0[0]) * s, (m1[1] - m0[1]) * s])
    };
    let (dp_h, dm_h) = diff(h);
    let (dp_h2, dm_h2) = diff(0.5 * h);
    let richardson = |fine: Spinor, coarse: Spinor| -> Spinor {
        [(4.0 * fine[0] - coarse[0]) / 3.0, (4.0 * fine[1] - coarse[1]) / 3.0]
    };
    let dp = richardson(dp_h2, dp_h);
    let dm = richardson(dm_h2, dm_h);

    let coupling = inner(&vp, &dm);
    let gamma_plus = (Complex64::i() * inner(&vp, &dp)).re;
    let gamma_minus = (Complex64::i() * inner(&vm, &dm)).re;
    let detuning = (ep - em) / params.lambda - (gamma_plus - gamma_minus);
    LocalRates { coupling, detuning, v_plus: vp, v_minus: vm }
}

fn spinor(y: &[f64; 4]) -> Spinor {
    [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])]
}

/// Asymptotic transition probability from the lab-frame oracle, with diagnostics.
pub fn lab_frame_report(params: &PulseParams, config: &IntegratorConfig) -> Result<AsymptoticReport> {
    params.validate()?;
    config.validate()?;
    let half = config.half_window(params)?;

    let start = local_rates(-half, params);
    let psi0 = match config.estimator {
        Estimator::Bare => start.v_minus,
        Estimator::Dressed => {
            let eps = Complex64::i() * start.coupling / start.detuning;
            let n = (1.0 + eps.norm_sqr()).sqrt();
            [
                (start.v_minus[0] + eps * start.v_plus[0]) / n,
                (start.v_minus[1] + eps * start.v_plus[1]) / n,
            ]
        }
    };
    let y0 = [psi0[0].re, psi0[0].im, psi0[1].re, psi0[1].im];
    let norm0 = psi0[0].norm_sqr() + psi0[1].norm_sqr();

    let system = LabFrameSystem { params: *params };
    let mut rk = AdaptiveRk4::new(config.step_control(), -half, y0)?;
    let mut max_drift = 0.0_f64;
    let mut samples = Vec::new();
    for t in averaging_times(half) {
        rk.advance_to_with(&system, t, |_, y| {
            let psi = spinor(y);
            max_drift = max_drift.max((psi[0].norm_sqr() + psi[1].norm_sqr() - norm0).abs());
        })?;
        let psi = spinor(rk.state());
        let rates = local_rates(t, params);
        let up = inner(&rates.v_plus, &psi);
        let p = match config.estimator {
            Estimator::Bare => up.norm_sqr(),
            Estimator::Dressed => {
                let eps = Complex64::i() * rates.coupling / rates.detuning;
                let down = inner(&rates.v_minus, &psi);
                (up - eps * down).norm_sqr() / (1.0 + eps.norm_sqr())
            }
        };
        samples.push((t, p));
    }
    let mean = samples.iter().map(|(_, p)| p).sum::<f64>() / samples.len() as f64;
    let stats = rk.stats();
    Ok(AsymptoticReport {
        probability: mean.clamp(0.0, 1.0),
        half_window: half,
        estimator: config.estimator,
        samples,
        steps_taken: stats.accepted,
        rejected_steps: stats.rejected,
        max_norm_drift: max_drift,
    })
}

pub fn lab_frame_oracle(params: &PulseParams, config: &IntegratorConfig) -> Result<f64> {
    lab_frame_report(params, config).map(|r| r.probability)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coupling, detuning, gamma_dot_pm};

    #[test]
    fn numerical_rates_match_closed_forms() {
        for (lambda, eta, n) in [(5.0, 0.05, 3), (0.5, 6.45e-3, 4), (3.0, 2.5, 2), (5.0, 0.0, 2)] {
            let params = PulseParams::new(lambda, eta, n).unwrap();
            for tau in [-30.0, -2.0, 0.3, 1.0, 17.0] {
                let r = local_rates(tau, &params);
                let g = coupling(tau, &params);
                let d = detuning(tau, &params);
                assert!((r.coupling - g).norm() < 1e-7 * (1.0 + g.norm()), "{lambda} {eta} {n} {tau}");
                assert!((r.detuning - d).abs() < 1e-6 * (1.0 + d.abs()), "{lambda} {eta} {n} {tau}");
            }
        }
    }

    #[test]
    fn eigenvectors_follow_the_gauge() {
        let params = PulseParams::new(5.0, 0.05, 3).unwrap();
        let (ep, em, vp, vm) = eigensystem(1.0, &params);
        assert!((ep - 2f64.sqrt()).abs() < 1e-14 && (em + 2f64.sqrt()).abs() < 1e-14);
        assert!(vp[0].im == 0.0 && vp[0].re >= 0.0);
        assert!(vm[0].im == 0.0 && vm[0].re >= 0.0);
        assert!(inner(&vp, &vm).norm() < 1e-14);
        let (gp, gm) = gamma_dot_pm(1.0, &params);
        let h = 1e-5;
        let (_, _, pa, ma) = eigensystem(1.0 + h, &params);
        let (_, _, pb, mb) = eigensystem(1.0 - h, &params);
        let dp = [(pa[0] - pb[0]) / (2.0 * h), (pa[1] - pb[1]) / (2.0 * h)];
        let dm = [(ma[0] - mb[0]) / (2.0 * h), (ma[1] - mb[1]) / (2.0 * h)];
        assert!(((Complex64::i() * inner(&vp, &dp)).re - gp).abs() < 1e-8);
        assert!(((Complex64::i() * inner(&vm, &dm)).re - gm).abs() < 1e-8);
    }

    #[test]
    fn lab_frame_landau_zener() {
        let params = PulseParams::new(10.0, 0.0, 2).unwrap();
        let p = lab_frame_oracle(&params, &IntegratorConfig::default()).unwrap();
        assert!((p - (-std::f64::consts::PI / 10.0).exp()).abs() < 1e-3, "{p}");
    }
}
