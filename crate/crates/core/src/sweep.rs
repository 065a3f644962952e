//! Twist-strength sweeps and one-dimensional quench/pump searches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossings::predict_crossings;
use crate::dynamics::{asymptotic_report, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::PulseParams;

/// Fault-tolerance reference fidelity; reported as a flag, never enforced.
pub const FAULT_TOLERANT_FIDELITY: f64 = 0.9999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaGrid {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl EtaGrid {
    /// Grid values in ascending order. Linspace points are computed as
    /// `start + (stop - start) * i / (count - 1)` so interior round values
    /// such as 1.0 land exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut v = match self {
            EtaGrid::List(v) => v.clone(),
            EtaGrid::Linspace { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                c => (0..c).map(|i| start + (stop - start) * i as f64 / (c - 1) as f64).collect(),
            },
        };
        if v.is_empty() {
            return Err(Error::InvalidConfig("eta grid is empty".into()));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta grid contains {bad}")));
        }
        v.sort_by(|a, b| a.total_cmp(b));
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda: f64,
    pub n: u32,
    pub eta_grid: EtaGrid,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub probability: Option<f64>,
    pub fidelity: Option<f64>,
    /// `fidelity >= FAULT_TOLERANT_FIDELITY`.
    pub fault_tolerant: Option<bool>,
    pub crossings: Vec<f64>,
    pub half_window: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub engine_version: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Row with the smallest successfully computed probability.
    pub fn minimum(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.probability.is_some())
            .min_by(|a, b| a.probability.unwrap().total_cmp(&b.probability.unwrap()))
    }
}

fn evaluate_row(lambda: f64, n: u32, eta: f64, config: &IntegratorConfig) -> SweepRow {
    let mut row = SweepRow {
        eta,
        probability: None,
        fidelity: None,
        fault_tolerant: None,
        crossings: Vec::new(),
        half_window: None,
        error: None,
    };
    let params = match PulseParams::new(lambda, eta, n) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.crossings = predict_crossings(&params).locations;
    match asymptotic_report(&params, config) {
        Ok(r) => {
            let fidelity = 1.0 - r.probability;
            row.probability = Some(r.probability);
            row.fidelity = Some(fidelity);
            row.fault_tolerant = Some(fidelity >= FAULT_TOLERANT_FIDELITY);
            row.half_window = Some(r.half_window);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn check_spec(spec: &SweepSpec) -> Result<Vec<f64>> {
    PulseParams::new(spec.lambda, 0.0, spec.n)?;
    spec.integrator.validate()?;
    spec.eta_grid.values()
}

/// Evaluate every grid point on the global rayon pool. Rows come back in grid
/// order whatever the scheduling; a failing row carries its error.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let etas = check_spec(spec)?;
    let rows = etas
        .par_iter()
        .map(|&eta| evaluate_row(spec.lambda, spec.n, eta, &spec.integrator))
        .collect();
    Ok(SweepResult { spec: spec.clone(), engine_version: crate::VERSION.to_string(), rows })
}

/// [`sweep`] on a dedicated pool of `workers` threads (0 means rayon's default).
pub fn sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    check_spec(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| sweep(spec))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchGoal {
    /// Minimise the transition probability.
    Quench,
    /// Maximise it.
    Pump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub goal: SearchGoal,
    pub lambda: f64,
    pub n: u32,
    pub eta_star: f64,
    pub p_star: f64,
    pub fidelity: f64,
    pub fault_tolerant: bool,
    /// Final golden-section interval.
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// Evaluations whose integration failed; they count as the worst value.
    pub failed_evaluations: usize,
}

/// Points in the coarse probe that precedes golden-section refinement.
pub const PROBE_POINTS: usize = 9;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

struct Search<'a> {
    lambda: f64,
    n: u32,
    goal: SearchGoal,
    config: &'a IntegratorConfig,
    evaluations: usize,
    failed: usize,
    best: Option<(f64, f64)>,
}

impl Search<'_> {
    /// Objective to minimise; failures map to +inf.
    fn score(&self, p: Option<f64>) -> f64 {
        match (p, self.goal) {
            (Some(p), SearchGoal::Quench) => p,
            (Some(p), SearchGoal::Pump) => -p,
            (None, _) => f64::INFINITY,
        }
    }

    fn probability(&self, eta: f64) -> Option<f64> {
        let params = PulseParams::new(self.lambda, eta, self.n).ok()?;
        asymptotic_report(&params, self.config).ok().map(|r| r.probability)
    }

    fn record(&mut self, eta: f64, p: Option<f64>) -> f64 {
        self.evaluations += 1;
        if p.is_none() {
            self.failed += 1;
        }
        let s = self.score(p);
        if let Some(p) = p {
            let better = match self.best {
                None => true,
                Some((_, bp)) => s < self.score(Some(bp)),
            };
            if better {
                self.best = Some((eta, p));
            }
        }
        s
    }

    fn eval(&mut self, eta: f64) -> f64 {
        let p = self.probability(eta);
        self.record(eta, p)
    }
}

/// Coarse probe over `bracket`, then golden-section refinement around the best
/// probe point until the interval is no wider than `tol_eta`. The reported
/// optimum is the best point evaluated. A monotone probe profile has no interior
/// optimum and is reported as [`Error::NoInteriorExtremum`].
pub fn optimize(
    goal: SearchGoal,
    lambda: f64,
    n: u32,
    bracket: (f64, f64),
    tol_eta: f64,
    config: &IntegratorConfig,
) -> Result<OptimumReport> {
    PulseParams::new(lambda, 0.0, n)?;
    config.validate()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParams(format!("bracket [{lo}, {hi}] is not an interval")));
    }
    if tol_eta.is_nan() || tol_eta <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol_eta}")));
    }

    let mut search = Search { lambda, n, goal, config, evaluations: 0, failed: 0, best: None };
    let xs: Vec<f64> = (0..PROBE_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (PROBE_POINTS - 1) as f64)
        .collect();
    let probes: Vec<Option<f64>> = xs.par_iter().map(|&x| search.probability(x)).collect();
    let scores: Vec<f64> = xs.iter().zip(&probes).map(|(&x, &p)| search.record(x, p)).collect();

    let kind = match goal {
        SearchGoal::Quench => "minimum",
        SearchGoal::Pump => "maximum",
    };
    let best = (0..PROBE_POINTS)
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .filter(|&i| scores[i].is_finite())
        .ok_or(Error::NoInteriorExtremum(kind))?;
    // an edge optimum is only trusted when the probe profile is not monotone
    let monotone = scores.windows(2).all(|w| w[0] <= w[1]) || scores.windows(2).all(|w| w[0] >= w[1]);
    if monotone && (best == 0 || best == PROBE_POINTS - 1) {
        return Err(Error::NoInteriorExtremum(kind));
    }

    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(PROBE_POINTS - 1)]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = search.eval(c);
    let mut fd = search.eval(d);
    while b - a > tol_eta {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = search.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = search.eval(d);
        }
    }

    let (eta_star, p_star) = search.best.expect("probe found a finite score");
    let fidelity = 1.0 - p_star;
    Ok(OptimumReport {
        goal,
        lambda,
        n,
        eta_star,
        p_star,
        fidelity,
        fault_tolerant: fidelity >= FAULT_TOLERANT_FIDELITY,
        bracket: (a, b),
        evaluations: search.evaluations,
        failed_evaluations: search.failed,
    })
}

pub fn find_quench(lambda: f64, n: u32, bracket: (f64, f64), tol_eta: f64, config: &IntegratorConfig) -> Result<OptimumReport> {
    optimize(SearchGoal::Quench, lambda, n, bracket, tol_eta, config)
}

pub fn find_pump(lambda: f64, n: u32, bracket: (f64, f64), tol_eta: f64, config: &IntegratorConfig) -> Result<OptimumReport> {
    optimize(SearchGoal::Pump, lambda, n, bracket, tol_eta, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::quadratic_exact;

    #[test]
    fn linspace_hits_round_values() {
        let g = EtaGrid::Linspace { start: -2.0, stop: 4.0, count: 41 }.values().unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[20], 1.0);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[40], 4.0);
        assert!(EtaGrid::List(vec![]).values().is_err());
        assert!(EtaGrid::Linspace { start: 0.0, stop: 1.0, count: 0 }.values().is_err());
        assert_eq!(EtaGrid::List(vec![0.3, -0.1]).values().unwrap(), vec![-0.1, 0.3]);
    }

    #[test]
    fn failing_rows_do_not_abort() {
        let spec = SweepSpec {
            lambda: 10.0,
            n: 2,
            eta_grid: EtaGrid::List(vec![0.0, 1.0]),
            integrator: IntegratorConfig::default(),
        };
        let r = sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].probability.is_some());
        assert!(r.rows[1].error.is_some());
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let spec = SweepSpec {
            lambda: 3.0,
            n: 2,
            eta_grid: EtaGrid::Linspace { start: -1.0, stop: 0.5, count: 4 },
            integrator: IntegratorConfig::default(),
        };
        let a = sweep_with_workers(&spec, 1).unwrap();
        let b = sweep_with_workers(&spec, 3).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            let exact = quadratic_exact(3.0, row.eta).unwrap();
            assert!((row.probability.unwrap() - exact).abs() < 5e-3);
        }
    }

    #[test]
    fn monotone_bracket_is_rejected() {
        let cfg = IntegratorConfig::default();
        let err = find_quench(3.0, 2, (-1.0, -0.5), 1e-3, &cfg).unwrap_err();
        assert_eq!(err, Error::NoInteriorExtremum("minimum"));
        assert!(find_quench(3.0, 2, (0.5, -0.5), 1e-3, &cfg).is_err());
        assert!(find_quench(3.0, 2, (-0.5, 0.5), 0.0, &cfg).is_err());
    }

    #[test]
    fn pump_in_an_oscillating_bracket() {
        let r = find_pump(0.5, 3, (0.02, 0.06), 1e-5, &IntegratorConfig::default()).unwrap();
        assert!(r.p_star >= 0.99, "{r:?}");
        assert!((0.02..=0.06).contains(&r.eta_star));
    }

    #[test]
    fn cubic_quench_location() {
        let cfg = IntegratorConfig::default();
        let r = find_quench(5.0, 3, (0.040, 0.052), 1e-5, &cfg).unwrap();
        assert!((r.eta_star - 4.577e-2).abs() < 1e-3, "{r:?}");
        assert!(r.bracket.1 - r.bracket.0 <= 1e-5);
        let again = crate::dynamics::asymptotic_probability(&PulseParams::new(5.0, r.eta_star, 3).unwrap(), &cfg).unwrap();
        assert_eq!(again, r.p_star);
    }
}
