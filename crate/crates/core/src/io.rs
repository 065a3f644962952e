//! File formats: CSV trajectories and sweep tables, JSON summaries.
//!
//! Floats are written with 17 significant digits so a re-read trajectory is
//! bit-identical to the one written.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{AsymptoticReport, Estimator, Sample, Trajectory};
use crate::model::PulseParams;
use crate::sweep::SweepResult;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub const TRAJECTORY_HEADER: [&str; 6] = ["tau", "re_S", "im_S", "re_I", "im_I", "P"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.display().to_string(), source }
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        w.write_record([s.tau, s.s.re, s.s.im, s.i.re, s.i.im, s.p].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    write_trajectory_csv(file, traj).map_err(csv_err(path))
}

/// Samples from a trajectory CSV (columns as in [`TRAJECTORY_HEADER`]).
pub fn read_trajectory_csv<R: Read>(input: R, name: &str) -> Result<Vec<Sample>, IoError> {
    let fmt = |message: String| IoError::Format { path: name.to_string(), message };
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|source| IoError::Csv { path: name.to_string(), source })?.clone();
    if headers.iter().ne(TRAJECTORY_HEADER) {
        return Err(fmt(format!("expected header {}, found {}", TRAJECTORY_HEADER.join(","), headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut samples = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|source| IoError::Csv { path: name.to_string(), source })?;
        let mut v = [0.0; 6];
        for (k, field) in rec.iter().enumerate() {
            v[k] = field
                .trim()
                .parse()
                .map_err(|e| fmt(format!("row {}: column {}: {e}", line + 2, TRAJECTORY_HEADER[k])))?;
        }
        samples.push(Sample { tau: v[0], s: Complex64::new(v[1], v[2]), i: Complex64::new(v[3], v[4]), p: v[5] });
    }
    Ok(samples)
}

pub fn load_trajectory_csv(path: &Path) -> Result<Vec<Sample>, IoError> {
    let file = File::open(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    read_trajectory_csv(file, &path.display().to_string())
}

/// Summary sidecar written next to a simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub engine_version: String,
    pub params: PulseParams,
    pub p_asymptotic: f64,
    pub estimator: Estimator,
    pub oscillation_band: f64,
    pub crossings: Vec<f64>,
    pub half_window: f64,
    pub steps_taken: u64,
    pub rejected_steps: u64,
    pub max_norm_drift: f64,
    pub trajectory_final_p: Option<f64>,
}

impl SimulationSummary {
    pub fn new(params: PulseParams, report: &AsymptoticReport, crossings: Vec<f64>, traj: Option<&Trajectory>) -> Self {
        Self {
            engine_version: crate::VERSION.to_string(),
            params,
            p_asymptotic: report.probability,
            estimator: report.estimator,
            oscillation_band: report.oscillation_band(),
            crossings,
            half_window: report.half_window,
            steps_taken: report.steps_taken,
            rejected_steps: report.rejected_steps,
            max_norm_drift: report.max_norm_drift,
            trajectory_final_p: traj.and_then(|t| t.final_sample()).map(|s| s.p),
        }
    }
}

/// Extra per-row columns for a sweep table, e.g. an analytic reference.
pub struct ReferenceColumn<'a> {
    pub name: &'a str,
    pub values: &'a [Option<f64>],
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult, reference: Option<ReferenceColumn<'_>>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["eta", "P", "fidelity", "fault_tolerant", "n_crossings", "crossing_locations", "half_window"];
    if let Some(r) = &reference {
        header.push(r.name);
        header.push("deviation");
    }
    header.push("error");
    w.write_record(&header)?;
    for (k, row) in result.rows.iter().enumerate() {
        let mut rec = vec![
            fmt_f64(row.eta),
            opt(row.probability),
            opt(row.fidelity),
            row.fault_tolerant.map(|b| b.to_string()).unwrap_or_default(),
            row.crossings.len().to_string(),
            row.crossings.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(";"),
            opt(row.half_window),
        ];
        if let Some(r) = &reference {
            let value = r.values.get(k).copied().flatten();
            rec.push(opt(value));
            rec.push(opt(value.zip(row.probability).map(|(a, p)| p - a)));
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|source| IoError::File { path: "<output>".into(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorConfig};
    use crate::sweep::{sweep, EtaGrid, SweepSpec};

    #[test]
    fn trajectory_round_trip_is_exact() {
        let params = PulseParams::new(5.0, 0.05, 3).unwrap();
        let traj = integrate(&params, &IntegratorConfig { tau0: Some(30.0), ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let back = read_trajectory_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, traj.samples);
        let first = String::from_utf8(buf).unwrap();
        assert!(first.starts_with("tau,re_S,im_S,re_I,im_I,P\n-1.5000000000000000e1,"));
    }

    #[test]
    fn bad_trajectory_files() {
        assert!(read_trajectory_csv("a,b\n1,2\n".as_bytes(), "x").is_err());
        let bad = "tau,re_S,im_S,re_I,im_I,P\n0,1,0,0,zero,0\n";
        let err = read_trajectory_csv(bad.as_bytes(), "x").unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("im_I"), "{err}");
    }

    #[test]
    fn sweep_table_columns() {
        let spec = SweepSpec { lambda: 10.0, n: 2, eta_grid: EtaGrid::List(vec![0.0, 1.0]), integrator: Default::default() };
        let result = sweep(&spec).unwrap();
        let exact = [Some(0.73), Some(0.0)];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &result, Some(ReferenceColumn { name: "P_exact", values: &exact })).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "eta,P,fidelity,fault_tolerant,n_crossings,crossing_locations,half_window,P_exact,deviation,error"
        );
        assert!(lines.nth(1).unwrap().contains("window"));
    }
}
