//! Optional TOML run configuration. Command-line flags override these values.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use twisted_passage::dynamics::IntegratorConfig;
use twisted_passage::EtaGrid;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub workers: Option<usize>,
    pub format: Option<String>,
    pub pulse: Option<PulseSection>,
    pub integrator: Option<IntegratorConfig>,
    pub sweep: Option<SweepSection>,
    pub search: Option<SearchSection>,
    pub experiment: Option<ExperimentSection>,
    pub levels: Option<LevelsSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub n: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eta: Option<EtaGrid>,
    pub oracle: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub bracket: Option<(f64, f64)>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B_exp")]
    pub b: Option<f64>,
    pub omega1: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub f: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSection {
    pub omega_c: Option<f64>,
    pub omega_t: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub trajectory: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse(text: &str) -> Result<FileConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let cfg = parse(
            r#"
workers = 2
format = "json"
[pulse]
lambda = 5.0
eta = 0.02
n = 3
[integrator]
rel_tol = 1e-10
tau0 = 100.0
[sweep]
eta = { start = 3.95e-3, stop = 4.04e-3, count = 10 }
[search]
bracket = [3.9e-3, 4.1e-3]
"#,
        )
        .unwrap();
        assert_eq!(cfg.workers, Some(2));
        assert_eq!(cfg.pulse.unwrap().n, Some(3));
        let integ = cfg.integrator.unwrap();
        assert_eq!(integ.rel_tol, 1e-10);
        assert_eq!(integ.abs_tol, 1e-12);
        assert_eq!(integ.tau0, Some(100.0));
        assert!(matches!(cfg.sweep.unwrap().eta, Some(EtaGrid::Linspace { count: 10, .. })));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("[pulse]\nlambda = = 5\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse("[pulse]\nlamda = 5\n").is_err());
    }
}
