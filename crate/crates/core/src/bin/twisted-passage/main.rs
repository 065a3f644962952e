//! Command-line front end.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use twisted_passage::analytic::quadratic_exact;
use twisted_passage::bridge::{
    cnot_level_structure, crossing_resonances, from_dimensionless, inversion_time, pi_pulse_time, to_dimensionless,
    ExperimentParams,
};
use twisted_passage::dynamics::{asymptotic_report, integrate, Estimator, IntegratorConfig};
use twisted_passage::io::{self, ReferenceColumn, SimulationSummary};
use twisted_passage::plot::render_svg;
use twisted_passage::sweep::{optimize, SearchGoal};
use twisted_passage::validate::run_validation;
use twisted_passage::{predict_crossings, sweep, EtaGrid, PulseParams, SweepSpec};

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "twisted-passage", version, about = "Twisted rapid passage simulator and pulse designer")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for sweeps and searches.
    #[arg(long, global = true, env = "TWISTED_PASSAGE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one pulse and report the asymptotic transition probability.
    Simulate(SimulateArgs),
    /// Transition probability over a grid of twist strengths.
    Sweep(SweepArgs),
    /// Search a bracket for the twist strength that minimises the transition probability.
    Quench(SearchArgs),
    /// Search a bracket for the twist strength that maximises the transition probability.
    Pump(SearchArgs),
    /// Convert between dimensionless and spectrometer parameters.
    Convert(ConvertArgs),
    /// Energy levels and transition frequencies of a two-qubit CNOT system.
    Levels(LevelsArgs),
    /// Run the oracle agreement and invariant checks.
    Validate(ValidateArgs),
    /// Render a trajectory file as an SVG chart of P against tau.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Default)]
struct PulseArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Args, Debug, Default)]
struct IntegratorArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    /// Total integration window; chosen from the pulse when omitted.
    #[arg(long)]
    tau0: Option<f64>,
    /// Trajectory sampling interval.
    #[arg(long)]
    output_step: Option<f64>,
    #[arg(long)]
    estimator: Option<Estimator>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Trajectory CSV; the summary is written next to it as `<stem>.summary.json`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Explicit twist strengths.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "eta_range")]
    eta: Option<Vec<f64>>,
    /// Evenly spaced grid: START STOP COUNT.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"], allow_hyphen_values = true)]
    eta_range: Option<Vec<String>>,
    /// Add an analytic reference column (quadratic twist only).
    #[arg(long)]
    oracle: Option<Oracle>,
    #[arg(long)]
    format: Option<Format>,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Quadratic,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    bracket: Option<Vec<f64>>,
    /// Width of the final bracket; defaults to a thousandth of the initial one.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "direction", required = true, multiple = false)]
struct ConvertArgs {
    #[arg(long, group = "direction")]
    to_experiment: bool,
    #[arg(long, group = "direction")]
    to_dimensionless: bool,
    /// Convert to spectrometer parameters and back, reporting the relative error.
    #[arg(long, group = "direction")]
    round_trip: bool,
    #[command(flatten)]
    pulse: PulseArgs,
    #[arg(long = "A", allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long = "B", allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    omega1: Option<f64>,
    /// Sweep ratio omega1 / |A|.
    #[arg(long)]
    f: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LevelsArgs {
    #[arg(long)]
    omega_c: Option<f64>,
    #[arg(long)]
    omega_t: Option<f64>,
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Tighten every tolerance tenfold.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Write the full report as JSON.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    title: Option<String>,
}

/// Failure with its exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<twisted_passage::Error> for Failure {
    fn from(e: twisted_passage::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::IoError> for Failure {
    fn from(e: io::IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let file = match &cli.config {
        Some(path) => config::load(path).map_err(|e| usage(format!("config {e}")))?,
        None => FileConfig::default(),
    };
    if let Some(workers) = cli.workers.or(file.workers) {
        if workers == 0 {
            return Err(usage("workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(args) => simulate(args, &file),
        Command::Sweep(args) => run_sweep(args, &file),
        Command::Quench(args) => search(SearchGoal::Quench, args, &file),
        Command::Pump(args) => search(SearchGoal::Pump, args, &file),
        Command::Convert(args) => convert(args, &file),
        Command::Levels(args) => levels(args, &file),
        Command::Validate(args) => validate(args, &file),
        Command::Plot(args) => plot(args),
    }
}

fn required<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("missing --{name} (flag or config file)")))
}

fn pulse_params(args: &PulseArgs, file: &FileConfig) -> CliResult<PulseParams> {
    let section = file.pulse.as_ref();
    let lambda = required(args.lambda.or(section.and_then(|s| s.lambda)), "lambda")?;
    let eta = args.eta.or(section.and_then(|s| s.eta)).unwrap_or(0.0);
    let n = args.n.or(section.and_then(|s| s.n)).unwrap_or(2);
    Ok(PulseParams::new(lambda, eta, n)?)
}

fn integrator_config(args: &IntegratorArgs, file: &FileConfig) -> CliResult<IntegratorConfig> {
    let mut c = file.integrator.unwrap_or_default();
    if let Some(v) = args.rel_tol {
        c.rel_tol = v;
    }
    if let Some(v) = args.abs_tol {
        c.abs_tol = v;
    }
    if let Some(v) = args.initial_step {
        c.initial_step = v;
    }
    if let Some(v) = args.max_step {
        c.max_step = v;
    }
    if args.tau0.is_some() {
        c.tau0 = args.tau0;
    }
    if args.output_step.is_some() {
        c.output_step = args.output_step;
    }
    if let Some(e) = args.estimator {
        c.estimator = e;
    }
    c.validate()?;
    Ok(c)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Write JSON to `path`, or to stdout when no path is given.
fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    match path {
        Some(p) => io::write_json(create(p)?, value)?,
        None => io::write_json(std::io::stdout().lock(), value)?,
    }
    Ok(())
}

fn summary_path(trajectory: &Path) -> PathBuf {
    let stem = trajectory.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    trajectory.with_file_name(format!("{stem}.summary.json"))
}

fn simulate(args: SimulateArgs, file: &FileConfig) -> CliResult {
    let params = pulse_params(&args.pulse, file)?;
    let config = integrator_config(&args.integrator, file)?;
    let out = args.out.or_else(|| file.output.as_ref().and_then(|o| o.trajectory.clone()));

    let report = asymptotic_report(&params, &config)?;
    let crossings = predict_crossings(&params).locations;
    let trajectory = match &out {
        Some(_) => Some(integrate(&params, &config)?),
        None => None,
    };
    let summary = SimulationSummary::new(params, &report, crossings, trajectory.as_ref());

    if let (Some(path), Some(traj)) = (&out, &trajectory) {
        io::save_trajectory_csv(path, traj)?;
        let sidecar = file.output.as_ref().and_then(|o| o.summary.clone()).unwrap_or_else(|| summary_path(path));
        emit_json(Some(&sidecar), &summary)?;
    }
    emit_json(None, &summary)
}

fn eta_grid(args: &SweepArgs, file: &FileConfig) -> CliResult<EtaGrid> {
    if let Some(list) = &args.eta {
        return Ok(EtaGrid::List(list.clone()));
    }
    if let Some(range) = &args.eta_range {
        let num = |s: &str| s.parse::<f64>().map_err(|_| usage(format!("--eta-range: '{s}' is not a number")));
        let count = range[2]
            .parse::<usize>()
            .map_err(|_| usage(format!("--eta-range: count '{}' is not a non-negative integer", range[2])))?;
        return Ok(EtaGrid::Linspace { start: num(&range[0])?, stop: num(&range[1])?, count });
    }
    file.sweep
        .as_ref()
        .and_then(|s| s.eta.clone())
        .ok_or_else(|| usage("missing twist-strength grid (--eta, --eta-range or [sweep] eta)"))
}

fn run_sweep(args: SweepArgs, file: &FileConfig) -> CliResult {
    let pulse = file.pulse.as_ref();
    let lambda = required(args.lambda.or(pulse.and_then(|p| p.lambda)), "lambda")?;
    let n = args.n.or(pulse.and_then(|p| p.n)).unwrap_or(2);
    let grid = eta_grid(&args, file)?;
    if grid.values()?.is_empty() {
        return Err(usage("twist-strength grid is empty"));
    }
    let oracle = match args.oracle {
        Some(o) => Some(o),
        None => match file.sweep.as_ref().and_then(|s| s.oracle.as_deref()) {
            Some(s) => Some(Oracle::from_str(s, true).map_err(|_| usage(format!("unknown oracle '{s}'")))?),
            None => None,
        },
    };
    if oracle == Some(Oracle::Quadratic) && n != 2 {
        return Err(usage(format!("the quadratic oracle needs n = 2, got n = {n}")));
    }
    let format = match args.format {
        Some(f) => f,
        None => match file.format.as_deref() {
            Some(s) => Format::from_str(s, true).map_err(|_| usage(format!("unknown format '{s}'")))?,
            None => Format::Csv,
        },
    };
    let spec = SweepSpec { lambda, n, eta_grid: grid, integrator: integrator_config(&args.integrator, file)? };
    let result = sweep(&spec)?;

    let reference: Option<Vec<Option<f64>>> =
        oracle.map(|_| result.rows.iter().map(|r| quadratic_exact(lambda, r.eta).ok()).collect());
    if let Some(values) = &reference {
        let worst = result
            .rows
            .iter()
            .zip(values)
            .filter_map(|(r, v)| Some((r.eta, (r.probability? - (*v)?).abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((eta, dev)) = worst {
            eprintln!("max |P - P_exact| = {dev:.3e} at eta = {eta}");
        }
    }

    let out = args.out.or_else(|| file.output.as_ref().and_then(|o| o.table.clone()));
    match format {
        Format::Csv => {
            let column = reference.as_deref().map(|values| ReferenceColumn { name: "P_exact", values });
            let written = match &out {
                Some(p) => io::write_sweep_csv(create(p)?, &result, column),
                None => io::write_sweep_csv(std::io::stdout().lock(), &result, column),
            };
            written.map_err(|e| usage(format!("writing sweep table: {e}")))?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct WithReference<'a> {
                #[serde(flatten)]
                result: &'a twisted_passage::SweepResult,
                #[serde(skip_serializing_if = "Option::is_none")]
                p_exact: Option<&'a [Option<f64>]>,
            }
            emit_json(out.as_deref(), &WithReference { result: &result, p_exact: reference.as_deref() })?;
        }
    }

    let failed: Vec<String> = result
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("eta = {}: {e}", r.eta)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        for line in &failed {
            eprintln!("row failed: {line}");
        }
        Err(Failure::Numerical(format!("{} of {} sweep rows failed", failed.len(), result.rows.len())))
    }
}

fn search(goal: SearchGoal, args: SearchArgs, file: &FileConfig) -> CliResult {
    let pulse = file.pulse.as_ref();
    let lambda = required(args.lambda.or(pulse.and_then(|p| p.lambda)), "lambda")?;
    let n = args.n.or(pulse.and_then(|p| p.n)).unwrap_or(2);
    let section = file.search.as_ref();
    let bracket = match &args.bracket {
        Some(b) => (b[0], b[1]),
        None => required(section.and_then(|s| s.bracket), "bracket")?,
    };
    let tol = args
        .tol
        .or(section.and_then(|s| s.tol))
        .unwrap_or(1e-3 * (bracket.1 - bracket.0).abs());
    let config = integrator_config(&args.integrator, file)?;
    let report = optimize(goal, lambda, n, bracket, tol, &config)?;
    let out = args.out.or_else(|| file.output.as_ref().and_then(|o| o.report.clone()));
    emit_json(out.as_deref(), &report)
}

#[derive(Serialize)]
struct ExperimentRecord {
    #[serde(flatten)]
    params: ExperimentParams,
    lambda: f64,
    eta: f64,
    f: f64,
    pi_pulse_time: f64,
    crossings: Vec<twisted_passage::bridge::CrossingResonance>,
}

fn experiment_record(params: &PulseParams, omega1: f64, f: f64) -> CliResult<ExperimentRecord> {
    let exp = from_dimensionless(params, omega1, f)?;
    Ok(ExperimentRecord {
        params: exp,
        lambda: params.lambda,
        eta: params.eta,
        f,
        pi_pulse_time: pi_pulse_time(omega1)?,
        crossings: crossing_resonances(params, omega1, f)?,
    })
}

fn convert(args: ConvertArgs, file: &FileConfig) -> CliResult {
    let exp = file.experiment.as_ref();
    let omega1 = args.omega1.or(exp.and_then(|e| e.omega1));
    let f = args.f.or(exp.and_then(|e| e.f));
    let out = args.out.clone().or_else(|| file.output.as_ref().and_then(|o| o.report.clone()));

    if args.to_dimensionless {
        let a = required(args.a.or(exp.and_then(|e| e.a)), "A")?;
        let omega1 = required(omega1, "omega1")?;
        let b = args.b.or(exp.and_then(|e| e.b)).unwrap_or(0.0);
        // without a twist the order only labels the result
        let n = args.pulse.n.or(file.pulse.as_ref().and_then(|p| p.n)).unwrap_or(3);
        let duration = match args.t.or(exp.and_then(|e| e.t)) {
            Some(t) => t,
            None => inversion_time(required(f, "T or --f")?, omega1, required(args.pulse.lambda, "T")?)?,
        };
        let exp = ExperimentParams { sweep_amplitude: a, twist_strength: b, omega1, duration, n };
        let pulse = to_dimensionless(&exp)?;

        #[derive(Serialize)]
        struct Record {
            lambda: f64,
            eta: f64,
            n: u32,
            f: f64,
            internal_twist_strength: f64,
        }
        return emit_json(
            out.as_deref(),
            &Record {
                lambda: pulse.lambda,
                eta: pulse.eta,
                n: pulse.n,
                f: exp.sweep_ratio(),
                internal_twist_strength: exp.internal_twist_strength(),
            },
        );
    }

    let params = pulse_params(&args.pulse, file)?;
    let omega1 = required(omega1, "omega1")?;
    let f = required(f, "f")?;
    let record = experiment_record(&params, omega1, f)?;
    if args.to_experiment {
        return emit_json(out.as_deref(), &record);
    }

    let back = to_dimensionless(&record.params)?;
    let rel = |x: f64, y: f64| if y == 0.0 { (x - y).abs() } else { ((x - y) / y).abs() };
    let error = rel(back.lambda, params.lambda).max(rel(back.eta, params.eta));

    #[derive(Serialize)]
    struct RoundTrip {
        experiment: ExperimentRecord,
        lambda_back: f64,
        eta_back: f64,
        max_relative_error: f64,
    }
    emit_json(
        out.as_deref(),
        &RoundTrip { experiment: record, lambda_back: back.lambda, eta_back: back.eta, max_relative_error: error },
    )?;
    if error > 1e-12 {
        return Err(Failure::Numerical(format!("round trip relative error {error:e} exceeds 1e-12")));
    }
    Ok(())
}

fn levels(args: LevelsArgs, file: &FileConfig) -> CliResult {
    let section = file.levels.as_ref();
    let omega_c = required(args.omega_c.or(section.and_then(|s| s.omega_c)), "omega-c")?;
    let omega_t = required(args.omega_t.or(section.and_then(|s| s.omega_t)), "omega-t")?;
    let j = required(args.j.or(section.and_then(|s| s.j)), "J")?;
    let out = args.out.or_else(|| file.output.as_ref().and_then(|o| o.report.clone()));
    emit_json(out.as_deref(), &cnot_level_structure(omega_c, omega_t, j)?)
}

fn validate(args: ValidateArgs, file: &FileConfig) -> CliResult {
    let config = integrator_config(&args.integrator, file)?;
    let report = run_validation(args.strict, &config)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for c in &report.checks {
        let _ = writeln!(
            w,
            "{} {:<48} measured {:.3e}  tolerance {:.1e}  margin {:+.3e}  ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.margin,
            c.detail
        );
    }
    drop(w);
    let out = args.out.or_else(|| file.output.as_ref().and_then(|o| o.report.clone()));
    if let Some(path) = out {
        emit_json(Some(&path), &report)?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Numerical(format!("{failed} validation check(s) failed")))
    }
}

fn plot(args: PlotArgs) -> CliResult {
    let samples = io::load_trajectory_csv(&args.input)?;
    let title = args.title.unwrap_or_else(|| args.input.display().to_string());
    let svg = render_svg(&samples, &title).map_err(|e| usage(format!("{}: {e}", args.input.display())))?;
    let mut w = create(&args.out)?;
    w.write_all(svg.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| usage(format!("cannot write {}: {e}", args.out.display())))
}
