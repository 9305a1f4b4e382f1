use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use degen_taxis::experiments::{
    eps_study_runs, longtime_runs, preset, study_context, summarize, v0_scaling_runs, StudyReport, StudyRuns,
};
use degen_taxis::ineq_lab::{moser_bound_check, moser_random_tuples, run_sweep, IneqKind, SweepConfig};
use degen_taxis::{check_invariants, run, GridSpec, TaxisError};
use serde_json::{json, Value};
use thiserror::Error;

use crate::artifacts::{summary_json, write_fields, write_json};
use crate::config::{parse_config, ConfigError};
use crate::series::{read_series, SeriesError};

pub const OUT_ENV: &str = "DEGEN_TAXIS_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] TaxisError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "ParseError",
            CliError::Config(ConfigError::UnknownKey { .. }) => "UnknownKey",
            CliError::Config(ConfigError::Range { .. }) => "RangeError",
            CliError::Model(_) => "ModelError",
            CliError::Series(_) => "SeriesError",
            CliError::Io(..) => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

#[derive(Debug, Parser)]
#[command(name = "degen-taxis", version, about = "Doubly degenerate nutrient taxis: runs, checks and studies")]
pub struct Cli {
    /// Worker threads for parallel sweeps (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trajectory from a config file and write its artifacts.
    Simulate(SimulateArgs),
    /// Re-check the invariants of a stored series CSV.
    Invariants {
        #[arg(long)]
        series: PathBuf,
    },
    /// Random sweep of one functional inequality.
    Ineq(IneqArgs),
    /// Check the Moser-type recursion bound.
    Moser(MoserArgs),
    /// Run a preset study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the environment and the config file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    /// A, B, hessian, sobolev or moser-split.
    #[arg(long)]
    pub which: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Trials per seed batch.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid cells per side.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct MoserArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m0: f64,
    #[arg(long, default_value_t = 20)]
    pub kmax: usize,
    /// Check this many random tuples instead of the given one.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// eps_study, longtime, v0_scaling (alias small_v0), homogeneous or branching.
    pub name: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid cells per side, overriding the preset.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025, 0.0125])]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub v_threshold: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01])]
    pub v0_bars: Vec<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

fn out_dir(flag: Option<PathBuf>, configured: PathBuf) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or(configured)
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json serializes")).map_err(io_err(Path::new("<stdout>")))
}

/// Runs the parsed command; `Ok(true)` iff every enabled check passed.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        // Only the first configuration of the global pool takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Invariants { series } => invariants(&series, out),
        Command::Ineq(a) => ineq(a, out),
        Command::Moser(a) => moser(a, out),
        Command::Experiment(a) => experiment(a, out),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let text = fs::read_to_string(&a.config).map_err(io_err(&a.config))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = a.seed {
        cfg.set_seed(seed);
    }
    let dir = out_dir(a.out, cfg.output_dir.clone());
    let u0 = cfg.u0.sample(cfg.grid);
    let v0 = cfg.v0.sample(cfg.grid);
    let start = Instant::now();
    let traj = run(&u0, &v0, &cfg.params, &cfg.control, &cfg.diag)?;
    let seconds = start.elapsed().as_secs_f64();
    let ctx = study_context(&traj);
    let report = check_invariants(&traj.samples, &ctx)?;
    let mut paths = write_fields(&dir, &traj, &ctx, cfg.snapshots).map_err(io_err(&dir))?;
    let echo = json!({ "text": cfg.to_text(), "parsed": cfg });
    let summary = summary_json(echo, &traj, &report, seconds);
    let summary_path = dir.join("summary.json");
    paths.push(write_json(&summary_path, &summary).map_err(io_err(&summary_path))?);
    print_json(
        out,
        &json!({
            "pass": report.all_passed(),
            "failed": report.failures().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "artifacts": paths,
        }),
    )?;
    Ok(report.all_passed())
}

fn invariants(series: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let text = fs::read_to_string(series).map_err(io_err(series))?;
    let (samples, ctx) = read_series(&text)?;
    let report = check_invariants(&samples, &ctx)?;
    print_json(out, &json!({ "pass": report.all_passed(), "checks": report.checks }))?;
    Ok(report.all_passed())
}

fn ineq(a: IneqArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let kind: IneqKind = a.which.parse()?;
    let mut cfg = SweepConfig::new(kind, GridSpec::unit_square(a.n)?);
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(eta) = a.eta {
        cfg.eta = eta;
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let report = run_sweep(&cfg)?;
    print_json(out, &serde_json::to_value(&report).expect("report serializes"))?;
    Ok(report.pass)
}

fn moser(a: MoserArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    if let Some(count) = a.random {
        let failures = moser_random_tuples(count, a.kmax, a.seed)?;
        let pass = failures.is_empty();
        print_json(out, &json!({ "tuples": count, "kmax": a.kmax, "seed": a.seed, "failures": failures, "pass": pass }))?;
        return Ok(pass);
    }
    let check = moser_bound_check(a.a, a.b, a.d, a.m0, a.kmax)?;
    print_json(
        out,
        &json!({
            "a": a.a, "b": a.b, "d": a.d, "m0": a.m0, "kmax": a.kmax,
            "bound": check.bound,
            "min_root": check.min_root,
            "tail_root": check.tail_root,
            "pass": check.pass,
        }),
    )?;
    Ok(check.pass)
}

fn label_dir(root: &Path, label: &str) -> PathBuf {
    root.join(label.replace(['/', '\\', ' '], "_"))
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let preset_name = match a.name.as_str() {
        "v0_scaling" => "small_v0",
        other => other,
    };
    let mut base = preset(preset_name)?;
    if let Some(n) = a.resolution {
        base = base.with_resolution(n)?;
    }
    if let Some(t) = a.t_end {
        base.control.t_end = t;
    }
    let root = out_dir(a.out, PathBuf::from("out")).join(&a.name);
    let (mut report, runs): (StudyReport, StudyRuns) = match preset_name {
        "eps_study" => eps_study_runs(&a.eps, &base)?,
        "longtime" => {
            let threshold = a.v_threshold.unwrap_or(base.thresholds.v_threshold);
            longtime_runs(&base, threshold)?
        }
        "small_v0" => v0_scaling_runs(&a.v0_bars, &base)?,
        "homogeneous" | "branching" => {
            let traj = base.run()?;
            let summary = summarize(base.name.clone(), &traj)?;
            let report = StudyReport {
                study: "single_run".into(),
                preset: base.name.clone(),
                criteria: vec![degen_taxis::experiments::Criterion {
                    name: format!("invariants[{}]", summary.label),
                    status: if summary.invariants_pass {
                        degen_taxis::experiments::Status::Pass
                    } else {
                        degen_taxis::experiments::Status::Fail
                    },
                    detail: summary.failed_invariants.join(", "),
                }],
                runs: vec![summary],
                fitted: Vec::new(),
                thresholds: base.thresholds,
                artifacts: Vec::new(),
            };
            (report, vec![(base.name.clone(), traj)])
        }
        other => return Err(CliError::Usage(format!("unknown experiment `{other}`"))),
    };
    for (label, traj) in &runs {
        let dir = label_dir(&root, label);
        let ctx = study_context(traj);
        let paths = write_fields(&dir, traj, &ctx, true).map_err(io_err(&dir))?;
        report.artifacts.extend(paths.iter().map(|p| p.display().to_string()));
    }
    let report_path = root.join("report.json");
    report.artifacts.push(report_path.display().to_string());
    let value = serde_json::to_value(&report).expect("report serializes");
    write_json(&report_path, &value).map_err(io_err(&report_path))?;
    print_json(out, &value)?;
    Ok(report.pass())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 when all checks pass, 1 when a check
/// fails, 2 on errors (reported as JSON on `err`).
pub fn main_with(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let v = json!({ "error": "UsageError", "message": e.to_string() });
            let _ = writeln!(err, "{v}");
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            2
        }
    }
}
