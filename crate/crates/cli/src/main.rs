//! Command-line front end: simulate trajectories, verify lemma claims, and
//! sweep convergence rates.
//!
//! Exit codes: 0 on success, 1 when a requested lemma check finds violations
//! (the report is still written), 2 on configuration errors. Data output is
//! byte-deterministic for a fixed configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use virtdyn_core::analysis::{check_lemma, AnalysisError, LemmaId, LemmaReport};
use virtdyn_core::convergence::{rate_sweep, ConvergenceError, ConvergenceReport, InterpolationMode};
use virtdyn_core::recurrence::{run, DiscreteTrajectory, ModelParams};

mod output;

const MAX_STEPS: usize = 100_000_000;

#[derive(Parser)]
#[command(
    name = "virtdyn",
    version,
    about = "Virtual-particle recurrence dynamics: simulate, verify, sweep",
    long_about = "Simulate the discrete virtual-particle model, verify its lemma-level \
                  invariants, and measure convergence toward the Newtonian reference.\n\
                  Exit codes: 0 success, 1 lemma violations, 2 invalid configuration.\n\
                  VIRTDYN_THREADS caps sweep parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the recurrence for ceil(horizon * c) steps and write the trajectory
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Output format for the trajectory
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the lemma checkers and write a JSON report
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated lemma ids, or "all"
        #[arg(long, default_value = "all")]
        lemmas: String,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure sup errors against the Newtonian reference across a list of c
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated signal speeds, at least three, strictly increasing
        #[arg(long = "c-list", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        c_list: Vec<f64>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a self-contained plot script next to the report
        #[arg(long)]
        emit_plot: bool,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Coupling gamma (> 0)
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Initial position y0 (> 0)
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    /// Initial velocity w0 (|w0| < c)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    w0: f64,
    /// Horizon A: runs cover ceil(A * c) steps
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Interpolation mode for comparisons
    #[arg(long, value_enum, default_value_t = ModeArg::Jump)]
    mode: ModeArg,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Signal speed c (> 0)
    #[arg(long, default_value_t = 100.0)]
    c: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Jump,
    Smooth,
}

impl From<ModeArg> for InterpolationMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Jump => InterpolationMode::Jump,
            ModeArg::Smooth => InterpolationMode::Smooth,
        }
    }
}

// Exit code 2 with a single machine-parsable reason on stderr.
struct ConfigError(String);

// Exit code 1: lemma violations (report already written).
enum RunFailure {
    Config(ConfigError),
    Violations,
    Internal(String),
}

impl From<ConfigError> for RunFailure {
    fn from(e: ConfigError) -> Self {
        RunFailure::Config(e)
    }
}

#[derive(Serialize)]
struct ConfigDoc {
    c: f64,
    gamma: f64,
    alpha: f64,
    y0: f64,
    w0: f64,
    horizon: f64,
    mode: &'static str,
}

fn validate_common(common: &CommonArgs, c: f64) -> Result<(), ConfigError> {
    if !c.is_finite() || c <= 0.0 {
        return Err(ConfigError("signal speed must be positive".into()));
    }
    if !common.gamma.is_finite() || common.gamma <= 0.0 {
        return Err(ConfigError("coupling must be positive".into()));
    }
    if !common.y0.is_finite() || common.y0 <= 0.0 {
        return Err(ConfigError("initial position must be positive".into()));
    }
    if !common.w0.is_finite() || common.w0.abs() >= c {
        return Err(ConfigError("initial speed exceeds signal speed".into()));
    }
    if !common.horizon.is_finite() || common.horizon <= 0.0 {
        return Err(ConfigError("horizon must be positive".into()));
    }
    let steps = common.horizon * c;
    if steps > MAX_STEPS as f64 {
        return Err(ConfigError(format!(
            "step budget ceil(horizon*c) = {steps:.0} exceeds the limit of {MAX_STEPS}"
        )));
    }
    Ok(())
}

fn mode_name(mode: ModeArg) -> &'static str {
    match mode {
        ModeArg::Jump => "jump",
        ModeArg::Smooth => "smooth",
    }
}

fn build_trajectory(model: &ModelArgs) -> Result<(ModelParams, DiscreteTrajectory), RunFailure> {
    validate_common(&model.common, model.c)?;
    let params = ModelParams::new(model.c, model.common.gamma)
        .map_err(|e| ConfigError(e.to_string()))?;
    let n_steps = virtdyn_core::horizon_steps(model.common.horizon, model.c);
    let traj = run(&params, model.common.y0, model.common.w0, n_steps)
        .map_err(|e| RunFailure::Internal(e.to_string()))?;
    Ok((params, traj))
}

fn config_doc(model: &ModelArgs, params: &ModelParams) -> ConfigDoc {
    ConfigDoc {
        c: model.c,
        gamma: model.common.gamma,
        alpha: params.alpha(),
        y0: model.common.y0,
        w0: model.common.w0,
        horizon: model.common.horizon,
        mode: mode_name(model.common.mode),
    }
}

fn cmd_simulate(
    model: &ModelArgs,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<(), RunFailure> {
    let (params, traj) = build_trajectory(model)?;
    let doc = config_doc(model, &params);
    let bytes = match format {
        FormatArg::Csv => output::trajectory_csv(&doc, &traj),
        FormatArg::Json => output::trajectory_json(&doc, &traj),
    };
    output::write_bytes(out, &bytes).map_err(|e| RunFailure::Internal(e))?;
    Ok(())
}

fn parse_lemmas(selection: &str) -> Result<Vec<LemmaId>, ConfigError> {
    if selection.trim().eq_ignore_ascii_case("all") {
        return Ok(LemmaId::ALL.to_vec());
    }
    selection.split(',')
        .map(|part| LemmaId::from_str(part.trim()).map_err(ConfigError))
        .collect()
}

#[derive(Serialize)]
struct VerifyDoc {
    schema: u32,
    config: ConfigDoc,
    passed: bool,
    lemmas: Vec<LemmaReport>,
}

fn cmd_verify(model: &ModelArgs, lemmas: &str, out: Option<&Path>) -> Result<(), RunFailure> {
    let lemma_ids = parse_lemmas(lemmas)?;
    let (params, traj) = build_trajectory(model)?;

    let mut reports = Vec::new();
    for id in &lemma_ids {
        let report = check_lemma(&traj, *id, model.common.horizon).map_err(|e| match e {
            AnalysisError::InsufficientTrajectory { .. } | AnalysisError::MonotoneBranchRequired => {
                RunFailure::Config(ConfigError(format!("{id}: {e}")))
            }
            other => RunFailure::Internal(other.to_string()),
        })?;
        reports.push(report);
    }

    let failed: Vec<&LemmaReport> = reports.iter().filter(|r| !r.passed).collect();
    let doc = VerifyDoc {
        schema: 1,
        config: config_doc(model, &params),
        passed: failed.is_empty(),
        lemmas: reports.clone(),
    };
    let bytes = output::pretty_json(&doc);
    output::write_bytes(out, &bytes).map_err(RunFailure::Internal)?;

    if !doc.passed {
        let names: Vec<String> = failed.iter().map(|r| r.lemma.to_string()).collect();
        eprintln!("error: lemma checks failed: {}", names.join(", "));
        return Err(RunFailure::Violations);
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepDoc {
    schema: u32,
    #[serde(flatten)]
    report: ConvergenceReport,
}

fn cmd_sweep(
    common: &CommonArgs,
    c_list: &[f64],
    out: Option<&Path>,
    emit_plot: bool,
) -> Result<(), RunFailure> {
    if c_list.len() < 3 {
        return Err(ConfigError("need >=3 c values".into()).into());
    }
    if c_list
        .iter()
        .any(|&c| !c.is_finite() || c <= 0.0)
    {
        return Err(ConfigError("signal speed must be positive".into()).into());
    }
    if c_list.windows(2).any(|pair| pair[1] <= pair[0]) {
        return Err(ConfigError("c values must be strictly increasing".into()).into());
    }
    validate_common(common, c_list[0])?;

    let report = rate_sweep(
        common.gamma,
        common.y0,
        common.w0,
        common.horizon,
        c_list,
        common.mode.into(),
    )
    .map_err(|e| match e {
        ConvergenceError::InvalidSweep(msg) => RunFailure::Config(ConfigError(msg)),
        other => RunFailure::Internal(other.to_string()),
    })?;

    let doc = SweepDoc { schema: 1, report };
    let bytes = output::pretty_json(&doc);
    output::write_bytes(out, &bytes).map_err(RunFailure::Internal)?;

    if emit_plot {
        let plot_path = plot_path(out);
        let script = output::plot_script(&doc.report);
        output::write_bytes(Some(&plot_path), script.as_bytes()).map_err(RunFailure::Internal)?;
    }
    Ok(())
}

fn plot_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(path) => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
            path.with_file_name(format!("{stem}_plot.py"))
        }
        None => PathBuf::from("sweep_plot.py"),
    }
}

fn dispatch(cli: Cli) -> Result<(), RunFailure> {
    match &cli.command {
        Command::Simulate { model, format, out } => cmd_simulate(model, *format, out.as_deref()),
        Command::Verify { model, lemmas, out } => cmd_verify(model, lemmas, out.as_deref()),
        Command::Sweep {
            common,
            c_list,
            out,
            emit_plot,
        } => cmd_sweep(common, c_list, out.as_deref(), *emit_plot),
    }
}

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("VIRTDYN_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: VIRTDYN_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunFailure::Config(ConfigError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunFailure::Violations) => ExitCode::from(1),
        Err(RunFailure::Internal(msg)) => {
            eprintln!("error: internal: {msg}");
            ExitCode::from(1)
        }
    }
}
