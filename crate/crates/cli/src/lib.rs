//! Benchmark harness for the min-max solvers: `run` executes one
//! configured solve and writes its trace as CSV, `compare` runs two
//! configurations over the same problem and reports which won.
//!
//! Every config-file key has a flag of the same name (`T` stays uppercase)
//! and flags override the file. Relative output paths land under
//! `CBMM_OUT_DIR` when that variable is set.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{apply_out_dir, check_comparable, load_config_file, RawConfig, RunSpec};
use error::{CliError, CliResult};
use runner::RunOutcome;

#[derive(Parser)]
#[command(name = "cbmm", version, about = "Benchmark harness for parameter-free min-max solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured solve and write its trace as CSV.
    Run(Box<RunArgs>),
    /// Run two configurations and produce a merged CSV plus a verdict.
    Compare(CompareArgs),
}

/// One flag per config key; values are parsed by the same code that parses
/// the config file, so the two layers cannot drift apart.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Config file with one `key = value` per line; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Problem family: synthetic or dro.
    #[arg(long)]
    experiment: Option<String>,
    /// cb_min_max, cb_min_max_simplex, restart, pdg, or pdg_entropic.
    #[arg(long)]
    algorithm: Option<String>,
    /// Iteration budget (ignored by restart, which follows its schedule).
    #[arg(long = "T", value_name = "N")]
    t: Option<String>,
    /// Initial betting wealth.
    #[arg(long, value_name = "X")]
    epsilon_prime: Option<String>,
    /// Seed for generated data and dataset splits.
    #[arg(long, value_name = "N")]
    seed: Option<String>,
    /// Trace cadence; 0 means max(1, T/1000).
    #[arg(long, value_name = "N")]
    record_every: Option<String>,
    /// Record wall-clock seconds in the trace (off by default so repeated
    /// runs stay byte-identical).
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    timing: Option<String>,
    /// Bet anchoring: origin or x0.
    #[arg(long)]
    centering: Option<String>,
    /// Simplex coin orientation: regret or literal.
    #[arg(long)]
    coin_sign: Option<String>,
    /// Output CSV path; default <experiment>_<algorithm>.csv.
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
    /// Quartic coefficient (synthetic) or weight regularizer strength (dro).
    #[arg(long, value_name = "X")]
    rho: Option<String>,
    /// Synthetic primal box half-width.
    #[arg(long, value_name = "X")]
    r_x: Option<String>,
    /// Synthetic dual box half-width.
    #[arg(long, value_name = "X")]
    r_y: Option<String>,
    /// Synthetic primal start.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    x0: Option<String>,
    /// Synthetic dual start.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    y0: Option<String>,
    /// DRO weight-ball radius.
    #[arg(long, value_name = "X")]
    r: Option<String>,
    /// DRO dual regularizer weight.
    #[arg(long, value_name = "X")]
    lambda: Option<String>,
    /// Sign of the dual regularizer: +1 (convex in p) or -1 (concave).
    #[arg(long, value_name = "S", allow_hyphen_values = true)]
    regularizer_sign: Option<String>,
    /// LIBSVM training data; omitted means the generated desk dataset.
    #[arg(long, value_name = "FILE")]
    train_path: Option<String>,
    /// LIBSVM test data; omitted means a seeded split of the training file.
    #[arg(long, value_name = "FILE")]
    test_path: Option<String>,
    /// Fraction of the training file held out when no test file is given.
    #[arg(long, value_name = "X")]
    test_fraction: Option<String>,
    /// Raw labels mapped to +1, comma separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    positive_labels: Option<String>,
    /// Raw labels mapped to -1, comma separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    negative_labels: Option<String>,
    /// Generated dataset: training samples.
    #[arg(long, value_name = "N")]
    desk_n_train: Option<String>,
    /// Generated dataset: test samples.
    #[arg(long, value_name = "N")]
    desk_n_test: Option<String>,
    /// Generated dataset: feature dimension.
    #[arg(long, value_name = "N")]
    desk_d: Option<String>,
    /// Primal step size for pdg; default diameter/(G sqrt(T)).
    #[arg(long, value_name = "X")]
    eta_x: Option<String>,
    /// Dual step size for pdg; entropic default ln(n)/(G sqrt(T)).
    #[arg(long, value_name = "X")]
    eta_y: Option<String>,
    /// Override the primal gradient-norm bound used for scaling.
    #[arg(long, value_name = "X")]
    g_x: Option<String>,
    /// Override the dual gradient-norm bound used for scaling.
    #[arg(long, value_name = "X")]
    g_y: Option<String>,
    /// Restart schedule: initial accuracy.
    #[arg(long, value_name = "X")]
    epsilon0: Option<String>,
    /// Restart schedule: target accuracy.
    #[arg(long, value_name = "X")]
    epsilon: Option<String>,
    /// Restart schedule: growth exponent in (0, 1/2].
    #[arg(long, value_name = "X")]
    theta: Option<String>,
    /// Restart schedule: stage-length constant.
    #[arg(long, value_name = "X")]
    c: Option<String>,
}

impl RunArgs {
    fn to_raw(&self) -> CliResult<RawConfig> {
        let mut raw = RawConfig::default();
        let pairs: [(&str, &Option<String>); 34] = [
            ("experiment", &self.experiment),
            ("algorithm", &self.algorithm),
            ("T", &self.t),
            ("epsilon_prime", &self.epsilon_prime),
            ("seed", &self.seed),
            ("record_every", &self.record_every),
            ("timing", &self.timing),
            ("centering", &self.centering),
            ("coin_sign", &self.coin_sign),
            ("output", &self.output),
            ("rho", &self.rho),
            ("r_x", &self.r_x),
            ("r_y", &self.r_y),
            ("x0", &self.x0),
            ("y0", &self.y0),
            ("r", &self.r),
            ("lambda", &self.lambda),
            ("regularizer_sign", &self.regularizer_sign),
            ("train_path", &self.train_path),
            ("test_path", &self.test_path),
            ("test_fraction", &self.test_fraction),
            ("positive_labels", &self.positive_labels),
            ("negative_labels", &self.negative_labels),
            ("desk_n_train", &self.desk_n_train),
            ("desk_n_test", &self.desk_n_test),
            ("desk_d", &self.desk_d),
            ("eta_x", &self.eta_x),
            ("eta_y", &self.eta_y),
            ("g_x", &self.g_x),
            ("g_y", &self.g_y),
            ("epsilon0", &self.epsilon0),
            ("epsilon", &self.epsilon),
            ("theta", &self.theta),
            ("c", &self.c),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        Ok(raw)
    }

    fn resolve(&self) -> CliResult<RunSpec> {
        let file_raw = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RawConfig::default(),
        };
        file_raw.overlay(self.to_raw()?).resolve()
    }
}

#[derive(Args, Debug, Default)]
struct CompareArgs {
    /// Config file for side a.
    #[arg(long, value_name = "FILE")]
    config_a: Option<PathBuf>,
    /// Config file for side b.
    #[arg(long, value_name = "FILE")]
    config_b: Option<PathBuf>,
    /// KEY=VALUE override for side a; repeatable.
    #[arg(long = "set-a", value_name = "KEY=VALUE")]
    set_a: Vec<String>,
    /// KEY=VALUE override for side b; repeatable.
    #[arg(long = "set-b", value_name = "KEY=VALUE")]
    set_b: Vec<String>,
    /// Merged CSV path; default compare_<experiment>_<a>_vs_<b>.csv.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn side_spec(path: &Option<PathBuf>, sets: &[String]) -> CliResult<RunSpec> {
    let mut raw = match path {
        Some(p) => load_config_file(p)?,
        None => RawConfig::default(),
    };
    for pair in sets {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--set expects KEY=VALUE, got '{pair}'"))
        })?;
        raw.set(key.trim(), value.trim())?;
    }
    raw.resolve()
}

/// Which side won, by the experiment's comparison metric. Relative ties
/// within 1e-9 count as exact ties; identical configs always tie because
/// runs are deterministic.
fn verdict(a: &RunOutcome, b: &RunOutcome) -> String {
    let (va, vb) = (a.comparison_value(), b.comparison_value());
    let scale = va.abs().max(vb.abs());
    if va == vb || (va - vb).abs() <= 1e-9 * scale {
        return "verdict: tie".into();
    }
    let (winner, tag) = if va < vb { (a, " (a)") } else { (b, " (b)") };
    let mut name = winner.algorithm.name().to_string();
    if a.algorithm == b.algorithm {
        name.push_str(tag);
    }
    format!("verdict: {name} lower {}", winner.comparison_metric_name())
}

fn run_cmd(args: &RunArgs) -> CliResult<()> {
    let spec = args.resolve()?;
    let outcome = runner::execute(&spec)?;
    output::write_csv(&spec.output, &outcome.records)?;
    println!("{}", outcome.summary_line());
    Ok(())
}

fn compare_cmd(args: &CompareArgs) -> CliResult<()> {
    let spec_a = side_spec(&args.config_a, &args.set_a)?;
    let spec_b = side_spec(&args.config_b, &args.set_b)?;
    check_comparable(&spec_a, &spec_b)?;

    // The two solves are independent (separate problems, datasets, and
    // traces), so run them concurrently.
    let (result_a, result_b) = std::thread::scope(|scope| {
        let handle = scope.spawn(|| runner::execute(&spec_a));
        let b = runner::execute(&spec_b);
        (handle.join().expect("solver thread panicked"), b)
    });
    let outcome_a = result_a?;
    let outcome_b = result_b?;

    let path = apply_out_dir(args.output.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "compare_{}_{}_vs_{}.csv",
            spec_a.experiment.name(),
            spec_a.algorithm.name(),
            spec_b.algorithm.name()
        ))
    }));
    output::write_compare_csv(&path, &outcome_a.records, &outcome_b.records)?;

    println!("a: {}", outcome_a.summary_line());
    println!("b: {}", outcome_b.summary_line());
    println!("{}", verdict(&outcome_a, &outcome_b));
    Ok(())
}

/// Parses arguments from the process environment, runs the requested
/// command, and returns the process exit code (clap itself exits with 2 on
/// usage errors, matching the config-error code).
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Compare(args) => compare_cmd(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
