//! Run configuration: a flat `key = value` file format, CLI flags
//! mirroring every key one-to-one, and resolution into a typed spec.
//! Flags win over file values; defaults fill whatever is left.

use std::path::{Path, PathBuf};

use cbmm_core::bettor::Centering;
use cbmm_core::problems::RegularizerSign;
use cbmm_core::simplex_bettor::CoinSign;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Synthetic,
    Dro,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Synthetic => "synthetic",
            Experiment::Dro => "dro",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    CbMinMax,
    CbMinMaxSimplex,
    Restart,
    Pdg,
    PdgEntropic,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CbMinMax => "cb_min_max",
            Algorithm::CbMinMaxSimplex => "cb_min_max_simplex",
            Algorithm::Restart => "restart",
            Algorithm::Pdg => "pdg",
            Algorithm::PdgEntropic => "pdg_entropic",
        }
    }
}

/// All settable keys, still optional; `resolve` applies defaults and
/// validates. The same struct backs the file and the flag layer.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub experiment: Option<Experiment>,
    pub algorithm: Option<Algorithm>,
    pub t: Option<usize>,
    pub epsilon_prime: Option<f64>,
    pub seed: Option<u64>,
    pub record_every: Option<usize>,
    pub timing: Option<bool>,
    pub centering: Option<Centering>,
    pub coin_sign: Option<CoinSign>,
    pub output: Option<PathBuf>,
    pub rho: Option<f64>,
    pub r_x: Option<f64>,
    pub r_y: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub r: Option<f64>,
    pub lambda: Option<f64>,
    pub regularizer_sign: Option<RegularizerSign>,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub test_fraction: Option<f64>,
    pub positive_labels: Option<Vec<f64>>,
    pub negative_labels: Option<Vec<f64>>,
    pub desk_n_train: Option<usize>,
    pub desk_n_test: Option<usize>,
    pub desk_d: Option<usize>,
    pub eta_x: Option<f64>,
    pub eta_y: Option<f64>,
    pub g_x: Option<f64>,
    pub g_y: Option<f64>,
    pub epsilon0: Option<f64>,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub c: Option<f64>,
}

fn bad_key(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!("key '{key}': cannot parse '{value}' as {expected}"))
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = value.parse().map_err(|_| bad_key(key, value, "a number"))?;
    if !v.is_finite() {
        return Err(bad_key(key, value, "a finite number"));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> CliResult<usize> {
    value
        .parse()
        .map_err(|_| bad_key(key, value, "a non-negative integer"))
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(bad_key(key, value, "true or false")),
    }
}

fn parse_label_list(key: &str, value: &str) -> CliResult<Vec<f64>> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|part| parse_f64(key, part.trim()))
        .collect()
}

pub fn parse_experiment(value: &str) -> CliResult<Experiment> {
    match value {
        "synthetic" => Ok(Experiment::Synthetic),
        "dro" => Ok(Experiment::Dro),
        _ => Err(CliError::Config(format!(
            "unknown experiment '{value}' (expected synthetic or dro)"
        ))),
    }
}

pub fn parse_algorithm(value: &str) -> CliResult<Algorithm> {
    match value {
        "cb_min_max" => Ok(Algorithm::CbMinMax),
        "cb_min_max_simplex" => Ok(Algorithm::CbMinMaxSimplex),
        "restart" => Ok(Algorithm::Restart),
        "pdg" => Ok(Algorithm::Pdg),
        "pdg_entropic" => Ok(Algorithm::PdgEntropic),
        _ => Err(CliError::Config(format!(
            "unknown algorithm '{value}' (expected cb_min_max, cb_min_max_simplex, restart, pdg, or pdg_entropic)"
        ))),
    }
}

impl RawConfig {
    /// Applies one `key = value` pair. Shared by the file parser and the
    /// compare subcommand's `--set` overrides.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "experiment" => self.experiment = Some(parse_experiment(value)?),
            "algorithm" => self.algorithm = Some(parse_algorithm(value)?),
            "T" => self.t = Some(parse_usize(key, value)?),
            "epsilon_prime" => self.epsilon_prime = Some(parse_f64(key, value)?),
            "seed" => {
                self.seed =
                    Some(value.parse().map_err(|_| bad_key(key, value, "an integer"))?)
            }
            "record_every" => self.record_every = Some(parse_usize(key, value)?),
            "timing" => self.timing = Some(parse_bool(key, value)?),
            "centering" => {
                self.centering = Some(value.parse().map_err(crate::error::from_core)?)
            }
            "coin_sign" => {
                self.coin_sign = Some(value.parse().map_err(crate::error::from_core)?)
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "rho" => self.rho = Some(parse_f64(key, value)?),
            "r_x" => self.r_x = Some(parse_f64(key, value)?),
            "r_y" => self.r_y = Some(parse_f64(key, value)?),
            "x0" => self.x0 = Some(parse_f64(key, value)?),
            "y0" => self.y0 = Some(parse_f64(key, value)?),
            "r" => self.r = Some(parse_f64(key, value)?),
            "lambda" => self.lambda = Some(parse_f64(key, value)?),
            "regularizer_sign" => {
                self.regularizer_sign = Some(value.parse().map_err(crate::error::from_core)?)
            }
            "train_path" => self.train_path = Some(PathBuf::from(value)),
            "test_path" => self.test_path = Some(PathBuf::from(value)),
            "test_fraction" => self.test_fraction = Some(parse_f64(key, value)?),
            "positive_labels" => self.positive_labels = Some(parse_label_list(key, value)?),
            "negative_labels" => self.negative_labels = Some(parse_label_list(key, value)?),
            "desk_n_train" => self.desk_n_train = Some(parse_usize(key, value)?),
            "desk_n_test" => self.desk_n_test = Some(parse_usize(key, value)?),
            "desk_d" => self.desk_d = Some(parse_usize(key, value)?),
            "eta_x" => self.eta_x = Some(parse_f64(key, value)?),
            "eta_y" => self.eta_y = Some(parse_f64(key, value)?),
            "g_x" => self.g_x = Some(parse_f64(key, value)?),
            "g_y" => self.g_y = Some(parse_f64(key, value)?),
            "epsilon0" => self.epsilon0 = Some(parse_f64(key, value)?),
            "epsilon" => self.epsilon = Some(parse_f64(key, value)?),
            "theta" => self.theta = Some(parse_f64(key, value)?),
            "c" => self.c = Some(parse_f64(key, value)?),
            _ => return Err(CliError::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Overlays `upper` (typically the flag layer) on `self`: any value
    /// set in `upper` wins.
    pub fn overlay(mut self, upper: RawConfig) -> RawConfig {
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $( if upper.$field.is_some() { self.$field = upper.$field; } )*
            };
        }
        take!(
            experiment, algorithm, t, epsilon_prime, seed, record_every, timing, centering,
            coin_sign, output, rho, r_x, r_y, x0, y0, r, lambda, regularizer_sign, train_path,
            test_path, test_fraction, positive_labels, negative_labels, desk_n_train,
            desk_n_test, desk_d, eta_x, eta_y, g_x, g_y, epsilon0, epsilon, theta, c,
        );
        self
    }
}

/// Parses the flat config-file format: one `key = value` per line, `#`
/// starts a comment, blank lines ignored.
pub fn parse_config_text(text: &str) -> CliResult<RawConfig> {
    let mut raw = RawConfig::default();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key = value", idx + 1))
        })?;
        raw.set(key.trim(), value.trim()).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("config line {}: {m}", idx + 1)),
            other => other,
        })?;
    }
    Ok(raw)
}

pub fn load_config_file(path: &Path) -> CliResult<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    parse_config_text(&text)
}

/// Fully resolved and validated run description.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub algorithm: Algorithm,
    /// Iteration budget; ignored by the restart algorithm, whose budget
    /// comes from its schedule.
    pub t: usize,
    pub epsilon_prime: f64,
    pub seed: u64,
    pub record_every: usize,
    pub timing: bool,
    pub centering: Centering,
    pub coin_sign: CoinSign,
    pub output: PathBuf,
    pub problem: ProblemSpec,
    pub eta_x: Option<f64>,
    pub eta_y: Option<f64>,
    pub g_x: Option<f64>,
    pub g_y: Option<f64>,
    pub restart: RestartSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Synthetic {
        rho: f64,
        r_x: f64,
        r_y: f64,
        x0: f64,
        y0: f64,
    },
    Dro {
        r: f64,
        lambda: f64,
        rho: f64,
        sign: RegularizerSign,
        data: DataSpec,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    /// Generated antisymmetric-pair dataset; reproducible from the seed.
    Desk {
        n_train: usize,
        n_test: usize,
        d: usize,
    },
    Files {
        train: PathBuf,
        test: Option<PathBuf>,
        /// Used to split the training file when no test file is given.
        test_fraction: f64,
        positive: Vec<f64>,
        negative: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestartSpec {
    pub epsilon0: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub c: f64,
}

fn require_positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn require_nonnegative(name: &str, v: f64) -> CliResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be non-negative, got {v}"
        )))
    }
}

impl RawConfig {
    /// Applies defaults and validates cross-field constraints.
    pub fn resolve(self) -> CliResult<RunSpec> {
        let experiment = self
            .experiment
            .ok_or_else(|| CliError::Config("experiment is required".into()))?;
        let algorithm = self
            .algorithm
            .ok_or_else(|| CliError::Config("algorithm is required".into()))?;

        if experiment == Experiment::Synthetic
            && matches!(algorithm, Algorithm::CbMinMaxSimplex | Algorithm::PdgEntropic)
        {
            return Err(CliError::Config(format!(
                "algorithm {} needs a simplex dual; use experiment = dro",
                algorithm.name()
            )));
        }

        let t = match (algorithm, self.t) {
            (Algorithm::Restart, maybe) => maybe.unwrap_or(0),
            (_, Some(t)) if t >= 1 => t,
            (_, Some(t)) => {
                return Err(CliError::Config(format!("T must be >= 1, got {t}")));
            }
            (_, None) => return Err(CliError::Config("T is required".into())),
        };

        let problem = match experiment {
            Experiment::Synthetic => {
                for key in ["r", "lambda", "train_path", "test_path"] {
                    let set = match key {
                        "r" => self.r.is_some(),
                        "lambda" => self.lambda.is_some(),
                        "train_path" => self.train_path.is_some(),
                        _ => self.test_path.is_some(),
                    };
                    if set {
                        return Err(CliError::Config(format!(
                            "key '{key}' does not apply to the synthetic experiment"
                        )));
                    }
                }
                let r_x = require_positive("r_x", self.r_x.unwrap_or(5.0))?;
                let r_y = require_positive("r_y", self.r_y.unwrap_or(5.0))?;
                let rho = require_positive("rho", self.rho.unwrap_or(0.5))?;
                let x0 = self.x0.unwrap_or(1.0);
                let y0 = self.y0.unwrap_or(1.0);
                if x0.abs() > r_x || y0.abs() > r_y {
                    return Err(CliError::Config(format!(
                        "start ({x0}, {y0}) lies outside the box [{}, {}] x [{}, {}]",
                        -r_x, r_x, -r_y, r_y
                    )));
                }
                ProblemSpec::Synthetic {
                    rho,
                    r_x,
                    r_y,
                    x0,
                    y0,
                }
            }
            Experiment::Dro => {
                if self.x0.is_some() || self.y0.is_some() || self.r_x.is_some() || self.r_y.is_some()
                {
                    return Err(CliError::Config(
                        "x0/y0/r_x/r_y apply only to the synthetic experiment \
                         (DRO starts at w = 0 with a uniform dual)"
                            .into(),
                    ));
                }
                let r = require_positive("r", self.r.unwrap_or(1e5))?;
                let lambda = require_nonnegative("lambda", self.lambda.unwrap_or(1e-4))?;
                let rho = require_nonnegative("rho", self.rho.unwrap_or(1e-4))?;
                let sign = self.regularizer_sign.unwrap_or_default();
                let data = match self.train_path {
                    Some(train) => {
                        let test_fraction = self.test_fraction.unwrap_or(0.2);
                        if !(test_fraction > 0.0 && test_fraction < 1.0) {
                            return Err(CliError::Config(format!(
                                "test_fraction must be in (0, 1), got {test_fraction}"
                            )));
                        }
                        DataSpec::Files {
                            train,
                            test: self.test_path,
                            test_fraction,
                            positive: self.positive_labels.unwrap_or_default(),
                            negative: self.negative_labels.unwrap_or_default(),
                        }
                    }
                    None => {
                        if self.test_path.is_some() {
                            return Err(CliError::Config(
                                "test_path given without train_path".into(),
                            ));
                        }
                        let n_train = self.desk_n_train.unwrap_or(200);
                        let n_test = self.desk_n_test.unwrap_or(100);
                        let d = self.desk_d.unwrap_or(20);
                        if n_train == 0 || n_test == 0 || d == 0 {
                            return Err(CliError::Config(
                                "desk dataset sizes must be positive".into(),
                            ));
                        }
                        DataSpec::Desk {
                            n_train,
                            n_test,
                            d,
                        }
                    }
                };
                ProblemSpec::Dro {
                    r,
                    lambda,
                    rho,
                    sign,
                    data,
                }
            }
        };

        let restart = RestartSpec {
            epsilon0: self.epsilon0.unwrap_or(4.0),
            epsilon: self.epsilon.unwrap_or(0.25),
            theta: self.theta.unwrap_or(0.25),
            c: self.c.unwrap_or(100.0),
        };

        let epsilon_prime = require_positive("epsilon_prime", self.epsilon_prime.unwrap_or(1.0))?;
        for (name, v) in [
            ("eta_x", self.eta_x),
            ("eta_y", self.eta_y),
            ("g_x", self.g_x),
            ("g_y", self.g_y),
        ] {
            if let Some(v) = v {
                require_positive(name, v)?;
            }
        }

        let output = self.output.unwrap_or_else(|| {
            PathBuf::from(format!("{}_{}.csv", experiment.name(), algorithm.name()))
        });
        let output = apply_out_dir(output);

        Ok(RunSpec {
            experiment,
            algorithm,
            t,
            epsilon_prime,
            seed: self.seed.unwrap_or(42),
            record_every: self.record_every.unwrap_or(0),
            timing: self.timing.unwrap_or(false),
            centering: self.centering.unwrap_or_default(),
            coin_sign: self.coin_sign.unwrap_or_default(),
            output,
            problem,
            eta_x: self.eta_x,
            eta_y: self.eta_y,
            g_x: self.g_x,
            g_y: self.g_y,
            restart,
        })
    }
}

/// Relative output paths land under `CBMM_OUT_DIR` when it is set.
pub fn apply_out_dir(path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path;
    }
    match std::env::var_os("CBMM_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path,
    }
}

/// Checks the compare precondition: same experiment, same budget (unless a
/// side derives its budget from a restart schedule), same initialization.
pub fn check_comparable(a: &RunSpec, b: &RunSpec) -> CliResult<()> {
    if a.experiment != b.experiment {
        return Err(CliError::Config(format!(
            "cannot compare across experiments ({} vs {})",
            a.experiment.name(),
            b.experiment.name()
        )));
    }
    let restart_involved =
        a.algorithm == Algorithm::Restart || b.algorithm == Algorithm::Restart;
    if !restart_involved && a.t != b.t {
        return Err(CliError::Config(format!(
            "cannot compare different budgets (T = {} vs {})",
            a.t, b.t
        )));
    }
    if let (
        ProblemSpec::Synthetic {
            x0: ax, y0: ay, ..
        },
        ProblemSpec::Synthetic {
            x0: bx, y0: by, ..
        },
    ) = (&a.problem, &b.problem)
    {
        if ax != bx || ay != by {
            return Err(CliError::Config(format!(
                "cannot compare different initializations (({ax}, {ay}) vs ({bx}, {by}))"
            )));
        }
    }
    Ok(())
}
