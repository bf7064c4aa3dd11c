//! Turns a resolved spec into a solve: builds the problem and datasets,
//! wires the per-experiment metric callback, and dispatches to the
//! configured algorithm.

use std::path::Path;

use cbmm_core::data::{self, Dataset, LabelRemap};
use cbmm_core::metrics::{dro_inner_min, hinge_losses, robust_objective, RunRecord};
use cbmm_core::problems::{DroProblem, Problem, SaddleOracle, SyntheticProblem};
use cbmm_core::solvers::{
    cb_min_max, cb_min_max_simplex, entropic_default_eta, pdg_default_eta, primal_dual_gradient,
    restart_cb_min_max, DualGeometry, MetricFn, RestartSchedule, SolverOptions, TracePoint,
};
use cbmm_core::{DenseVector, Result as CoreResult};

use crate::config::{Algorithm, DataSpec, Experiment, ProblemSpec, RunSpec};
use crate::error::{from_core, CliError, CliResult};
use crate::output::format_float;

/// Problem, evaluation data, and start point for one configured solve.
pub struct PreparedRun {
    pub problem: Problem,
    /// Held-out samples for the test-loss column; DRO only.
    pub test: Option<Dataset>,
    pub x0: DenseVector,
    pub y0: DenseVector,
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    data::parse_libsvm(&text).map_err(from_core)
}

fn load_datasets(spec: &DataSpec, seed: u64) -> CliResult<(Dataset, Dataset)> {
    match spec {
        DataSpec::Desk {
            n_train,
            n_test,
            d,
        } => data::desk_dataset(*n_train, *n_test, *d, seed).map_err(from_core),
        DataSpec::Files {
            train,
            test,
            test_fraction,
            positive,
            negative,
        } => {
            let remap = if positive.is_empty() && negative.is_empty() {
                LabelRemap::identity()
            } else {
                LabelRemap::new(positive.clone(), negative.clone()).map_err(from_core)?
            };
            let train_ds = data::remap_labels(&read_dataset(train)?, &remap).map_err(from_core)?;
            let (train_ds, test_ds) = match test {
                Some(path) => {
                    let test_ds =
                        data::remap_labels(&read_dataset(path)?, &remap).map_err(from_core)?;
                    (train_ds, test_ds)
                }
                None => data::split(&train_ds, *test_fraction, seed).map_err(from_core)?,
            };
            // One shared dimension so the trained weights cover every
            // feature index the test set mentions.
            let dim = train_ds.dimension().max(test_ds.dimension());
            Ok((
                train_ds.with_dimension(dim).map_err(from_core)?,
                test_ds.with_dimension(dim).map_err(from_core)?,
            ))
        }
    }
}

fn uniform(n: usize) -> CliResult<DenseVector> {
    DenseVector::new(vec![1.0 / n as f64; n]).map_err(from_core)
}

pub fn prepare(spec: &RunSpec) -> CliResult<PreparedRun> {
    match &spec.problem {
        ProblemSpec::Synthetic {
            rho,
            r_x,
            r_y,
            x0,
            y0,
        } => {
            let p = SyntheticProblem::new(*rho, *r_x, *r_y).map_err(from_core)?;
            Ok(PreparedRun {
                problem: Problem::Synthetic(p),
                test: None,
                x0: DenseVector::scalar(*x0).map_err(from_core)?,
                y0: DenseVector::scalar(*y0).map_err(from_core)?,
            })
        }
        ProblemSpec::Dro {
            r,
            lambda,
            rho,
            sign,
            data: data_spec,
        } => {
            let (train, test) = load_datasets(data_spec, spec.seed)?;
            let p = DroProblem::from_dataset(&train, *r, *lambda, *rho, *sign).map_err(from_core)?;
            let x0 = DenseVector::zeros(p.dim());
            let y0 = uniform(p.n())?;
            Ok(PreparedRun {
                problem: Problem::Dro(p),
                test: Some(test),
                x0,
                y0,
            })
        }
    }
}

/// Oracle wrapper substituting configured gradient bounds. Also the place
/// where Euclidean-dual solvers on a simplex-dual problem get a valid L2
/// bound: the oracle's native dual bound is per-coordinate.
struct BoundOverride<'a> {
    inner: &'a Problem,
    bound_x: f64,
    bound_y: f64,
}

impl SaddleOracle for BoundOverride<'_> {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }

    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }

    fn value(&self, x: &DenseVector, y: &DenseVector) -> CoreResult<f64> {
        self.inner.value(x, y)
    }

    fn subgrads(&self, x: &DenseVector, y: &DenseVector) -> CoreResult<(DenseVector, DenseVector)> {
        self.inner.subgrads(x, y)
    }

    fn bound_x(&self) -> f64 {
        self.bound_x
    }

    fn bound_y(&self) -> f64 {
        self.bound_y
    }
}

fn default_dual_bound(algorithm: Algorithm, problem: &Problem) -> f64 {
    match problem {
        Problem::Synthetic(_) => problem.bound_y(),
        Problem::Dro(p) => match algorithm {
            // ||v||_2 <= sqrt(n) ||v||_inf turns the oracle's
            // per-coordinate bound into the L2 bound these solvers need.
            Algorithm::CbMinMax | Algorithm::Restart | Algorithm::Pdg => {
                (p.n() as f64).sqrt() * problem.bound_y()
            }
            Algorithm::CbMinMaxSimplex | Algorithm::PdgEntropic => problem.bound_y(),
        },
    }
}

fn require_positive_bound(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} resolved to {v}; set it explicitly for this problem"
        )))
    }
}

/// Trace and identity of a finished solve.
#[derive(Debug)]
pub struct RunOutcome {
    pub experiment: Experiment,
    pub algorithm: Algorithm,
    pub records: Vec<RunRecord>,
}

impl RunOutcome {
    pub fn final_record(&self) -> &RunRecord {
        self.records.last().expect("solvers always record the final iteration")
    }

    /// The scalar compare ranks runs by: distance to the saddle point for
    /// the synthetic problem, worst-case objective for DRO.
    pub fn comparison_value(&self) -> f64 {
        let rec = self.final_record();
        match self.experiment {
            Experiment::Synthetic => rec.dist_to_opt.unwrap_or(f64::NAN),
            Experiment::Dro => rec.robust_objective.unwrap_or(f64::NAN),
        }
    }

    pub fn comparison_metric_name(&self) -> &'static str {
        match self.experiment {
            Experiment::Synthetic => "final dist",
            Experiment::Dro => "final robust objective",
        }
    }

    pub fn summary_line(&self) -> String {
        let rec = self.final_record();
        let gap = rec.gap.map(format_float).unwrap_or_else(|| "n/a".into());
        match self.experiment {
            Experiment::Synthetic => {
                let dist = rec.dist_to_opt.map(format_float).unwrap_or_else(|| "n/a".into());
                format!(
                    "{} {}: final gap {gap}, final dist {dist}",
                    self.experiment.name(),
                    self.algorithm.name()
                )
            }
            Experiment::Dro => {
                let rob = rec
                    .robust_objective
                    .map(format_float)
                    .unwrap_or_else(|| "n/a".into());
                format!(
                    "{} {}: final gap {gap}, final robust objective {rob}",
                    self.experiment.name(),
                    self.algorithm.name()
                )
            }
        }
    }
}

/// Runs the configured solve and evaluates its trace. Does not touch the
/// filesystem except to load datasets; CSV persistence is the caller's.
pub fn execute(spec: &RunSpec) -> CliResult<RunOutcome> {
    let prepared = prepare(spec)?;
    let x_set = prepared.problem.feasible_x();
    let y_set = prepared.problem.feasible_y();
    let opts = SolverOptions {
        epsilon_prime: spec.epsilon_prime,
        centering: spec.centering,
        coin_sign: spec.coin_sign,
        record_every: spec.record_every,
        timing: spec.timing,
        adaptive_scaling: false,
    };
    let bound_x = spec.g_x.unwrap_or_else(|| prepared.problem.bound_x());
    let bound_y = spec
        .g_y
        .unwrap_or_else(|| default_dual_bound(spec.algorithm, &prepared.problem));
    let oracle = BoundOverride {
        inner: &prepared.problem,
        bound_x,
        bound_y,
    };

    let mut metric: Box<MetricFn> = match &prepared.problem {
        Problem::Synthetic(p) => {
            let p = p.clone();
            Box::new(move |tp: &TracePoint| {
                let (x, y) = (tp.x_bar.only(), tp.y_bar.only());
                let mut rec = RunRecord::bare(tp.iteration, tp.elapsed_seconds);
                rec.avg_x_stat = x;
                rec.avg_y_stat = y;
                rec.gap = Some(p.exact_gap(x, y));
                rec.gap_exact = true;
                rec.dist_to_opt = Some((x * x + y * y).sqrt());
                rec
            })
        }
        Problem::Dro(d) => {
            let test = prepared.test.as_ref().expect("DRO always prepares a test set");
            Box::new(move |tp: &TracePoint| {
                let mut rec = RunRecord::bare(tp.iteration, tp.elapsed_seconds);
                rec.avg_x_stat = tp.x_bar.norm2();
                rec.avg_y_stat = tp.y_bar.norm_inf();
                // Dimensions are fixed at construction, so these cannot fail
                // on feasible iterates.
                let hinges = d.hinges(tp.x_bar).expect("train loss");
                rec.train_loss = Some(hinges.sum() / d.n() as f64);
                rec.test_loss = Some(hinge_losses(test, tp.x_bar).expect("test loss").0);
                let upper = robust_objective(d, tp.x_bar).expect("robust objective");
                let lower = dro_inner_min(d, tp.y_bar, tp.x_bar).expect("inner min");
                rec.robust_objective = Some(upper);
                // Estimated gap: the inner min starts from x_bar, so the
                // estimate is sandwiched in [0, true gap].
                rec.gap = Some(upper - lower);
                rec.gap_exact = false;
                rec
            })
        }
    };

    let out = match spec.algorithm {
        Algorithm::CbMinMax => cb_min_max(
            &oracle,
            &x_set,
            &y_set,
            &prepared.x0,
            &prepared.y0,
            spec.t,
            &opts,
            &mut *metric,
        ),
        Algorithm::CbMinMaxSimplex => cb_min_max_simplex(
            &oracle,
            &x_set,
            &prepared.x0,
            &prepared.y0,
            spec.t,
            &opts,
            &mut *metric,
        ),
        Algorithm::Restart => {
            let schedule = RestartSchedule::new(
                spec.restart.epsilon0,
                spec.restart.epsilon,
                spec.restart.theta,
                spec.restart.c,
            )
            .map_err(from_core)?;
            restart_cb_min_max(
                &oracle,
                &x_set,
                &y_set,
                &prepared.x0,
                &prepared.y0,
                &schedule,
                &opts,
                &mut *metric,
            )
        }
        Algorithm::Pdg => {
            let bx = require_positive_bound("g_x", bound_x)?;
            let by = require_positive_bound("g_y", bound_y)?;
            let eta_x = spec.eta_x.unwrap_or_else(|| pdg_default_eta(&x_set, bx, spec.t));
            let eta_y = spec.eta_y.unwrap_or_else(|| pdg_default_eta(&y_set, by, spec.t));
            primal_dual_gradient(
                &oracle,
                &x_set,
                &y_set,
                &prepared.x0,
                &prepared.y0,
                spec.t,
                eta_x,
                eta_y,
                DualGeometry::Euclidean,
                &opts,
                &mut *metric,
            )
        }
        Algorithm::PdgEntropic => {
            let bx = require_positive_bound("g_x", bound_x)?;
            let by = require_positive_bound("g_y", bound_y)?;
            let eta_x = spec.eta_x.unwrap_or_else(|| pdg_default_eta(&x_set, bx, spec.t));
            let eta_y = spec
                .eta_y
                .unwrap_or_else(|| entropic_default_eta(y_set.dim(), by, spec.t));
            primal_dual_gradient(
                &oracle,
                &x_set,
                &y_set,
                &prepared.x0,
                &prepared.y0,
                spec.t,
                eta_x,
                eta_y,
                DualGeometry::Entropic,
                &opts,
                &mut *metric,
            )
        }
    }
    .map_err(from_core)?;

    Ok(RunOutcome {
        experiment: spec.experiment,
        algorithm: spec.algorithm,
        records: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn spec_from(pairs: &[(&str, &str)]) -> RunSpec {
        let mut raw = RawConfig::default();
        for (k, v) in pairs {
            raw.set(k, v).unwrap();
        }
        raw.resolve().unwrap()
    }

    #[test]
    fn synthetic_run_records_exact_gap() {
        let spec = spec_from(&[
            ("experiment", "synthetic"),
            ("algorithm", "cb_min_max"),
            ("T", "20"),
        ]);
        let out = execute(&spec).unwrap();
        assert_eq!(out.records.len(), 20);
        let last = out.final_record();
        assert_eq!(last.iteration, 20);
        assert!(last.gap_exact);
        assert!(last.gap.unwrap() >= 0.0);
        assert!(last.dist_to_opt.unwrap() > 0.0);
        assert!(out.summary_line().contains("final gap"));
        assert!(out.summary_line().contains("final dist"));
    }

    #[test]
    fn desk_dro_prepares_requested_shapes() {
        let spec = spec_from(&[
            ("experiment", "dro"),
            ("algorithm", "cb_min_max_simplex"),
            ("T", "5"),
            ("desk_n_train", "40"),
            ("desk_n_test", "12"),
            ("desk_d", "7"),
        ]);
        let prepared = prepare(&spec).unwrap();
        match &prepared.problem {
            Problem::Dro(p) => {
                assert_eq!(p.n(), 40);
                assert_eq!(p.dim(), 7);
            }
            _ => panic!("expected DRO"),
        }
        assert_eq!(prepared.test.as_ref().unwrap().n(), 12);
        assert_eq!(prepared.x0.dim(), 7);
        assert!((prepared.y0.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dro_trace_has_losses_and_estimated_gap() {
        let spec = spec_from(&[
            ("experiment", "dro"),
            ("algorithm", "cb_min_max_simplex"),
            ("T", "10"),
            ("desk_n_train", "30"),
            ("desk_n_test", "10"),
            ("desk_d", "5"),
        ]);
        let out = execute(&spec).unwrap();
        let last = out.final_record();
        assert!(!last.gap_exact);
        assert!(last.gap.unwrap() >= 0.0);
        assert!(last.train_loss.unwrap() > 0.0);
        assert!(last.test_loss.unwrap() > 0.0);
        assert!(last.robust_objective.unwrap() > 0.0);
        assert!(out.summary_line().contains("final robust objective"));
    }

    #[test]
    fn undersized_gradient_bound_fails_numerically_at_iteration_one() {
        let mut raw = RawConfig::default();
        for (k, v) in [
            ("experiment", "synthetic"),
            ("algorithm", "cb_min_max"),
            ("T", "50"),
            ("g_x", "1e-6"),
        ] {
            raw.set(k, v).unwrap();
        }
        let err = execute(&raw.resolve().unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("iteration 1"), "{err}");
    }

    #[test]
    fn euclidean_solvers_get_l2_dual_bound_on_dro() {
        let spec = spec_from(&[
            ("experiment", "dro"),
            ("algorithm", "cb_min_max"),
            ("T", "25"),
            ("desk_n_train", "50"),
            ("desk_n_test", "10"),
            ("desk_d", "5"),
        ]);
        // Fails with a scaling violation if the dual bound stayed
        // per-coordinate.
        let out = execute(&spec).unwrap();
        assert_eq!(out.final_record().iteration, 25);
    }

    #[test]
    fn pdg_runs_on_both_experiments() {
        let syn = spec_from(&[
            ("experiment", "synthetic"),
            ("algorithm", "pdg"),
            ("T", "30"),
        ]);
        assert_eq!(execute(&syn).unwrap().final_record().iteration, 30);
        let dro = spec_from(&[
            ("experiment", "dro"),
            ("algorithm", "pdg_entropic"),
            ("T", "15"),
            ("desk_n_train", "20"),
            ("desk_n_test", "8"),
            ("desk_d", "4"),
        ]);
        assert_eq!(execute(&dro).unwrap().final_record().iteration, 15);
    }

    #[test]
    fn restart_budget_comes_from_schedule() {
        let spec = spec_from(&[
            ("experiment", "synthetic"),
            ("algorithm", "restart"),
            ("epsilon0", "2.0"),
            ("epsilon", "0.9"),
            ("theta", "0.25"),
            ("c", "10.0"),
        ]);
        let out = execute(&spec).unwrap();
        let schedule = RestartSchedule::new(2.0, 0.9, 0.25, 10.0).unwrap();
        let total: usize = schedule.stage_lengths().iter().sum();
        assert_eq!(out.final_record().iteration, total);
    }

    #[test]
    fn missing_train_file_is_a_data_error() {
        let spec = spec_from(&[
            ("experiment", "dro"),
            ("algorithm", "pdg"),
            ("T", "5"),
            ("train_path", "/nonexistent/file.libsvm"),
        ]);
        let err = execute(&spec).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
