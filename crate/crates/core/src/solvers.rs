//! Min-max drivers: the coin-betting saddle-point solver, its simplex-dual
//! variant, a restarted schedule for problems with growth, and primal-dual
//! gradient baselines.
//!
//! All solvers share the same shape: project both iterates, query the
//! oracle exactly once per round, feed each side's learner, and return
//! uniform averages plus a metric trace. Feasibility and gradient-scale
//! invariants are enforced every round; violations abort the run with the
//! offending iteration attached.

use std::time::Instant;

use crate::bettor::{surrogate_grad, BettorState, Centering};
use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::metrics::RunRecord;
use crate::problems::SaddleOracle;
use crate::simplex_bettor::{CoinSign, SimplexBettorState};
use crate::vector::DenseVector;

/// Played iterates may miss their feasible set by at most this much.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Knobs shared by all solvers. `Default` gives the parameter-free
/// configuration: initial wealth 1, origin-anchored bets, regret-oriented
/// simplex coins, automatic trace cadence, timing off.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Initial betting wealth epsilon'.
    pub epsilon_prime: f64,
    /// Bet anchoring for the Euclidean bettors.
    pub centering: Centering,
    /// Coin orientation for the simplex bettor.
    pub coin_sign: CoinSign,
    /// Trace every this many iterations; 0 means max(1, T/1000).
    pub record_every: usize,
    /// Record wall-clock time in the trace. Off by default so identical
    /// configs produce identical traces.
    pub timing: bool,
    /// Scale gradients by the running max norm seen so far instead of the
    /// oracle's a-priori bound.
    pub adaptive_scaling: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            epsilon_prime: 1.0,
            centering: Centering::default(),
            coin_sign: CoinSign::default(),
            record_every: 0,
            timing: false,
            adaptive_scaling: false,
        }
    }
}

/// Averages and trace returned by every solver.
#[derive(Clone, Debug)]
pub struct SolverOutput {
    /// Uniform average of played primal iterates; feasible by convexity.
    pub x_bar: DenseVector,
    /// Uniform average of played dual iterates.
    pub y_bar: DenseVector,
    pub trace: Vec<RunRecord>,
}

/// Snapshot handed to the metric callback at trace cadence.
pub struct TracePoint<'a> {
    /// 1-based iteration count included in the averages.
    pub iteration: usize,
    /// Seconds since the solve started, when timing is on.
    pub elapsed_seconds: Option<f64>,
    pub x_bar: &'a DenseVector,
    pub y_bar: &'a DenseVector,
}

/// Metric callback: turns a trace snapshot into a full record. Solvers know
/// nothing about gaps or losses; the caller decides what to evaluate.
pub type MetricFn<'a> = dyn FnMut(&TracePoint) -> RunRecord + 'a;

/// A metric that records nothing beyond iteration and timing.
pub fn bare_metric(tp: &TracePoint) -> RunRecord {
    RunRecord::bare(tp.iteration, tp.elapsed_seconds)
}

fn effective_cadence(record_every: usize, t: usize) -> usize {
    if record_every > 0 {
        record_every
    } else {
        (t / 1000).max(1)
    }
}

fn require_feasible(name: &str, set: &FeasibleSet, point: &DenseVector, tol: f64) -> Result<()> {
    if !set.contains(point, tol) {
        return Err(Error::InvalidArgument(format!(
            "{name} must lie in its feasible set"
        )));
    }
    Ok(())
}

fn scale_to_unit(g: &DenseVector, bound: f64) -> DenseVector {
    if bound > 0.0 {
        g.scale(1.0 / bound)
    } else {
        g.clone()
    }
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Clock {
            start: Instant::now(),
            enabled,
        }
    }

    fn elapsed(&self) -> Option<f64> {
        self.enabled.then(|| self.start.elapsed().as_secs_f64())
    }
}

/// Runs the two-sided coin-betting solver for `t` rounds.
///
/// Each round projects both unconstrained iterates, queries the oracle once
/// at the played pair, scales the primal subgradient by `G_x` and the dual
/// (of `-F`) by `G_y` in Euclidean norm, and feeds each side's bettor its
/// surrogate gradient. Returns uniform averages of played iterates.
#[allow(clippy::too_many_arguments)]
pub fn cb_min_max(
    oracle: &dyn SaddleOracle,
    x_set: &FeasibleSet,
    y_set: &FeasibleSet,
    x0: &DenseVector,
    y0: &DenseVector,
    t: usize,
    opts: &SolverOptions,
    metric: &mut MetricFn,
) -> Result<SolverOutput> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be >= 1".into()));
    }
    require_feasible("x0", x_set, x0, 1e-9)?;
    require_feasible("y0", y_set, y0, 1e-9)?;

    let mut bettor_x = BettorState::new(x0.clone(), opts.centering);
    let mut bettor_y = BettorState::new(y0.clone(), opts.centering);
    let mut sum_x = DenseVector::zeros(x0.dim());
    let mut sum_y = DenseVector::zeros(y0.dim());
    let mut running_gx = 0.0_f64;
    let mut running_gy = 0.0_f64;
    let cadence = effective_cadence(opts.record_every, t);
    let clock = Clock::new(opts.timing);
    let mut trace = Vec::new();

    for it in 1..=t {
        let step = |e: Error| e.at_iteration(it);
        let x = x_set.project(bettor_x.current_unconstrained()).map_err(step)?;
        let y = y_set.project(bettor_y.current_unconstrained()).map_err(step)?;
        require_feasible("played x", x_set, &x, FEASIBILITY_TOL).map_err(step)?;
        require_feasible("played y", y_set, &y, FEASIBILITY_TOL).map_err(step)?;
        sum_x.add_assign_scaled(&x, 1.0).map_err(step)?;
        sum_y.add_assign_scaled(&y, 1.0).map_err(step)?;

        let (gx, gy) = oracle.subgrads(&x, &y).map_err(step)?;
        let bound_x = if opts.adaptive_scaling {
            running_gx = running_gx.max(gx.norm2());
            running_gx
        } else {
            oracle.bound_x()
        };
        let bound_y = if opts.adaptive_scaling {
            running_gy = running_gy.max(gy.norm2());
            running_gy
        } else {
            oracle.bound_y()
        };
        let sx = scale_to_unit(&gx, bound_x);
        let sy = scale_to_unit(&gy, bound_y);

        let gx_s = surrogate_grad(&sx, bettor_x.current_unconstrained(), &x).map_err(step)?;
        bettor_x
            .bettor_step(&gx_s, opts.epsilon_prime)
            .map_err(|e| e.at_iteration(it))?;
        let gy_s = surrogate_grad(&sy, bettor_y.current_unconstrained(), &y)
            .map_err(|e| e.at_iteration(it))?;
        bettor_y
            .bettor_step(&gy_s, opts.epsilon_prime)
            .map_err(|e| e.at_iteration(it))?;

        if it % cadence == 0 || it == t {
            let scale = 1.0 / it as f64;
            let x_bar = sum_x.scale(scale);
            let y_bar = sum_y.scale(scale);
            trace.push(metric(&TracePoint {
                iteration: it,
                elapsed_seconds: clock.elapsed(),
                x_bar: &x_bar,
                y_bar: &y_bar,
            }));
        }
    }

    let scale = 1.0 / t as f64;
    Ok(SolverOutput {
        x_bar: sum_x.scale(scale),
        y_bar: sum_y.scale(scale),
        trace,
    })
}

/// Runs the coin-betting solver with a simplex dual: the primal side is the
/// Euclidean bettor, the dual side the simplex bettor fed the subgradient
/// of `-F(x_t, .)` scaled by `G_y` in infinity norm.
pub fn cb_min_max_simplex(
    oracle: &dyn SaddleOracle,
    x_set: &FeasibleSet,
    x0: &DenseVector,
    p0: &DenseVector,
    t: usize,
    opts: &SolverOptions,
    metric: &mut MetricFn,
) -> Result<SolverOutput> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be >= 1".into()));
    }
    require_feasible("x0", x_set, x0, 1e-9)?;
    if p0.dim() != oracle.dim_y() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim_y(),
            got: p0.dim(),
        });
    }

    let mut bettor_x = BettorState::new(x0.clone(), opts.centering);
    // Validates the open-simplex precondition on p0.
    let mut bettor_p = SimplexBettorState::new(p0.clone(), opts.coin_sign)?;
    let p_simplex = FeasibleSet::simplex(p0.dim())?;
    let mut sum_x = DenseVector::zeros(x0.dim());
    let mut sum_p = DenseVector::zeros(p0.dim());
    let mut running_gx = 0.0_f64;
    let mut running_gp = 0.0_f64;
    let cadence = effective_cadence(opts.record_every, t);
    let clock = Clock::new(opts.timing);
    let mut trace = Vec::new();

    for it in 1..=t {
        let step = |e: Error| e.at_iteration(it);
        let x = x_set.project(bettor_x.current_unconstrained()).map_err(step)?;
        require_feasible("played x", x_set, &x, FEASIBILITY_TOL).map_err(step)?;
        let p = bettor_p.simplex_play();
        require_feasible("played p", &p_simplex, &p, FEASIBILITY_TOL).map_err(step)?;
        sum_x.add_assign_scaled(&x, 1.0).map_err(step)?;
        sum_p.add_assign_scaled(&p, 1.0).map_err(step)?;

        let (gx, gp) = oracle.subgrads(&x, &p).map_err(step)?;
        let bound_x = if opts.adaptive_scaling {
            running_gx = running_gx.max(gx.norm2());
            running_gx
        } else {
            oracle.bound_x()
        };
        let bound_p = if opts.adaptive_scaling {
            running_gp = running_gp.max(gp.norm_inf());
            running_gp
        } else {
            oracle.bound_y()
        };
        let sx = scale_to_unit(&gx, bound_x);
        let sp = scale_to_unit(&gp, bound_p);

        let gx_s = surrogate_grad(&sx, bettor_x.current_unconstrained(), &x).map_err(step)?;
        bettor_x
            .bettor_step(&gx_s, opts.epsilon_prime)
            .map_err(|e| e.at_iteration(it))?;
        bettor_p
            .simplex_absorb(&sp)
            .map_err(|e| e.at_iteration(it))?;

        if it % cadence == 0 || it == t {
            let scale = 1.0 / it as f64;
            let x_bar = sum_x.scale(scale);
            let p_bar = sum_p.scale(scale);
            trace.push(metric(&TracePoint {
                iteration: it,
                elapsed_seconds: clock.elapsed(),
                x_bar: &x_bar,
                y_bar: &p_bar,
            }));
        }
    }

    let scale = 1.0 / t as f64;
    Ok(SolverOutput {
        x_bar: sum_x.scale(scale),
        y_bar: sum_p.scale(scale),
        trace,
    })
}

/// Stage schedule for the restarted solver: stage `s` (1-based) targets
/// accuracy `epsilon0 / 2^s` and runs `ceil(C / eps_s^(2 - 2 theta))`
/// iterations, until the target accuracy is reached.
#[derive(Clone, Copy, Debug)]
pub struct RestartSchedule {
    /// Upper bound on the initial duality gap.
    pub epsilon0: f64,
    /// Target accuracy; must be below `epsilon0 / 2`.
    pub epsilon: f64,
    /// Growth exponent in (0, 1/2].
    pub theta: f64,
    /// Multiplicative complexity constant in the stage-length formula.
    pub c: f64,
}

impl RestartSchedule {
    pub fn new(epsilon0: f64, epsilon: f64, theta: f64, c: f64) -> Result<Self> {
        for (name, v) in [("epsilon0", epsilon0), ("epsilon", epsilon), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(theta > 0.0 && theta <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "theta must be in (0, 0.5], got {theta}"
            )));
        }
        if epsilon >= epsilon0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon {epsilon} must be below epsilon0 {epsilon0}"
            )));
        }
        let schedule = RestartSchedule {
            epsilon0,
            epsilon,
            theta,
            c,
        };
        if schedule.stages() == 0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon0/epsilon ratio {} gives zero stages",
                epsilon0 / epsilon
            )));
        }
        Ok(schedule)
    }

    /// Number of stages `floor(log2(epsilon0 / epsilon))`.
    pub fn stages(&self) -> usize {
        ((self.epsilon0 / self.epsilon).log2() + 1e-12).floor() as usize
    }

    /// Iteration count per stage. The tiny slack before `ceil` absorbs libm
    /// rounding when the power is exactly representable.
    pub fn stage_lengths(&self) -> Vec<usize> {
        let expo = 2.0 - 2.0 * self.theta;
        (1..=self.stages())
            .map(|s| {
                let eps_s = self.epsilon0 / 2f64.powi(s as i32);
                let raw = self.c / eps_s.powf(expo);
                ((raw - 1e-9).ceil() as usize).max(1)
            })
            .collect()
    }
}

/// Runs the restarted coin-betting solver: each stage invokes `cb_min_max`
/// warm-started from the previous stage's averaged output. The trace
/// concatenates stage traces with globally increasing iteration numbers
/// (each stage's final iteration is always recorded, marking the
/// boundary); averages in the output are the final stage's.
#[allow(clippy::too_many_arguments)]
pub fn restart_cb_min_max(
    oracle: &dyn SaddleOracle,
    x_set: &FeasibleSet,
    y_set: &FeasibleSet,
    x0: &DenseVector,
    y0: &DenseVector,
    schedule: &RestartSchedule,
    opts: &SolverOptions,
    metric: &mut MetricFn,
) -> Result<SolverOutput> {
    let lengths = schedule.stage_lengths();
    let clock = Clock::new(opts.timing);
    let mut x_start = x0.clone();
    let mut y_start = y0.clone();
    let mut trace = Vec::new();
    let mut offset = 0usize;
    let mut final_averages: Option<(DenseVector, DenseVector)> = None;

    for &stage_len in &lengths {
        let mut wrapped = |tp: &TracePoint| -> RunRecord {
            metric(&TracePoint {
                iteration: offset + tp.iteration,
                elapsed_seconds: clock.elapsed(),
                x_bar: tp.x_bar,
                y_bar: tp.y_bar,
            })
        };
        let out = cb_min_max(
            oracle,
            x_set,
            y_set,
            &x_start,
            &y_start,
            stage_len,
            opts,
            &mut wrapped,
        )
        .map_err(|e| match e {
            // Re-key inner iteration numbers to the global count.
            Error::AtIteration { iteration, source } => Error::AtIteration {
                iteration: offset + iteration,
                source,
            },
            other => other,
        })?;
        offset += stage_len;
        trace.extend(out.trace);
        x_start = out.x_bar.clone();
        y_start = out.y_bar.clone();
        final_averages = Some((out.x_bar, out.y_bar));
    }

    let (x_bar, y_bar) = final_averages.expect("at least one stage");
    Ok(SolverOutput { x_bar, y_bar, trace })
}

/// Geometry of the dual update in the primal-dual gradient baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DualGeometry {
    #[default]
    Euclidean,
    /// Multiplicative-weights update on the simplex.
    Entropic,
}

impl std::str::FromStr for DualGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DualGeometry::Euclidean),
            "entropic" => Ok(DualGeometry::Entropic),
            other => Err(Error::InvalidArgument(format!(
                "unknown dual_geometry '{other}' (expected euclidean or entropic)"
            ))),
        }
    }
}

/// Default primal-dual step size `diameter / (G sqrt(T))`.
pub fn pdg_default_eta(set: &FeasibleSet, bound: f64, t: usize) -> f64 {
    assert!(t >= 1 && bound > 0.0);
    set.diameter() / (bound * (t as f64).sqrt())
}

/// Default entropic step size `ln(n) / (G sqrt(T))`.
pub fn entropic_default_eta(n: usize, bound: f64, t: usize) -> f64 {
    assert!(t >= 1 && n >= 1 && bound > 0.0);
    (n as f64).ln() / (bound * (t as f64).sqrt())
}

/// Runs the fixed-step primal-dual gradient baseline: projected descent on
/// `x`, and on `y` either projected descent on `-F` (Euclidean) or a
/// multiplicative-weights step (entropic, simplex duals only). Returns
/// uniform averages, like the coin-betting solvers.
#[allow(clippy::too_many_arguments)]
pub fn primal_dual_gradient(
    oracle: &dyn SaddleOracle,
    x_set: &FeasibleSet,
    y_set: &FeasibleSet,
    x0: &DenseVector,
    y0: &DenseVector,
    t: usize,
    eta_x: f64,
    eta_y: f64,
    geometry: DualGeometry,
    opts: &SolverOptions,
    metric: &mut MetricFn,
) -> Result<SolverOutput> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be >= 1".into()));
    }
    if !(eta_x > 0.0 && eta_x.is_finite() && eta_y > 0.0 && eta_y.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step sizes must be positive and finite, got eta_x={eta_x}, eta_y={eta_y}"
        )));
    }
    require_feasible("x0", x_set, x0, 1e-9)?;
    require_feasible("y0", y_set, y0, 1e-9)?;
    if geometry == DualGeometry::Entropic {
        if !matches!(y_set, FeasibleSet::Simplex { .. }) {
            return Err(Error::InvalidArgument(
                "entropic dual updates require a simplex feasible set".into(),
            ));
        }
        if (0..y0.dim()).any(|i| y0.get(i) <= 0.0) {
            return Err(Error::InvalidArgument(
                "entropic dual updates require strictly positive y0".into(),
            ));
        }
    }

    let mut x = x_set.project(x0)?;
    let mut y = y_set.project(y0)?;
    // Entropic state lives in log space so long runs cannot underflow.
    let mut log_weights: Vec<f64> = if geometry == DualGeometry::Entropic {
        y0.as_slice().iter().map(|v| v.ln()).collect()
    } else {
        Vec::new()
    };
    if geometry == DualGeometry::Entropic {
        y = normalized_from_logs(&log_weights)?;
    }
    let mut sum_x = DenseVector::zeros(x0.dim());
    let mut sum_y = DenseVector::zeros(y0.dim());
    let cadence = effective_cadence(opts.record_every, t);
    let clock = Clock::new(opts.timing);
    let mut trace = Vec::new();

    for it in 1..=t {
        let step = |e: Error| e.at_iteration(it);
        require_feasible("played x", x_set, &x, FEASIBILITY_TOL).map_err(step)?;
        require_feasible("played y", y_set, &y, FEASIBILITY_TOL).map_err(step)?;
        sum_x.add_assign_scaled(&x, 1.0).map_err(step)?;
        sum_y.add_assign_scaled(&y, 1.0).map_err(step)?;

        let (gx, gy) = oracle.subgrads(&x, &y).map_err(step)?;
        let mut next_x = x.clone();
        next_x.add_assign_scaled(&gx, -eta_x).map_err(step)?;
        x = x_set.project(&next_x).map_err(step)?;
        match geometry {
            DualGeometry::Euclidean => {
                let mut next_y = y.clone();
                next_y.add_assign_scaled(&gy, -eta_y).map_err(step)?;
                y = y_set.project(&next_y).map_err(step)?;
            }
            DualGeometry::Entropic => {
                for (lw, g) in log_weights.iter_mut().zip(gy.as_slice()) {
                    *lw -= eta_y * g;
                }
                y = normalized_from_logs(&log_weights).map_err(step)?;
            }
        }

        if it % cadence == 0 || it == t {
            let scale = 1.0 / it as f64;
            let x_bar = sum_x.scale(scale);
            let y_bar = sum_y.scale(scale);
            trace.push(metric(&TracePoint {
                iteration: it,
                elapsed_seconds: clock.elapsed(),
                x_bar: &x_bar,
                y_bar: &y_bar,
            }));
        }
    }

    let scale = 1.0 / t as f64;
    Ok(SolverOutput {
        x_bar: sum_x.scale(scale),
        y_bar: sum_y.scale(scale),
        trace,
    })
}

fn normalized_from_logs(log_weights: &[f64]) -> Result<DenseVector> {
    let max = log_weights.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let unnorm: Vec<f64> = log_weights.iter().map(|&v| (v - max).exp()).collect();
    let mut mass = 0.0;
    for v in &unnorm {
        mass += v;
    }
    DenseVector::new(unnorm.iter().map(|v| v / mass).collect())
}
