//! Evaluation: duality gaps (exact for the synthetic problem, estimated for
//! DRO), KL divergence, hinge losses, and regret accounting, plus the trace
//! record type solvers emit.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::problems::{DroProblem, Problem, RegularizerSign, SaddleOracle, SyntheticProblem};
use crate::vector::DenseVector;

/// Number of projected-gradient steps in the DRO inner-minimization
/// estimate. Fixed so that `approx` gaps are comparable across algorithms.
pub const DRO_INNER_MIN_STEPS: usize = 500;

/// One row of a solver trace. Which optional fields are populated depends
/// on the problem: the synthetic problem has exact gaps and a known
/// optimum; DRO has losses and the robust objective, and its gap is an
/// estimate (`gap_exact = false`) that under-reports the true gap.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// 1-based iteration the averages were taken at; strictly increasing
    /// within a trace.
    pub iteration: usize,
    /// Wall-clock seconds since the run started; None when timing is off.
    pub elapsed_seconds: Option<f64>,
    /// Problem-defined scalar summaries of the averaged iterates (the
    /// scalar iterates themselves for the synthetic problem; norm of the
    /// average weight vector and max dual weight for DRO).
    pub avg_x_stat: f64,
    pub avg_y_stat: f64,
    pub gap: Option<f64>,
    pub gap_exact: bool,
    pub dist_to_opt: Option<f64>,
    pub train_loss: Option<f64>,
    pub test_loss: Option<f64>,
    pub robust_objective: Option<f64>,
    pub regret_x: Option<f64>,
    pub regret_y: Option<f64>,
}

impl RunRecord {
    /// A record with only iteration and timing filled in.
    pub fn bare(iteration: usize, elapsed_seconds: Option<f64>) -> Self {
        RunRecord {
            iteration,
            elapsed_seconds,
            avg_x_stat: 0.0,
            avg_y_stat: 0.0,
            gap: None,
            gap_exact: false,
            dist_to_opt: None,
            train_loss: None,
            test_loss: None,
            robust_objective: None,
            regret_x: None,
            regret_y: None,
        }
    }
}

/// KL divergence value in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlDivergence {
    pub value: f64,
}

/// `KL(p, q) = sum_i p_i ln(p_i / q_i)` with `0 ln 0 = 0`.
///
/// # Errors
/// `InfiniteKl` where `p` puts mass on a coordinate `q` gives zero.
pub fn kl(p: &DenseVector, q: &DenseVector) -> Result<KlDivergence> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let mut acc = 0.0;
    for i in 0..p.dim() {
        let (pi, qi) = (p.get(i), q.get(i));
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::InfiniteKl { index: i });
            }
            acc += pi * (pi / qi).ln();
        }
    }
    Ok(KlDivergence { value: acc })
}

/// Mean and per-sample hinge losses of `w` on a dataset, with fixed-order
/// summation for the mean.
pub fn hinge_losses(ds: &Dataset, w: &DenseVector) -> Result<(f64, DenseVector)> {
    let per_sample: Vec<f64> = ds
        .iter()
        .map(|(x, y)| (1.0 - y * x.dot_dense(w)).max(0.0))
        .collect();
    let mut acc = 0.0;
    for v in &per_sample {
        acc += v;
    }
    let mean = acc / ds.n() as f64;
    Ok((mean, DenseVector::new(per_sample)?))
}

/// Cumulative linear-loss regret of a play sequence against a fixed
/// comparator: `sum_t <g_t, x_t> - sum_t <g_t, u>`.
pub fn regret(plays: &[DenseVector], grads: &[DenseVector], comparator: &DenseVector) -> Result<f64> {
    if plays.len() != grads.len() {
        return Err(Error::DimensionMismatch {
            expected: plays.len(),
            got: grads.len(),
        });
    }
    let mut acc = 0.0;
    for (x, g) in plays.iter().zip(grads) {
        acc += g.dot(x)? - g.dot(comparator)?;
    }
    Ok(acc)
}

/// Duality gap `max_y F(x_bar, y) - min_x F(x, y_bar)` at averaged
/// iterates. Returns `(gap, exact)`.
///
/// Synthetic: both inner problems in closed form, exact. DRO: the inner max
/// over the simplex is exact (vertex enumeration for the convex `+1` sign,
/// simplex projection for `-1`), but the inner min over `w` is a fixed
/// 500-step projected-gradient estimate, so the result is flagged inexact
/// and under-reports the true gap.
pub fn duality_gap(problem: &Problem, x_bar: &DenseVector, y_bar: &DenseVector) -> Result<(f64, bool)> {
    match problem {
        Problem::Synthetic(p) => Ok((synthetic_gap(p, x_bar, y_bar), true)),
        Problem::Dro(p) => {
            let upper = robust_objective(p, x_bar)?;
            let lower = dro_inner_min(p, y_bar, x_bar)?;
            Ok((upper - lower, false))
        }
    }
}

fn synthetic_gap(p: &SyntheticProblem, x_bar: &DenseVector, y_bar: &DenseVector) -> f64 {
    p.exact_gap(x_bar.only(), y_bar.only())
}

/// Exact worst-case objective `max_p F(w, p)` for a DRO problem.
///
/// With the convex `+1` regularizer sign the maximum over the simplex is
/// attained at a vertex, and `||e_i - 1/n||^2` is the same for every vertex,
/// so the answer is `max_i l_i + (lambda/2)((1-1/n)^2 + (n-1)/n^2)` plus the
/// `w` regularizer. With the concave `-1` sign the maximizer is the simplex
/// projection of `1/n + l/lambda`.
pub fn robust_objective(dro: &DroProblem, w: &DenseVector) -> Result<f64> {
    let losses = dro.hinges(w)?;
    let n = dro.n() as f64;
    let ridge = dro.rho() / 2.0 * w.dot(w)?;
    let lambda = dro.lambda();
    match dro.sign() {
        RegularizerSign::Plus => {
            let max_loss = losses.as_slice().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let vertex_dist_sq = (1.0 - 1.0 / n).powi(2) + (n - 1.0) / (n * n);
            Ok(max_loss + lambda / 2.0 * vertex_dist_sq + ridge)
        }
        RegularizerSign::Minus => {
            if lambda == 0.0 {
                let max_loss =
                    losses.as_slice().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                return Ok(max_loss + ridge);
            }
            let target: Vec<f64> = losses
                .as_slice()
                .iter()
                .map(|&l| 1.0 / n + l / lambda)
                .collect();
            let p_star = dro
                .set_p()
                .project(&DenseVector::new(target)?)?;
            let value = dro.value(w, &p_star)?;
            Ok(value)
        }
    }
}

/// Estimated best response `min_w F(w, p)` at fixed dual weights: 500
/// projected-gradient steps from `w_start` with step `1/(rho*k)`, returning
/// the best objective value visited (including the start). This is an
/// over-estimate of the true minimum, making the resulting gap an
/// under-estimate.
pub fn dro_inner_min(dro: &DroProblem, p: &DenseVector, w_start: &DenseVector) -> Result<f64> {
    let ball = dro.set_w();
    let mut w = ball.project(w_start)?;
    let mut best = dro.value(&w, p)?;
    for k in 1..=DRO_INNER_MIN_STEPS {
        let (gw, _) = dro.subgrads(&w, p)?;
        let step = if dro.rho() > 0.0 {
            1.0 / (dro.rho() * k as f64)
        } else {
            1.0 / k as f64
        };
        let mut next = w.clone();
        next.add_assign_scaled(&gw, -step)?;
        w = ball.project(&next)?;
        let value = dro.value(&w, p)?;
        if value < best {
            best = value;
        }
    }
    Ok(best)
}
