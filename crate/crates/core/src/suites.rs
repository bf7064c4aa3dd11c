//! Randomized validation suites for the theory-level inequalities the
//! solvers rely on: the constrained-to-unconstrained surrogate reduction,
//! regret decay of both bettors, the KL triangle-style bound, and wealth
//! positivity. The benchmark harness's acceptance tests drive these with
//! pinned seeds; they are ordinary library code so the checks stay
//! reproducible from anywhere.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bettor::{BettorState, Centering};
use crate::feasible::FeasibleSet;
use crate::metrics::kl;
use crate::simplex_bettor::{CoinSign, SimplexBettorState};
use crate::vector::DenseVector;

/// Slack added to the right-hand side of every checked inequality.
pub const SUITE_TOL: f64 = 1e-9;

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> DenseVector {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseVector::new(v).expect("gaussian draw is finite")
}

/// Scales to Euclidean norm at most `cap` (no-op when already inside).
fn cap_norm2(v: &DenseVector, cap: f64) -> DenseVector {
    let n = v.norm2();
    if n > cap {
        v.scale(cap / n)
    } else {
        v.clone()
    }
}

fn clamp_inf(v: &DenseVector, cap: f64) -> DenseVector {
    DenseVector::new(v.as_slice().iter().map(|x| x.clamp(-cap, cap)).collect())
        .expect("clamp keeps values finite")
}

/// Random point of the ball or box, uniform enough for comparator duty.
fn random_point(rng: &mut ChaCha8Rng, set: &FeasibleSet) -> DenseVector {
    let raw = gaussian(rng, set.dim()).scale(rng.random_range(0.1..2.0));
    set.project(&raw).expect("projection of a finite point")
}

/// How a suite sequence picks its gradients.
#[derive(Clone, Copy)]
enum Adversary {
    /// Mean-shifted i.i.d. noise.
    BiasedIid,
    /// Sign of a fixed direction flipped every 32 rounds, plus noise.
    BlockFlip,
    /// Points along the current play: the worst case for a bettor.
    Tracking,
}

const BLOCK: usize = 32;

fn euclidean_grad(
    rng: &mut ChaCha8Rng,
    mode: Adversary,
    bias: &DenseVector,
    round: usize,
    play: &DenseVector,
) -> DenseVector {
    let dim = bias.dim();
    let g = match mode {
        Adversary::BiasedIid => {
            let mut g = gaussian(rng, dim).scale(0.5);
            g.add_assign_scaled(bias, 1.0).expect("same dims");
            g
        }
        Adversary::BlockFlip => {
            let sign = if (round / BLOCK).is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut g = gaussian(rng, dim).scale(0.1);
            g.add_assign_scaled(bias, sign).expect("same dims");
            g
        }
        Adversary::Tracking => {
            let n = play.norm2();
            if n > 1e-12 {
                play.scale(1.0 / n)
            } else {
                let d = gaussian(rng, dim);
                let dn = d.norm2().max(1e-12);
                d.scale(1.0 / dn)
            }
        }
    };
    cap_norm2(&g, 1.0)
}

/// Outcome of the surrogate-reduction suite.
#[derive(Clone, Copy, Debug)]
pub struct ReductionReport {
    pub sequences: usize,
    pub comparisons: usize,
    pub violations: usize,
    /// Largest signed value of (original regret - 2 x surrogate regret);
    /// negative means the bound held with room to spare.
    pub max_excess: f64,
}

/// Checks, on `sequences` random constrained linear-loss runs (dims 1..=10,
/// horizons up to 200, balls and boxes), that the original average regret of
/// the projected plays is at most twice the surrogate average regret of the
/// unconstrained iterates, for every sampled comparator.
///
/// Losses are l_t(x) = <g_t, x> and surrogates
/// s_t(x) = (⟨g_t, x⟩ + |g_t| dist(x, X)) / 2.
pub fn surrogate_reduction_suite(seed: u64, sequences: usize) -> ReductionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ReductionReport {
        sequences,
        comparisons: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
    };

    for seq in 0..sequences {
        let dim = rng.random_range(1..=10);
        let t = rng.random_range(1..=200);
        let set = if seq % 2 == 0 {
            let radius = rng.random_range(0.1..5.0);
            FeasibleSet::l2_ball(radius, DenseVector::zeros(dim)).expect("valid ball")
        } else {
            let lower: Vec<f64> = (0..dim).map(|_| -rng.random_range(0.1..3.0)).collect();
            let upper: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..3.0)).collect();
            FeasibleSet::box_set(
                DenseVector::new(lower).expect("finite"),
                DenseVector::new(upper).expect("finite"),
            )
            .expect("valid box")
        };
        let x0 = random_point(&mut rng, &set);
        let mode = match seq % 3 {
            0 => Adversary::BiasedIid,
            1 => Adversary::BlockFlip,
            _ => Adversary::Tracking,
        };
        let bias = cap_norm2(&gaussian(&mut rng, dim), 0.5);

        // x0-anchored bets keep wealth positive for any unit-capped losses,
        // so the run cannot abort and the suite exercises full horizons.
        let mut bettor = BettorState::new(x0.clone(), Centering::X0);
        let mut grads: Vec<DenseVector> = Vec::with_capacity(t);
        let mut played: Vec<DenseVector> = Vec::with_capacity(t);
        let mut unconstrained: Vec<DenseVector> = Vec::with_capacity(t);
        let mut play = x0.clone();
        for round in 0..t {
            unconstrained.push(bettor.current_unconstrained().clone());
            let g = euclidean_grad(&mut rng, mode, &bias, round, &play);
            play = bettor
                .oco_round(&set, &g, 1.0)
                .expect("unit-capped losses keep wealth positive");
            played.push(play.clone());
            grads.push(g);
        }

        // Random feasible comparators plus the boundary minimizer of the
        // summed loss, the hardest comparator for linear losses.
        let mut comparators: Vec<DenseVector> =
            (0..5).map(|_| random_point(&mut rng, &set)).collect();
        let mut total = DenseVector::zeros(dim);
        for g in &grads {
            total.add_assign_scaled(g, -1.0).expect("same dims");
        }
        comparators.push(set.project(&total.scale(1e6)).expect("finite"));

        for u in &comparators {
            let mut orig = 0.0;
            let mut surr = 0.0;
            for i in 0..t {
                let g = &grads[i];
                orig += g.dot(&played[i]).expect("dims") - g.dot(u).expect("dims");
                let xt = &unconstrained[i];
                let s_play = 0.5
                    * (g.dot(xt).expect("dims")
                        + g.norm2() * set.distance(xt).expect("dims"));
                let s_u = 0.5 * g.dot(u).expect("dims");
                surr += s_play - s_u;
            }
            let excess = orig / t as f64 - 2.0 * surr / t as f64;
            report.comparisons += 1;
            report.max_excess = report.max_excess.max(excess);
            if excess > SUITE_TOL {
                report.violations += 1;
            }
        }
    }
    report
}

/// Mean average regret of the Euclidean bettor against the best fixed point
/// of the unit ball, measured at horizons `t` and `4t` on the same 50
/// sequences (half mean-shifted i.i.d., half 32-round block sign flips).
pub fn euclidean_regret_pair(seed: u64, t: usize) -> (f64, f64) {
    assert!(t >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 5;
    let set = FeasibleSet::l2_ball(1.0, DenseVector::zeros(dim)).expect("unit ball");
    let runs = 50;
    let mut at_t = 0.0;
    let mut at_4t = 0.0;

    for seq in 0..runs {
        let mode = if seq % 2 == 0 {
            Adversary::BiasedIid
        } else {
            Adversary::BlockFlip
        };
        let bias = cap_norm2(&gaussian(&mut rng, dim), 0.3);
        let mut bettor = BettorState::new(DenseVector::zeros(dim), Centering::X0);
        let mut play = DenseVector::zeros(dim);
        let mut loss_sum = 0.0;
        let mut grad_total = DenseVector::zeros(dim);
        for round in 0..4 * t {
            let g = euclidean_grad(&mut rng, mode, &bias, round, &play);
            play = bettor
                .oco_round(&set, &g, 1.0)
                .expect("unit-capped losses keep wealth positive");
            loss_sum += g.dot(&play).expect("dims");
            grad_total.add_assign_scaled(&g, 1.0).expect("dims");
            // Best fixed point of the ball is -r * sum / |sum|, giving
            // regret sum<g, x> + r |sum g|.
            if round + 1 == t {
                at_t += (loss_sum + grad_total.norm2()) / t as f64;
            }
        }
        at_4t += (loss_sum + grad_total.norm2()) / (4 * t) as f64;
    }
    (at_t / runs as f64, at_4t / runs as f64)
}

fn simplex_grad(rng: &mut ChaCha8Rng, bias: &DenseVector) -> DenseVector {
    let dim = bias.dim();
    let mut g = gaussian(rng, dim).scale(0.5);
    g.add_assign_scaled(bias, 1.0).expect("dims");
    clamp_inf(&g, 1.0)
}

/// Mean average regret of the simplex bettor against the best vertex at
/// horizons `t` and `4t` on 50 infinity-norm-capped loss sequences, half
/// pure noise and half mean-shifted noise.
///
/// Sequences here are i.i.d. on purpose: against strongly nonstationary
/// losses an adaptive player beats every fixed vertex, the regret goes
/// negative, and a decay ratio stops meaning anything.
pub fn simplex_regret_pair(seed: u64, t: usize, coin_sign: CoinSign) -> (f64, f64) {
    assert!(t >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 10;
    let runs = 50;
    let mut at_t = 0.0;
    let mut at_4t = 0.0;

    for seq in 0..runs {
        let bias_raw: Vec<f64> = if seq % 2 == 0 {
            vec![0.0; dim]
        } else {
            (0..dim).map(|_| rng.random_range(-0.3..0.3)).collect()
        };
        let bias = DenseVector::new(bias_raw).expect("finite");
        let mut bettor = SimplexBettorState::uniform(dim, coin_sign).expect("uniform prior");
        let mut loss_sum = 0.0;
        let mut coord_totals = DenseVector::zeros(dim);
        for round in 0..4 * t {
            let p = bettor.simplex_play();
            let g = simplex_grad(&mut rng, &bias);
            bettor
                .simplex_absorb(&g)
                .expect("unit-capped losses keep wealths positive");
            loss_sum += g.dot(&p).expect("dims");
            coord_totals.add_assign_scaled(&g, 1.0).expect("dims");
            if round + 1 == t {
                let best = (0..dim).map(|i| coord_totals.get(i)).fold(f64::INFINITY, f64::min);
                at_t += (loss_sum - best) / t as f64;
            }
        }
        let best = (0..dim).map(|i| coord_totals.get(i)).fold(f64::INFINITY, f64::min);
        at_4t += (loss_sum - best) / (4 * t) as f64;
    }
    (at_t / runs as f64, at_4t / runs as f64)
}

/// Constant in front of |p - q|_1 in the KL triangle-style bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlConstant {
    /// max_i max(ln(q_i / pi_i), 0): positive parts only.
    PositivePart,
    /// max_i |ln(q_i / pi_i)|: provable via the exact decomposition
    /// KL(p,pi) = KL(p,q) + KL(q,pi) + sum (p_i - q_i) ln(q_i / pi_i)
    /// and Hoelder on the cross term.
    AbsoluteValue,
}

/// Outcome of the KL-bound suite.
#[derive(Clone, Copy, Debug)]
pub struct KlBoundReport {
    pub triples: usize,
    pub violations: usize,
    /// Largest signed value of (LHS - RHS); positive means violated.
    pub max_violation: f64,
}

fn interior_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> DenseVector {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(0.001..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DenseVector::new(raw.iter().map(|v| v / total).collect()).expect("finite")
}

fn check_kl_bound(
    p: &DenseVector,
    q: &DenseVector,
    pi: &DenseVector,
    constant: KlConstant,
) -> f64 {
    let lhs = kl(p, pi).expect("interior points").value;
    let mut c = 0.0_f64;
    let mut l1 = 0.0;
    for i in 0..p.dim() {
        let log_ratio = (q.get(i) / pi.get(i)).ln();
        c = match constant {
            KlConstant::PositivePart => c.max(log_ratio.max(0.0)),
            KlConstant::AbsoluteValue => c.max(log_ratio.abs()),
        };
        l1 += (p.get(i) - q.get(i)).abs();
    }
    let rhs = kl(p, q).expect("interior points").value
        + kl(q, pi).expect("interior points").value
        + c * l1;
    lhs - rhs
}

/// Checks KL(p,pi) <= KL(p,q) + KL(q,pi) + c * |p-q|_1 on random interior
/// simplex triples with dimensions 2..=6, where `c` is chosen by `constant`.
pub fn kl_bound_suite(seed: u64, triples: usize, constant: KlConstant) -> KlBoundReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = KlBoundReport {
        triples,
        violations: 0,
        max_violation: f64::NEG_INFINITY,
    };
    for _ in 0..triples {
        let dim = rng.random_range(2..=6);
        let p = interior_simplex_point(&mut rng, dim);
        let q = interior_simplex_point(&mut rng, dim);
        let pi = interior_simplex_point(&mut rng, dim);
        let gap = check_kl_bound(&p, &q, &pi, constant);
        report.max_violation = report.max_violation.max(gap);
        if gap > SUITE_TOL {
            report.violations += 1;
        }
    }
    report
}

/// A fixed triple violating the positive-part form of the bound:
/// p = (0.05, 0.95), q = (0.1, 0.9), pi = (0.5, 0.5) gives
/// LHS 0.49463 against RHS 0.44355. The absolute-value form holds on it.
pub fn kl_bound_counterexample() -> (DenseVector, DenseVector, DenseVector) {
    (
        DenseVector::new(vec![0.05, 0.95]).expect("finite"),
        DenseVector::new(vec![0.1, 0.9]).expect("finite"),
        DenseVector::new(vec![0.5, 0.5]).expect("finite"),
    )
}

/// Signed slack of the bound on one triple: positive means violated.
pub fn kl_bound_excess(
    p: &DenseVector,
    q: &DenseVector,
    pi: &DenseVector,
    constant: KlConstant,
) -> f64 {
    check_kl_bound(p, q, pi, constant)
}

/// Outcome of the wealth-positivity suite.
#[derive(Clone, Copy, Debug)]
pub struct WealthReport {
    pub sequences: usize,
    /// Smallest wealth observed after any bettor step.
    pub min_wealth: f64,
    /// Runs aborted by wealth exhaustion (expected zero with x0 anchoring).
    pub exhaustions: usize,
}

/// Runs the Euclidean bettor on random unit-capped loss sequences (balls,
/// random starts, x0 anchoring, tracking adversaries included) and records
/// the minimum wealth ever seen.
pub fn wealth_suite(seed: u64, sequences: usize) -> WealthReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = WealthReport {
        sequences,
        min_wealth: f64::INFINITY,
        exhaustions: 0,
    };
    for seq in 0..sequences {
        let dim = rng.random_range(1..=6);
        let t = rng.random_range(1..=300);
        let radius = rng.random_range(0.5..3.0);
        let set = FeasibleSet::l2_ball(radius, DenseVector::zeros(dim)).expect("valid ball");
        let x0 = random_point(&mut rng, &set);
        let mode = match seq % 3 {
            0 => Adversary::BiasedIid,
            1 => Adversary::BlockFlip,
            _ => Adversary::Tracking,
        };
        let bias = cap_norm2(&gaussian(&mut rng, dim), 0.5);
        let mut bettor = BettorState::new(x0.clone(), Centering::X0);
        let mut play = x0.clone();
        for round in 0..t {
            let g = euclidean_grad(&mut rng, mode, &bias, round, &play);
            match bettor.oco_round(&set, &g, 1.0) {
                Ok(x) => {
                    play = x;
                    report.min_wealth = report.min_wealth.min(bettor.wealth_offset());
                }
                Err(_) => {
                    report.exhaustions += 1;
                    break;
                }
            }
        }
    }
    report
}
