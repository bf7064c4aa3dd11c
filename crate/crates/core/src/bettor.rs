//! Euclidean parameter-free online learner: a Kelly-style coin bettor plus
//! the black-box reduction from constrained to unconstrained learning.
//!
//! Each round the learner plays the projection of an unconstrained iterate
//! onto the feasible set, builds a surrogate gradient that penalizes
//! infeasibility, and bets a fraction of its accumulated wealth against the
//! running gradient sum. No step size is involved: the betting fraction
//! (sum of coins)/(t+1) adapts on its own.

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::vector::DenseVector;

/// Slack applied to unit-norm checks on scaled gradients. Anything above
/// this signals a wrong gradient bound rather than rounding noise.
pub const SCALING_SLACK: f64 = 1e-9;

/// Where the bettor anchors its bets.
///
/// `Origin` is the update rule exactly as written (bets measured from zero);
/// `X0` measures bets from the starting point, which makes the iterates
/// orbit the start rather than the origin. Both begin playing from the same
/// first point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Centering {
    X0,
    #[default]
    Origin,
}

impl std::str::FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x0" => Ok(Centering::X0),
            "origin" => Ok(Centering::Origin),
            other => Err(Error::InvalidArgument(format!(
                "unknown centering '{other}' (expected x0 or origin)"
            ))),
        }
    }
}

/// A gradient ready for the betting recurrence: guaranteed norm at most 1
/// (up to [`SCALING_SLACK`]). Constructed only via [`surrogate_grad`].
#[derive(Clone, Debug)]
pub struct SurrogateGradient {
    g: DenseVector,
}

impl SurrogateGradient {
    pub fn g(&self) -> &DenseVector {
        &self.g
    }
}

/// The constrained-to-unconstrained surrogate gradient
/// `g = (ghat + ||ghat|| * (x_tilde - x_proj)/||x_tilde - x_proj||) / 2`,
/// with the direction term taken as zero when `x_tilde = x_proj` (the 0/0
/// convention). `x_proj` must be the projection of `x_tilde` onto the
/// feasible set.
///
/// # Errors
/// `ScalingViolation` when `||ghat|| > 1 + SCALING_SLACK`; the caller is
/// responsible for pre-scaling raw subgradients by their bound.
pub fn surrogate_grad(
    ghat: &DenseVector,
    x_tilde: &DenseVector,
    x_proj: &DenseVector,
) -> Result<SurrogateGradient> {
    let ghat_norm = ghat.norm2();
    if ghat_norm > 1.0 + SCALING_SLACK {
        return Err(Error::ScalingViolation { norm: ghat_norm });
    }
    let offset = x_tilde.sub(x_proj)?;
    let offset_norm = offset.norm2();
    let g = if offset_norm > 0.0 && ghat_norm > 0.0 {
        ghat.add(&offset.scale(ghat_norm / offset_norm))?.scale(0.5)
    } else {
        ghat.scale(0.5)
    };
    debug_assert!(g.norm2() <= 1.0 + SCALING_SLACK);
    Ok(SurrogateGradient { g })
}

/// State of the coin bettor.
///
/// Wealth starts at `epsilon_prime` (supplied per step) and loses
/// `<g, bet>` each round, where the bet is the distance of the unconstrained
/// iterate from the anchor. As long as every absorbed gradient has norm at
/// most 1, wealth stays strictly positive.
#[derive(Clone, Debug)]
pub struct BettorState {
    /// Anchor the bets are measured from: the start in `X0` centering, the
    /// origin otherwise.
    center: DenseVector,
    /// Running sum of absorbed surrogate gradients.
    grad_sum: DenseVector,
    /// Accumulated `<g_j, bet_j>`, so wealth = epsilon_prime - spent.
    spent: f64,
    /// Wealth after the most recent step; +inf before any gradient is
    /// absorbed (wealth is then epsilon_prime, not yet supplied).
    last_wealth: f64,
    /// Count of gradients absorbed.
    step: usize,
    /// Unconstrained iterate: what the bettor would play before projection.
    current: DenseVector,
}

impl BettorState {
    /// A fresh bettor that will first play (the projection of) `start`.
    pub fn new(start: DenseVector, centering: Centering) -> Self {
        let center = match centering {
            Centering::X0 => start.clone(),
            Centering::Origin => DenseVector::zeros(start.dim()),
        };
        BettorState {
            center,
            grad_sum: DenseVector::zeros(start.dim()),
            spent: 0.0,
            last_wealth: f64::INFINITY,
            step: 0,
            current: start,
        }
    }

    /// The unconstrained iterate `x~_t`.
    pub fn current_unconstrained(&self) -> &DenseVector {
        &self.current
    }

    /// Number of gradients absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    /// Wealth after the most recent step (+inf before the first).
    pub fn wealth_offset(&self) -> f64 {
        self.last_wealth
    }

    /// Absorbs one surrogate gradient and advances the iterate:
    /// wealth becomes `epsilon_prime - sum_j <g_j, bet_j>` and the new
    /// unconstrained iterate is
    /// `center - grad_sum * (wealth / (step + 1))`.
    ///
    /// # Errors
    /// `WealthExhausted` when the updated wealth is not strictly positive,
    /// which can only happen if some gradient exceeded unit norm. The state
    /// is left unchanged in that case.
    pub fn bettor_step(&mut self, g: &SurrogateGradient, epsilon_prime: f64) -> Result<()> {
        assert!(
            epsilon_prime.is_finite() && epsilon_prime > 0.0,
            "epsilon_prime must be positive and finite"
        );
        let bet = self.current.sub(&self.center)?;
        let spent = self.spent + g.g().dot(&bet)?;
        let wealth = epsilon_prime - spent;
        if wealth <= 0.0 {
            return Err(Error::WealthExhausted { wealth });
        }
        self.spent = spent;
        self.last_wealth = wealth;
        self.grad_sum.add_assign_scaled(g.g(), 1.0)?;
        self.step += 1;
        let fraction = wealth / (self.step as f64 + 1.0);
        self.current = self.center.sub(&self.grad_sum.scale(fraction))?;
        Ok(())
    }

    /// One full online round: plays the projection of the unconstrained
    /// iterate onto `set`, then absorbs the surrogate of `ghat` (which must
    /// already be scaled to norm at most 1). Returns the played point.
    pub fn oco_round(
        &mut self,
        set: &FeasibleSet,
        ghat: &DenseVector,
        epsilon_prime: f64,
    ) -> Result<DenseVector> {
        let played = set.project(&self.current)?;
        let g = surrogate_grad(ghat, &self.current, &played)?;
        self.bettor_step(&g, epsilon_prime)?;
        Ok(played)
    }
}
