//! Parameter-free online learning over the probability simplex.
//!
//! Each coordinate runs its own scalar coin bettor against a "coin" derived
//! from how that coordinate's loss compares to the average loss under the
//! current play. Plays are formed by reweighting a strictly positive prior
//! with the positive part of the per-coordinate bets and L1-normalizing.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Below this L1 mass the reweighted prior is treated as all-zero and the
/// play falls back to the prior, avoiding denormal blow-ups.
const NORMALIZATION_FLOOR: f64 = 1e-300;

/// How per-coordinate coins are oriented.
///
/// `Regret` bets up coordinates whose loss is below average (the standard
/// experts-style regret coin, average loss minus coordinate loss). `Literal`
/// flips the sign, betting up above-average-loss coordinates; it is kept
/// selectable because it is the formula as written, but it does not shrink
/// regret and the regret-decay tests document that.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoinSign {
    #[default]
    Regret,
    Literal,
}

impl std::str::FromStr for CoinSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regret" => Ok(CoinSign::Regret),
            "literal" => Ok(CoinSign::Literal),
            other => Err(Error::InvalidArgument(format!(
                "unknown coin_sign '{other}' (expected regret or literal)"
            ))),
        }
    }
}

/// State of the simplex bettor.
#[derive(Clone, Debug)]
pub struct SimplexBettorState {
    /// Strictly positive prior summing to 1; the fallback play.
    prior: DenseVector,
    /// Per-coordinate sums of absorbed coins.
    coin_sum: Vec<f64>,
    /// Per-coordinate sums of coin * bet products; coordinate wealth is
    /// 1 + this, and must stay strictly positive.
    wealth_dot: Vec<f64>,
    /// Count of coins absorbed.
    step: usize,
    /// Per-coordinate bets of the most recent play.
    current_w: Vec<f64>,
    /// The most recent play, consumed by the following absorb.
    last_play: Option<DenseVector>,
    /// Coins committed by the most recent absorb (after truncation and
    /// clipping); useful for inspection and tests.
    last_coins: Vec<f64>,
    coin_sign: CoinSign,
}

impl SimplexBettorState {
    /// A fresh bettor over `prior.dim()` coordinates.
    ///
    /// # Errors
    /// `InvalidArgument` unless every prior entry is strictly positive and
    /// the entries sum to 1 within 1e-12.
    pub fn new(prior: DenseVector, coin_sign: CoinSign) -> Result<Self> {
        if prior.dim() == 0 {
            return Err(Error::InvalidArgument("prior must have dimension >= 1".into()));
        }
        if let Some(i) = (0..prior.dim()).find(|&i| prior.get(i) <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prior entry {i} is {}, must be strictly positive",
                prior.get(i)
            )));
        }
        if (prior.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "prior sums to {}, must sum to 1",
                prior.sum()
            )));
        }
        let n = prior.dim();
        Ok(SimplexBettorState {
            prior,
            coin_sum: vec![0.0; n],
            wealth_dot: vec![0.0; n],
            step: 0,
            current_w: vec![0.0; n],
            last_play: None,
            last_coins: vec![0.0; n],
            coin_sign,
        })
    }

    /// A fresh bettor with the uniform prior.
    pub fn uniform(n: usize, coin_sign: CoinSign) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("prior must have dimension >= 1".into()));
        }
        let p = DenseVector::new(vec![1.0 / n as f64; n])?;
        SimplexBettorState::new(p, coin_sign)
    }

    pub fn dim(&self) -> usize {
        self.prior.dim()
    }

    /// Number of coins absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    /// Per-coordinate bets of the most recent play.
    pub fn current_w(&self) -> &[f64] {
        &self.current_w
    }

    /// Per-coordinate wealth `1 + sum_j coin_j * bet_j`.
    pub fn wealths(&self) -> Vec<f64> {
        self.wealth_dot.iter().map(|d| 1.0 + d).collect()
    }

    /// Coins committed by the most recent absorb.
    pub fn last_coins(&self) -> &[f64] {
        &self.last_coins
    }

    /// Computes the round's play: per-coordinate bets
    /// `w_i = (sum of past coins)/t * (1 + sum of past coin*bet products)`,
    /// then the prior reweighted by `max(w_i, 0)` and L1-normalized, falling
    /// back to the prior when all mass vanishes. The play always lies in the
    /// simplex.
    ///
    /// Calling this twice without an intervening absorb returns the same
    /// play.
    pub fn simplex_play(&mut self) -> DenseVector {
        let t = (self.step + 1) as f64;
        for i in 0..self.dim() {
            self.current_w[i] = self.coin_sum[i] / t * (1.0 + self.wealth_dot[i]);
        }
        let weighted: Vec<f64> = (0..self.dim())
            .map(|i| self.prior.get(i) * self.current_w[i].max(0.0))
            .collect();
        let mass: f64 = weighted.iter().sum();
        let play = if mass >= NORMALIZATION_FLOOR {
            DenseVector::new(weighted.iter().map(|v| v / mass).collect())
                .expect("finite by construction")
        } else {
            self.prior.clone()
        };
        self.last_play = Some(play.clone());
        play
    }

    /// Absorbs the round's loss gradient (already scaled to `||.||_inf <= 1`)
    /// by turning it into per-coordinate coins and updating the wealth
    /// recurrences. Must follow a `simplex_play` call.
    ///
    /// Coins are the centered losses (orientation per `CoinSign`), truncated
    /// to their positive part on coordinates whose bet was not positive, and
    /// clipped to `[-1, 1]` before accumulation; centered values can reach
    /// magnitude 2 and unclipped they could bankrupt a coordinate.
    ///
    /// # Errors
    /// `ScalingViolation` when `||ghat_p||_inf > 1 + 1e-9`;
    /// `WealthExhausted` if any coordinate's wealth would drop to zero or
    /// below (state unchanged in both cases).
    pub fn simplex_absorb(&mut self, ghat_p: &DenseVector) -> Result<()> {
        if ghat_p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ghat_p.dim(),
            });
        }
        let norm = ghat_p.norm_inf();
        if norm > 1.0 + 1e-9 {
            return Err(Error::ScalingViolation { norm });
        }
        let play = self
            .last_play
            .as_ref()
            .expect("simplex_absorb requires a preceding simplex_play");
        let avg = ghat_p.dot(play)?;

        let mut coins = vec![0.0; self.dim()];
        for (i, slot) in coins.iter_mut().enumerate() {
            let centered = match self.coin_sign {
                CoinSign::Regret => avg - ghat_p.get(i),
                CoinSign::Literal => ghat_p.get(i) - avg,
            };
            let truncated = if self.current_w[i] > 0.0 {
                centered
            } else {
                centered.max(0.0)
            };
            let coin = truncated.clamp(-1.0, 1.0);
            let new_wealth = 1.0 + self.wealth_dot[i] + coin * self.current_w[i];
            if new_wealth <= 0.0 {
                return Err(Error::WealthExhausted { wealth: new_wealth });
            }
            *slot = coin;
        }

        for (i, &coin) in coins.iter().enumerate() {
            self.wealth_dot[i] += coin * self.current_w[i];
            self.coin_sum[i] += coin;
        }
        self.last_coins = coins;
        self.step += 1;
        self.last_play = None;
        Ok(())
    }

    /// Commits raw coins directly, bypassing centering, truncation, and
    /// clipping. Test scaffolding for states that are awkward to reach
    /// through the public path.
    #[cfg(test)]
    fn inject_coins(&mut self, coins: &[f64]) {
        assert_eq!(coins.len(), self.dim());
        self.simplex_play();
        for (i, &coin) in coins.iter().enumerate() {
            self.wealth_dot[i] += coin * self.current_w[i];
            self.coin_sum[i] += coin;
        }
        self.last_coins = coins.to_vec();
        self.step += 1;
        self.last_play = None;
    }
}
