//! Symmetric subgame-perfect equilibrium of the Bid/No-Bid game.
//!
//! With `k` players still able to bid, every player bids with probability
//! `p(k) = 1 - lambda^(1/(k-1))`, `lambda = u(c) / u(v - s)`. With re-entry
//! `k = n` in every round; without re-entry `k` is the current survivor count.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::AuctionParams;

/// Fixed bisection bracket: the residual is positive at `p = 0` and
/// negative at `p = 1`.
pub const BISECTION_BRACKET: (f64, f64) = (1e-15, 1.0 - 1e-15);

/// A Bernoulli mix over {Bid, No Bid}.
///
/// Both probabilities are stored so that a bid probability within an ulp of
/// one keeps its exit probability at full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BidProbability {
    bid: f64,
    exit: f64,
}

impl BidProbability {
    pub fn from_bid(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "bid probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            bid: p,
            exit: 1.0 - p,
        })
    }

    pub fn from_exit(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "exit probability {q} outside [0, 1]"
            )));
        }
        Ok(Self {
            bid: 1.0 - q,
            exit: q,
        })
    }

    /// Probability of playing Bid.
    pub fn bid(self) -> f64 {
        self.bid
    }

    /// Probability of playing No Bid.
    pub fn exit(self) -> f64 {
        self.exit
    }
}

fn check_active(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::ActiveCount { k, min: 2 })
    } else {
        Ok(())
    }
}

/// Equilibrium mix with `k` active players, computed as
/// `exit = exp(ln(lambda) / (k - 1))` and `bid = -expm1(ln(lambda) / (k - 1))`.
pub fn equilibrium_action(params: &AuctionParams, k: usize) -> Result<BidProbability> {
    check_active(k)?;
    Ok(action_from_log_lambda(params.lambda().ln(), k))
}

fn action_from_log_lambda(ln_lambda: f64, k: usize) -> BidProbability {
    let ln_exit = ln_lambda / (k - 1) as f64;
    BidProbability {
        bid: -ln_exit.exp_m1(),
        exit: ln_exit.exp(),
    }
}

/// `p(k) = 1 - (u(c) / u(v - s))^(1/(k-1))`.
pub fn bid_probability(params: &AuctionParams, k: usize) -> Result<f64> {
    equilibrium_action(params, k).map(BidProbability::bid)
}

/// Probability that a bidding player wins in the current round,
/// `u(c) / u(v - s)`, whatever the number of active players.
pub fn win_probability(params: &AuctionParams) -> f64 {
    params.lambda()
}

/// `u(v - s) (1 - p)^(k-1) - u(c)`: expected utility of Bid minus that of
/// No Bid for a player holding wealth `c`. Zero exactly at the equilibrium
/// and strictly decreasing in `p`.
pub fn indifference_residual(
    params: &AuctionParams,
    k: usize,
    action: BidProbability,
) -> Result<f64> {
    check_active(k)?;
    let others_exit = action.exit().powi((k - 1) as i32);
    Ok(params.utility_of_surplus() * others_exit - params.utility_of_fee())
}

/// Root of [`indifference_residual`] by bisection over
/// [`BISECTION_BRACKET`], to absolute tolerance `tol` in `p`.
pub fn solve_equilibrium_by_bisection(params: &AuctionParams, k: usize, tol: f64) -> Result<f64> {
    check_active(k)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let (mut lo, mut hi) = BISECTION_BRACKET;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = indifference_residual(params, k, BidProbability::from_bid(mid)?)?;
        if r > 0.0 {
            lo = mid;
        } else if r < 0.0 {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-active-count equilibrium mixes for `k = 2..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumPolicy {
    lambda: f64,
    actions: Vec<BidProbability>,
}

impl EquilibriumPolicy {
    pub fn new(params: &AuctionParams) -> Self {
        let ln_lambda = params.lambda().ln();
        let actions = (2..=params.n())
            .map(|k| action_from_log_lambda(ln_lambda, k))
            .collect();
        Self {
            lambda: params.lambda(),
            actions,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest active count the table covers.
    pub fn max_players(&self) -> usize {
        self.actions.len() + 1
    }

    pub fn action(&self, k: usize) -> Option<BidProbability> {
        k.checked_sub(2).and_then(|i| self.actions.get(i)).copied()
    }

    pub fn bid_probability(&self, k: usize) -> Option<f64> {
        self.action(k).map(BidProbability::bid)
    }

    /// `(k, p(k))` pairs in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, BidProbability)> + '_ {
        self.actions.iter().enumerate().map(|(i, a)| (i + 2, *a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, v: f64, s: f64, c: f64, rho: f64) -> AuctionParams {
        AuctionParams::new(n, v, s, c, rho).unwrap()
    }

    #[test]
    fn two_player_risk_neutral() {
        let p = params(2, 10.0, 0.0, 1.0, 0.0);
        assert!((bid_probability(&p, 2).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(win_probability(&p), 0.1);
    }

    #[test]
    fn single_player_is_a_domain_error() {
        let p = params(2, 10.0, 0.0, 1.0, 0.0);
        assert_eq!(
            bid_probability(&p, 1),
            Err(Error::ActiveCount { k: 1, min: 2 })
        );
        assert!(bid_probability(&p, 0).is_err());
        assert!(solve_equilibrium_by_bisection(&p, 1, 1e-10).is_err());
    }

    #[test]
    fn residual_endpoints() {
        let p = params(2, 10.0, 0.0, 1.0, 0.0);
        let at = |x| indifference_residual(&p, 2, BidProbability::from_bid(x).unwrap()).unwrap();
        assert_eq!(at(0.0), 9.0);
        assert_eq!(at(1.0), -1.0);
    }

    #[test]
    fn residual_vanishes_at_closed_form() {
        let p = params(5, 100.0, 5.0, 0.5, -0.05);
        for k in 2..=5 {
            let a = equilibrium_action(&p, k).unwrap();
            assert!(indifference_residual(&p, k, a).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn bisection_rejects_bad_tolerance() {
        let p = params(2, 10.0, 0.0, 1.0, 0.0);
        assert!(solve_equilibrium_by_bisection(&p, 2, 0.0).is_err());
        assert!(solve_equilibrium_by_bisection(&p, 2, f64::NAN).is_err());
    }

    #[test]
    fn probability_constructors_validate() {
        assert!(BidProbability::from_bid(1.5).is_err());
        assert!(BidProbability::from_exit(-0.1).is_err());
        let a = BidProbability::from_exit(1e-20).unwrap();
        assert_eq!(a.bid(), 1.0);
        assert_eq!(a.exit(), 1e-20);
    }

    #[test]
    fn policy_table_matches_pointwise_formula() {
        let p = params(6, 10.0, 0.0, 1.0, -0.1);
        let policy = EquilibriumPolicy::new(&p);
        assert_eq!(policy.max_players(), 6);
        assert_eq!(policy.action(1), None);
        assert_eq!(policy.action(7), None);
        for (k, a) in policy.iter() {
            assert_eq!(a, equilibrium_action(&p, k).unwrap());
        }
    }
}
