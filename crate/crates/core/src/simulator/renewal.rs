//! Whole-game sampler for the re-entry variant.
//!
//! With re-entry every round is an independent draw of the same `n`
//! Bernoulli choices, so a game is a renewal sequence: a geometric number of
//! effective rounds with two or more bidders, then one round with a single
//! bidder. The sampler draws that count, the winner, how the non-final bids
//! split across players and the number of all-pass replays directly from
//! their exact distributions instead of round by round.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Poisson};

use super::game::GameRecord;
use crate::equilibrium::BidProbability;
use crate::error::{Error, Result};
use crate::params::AuctionParams;
use crate::revenue::{hazard_for, Conditioning};

/// Largest trial count handed to one binomial draw.
const BINOMIAL_CHUNK: u128 = 1 << 62;

/// `Binomial(trials, prob)` for trial counts beyond `u64`.
fn binomial<R: Rng>(rng: &mut R, trials: u128, prob: f64) -> u128 {
    if prob <= 0.0 || trials == 0 {
        return 0;
    }
    if prob >= 1.0 {
        return trials;
    }
    let mut left = trials;
    let mut hits = 0;
    while left > 0 {
        let chunk = left.min(BINOMIAL_CHUNK);
        let draw = Binomial::new(chunk as u64, prob).expect("probability in (0, 1)");
        hits += u128::from(draw.sample(rng));
        left -= chunk;
    }
    hits
}

/// `ln q`, taken from whichever of `p`, `q` is known more precisely.
fn log_exit(action: BidProbability) -> f64 {
    if action.exit() < 0.5 {
        action.exit().ln()
    } else {
        (-action.bid()).ln_1p()
    }
}

/// `P{Binomial(m, p) >= need}`.
fn at_least(m: usize, need: i64, action: BidProbability) -> f64 {
    let (p, q) = (action.bid(), action.exit());
    match need {
        i64::MIN..=0 => 1.0,
        1 => -(m as f64 * log_exit(action)).exp_m1(),
        _ if m < 2 => 0.0,
        _ if m as f64 * p < 0.1 => {
            // The complement loses digits here; sum the upper tail instead.
            let mut term = m as f64 * p * q.powi(m as i32 - 1);
            let mut sum = 0.0;
            for j in 1..m {
                term *= (m - j) as f64 / (j + 1) as f64 * (p / q);
                sum += term;
            }
            sum
        }
        _ => {
            let none_or_one = (m as f64 * log_exit(action)).exp()
                + m as f64 * p * ((m - 1) as f64 * log_exit(action)).exp();
            1.0 - none_or_one
        }
    }
}

/// Splits `rounds` rounds, each with at least two of the `n` players
/// bidding, into per-player bid counts.
///
/// Players are drawn in order. Rounds are grouped by how many of the players
/// drawn so far bid in them; within a group the next player's choice has a
/// common conditional probability, so one binomial draw per group suffices.
fn split_contested<R: Rng>(rng: &mut R, rounds: u128, action: BidProbability, bids: &mut [u128]) {
    let n = bids.len();
    let p = action.bid();
    let mut groups = vec![0u128; n + 1];
    groups[0] = rounds;
    for (i, bid_count) in bids.iter_mut().enumerate() {
        let left = n - i;
        let mut next = vec![0u128; n + 1];
        for (j, &count) in groups.iter().enumerate().take(i + 1) {
            if count == 0 {
                continue;
            }
            let need = 2 - j as i64;
            let prob = p * at_least(left - 1, need - 1, action) / at_least(left, need, action);
            let hit = binomial(rng, count, prob.min(1.0));
            *bid_count += hit;
            next[j + 1] += hit;
            next[j] += count - hit;
        }
        groups = next;
    }
}

/// Total all-pass replays over `rounds` effective rounds, each preceded by
/// a geometric number of them: a negative binomial, drawn as a
/// gamma-mixed Poisson.
fn replays<R: Rng>(rng: &mut R, rounds: u128, all_pass: f64) -> Result<u128> {
    if rounds == 0 || all_pass == 0.0 {
        return Ok(0);
    }
    let odds = all_pass / (1.0 - all_pass);
    let mixing: f64 = Gamma::new(rounds as f64, odds)
        .expect("positive shape and scale")
        .sample(rng);
    if mixing == 0.0 {
        return Ok(0);
    }
    let count: f64 = Poisson::new(mixing)
        .map_err(|_| {
            Error::InvalidArgument(format!(
                "all-pass replay count too large to sample (mean {mixing:e})"
            ))
        })?
        .sample(rng);
    Ok(count as u128)
}

/// Samples one re-entry game without keeping a round log.
pub fn sample_reentry_game<R: Rng>(
    params: &AuctionParams,
    action: BidProbability,
    rng: &mut R,
    round_cap: u128,
) -> Result<GameRecord> {
    if round_cap < 1 {
        return Err(Error::InvalidArgument(
            "round cap must be at least 1".into(),
        ));
    }
    let n = params.n();
    let hazard = hazard_for(n, action, Conditioning::AllPlayers);
    let e: f64 = Exp1.sample(rng);
    let contested = (e / -(-hazard).ln_1p()).floor();
    let contested = if contested.is_finite() {
        contested as u128
    } else {
        u128::MAX
    };

    let truncated = contested >= round_cap;
    let contested = contested.min(round_cap);
    let effective = if truncated { round_cap } else { contested + 1 };

    let mut bids = vec![0u128; n];
    split_contested(rng, contested, action, &mut bids);
    let winner = if truncated {
        None
    } else {
        Some(rng.random_range(0..n))
    };
    if let Some(w) = winner {
        bids[w] += 1;
    }
    let all_pass = (n as f64 * log_exit(action)).exp();
    let raw = effective + replays(rng, effective, all_pass)?;

    let c = params.bid_fee();
    let surplus = params.value() - params.sale_price();
    let net_money = bids
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let paid = -c * b as f64;
            if winner == Some(i) {
                paid + surplus
            } else {
                paid
            }
        })
        .collect();
    let total_bids: u128 = bids.iter().sum();
    let sale = if winner.is_some() {
        params.sale_price()
    } else {
        0.0
    };

    Ok(GameRecord {
        rounds: Vec::new(),
        winner,
        net_money,
        seller_revenue: sale + c * total_bids as f64,
        effective_length: effective,
        raw_length: raw,
        truncated,
        rounds_to_two_or_fewer: None,
        passed_through_two: None,
        bids_per_player: bids,
    })
}
