//! Attrition without re-entry.
//!
//! With `k` survivors each one passes with probability `q_k = lambda^(1/(k-1))`.
//! Conditioned on at least one bid, the number of bidders `Z_k` is a
//! zero-truncated binomial, and the bidders are the next round's survivors.
//! First-passage quantities follow by a dynamic program in ascending `k`;
//! every state only moves to states with fewer or equal survivors, so no
//! fixed-point iteration is needed.

use serde::Serialize;

use crate::equilibrium::equilibrium_action;
use crate::error::{Error, Result};
use crate::params::AuctionParams;

/// Constant term of the first-passage recursion for `E[T_{n,m}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PassageNumerator {
    /// Every effective round costs one round: `1 + sum_j P{Z=j} E[T_{j,m}]`.
    #[default]
    Renewal,
    /// `P{Z <= m} + sum_j P{Z=j} E[T_{j,m}]`, the published form, kept only
    /// for comparison against the renewal form.
    Published,
}

/// `q_k = lambda^(1/(k-1))`, the probability that a survivor passes.
pub fn exit_probability(params: &AuctionParams, k: usize) -> Result<f64> {
    equilibrium_action(params, k).map(|a| a.exit())
}

fn binomial(k: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// `P{Z_k = m}` for `m = 1..=k`; entry `i` holds `m = i + 1`.
pub fn z_distribution(params: &AuctionParams, k: usize) -> Result<Vec<f64>> {
    let action = equilibrium_action(params, k)?;
    let (bid, exit) = (action.bid(), action.exit());
    let at_least_one = -(k as f64 * exit.ln()).exp_m1();
    Ok((1..=k)
        .map(|m| binomial(k, m) * bid.powi(m as i32) * exit.powi((k - m) as i32) / at_least_one)
        .collect())
}

/// Probability that an effective round with `k` survivors ends the game.
pub fn end_probability(params: &AuctionParams, k: usize) -> Result<f64> {
    Ok(z_distribution(params, k)?[0])
}

/// `E[T_{n,m}]`: expected effective rounds until at most `m` players remain.
pub fn expected_passage_time(params: &AuctionParams, n: usize, m: usize) -> Result<f64> {
    expected_passage_time_with(params, n, m, PassageNumerator::Renewal)
}

pub fn expected_passage_time_with(
    params: &AuctionParams,
    n: usize,
    m: usize,
    numerator: PassageNumerator,
) -> Result<f64> {
    if m < 1 {
        return Err(Error::TargetCount(m));
    }
    if n <= m {
        return Ok(0.0);
    }
    let dists = distributions(params, n)?;
    Ok(passage_times(&dists, n, m, numerator)[n])
}

/// `P{T_{n,2} < T_{n,1}}`: the game passes through a two-player state.
pub fn prob_two_player_endgame(params: &AuctionParams, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::ActiveCount { k: n, min: 3 });
    }
    let dists = distributions(params, n)?;
    Ok(two_player_probabilities(&dists, n)[n].expect("n >= 3"))
}

/// `E[T_{n,2}] / E[T_{n,1}]`, the share of the game spent before two
/// survivors remain.
pub fn endgame_time_fraction(params: &AuctionParams, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::ActiveCount { k: n, min: 3 });
    }
    let dists = distributions(params, n)?;
    let to_two = passage_times(&dists, n, 2, PassageNumerator::Renewal)[n];
    let to_end = passage_times(&dists, n, 1, PassageNumerator::Renewal)[n];
    Ok(to_two / to_end)
}

/// `dists[k]` is `P{Z_k = .}` for `k >= 2`; lower slots are empty.
fn distributions(params: &AuctionParams, n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::ActiveCount { k: n, min: 2 });
    }
    let mut dists = vec![Vec::new(); 2];
    for k in 2..=n {
        dists.push(z_distribution(params, k)?);
    }
    Ok(dists)
}

/// `1 - P{Z_k = k}`, summed from the small outcomes so it keeps its
/// precision when `P{Z_k = k}` is close to one.
fn leaves_state(dist: &[f64]) -> f64 {
    dist[..dist.len() - 1].iter().sum()
}

/// `times[k] = E[T_{k,m}]` for `k = 0..=n`.
fn passage_times(dists: &[Vec<f64>], n: usize, m: usize, numerator: PassageNumerator) -> Vec<f64> {
    let mut times = vec![0.0; n + 1];
    for k in (m + 1).max(2)..=n {
        let dist = &dists[k];
        let constant = match numerator {
            PassageNumerator::Renewal => 1.0,
            PassageNumerator::Published => dist[..m.min(k)].iter().sum(),
        };
        let via_intermediate: f64 = (m + 1..k).map(|j| dist[j - 1] * times[j]).sum();
        times[k] = (constant + via_intermediate) / leaves_state(dist);
    }
    times
}

/// `probs[k] = P{T_{k,2} < T_{k,1}}` for `k >= 3`.
fn two_player_probabilities(dists: &[Vec<f64>], n: usize) -> Vec<Option<f64>> {
    let mut probs: Vec<Option<f64>> = vec![None; n + 1];
    for k in 3..=n {
        let dist = &dists[k];
        let via_intermediate: f64 = (3..k).map(|j| dist[j - 1] * probs[j].unwrap_or(0.0)).sum();
        probs[k] = Some((dist[1] + via_intermediate) / leaves_state(dist));
    }
    probs
}

/// All attrition quantities for player counts up to `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttritionTable {
    lambda: f64,
    n: usize,
    z_dist: Vec<Vec<f64>>,
    p_two_before_end: Vec<Option<f64>>,
    /// `expected_t[k][m] = E[T_{k,m}]`.
    expected_t: Vec<Vec<f64>>,
}

impl AttritionTable {
    pub fn build(params: &AuctionParams, n: usize) -> Result<Self> {
        let dists = distributions(params, n)?;
        let mut expected_t = vec![vec![0.0; n + 1]; n + 1];
        for m in 1..n {
            let times = passage_times(&dists, n, m, PassageNumerator::Renewal);
            for (row, t) in expected_t.iter_mut().zip(times) {
                row[m] = t;
            }
        }
        Ok(Self {
            lambda: params.lambda(),
            n,
            p_two_before_end: two_player_probabilities(&dists, n),
            z_dist: dists,
            expected_t,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn max_players(&self) -> usize {
        self.n
    }

    /// `P{Z_k = m}` for `m = 1..=k`.
    pub fn z_distribution(&self, k: usize) -> Option<&[f64]> {
        if (2..=self.n).contains(&k) {
            Some(&self.z_dist[k])
        } else {
            None
        }
    }

    pub fn prob_two_player_endgame(&self, k: usize) -> Option<f64> {
        self.p_two_before_end.get(k).copied().flatten()
    }

    /// `E[T_{k,m}]`, zero when `k <= m`.
    pub fn expected_passage_time(&self, k: usize, m: usize) -> Option<f64> {
        if m == 0 || k > self.n {
            return None;
        }
        Some(if k <= m { 0.0 } else { self.expected_t[k][m] })
    }
}
