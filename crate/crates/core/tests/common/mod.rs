//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use paytobid::equilibrium::BidProbability;
use paytobid::simulator::ActionSource;
use paytobid::AuctionParams;

/// `(v, s, c)` triples of the standard grid.
pub const PRICES: [(f64, f64, f64); 3] = [(10.0, 0.0, 1.0), (100.0, 5.0, 0.5), (10.0, 9.0, 0.5)];
/// Risk coefficients of the full grid.
pub const RHOS: [f64; 4] = [0.0, -0.05, -0.1, -0.5];
pub const LOVING_RHOS: [f64; 3] = [-0.05, -0.1, -0.5];

pub fn params(n: usize, v: f64, s: f64, c: f64, rho: f64) -> AuctionParams {
    AuctionParams::new(n, v, s, c, rho).unwrap()
}

/// Every `(v, s, c, rho)` of the full grid.
pub fn grid() -> impl Iterator<Item = (f64, f64, f64, f64)> {
    PRICES
        .into_iter()
        .flat_map(|(v, s, c)| RHOS.into_iter().map(move |rho| (v, s, c, rho)))
}

/// Values computed with 50-digit arbitrary precision and frozen here.
pub mod frozen {
    /// `u(10)`, `u(5)`, `u(1)` at `rho = -0.1`.
    pub const U_10: f64 = 17.182818284590452353602874713526624977572470937;
    pub const U_5: f64 = 6.4872127070012814684865078781416357165377610071015;
    pub const U_1: f64 = 1.0517091807564762481170782649024666822454719473752;
    /// `u'(5)` at `rho = -0.2`.
    pub const E: f64 = std::f64::consts::E;
    pub const SQRT_TENTH: f64 = 0.31622776601683793319988935444327185337195551393252;
    /// `1 - sqrt(0.1)`.
    pub const P3_NEUTRAL: f64 = 0.68377223398316206680011064555672814662804448606748;
    /// `1 - 0.1^(1/4)`.
    pub const P5_NEUTRAL: f64 = 0.43765867480965091960504896022351876853174895690131;
    /// `u(1) / u(10)` and `1 - u(1) / u(10)` at `rho = -0.1`.
    pub const LAMBDA_TENTH: f64 = 0.061207024560089121664632316595148858155602168274589;
    pub const P2_TENTH: f64 = 0.93879297543991087833536768340485114184439783172541;
    /// `u(10) / u(1)` at `rho = -0.1`.
    pub const REVENUE_TENTH: f64 = 16.337993999663621792269609026852791257082674352446;
}

/// `u(x)` from the power series of `exp`, for `|rho x| <= 1`.
///
/// `(1 - e^z) / rho = x * sum_{j>=1} z^(j-1) / j!` with `z = -rho x`.
pub fn series_utility(rho: f64, x: f64) -> f64 {
    let z = -rho * x;
    assert!(z.abs() <= 1.0, "series oracle needs |rho x| <= 1");
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 1..40 {
        sum += term;
        term *= z / (j + 1) as f64;
    }
    x * sum
}

/// Probability that an effective round with `k` players, each bidding with
/// probability `p`, has exactly `m` bidders. Enumerates all `2^k` profiles.
pub fn enumerate_bidders(k: usize, p: f64) -> Vec<f64> {
    enumerate_mix(k, p, 1.0 - p)
}

/// As [`enumerate_bidders`] with the pass probability `q` given separately,
/// so that `q` keeps its precision when `p` is close to one.
pub fn enumerate_mix(k: usize, p: f64, q: f64) -> Vec<f64> {
    let mut mass = vec![0.0; k + 1];
    for profile in 0u32..(1 << k) {
        let bids = profile.count_ones() as usize;
        mass[bids] += p.powi(bids as i32) * q.powi((k - bids) as i32);
    }
    let effective: f64 = mass[1..].iter().sum();
    (1..=k).map(|m| mass[m] / effective).collect()
}

/// Closed-form mix `(p, q)` with `k` active players, from `lambda`.
pub fn closed_form_mix(lambda: f64, k: usize) -> (f64, f64) {
    let ln_q = lambda.ln() / (k - 1) as f64;
    (-ln_q.exp_m1(), ln_q.exp())
}

/// Expected bids per effective round by enumeration.
pub fn enumerate_entrants(k: usize, p: f64) -> f64 {
    enumerate_bidders(k, p)
        .iter()
        .enumerate()
        .map(|(i, w)| (i + 1) as f64 * w)
        .sum()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Survivor-count chain without re-entry: `chain[k][j]` is the probability
/// of moving from `k` to `j` survivors in one effective round, from
/// enumeration at the closed-form bid probabilities.
pub fn survivor_chain(params: &AuctionParams, n: usize) -> Vec<Vec<f64>> {
    let lambda = params.lambda();
    let mut chain = vec![vec![0.0; n + 1]; n + 1];
    for k in 2..=n {
        let (p, q) = closed_form_mix(lambda, k);
        for (i, w) in enumerate_mix(k, p, q).into_iter().enumerate() {
            chain[k][i + 1] = w;
        }
    }
    chain
}

/// `I - P` restricted to `states`. The diagonal is the probability of
/// leaving, summed from the small outcomes rather than taken as `1 - P{stay}`.
fn transient_block(chain: &[Vec<f64>], states: &[usize]) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|&k| {
            states
                .iter()
                .map(|&j| {
                    if k == j {
                        chain[k][1..k].iter().sum()
                    } else {
                        -chain[k][j]
                    }
                })
                .collect()
        })
        .collect()
}

/// `E[T_{n,m}]` from the fundamental matrix of the absorbing chain whose
/// absorbing states are `1..=m`.
pub fn chain_passage_time(params: &AuctionParams, n: usize, m: usize) -> f64 {
    let chain = survivor_chain(params, n);
    let states: Vec<usize> = (m + 1..=n).collect();
    let a = transient_block(&chain, &states);
    let t = solve(a, vec![1.0; states.len()]);
    t[states.len() - 1]
}

/// Probability that the chain started at `n` is absorbed at exactly two
/// survivors when states `1` and `2` are absorbing.
pub fn chain_two_player_probability(params: &AuctionParams, n: usize) -> f64 {
    let chain = survivor_chain(params, n);
    let states: Vec<usize> = (3..=n).collect();
    let a = transient_block(&chain, &states);
    let b = states.iter().map(|&k| chain[k][2]).collect();
    let x = solve(a, b);
    x[states.len() - 1]
}

/// Replays a fixed list of rounds. Each entry lists the bidders of one raw
/// round (an empty entry is an all-pass round).
pub struct Scripted {
    rounds: VecDeque<Vec<usize>>,
    /// Active set and mix of every request, in order.
    pub requests: Vec<(Vec<usize>, BidProbability)>,
}

impl Scripted {
    pub fn new(rounds: &[&[usize]]) -> Self {
        Self {
            rounds: rounds.iter().map(|r| r.to_vec()).collect(),
            requests: Vec::new(),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.rounds.is_empty()
    }
}

impl ActionSource for Scripted {
    fn next_contested_round(
        &mut self,
        active: &[usize],
        action: BidProbability,
        bidders: &mut Vec<usize>,
    ) -> u128 {
        self.requests.push((active.to_vec(), action));
        let mut unanimous = 0;
        loop {
            let round = self.rounds.pop_front().expect("script ran out of rounds");
            assert!(
                round.iter().all(|i| active.contains(i)),
                "scripted bidder {round:?} is not active in {active:?}"
            );
            if round.len() == active.len() {
                unanimous += 1;
                continue;
            }
            bidders.clear();
            bidders.extend(round);
            return unanimous;
        }
    }
}
