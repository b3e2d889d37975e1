use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp1};
use serde::Serialize;

use crate::equilibrium::{BidProbability, EquilibriumPolicy};
use crate::error::{Error, Result};
use crate::params::AuctionParams;

/// Whether players who pass may bid again later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GameMode {
    /// All `n` players may bid in every round.
    WithReentry,
    /// Only the previous round's bidders stay in.
    NoReentry,
}

/// Supplies the players' simultaneous Bid/No-Bid choices.
///
/// A round where every active player bids changes nothing but counters, so
/// sources report runs of such unanimous rounds as a count and only spell
/// out the next contested round (one where at least one player passes).
pub trait ActionSource {
    /// Writes the bidders of the next contested round into `bidders` (empty
    /// when everyone passed) and returns how many unanimous rounds came
    /// before it.
    fn next_contested_round(
        &mut self,
        active: &[usize],
        action: BidProbability,
        bidders: &mut Vec<usize>,
    ) -> u128;
}

/// Samplers for one active count.
#[derive(Debug, Clone)]
struct RoundSampler {
    k: usize,
    action: BidProbability,
    /// `-ln P{all k bid}`; unanimous run lengths are `floor(Exp(1) / rate)`.
    unanimous_rate: f64,
    /// `conditional_pass[r - 1]`: pass probability of a player with `r`
    /// players left to draw, given nobody has passed yet and somebody will.
    conditional_pass: Vec<Bernoulli>,
    pass: Bernoulli,
}

impl RoundSampler {
    fn new(k: usize, action: BidProbability) -> Self {
        let q = action.exit();
        let log_bid = (-q).ln_1p();
        let conditional_pass = (1..=k)
            .map(|r| {
                let some_pass = -(r as f64 * log_bid).exp_m1();
                Bernoulli::new((q / some_pass).min(1.0)).expect("probability in [0, 1]")
            })
            .collect();
        Self {
            k,
            action,
            unanimous_rate: -(k as f64) * log_bid,
            conditional_pass,
            pass: Bernoulli::new(q).expect("probability in [0, 1]"),
        }
    }
}

/// Independent Bernoulli choices driven by a random generator.
#[derive(Debug, Clone)]
pub struct RandomActions<R> {
    rng: R,
    samplers: Vec<RoundSampler>,
}

impl<R: Rng> RandomActions<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            samplers: Vec::new(),
        }
    }

    fn sampler(&mut self, k: usize, action: BidProbability) -> usize {
        match self
            .samplers
            .iter()
            .position(|s| s.k == k && s.action == action)
        {
            Some(i) => i,
            None => {
                self.samplers.push(RoundSampler::new(k, action));
                self.samplers.len() - 1
            }
        }
    }
}

impl<R: Rng> ActionSource for RandomActions<R> {
    fn next_contested_round(
        &mut self,
        active: &[usize],
        action: BidProbability,
        bidders: &mut Vec<usize>,
    ) -> u128 {
        let idx = self.sampler(active.len(), action);
        let sampler = &self.samplers[idx];
        let rng = &mut self.rng;

        let e: f64 = Exp1.sample(rng);
        let run = (e / sampler.unanimous_rate).floor();
        let unanimous = if run.is_finite() {
            run as u128
        } else {
            u128::MAX
        };

        bidders.clear();
        let mut passed = false;
        for (i, &player) in active.iter().enumerate() {
            let draw = if passed {
                &sampler.pass
            } else {
                &sampler.conditional_pass[active.len() - i - 1]
            };
            if draw.sample(rng) {
                passed = true;
            } else {
                bidders.push(player);
            }
        }
        unanimous
    }
}

/// One effective round: a round with at least one bid, together with the
/// all-pass rounds replayed before it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundOutcome {
    /// 1-based.
    pub effective_round_index: u128,
    pub resubmission_count: u64,
    pub bidder_ids: Vec<usize>,
    pub active_count_before: usize,
    pub ended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameRecord {
    /// Filled only by [`play_one_game`].
    pub rounds: Vec<RoundOutcome>,
    pub winner: Option<usize>,
    pub bids_per_player: Vec<u128>,
    pub net_money: Vec<f64>,
    pub seller_revenue: f64,
    pub effective_length: u128,
    pub raw_length: u128,
    /// The round cap was hit before anyone won.
    pub truncated: bool,
    /// Without re-entry and `n > 2`: the effective round after which at most
    /// two players remained (`T_{n,2}`).
    pub rounds_to_two_or_fewer: Option<u128>,
    /// Without re-entry and `n > 2`: whether exactly two players were left at
    /// some point.
    pub passed_through_two: Option<bool>,
}

impl GameRecord {
    pub fn total_bids(&self) -> u128 {
        self.bids_per_player.iter().sum()
    }
}

/// Plays one game, keeping the full round log.
///
/// Each active player bids independently with probability `p(k)` for the
/// current active count `k`. All-pass rounds are replayed. A round with a
/// single bidder ends the game; that bidder pays `s` and receives `v`.
/// Games still running after `round_cap` effective rounds come back with
/// `truncated` set and no winner.
pub fn play_one_game<A: ActionSource>(
    params: &AuctionParams,
    mode: GameMode,
    policy: &EquilibriumPolicy,
    source: &mut A,
    round_cap: u128,
) -> Result<GameRecord> {
    play(params, mode, policy, source, round_cap, true)
}

pub(crate) fn play<A: ActionSource>(
    params: &AuctionParams,
    mode: GameMode,
    policy: &EquilibriumPolicy,
    source: &mut A,
    round_cap: u128,
    trace: bool,
) -> Result<GameRecord> {
    let n = params.n();
    if round_cap < 1 {
        return Err(Error::InvalidArgument(
            "round cap must be at least 1".into(),
        ));
    }
    if policy.max_players() < n {
        return Err(Error::PolicyCoverage {
            covered: policy.max_players(),
            needed: n,
        });
    }
    let track_two = mode == GameMode::NoReentry && n > 2;

    let mut active: Vec<usize> = (0..n).collect();
    let mut bidders = Vec::with_capacity(n);
    let mut bids = vec![0u128; n];
    let mut rounds = Vec::new();
    let mut effective: u128 = 0;
    let mut raw: u128 = 0;
    let mut pending_resubmissions = 0u64;
    let mut winner = None;
    let mut to_two = None;
    let mut through_two = false;

    while effective < round_cap {
        let k = active.len();
        let action = policy.action(k).ok_or(Error::PolicyCoverage {
            covered: policy.max_players(),
            needed: k,
        })?;
        let unanimous = source.next_contested_round(&active, action, &mut bidders);

        if unanimous > 0 {
            // Every active player bids in each of these rounds; nobody wins
            // and nobody drops out.
            let played = unanimous.min(round_cap - effective);
            if trace {
                for j in 0..played {
                    rounds.push(RoundOutcome {
                        effective_round_index: effective + j + 1,
                        resubmission_count: if j == 0 { pending_resubmissions } else { 0 },
                        bidder_ids: active.clone(),
                        active_count_before: k,
                        ended: false,
                    });
                }
            }
            for &i in &active {
                bids[i] += played;
            }
            effective += played;
            raw += played;
            pending_resubmissions = 0;
            if effective == round_cap {
                break;
            }
        }

        raw += 1;
        if bidders.is_empty() {
            pending_resubmissions += 1;
            continue;
        }
        effective += 1;
        for &i in &bidders {
            bids[i] += 1;
        }
        let ended = bidders.len() == 1;
        if trace {
            rounds.push(RoundOutcome {
                effective_round_index: effective,
                resubmission_count: pending_resubmissions,
                bidder_ids: bidders.clone(),
                active_count_before: k,
                ended,
            });
        }
        pending_resubmissions = 0;
        if ended {
            winner = Some(bidders[0]);
            if track_two && to_two.is_none() {
                to_two = Some(effective);
            }
            break;
        }
        if mode == GameMode::NoReentry && bidders.len() < k {
            std::mem::swap(&mut active, &mut bidders);
            if track_two && active.len() == 2 && to_two.is_none() {
                to_two = Some(effective);
                through_two = true;
            }
        }
    }

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
        rounds,
        winner,
        net_money,
        seller_revenue: sale + c * total_bids as f64,
        effective_length: effective,
        raw_length: raw,
        truncated: winner.is_none(),
        rounds_to_two_or_fewer: if track_two { to_two } else { None },
        passed_through_two: if track_two { Some(through_two) } else { None },
        bids_per_player: bids,
    })
}
