//! Monte Carlo engine for the round-based Bid/No-Bid game.
//!
//! Games without re-entry are played contested round by contested round
//! ([`play_one_game`]); runs of rounds in which every active player bids are
//! drawn as one geometric count. Games with re-entry are sampled whole
//! ([`sample_reentry_game`]). Both are exact in distribution.
//!
//! Replications run in parallel, each on its own random stream derived from
//! `(master_seed, index)`. Per-game summaries land in an index-addressed
//! buffer and are reduced in index order, so a result depends only on the
//! parameters, the mode, the seed and the replication count.

mod game;
mod renewal;
mod rng;

pub use game::{play_one_game, ActionSource, GameMode, GameRecord, RandomActions, RoundOutcome};
pub use renewal::sample_reentry_game;
pub use rng::{replication_stream, StreamRng};

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::EquilibriumPolicy;
use crate::error::{Error, Result};
use crate::params::AuctionParams;
use crate::stats::Estimate;

pub const DEFAULT_ROUND_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub mode: GameMode,
    pub replications: u64,
    pub master_seed: u64,
    /// Effective rounds after which a game is abandoned and flagged.
    pub round_cap: u128,
    /// Wealth every player starts with when scoring `E[u(w0 + X)]`.
    pub initial_wealth: f64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
}

impl SimulationConfig {
    pub fn new(mode: GameMode, replications: u64, master_seed: u64) -> Self {
        Self {
            mode,
            replications,
            master_seed,
            round_cap: DEFAULT_ROUND_CAP,
            initial_wealth: 0.0,
            workers: None,
        }
    }

    pub fn round_cap(mut self, round_cap: u128) -> Self {
        self.round_cap = round_cap;
        self
    }

    pub fn initial_wealth(mut self, w0: f64) -> Self {
        self.initial_wealth = w0;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Aggregate over the completed games of a run. Truncated games are
/// counted in `truncated` and excluded from every estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub mode: GameMode,
    pub replications: u64,
    pub completed: u64,
    pub truncated: u64,
    pub mean_revenue: Option<Estimate>,
    pub mean_total_bids: Option<Estimate>,
    pub mean_effective_length: Option<Estimate>,
    pub mean_raw_length: Option<Estimate>,
    pub initial_wealth: f64,
    /// `E[u(w0 + X_i)]`, averaged over players within a game; the standard
    /// error is taken across games.
    pub per_player_mean_utility: Option<Estimate>,
    /// Without re-entry and `n > 2` only.
    pub two_player_passage_fraction: Option<Estimate>,
    /// Without re-entry and `n > 2` only: `E[T_{n,2}]`.
    pub mean_t_n2: Option<Estimate>,
    /// Bids placed by each player over all completed games.
    pub bids_by_player: Vec<u128>,
    /// Games won by each player.
    pub wins_by_player: Vec<u64>,
}

struct GameSummary {
    truncated: bool,
    revenue: f64,
    total_bids: f64,
    effective_length: f64,
    raw_length: f64,
    mean_utility: f64,
    to_two: Option<f64>,
    through_two: Option<bool>,
    bids: Vec<u128>,
    winner: Option<usize>,
}

fn summarize(params: &AuctionParams, w0: f64, record: GameRecord) -> Result<GameSummary> {
    let u = params.utility();
    let mut utility_sum = 0.0;
    for &x in &record.net_money {
        utility_sum += u.evaluate(w0 + x)?;
    }
    Ok(GameSummary {
        truncated: record.truncated,
        revenue: record.seller_revenue,
        total_bids: record.total_bids() as f64,
        effective_length: record.effective_length as f64,
        raw_length: record.raw_length as f64,
        mean_utility: utility_sum / record.net_money.len() as f64,
        to_two: record.rounds_to_two_or_fewer.map(|t| t as f64),
        through_two: record.passed_through_two,
        bids: record.bids_per_player,
        winner: record.winner,
    })
}

/// Runs `config.replications` independent games.
pub fn run_replications(
    params: &AuctionParams,
    config: &SimulationConfig,
) -> Result<SimulationResult> {
    if config.replications < 1 {
        return Err(Error::InvalidArgument(
            "replication count must be at least 1".into(),
        ));
    }
    if !config.initial_wealth.is_finite() {
        return Err(Error::NonFinite {
            name: "initial wealth",
            value: config.initial_wealth,
        });
    }
    let policy = EquilibriumPolicy::new(params);
    let one = |index: u64| -> Result<GameSummary> {
        let mut rng = replication_stream(config.master_seed, index);
        let record = match config.mode {
            GameMode::WithReentry => {
                let action = policy.action(params.n()).ok_or(Error::PolicyCoverage {
                    covered: policy.max_players(),
                    needed: params.n(),
                })?;
                sample_reentry_game(params, action, &mut rng, config.round_cap)?
            }
            GameMode::NoReentry => game::play(
                params,
                config.mode,
                &policy,
                &mut RandomActions::new(rng),
                config.round_cap,
                false,
            )?,
        };
        summarize(params, config.initial_wealth, record)
    };
    let run = || {
        (0..config.replications)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()
    };
    let summaries = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(reduce(params, config, &summaries))
}

fn reduce(
    params: &AuctionParams,
    config: &SimulationConfig,
    summaries: &[GameSummary],
) -> SimulationResult {
    let done: Vec<&GameSummary> = summaries.iter().filter(|s| !s.truncated).collect();
    let estimate = |f: fn(&GameSummary) -> f64| Estimate::from_samples(done.iter().map(|s| f(s)));
    let tracks_two = config.mode == GameMode::NoReentry && params.n() > 2;

    let mut bids_by_player = vec![0u128; params.n()];
    let mut wins_by_player = vec![0u64; params.n()];
    for s in &done {
        for (total, b) in bids_by_player.iter_mut().zip(&s.bids) {
            *total += b;
        }
        if let Some(w) = s.winner {
            wins_by_player[w] += 1;
        }
    }

    SimulationResult {
        mode: config.mode,
        replications: config.replications,
        completed: done.len() as u64,
        truncated: (summaries.len() - done.len()) as u64,
        mean_revenue: estimate(|s| s.revenue),
        mean_total_bids: estimate(|s| s.total_bids),
        mean_effective_length: estimate(|s| s.effective_length),
        mean_raw_length: estimate(|s| s.raw_length),
        initial_wealth: config.initial_wealth,
        per_player_mean_utility: estimate(|s| s.mean_utility),
        two_player_passage_fraction: if tracks_two {
            estimate(|s| {
                if s.through_two == Some(true) {
                    1.0
                } else {
                    0.0
                }
            })
        } else {
            None
        },
        mean_t_n2: if tracks_two {
            estimate(|s| s.to_two.unwrap_or(f64::NAN))
        } else {
            None
        },
        bids_by_player,
        wins_by_player,
    }
}

/// Monte Carlo estimate of a player's expected utility `E[u(w0 + X)]` at
/// the start of the game.
pub fn estimate_subgame_utility(
    params: &AuctionParams,
    mode: GameMode,
    w0: f64,
    count: u64,
    master_seed: u64,
) -> Result<Estimate> {
    let config = SimulationConfig::new(mode, count, master_seed).initial_wealth(w0);
    run_replications(params, &config)?
        .per_player_mean_utility
        .ok_or_else(|| Error::InvalidArgument("every replication was truncated".into()))
}
