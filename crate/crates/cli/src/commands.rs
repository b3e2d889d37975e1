use paytobid::attrition::{endgame_time_fraction, expected_passage_time, prob_two_player_endgame};
use paytobid::equilibrium::{equilibrium_action, win_probability};
use paytobid::revenue::{closed_form_revenue, revenue_series};
use paytobid::simulator::run_replications;
use paytobid::{AuctionParams, Error, Estimate, GameMode, SimulationConfig, SimulationResult};

use crate::config::{Command, ExperimentConfig, Point};
use crate::table::{Cell, Table};
use crate::CliError;

const PARAM_COLUMNS: [&str; 5] = ["n", "value", "sale_price", "bid_fee", "rho"];
const STATUS_COLUMNS: [&str; 2] = ["status", "reason"];

/// Output of one subcommand. `failed` is set when any row is marked FAILED.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub failed: bool,
}

/// Body cells of one output row and its verdict.
struct Row {
    cells: Vec<Cell>,
    failures: Vec<String>,
}

impl Row {
    fn ok(cells: Vec<Cell>) -> Self {
        Self {
            cells,
            failures: Vec::new(),
        }
    }
}

fn estimate_cells(e: Option<Estimate>) -> [Cell; 2] {
    match e {
        Some(e) => [Cell::Float(e.mean), Cell::Float(e.std_error)],
        None => [Cell::Null, Cell::Null],
    }
}

fn simulate(
    config: &ExperimentConfig,
    params: &AuctionParams,
    mode: GameMode,
) -> Result<SimulationResult, Error> {
    let mut sim = SimulationConfig::new(mode, config.replications, config.seed)
        .round_cap(config.round_cap)
        .initial_wealth(config.initial_wealth);
    if let Some(workers) = config.workers {
        sim = sim.workers(workers);
    }
    run_replications(params, &sim)
}

fn mode_name(mode: GameMode) -> &'static str {
    match mode {
        GameMode::WithReentry => "reentry",
        GameMode::NoReentry => "no-reentry",
    }
}

pub fn run(command: Command, config: &ExperimentConfig) -> Result<Report, CliError> {
    if command == Command::Revenue && config.mode == GameMode::NoReentry {
        return Err(CliError::Config(
            "revenue formulas cover the re-entry game only; use `simulate --mode no-reentry` for the other".into(),
        ));
    }
    let mc = config.replications > 0;
    let body: Vec<&'static str> = match command {
        Command::Equilibrium => vec![
            "k",
            "bid_probability",
            "exit_probability",
            "win_probability",
        ],
        Command::Revenue => {
            let mut c = vec![
                "hazard",
                "expected_entrants",
                "expected_length",
                "sale_price_component",
                "fee_component",
                "total",
                "series",
                "series_gap",
            ];
            if mc {
                c.extend([
                    "mc_revenue",
                    "mc_revenue_se",
                    "mc_z",
                    "mc_completed",
                    "mc_truncated",
                ]);
            }
            c
        }
        Command::Attrition => {
            let mut c = vec!["t_n1", "t_n2", "ratio", "prob_two_player_endgame"];
            if mc {
                c.extend([
                    "mc_t_n1",
                    "mc_t_n1_se",
                    "mc_t_n2",
                    "mc_t_n2_se",
                    "mc_prob_two_player_endgame",
                    "mc_prob_two_player_endgame_se",
                    "mc_completed",
                    "mc_truncated",
                ]);
            }
            c
        }
        Command::Simulate => vec![
            "mode",
            "replications",
            "seed",
            "round_cap",
            "initial_wealth",
            "completed",
            "truncated",
            "mean_revenue",
            "mean_revenue_se",
            "mean_total_bids",
            "mean_total_bids_se",
            "mean_effective_length",
            "mean_effective_length_se",
            "mean_raw_length",
            "mean_raw_length_se",
            "per_player_mean_utility",
            "per_player_mean_utility_se",
            "two_player_passage_fraction",
            "two_player_passage_fraction_se",
            "mean_t_n2",
            "mean_t_n2_se",
            "bids_by_player",
            "wins_by_player",
        ],
    };
    let width = body.len();
    let mut table = Table::new(
        PARAM_COLUMNS
            .iter()
            .chain(&body)
            .chain(&STATUS_COLUMNS)
            .copied()
            .collect(),
    );
    let mut failed = false;

    for point in config.points() {
        let rows = match AuctionParams::new(
            point.n,
            point.value,
            point.sale_price,
            point.bid_fee,
            point.rho,
        ) {
            Ok(params) => {
                let computed = match command {
                    Command::Equilibrium => equilibrium(&params),
                    Command::Revenue => revenue(config, &params),
                    Command::Attrition => attrition(config, &params),
                    Command::Simulate => simulation(config, &params),
                };
                computed.unwrap_or_else(|e| {
                    vec![Row {
                        cells: vec![Cell::Null; width],
                        failures: vec![e.to_string()],
                    }]
                })
            }
            Err(e) if !config.is_sweep() => return Err(CliError::Model(e)),
            Err(e) if e.is_numerical() => vec![Row {
                cells: vec![Cell::Null; width],
                failures: vec![e.to_string()],
            }],
            Err(e) => {
                let mut row = point_cells(&point);
                row.extend(vec![Cell::Null; width]);
                row.extend([Cell::from("skipped"), Cell::Text(e.to_string())]);
                table.push(row);
                continue;
            }
        };
        for r in rows {
            let mut row = point_cells(&point);
            row.extend(r.cells);
            if r.failures.is_empty() {
                row.extend([Cell::from("ok"), Cell::Null]);
            } else {
                failed = true;
                row.extend([Cell::from("FAILED"), Cell::Text(r.failures.join("; "))]);
            }
            table.push(row);
        }
    }
    Ok(Report { table, failed })
}

fn point_cells(p: &Point) -> Vec<Cell> {
    vec![
        Cell::Int(p.n as u128),
        p.value.into(),
        p.sale_price.into(),
        p.bid_fee.into(),
        p.rho.into(),
    ]
}

fn equilibrium(params: &AuctionParams) -> Result<Vec<Row>, Error> {
    let lambda = win_probability(params);
    (2..=params.n())
        .map(|k| {
            let a = equilibrium_action(params, k)?;
            Ok(Row::ok(vec![
                Cell::Int(k as u128),
                a.bid().into(),
                a.exit().into(),
                lambda.into(),
            ]))
        })
        .collect()
}

fn revenue(config: &ExperimentConfig, params: &AuctionParams) -> Result<Vec<Row>, Error> {
    let b = closed_form_revenue(params)?;
    let mut failures = Vec::new();
    let mut cells: Vec<Cell> = vec![
        b.hazard.into(),
        b.expected_entrants.into(),
        b.expected_length.into(),
        b.sale_price_component.into(),
        b.fee_component.into(),
        b.total.into(),
    ];
    match revenue_series(params, config.tol) {
        Ok(series) => {
            let gap = (series + params.sale_price() - b.total).abs();
            if gap > config.tol + 1e-9 * b.total.abs().max(1.0) {
                failures.push(format!("series misses the closed form by {gap:e}"));
            }
            cells.extend([series.into(), gap.into()]);
        }
        Err(e) => {
            failures.push(e.to_string());
            cells.extend([Cell::Null, Cell::Null]);
        }
    }
    if config.replications > 0 {
        let result = simulate(config, params, GameMode::WithReentry)?;
        cells.extend(estimate_cells(result.mean_revenue));
        match result.mean_revenue {
            Some(e) => {
                let z = e.z_score(b.total);
                if z.abs() > 3.0 {
                    failures.push(format!(
                        "Monte Carlo mean is {z:.2} standard errors from the closed form"
                    ));
                }
                cells.push(z.into());
            }
            None => cells.push(Cell::Null),
        }
        if result.truncated > 0 {
            failures.push(format!(
                "{} of {} games truncated at the round cap",
                result.truncated, result.replications
            ));
        }
        cells.extend([
            Cell::Int(result.completed as u128),
            Cell::Int(result.truncated as u128),
        ]);
    }
    Ok(vec![Row { cells, failures }])
}

fn attrition(config: &ExperimentConfig, params: &AuctionParams) -> Result<Vec<Row>, Error> {
    let n = params.n();
    let mut cells: Vec<Cell> = vec![
        expected_passage_time(params, n, 1)?.into(),
        expected_passage_time(params, n, 2)?.into(),
    ];
    if n >= 3 {
        cells.extend([
            endgame_time_fraction(params, n)?.into(),
            prob_two_player_endgame(params, n)?.into(),
        ]);
    } else {
        cells.extend([Cell::Null, Cell::Null]);
    }
    if config.replications > 0 {
        let result = simulate(config, params, GameMode::NoReentry)?;
        cells.extend(estimate_cells(result.mean_effective_length));
        cells.extend(estimate_cells(result.mean_t_n2));
        cells.extend(estimate_cells(result.two_player_passage_fraction));
        cells.extend([
            Cell::Int(result.completed as u128),
            Cell::Int(result.truncated as u128),
        ]);
    }
    Ok(vec![Row::ok(cells)])
}

fn simulation(config: &ExperimentConfig, params: &AuctionParams) -> Result<Vec<Row>, Error> {
    let r = simulate(config, params, config.mode)?;
    let mut cells = vec![
        Cell::from(mode_name(r.mode)),
        Cell::Int(r.replications as u128),
        Cell::Int(config.seed as u128),
        Cell::Int(config.round_cap),
        r.initial_wealth.into(),
        Cell::Int(r.completed as u128),
        Cell::Int(r.truncated as u128),
    ];
    for e in [
        r.mean_revenue,
        r.mean_total_bids,
        r.mean_effective_length,
        r.mean_raw_length,
        r.per_player_mean_utility,
        r.two_player_passage_fraction,
        r.mean_t_n2,
    ] {
        cells.extend(estimate_cells(e));
    }
    cells.push(Cell::Ints(r.bids_by_player));
    cells.push(Cell::Ints(
        r.wins_by_player.into_iter().map(u128::from).collect(),
    ));
    Ok(vec![Row::ok(cells)])
}
