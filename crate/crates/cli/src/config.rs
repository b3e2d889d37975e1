use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use paytobid::revenue::DEFAULT_TRUNCATION_TOL;
use paytobid::simulator::DEFAULT_ROUND_CAP;
use paytobid::GameMode;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "paytobid",
    version,
    about = "Equilibrium, revenue and attrition of pay-to-bid auctions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Bid probability p(k) and exit probability for k = 2..n
    Equilibrium,
    /// Closed-form and series revenue, with an optional Monte Carlo check
    Revenue,
    /// Passage times and the two-player endgame without re-entry
    Attrition,
    /// Monte Carlo replications of the game
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Reentry,
    NoReentry,
}

impl From<Mode> for GameMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Reentry => GameMode::WithReentry,
            Mode::NoReentry => GameMode::NoReentry,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Number of players
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Value of the object, v
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub value: Option<f64>,
    /// Sale price paid by the winner, s [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sale_price: Option<f64>,
    /// Fee per bid, c
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub bid_fee: Option<f64>,
    /// Risk coefficient, rho <= 0 [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Re-entry rule for simulations [default: reentry]
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Monte Carlo replications; 0 disables the Monte Carlo columns
    /// [default: 100000 for simulate, 0 otherwise]
    #[arg(long, global = true)]
    pub replications: Option<u64>,
    /// Master seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Effective rounds after which a game is truncated [default: 10000000]
    #[arg(long, global = true)]
    pub round_cap: Option<u128>,
    /// Truncation tolerance of the revenue series [default: 1e-9]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output format [default: json]
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Sweep a parameter over a list, e.g. `rho=0,-0.1`; repeatable
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sweep: Vec<String>,
    /// Config file with `key = value` lines or a JSON object
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for simulations
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Initial wealth w0 for the subgame utility estimate [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub initial_wealth: Option<f64>,
}

const KEYS: [&str; 14] = [
    "n",
    "value",
    "sale-price",
    "bid-fee",
    "rho",
    "mode",
    "replications",
    "seed",
    "round-cap",
    "tol",
    "format",
    "sweep",
    "workers",
    "initial-wealth",
];

/// Settings read from a config file, keyed by flag name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    sweep: Vec<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_lines(text)
        }
    }

    fn parse_lines(text: &str) -> Result<Self, CliError> {
        let mut file = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected `key = value`", i + 1))
            })?;
            file.insert(key, value.trim().to_owned())?;
        }
        Ok(file)
    }

    fn parse_json(text: &str) -> Result<Self, CliError> {
        let document: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config file is not valid JSON: {e}")))?;
        let Value::Object(object) = document else {
            return Err(CliError::Config("JSON config must be an object".into()));
        };
        let mut file = Self::default();
        for (key, value) in object {
            if normalize(&key) == "sweep" {
                for entry in sweep_entries(&value)? {
                    file.sweep.push(entry);
                }
                continue;
            }
            let text = scalar(&value).ok_or_else(|| {
                CliError::Config(format!("config key `{key}` must be a number or string"))
            })?;
            file.insert(&key, text)?;
        }
        Ok(file)
    }

    fn insert(&mut self, key: &str, value: String) -> Result<(), CliError> {
        let key = normalize(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        if key == "sweep" {
            self.sweep.push(value);
        } else if self.values.insert(key.clone(), value).is_some() {
            return Err(CliError::Config(format!("config key `{key}` given twice")));
        }
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|raw| {
                raw.parse().map_err(|_| {
                    CliError::Config(format!("config key `{key}`: cannot parse `{raw}`"))
                })
            })
            .transpose()
    }

    fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|raw| {
                T::from_str(raw, true).map_err(|_| {
                    CliError::Config(format!("config key `{key}`: unknown value `{raw}`"))
                })
            })
            .transpose()
    }
}

fn normalize(key: &str) -> String {
    key.trim()
        .trim_start_matches("--")
        .to_ascii_lowercase()
        .replace('_', "-")
}

fn scalar(value: &Value) -> Option<String> {
    match value {
        Value::Number(x) => Some(x.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// A sweep given as `"rho=0,-0.1"`, a list of such strings, or an object
/// mapping parameters to lists.
fn sweep_entries(value: &Value) -> Result<Vec<String>, CliError> {
    let bad = || {
        CliError::Config(
            "config `sweep` must be a string, a list of strings or an object of lists".into(),
        )
    };
    match value {
        Value::String(s) => Ok(vec![s.clone()]),
        Value::Array(items) => items
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or_else(bad))
            .collect(),
        Value::Object(object) => object
            .iter()
            .map(|(name, list)| {
                let items = list.as_array().ok_or_else(bad)?;
                let values: Option<Vec<String>> = items.iter().map(scalar).collect();
                Ok(format!("{name}={}", values.ok_or_else(bad)?.join(",")))
            })
            .collect(),
        _ => Err(bad()),
    }
}

/// Auction primitive that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    N,
    Value,
    SalePrice,
    BidFee,
    Rho,
}

impl Param {
    fn parse(name: &str) -> Result<Self, CliError> {
        match normalize(name).as_str() {
            "n" => Ok(Param::N),
            "v" | "value" => Ok(Param::Value),
            "s" | "sale-price" => Ok(Param::SalePrice),
            "c" | "bid-fee" => Ok(Param::BidFee),
            "rho" => Ok(Param::Rho),
            other => Err(CliError::Config(format!(
                "cannot sweep `{other}`: sweep parameters are n, v, s, c and rho"
            ))),
        }
    }
}

/// Raw auction primitives before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub n: usize,
    pub value: f64,
    pub sale_price: f64,
    pub bid_fee: f64,
    pub rho: f64,
}

impl Point {
    fn set(&mut self, param: Param, x: f64) {
        match param {
            Param::N => self.n = x as usize,
            Param::Value => self.value = x,
            Param::SalePrice => self.sale_price = x,
            Param::BidFee => self.bid_fee = x,
            Param::Rho => self.rho = x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: Param,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let (name, list) = spec.split_once('=').ok_or_else(|| {
            CliError::Config(format!("sweep `{spec}` must look like `param=v1,v2,...`"))
        })?;
        let param = Param::parse(name)?;
        let values = list
            .split(',')
            .map(|raw| {
                let raw = raw.trim();
                let parsed = if param == Param::N {
                    raw.parse::<usize>().map(|n| n as f64).ok()
                } else {
                    raw.parse::<f64>().ok()
                };
                parsed.ok_or_else(|| {
                    CliError::Config(format!("sweep `{name}`: cannot parse `{raw}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sweep { param, values })
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub base: Point,
    pub mode: GameMode,
    pub replications: u64,
    pub seed: u64,
    pub round_cap: u128,
    pub tol: f64,
    pub format: Format,
    pub sweep: Vec<Sweep>,
    pub workers: Option<usize>,
    pub initial_wealth: f64,
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(x) => Ok(Some(x)),
        None => file.get(key),
    }
}

impl ExperimentConfig {
    /// Merges the config file under the flags and fills in defaults.
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let sweep_specs = if flags.sweep.is_empty() {
            &file.sweep
        } else {
            &flags.sweep
        };
        let sweep: Vec<Sweep> = sweep_specs
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()?;
        for (i, s) in sweep.iter().enumerate() {
            if sweep[..i].iter().any(|t| t.param == s.param) {
                return Err(CliError::Config(format!(
                    "parameter {:?} swept twice",
                    s.param
                )));
            }
        }
        let swept = |p: Param| sweep.iter().any(|s| s.param == p);

        let required = |value: Option<f64>, param: Param, flag: &str| -> Result<f64, CliError> {
            match value {
                Some(x) => Ok(x),
                None if swept(param) => Ok(f64::NAN),
                None => Err(CliError::Config(format!("missing --{flag}"))),
            }
        };
        let n = match pick(flags.n, &file, "n")? {
            Some(n) => n,
            None if swept(Param::N) => 0,
            None => return Err(CliError::Config("missing --n".into())),
        };
        let base = Point {
            n,
            value: required(pick(flags.value, &file, "value")?, Param::Value, "value")?,
            sale_price: pick(flags.sale_price, &file, "sale-price")?.unwrap_or(0.0),
            bid_fee: required(
                pick(flags.bid_fee, &file, "bid-fee")?,
                Param::BidFee,
                "bid-fee",
            )?,
            rho: pick(flags.rho, &file, "rho")?.unwrap_or(0.0),
        };

        let mode = match flags.mode {
            Some(m) => m,
            None => file.get_enum("mode")?.unwrap_or(Mode::Reentry),
        };
        let format = match flags.format {
            Some(f) => f,
            None => file.get_enum("format")?.unwrap_or(Format::Json),
        };
        let default_replications = if command == Command::Simulate {
            100_000
        } else {
            0
        };
        let replications =
            pick(flags.replications, &file, "replications")?.unwrap_or(default_replications);
        if command == Command::Simulate && replications == 0 {
            return Err(CliError::Config(
                "replication count must be at least 1".into(),
            ));
        }
        let round_cap = pick(flags.round_cap, &file, "round-cap")?.unwrap_or(DEFAULT_ROUND_CAP);
        if round_cap == 0 {
            return Err(CliError::Config("round cap must be at least 1".into()));
        }
        let tol = pick(flags.tol, &file, "tol")?.unwrap_or(DEFAULT_TRUNCATION_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!(
                "truncation tolerance must be positive and finite (got {tol})"
            )));
        }
        let workers = pick(flags.workers, &file, "workers")?;
        if workers == Some(0) {
            return Err(CliError::Config("worker count must be at least 1".into()));
        }
        let initial_wealth = pick(flags.initial_wealth, &file, "initial-wealth")?.unwrap_or(0.0);
        if !initial_wealth.is_finite() {
            return Err(CliError::Config(format!(
                "initial wealth must be finite (got {initial_wealth})"
            )));
        }

        Ok(Self {
            base,
            mode: mode.into(),
            replications,
            seed: pick(flags.seed, &file, "seed")?.unwrap_or(0),
            round_cap,
            tol,
            format,
            sweep,
            workers,
            initial_wealth,
        })
    }

    /// Every parameter combination, the first sweep varying slowest.
    pub fn points(&self) -> Vec<Point> {
        let mut points = vec![self.base];
        for sweep in &self.sweep {
            points = points
                .into_iter()
                .flat_map(|p| {
                    sweep.values.iter().map(move |&x| {
                        let mut q = p;
                        q.set(sweep.param, x);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn is_sweep(&self) -> bool {
        !self.sweep.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags {
            n: Some(3),
            value: Some(10.0),
            bid_fee: Some(1.0),
            ..Flags::default()
        }
    }

    #[test]
    fn defaults_fill_unset_fields() {
        let config = ExperimentConfig::resolve(Command::Revenue, &flags()).unwrap();
        assert_eq!(
            config.base,
            Point {
                n: 3,
                value: 10.0,
                sale_price: 0.0,
                bid_fee: 1.0,
                rho: 0.0
            }
        );
        assert_eq!(config.mode, GameMode::WithReentry);
        assert_eq!(
            (config.replications, config.seed, config.round_cap),
            (0, 0, DEFAULT_ROUND_CAP)
        );
        assert_eq!(config.format, Format::Json);
        let simulate = ExperimentConfig::resolve(Command::Simulate, &flags()).unwrap();
        assert_eq!(simulate.replications, 100_000);
    }

    #[test]
    fn key_value_lines() {
        let file = ConfigFile::parse(
            "# grid point\nn = 4\nbid_fee=0.5\nmode = no-reentry\nsweep = rho=0,-0.1\n\n",
        )
        .unwrap();
        assert_eq!(file.get::<usize>("n").unwrap(), Some(4));
        assert_eq!(file.get::<f64>("bid-fee").unwrap(), Some(0.5));
        assert_eq!(
            file.get_enum::<Mode>("mode").unwrap(),
            Some(Mode::NoReentry)
        );
        assert_eq!(file.sweep, vec!["rho=0,-0.1".to_owned()]);
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("n 4").is_err());
        assert!(ConfigFile::parse("n = 4\nn = 5").is_err());
    }

    #[test]
    fn json_documents() {
        let file = ConfigFile::parse(
            r#"{"n": 4, "value": "100", "sweep": {"rho": [0, -0.1], "n": [2, 5]}}"#,
        )
        .unwrap();
        assert_eq!(file.get::<usize>("n").unwrap(), Some(4));
        assert_eq!(file.get::<f64>("value").unwrap(), Some(100.0));
        assert_eq!(
            file.sweep,
            vec!["rho=0,-0.1".to_owned(), "n=2,5".to_owned()]
        );
        let list = ConfigFile::parse(r#"{"sweep": ["v=10,100"]}"#).unwrap();
        assert_eq!(list.sweep, vec!["v=10,100".to_owned()]);
        assert!(ConfigFile::parse(r#"{"n": [4]}"#).is_err());
        assert!(ConfigFile::parse("[1]").is_err());
    }

    #[test]
    fn sweeps_expand_in_order() {
        let mut f = flags();
        f.sweep = vec!["n=2,5".into(), "rho=0,-0.1".into()];
        let config = ExperimentConfig::resolve(Command::Equilibrium, &f).unwrap();
        let points: Vec<(usize, f64)> = config.points().iter().map(|p| (p.n, p.rho)).collect();
        assert_eq!(points, vec![(2, 0.0), (2, -0.1), (5, 0.0), (5, -0.1)]);
    }

    #[test]
    fn sweeps_are_validated() {
        assert!("q=1,2".parse::<Sweep>().is_err());
        assert!("n=2.5".parse::<Sweep>().is_err());
        assert!("rho".parse::<Sweep>().is_err());
        assert_eq!(
            "c=0.5, 1".parse::<Sweep>().unwrap(),
            Sweep {
                param: Param::BidFee,
                values: vec![0.5, 1.0]
            }
        );
        let mut f = flags();
        f.sweep = vec!["rho=0".into(), "rho=-0.1".into()];
        assert!(ExperimentConfig::resolve(Command::Equilibrium, &f).is_err());
    }

    #[test]
    fn swept_parameters_need_no_base_value() {
        let f = Flags {
            n: Some(3),
            bid_fee: Some(1.0),
            sweep: vec!["v=10,100".into()],
            ..Flags::default()
        };
        let config = ExperimentConfig::resolve(Command::Equilibrium, &f).unwrap();
        assert_eq!(
            config.points().iter().map(|p| p.value).collect::<Vec<_>>(),
            vec![10.0, 100.0]
        );
        let f = Flags {
            n: Some(3),
            bid_fee: Some(1.0),
            ..Flags::default()
        };
        assert!(ExperimentConfig::resolve(Command::Equilibrium, &f).is_err());
    }

    #[test]
    fn invalid_run_settings_are_rejected() {
        let check = |f: Flags, command| ExperimentConfig::resolve(command, &f).is_err();
        assert!(check(
            Flags {
                tol: Some(0.0),
                ..flags()
            },
            Command::Revenue
        ));
        assert!(check(
            Flags {
                round_cap: Some(0),
                ..flags()
            },
            Command::Simulate
        ));
        assert!(check(
            Flags {
                replications: Some(0),
                ..flags()
            },
            Command::Simulate
        ));
        assert!(check(
            Flags {
                workers: Some(0),
                ..flags()
            },
            Command::Simulate
        ));
    }
}
