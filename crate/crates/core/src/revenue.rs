//! Seller revenue with re-entry: hazard rate, expected entrants per
//! effective round, the fee series and its closed form.

use serde::Serialize;

use crate::equilibrium::{equilibrium_action, BidProbability};
use crate::error::{Error, Result};
use crate::params::AuctionParams;

/// Default absolute truncation tolerance for [`revenue_series`].
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-9;

/// Most terms [`revenue_series`] will sum before giving up.
pub const SERIES_TERM_BUDGET: u64 = 200_000_000;

/// Which exponent normalises the "at least one bid" conditioning.
///
/// `AllPlayers` divides by `1 - (1-p)^k`, the probability that not all `k`
/// players pass, which is what the resubmission rule conditions on.
/// `AllButOne` divides by `1 - (1-p)^(k-1)`; it is kept so the two can be
/// compared. Revenue is the same under both because the factor cancels in
/// `c Q / h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    #[default]
    AllPlayers,
    AllButOne,
}

impl Conditioning {
    fn normaliser(self, k: usize, action: BidProbability) -> f64 {
        let exponent = match self {
            Conditioning::AllPlayers => k,
            Conditioning::AllButOne => k - 1,
        } as f64;
        // 1 - q^e without cancellation when q is close to one.
        let ln_exit = if action.bid() < 0.5 {
            (-action.bid()).ln_1p()
        } else {
            action.exit().ln()
        };
        -(exponent * ln_exit).exp_m1()
    }
}

/// Probability that an effective round has exactly one bidder.
pub fn hazard_for(k: usize, action: BidProbability, conditioning: Conditioning) -> f64 {
    let exactly_one = k as f64 * action.bid() * action.exit().powi((k - 1) as i32);
    exactly_one / conditioning.normaliser(k, action)
}

/// Expected bids in an effective round.
pub fn entrants_for(k: usize, action: BidProbability, conditioning: Conditioning) -> f64 {
    k as f64 * action.bid() / conditioning.normaliser(k, action)
}

/// `h = k p (1-p)^(k-1) / (1 - (1-p)^k)` at the equilibrium `p = p(k)`.
pub fn hazard_rate(params: &AuctionParams, k: usize) -> Result<f64> {
    hazard_rate_with(params, k, Conditioning::AllPlayers)
}

pub fn hazard_rate_with(
    params: &AuctionParams,
    k: usize,
    conditioning: Conditioning,
) -> Result<f64> {
    let action = equilibrium_action(params, k)?;
    Ok(hazard_for(k, action, conditioning))
}

/// `Q = k p / (1 - (1-p)^k)` at the equilibrium `p = p(k)`.
pub fn expected_entrants(params: &AuctionParams, k: usize) -> Result<f64> {
    expected_entrants_with(params, k, Conditioning::AllPlayers)
}

pub fn expected_entrants_with(
    params: &AuctionParams,
    k: usize,
    conditioning: Conditioning,
) -> Result<f64> {
    let action = equilibrium_action(params, k)?;
    Ok(entrants_for(k, action, conditioning))
}

/// Expected fee income, `sum_t (1-h)^(t-1) c Q`, summed term by term.
///
/// Summation stops once the geometric tail `(1-h)^t c Q / h` drops below
/// `truncation_tol`. Only the stationary (re-entry) equilibrium is covered.
/// Fails with [`Error::SeriesBudget`] when reaching the tolerance would take
/// more than [`SERIES_TERM_BUDGET`] terms.
pub fn revenue_series(params: &AuctionParams, truncation_tol: f64) -> Result<f64> {
    if truncation_tol.is_nan() || truncation_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance must be positive, got {truncation_tol}"
        )));
    }
    let k = params.n();
    let h = hazard_rate(params, k)?;
    let first = params.bid_fee() * expected_entrants(params, k)?;
    // ln(1 - h); every term is exp((t-1) * log_survival) * first.
    let log_survival = (-h).ln_1p();

    let tail_ratio = truncation_tol * h / first;
    if tail_ratio < 1.0 {
        let terms_needed = (tail_ratio.ln() / log_survival).ceil();
        if terms_needed.is_nan() || terms_needed > SERIES_TERM_BUDGET as f64 {
            return Err(Error::SeriesBudget {
                terms_needed,
                budget: SERIES_TERM_BUDGET,
            });
        }
    }

    // Neumaier compensated summation.
    let mut sum = 0.0_f64;
    let mut compensation = 0.0_f64;
    let mut t: u64 = 0;
    loop {
        let term = first * (t as f64 * log_survival).exp();
        let next = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - next) + term;
        } else {
            compensation += (term - next) + sum;
        }
        sum = next;
        t += 1;
        let tail = first * (t as f64 * log_survival).exp() / h;
        if tail < truncation_tol || t >= SERIES_TERM_BUDGET {
            break;
        }
    }
    Ok(sum + compensation)
}

/// Closed-form expected revenue and the per-round quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevenueBreakdown {
    pub sale_price_component: f64,
    pub fee_component: f64,
    pub total: f64,
    pub hazard: f64,
    pub expected_entrants: f64,
    pub expected_length: f64,
}

/// `s + c u(v - s) / u(c)`, exactly `v` for risk-neutral bidders.
pub fn closed_form_revenue(params: &AuctionParams) -> Result<RevenueBreakdown> {
    let k = params.n();
    let hazard = hazard_rate(params, k)?;
    let expected_entrants = expected_entrants(params, k)?;
    let s = params.sale_price();
    let (fee_component, total) = if params.risk().is_neutral() {
        (params.value() - s, params.value())
    } else {
        let fees = params.bid_fee() * params.utility_of_surplus() / params.utility_of_fee();
        (fees, s + fees)
    };
    Ok(RevenueBreakdown {
        sale_price_component: s,
        fee_component,
        total,
        hazard,
        expected_entrants,
        expected_length: 1.0 / hazard,
    })
}

/// Least upper bound of the revenue over all admissible `(s, c)` at the
/// given `v` and `rho`: `u(v)`, which is `v` for risk-neutral bidders.
pub fn revenue_supremum(params: &AuctionParams) -> Result<f64> {
    params.utility().evaluate(params.value())
}
