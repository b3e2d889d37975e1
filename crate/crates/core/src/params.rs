use serde::Serialize;

use crate::error::{Error, Result};
use crate::utility::{CarlUtility, RiskCoefficient};

/// The primitives of one auction: player count, object value, sale price,
/// bid fee and the bidders' common risk coefficient.
///
/// Construction rejects every tuple for which no interior mixed equilibrium
/// exists, so downstream formulas never have to re-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuctionParams {
    n: usize,
    value: f64,
    sale_price: f64,
    bid_fee: f64,
    utility: CarlUtility,
    utility_of_fee: f64,
    utility_of_surplus: f64,
    win_probability: f64,
}

impl AuctionParams {
    pub fn new(n: usize, value: f64, sale_price: f64, bid_fee: f64, rho: f64) -> Result<Self> {
        for (name, x) in [("v", value), ("s", sale_price), ("c", bid_fee)] {
            if !x.is_finite() {
                return Err(Error::NonFinite { name, value: x });
            }
        }
        let risk = RiskCoefficient::new(rho)?;
        if n < 2 {
            return Err(Error::TooFewPlayers(n));
        }
        if value <= 0.0 {
            return Err(Error::NonPositiveValue(value));
        }
        if sale_price < 0.0 {
            return Err(Error::NegativeSalePrice(sale_price));
        }
        if bid_fee <= 0.0 {
            return Err(Error::NonPositiveBidFee(bid_fee));
        }
        let surplus = value - sale_price;
        if bid_fee >= surplus {
            return Err(Error::FeeExceedsSurplus { bid_fee, surplus });
        }

        let utility = CarlUtility::new(risk);
        let utility_of_fee = utility.evaluate(bid_fee)?;
        let utility_of_surplus = utility.evaluate(surplus)?;
        let win_probability = utility_of_fee / utility_of_surplus;
        if win_probability >= 1.0 {
            // c < v - s but the two utilities round to the same double.
            return Err(Error::FeeExceedsSurplus { bid_fee, surplus });
        }
        if win_probability <= 0.0 || !win_probability.is_normal() {
            return Err(Error::Underflow);
        }

        Ok(Self {
            n,
            value,
            sale_price,
            bid_fee,
            utility,
            utility_of_fee,
            utility_of_surplus,
            win_probability,
        })
    }

    /// Same primitives with a different player count.
    pub fn with_players(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPlayers(n));
        }
        Ok(Self { n, ..*self })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn sale_price(&self) -> f64 {
        self.sale_price
    }

    pub fn bid_fee(&self) -> f64 {
        self.bid_fee
    }

    pub fn rho(&self) -> f64 {
        self.utility.risk().value()
    }

    pub fn risk(&self) -> RiskCoefficient {
        self.utility.risk()
    }

    pub fn utility(&self) -> CarlUtility {
        self.utility
    }

    /// `u(c)`.
    pub fn utility_of_fee(&self) -> f64 {
        self.utility_of_fee
    }

    /// `u(v - s)`.
    pub fn utility_of_surplus(&self) -> f64 {
        self.utility_of_surplus
    }

    /// `lambda = u(c) / u(v - s)`, strictly inside (0, 1).
    pub fn lambda(&self) -> f64 {
        self.win_probability
    }
}
