//! Pay-to-bid ("penny") auctions with risk-loving bidders.
//!
//! Every round, each active player either bids (paying the fee `c`) or
//! passes. A lone bidder wins the object of value `v` and pays the sale
//! price `s`; if nobody bids the round is replayed. Bidders have
//! constant-absolute-risk-loving utility with coefficient `rho <= 0`.
//!
//! The crate provides
//! - [`utility`]: the CARL kernel and its identities,
//! - [`equilibrium`]: the symmetric equilibrium bid probabilities,
//! - [`revenue`]: hazard rate, fee series and closed-form seller revenue,
//! - [`attrition`]: first-passage dynamics when re-entry is forbidden,
//! - [`simulator`]: an exact, reproducible Monte Carlo engine used to check
//!   all of the above.

pub mod attrition;
pub mod equilibrium;
pub mod error;
pub mod params;
pub mod revenue;
pub mod simulator;
pub mod stats;
pub mod utility;

pub use attrition::{AttritionTable, PassageNumerator};
pub use equilibrium::{BidProbability, EquilibriumPolicy};
pub use error::{Error, Result};
pub use params::AuctionParams;
pub use revenue::RevenueBreakdown;
pub use simulator::{GameMode, SimulationConfig, SimulationResult};
pub use stats::Estimate;
pub use utility::{CarlUtility, RiskCoefficient};
