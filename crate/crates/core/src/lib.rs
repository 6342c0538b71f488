//! Simulator and verification toolkit for prior-free auctions with tCPA
//! auto-bidders.
//!
//! - [`model`]: instances, bid profiles, allocations, liquid welfare.
//! - [`mechanisms`]: allocation rules, Myerson payments, property checks.
//! - [`autobidder`]: per-bidder accounting and best responses.
//! - [`equilibrium`]: equilibrium verification, dynamics, price of anarchy,
//!   query-partition audit.
//! - [`lpbound`]: the four-class factor-revealing LP and its dual certificate.
//! - [`instances`]: the tight two-bidder example, the many-bidder
//!   lower-bound construction and random instances.

pub mod autobidder;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod lpbound;
pub mod mechanisms;
pub mod model;

pub use error::{Error, Result};
pub use mechanisms::{AllocationCurve, AllocationRule, MaxThreshold};
pub use model::{
    bids_from_multipliers, liquid_welfare, optimal_allocation, Allocation, AuctionOutcome, BidProfile,
    Bidder, Instance, OptimalAllocation, Query,
};
