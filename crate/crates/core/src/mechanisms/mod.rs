//! Anonymous randomized truthful single-item rules with exact Myerson
//! payments, structural property checks and max-threshold probing.

mod curve;
mod probe;
pub mod properties;
mod rules;

pub use curve::AllocationCurve;
pub use probe::{
    max_threshold, probe_max_threshold, single_bidder_allocation, single_bidder_payment,
    MaxThreshold, PROBE_CAP_EXP, PROBE_TOL,
};
pub use properties::{check_anonymity, check_monotonicity, Property, PropertyReport};
pub use rules::{AllocationRule, CustomRule, RuleKind};
