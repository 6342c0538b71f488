use serde::{Deserialize, Serialize};

use super::rules::AllocationRule;
use crate::error::{Error, Result};

/// Largest bid tried when probing, `2^60`.
pub const PROBE_CAP_EXP: i32 = 60;
pub const PROBE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxThreshold {
    /// π*: limiting single-bidder win probability.
    pub max_probability: f64,
    /// M*: least bid reaching π*.
    pub max_threshold: f64,
    /// Taken from the rule's closed form rather than probed.
    pub declared: bool,
    /// False when the curve was still rising at the probe cap; π* is then
    /// the probed supremum.
    pub converged: bool,
}

/// Win probability of a lone bidder. Rules that need more participants see
/// the bidder facing zero bids.
pub fn single_bidder_allocation(rule: &AllocationRule, bid: f64) -> Result<f64> {
    let n = rule
        .min_arity()
        .ok_or_else(|| Error::Unsupported(format!("{} has no supported arity", rule.name())))?;
    let mut bids = vec![0.0; n];
    bids[0] = bid;
    Ok(rule.allocate(&bids)?[0])
}

/// Expected payment of a lone bidder, with the same padding as
/// [`single_bidder_allocation`].
pub fn single_bidder_payment(rule: &AllocationRule, bid: f64) -> Result<f64> {
    let n = rule
        .min_arity()
        .ok_or_else(|| Error::Unsupported(format!("{} has no supported arity", rule.name())))?;
    let mut bids = vec![0.0; n];
    bids[0] = bid;
    Ok(rule.myerson_payments(&bids)?[0])
}

/// `(π*, M*)` of a rule: the declared values when the rule has them,
/// otherwise probed from the single-bidder curve.
pub fn max_threshold(rule: &AllocationRule) -> Result<MaxThreshold> {
    if let Some((pi, m)) = rule.declared_max_threshold() {
        return Ok(MaxThreshold { max_probability: pi, max_threshold: m, declared: true, converged: true });
    }
    probe_max_threshold(|b| single_bidder_allocation(rule, b))
}

/// Probes a nondecreasing single-bidder curve by doubling up to `2^60` and
/// then bisecting for the least bid within [`PROBE_TOL`] of the supremum.
pub fn probe_max_threshold(mut prob: impl FnMut(f64) -> Result<f64>) -> Result<MaxThreshold> {
    let levels: Vec<f64> = (0..=PROBE_CAP_EXP).map(|k| 2f64.powi(k)).collect();
    let mut values = Vec::with_capacity(levels.len());
    for &b in &levels {
        values.push(prob(b)?);
    }
    let sup = values[values.len() - 1];
    let converged = sup - values[values.len() - 2] <= PROBE_TOL;
    let reached = |p: f64| p >= sup - PROBE_TOL;

    if reached(prob(0.0)?) {
        return Ok(MaxThreshold { max_probability: sup, max_threshold: 0.0, declared: false, converged });
    }
    let k = values.iter().position(|&p| reached(p)).expect("cap level reaches itself");
    let (mut lo, mut hi) = (if k == 0 { 0.0 } else { levels[k - 1] }, levels[k]);
    while hi - lo > PROBE_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if reached(prob(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MaxThreshold { max_probability: sup, max_threshold: hi, declared: false, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declared_second_price() {
        let mt = max_threshold(&AllocationRule::second_price()).unwrap();
        assert_eq!((mt.max_probability, mt.max_threshold), (1.0, 0.0));
        assert!(mt.declared);
        let r = AllocationRule::second_price_with_reserve(2.5).unwrap();
        let mt = max_threshold(&r).unwrap();
        assert_eq!((mt.max_probability, mt.max_threshold), (1.0, 2.5));
    }

    #[test]
    fn probing_reserve_matches_declaration() {
        let r = AllocationRule::second_price_with_reserve(2.5).unwrap();
        let mt = probe_max_threshold(|b| single_bidder_allocation(&r, b)).unwrap();
        assert_eq!(mt.max_probability, 1.0);
        assert!((mt.max_threshold - 2.5).abs() < 1e-8);
        let mt = probe_max_threshold(|b| single_bidder_allocation(&AllocationRule::second_price(), b)).unwrap();
        assert_eq!((mt.max_probability, mt.max_threshold), (1.0, 0.0));
    }

    #[test]
    fn probing_saturating_linear_curve() {
        let mt = probe_max_threshold(|b| Ok(0.9 * b.min(1.0))).unwrap();
        assert!((mt.max_probability - 0.9).abs() < 1e-12);
        assert!((mt.max_threshold - 1.0).abs() < 2e-9);
        assert!(mt.converged && !mt.declared);
    }

    #[test]
    fn probing_flags_unbounded_rise() {
        let mt = probe_max_threshold(|b| Ok(1.0 - 1.0 / (1.0 + (1.0 + b).ln()))).unwrap();
        assert!(!mt.converged);
        assert!(mt.max_probability < 1.0);
    }

    #[test]
    fn padded_single_bidder_for_rand() {
        let r = AllocationRule::rand(1.7, 0.4).unwrap();
        assert_eq!(single_bidder_allocation(&r, 3.0).unwrap(), 1.0);
        assert_eq!(single_bidder_payment(&r, 3.0).unwrap(), 0.0);
    }
}
