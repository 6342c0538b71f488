//! Randomized checks of the structural properties every shipped rule must
//! have: anonymity, monotonicity, a valid probability vector, the
//! lowest-bidder share bound and the lone-bidder cost bound.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::probe::{max_threshold, single_bidder_payment};
use super::rules::AllocationRule;
use crate::error::{Error, Result};

const EPS: f64 = 1e-12;
const SHARE_TOL: f64 = 1e-9;
const MAX_ARITY: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Anonymity,
    Monotonicity,
    ProbabilitySum,
    LowestBidderShare,
    SingleBidderCost,
    PaymentBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub trials: usize,
    /// First violating bid vector, if any.
    pub counterexample: Option<Vec<f64>>,
    pub detail: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    fn pass(property: Property, trials: usize) -> Self {
        PropertyReport { property, trials, counterexample: None, detail: None }
    }

    fn fail(property: Property, trials: usize, bids: &[f64], detail: String) -> Self {
        PropertyReport { property, trials, counterexample: Some(bids.to_vec()), detail: Some(detail) }
    }
}

fn arities(rule: &AllocationRule) -> Result<Vec<usize>> {
    let a: Vec<usize> = (1..=MAX_ARITY).filter(|&n| rule.supports_arity(n)).collect();
    if a.is_empty() {
        return Err(Error::Unsupported(format!("{} supports no arity up to {MAX_ARITY}", rule.name())));
    }
    Ok(a)
}

fn rule_alpha(rule: &AllocationRule) -> f64 {
    match rule {
        AllocationRule::Rand { alpha, .. } | AllocationRule::UniformTopCluster { alpha, .. } => *alpha,
        _ => 1.5,
    }
}

/// Random bid vector mixing continuous draws, small integers (ties and
/// zeros) and exact multiples by the rule's ratio parameter (boundaries).
fn sample_bids(rng: &mut ChaCha8Rng, n: usize, alpha: f64) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..n).map(|_| rng.random_range(0.0..10.0)).collect(),
        1 => (0..n).map(|_| rng.random_range(0..4) as f64).collect(),
        _ => {
            let base: f64 = rng.random_range(0.5..5.0);
            (0..n)
                .map(|_| match rng.random_range(0..4) {
                    0 => base,
                    1 => base * alpha,
                    2 => base / alpha,
                    _ => base * rng.random_range(0.8..1.25),
                })
                .collect()
        }
    }
}

/// Permuting the bids permutes the allocation and the payments identically.
pub fn check_anonymity(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = arities(rule)?;
    let alpha = rule_alpha(rule);
    let priced = rule.myerson_payments(&vec![1.0; ns[0]]).is_ok();
    for t in 0..trials {
        let n = ns[rng.random_range(0..ns.len())];
        let bids = sample_bids(&mut rng, n, alpha);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<f64> = perm.iter().map(|&k| bids[k]).collect();
        let x = rule.allocate(&bids)?;
        let xp = rule.allocate(&permuted)?;
        if perm.iter().enumerate().any(|(pos, &k)| (xp[pos] - x[k]).abs() > EPS) {
            return Ok(PropertyReport::fail(
                Property::Anonymity,
                t + 1,
                &bids,
                format!("allocation {x:?} vs permuted {xp:?} under {perm:?}"),
            ));
        }
        if priced {
            let pay = rule.myerson_payments(&bids)?;
            let payp = rule.myerson_payments(&permuted)?;
            let scale = bids.iter().copied().fold(1.0, f64::max);
            if perm.iter().enumerate().any(|(pos, &k)| (payp[pos] - pay[k]).abs() > EPS * scale) {
                return Ok(PropertyReport::fail(
                    Property::Anonymity,
                    t + 1,
                    &bids,
                    format!("payments {pay:?} vs permuted {payp:?} under {perm:?}"),
                ));
            }
        }
    }
    Ok(PropertyReport::pass(Property::Anonymity, trials))
}

/// Raising one bid, others fixed, never lowers that bidder's probability.
pub fn check_monotonicity(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = arities(rule)?;
    let alpha = rule_alpha(rule);
    for t in 0..trials {
        let n = ns[rng.random_range(0..ns.len())];
        let bids = sample_bids(&mut rng, n, alpha);
        let i = rng.random_range(0..n);
        let mut raised = bids.clone();
        raised[i] = if n > 1 && rng.random_bool(0.5) {
            // Jump to a boundary defined by another bid.
            let k = (i + rng.random_range(1..n)) % n;
            let target = [bids[k] / alpha, bids[k], bids[k] * alpha][rng.random_range(0..3)];
            target.max(bids[i])
        } else {
            bids[i] + rng.random_range(0.0..3.0)
        };
        let before = rule.allocate(&bids)?[i];
        let after = rule.allocate(&raised)?[i];
        if after < before - EPS {
            return Ok(PropertyReport::fail(
                Property::Monotonicity,
                t + 1,
                &bids,
                format!("bidder {i}: {before} at {} drops to {after} at {}", bids[i], raised[i]),
            ));
        }
    }
    Ok(PropertyReport::pass(Property::Monotonicity, trials))
}

/// Probabilities are nonnegative and sum to at most one.
pub fn check_probability_sum(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = arities(rule)?;
    let alpha = rule_alpha(rule);
    for t in 0..trials {
        let n = ns[rng.random_range(0..ns.len())];
        let bids = sample_bids(&mut rng, n, alpha);
        let x = rule.allocate(&bids)?;
        let sum: f64 = x.iter().sum();
        if x.iter().any(|&v| v < 0.0) || sum > 1.0 + EPS {
            return Ok(PropertyReport::fail(
                Property::ProbabilitySum,
                t + 1,
                &bids,
                format!("allocation {x:?} sums to {sum}"),
            ));
        }
    }
    Ok(PropertyReport::pass(Property::ProbabilitySum, trials))
}

/// With `k` bidders the lowest bidder wins with probability at most `1/k`.
pub fn check_lowest_bidder_share(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = arities(rule)?;
    let alpha = rule_alpha(rule);
    for t in 0..trials {
        let n = ns[rng.random_range(0..ns.len())];
        let bids = sample_bids(&mut rng, n, alpha);
        let x = rule.allocate(&bids)?;
        let low = (0..n).min_by(|&a, &b| bids[a].total_cmp(&bids[b])).expect("n >= 1");
        if x[low] > 1.0 / n as f64 + SHARE_TOL {
            return Ok(PropertyReport::fail(
                Property::LowestBidderShare,
                t + 1,
                &bids,
                format!("lowest bidder {low} wins with {} > 1/{n}", x[low]),
            ));
        }
    }
    Ok(PropertyReport::pass(Property::LowestBidderShare, trials))
}

/// A lone bidder at or above M* pays at most `π* · M*`.
pub fn check_single_bidder_cost(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mt = max_threshold(rule)?;
    let cap = mt.max_probability * mt.max_threshold;
    for t in 0..trials {
        let bid = match t % 3 {
            0 => mt.max_threshold,
            1 => mt.max_threshold * (1.0 + rng.random_range(0.0..10.0)) + rng.random_range(0.0..1.0),
            _ => mt.max_threshold + rng.random_range(0.0..1e6),
        };
        let pay = single_bidder_payment(rule, bid)?;
        if pay > cap + SHARE_TOL {
            return Ok(PropertyReport::fail(
                Property::SingleBidderCost,
                t + 1,
                &[bid],
                format!("lone bidder pays {pay} > π*·M* = {cap}"),
            ));
        }
    }
    Ok(PropertyReport::pass(Property::SingleBidderCost, trials))
}

/// `0 <= payment_i <= x_i · b_i`.
pub fn check_payment_bounds(rule: &AllocationRule, trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = arities(rule)?;
    let alpha = rule_alpha(rule);
    for t in 0..trials {
        let n = ns[rng.random_range(0..ns.len())];
        let bids = sample_bids(&mut rng, n, alpha);
        let (x, pay) = rule.run(&bids)?;
        let bad = (0..n).find(|&i| pay[i] < 0.0 || pay[i] > x[i] * bids[i] * (1.0 + EPS) + EPS);
        if let Some(i) = bad {
            return Ok(PropertyReport::fail(
                Property::PaymentBounds,
                t + 1,
                &bids,
                format!("bidder {i} pays {} with x = {} and bid {}", pay[i], x[i], bids[i]),
            ));
        }
    }
    Ok(PropertyReport::pass(Property::PaymentBounds, trials))
}

/// Every check above, each with its own derived seed.
pub fn check_all(rule: &AllocationRule, trials: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    Ok(vec![
        check_anonymity(rule, trials, seed)?,
        check_monotonicity(rule, trials, seed.wrapping_add(1))?,
        check_probability_sum(rule, trials, seed.wrapping_add(2))?,
        check_lowest_bidder_share(rule, trials, seed.wrapping_add(3))?,
        check_single_bidder_cost(rule, trials, seed.wrapping_add(4))?,
        check_payment_bounds(rule, trials, seed.wrapping_add(5))?,
    ])
}
