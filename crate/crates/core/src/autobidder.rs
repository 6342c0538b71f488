//! Per-bidder value and spend, the tCPA check, and best responses over the
//! uniform bid multiplier.
//!
//! A bidder's value and spend are step functions of its multiplier (others
//! fixed): every breakpoint of its per-query allocation curve maps to a
//! multiplier breakpoint `threshold / (T(i) v_ij ctr_ij)`. The best response
//! sweeps those breakpoints once, evaluating each open interval between
//! them, and evaluates a few exact points (0, 1 and the incumbent) directly.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanisms::{AllocationCurve, AllocationRule};
use crate::model::{bids_from_multipliers, Allocation, AuctionOutcome, BidProfile, Instance};

/// Absolute slack on the tCPA inequality, scaled by the right-hand side when
/// that exceeds 1.
pub const TCPA_SLACK: f64 = 1e-12;

/// Runs the per-query auction on every query.
pub fn run_auctions(inst: &Instance, rule: &AllocationRule, prof: &BidProfile) -> Result<AuctionOutcome> {
    let bids = bids_from_multipliers(inst, prof)?;
    run_auctions_on_bids(rule, &bids)
}

pub(crate) fn run_auctions_on_bids(rule: &AllocationRule, bids: &[Vec<f64>]) -> Result<AuctionOutcome> {
    let mut probs = Vec::with_capacity(bids.len());
    let mut payments = Vec::with_capacity(bids.len());
    for row in bids {
        let (x, pay) = rule.run(row)?;
        probs.push(x);
        payments.push(pay);
    }
    AuctionOutcome::new(Allocation::new(probs)?, payments)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderStats {
    pub bidder: usize,
    pub target: f64,
    /// Expected conversions `Σ_j x_ij ctr_ij v_ij`.
    pub value: f64,
    /// Expected spend `Σ_j payment_ij`.
    pub spend: f64,
    /// `T(i) · value`.
    pub lw_contribution: f64,
}

impl BidderStats {
    /// `(1 + γ) T(i) value − spend`.
    pub fn tcpa_slack(&self, gamma: f64) -> f64 {
        (1.0 + gamma) * self.lw_contribution - self.spend
    }
}

pub fn bidder_stats(inst: &Instance, outcome: &AuctionOutcome, i: usize) -> BidderStats {
    let value: f64 = (0..inst.n_queries())
        .map(|j| outcome.allocation.get(i, j) * inst.effective_value(i, j))
        .sum();
    let target = inst.target(i);
    BidderStats { bidder: i, target, value, spend: outcome.spend(i), lw_contribution: target * value }
}

pub fn evaluate_bidder(
    inst: &Instance,
    rule: &AllocationRule,
    prof: &BidProfile,
    i: usize,
) -> Result<BidderStats> {
    let outcome = run_auctions(inst, rule, prof)?;
    Ok(bidder_stats(inst, &outcome, i))
}

fn feasible(target: f64, value: f64, spend: f64, gamma: f64) -> bool {
    let rhs = (1.0 + gamma) * target * value;
    spend <= rhs + TCPA_SLACK * rhs.max(1.0)
}

/// Spend within `(1 + γ)` of the target-weighted value.
pub fn tcpa_satisfied(stats: &BidderStats, gamma: f64) -> bool {
    feasible(stats.target, stats.value, stats.spend, gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub bidder: usize,
    /// Best tCPA-feasible multiplier. The incumbent is kept when nothing beats
    /// it, unless it is below 1 and an equally good multiplier of at least 1
    /// exists.
    pub multiplier: f64,
    pub value: f64,
    pub spend: f64,
    pub current_value: f64,
    /// Whether the incumbent multiplier is itself feasible at the tolerance.
    pub current_feasible: bool,
    /// Best feasible value minus the incumbent value, floored at 0.
    pub gain: f64,
    pub candidates: usize,
}

/// The part of one query that bidder `i` can move.
struct QueryView {
    weight: f64,
    effective_value: f64,
    others: Vec<f64>,
    curve: AllocationCurve,
}

fn views(inst: &Instance, rule: &AllocationRule, bids: &[Vec<f64>], i: usize) -> Result<Vec<QueryView>> {
    let mut out = Vec::new();
    for (j, row) in bids.iter().enumerate() {
        let weight = inst.bid_weight(i, j);
        if weight <= 0.0 {
            // Own bid is 0 whatever the multiplier, so neither value nor
            // spend can change.
            continue;
        }
        let others: Vec<f64> = row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &b)| b).collect();
        let curve = rule.allocation_curve(&others, i)?;
        out.push(QueryView { weight, effective_value: inst.effective_value(i, j), others, curve });
    }
    Ok(out)
}

/// Exact `(value, spend)` at a multiplier, using the rule's own tie handling.
fn evaluate_at(rule: &AllocationRule, views: &[QueryView], i: usize, multiplier: f64) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut spend = 0.0;
    let mut bids = Vec::new();
    for v in views {
        let b = multiplier * v.weight;
        bids.clear();
        bids.extend_from_slice(&v.others[..i]);
        bids.push(b);
        bids.extend_from_slice(&v.others[i..]);
        let x = rule.allocate(&bids)?[i];
        value += x * v.effective_value;
        spend += v.curve.payment(b, x);
    }
    Ok((value, spend))
}

/// `(multiplier, value, spend)` at an interior point of every interval
/// between consecutive multiplier breakpoints. Value and spend are constant
/// on each open interval; midpoints keep the chosen multiplier away from
/// the breakpoints, where another bidder could otherwise shadow it by a
/// rounding-sized margin.
fn sweep(views: &[QueryView]) -> Vec<(f64, f64, f64)> {
    let mut events: Vec<(f64, f64, f64)> = views
        .iter()
        .flat_map(|v| {
            v.curve
                .jumps()
                .map(move |(t, d)| (t / v.weight, d * v.effective_value, d * t))
        })
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out = Vec::new();
    let (mut value, mut spend) = (0.0, 0.0);
    let mut k = 0;
    if events.first().is_some_and(|e| e.0 > 0.0) {
        out.push((0.5 * events[0].0, 0.0, 0.0));
    }
    while k < events.len() {
        let lo = events[k].0;
        while k < events.len() && events[k].0 == lo {
            value += events[k].1;
            spend += events[k].2;
            k += 1;
        }
        let point = match events.get(k) {
            Some(next) if lo == 0.0 => 0.5 * next.0,
            Some(next) => 0.5 * (lo + next.0),
            None if lo == 0.0 => 1.0,
            None => 2.0 * lo,
        };
        out.push((point, value, spend));
    }
    out
}

/// Best unilateral multiplier for bidder `i`, others frozen, feasibility
/// judged at tolerance `gamma`.
pub fn best_response(
    inst: &Instance,
    rule: &AllocationRule,
    prof: &BidProfile,
    i: usize,
    gamma: f64,
) -> Result<BestResponse> {
    let bids = bids_from_multipliers(inst, prof)?;
    best_response_on_bids(inst, rule, &bids, prof.get(i), i, gamma)
}

pub(crate) fn best_response_on_bids(
    inst: &Instance,
    rule: &AllocationRule,
    bids: &[Vec<f64>],
    current: f64,
    i: usize,
    gamma: f64,
) -> Result<BestResponse> {
    let target = inst.target(i);
    let views = views(inst, rule, bids, i)?;
    let (current_value, current_spend) = evaluate_at(rule, &views, i, current)?;
    let current_feasible = feasible(target, current_value, current_spend, gamma);

    let mut candidates = sweep(&views);
    for m in [0.0, 1.0] {
        let (v, s) = evaluate_at(rule, &views, i, m)?;
        candidates.push((m, v, s));
    }
    let n_candidates = candidates.len() + 1;
    candidates.retain(|&(_, v, s)| feasible(target, v, s, gamma));

    let best_value = candidates
        .iter()
        .map(|c| c.1)
        .chain(current_feasible.then_some(current_value))
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TCPA_SLACK * best_value.abs().max(1.0);

    let current_optimal = current_feasible && current_value >= best_value - tol;
    let (multiplier, value, spend) = if current_optimal && current >= 1.0 {
        (current, current_value, current_spend)
    } else {
        let mut top: Vec<(f64, f64, f64)> =
            candidates.into_iter().filter(|c| c.1 >= best_value - tol).collect();
        if current_optimal {
            top.push((current, current_value, current_spend));
        }
        top.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Prefer the smallest multiplier of at least one; value is
        // nondecreasing in the multiplier and 1 is always feasible, so one
        // exists whenever any candidate reaches the best value.
        top.iter()
            .find(|c| c.0 >= 1.0)
            .or(top.first())
            .copied()
            .unwrap_or((current, current_value, current_spend))
    };
    let gain = if best_value.is_finite() { (best_value - current_value).max(0.0) } else { 0.0 };
    Ok(BestResponse {
        bidder: i,
        multiplier,
        value,
        spend,
        current_value,
        current_feasible,
        gain,
        candidates: n_candidates,
    })
}
