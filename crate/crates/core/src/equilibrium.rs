//! Equilibrium verification, best-response dynamics, price-of-anarchy
//! measurement and the four-class query audit for two-bidder randomized
//! auctions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autobidder::{best_response, best_response_on_bids, bidder_stats, run_auctions_on_bids, tcpa_satisfied, BidderStats};
use crate::error::{Error, Result};
use crate::lpbound::{ms_constants, MSConstants};
use crate::mechanisms::AllocationRule;
use crate::model::{bids_from_multipliers, liquid_welfare, optimal_allocation, BidProfile, Instance};

/// Absolute slack on the gain comparison against `Δ`.
pub const GAIN_SLACK: f64 = 1e-12;
const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderReport {
    pub stats: BidderStats,
    pub tcpa_ok: bool,
    pub gain: f64,
    pub best_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub delta: f64,
    pub gamma: f64,
    pub bidders: Vec<BidderReport>,
    pub is_equilibrium: bool,
    pub eq_welfare: f64,
    pub opt_welfare: f64,
    /// `OPT / eq`; infinite when the profile earns nothing but OPT does.
    pub ratio: f64,
}

fn ratio_of(opt: f64, eq: f64) -> f64 {
    if eq > 0.0 {
        opt / eq
    } else if opt > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Checks both conditions of a `(Δ, γ)`-equilibrium for every bidder: tCPA
/// within `(1 + γ)`, and no feasible unilateral deviation gaining `Δ`.
pub fn verify_equilibrium(
    inst: &Instance,
    rule: &AllocationRule,
    prof: &BidProfile,
    delta: f64,
    gamma: f64,
) -> Result<EquilibriumReport> {
    let bids = bids_from_multipliers(inst, prof)?;
    let outcome = run_auctions_on_bids(rule, &bids)?;
    let bidders = (0..inst.n_bidders())
        .into_par_iter()
        .map(|i| {
            let stats = bidder_stats(inst, &outcome, i);
            let br = best_response_on_bids(inst, rule, &bids, prof.get(i), i, gamma)?;
            Ok(BidderReport { tcpa_ok: tcpa_satisfied(&stats, gamma), stats, gain: br.gain, best_multiplier: br.multiplier })
        })
        .collect::<Result<Vec<_>>>()?;
    let is_equilibrium = bidders.iter().all(|b| b.tcpa_ok && b.gain < delta + GAIN_SLACK);
    let eq_welfare = liquid_welfare(inst, &outcome.allocation)?;
    let opt_welfare = optimal_allocation(inst).total;
    Ok(EquilibriumReport {
        delta,
        gamma,
        bidders,
        is_equilibrium,
        eq_welfare,
        opt_welfare,
        ratio: ratio_of(opt_welfare, eq_welfare),
    })
}

/// `OPT / LW(profile)`.
pub fn poa_ratio(inst: &Instance, rule: &AllocationRule, prof: &BidProfile) -> Result<f64> {
    let bids = bids_from_multipliers(inst, prof)?;
    let outcome = run_auctions_on_bids(rule, &bids)?;
    let eq = liquid_welfare(inst, &outcome.allocation)?;
    Ok(ratio_of(optimal_allocation(inst).total, eq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOutcome {
    pub profile: BidProfile,
    pub converged: bool,
    pub rounds: usize,
    /// The profile after some round repeated one from 2 to 8 rounds earlier.
    pub cycle: bool,
}

pub const DEFAULT_DYNAMICS_TOL: f64 = 1e-6;
const MAX_CYCLE: usize = 8;

/// Round-robin best responses in bidder order until a full round moves no
/// multiplier by more than `tol` (relative).
pub fn best_response_dynamics(
    inst: &Instance,
    rule: &AllocationRule,
    init: &BidProfile,
    gamma: f64,
    max_rounds: usize,
    tol: f64,
) -> Result<DynamicsOutcome> {
    if max_rounds == 0 {
        return Err(Error::Config("max_rounds must be at least 1".into()));
    }
    let mut prof = init.clone();
    prof.check_covers(inst)?;
    let mut history: Vec<BidProfile> = vec![prof.clone()];
    for round in 1..=max_rounds {
        let mut max_change = 0.0f64;
        for i in 0..inst.n_bidders() {
            let old = prof.get(i);
            let new = best_response(inst, rule, &prof, i, gamma)?.multiplier;
            let change = if new == old { 0.0 } else { (new - old).abs() / old.abs().max(f64::MIN_POSITIVE) };
            max_change = max_change.max(change);
            prof = prof.with(i, new);
        }
        if max_change < tol {
            return Ok(DynamicsOutcome { profile: prof, converged: true, rounds: round, cycle: false });
        }
        let back = history.len();
        let repeats = (2..=MAX_CYCLE.min(back)).any(|d| history[back - d] == prof);
        if repeats {
            return Ok(DynamicsOutcome { profile: prof, converged: false, rounds: round, cycle: true });
        }
        history.push(prof.clone());
        if history.len() > MAX_CYCLE {
            history.remove(0);
        }
    }
    Ok(DynamicsOutcome { profile: prof, converged: false, rounds: max_rounds, cycle: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAudit {
    pub query: usize,
    /// 1 to 4.
    pub class: u8,
    pub opt_bidder: usize,
    pub opt_value: f64,
    /// Probability the opt-bidder wins.
    pub win_prob: f64,
    /// Expected payment of both bidders.
    pub spend: f64,
    pub win_ok: bool,
    pub spend_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionAudit {
    pub constants: MSConstants,
    pub queries: Vec<QueryAudit>,
    /// OPT mass per class.
    pub class_mass: [f64; 4],
    pub opt_total: f64,
    pub eq_welfare: f64,
    pub total_spend: f64,
    /// `Σ m_k x_k`.
    pub win_bound: f64,
    /// `Σ s_k x_k`.
    pub spend_bound: f64,
    pub per_query_ok: bool,
    /// Welfare at least both aggregate bounds.
    pub aggregate_ok: bool,
}

impl PartitionAudit {
    pub fn passed(&self) -> bool {
        self.per_query_ok && self.aggregate_ok
    }
}

/// Class of a query from the opt-bidder's bid `b` and the other bid `o`.
/// Boundaries go to the lower class.
pub fn query_class(alpha: f64, b: f64, o: f64) -> u8 {
    if alpha * b <= o {
        1
    } else if b <= o {
        2
    } else if b <= alpha * o {
        3
    } else {
        4
    }
}

/// Splits queries into four classes by how the opt-bidder's bid compares
/// with the other bid and checks the per-class win-probability and spend
/// guarantees of the two-bidder randomized rule.
pub fn partition_audit(inst: &Instance, prof: &BidProfile, alpha: f64, p: f64) -> Result<PartitionAudit> {
    if inst.n_bidders() != 2 {
        return Err(Error::Arity { rule: "partition audit".into(), expected: "2".into(), got: inst.n_bidders() });
    }
    prof.check_covers(inst)?;
    if let Some(m) = prof.multipliers().iter().find(|&&m| m < 1.0) {
        return Err(Error::Domain(format!("audit requires every multiplier >= 1, found {m}")));
    }
    let constants = ms_constants(alpha, p)?;
    let rule = AllocationRule::rand(alpha, p)?;
    let bids = bids_from_multipliers(inst, prof)?;
    let outcome = run_auctions_on_bids(&rule, &bids)?;
    let opt = optimal_allocation(inst);

    let mut class_mass = [0.0; 4];
    let queries: Vec<QueryAudit> = (0..inst.n_queries())
        .map(|j| {
            let i = opt.opt_bidder[j];
            let class = query_class(alpha, bids[j][i], bids[j][1 - i]);
            let k = usize::from(class - 1);
            let opt_value = opt.per_query[j];
            class_mass[k] += opt_value;
            let win_prob = outcome.allocation.get(i, j);
            let spend: f64 = outcome.query_payments(j).iter().sum();
            let need = constants.s[k] * opt_value;
            QueryAudit {
                query: j,
                class,
                opt_bidder: i,
                opt_value,
                win_prob,
                spend,
                win_ok: win_prob >= constants.m[k] - AUDIT_TOL,
                spend_ok: spend >= need - AUDIT_TOL * need.max(1.0),
            }
        })
        .collect();

    let dot = |c: &[f64; 4]| c.iter().zip(&class_mass).map(|(a, b)| a * b).sum::<f64>();
    let win_bound = dot(&constants.m);
    let spend_bound = dot(&constants.s);
    let eq_welfare = liquid_welfare(inst, &outcome.allocation)?;
    let total_spend = (0..2).map(|i| outcome.spend(i)).sum();
    let per_query_ok = queries.iter().all(|q| q.win_ok && q.spend_ok);
    let aggregate_ok = eq_welfare >= win_bound.max(spend_bound) - AUDIT_TOL * eq_welfare.max(1.0);
    Ok(PartitionAudit {
        constants,
        queries,
        class_mass,
        opt_total: opt.total,
        eq_welfare,
        total_spend,
        win_bound,
        spend_bound,
        per_query_ok,
        aggregate_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{tight_example, TightExampleSpec};
    use crate::lpbound::{alpha_star, poa_bound};

    #[test]
    fn tight_example_is_an_equilibrium() {
        let (a, p, eps) = (alpha_star(), 0.4, 1e-4);
        let (inst, prof) = tight_example(&TightExampleSpec { alpha: a, p, epsilon: eps }).unwrap();
        let rule = AllocationRule::rand(a, p).unwrap();
        let r = verify_equilibrium(&inst, &rule, &prof, 1e-9, 1e-9).unwrap();
        assert!(r.is_equilibrium, "{r:?}");
        assert!((r.eq_welfare - (1.0 + eps)).abs() < 1e-12);
        let bound = poa_bound(a, p).unwrap().bound;
        assert!((r.ratio - bound / (1.0 + eps)).abs() < 1e-9);
        assert!((poa_ratio(&inst, &rule, &prof).unwrap() - r.ratio).abs() < 1e-15);
    }

    #[test]
    fn zero_multipliers_are_not_an_equilibrium() {
        let inst = Instance::from_values(&[1.0, 1.0], vec![vec![1.0, 2.0], vec![0.5, 0.1]]).unwrap();
        let prof = BidProfile::uniform(2, 0.0).unwrap();
        let r = verify_equilibrium(&inst, &AllocationRule::second_price(), &prof, 1e-9, 1e-9).unwrap();
        assert!(!r.is_equilibrium);
    }

    #[test]
    fn lone_winner_ratio_is_one() {
        let inst = Instance::from_values(&[2.0], vec![vec![1.0], vec![3.0]]).unwrap();
        let prof = BidProfile::uniform(1, 1.0).unwrap();
        assert_eq!(poa_ratio(&inst, &AllocationRule::second_price(), &prof).unwrap(), 1.0);
        let nothing = AllocationRule::second_price_with_reserve(100.0).unwrap();
        assert_eq!(poa_ratio(&inst, &nothing, &prof).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dynamics_single_bidder() {
        let inst = Instance::from_values(&[1.0], vec![vec![1.0], vec![2.0]]).unwrap();
        let init = BidProfile::uniform(1, 0.3).unwrap();
        let d = best_response_dynamics(&inst, &AllocationRule::second_price(), &init, 0.0, 10, 1e-6).unwrap();
        assert!(d.converged);
        assert!(d.rounds <= 2);
        assert!(d.profile.get(0) >= 1.0);
        assert_eq!(poa_ratio(&inst, &AllocationRule::second_price(), &d.profile).unwrap(), 1.0);
    }

    #[test]
    fn dynamics_fixed_point_at_tight_example() {
        let (inst, prof) = tight_example(&TightExampleSpec { alpha: 1.5, p: 0.4, epsilon: 1e-3 }).unwrap();
        let rule = AllocationRule::rand(1.5, 0.4).unwrap();
        let d = best_response_dynamics(&inst, &rule, &prof, 0.0, 5, 1e-6).unwrap();
        assert!(d.converged);
        assert_eq!(d.rounds, 1);
        assert_eq!(d.profile, prof);
    }

    #[test]
    fn dynamics_rejects_zero_rounds() {
        let inst = Instance::from_values(&[1.0], vec![vec![1.0]]).unwrap();
        let prof = BidProfile::uniform(1, 1.0).unwrap();
        assert!(best_response_dynamics(&inst, &AllocationRule::second_price(), &prof, 0.0, 0, 1e-6).is_err());
    }

    #[test]
    fn classes() {
        let a = 1.5;
        assert_eq!(query_class(a, 1.0, 1.5), 1);
        assert_eq!(query_class(a, 1.0, 2.0), 1);
        assert_eq!(query_class(a, 1.0, 1.0), 2);
        assert_eq!(query_class(a, 1.2, 1.0), 3);
        assert_eq!(query_class(a, 1.5, 1.0), 3);
        assert_eq!(query_class(a, 2.0, 1.0), 4);
        assert_eq!(query_class(a, 1.0, 0.0), 4);
    }

    #[test]
    fn audit_examples() {
        // Query 0: the other bidder outbids by 2x; query 1: no competition;
        // query 2: a tie.
        let inst = Instance::from_values(
            &[1.0, 1.0],
            vec![vec![1.0, 0.9], vec![1.0, 0.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let prof = BidProfile::new(vec![1.0, 3.0]).unwrap();
        let audit = partition_audit(&inst, &prof, 1.5, 0.4).unwrap();
        let q = &audit.queries;
        assert_eq!((q[0].class, q[0].win_prob), (1, 0.0));
        assert!(q[0].spend >= audit.constants.s[0] * q[0].opt_value);
        assert_eq!((q[1].class, q[1].win_prob, q[1].spend), (4, 1.0, 0.0));
        // Bidder 0 is the opt-bidder on the tie; bids are 1 vs 3.
        assert_eq!(q[2].class, 1);
        assert!(audit.per_query_ok);

        let even = BidProfile::new(vec![1.0, 1.0]).unwrap();
        let audit = partition_audit(&inst, &even, 1.5, 0.4).unwrap();
        assert_eq!((audit.queries[2].class, audit.queries[2].win_prob), (2, 0.5));
        assert!(audit.per_query_ok);
        let total: f64 = audit.class_mass.iter().sum();
        assert!((total - audit.opt_total).abs() < 1e-12);
    }

    #[test]
    fn audit_preconditions() {
        let inst = Instance::from_values(&[1.0, 1.0], vec![vec![1.0, 0.5]]).unwrap();
        assert!(partition_audit(&inst, &BidProfile::new(vec![0.5, 1.0]).unwrap(), 1.5, 0.4).is_err());
        let three = Instance::from_values(&[1.0; 3], vec![vec![1.0, 0.5, 0.2]]).unwrap();
        assert!(partition_audit(&three, &BidProfile::uniform(3, 1.0).unwrap(), 1.5, 0.4).is_err());
    }
}
