//! Instances, bid profiles, allocations and liquid-welfare accounting.
//!
//! Bidders and queries are addressed by their position: bidder `i` is
//! `instance.bidders()[i]` and its id must equal `i`. Per-query data is
//! stored densely, one entry per bidder.
//!
//! Click-through rates are folded into the auction: the bid that enters the
//! per-query auction is `μ_i · T(i) · v_ij · ctr_ij` and the value a bidder
//! receives from winning is `v_ij · ctr_ij`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for float comparisons on currency and value.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`REL_TOL`], relative to the larger magnitude (floored at 1).
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bidder {
    pub id: usize,
    /// Target cost per conversion.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub id: usize,
    /// Conversion value per click, indexed by bidder.
    pub values: Vec<f64>,
    /// Click-through rate, indexed by bidder.
    pub ctrs: Vec<f64>,
}

impl Query {
    /// A query with unit click-through rates.
    pub fn with_values(id: usize, values: Vec<f64>) -> Self {
        let ctrs = vec![1.0; values.len()];
        Query { id, values, ctrs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    bidders: Vec<Bidder>,
    queries: Vec<Query>,
}

impl Instance {
    pub fn new(bidders: Vec<Bidder>, queries: Vec<Query>) -> Result<Self> {
        if bidders.is_empty() {
            return Err(Error::InvalidInstance("no bidders".into()));
        }
        if queries.is_empty() {
            return Err(Error::InvalidInstance("no queries".into()));
        }
        for (i, b) in bidders.iter().enumerate() {
            if b.id != i {
                return Err(Error::InvalidInstance(format!(
                    "bidder at position {i} has id {}",
                    b.id
                )));
            }
            if !(b.target.is_finite() && b.target > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "bidder {i} has non-positive target {}",
                    b.target
                )));
            }
        }
        let n = bidders.len();
        for (j, q) in queries.iter().enumerate() {
            if q.id != j {
                return Err(Error::InvalidInstance(format!(
                    "query at position {j} has id {}",
                    q.id
                )));
            }
            if q.values.len() != n || q.ctrs.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "query {j} covers {} values and {} ctrs for {n} bidders",
                    q.values.len(),
                    q.ctrs.len()
                )));
            }
            if let Some(v) = q.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidInstance(format!("query {j} has value {v}")));
            }
            if let Some(c) = q.ctrs.iter().find(|c| !(**c >= 0.0 && **c <= 1.0)) {
                return Err(Error::InvalidInstance(format!("query {j} has ctr {c}")));
            }
        }
        Ok(Instance { bidders, queries })
    }

    /// Builds an instance with unit click-through rates from targets and a
    /// `[query][bidder]` value table.
    pub fn from_values(targets: &[f64], values: Vec<Vec<f64>>) -> Result<Self> {
        let bidders = targets
            .iter()
            .enumerate()
            .map(|(id, &target)| Bidder { id, target })
            .collect();
        let queries = values
            .into_iter()
            .enumerate()
            .map(|(id, v)| Query::with_values(id, v))
            .collect();
        Instance::new(bidders, queries)
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn n_bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn n_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn target(&self, i: usize) -> f64 {
        self.bidders[i].target
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.queries[j].values[i]
    }

    pub fn ctr(&self, i: usize, j: usize) -> f64 {
        self.queries[j].ctrs[i]
    }

    /// Expected conversions per impression, `v_ij · ctr_ij`.
    pub fn effective_value(&self, i: usize, j: usize) -> f64 {
        self.value(i, j) * self.ctr(i, j)
    }

    /// Bid per unit multiplier, `T(i) · v_ij · ctr_ij`.
    pub fn bid_weight(&self, i: usize, j: usize) -> f64 {
        self.target(i) * self.effective_value(i, j)
    }

    /// Copy of this instance with every value multiplied by `value_scale` and
    /// every target multiplied by `target_scale`.
    pub fn scaled(&self, value_scale: f64, target_scale: f64) -> Result<Instance> {
        let bidders = self
            .bidders
            .iter()
            .map(|b| Bidder { id: b.id, target: b.target * target_scale })
            .collect();
        let queries = self
            .queries
            .iter()
            .map(|q| Query {
                id: q.id,
                values: q.values.iter().map(|v| v * value_scale).collect(),
                ctrs: q.ctrs.clone(),
            })
            .collect();
        Instance::new(bidders, queries)
    }
}

/// One uniform bid multiplier per bidder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidProfile {
    multipliers: Vec<f64>,
}

impl BidProfile {
    pub fn new(multipliers: Vec<f64>) -> Result<Self> {
        if let Some(m) = multipliers.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Config(format!("bid multiplier {m} is not a finite nonnegative number")));
        }
        Ok(BidProfile { multipliers })
    }

    pub fn uniform(n: usize, multiplier: f64) -> Result<Self> {
        BidProfile::new(vec![multiplier; n])
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.multipliers[i]
    }

    /// The same profile with bidder `i` switched to `multiplier`.
    pub fn with(&self, i: usize, multiplier: f64) -> BidProfile {
        let mut multipliers = self.multipliers.clone();
        multipliers[i] = multiplier;
        BidProfile { multipliers }
    }

    /// The bidder's dual variable for its tCPA constraint, `1 / (μ_i − 1)`.
    /// `None` at `μ_i <= 1`; the dual is infinite at exactly 1.
    pub fn bidder_dual(&self, i: usize) -> Option<f64> {
        let m = self.multipliers[i];
        (m > 1.0).then(|| 1.0 / (m - 1.0))
    }

    /// Every multiplier is at least one.
    pub fn is_equilibrium_candidate(&self) -> bool {
        self.multipliers.iter().all(|&m| m >= 1.0)
    }

    pub(crate) fn check_covers(&self, inst: &Instance) -> Result<()> {
        if self.multipliers.len() != inst.n_bidders() {
            return Err(Error::Config(format!(
                "profile has {} multipliers for {} bidders",
                self.multipliers.len(),
                inst.n_bidders()
            )));
        }
        Ok(())
    }
}

/// Effective per-query bids, indexed `[query][bidder]`.
pub fn bids_from_multipliers(inst: &Instance, prof: &BidProfile) -> Result<Vec<Vec<f64>>> {
    prof.check_covers(inst)?;
    Ok((0..inst.n_queries())
        .map(|j| {
            (0..inst.n_bidders())
                .map(|i| prof.get(i) * inst.bid_weight(i, j))
                .collect()
        })
        .collect())
}

/// Win probabilities `x_ij`, stored `[query][bidder]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    probs: Vec<Vec<f64>>,
}

impl Allocation {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (j, row) in probs.iter().enumerate() {
            if row.iter().any(|x| !(*x >= 0.0 && *x <= 1.0)) {
                return Err(Error::Domain(format!("query {j} has a probability outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if total > 1.0 + REL_TOL {
                return Err(Error::Domain(format!("query {j} allocates total mass {total}")));
            }
        }
        Ok(Allocation { probs })
    }

    pub fn zeros(n_queries: usize, n_bidders: usize) -> Self {
        Allocation { probs: vec![vec![0.0; n_bidders]; n_queries] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[j][i]
    }

    pub fn query(&self, j: usize) -> &[f64] {
        &self.probs[j]
    }

    pub fn n_queries(&self) -> usize {
        self.probs.len()
    }

    fn check_shape(&self, inst: &Instance) -> Result<()> {
        if self.probs.len() != inst.n_queries()
            || self.probs.iter().any(|r| r.len() != inst.n_bidders())
        {
            return Err(Error::Shape(format!(
                "allocation does not match {} queries x {} bidders",
                inst.n_queries(),
                inst.n_bidders()
            )));
        }
        Ok(())
    }
}

/// Allocation plus expected payments, both `[query][bidder]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub allocation: Allocation,
    payments: Vec<Vec<f64>>,
}

impl AuctionOutcome {
    pub fn new(allocation: Allocation, payments: Vec<Vec<f64>>) -> Result<Self> {
        if payments.len() != allocation.n_queries() {
            return Err(Error::Shape("payments and allocation differ in query count".into()));
        }
        if payments.iter().flatten().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::Domain("negative or undefined payment".into()));
        }
        Ok(AuctionOutcome { allocation, payments })
    }

    pub fn payment(&self, i: usize, j: usize) -> f64 {
        self.payments[j][i]
    }

    pub fn query_payments(&self, j: usize) -> &[f64] {
        &self.payments[j]
    }

    /// Total expected spend of bidder `i`.
    pub fn spend(&self, i: usize) -> f64 {
        self.payments.iter().map(|row| row[i]).sum()
    }

    /// Per-click price, defined only where `x_ij · ctr_ij > 0`.
    pub fn cpc(&self, inst: &Instance, i: usize, j: usize) -> Option<f64> {
        let units = self.allocation.get(i, j) * inst.ctr(i, j);
        (units > 0.0).then(|| self.payment(i, j) / units)
    }
}

/// Per-bidder liquid-welfare contributions `T(i) Σ_j x_ij ctr_ij v_ij`.
pub fn liquid_welfare_by_bidder(inst: &Instance, alloc: &Allocation) -> Result<Vec<f64>> {
    alloc.check_shape(inst)?;
    Ok((0..inst.n_bidders())
        .map(|i| {
            let conversions: f64 = (0..inst.n_queries())
                .map(|j| alloc.get(i, j) * inst.effective_value(i, j))
                .sum();
            inst.target(i) * conversions
        })
        .collect())
}

pub fn liquid_welfare(inst: &Instance, alloc: &Allocation) -> Result<f64> {
    Ok(liquid_welfare_by_bidder(inst, alloc)?.iter().sum())
}

/// The welfare-maximizing allocation: each query goes wholly to the bidder
/// with the largest `T(i) v_ij ctr_ij`, lowest index on ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalAllocation {
    pub allocation: Allocation,
    /// `i*(j)`.
    pub opt_bidder: Vec<usize>,
    /// `OPT(j)`.
    pub per_query: Vec<f64>,
    pub total: f64,
}

impl OptimalAllocation {
    /// `OPT(Q')` for a subset of query indices.
    pub fn of_queries(&self, queries: impl IntoIterator<Item = usize>) -> f64 {
        queries.into_iter().map(|j| self.per_query[j]).sum()
    }
}

pub fn optimal_allocation(inst: &Instance) -> OptimalAllocation {
    let n = inst.n_bidders();
    let mut probs = vec![vec![0.0; n]; inst.n_queries()];
    let mut opt_bidder = Vec::with_capacity(inst.n_queries());
    let mut per_query = Vec::with_capacity(inst.n_queries());
    for (j, row) in probs.iter_mut().enumerate() {
        let mut best = 0;
        let mut best_lw = inst.bid_weight(0, j);
        for i in 1..n {
            let lw = inst.bid_weight(i, j);
            if lw > best_lw {
                best = i;
                best_lw = lw;
            }
        }
        row[best] = 1.0;
        opt_bidder.push(best);
        per_query.push(best_lw);
    }
    let total = per_query.iter().sum();
    OptimalAllocation { allocation: Allocation { probs }, opt_bidder, per_query, total }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Instance {
        Instance::from_values(&[2.0, 1.0], vec![vec![3.0, 1.0], vec![0.5, 2.0]]).unwrap()
    }

    #[test]
    fn bid_is_multiplier_times_target_weighted_value() {
        let inst = Instance::from_values(&[1.0], vec![vec![3.0], vec![0.0]]).unwrap();
        let bids = bids_from_multipliers(&inst, &BidProfile::new(vec![2.0]).unwrap()).unwrap();
        assert_eq!(bids[0][0], 6.0);
        assert_eq!(bids[1][0], 0.0);
    }

    #[test]
    fn ctr_folds_into_bid() {
        let inst = Instance::new(
            vec![Bidder { id: 0, target: 1.0 }],
            vec![Query { id: 0, values: vec![3.0], ctrs: vec![0.5] }],
        )
        .unwrap();
        let bids = bids_from_multipliers(&inst, &BidProfile::new(vec![2.0]).unwrap()).unwrap();
        assert_eq!(bids[0][0], 3.0);
    }

    #[test]
    fn missing_multiplier_is_config_error() {
        let err = bids_from_multipliers(&two_by_two(), &BidProfile::new(vec![1.0]).unwrap());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn instance_rejects_bad_inputs() {
        assert!(Instance::from_values(&[1.0], vec![]).is_err());
        assert!(Instance::from_values(&[], vec![vec![]]).is_err());
        assert!(Instance::from_values(&[0.0], vec![vec![1.0]]).is_err());
        assert!(Instance::from_values(&[1.0], vec![vec![-1.0]]).is_err());
        assert!(Instance::from_values(&[1.0, 1.0], vec![vec![1.0]]).is_err());
        let bad_ctr = Instance::new(
            vec![Bidder { id: 0, target: 1.0 }],
            vec![Query { id: 0, values: vec![1.0], ctrs: vec![1.5] }],
        );
        assert!(bad_ctr.is_err());
    }

    #[test]
    fn welfare_of_empty_allocation_is_zero() {
        let inst = two_by_two();
        assert_eq!(liquid_welfare(&inst, &Allocation::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn welfare_single_term() {
        let inst = Instance::from_values(&[2.0], vec![vec![3.0]]).unwrap();
        let alloc = Allocation::new(vec![vec![1.0]]).unwrap();
        assert_eq!(liquid_welfare(&inst, &alloc).unwrap(), 6.0);
    }

    #[test]
    fn welfare_shape_mismatch() {
        let inst = two_by_two();
        assert!(matches!(
            liquid_welfare(&inst, &Allocation::zeros(1, 2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn optimal_breaks_ties_by_lowest_index() {
        let inst = Instance::from_values(&[1.0, 1.0, 1.0], vec![vec![2.0, 2.0, 2.0]]).unwrap();
        let opt = optimal_allocation(&inst);
        assert_eq!(opt.opt_bidder, vec![0]);
        assert_eq!(opt.total, 2.0);
    }

    #[test]
    fn optimal_uses_target_weighting() {
        let opt = optimal_allocation(&two_by_two());
        // query 0: 2*3 vs 1*1; query 1: 2*0.5 vs 1*2
        assert_eq!(opt.opt_bidder, vec![0, 1]);
        assert_eq!(opt.per_query, vec![6.0, 2.0]);
        assert_eq!(opt.total, 8.0);
    }

    #[test]
    fn allocation_rejects_overfull_query() {
        assert!(Allocation::new(vec![vec![0.7, 0.6]]).is_err());
        assert!(Allocation::new(vec![vec![-0.1, 0.6]]).is_err());
    }

    #[test]
    fn bidder_dual_from_multiplier() {
        let prof = BidProfile::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(prof.bidder_dual(0), Some(0.5));
        assert_eq!(prof.bidder_dual(1), None);
    }
}
