use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::curve::AllocationCurve;
use crate::error::{Error, Result};

/// A user-supplied anonymous truthful rule.
///
/// Payments are derived from the curve, so a rule that cannot report exact
/// breakpoints can still be allocated and probed but not priced.
pub trait CustomRule: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn allocate(&self, bids: &[f64]) -> Result<Vec<f64>>;

    /// Steps of the bidder's curve when it sits at `position` among
    /// `other_bids`.
    fn curve(&self, _other_bids: &[f64], _position: usize) -> Option<Vec<(f64, f64)>> {
        None
    }

    fn supports_arity(&self, n: usize) -> bool {
        n >= 1
    }

    /// Analytically known `(π*, M*)`.
    fn max_threshold(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    SecondPrice,
    RandAlphaP,
    UniformTopCluster,
    Custom,
}

#[derive(Debug, Clone)]
pub enum AllocationRule {
    /// Highest bid wins, ties split evenly; optional anonymous reserve.
    SecondPrice { reserve: f64 },
    /// Two-bidder randomized rule: the higher bid wins outright when at least
    /// `alpha` times the lower, otherwise wins with probability `1 − p`.
    Rand { alpha: f64, p: f64 },
    /// Experimental n-bidder extension of `Rand`. Bidders whose bid is within
    /// a factor `alpha` of the maximum form the cluster; each non-top member
    /// wins with probability `2p / c` for cluster size `c` and the top
    /// bidder takes the rest. Reduces to `Rand` for two bidders.
    UniformTopCluster { alpha: f64, p: f64 },
    Custom(Arc<dyn CustomRule>),
}

fn check_alpha_p(alpha: f64, p: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("p must lie in (0, 1/2], got {p}")));
    }
    Ok(())
}

fn validate_bids(bids: &[f64]) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Arity { rule: "auction".into(), expected: ">= 1".into(), got: 0 });
    }
    if let Some(b) = bids.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::Domain(format!("bid {b} is not a finite nonnegative number")));
    }
    Ok(())
}

fn max_of(bids: &[f64]) -> f64 {
    bids.iter().copied().fold(0.0, f64::max)
}

impl AllocationRule {
    pub fn second_price() -> Self {
        AllocationRule::SecondPrice { reserve: 0.0 }
    }

    pub fn second_price_with_reserve(reserve: f64) -> Result<Self> {
        if !(reserve.is_finite() && reserve >= 0.0) {
            return Err(Error::Domain(format!("reserve {reserve}")));
        }
        Ok(AllocationRule::SecondPrice { reserve })
    }

    pub fn rand(alpha: f64, p: f64) -> Result<Self> {
        check_alpha_p(alpha, p)?;
        Ok(AllocationRule::Rand { alpha, p })
    }

    pub fn uniform_top_cluster(alpha: f64, p: f64) -> Result<Self> {
        check_alpha_p(alpha, p)?;
        Ok(AllocationRule::UniformTopCluster { alpha, p })
    }

    pub fn custom(rule: impl CustomRule + 'static) -> Self {
        AllocationRule::Custom(Arc::new(rule))
    }

    pub fn kind(&self) -> RuleKind {
        match self {
            AllocationRule::SecondPrice { .. } => RuleKind::SecondPrice,
            AllocationRule::Rand { .. } => RuleKind::RandAlphaP,
            AllocationRule::UniformTopCluster { .. } => RuleKind::UniformTopCluster,
            AllocationRule::Custom(_) => RuleKind::Custom,
        }
    }

    pub fn name(&self) -> String {
        match self {
            AllocationRule::SecondPrice { reserve } if *reserve == 0.0 => "second-price".into(),
            AllocationRule::SecondPrice { reserve } => format!("second-price(reserve={reserve})"),
            AllocationRule::Rand { alpha, p } => format!("rand({alpha}, {p})"),
            AllocationRule::UniformTopCluster { alpha, p } => {
                format!("uniform-top-cluster({alpha}, {p})")
            }
            AllocationRule::Custom(r) => r.name().to_string(),
        }
    }

    pub fn supports_arity(&self, n: usize) -> bool {
        match self {
            AllocationRule::Rand { .. } => n == 2,
            AllocationRule::Custom(r) => r.supports_arity(n),
            _ => n >= 1,
        }
    }

    /// Smallest supported number of bidders (searched up to 64).
    pub fn min_arity(&self) -> Option<usize> {
        (1..=64).find(|&n| self.supports_arity(n))
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if self.supports_arity(n) {
            Ok(())
        } else {
            let expected = match self {
                AllocationRule::Rand { .. } => "exactly 2".to_string(),
                _ => "a supported number of".to_string(),
            };
            Err(Error::Arity { rule: self.name(), expected, got: n })
        }
    }

    /// `(π*, M*)` when known in closed form.
    pub fn declared_max_threshold(&self) -> Option<(f64, f64)> {
        match self {
            AllocationRule::SecondPrice { reserve } => Some((1.0, *reserve)),
            AllocationRule::Rand { .. } | AllocationRule::UniformTopCluster { .. } => {
                Some((1.0, 0.0))
            }
            AllocationRule::Custom(r) => r.max_threshold(),
        }
    }

    /// Win probability of each bidder.
    pub fn allocate(&self, bids: &[f64]) -> Result<Vec<f64>> {
        validate_bids(bids)?;
        self.check_arity(bids.len())?;
        match self {
            AllocationRule::SecondPrice { reserve } => Ok(second_price_allocate(bids, *reserve)),
            AllocationRule::Rand { alpha, p } => Ok(rand_allocate(bids[0], bids[1], *alpha, *p)),
            AllocationRule::UniformTopCluster { alpha, p } => Ok(cluster_allocate(bids, *alpha, *p)),
            AllocationRule::Custom(r) => {
                let x = r.allocate(bids)?;
                if x.len() != bids.len() {
                    return Err(Error::Shape(format!(
                        "{} returned {} probabilities for {} bids",
                        r.name(),
                        x.len(),
                        bids.len()
                    )));
                }
                Ok(x)
            }
        }
    }

    /// Win probability of a bidder placed at `position` among `other_bids`,
    /// as a function of its own bid.
    pub fn allocation_curve(&self, other_bids: &[f64], position: usize) -> Result<AllocationCurve> {
        if !other_bids.is_empty() {
            validate_bids(other_bids)?;
        }
        if position > other_bids.len() {
            return Err(Error::Config(format!(
                "position {position} out of range for {} other bids",
                other_bids.len()
            )));
        }
        self.check_arity(other_bids.len() + 1)?;
        match self {
            AllocationRule::SecondPrice { reserve } => second_price_curve(other_bids, *reserve),
            AllocationRule::Rand { alpha, p } => rand_curve(other_bids[0], *alpha, *p),
            AllocationRule::UniformTopCluster { alpha, p } => cluster_curve(other_bids, *alpha, *p),
            AllocationRule::Custom(r) => match r.curve(other_bids, position) {
                Some(steps) => AllocationCurve::new(steps),
                None => Err(Error::Unsupported(format!(
                    "{} does not expose allocation breakpoints",
                    r.name()
                ))),
            },
        }
    }

    /// Expected truthful payment of every bidder.
    pub fn myerson_payments(&self, bids: &[f64]) -> Result<Vec<f64>> {
        let x = self.allocate(bids)?;
        let mut others = Vec::with_capacity(bids.len().saturating_sub(1));
        let mut pay = vec![0.0; bids.len()];
        for (i, (&b, &xi)) in bids.iter().zip(&x).enumerate() {
            // A zero win probability or a zero bid forces a zero payment.
            if xi <= 0.0 || b <= 0.0 {
                continue;
            }
            others.clear();
            others.extend(bids.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &v)| v));
            pay[i] = self.allocation_curve(&others, i)?.payment(b, xi);
        }
        Ok(pay)
    }

    /// Allocation and payments in one pass.
    pub fn run(&self, bids: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let pay = self.myerson_payments(bids)?;
        Ok((self.allocate(bids)?, pay))
    }
}

fn second_price_allocate(bids: &[f64], reserve: f64) -> Vec<f64> {
    let m = max_of(bids);
    let mut x = vec![0.0; bids.len()];
    if m < reserve {
        return x;
    }
    let ties = bids.iter().filter(|&&b| b == m).count() as f64;
    for (xi, &b) in x.iter_mut().zip(bids) {
        if b == m {
            *xi = 1.0 / ties;
        }
    }
    x
}

fn second_price_curve(others: &[f64], reserve: f64) -> Result<AllocationCurve> {
    let m = max_of(others);
    let threshold = if others.is_empty() { reserve } else { m.max(reserve) };
    if threshold == 0.0 {
        AllocationCurve::constant(1.0)
    } else {
        AllocationCurve::new([(0.0, 0.0), (threshold, 1.0)])
    }
}

fn rand_allocate(b0: f64, b1: f64, alpha: f64, p: f64) -> Vec<f64> {
    if b0 == b1 {
        return vec![0.5, 0.5];
    }
    let (hi, lo, hi_first) = if b0 > b1 { (b0, b1, true) } else { (b1, b0, false) };
    let (ph, pl) = if hi >= alpha * lo { (1.0, 0.0) } else { (1.0 - p, p) };
    if hi_first {
        vec![ph, pl]
    } else {
        vec![pl, ph]
    }
}

fn rand_curve(other: f64, alpha: f64, p: f64) -> Result<AllocationCurve> {
    if other == 0.0 {
        return AllocationCurve::constant(1.0);
    }
    AllocationCurve::new([
        (0.0, 0.0),
        (other / alpha, p),
        (other, 1.0 - p),
        (alpha * other, 1.0),
    ])
}

fn cluster_share(c: usize, p: f64) -> f64 {
    2.0 * p / c as f64
}

// Written as `(1 - 2p) + share` so rounding keeps it at least the share
// and nonincreasing in `c`.
fn cluster_top(c: usize, p: f64) -> f64 {
    (1.0 - 2.0 * p) + cluster_share(c, p)
}

fn cluster_allocate(bids: &[f64], alpha: f64, p: f64) -> Vec<f64> {
    let m = max_of(bids);
    let top = bids.iter().filter(|&&b| b == m).count();
    let near = bids.iter().filter(|&&b| b < m && alpha * b > m).count();
    let c = top + near;
    let share = cluster_share(c, p);
    let top_each = if c == 1 { 1.0 } else { (cluster_top(c, p) + (top - 1) as f64 * share) / top as f64 };
    bids.iter()
        .map(|&b| {
            if b == m {
                top_each
            } else if alpha * b > m {
                share
            } else {
                0.0
            }
        })
        .collect()
}

fn cluster_curve(others: &[f64], alpha: f64, p: f64) -> Result<AllocationCurve> {
    let m = max_of(others);
    if m == 0.0 {
        return AllocationCurve::constant(1.0);
    }
    // Others that stay in the cluster once we pass the current maximum,
    // ordered by the own bid at which they drop out.
    let mut exits: Vec<f64> = others
        .iter()
        .filter(|&&b| alpha * b > m)
        .map(|&b| alpha * b)
        .collect();
    exits.sort_by(f64::total_cmp);
    let c = exits.len() + 1;
    let mut steps = vec![(0.0, 0.0), (m / alpha, cluster_share(c, p)), (m, cluster_top(c, p))];
    for (k, &t) in exits.iter().enumerate() {
        steps.push((t, cluster_top(c - k - 1, p)));
    }
    AllocationCurve::new(steps)
}
