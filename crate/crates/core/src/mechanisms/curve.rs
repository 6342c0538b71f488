use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bidder's win probability as a function of its own bid, other bids held
/// fixed: a nondecreasing, right-continuous step function starting at bid 0.
///
/// Each step `(threshold, prob)` means the probability is `prob` on
/// `[threshold, next_threshold)`. Below the first threshold (which is always
/// 0) the probability is taken to be 0. The value a rule assigns exactly at a
/// threshold may differ from the right limit (ties); [`AllocationCurve::payment`]
/// takes the realized probability as an argument for that reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationCurve {
    steps: Vec<(f64, f64)>,
}

impl AllocationCurve {
    /// Builds a curve from `(threshold, prob)` pairs in nondecreasing
    /// threshold order. Repeated thresholds collapse to the last entry.
    pub fn new(steps: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (t, p) in steps {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Domain(format!("curve threshold {t}")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("curve probability {p}")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 = p,
                Some(last) if last.0 > t => {
                    return Err(Error::Domain("curve thresholds out of order".into()))
                }
                _ => merged.push((t, p)),
            }
        }
        match merged.first() {
            None => return Err(Error::Domain("empty curve".into())),
            Some(&(t, _)) if t != 0.0 => {
                return Err(Error::Domain("curve must start at bid 0".into()))
            }
            _ => {}
        }
        if merged.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::Domain("curve is not nondecreasing".into()));
        }
        // Drop steps that do not change the level.
        let mut steps: Vec<(f64, f64)> = Vec::with_capacity(merged.len());
        for s in merged {
            if steps.last().is_none_or(|l: &(f64, f64)| l.1 != s.1) {
                steps.push(s);
            }
        }
        Ok(AllocationCurve { steps })
    }

    pub fn constant(prob: f64) -> Result<Self> {
        AllocationCurve::new([(0.0, prob)])
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    /// Right-continuous value at `bid`.
    pub fn prob_at(&self, bid: f64) -> f64 {
        let k = self.steps.partition_point(|&(t, _)| t <= bid);
        if k == 0 {
            0.0
        } else {
            self.steps[k - 1].1
        }
    }

    /// Limit from the left at `bid`; 0 at bid 0.
    pub fn left_limit(&self, bid: f64) -> f64 {
        let k = self.steps.partition_point(|&(t, _)| t < bid);
        if k == 0 {
            0.0
        } else {
            self.steps[k - 1].1
        }
    }

    /// Supremum of the curve.
    pub fn max_prob(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.1)
    }

    /// `(threshold, jump size)` pairs, including the initial jump from 0 at
    /// threshold 0 when the curve starts above 0.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = 0.0;
        self.steps.iter().filter_map(move |&(t, p)| {
            let d = p - prev;
            prev = p;
            (d > 0.0).then_some((t, d))
        })
    }

    /// `∫_0^upper curve(b) db`.
    pub fn integral(&self, upper: f64) -> f64 {
        let mut area = 0.0;
        for (k, &(t, p)) in self.steps.iter().enumerate() {
            if t >= upper {
                break;
            }
            let end = self.steps.get(k + 1).map_or(upper, |s| s.0.min(upper));
            area += p * (end - t);
        }
        area
    }

    /// Truthful expected payment at `bid` when the realized win probability
    /// there is `prob`: the threshold-weighted sum of jumps strictly below
    /// the bid plus the partial jump taken at the bid itself. Equals
    /// `prob · bid − ∫_0^bid curve`.
    pub fn payment(&self, bid: f64, prob: f64) -> f64 {
        let below: f64 = self
            .jumps()
            .take_while(|&(t, _)| t < bid)
            .map(|(t, d)| t * d)
            .sum();
        let at_bid = (prob - self.left_limit(bid)).max(0.0) * bid;
        (below + at_bid).clamp(0.0, prob * bid)
    }
}
