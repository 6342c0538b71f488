//! Canonical instances: the two-bidder tight example for the randomized
//! rule, the many-bidder lower-bound construction for anonymous truthful
//! rules, and seeded random instances.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autobidder::{best_response_on_bids, bidder_stats, run_auctions_on_bids, tcpa_satisfied};
use crate::error::{Error, Result};
use crate::lpbound::ms_constants;
use crate::mechanisms::{max_threshold, AllocationRule, MaxThreshold};
use crate::model::{bids_from_multipliers, liquid_welfare, optimal_allocation, BidProfile, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightExampleSpec {
    pub alpha: f64,
    pub p: f64,
    pub epsilon: f64,
}

/// Two unit-target bidders A and B over two queries. A values them at
/// `(1, ε)`, B at `(0, 1/s_1)`. The returned profile has
/// `μ_A = α/(ε s_1) + 1` and `μ_B = 1`, which makes A's bid on the second
/// query exactly `α/s_1 + ε`: B cannot profitably contest it.
pub fn tight_example(spec: &TightExampleSpec) -> Result<(Instance, BidProfile)> {
    if !(spec.epsilon.is_finite() && spec.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {}", spec.epsilon)));
    }
    let s1 = ms_constants(spec.alpha, spec.p)?.s[0];
    let inst = Instance::from_values(&[1.0, 1.0], vec![vec![1.0, 0.0], vec![spec.epsilon, 1.0 / s1]])?;
    let prof = BidProfile::new(vec![spec.alpha / (spec.epsilon * s1) + 1.0, 1.0])?;
    Ok((inst, prof))
}

/// Parameters of the lower-bound construction with `2k` bidders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilitySpec {
    pub k: usize,
    pub a: f64,
    pub v: f64,
    pub epsilon: f64,
    /// Tie-break increment separating the A-bids on each contested query.
    pub rho: f64,
    pub pi_star: f64,
    pub m_star: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Default tie-break increment relative to `V`.
pub const RHO_SCALE: f64 = 1e-9;

impl ImpossibilitySpec {
    /// A spec targeting a rule with `π* = 1`, `M* = 0` and `ρ = V·1e-9`.
    pub fn new(k: usize, a: f64, v: f64, epsilon: f64, delta: f64, gamma: f64) -> Self {
        ImpossibilitySpec { k, a, v, epsilon, rho: v * RHO_SCALE, pi_star: 1.0, m_star: 0.0, delta, gamma }
    }

    /// Copies `(π*, M*)` from the rule's max threshold.
    pub fn for_rule(mut self, rule: &AllocationRule) -> Result<Self> {
        let mt = max_threshold(rule)?;
        self.pi_star = mt.max_probability;
        self.m_star = mt.max_threshold;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(what.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.a.is_finite() && self.a >= 1.0) {
            return bad("a must be at least 1");
        }
        if !(self.v.is_finite() && self.v >= 1.0) {
            return bad("V must be at least 1");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return bad("rho must be positive");
        }
        if !(self.pi_star > 0.0 && self.pi_star <= 1.0) {
            return bad("pi* must lie in (0, 1]");
        }
        if !(self.m_star.is_finite() && self.m_star >= 0.0) {
            return bad("M* must be nonnegative");
        }
        if !(self.delta >= 0.0 && self.gamma >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if self.a <= 1.0 + self.gamma {
            return Err(Error::Domain(format!(
                "a = {} must exceed 1 + gamma = {}",
                self.a,
                1.0 + self.gamma
            )));
        }
        Ok(())
    }

    /// Values are multiplied by `M*` when it exceeds 1.
    pub fn value_scale(&self) -> f64 {
        self.m_star.max(1.0)
    }

    /// `((i + j) mod k) + 1`: which entry of the bid tuple A_i holds on Q_j.
    pub fn rotation(&self, i: usize, j: usize) -> usize {
        (i + j) % self.k + 1
    }

    /// `(V, aV + ρ, …, aV + kρ)`, before value scaling.
    pub fn bid_tuple(&self) -> Vec<f64> {
        let av = self.a * self.v;
        std::iter::once(self.v).chain((1..=self.k).map(|t| av + t as f64 * self.rho)).collect()
    }

    /// Parameter conditions under which the construction is a
    /// `(Δ, γ)`-equilibrium; one message per violated condition.
    pub fn parameter_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let av = self.a * self.v;
        let denom = (self.a - 1.0 - self.gamma) * self.delta;
        if denom > 0.0 {
            let need = av / denom;
            if (self.k + 1) as f64 <= need {
                out.push(format!(
                    "k + 1 = {} does not exceed aV/((a-1-gamma) Delta) = {need:.6}; need k >= {}",
                    self.k + 1,
                    need.floor() as u64
                ));
            }
        } else {
            out.push("Delta = 0: no finite k bounds the gain of B-bidders".into());
        }
        if self.gamma * self.v <= 1.0 {
            out.push(format!("V = {} does not exceed 1/gamma", self.v));
        }
        let eps_gain = self.k as f64 * self.epsilon * av;
        if eps_gain >= self.delta {
            out.push(format!("k eps a V = {eps_gain:.6} is not below Delta = {}", self.delta));
        }
        out
    }
}

/// Bidders `A_0..A_{k-1}` are indices `0..k`, `B_i` is `k + i`; queries
/// `P_i` are `0..k`, `Q_i` is `k + i`. All targets are 1.
///
/// `A_i` values `P_i` at `aV/π*` and `Q_j` at `ε(aV + tρ)` with `t` the
/// rotation index; `B_i` values only `Q_i`, at `V`. Under the returned
/// profile (`μ_A = 1/ε`, `μ_B = 1`) every `Q_j` sees the bid tuple
/// `(V, aV + ρ, …, aV + kρ)` up to rotation.
pub fn impossibility_instance(spec: &ImpossibilitySpec) -> Result<(Instance, BidProfile)> {
    spec.validate()?;
    let k = spec.k;
    let scale = spec.value_scale();
    let av = spec.a * spec.v;
    let mut values = vec![vec![0.0; 2 * k]; 2 * k];
    for i in 0..k {
        values[i][i] = scale * av / spec.pi_star;
        let q = &mut values[k + i];
        q[k + i] = scale * spec.v;
        for (j, slot) in q.iter_mut().enumerate().take(k) {
            *slot = scale * spec.epsilon * (av + spec.rotation(i, j) as f64 * spec.rho);
        }
    }
    let inst = Instance::from_values(&vec![1.0; 2 * k], values)?;
    let mut mult = vec![1.0 / spec.epsilon; k];
    mult.extend(std::iter::repeat_n(1.0, k));
    Ok((inst, BidProfile::new(mult)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityBounds {
    /// `(a + 1/(k+1) + εa) V k`, scaled.
    pub eq_welfare_upper: f64,
    /// `(a/π* + 1) V k`, scaled.
    pub opt: f64,
    pub ratio_upper: f64,
    /// `π* / (1 + π*)`, the limit as `a → 1`, `k → ∞`, `ε → 0`.
    pub asymptotic_ratio: f64,
}

pub fn impossibility_bounds(spec: &ImpossibilitySpec) -> ImpossibilityBounds {
    let k = spec.k as f64;
    let scale = spec.value_scale();
    let eq = scale * (spec.a + 1.0 / (k + 1.0) + spec.epsilon * spec.a) * spec.v * k;
    let opt = scale * (spec.a / spec.pi_star + 1.0) * spec.v * k;
    ImpossibilityBounds {
        eq_welfare_upper: eq,
        opt,
        ratio_upper: eq / opt,
        asymptotic_ratio: spec.pi_star / (1.0 + spec.pi_star),
    }
}

/// Welfare of the construction's profile under a rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityWelfare {
    pub welfare: f64,
    pub opt: f64,
    pub ratio: f64,
}

/// Runs the auctions only; cheap enough for large `k`.
pub fn simulate_impossibility(spec: &ImpossibilitySpec, rule: &AllocationRule) -> Result<ImpossibilityWelfare> {
    let (inst, prof) = impossibility_instance(spec)?;
    let bids = bids_from_multipliers(&inst, &prof)?;
    let outcome = run_auctions_on_bids(rule, &bids)?;
    let welfare = liquid_welfare(&inst, &outcome.allocation)?;
    let opt = optimal_allocation(&inst).total;
    Ok(ImpossibilityWelfare { welfare, opt, ratio: welfare / opt })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityReport {
    pub spec: ImpossibilitySpec,
    pub threshold: MaxThreshold,
    /// The rule's allocation on the bid tuple; `chi[0]` is the lowest bid.
    pub chi: Vec<f64>,
    pub lowest_share_ok: bool,
    /// Every `Q_j` allocates through the rotation of `chi`.
    pub rotation_ok: bool,
    /// Max over A-bidders of total win probability on the Q-queries.
    pub max_q_share: f64,
    pub q_share_ok: bool,
    /// Max over A-bidders of `spend / value`.
    pub max_cost_ratio: f64,
    pub cost_ratio_bound: f64,
    pub cost_ok: bool,
    pub max_gain_a: f64,
    pub gain_a_bound: f64,
    pub gain_a_ok: bool,
    pub max_gain_b: f64,
    pub gain_b_bound: f64,
    pub gain_b_ok: bool,
    pub welfare: ImpossibilityWelfare,
    pub bounds: ImpossibilityBounds,
    pub welfare_ok: bool,
    /// Welfare also at least the upper bound minus `kρ(k+2)`.
    pub welfare_band_ok: bool,
    /// Every bidder tCPA-feasible at `γ` and no gain of `Δ` or more.
    pub equilibrium: bool,
    pub warnings: Vec<String>,
}

impl ImpossibilityReport {
    /// All structural checks and bounds hold.
    pub fn passed(&self) -> bool {
        self.lowest_share_ok
            && self.rotation_ok
            && self.q_share_ok
            && self.cost_ok
            && self.gain_a_ok
            && self.gain_b_ok
            && self.welfare_ok
    }
}

const CHECK_TOL: f64 = 1e-9;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Builds the construction for `spec`, simulates it under `rule` and checks
/// the structural facts and bounds the lower-bound argument relies on.
pub fn verify_impossibility(spec: &ImpossibilitySpec, rule: &AllocationRule) -> Result<ImpossibilityReport> {
    spec.validate()?;
    let threshold = max_threshold(rule)?;
    if !rel_close(threshold.max_probability, spec.pi_star) || !rel_close(threshold.max_threshold, spec.m_star) {
        return Err(Error::RuleMismatch(format!(
            "{} has (pi*, M*) = ({}, {}), spec has ({}, {})",
            rule.name(),
            threshold.max_probability,
            threshold.max_threshold,
            spec.pi_star,
            spec.m_star
        )));
    }
    let k = spec.k;
    let (inst, prof) = impossibility_instance(spec)?;
    let bids = bids_from_multipliers(&inst, &prof)?;
    let outcome = run_auctions_on_bids(rule, &bids)?;

    let scale = spec.value_scale();
    let tuple: Vec<f64> = spec.bid_tuple().into_iter().map(|b| b * scale).collect();
    let chi = rule.allocate(&tuple)?;
    let lowest_share_ok = chi[0] <= 1.0 / (k + 1) as f64 + CHECK_TOL;

    let x = |i: usize, j: usize| outcome.allocation.get(i, j);
    let rotation_ok = (0..k).all(|j| {
        rel_close(x(k + j, k + j), chi[0]) && (0..k).all(|i| rel_close(x(i, k + j), chi[spec.rotation(i, j)]))
    });
    let max_q_share = (0..k).map(|i| (0..k).map(|j| x(i, k + j)).sum::<f64>()).fold(0.0, f64::max);

    let stats: Vec<_> = (0..2 * k).map(|i| bidder_stats(&inst, &outcome, i)).collect();
    let cost_ratio_bound = 1.0 + 1.0 / (spec.a * spec.v);
    let max_cost_ratio = stats[..k]
        .iter()
        .map(|s| if s.value > 0.0 { s.spend / s.value } else if s.spend > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);

    let responses = (0..2 * k)
        .into_par_iter()
        .map(|i| best_response_on_bids(&inst, rule, &bids, prof.get(i), i, spec.gamma))
        .collect::<Result<Vec<_>>>()?;
    let max_gain = |r: std::ops::Range<usize>| responses[r].iter().map(|b| b.gain).fold(0.0, f64::max);
    let max_gain_a = max_gain(0..k);
    let max_gain_b = max_gain(k..2 * k);
    let av = spec.a * spec.v;
    let gain_a_bound = scale * k as f64 * spec.epsilon * av;
    let gain_b_bound = scale * av / ((spec.a - 1.0 - spec.gamma) * (k + 1) as f64);

    let welfare = liquid_welfare(&inst, &outcome.allocation)?;
    let opt = optimal_allocation(&inst).total;
    let bounds = impossibility_bounds(spec);
    let slack = scale * k as f64 * spec.rho * (k + 2) as f64;

    let equilibrium = stats.iter().all(|s| tcpa_satisfied(s, spec.gamma))
        && responses.iter().all(|b| b.gain < spec.delta + 1e-12);

    Ok(ImpossibilityReport {
        spec: *spec,
        threshold,
        chi,
        lowest_share_ok,
        rotation_ok,
        max_q_share,
        q_share_ok: max_q_share <= 1.0 + CHECK_TOL,
        max_cost_ratio,
        cost_ratio_bound,
        cost_ok: max_cost_ratio <= cost_ratio_bound + CHECK_TOL,
        max_gain_a,
        gain_a_bound,
        gain_a_ok: max_gain_a <= gain_a_bound + CHECK_TOL,
        max_gain_b,
        gain_b_bound,
        gain_b_ok: max_gain_b <= gain_b_bound + CHECK_TOL,
        welfare: ImpossibilityWelfare { welfare, opt, ratio: welfare / opt },
        bounds,
        welfare_ok: welfare <= bounds.eq_welfare_upper * (1.0 + CHECK_TOL),
        welfare_band_ok: welfare >= bounds.eq_welfare_upper - slack - CHECK_TOL * bounds.eq_welfare_upper
            && welfare <= bounds.eq_welfare_upper * (1.0 + CHECK_TOL),
        equilibrium,
        warnings: spec.parameter_warnings(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueLaw {
    /// Uniform on `(0, 1]`.
    Uniform,
    /// `exp(N(0, 1))`.
    LogNormal,
    /// `0.5` or `1.0` with equal probability.
    TwoPoint,
}

impl FromStr for ValueLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ValueLaw::Uniform),
            "lognormal" | "log-normal" => Ok(ValueLaw::LogNormal),
            "two-point" | "twopoint" => Ok(ValueLaw::TwoPoint),
            other => Err(Error::Config(format!("unknown value law {other:?}"))),
        }
    }
}

/// Seeded instance with unit click-through rates and targets uniform on
/// `(0.5, 2]`.
pub fn random_instance(seed: u64, n_bidders: usize, n_queries: usize, law: ValueLaw) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<f64> = (0..n_bidders).map(|_| 2.0 - 1.5 * rng.random::<f64>()).collect();
    let lognormal = LogNormal::new(0.0, 1.0).expect("unit lognormal");
    let values = (0..n_queries)
        .map(|_| {
            (0..n_bidders)
                .map(|_| match law {
                    ValueLaw::Uniform => 1.0 - rng.random::<f64>(),
                    ValueLaw::LogNormal => lognormal.sample(&mut rng),
                    ValueLaw::TwoPoint => {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            0.5
                        }
                    }
                })
                .collect()
        })
        .collect();
    Instance::from_values(&targets, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbound::alpha_star;

    #[test]
    fn tight_example_shape() {
        let spec = TightExampleSpec { alpha: alpha_star(), p: 0.4, epsilon: 1e-4 };
        let (inst, prof) = tight_example(&spec).unwrap();
        let s1 = ms_constants(alpha_star(), 0.4).unwrap().s[0];
        assert_eq!(inst.value(1, 1), 1.0 / s1);
        let bids = bids_from_multipliers(&inst, &prof).unwrap();
        assert!((bids[1][0] - (alpha_star() / s1 + 1e-4)).abs() < 1e-12);
        let opt = optimal_allocation(&inst);
        assert_eq!(opt.opt_bidder, vec![0, 1]);
        assert!((opt.total - (1.0 + 1.0 / s1)).abs() < 1e-15);
    }

    #[test]
    fn tight_example_at_alpha_one() {
        let (inst, _) = tight_example(&TightExampleSpec { alpha: 1.0, p: 0.3, epsilon: 0.01 }).unwrap();
        assert_eq!(inst.value(1, 1), 1.0);
    }

    #[test]
    fn tight_example_domain() {
        assert!(tight_example(&TightExampleSpec { alpha: 1.5, p: 0.4, epsilon: 0.0 }).is_err());
        assert!(tight_example(&TightExampleSpec { alpha: 0.9, p: 0.4, epsilon: 0.1 }).is_err());
    }

    #[test]
    fn k2_value_pattern() {
        let spec = ImpossibilitySpec::new(2, 2.0, 10.0, 0.01, 1.0, 0.5);
        let (inst, prof) = impossibility_instance(&spec).unwrap();
        let (av, rho, eps) = (20.0, spec.rho, 0.01);
        // A_0, A_1 on P_0, P_1.
        assert_eq!((inst.value(0, 0), inst.value(1, 0)), (av, 0.0));
        assert_eq!((inst.value(0, 1), inst.value(1, 1)), (0.0, av));
        // Q_0: A_0 holds slot 1, A_1 slot 2; Q_1 rotated.
        assert_eq!(inst.value(0, 2), eps * (av + rho));
        assert_eq!(inst.value(1, 2), eps * (av + 2.0 * rho));
        assert_eq!(inst.value(0, 3), eps * (av + 2.0 * rho));
        assert_eq!(inst.value(1, 3), eps * (av + rho));
        assert_eq!((inst.value(2, 2), inst.value(3, 2)), (10.0, 0.0));
        assert_eq!((inst.value(2, 3), inst.value(3, 3)), (0.0, 10.0));
        for j in 0..2 {
            assert_eq!(inst.value(2, j) + inst.value(3, j), 0.0);
        }
        assert_eq!(prof.multipliers(), &[100.0, 100.0, 1.0, 1.0]);
    }

    #[test]
    fn contested_bids_form_the_tuple() {
        let spec = ImpossibilitySpec::new(4, 1.5, 10.0, 1e-3, 1.0, 0.1);
        let (inst, prof) = impossibility_instance(&spec).unwrap();
        let bids = bids_from_multipliers(&inst, &prof).unwrap();
        let tuple = spec.bid_tuple();
        for j in 0..4 {
            let mut got: Vec<f64> = bids[4 + j].iter().copied().filter(|&b| b > 0.0).collect();
            got.sort_by(f64::total_cmp);
            for (g, t) in got.iter().zip(&tuple) {
                assert!((g - t).abs() <= 1e-12 * t, "{got:?} vs {tuple:?}");
            }
        }
        assert!((bids[0][0] - 15.0 / 1e-3).abs() < 1e-6);
    }

    #[test]
    fn a_values_vanish_with_epsilon() {
        let spec = ImpossibilitySpec::new(3, 1.5, 10.0, 1e-12, 1.0, 0.1);
        let (inst, _) = impossibility_instance(&spec).unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert!(inst.value(i, j) < 1e-10);
            }
        }
    }

    #[test]
    fn a_must_exceed_one_plus_gamma() {
        let spec = ImpossibilitySpec::new(100, 1.05, 100.0, 1e-6, 2.0, 0.05);
        assert!(matches!(impossibility_instance(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn bounds_formulas() {
        let spec = ImpossibilitySpec::new(100, 1.05, 100.0, 1e-6, 2.0, 0.01);
        let b = impossibility_bounds(&spec);
        let expect = (1.05 + 1.0 / 101.0 + 1.05e-6) / 2.05;
        assert!((b.ratio_upper - expect).abs() < 1e-15);
        assert!((b.ratio_upper - 0.5170).abs() < 1e-4);
        let half = ImpossibilitySpec { pi_star: 0.5, ..spec };
        assert!((impossibility_bounds(&half).asymptotic_ratio - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rescales_when_threshold_exceeds_one() {
        let rule = AllocationRule::second_price_with_reserve(4.0).unwrap();
        let spec = ImpossibilitySpec::new(3, 1.5, 10.0, 1e-4, 1.0, 0.1).for_rule(&rule).unwrap();
        let (inst, _) = impossibility_instance(&spec).unwrap();
        assert_eq!(inst.value(3, 3), 40.0);
        let r = verify_impossibility(&spec, &rule).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn mismatched_rule_is_rejected() {
        let spec = ImpossibilitySpec::new(3, 1.5, 10.0, 1e-4, 1.0, 0.1);
        let rule = AllocationRule::second_price_with_reserve(0.5).unwrap();
        assert!(matches!(verify_impossibility(&spec, &rule), Err(Error::RuleMismatch(_))));
    }

    #[test]
    fn second_price_construction_checks() {
        let spec = ImpossibilitySpec::new(20, 1.2, 50.0, 1e-6, 1.0, 0.05);
        let r = verify_impossibility(&spec, &AllocationRule::second_price()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.equilibrium);
        assert_eq!(r.chi[0], 0.0);
        assert_eq!(r.chi[20], 1.0);
        // The top A-bidder takes each contested query outright.
        let expect = 1.2 * (1.0 + 1e-6) / 2.2;
        assert!((r.welfare.ratio - expect).abs() < 1e-6);
    }

    #[test]
    fn cluster_rule_fills_the_welfare_band() {
        let rule = AllocationRule::uniform_top_cluster(2.0, 0.5).unwrap();
        let spec = ImpossibilitySpec::new(10, 1.5, 50.0, 1e-6, 1.0, 0.05).for_rule(&rule).unwrap();
        let r = verify_impossibility(&spec, &rule).unwrap();
        assert!(r.passed(), "{r:?}");
        // A-bidders keep only k/(k+1) of the epsilon mass on contested
        // queries, so the shortfall is that share plus the rho terms.
        let deficit = r.bounds.eq_welfare_upper - r.welfare.welfare;
        let eps_share = 1e-6 * 1.5 * 50.0 * 10.0 / 11.0;
        assert!(deficit > 0.0 && (deficit - eps_share).abs() <= 10.0 * spec.rho * 12.0, "{deficit}");
        for c in &r.chi {
            assert!((c - 1.0 / 11.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_instance_is_seeded() {
        let a = random_instance(7, 3, 4, ValueLaw::LogNormal).unwrap();
        assert_eq!(a, random_instance(7, 3, 4, ValueLaw::LogNormal).unwrap());
        assert_ne!(a, random_instance(8, 3, 4, ValueLaw::LogNormal).unwrap());
        let u = random_instance(1, 5, 20, ValueLaw::Uniform).unwrap();
        for j in 0..20 {
            for i in 0..5 {
                assert!(u.value(i, j) > 0.0 && u.value(i, j) <= 1.0);
            }
        }
        for i in 0..5 {
            assert!(u.target(i) > 0.5 && u.target(i) <= 2.0);
        }
        let t = random_instance(1, 2, 10, ValueLaw::TwoPoint).unwrap();
        assert!((0..10).all(|j| [0.5, 1.0].contains(&t.value(0, j))));
        assert!(random_instance(1, 2, 0, ValueLaw::Uniform).is_err());
    }

    #[test]
    fn value_law_parsing() {
        assert_eq!("two-point".parse::<ValueLaw>().unwrap(), ValueLaw::TwoPoint);
        assert!("gamma".parse::<ValueLaw>().is_err());
    }
}
