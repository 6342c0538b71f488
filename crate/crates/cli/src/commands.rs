//! Experiment drivers. Each returns a serializable result and whether the
//! claim it checks held.

use autobid_core::equilibrium::{best_response_dynamics, verify_equilibrium, EquilibriumReport};
use autobid_core::instances::{
    impossibility_bounds, random_instance, simulate_impossibility, tight_example, verify_impossibility,
    ImpossibilityBounds, ImpossibilityReport, ImpossibilitySpec, ImpossibilityWelfare, TightExampleSpec, ValueLaw,
};
use autobid_core::lpbound::{dual_certificate, ms_constants, poa_bound, solve_factor_lp, DualCertificate, LPResult, MSConstants};
use autobid_core::mechanisms::max_threshold;
use autobid_core::{AllocationRule, BidProfile, Instance};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Slack allowed when comparing a measured ratio with a proven bound.
pub const RATIO_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct LpOutput {
    pub alpha: f64,
    pub p: f64,
    pub constants: MSConstants,
    pub lp: LPResult,
    pub certificate: DualCertificate,
    pub poa_bound: f64,
    pub certified: bool,
}

pub fn cmd_lp(alpha: f64, p: f64) -> Result<LpOutput> {
    let constants = ms_constants(alpha, p)?;
    let bound = poa_bound(alpha, p)?;
    Ok(LpOutput {
        alpha,
        p,
        constants,
        lp: solve_factor_lp(&constants),
        certificate: dual_certificate(alpha, p)?,
        poa_bound: bound.bound,
        certified: bound.certified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TightOutput {
    pub spec: TightExampleSpec,
    pub multipliers: Vec<f64>,
    pub report: EquilibriumReport,
    pub ratio: f64,
    /// `(1 + 1/s_1) / (1 + ε)`.
    pub expected_ratio: f64,
}

impl TightOutput {
    pub fn claim_ok(&self) -> bool {
        self.report.is_equilibrium
    }
}

pub fn cmd_tight(alpha: f64, p: f64, epsilon: f64, delta: f64, gamma: f64) -> Result<TightOutput> {
    let spec = TightExampleSpec { alpha, p, epsilon };
    let (inst, prof) = tight_example(&spec)?;
    let rule = AllocationRule::rand(alpha, p)?;
    let report = verify_equilibrium(&inst, &rule, &prof, delta, gamma)?;
    let expected_ratio = poa_bound(alpha, p)?.bound / (1.0 + epsilon);
    Ok(TightOutput { spec, multipliers: prof.multipliers().to_vec(), ratio: report.ratio, report, expected_ratio })
}

#[derive(Debug, Clone, Copy)]
pub struct ImpossibilityParams {
    pub k: usize,
    pub a: f64,
    pub v: f64,
    pub epsilon: f64,
    pub rho: Option<f64>,
    pub pi_star: Option<f64>,
    pub m_star: Option<f64>,
    pub delta: f64,
    pub gamma: f64,
    /// Skip best responses and report welfare only.
    pub welfare_only: bool,
}

impl ImpossibilityParams {
    /// Fills `(π*, M*)` from the rule where not given.
    pub fn spec(&self, rule: &AllocationRule) -> Result<ImpossibilitySpec> {
        let mut spec = ImpossibilitySpec::new(self.k, self.a, self.v, self.epsilon, self.delta, self.gamma);
        if let Some(rho) = self.rho {
            spec.rho = rho;
        }
        let mt = max_threshold(rule)?;
        spec.pi_star = self.pi_star.unwrap_or(mt.max_probability);
        spec.m_star = self.m_star.unwrap_or(mt.max_threshold);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpossibilityOutput {
    pub spec: ImpossibilitySpec,
    pub bounds: ImpossibilityBounds,
    pub welfare: ImpossibilityWelfare,
    pub report: Option<ImpossibilityReport>,
    pub warnings: Vec<String>,
}

impl ImpossibilityOutput {
    pub fn claim_ok(&self) -> bool {
        match &self.report {
            Some(r) => r.passed(),
            None => self.welfare.welfare <= self.bounds.eq_welfare_upper * (1.0 + 1e-9),
        }
    }
}

pub fn cmd_impossibility(params: &ImpossibilityParams, rule: &AllocationRule) -> Result<ImpossibilityOutput> {
    let spec = params.spec(rule)?;
    let bounds = impossibility_bounds(&spec);
    let (welfare, report) = if params.welfare_only {
        (simulate_impossibility(&spec, rule)?, None)
    } else {
        let r = verify_impossibility(&spec, rule)?;
        (r.welfare, Some(r))
    };
    Ok(ImpossibilityOutput { spec, bounds, welfare, report, warnings: spec.parameter_warnings() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    Rand,
    UniformTopCluster,
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub family: SweepFamily,
    pub alphas: Vec<f64>,
    pub ps: Vec<f64>,
    pub instances: usize,
    pub bidders: usize,
    pub queries: usize,
    pub law: ValueLaw,
    pub seed: u64,
    pub delta: f64,
    pub gamma: f64,
    pub max_rounds: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: f64,
    pub instance_id: usize,
    /// Dynamics converged and the final profile verified as an equilibrium.
    pub converged: bool,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Converged rows whose ratio exceeds the proven bound at their grid
    /// point.
    pub violations: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn claim_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let converged = self.rows.iter().filter(|r| r.converged).count();
        let max = self.rows.iter().filter(|r| r.converged).map(|r| r.ratio).fold(f64::NAN, f64::max);
        format!(
            "{} rows, {} converged, {} excluded, max equilibrium ratio {}, {} bound violations",
            self.rows.len(),
            converged,
            self.rows.len() - converged,
            max,
            self.violations.len()
        )
    }
}

/// `steps` evenly spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Proven price-of-anarchy bound at a grid point, if any. At `α = 1` both
/// families are second price; otherwise only the two-bidder case, where
/// they coincide, has a certified bound.
pub fn proven_bound(bidders: usize, alpha: f64, p: f64) -> Option<f64> {
    if alpha == 1.0 {
        return Some(2.0);
    }
    if bidders != 2 {
        return None;
    }
    poa_bound(alpha, p).ok().filter(|b| b.certified).map(|b| b.bound)
}

pub fn cmd_sweep(params: &SweepParams) -> Result<SweepOutput> {
    if params.bidders == 0 || params.queries == 0 {
        return Err(CliError::Usage("bidders and queries must be positive".into()));
    }
    if params.family == SweepFamily::Rand && params.bidders != 2 {
        return Err(CliError::Usage("the rand family needs exactly 2 bidders".into()));
    }
    let mut jobs = Vec::new();
    for &alpha in &params.alphas {
        for &p in &params.ps {
            let rule = match params.family {
                SweepFamily::Rand => AllocationRule::rand(alpha, p)?,
                SweepFamily::UniformTopCluster => AllocationRule::uniform_top_cluster(alpha, p)?,
            };
            jobs.extend((0..params.instances).map(|id| (alpha, p, id, rule.clone())));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(alpha, p, id, rule)| {
            let inst = random_instance(params.seed.wrapping_add(id as u64), params.bidders, params.queries, params.law)?;
            let (converged, ratio) = equilibrium_ratio(&inst, &rule, params)?;
            Ok(SweepRow { alpha, p, instance_id: id, converged, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows
        .iter()
        .filter(|r| {
            r.converged
                && proven_bound(params.bidders, r.alpha, r.p).is_some_and(|b| r.ratio > b + RATIO_SLACK)
        })
        .cloned()
        .collect();
    Ok(SweepOutput { rows, violations })
}

fn equilibrium_ratio(inst: &Instance, rule: &AllocationRule, params: &SweepParams) -> Result<(bool, f64)> {
    let init = BidProfile::uniform(inst.n_bidders(), 1.0)?;
    let dynamics = best_response_dynamics(inst, rule, &init, params.gamma, params.max_rounds, params.tol)?;
    let report = verify_equilibrium(inst, rule, &dynamics.profile, params.delta, params.gamma)?;
    Ok((dynamics.converged && report.is_equilibrium, report.ratio))
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSummary {
    pub converged: bool,
    pub rounds: usize,
    pub cycle: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutput {
    pub multipliers: Vec<f64>,
    /// Present when the profile came from best-response dynamics.
    pub dynamics: Option<DynamicsSummary>,
    pub report: EquilibriumReport,
}

impl VerifyOutput {
    pub fn claim_ok(&self) -> bool {
        self.report.is_equilibrium
    }
}

/// Verifies a given profile, or runs dynamics from all-ones first.
pub fn cmd_verify(
    inst: &Instance,
    rule: &AllocationRule,
    profile: Option<BidProfile>,
    delta: f64,
    gamma: f64,
    max_rounds: usize,
) -> Result<VerifyOutput> {
    let (prof, dynamics) = match profile {
        Some(p) => (p, None),
        None => {
            let d = best_response_dynamics(
                inst,
                rule,
                &BidProfile::uniform(inst.n_bidders(), 1.0)?,
                gamma,
                max_rounds,
                autobid_core::equilibrium::DEFAULT_DYNAMICS_TOL,
            )?;
            let summary = DynamicsSummary { converged: d.converged, rounds: d.rounds, cycle: d.cycle };
            (d.profile, Some(summary))
        }
    };
    let report = verify_equilibrium(inst, rule, &prof, delta, gamma)?;
    Ok(VerifyOutput { multipliers: prof.multipliers().to_vec(), dynamics, report })
}

pub fn cmd_gen(seed: u64, bidders: usize, queries: usize, law: ValueLaw) -> Result<Instance> {
    Ok(random_instance(seed, bidders, queries, law)?)
}
