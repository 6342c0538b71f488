//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//!
//! A criterion listed in `BLOCKED` prints FAIL like any other, but its run
//! also checks that the failure is exactly the recorded one; only a failure
//! outside that record makes the process exit nonzero.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use autobid_core::equilibrium::{best_response_dynamics, partition_audit, verify_equilibrium, DEFAULT_DYNAMICS_TOL};
use autobid_core::instances::{
    impossibility_bounds, random_instance, simulate_impossibility, tight_example, verify_impossibility,
    ImpossibilitySpec, TightExampleSpec, ValueLaw,
};
use autobid_core::lpbound::{alpha_star, dual_certificate, ms_constants, poa_bound, solve_factor_lp, MSConstants};
use autobid_core::mechanisms::properties::check_all;
use autobid_core::{AllocationRule, BidProfile, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCKED: &[usize] = &[5];

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
    /// For blocked criteria: the failure matched the recorded analysis.
    as_recorded: bool,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into(), as_recorded: false }
    }
}

fn c1() -> Outcome {
    let a = alpha_star();
    let r = solve_factor_lp(&ms_constants(a, 0.4).unwrap());
    let b = poa_bound(a, 0.4).unwrap();
    let cert = dual_certificate(a, 0.4).unwrap();
    let tight = cert.class_slacks[1].abs() < 1e-9;
    let pass = (r.z - 0.5274).abs() <= 5e-4 && (b.bound - 1.896).abs() <= 1e-3 && cert.feasible && tight;
    Outcome::new(
        pass,
        format!(
            "z = {:.6}, bound = {:.6}, certificate feasible = {}, class-2 slack = {:.1e}",
            r.z, b.bound, cert.feasible, cert.class_slacks[1]
        ),
    )
}

fn c2() -> Outcome {
    let a = alpha_star();
    let grid_ok = (0..100).all(|i| dual_certificate(1.0 + (a - 1.0) * i as f64 / 99.0, 0.4).unwrap().feasible);
    let past = dual_certificate(a + 0.01, 0.4).unwrap();
    let flip = past.class2_poly.is_some_and(|v| v > 0.0);
    Outcome::new(
        grid_ok && !past.feasible && flip,
        format!("100-point grid feasible = {grid_ok}, feasible at alpha* + 0.01 = {}", past.feasible),
    )
}

fn c3() -> Outcome {
    let (alpha, eps) = (alpha_star(), 1e-4);
    let (inst, prof) = tight_example(&TightExampleSpec { alpha, p: 0.4, epsilon: eps }).unwrap();
    let rule = AllocationRule::rand(alpha, 0.4).unwrap();
    let r = verify_equilibrium(&inst, &rule, &prof, 1e-9, 1e-9).unwrap();
    let s1 = ms_constants(alpha, 0.4).unwrap().s[0];
    let expected = (1.0 + 1.0 / s1) / (1.0 + eps);
    let pass = r.is_equilibrium && (r.ratio - 1.8958).abs() <= 1e-3 && (r.ratio - expected).abs() <= 1e-9;
    Outcome::new(pass, format!("equilibrium = {}, ratio = {:.9}, closed form = {expected:.9}", r.is_equilibrium, r.ratio))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sp = AllocationRule::second_price();
    let mut worst = 0.0f64;
    let mut sp_mismatch = 0;
    for _ in 0..10_000 {
        let (b1, b2) = (rng.random_range(0.01..10.0), rng.random_range(0.01..10.0));
        let alpha = rng.random_range(1.0..3.0);
        let p = 0.5 - rng.random_range(0.0..0.5);
        let pay = AllocationRule::rand(alpha, p).unwrap().myerson_payments(&[b1, b2]).unwrap();
        let (hi, lo) = (b1.max(b2), b1.min(b2));
        let (c_hi, c_lo) = if hi >= alpha * lo {
            (lo * (p / alpha + 1.0 - 2.0 * p + p * alpha), 0.0)
        } else {
            (lo * (p / alpha + 1.0 - 2.0 * p), p * hi / alpha)
        };
        let expect = if b1 > b2 { [c_hi, c_lo] } else { [c_lo, c_hi] };
        worst = worst.max((pay[0] - expect[0]).abs()).max((pay[1] - expect[1]).abs());

        let bids = if rng.random_bool(0.05) { [b1, b1] } else { [b1, b2] };
        if AllocationRule::rand(1.0, p).unwrap().run(&bids).unwrap() != sp.run(&bids).unwrap() {
            sp_mismatch += 1;
        }
    }
    Outcome::new(
        worst <= 1e-9 && sp_mismatch == 0,
        format!("max payment error = {worst:.2e}, Rand(1, p) vs second price mismatches = {sp_mismatch}"),
    )
}

fn c5() -> Outcome {
    let sp = AllocationRule::second_price();
    let (k, a, v, eps, delta, gamma) = (100, 1.05, 100.0, 1e-6, 2.0, 0.05);
    let spec = ImpossibilitySpec::new(k, a, v, eps, delta, gamma).for_rule(&sp).unwrap();
    let at_stated = verify_impossibility(&spec, &sp);
    let rejected = matches!(at_stated, Err(Error::Domain(_)));

    // Nearest admissible gamma, everything else unchanged.
    let near = ImpossibilitySpec::new(k, a, v, eps, delta, 0.049).for_rule(&sp).unwrap();
    let report = verify_impossibility(&near, &sp).unwrap();
    let ratio = report.welfare.ratio;
    let bound = impossibility_bounds(&near).ratio_upper;
    let band_ok = (ratio - 0.517).abs() <= 0.002;

    let far = ImpossibilitySpec::new(1000, 1.01, v, eps, delta, 0.005).for_rule(&sp).unwrap();
    let far_ratio = simulate_impossibility(&far, &sp).unwrap().ratio;
    let approach_ok = far_ratio < 0.512 && far_ratio < ratio && far_ratio > 0.5;

    let pass = !rejected && report.passed() && band_ok && approach_ok;
    let as_recorded = rejected
        && report.passed()
        && (ratio - a * (1.0 + eps) / (a + 1.0)).abs() < 1e-9
        && (bound - 0.517).abs() <= 0.002
        && approach_ok;
    let mut o = Outcome::new(
        pass,
        format!(
            "a = 1 + gamma rejected = {rejected}; at gamma = 0.049 checks pass = {}, simulated ratio = {ratio:.5} \
             (band 0.517 +/- 0.002), welfare-bound ratio = {bound:.5}; k = 1000, a = 1.01 ratio = {far_ratio:.5}",
            report.passed()
        ),
    );
    o.as_recorded = as_recorded;
    o
}

fn c6() -> Outcome {
    let (alpha, p) = (alpha_star(), 0.4);
    let rule = AllocationRule::rand(alpha, p).unwrap();
    let bound = poa_bound(alpha, p).unwrap().bound;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let jobs: Vec<(u64, usize)> = (0..200).map(|i| (1000 + i, rng.random_range(2..=8))).collect();
    let mut excluded = Vec::new();
    let mut audit_failures = Vec::new();
    let mut worst = 0.0f64;
    for (seed, queries) in jobs {
        let inst = random_instance(seed, 2, queries, ValueLaw::Uniform).unwrap();
        let init = BidProfile::uniform(2, 1.0).unwrap();
        let dyn_out = best_response_dynamics(&inst, &rule, &init, 1e-6, 200, DEFAULT_DYNAMICS_TOL).unwrap();
        let report = verify_equilibrium(&inst, &rule, &dyn_out.profile, 1e-6, 1e-6).unwrap();
        if !(dyn_out.converged && report.is_equilibrium) {
            excluded.push(seed);
            continue;
        }
        if !partition_audit(&inst, &dyn_out.profile, alpha, p).unwrap().passed() {
            audit_failures.push(seed);
        }
        worst = worst.max(report.ratio);
    }
    let kept = 200 - excluded.len();
    Outcome::new(
        kept > 0 && audit_failures.is_empty() && worst <= bound + 1e-6,
        format!(
            "{kept} verified, {} excluded (seeds {excluded:?}), audit failures = {audit_failures:?}, max ratio = {worst:.6}",
            excluded.len()
        ),
    )
}

fn c7() -> Outcome {
    let rules = [
        AllocationRule::second_price(),
        AllocationRule::second_price_with_reserve(1.5).unwrap(),
        AllocationRule::rand(1.0, 0.4).unwrap(),
        AllocationRule::rand(alpha_star(), 0.4).unwrap(),
        AllocationRule::rand(2.5, 0.1).unwrap(),
        AllocationRule::uniform_top_cluster(1.2, 0.3).unwrap(),
        AllocationRule::uniform_top_cluster(2.0, 0.5).unwrap(),
    ];
    let mut failures = Vec::new();
    let mut checks = 0;
    for (i, rule) in rules.iter().enumerate() {
        for r in check_all(rule, 2000, 70 + i as u64).unwrap() {
            checks += 1;
            if !r.passed() {
                failures.push(format!("{} {:?}: {:?}", rule.name(), r.property, r.counterexample));
            }
        }
    }
    Outcome::new(failures.is_empty(), format!("{} rules, {checks} checks, counterexamples: {failures:?}", rules.len()))
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<([f64; 4], [f64; 4], u64)> = (0..50)
        .map(|_| {
            let m = std::array::from_fn(|_| rng.random_range(0.0..2.0));
            let s = std::array::from_fn(|_| rng.random_range(0.0..2.0));
            (m, s, rng.random())
        })
        .collect();
    let margins: Vec<(usize, f64)> = cases
        .into_par_iter()
        .map(|(m, s, seed)| {
            let z = solve_factor_lp(&MSConstants::from_vectors(m, s).unwrap()).z;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut beaten, mut worst) = (0, f64::INFINITY);
            for _ in 0..100_000 {
                let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
                let t: f64 = e.iter().sum();
                let (mut dm, mut ds) = (0.0, 0.0);
                for k in 0..4 {
                    dm += m[k] * e[k] / t;
                    ds += s[k] * e[k] / t;
                }
                let margin = dm.max(ds) - z;
                worst = worst.min(margin);
                if margin < -1e-9 {
                    beaten += 1;
                }
            }
            (beaten, worst)
        })
        .collect();
    let beaten: usize = margins.iter().map(|m| m.0).sum();
    let worst = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    Outcome::new(beaten == 0, format!("50 vectors x 1e5 samples, beaten = {beaten}, min margin = {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("bound reproduction", c1, Duration::from_secs(1)),
        ("certificate range", c2, Duration::from_secs(1)),
        ("tight example", c3, Duration::from_secs(1)),
        ("randomized pricing oracle", c4, Duration::from_secs(5)),
        ("impossibility at desk scale", c5, Duration::from_secs(30)),
        ("audit property", c6, Duration::from_secs(60)),
        ("mechanism property suite", c7, Duration::from_secs(10)),
        ("LP oracle equivalence", c8, Duration::from_secs(10)),
    ];
    let mut unexpected = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= budget;
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {verdict}: {name} ({:.2} s, budget {} s): {}", took.as_secs_f64(), budget.as_secs(), out.detail);
        if !pass {
            if BLOCKED.contains(&n) && out.as_recorded {
                println!("criterion {n}: failure matches the recorded blocking analysis");
            } else {
                unexpected += 1;
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
