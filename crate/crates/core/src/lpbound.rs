//! The four-class factor-revealing LP for the two-bidder randomized rule.
//!
//! Queries are split by how the opt-bidder's bid compares with the other
//! bid. Class `k` guarantees the opt-bidder wins with probability `m_k` and
//! that the total spend is at least `s_k · OPT(j)`. Normalizing OPT to 1,
//! equilibrium welfare is at least
//!
//! ```text
//! min z  s.t.  z >= m·x,  z >= s·x,  Σ x = 1,  x >= 0
//! ```
//!
//! and the price of anarchy is at most `1 / z*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-12;

/// `(1 + √85) / 6`, the largest ratio parameter for which the closed-form
/// dual certificate stays feasible at `p = 2/5`.
pub fn alpha_star() -> f64 {
    (1.0 + 85f64.sqrt()) / 6.0
}

pub const DEFAULT_P: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSConstants {
    pub m: [f64; 4],
    pub s: [f64; 4],
    /// `(α, p)` when the constants come from the randomized rule.
    pub params: Option<(f64, f64)>,
}

impl MSConstants {
    /// Arbitrary nonnegative class constants.
    pub fn from_vectors(m: [f64; 4], s: [f64; 4]) -> Result<Self> {
        if m.iter().chain(&s).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("class constants must be finite and nonnegative".into()));
        }
        Ok(MSConstants { m, s, params: None })
    }
}

pub fn ms_constants(alpha: f64, p: f64) -> Result<MSConstants> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("p must lie in (0, 1/2], got {p}")));
    }
    let m = [0.0, p, 1.0 - p, 1.0];
    let s = [
        p * alpha + (1.0 - 2.0 * p) + p / alpha,
        2.0 * p / alpha + (1.0 - 2.0 * p),
        (1.0 - p) / alpha + p / (alpha * alpha),
        0.0,
    ];
    Ok(MSConstants { m, s, params: Some((alpha, p)) })
}

/// Dual point `(γ, β, δ)` for `max δ s.t. δ <= m_k γ + s_k β, γ + β <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LPResult {
    pub z: f64,
    /// `x_k = OPT(Q_k)` mass at the optimum.
    pub x: [f64; 4],
    pub dual: DualPoint,
    /// `z − δ`.
    pub gap: f64,
}

fn dot(a: &[f64; 4], x: &[f64; 4]) -> f64 {
    a.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn unit(k: usize) -> [f64; 4] {
    let mut x = [0.0; 4];
    x[k] = 1.0;
    x
}

/// Solves the primal by enumerating the simplex vertices and, on each edge,
/// the point where `m·x = s·x`; the dual by enumerating the endpoints and
/// pairwise crossings of `γ ↦ min_k (m_k γ + s_k (1 − γ))`.
pub fn solve_factor_lp(c: &MSConstants) -> LPResult {
    let objective = |x: &[f64; 4]| dot(&c.m, x).max(dot(&c.s, x));
    let mut best_x = unit(0);
    let mut best_z = objective(&best_x);
    let mut consider = |x: [f64; 4]| {
        let z = objective(&x);
        if z < best_z - FEAS_TOL {
            best_z = z;
            best_x = x;
        }
    };
    for k in 1..4 {
        consider(unit(k));
    }
    for k in 0..4 {
        for l in k + 1..4 {
            // λ e_k + (1 − λ) e_l with (m − s)·x = 0.
            let dk = c.m[k] - c.s[k];
            let dl = c.m[l] - c.s[l];
            if dk == dl {
                continue;
            }
            let lambda = -dl / (dk - dl);
            if (0.0..=1.0).contains(&lambda) {
                let mut x = [0.0; 4];
                x[k] = lambda;
                x[l] = 1.0 - lambda;
                consider(x);
            }
        }
    }

    let dual = solve_dual(c);
    LPResult { z: best_z, x: best_x, dual, gap: best_z - dual.delta }
}

fn solve_dual(c: &MSConstants) -> DualPoint {
    // With nonnegative constants the budget γ + β <= 1 binds: β = 1 − γ.
    let floor = |g: f64| (0..4).map(|k| c.m[k] * g + c.s[k] * (1.0 - g)).fold(f64::INFINITY, f64::min);
    let mut cands = vec![0.0, 1.0];
    for k in 0..4 {
        for l in k + 1..4 {
            let sk = c.m[k] - c.s[k];
            let sl = c.m[l] - c.s[l];
            if sk != sl {
                let g = (c.s[l] - c.s[k]) / (sk - sl);
                if (0.0..=1.0).contains(&g) {
                    cands.push(g);
                }
            }
        }
    }
    let g = cands.into_iter().fold(0.0, |best, g| if floor(g) > floor(best) { g } else { best });
    DualPoint { gamma: g, beta: 1.0 - g, delta: floor(g) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub point: DualPoint,
    pub feasible: bool,
    /// `−m_k γ − s_k β + δ` per class; feasible means all `<= 0`.
    pub class_slacks: [f64; 4],
    /// `γ + β − 1`.
    pub budget_slack: f64,
    /// `3α² − α − 7`, reported at `p = 2/5`.
    pub class2_poly: Option<f64>,
    /// `4α³ + 2α² − 11α − 10`, reported at `p = 2/5`.
    pub class3_poly: Option<f64>,
}

/// The closed-form dual point `δ = 1 / (1 + 1/s_1)`, `γ = δ`, `β = δ / s_1`
/// and its feasibility.
pub fn dual_certificate(alpha: f64, p: f64) -> Result<DualCertificate> {
    let c = ms_constants(alpha, p)?;
    let s1 = c.s[0];
    let delta = 1.0 / (1.0 + 1.0 / s1);
    let point = DualPoint { gamma: delta, beta: delta / s1, delta };
    let class_slacks: [f64; 4] =
        std::array::from_fn(|k| -c.m[k] * point.gamma - c.s[k] * point.beta + point.delta);
    let budget_slack = point.gamma + point.beta - 1.0;
    let feasible = class_slacks.iter().all(|&v| v <= FEAS_TOL) && budget_slack <= FEAS_TOL;
    let at_two_fifths = (p - DEFAULT_P).abs() < 1e-15;
    Ok(DualCertificate {
        point,
        feasible,
        class_slacks,
        budget_slack,
        class2_poly: at_two_fifths.then(|| class2_poly(alpha)),
        class3_poly: at_two_fifths.then(|| class3_poly(alpha)),
    })
}

pub fn class2_poly(alpha: f64) -> f64 {
    3.0 * alpha * alpha - alpha - 7.0
}

pub fn class3_poly(alpha: f64) -> f64 {
    4.0 * alpha.powi(3) + 2.0 * alpha * alpha - 11.0 * alpha - 10.0
}

/// Root of [`class3_poly`] in `[1, 2]`, by bisection.
pub fn class3_root() -> f64 {
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if class3_poly(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoaBound {
    /// `1 + 1/s_1`.
    pub bound: f64,
    /// Whether the dual certificate backing the bound is feasible.
    pub certified: bool,
}

pub fn poa_bound(alpha: f64, p: f64) -> Result<PoaBound> {
    let cert = dual_certificate(alpha, p)?;
    let s1 = ms_constants(alpha, p)?.s[0];
    Ok(PoaBound { bound: 1.0 + 1.0 / s1, certified: cert.feasible })
}

/// Largest `α` in `[1, 10]` whose certificate is feasible at this `p`, found
/// by bisection on the feasible prefix.
pub fn max_certified_alpha(p: f64) -> Result<f64> {
    if !dual_certificate(1.0, p)?.feasible {
        return Err(Error::Domain(format!("no certified alpha at p = {p}")));
    }
    let (mut lo, mut hi) = (1.0, 10.0);
    if dual_certificate(hi, p)?.feasible {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dual_certificate(mid, p)?.feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
