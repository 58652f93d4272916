//! Charging for queue-length information.
//!
//! Revenue is `R_I(C_I) = lambda * p*(C_I) * C_I`. `p*` is 1 for tiny prices,
//! falls through the interior of `[0, 1]`, and reaches 0 at the choke price,
//! beyond which nothing is earned.

use super::{FeeCandidate, PricingResult};
use crate::equilibrium::solve_equilibrium;
use crate::error::{ModelError, Result};
use crate::model::{inspection_advantage, SystemParams};
use crate::search::{golden_section_max, grid_max};

/// Step the bracketing pass of [`optimize_info_fee_refine`] uses, as a
/// fraction of the search interval.
const BRACKET_STEPS: f64 = 64.0;

/// Nodes of the fallback grid when the refinement finds a non-unimodal
/// revenue curve.
const FALLBACK_GRID: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoEvaluation {
    pub c_i: f64,
    pub p_star: f64,
    pub revenue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// The latest step did not increase revenue.
    RevenueDecreased,
    /// The next step would pass `c_i_max`.
    UpperBoundHit,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RevenueDecreased => "revenue-decreased",
            Self::UpperBoundHit => "upper-bound-hit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicTrace {
    pub step: f64,
    pub evaluations: Vec<InfoEvaluation>,
    pub stop_reason: StopReason,
    pub best_fee: f64,
    pub best_revenue: f64,
}

pub fn evaluate_info_fee(params: &SystemParams, c_i: f64) -> Result<InfoEvaluation> {
    if !(c_i.is_finite() && c_i >= 0.0) {
        return Err(ModelError::InvalidParams(format!(
            "information fee must be finite and >= 0, got {c_i}"
        )));
    }
    let eq = solve_equilibrium(&params.with_inspect_cost(c_i))?;
    Ok(InfoEvaluation {
        c_i,
        p_star: eq.p_star,
        revenue: params.lambda * eq.p_star * c_i,
    })
}

/// `lambda * p*(C_I) * C_I`.
pub fn revenue_info(params: &SystemParams, c_i: f64) -> Result<f64> {
    Ok(evaluate_info_fee(params, c_i)?.revenue)
}

/// Smallest information fee at which nobody inspects, or `None` when
/// `rho >= 1` (some inspection then persists at every price).
pub fn info_choke_price(params: &SystemParams) -> Result<Option<f64>> {
    params.validate()?;
    if params.rho() >= 1.0 {
        return Ok(None);
    }
    // p* = 0 iff g(0) <= 0 iff C_I >= tail loss at p = 0
    let free = params.with_inspect_cost(0.0);
    Ok(Some(inspection_advantage(&free, 0.0)?.max(0.0)))
}

/// Default heuristic step: one percent of the service valuation.
pub fn default_step(params: &SystemParams) -> f64 {
    1e-2 * params.reward
}

/// Fixed-step ascent: start at a zero fee and raise it by `step` until the
/// revenue stops increasing or the next fee would exceed `c_i_max`.
pub fn optimize_info_fee_heuristic(
    params: &SystemParams,
    step: f64,
    c_i_max: f64,
) -> Result<HeuristicTrace> {
    params.validate()?;
    if !(step.is_finite() && step > 0.0) {
        return Err(ModelError::InvalidParams(format!(
            "step must be > 0, got {step}"
        )));
    }
    if !(c_i_max.is_finite() && c_i_max > 0.0) {
        return Err(ModelError::InvalidParams(format!(
            "c_i_max must be > 0, got {c_i_max}"
        )));
    }
    let slack = 1e-9 * step;
    let mut evaluations = vec![evaluate_info_fee(params, 0.0)?];
    let mut k: u64 = 1;
    let stop_reason = loop {
        let c_i = k as f64 * step;
        if c_i > c_i_max + slack {
            break StopReason::UpperBoundHit;
        }
        let eval = evaluate_info_fee(params, c_i)?;
        let prev = evaluations.last().expect("non-empty").revenue;
        evaluations.push(eval);
        if eval.revenue <= prev {
            break StopReason::RevenueDecreased;
        }
        k += 1;
    };
    let best = evaluations.iter().fold(
        evaluations[0],
        |b, e| if e.revenue > b.revenue { *e } else { b },
    );
    Ok(HeuristicTrace {
        step,
        evaluations,
        stop_reason,
        best_fee: best.c_i,
        best_revenue: best.revenue,
    })
}

/// Heuristic bracketing followed by golden-section refinement to `tol` in
/// the fee. Falls back to a grid over the whole positive-revenue interval if
/// the curve turns out not to be unimodal.
pub fn optimize_info_fee_refine(params: &SystemParams, tol: f64) -> Result<PricingResult> {
    optimize_info_fee_refine_capped(params, tol, params.reward)
}

pub fn optimize_info_fee_refine_capped(
    params: &SystemParams,
    tol: f64,
    c_i_max: f64,
) -> Result<PricingResult> {
    params.validate()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(ModelError::InvalidParams(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let upper = match info_choke_price(params)? {
        Some(choke) => choke.min(c_i_max),
        None => c_i_max,
    };
    if !(upper > 0.0) {
        return Ok(PricingResult::from_candidates(Vec::new()));
    }

    let step = upper / BRACKET_STEPS;
    let trace = optimize_info_fee_heuristic(params, step, upper)?;
    let mut candidates = vec![FeeCandidate {
        label: "heuristic",
        fee: trace.best_fee,
        revenue: trace.best_revenue,
        valid: true,
    }];
    if trace.best_revenue <= 0.0 {
        return Ok(PricingResult::from_candidates(candidates));
    }

    let revenue = |c: f64| revenue_info(params, c);
    let lo = (trace.best_fee - step).max(0.0);
    let hi = (trace.best_fee + step).min(upper);
    let mut refined = golden_section_max(revenue, lo, hi, tol)?;
    if refined.unimodality_violated || refined.value < trace.best_revenue {
        let coarse = grid_max(revenue, 0.0, upper, FALLBACK_GRID)?;
        let cell = upper / (FALLBACK_GRID - 1) as f64;
        refined = golden_section_max(
            revenue,
            (coarse.x - cell).max(0.0),
            (coarse.x + cell).min(upper),
            tol,
        )?;
        if coarse.value > refined.value {
            refined = coarse;
        }
        candidates.push(FeeCandidate {
            label: "grid",
            fee: refined.x,
            revenue: refined.value,
            valid: true,
        });
    } else {
        candidates.push(FeeCandidate {
            label: "golden-section",
            fee: refined.x,
            revenue: refined.value,
            valid: true,
        });
    }
    Ok(PricingResult::from_candidates(candidates))
}
