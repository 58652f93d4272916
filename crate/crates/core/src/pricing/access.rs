//! Charging admission to the (unobservable) queue.
//!
//! With fee `C_Acc` a blind joiner nets `R - C_Acc - C_W / (mu - lambda q)`
//! when a fraction `q` of arrivals joins; the equilibrium `q*` makes that zero
//! or sits at an endpoint.

use super::{FeeCandidate, PricingResult};
use crate::error::{ModelError, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinRegime {
    All,
    Partial,
    None,
}

impl std::fmt::Display for JoinRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::Partial => "partial",
            Self::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinEquilibrium {
    pub q_star: f64,
    pub regime: JoinRegime,
}

fn check_stable(params: &SystemParams) -> Result<()> {
    params.validate()?;
    if params.lambda >= params.mu {
        return Err(ModelError::DomainError(format!(
            "access pricing needs lambda < mu, got lambda = {} and mu = {}",
            params.lambda, params.mu
        )));
    }
    Ok(())
}

fn check_fee(c_acc: f64) -> Result<()> {
    if c_acc.is_finite() && c_acc >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParams(format!(
            "access fee must be finite and >= 0, got {c_acc}"
        )))
    }
}

/// Largest fee at which every arrival still joins: `R - C_W / (mu - lambda)`.
pub fn full_join_fee(params: &SystemParams) -> f64 {
    params.reward - params.wait_cost / (params.mu - params.lambda)
}

/// Fee above which nobody joins: `R - C_W / mu`.
pub fn choke_fee(params: &SystemParams) -> f64 {
    params.reward - params.wait_cost / params.mu
}

pub fn join_equilibrium(params: &SystemParams, c_acc: f64) -> Result<JoinEquilibrium> {
    check_stable(params)?;
    check_fee(c_acc)?;
    if c_acc <= full_join_fee(params) {
        return Ok(JoinEquilibrium {
            q_star: 1.0,
            regime: JoinRegime::All,
        });
    }
    if c_acc > choke_fee(params) {
        return Ok(JoinEquilibrium {
            q_star: 0.0,
            regime: JoinRegime::None,
        });
    }
    let q = (params.mu - params.wait_cost / (params.reward - c_acc)) / params.lambda;
    Ok(JoinEquilibrium {
        q_star: q.clamp(0.0, 1.0),
        regime: JoinRegime::Partial,
    })
}

/// `lambda * q*(C_Acc) * C_Acc`.
pub fn revenue_access(params: &SystemParams, c_acc: f64) -> Result<f64> {
    let eq = join_equilibrium(params, c_acc)?;
    Ok(params.lambda * eq.q_star * c_acc)
}

/// Revenue-maximizing admission fee.
///
/// Two candidates: the largest fee that keeps everyone joining, and the
/// stationary point `R - sqrt(R C_W / mu)` of the partial-join revenue. The
/// latter only counts when it lies inside the partial-join interval.
pub fn optimal_access_fee(params: &SystemParams) -> Result<PricingResult> {
    check_stable(params)?;
    let boundary = full_join_fee(params);
    let stationary = params.reward - (params.reward * params.wait_cost / params.mu).sqrt();
    let upper = choke_fee(params);

    let revenue_at = |fee: f64| -> Result<f64> {
        if fee >= 0.0 {
            revenue_access(params, fee)
        } else {
            Ok(0.0)
        }
    };
    let candidates = vec![
        FeeCandidate {
            label: "full-join",
            fee: boundary,
            revenue: revenue_at(boundary)?,
            valid: boundary >= 0.0,
        },
        FeeCandidate {
            label: "partial-join",
            fee: stationary,
            revenue: revenue_at(stationary)?,
            valid: stationary >= 0.0 && stationary >= boundary.max(0.0) && stationary <= upper,
        },
    ];
    Ok(PricingResult::from_candidates(candidates))
}
