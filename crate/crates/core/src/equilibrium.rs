//! Symmetric Nash equilibrium of the inspection game.
//!
//! Write `g(p) = U_I(p) - U_NI(p)`. When everybody else inspects with
//! probability `p`, a tagged customer strictly prefers to inspect iff
//! `g(p) > 0`. `g` is decreasing in `p` (the more others inspect, the fewer
//! long queues a blind joiner meets), so the equilibrium is the unique root of
//! `g` when one exists in the admissible interval and an endpoint otherwise.
//!
//! For `rho < 1`, `n_e >= 1` and `C_I > 0` the root solves the quadratic
//! `K3 P^2 + K4 P + K5 = 0` in `P = 1 - p`; the smaller root is the
//! equilibrium and the larger one always exceeds 1. [`equilibrium_bisect`]
//! handles everything else and doubles as the oracle for the closed form.

use crate::error::{ModelError, Result};
use crate::model::{derive, inspection_advantage, SystemParams, RHO_ONE_TOLERANCE};

/// Residual an `Interior` closed-form result must meet.
pub const CLOSED_FORM_RESIDUAL: f64 = 1e-9;

/// Gap kept between the bisection bracket and the stability boundary when
/// `rho >= 1`.
pub const STABILITY_MARGIN: f64 = 1e-9;

const MAX_BISECTION_STEPS: usize = 200;

/// Coefficients of the equilibrium quadratic in `P = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoeffs {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    /// `K4^2 - 4 K3 K5`.
    pub delta: f64,
}

impl QuadraticCoeffs {
    pub fn eval(&self, big_p: f64) -> f64 {
        (self.k3 * big_p + self.k4) * big_p + self.k5
    }

    /// Both real roots `(P1, P2)` with `P1 <= P2`, or `None` when `delta < 0`.
    ///
    /// Uses the cancellation-free pairing `q = -(K4 + sign(K4) sqrt(delta)) / 2`,
    /// roots `q / K3` and `K5 / q`.
    pub fn roots(&self) -> Option<(f64, f64)> {
        if !(self.delta >= 0.0) {
            return None;
        }
        let sqrt_delta = self.delta.sqrt();
        let q = -0.5 * (self.k4 + sqrt_delta.copysign(self.k4));
        if q == 0.0 {
            return Some((0.0, 0.0));
        }
        let a = q / self.k3;
        let b = self.k5 / q;
        Some(if a <= b { (a, b) } else { (b, a) })
    }
}

/// How an equilibrium was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumBranch {
    /// Root of the closed-form quadratic inside `[0, 1]`.
    Interior,
    /// Nobody inspects: `g(0) <= 0`.
    ClampedZero,
    /// Everybody inspects: `g(1) >= 0`.
    ClampedOne,
    /// Root located by bisection on `g`.
    Bisected,
}

impl EquilibriumBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::ClampedZero => "clamped-zero",
            Self::ClampedOne => "clamped-one",
            Self::Bisected => "bisected",
        }
    }
}

impl std::fmt::Display for EquilibriumBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    pub p_star: f64,
    pub branch: EquilibriumBranch,
    /// `|U_I(p*) - U_NI(p*)|` for interior and bisected roots.
    pub residual: Option<f64>,
    /// Quadratic roots `(P1, P2)` in the `P = 1 - p` variable, when computed.
    pub roots: Option<(f64, f64)>,
}

impl EquilibriumResult {
    fn clamped(p_star: f64, branch: EquilibriumBranch, roots: Option<(f64, f64)>) -> Self {
        Self {
            p_star,
            branch,
            residual: None,
            roots,
        }
    }
}

fn utility_gap(params: &SystemParams, p: f64) -> Result<f64> {
    let u_i = crate::model::utility_inspect(params, p)?;
    let u_ni = crate::model::utility_no_inspect(params, p)?;
    Ok((u_i - u_ni).abs())
}

pub fn quadratic_coeffs(params: &SystemParams) -> Result<QuadraticCoeffs> {
    let d = derive(params)?;
    let rho = d.rho;
    if !(rho < 1.0 - RHO_ONE_TOLERANCE) {
        return Err(ModelError::DomainError(format!(
            "quadratic needs rho in (0, 1), got {rho}"
        )));
    }
    if d.n_e == 0 {
        return Err(ModelError::DomainError("quadratic needs n_e >= 1".into()));
    }
    let c_i = params.inspect_cost;
    if !(c_i > 0.0) {
        return Err(ModelError::DomainError("quadratic needs C_I > 0".into()));
    }
    let (mu, c_w, r) = (params.mu, params.wait_cost, params.reward);
    let n = d.n_e as f64;
    let rho_n = rho.powf(n);
    let rho_n1 = rho_n * rho;

    let k1 = rho_n * (c_w * (n + 1.0) - r * mu);
    let k2 = c_i * (1.0 - rho_n1);
    let k3 = mu * c_i * (1.0 - rho_n) * rho * rho;
    let k4 =
        -(c_i * (1.0 - rho_n) * rho * mu + k2 * rho * mu + (1.0 - rho) * (rho_n1 * c_w - k1 * rho));
    let k5 = k2 * mu - k1 * (1.0 - rho);
    let delta = k4 * k4 - 4.0 * k3 * k5;
    Ok(QuadraticCoeffs {
        k1,
        k2,
        k3,
        k4,
        k5,
        delta,
    })
}

/// Equilibrium from the closed-form quadratic.
///
/// Returns [`ModelError::NeedsBisection`] whenever the quadratic does not
/// apply or its answer cannot be confirmed.
pub fn equilibrium_closed_form(params: &SystemParams) -> Result<EquilibriumResult> {
    params.validate()?;
    if params.inspect_cost == 0.0 {
        // free information always beats blind joining
        return Ok(EquilibriumResult::clamped(
            1.0,
            EquilibriumBranch::ClampedOne,
            None,
        ));
    }
    let coeffs = quadratic_coeffs(params).map_err(|e| match e {
        ModelError::DomainError(msg) => ModelError::NeedsBisection(msg),
        other => other,
    })?;
    if !(coeffs.delta > 0.0) {
        return Err(ModelError::NeedsBisection(format!(
            "non-positive discriminant {}",
            coeffs.delta
        )));
    }
    let roots = coeffs.roots().expect("positive discriminant");
    let p1 = 1.0 - roots.0;
    if (0.0..=1.0).contains(&p1) {
        let residual = utility_gap(params, p1)?;
        if residual < CLOSED_FORM_RESIDUAL {
            return Ok(EquilibriumResult {
                p_star: p1,
                branch: EquilibriumBranch::Interior,
                residual: Some(residual),
                roots: Some(roots),
            });
        }
        return Err(ModelError::NeedsBisection(format!(
            "closed-form root {p1} has residual {residual}"
        )));
    }
    if inspection_advantage(params, 1.0)? >= 0.0 {
        return Ok(EquilibriumResult::clamped(
            1.0,
            EquilibriumBranch::ClampedOne,
            Some(roots),
        ));
    }
    if inspection_advantage(params, 0.0)? <= 0.0 {
        return Ok(EquilibriumResult::clamped(
            0.0,
            EquilibriumBranch::ClampedZero,
            Some(roots),
        ));
    }
    Err(ModelError::NeedsBisection(format!(
        "root {p1} outside [0, 1] but neither endpoint is a best response"
    )))
}

/// Equilibrium by bisection on `g(p) = U_I(p) - U_NI(p)` over the admissible
/// interval. Applies for every valid parameter set, including `rho >= 1`
/// and `n_e = 0`.
pub fn equilibrium_bisect(params: &SystemParams) -> Result<EquilibriumResult> {
    let d = derive(params)?;
    let g = |p: f64| inspection_advantage(params, p);

    if g(1.0)? >= 0.0 {
        return Ok(EquilibriumResult::clamped(
            1.0,
            EquilibriumBranch::ClampedOne,
            None,
        ));
    }
    let p_lo = if d.p_zero_stable {
        0.0
    } else {
        d.min_stationary_p() + STABILITY_MARGIN
    };
    if p_lo >= 1.0 {
        return Err(ModelError::DomainError(format!(
            "no admissible inspection probability below 1 for rho = {}",
            d.rho
        )));
    }
    let g_lo = g(p_lo)?;
    if g_lo <= 0.0 {
        if d.p_zero_stable {
            return Ok(EquilibriumResult::clamped(
                0.0,
                EquilibriumBranch::ClampedZero,
                None,
            ));
        }
        return Err(ModelError::DomainError(format!(
            "equilibrium lies within {STABILITY_MARGIN} of the stability boundary p = {}",
            d.min_stationary_p()
        )));
    }

    // invariant: g(lo) > 0 >= g(hi); converges to inf { p : g(p) <= 0 }
    let (mut lo, mut hi) = (p_lo, 1.0);
    let (mut g_lo, mut g_hi) = (g_lo, g(1.0)?);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid > 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let p_star = if g_lo.abs() < g_hi.abs() { lo } else { hi };
    Ok(EquilibriumResult {
        p_star,
        branch: EquilibriumBranch::Bisected,
        residual: Some(utility_gap(params, p_star)?),
        roots: None,
    })
}

/// Closed form when it applies, bisection otherwise.
pub fn solve_equilibrium(params: &SystemParams) -> Result<EquilibriumResult> {
    match equilibrium_closed_form(params) {
        Err(ModelError::NeedsBisection(_)) => equilibrium_bisect(params),
        other => other,
    }
}
