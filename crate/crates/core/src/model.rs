//! Primitive parameters, the birth-death chain induced by probabilistic
//! inspection, and the two expected utilities in closed form.
//!
//! An arriving customer inspects the queue with probability `p`. Inspectors
//! join only while the occupancy is below the Naor threshold
//! `n_e = floor(R * mu / C_W)`; everyone else joins blindly. The chain therefore
//! has birth rate `lambda` below `n_e` and `(1 - p) * lambda` from `n_e` on, and
//! all infinite sums over its states reduce to geometric series.
//!
//! Internally every state weight is divided by `sigma = max(1, rho^n_e)` so the
//! head of the chain never overflows when `rho > 1` and `n_e` is large.

use crate::error::{ModelError, Result};

/// `|rho - 1|` below which the `rho = 1` limit formulas are used.
pub const RHO_ONE_TOLERANCE: f64 = 1e-9;

/// Longest state vector `stationary_distribution` will materialize.
pub const MAX_MATERIALIZED_STATES: usize = 10_000_000;

/// Market and queue primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Arrival rate.
    pub lambda: f64,
    /// Service rate.
    pub mu: f64,
    /// Service valuation `R`.
    pub reward: f64,
    /// Waiting cost per unit time in the system, `C_W`.
    pub wait_cost: f64,
    /// Price of learning the queue length, `C_I`.
    pub inspect_cost: f64,
    /// Admission fee `C_Acc`; only the access-pricing mechanism reads it.
    pub access_fee: f64,
}

impl SystemParams {
    /// Parameters with zero inspection cost and zero access fee.
    pub fn new(lambda: f64, mu: f64, reward: f64, wait_cost: f64) -> Self {
        Self {
            lambda,
            mu,
            reward,
            wait_cost,
            inspect_cost: 0.0,
            access_fee: 0.0,
        }
    }

    pub fn with_inspect_cost(mut self, inspect_cost: f64) -> Self {
        self.inspect_cost = inspect_cost;
        self
    }

    pub fn with_access_fee(mut self, access_fee: f64) -> Self {
        self.access_fee = access_fee;
        self
    }

    pub fn with_wait_cost(mut self, wait_cost: f64) -> Self {
        self.wait_cost = wait_cost;
        self
    }

    pub fn with_reward(mut self, reward: f64) -> Self {
        self.reward = reward;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("reward", self.reward),
            ("wait_cost", self.wait_cost),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        let non_negative = [
            ("inspect_cost", self.inspect_cost),
            ("access_fee", self.access_fee),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Utilization `lambda / mu`.
    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Naor threshold `floor(R * mu / C_W)`: inspectors join iff the
    /// occupancy is at most `n_e - 1`.
    pub fn naor_threshold(&self) -> u64 {
        // `as` saturates, so absurdly small waiting costs cap at u64::MAX.
        (self.reward * self.mu / self.wait_cost).floor() as u64
    }

    /// Expected cost of one unit of system time per service, `C_W / mu`.
    pub(crate) fn cost_per_slot(&self) -> f64 {
        self.wait_cost / self.mu
    }
}

/// Quantities derived from [`SystemParams`] that do not depend on `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub rho: f64,
    pub n_e: u64,
    /// Whether `p = 0` lies inside the stationarity domain (`rho < 1`).
    pub p_zero_stable: bool,
}

impl DerivedParams {
    /// `eta(p) = 1 - (1 - p) * rho`.
    pub fn eta(&self, p: f64) -> f64 {
        1.0 - (1.0 - p) * self.rho
    }

    /// `(1 - p) * rho < 1`.
    pub fn is_stationary(&self, p: f64) -> bool {
        (1.0 - p) * self.rho < 1.0
    }

    /// Infimum of the stationary inspection probabilities: `max(0, 1 - 1/rho)`.
    pub fn min_stationary_p(&self) -> f64 {
        if self.rho < 1.0 {
            0.0
        } else {
            1.0 - 1.0 / self.rho
        }
    }
}

pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let rho = params.rho();
    Ok(DerivedParams {
        rho,
        n_e: params.naor_threshold(),
        p_zero_stable: rho < 1.0,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ModelError::InvalidParams(format!(
            "inspection probability must lie in [0, 1], got {p}"
        )))
    }
}

/// Closed-form sums of the chain at a fixed inspection probability.
///
/// Every weight is stored divided by `sigma`; `ln_sigma` records the scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Chain {
    pub rho: f64,
    pub n_e: u64,
    pub eta: f64,
    /// `ln(rho)`, or exactly 0 when the `rho = 1` limit is in force.
    ln_rho: f64,
    ln_sigma: f64,
    /// `sum_{i < n_e} rho^i / sigma`.
    head_mass: f64,
    /// `sum_{i < n_e} (i + 1) rho^i / sigma`.
    head_moment: f64,
    /// `rho^n_e / sigma`.
    threshold_weight: f64,
    /// `pi_0 * sigma`.
    pi0_scaled: f64,
}

impl Chain {
    pub fn new(params: &SystemParams, p: f64) -> Result<Self> {
        params.validate()?;
        check_probability(p)?;
        let rho = params.rho();
        let load = (1.0 - p) * rho;
        if load >= 1.0 {
            return Err(ModelError::UnstableRegime { p, rho, load });
        }
        let eta = 1.0 - load;
        let n_e = params.naor_threshold();
        let n = n_e as f64;

        let (ln_rho, ln_sigma, head_mass, head_moment, threshold_weight);
        if (rho - 1.0).abs() < RHO_ONE_TOLERANCE {
            ln_rho = 0.0;
            ln_sigma = 0.0;
            head_mass = n;
            head_moment = n * (n + 1.0) / 2.0;
            threshold_weight = 1.0;
        } else {
            let d = 1.0 - rho;
            ln_rho = (-d).ln_1p();
            let n_ln = n * ln_rho;
            if rho < 1.0 {
                // sigma = 1
                let pow = n_ln.exp();
                let one_minus_pow = -n_ln.exp_m1();
                ln_sigma = 0.0;
                head_mass = one_minus_pow / d;
                head_moment = (one_minus_pow - n * d * pow) / (d * d);
                threshold_weight = pow;
            } else {
                // sigma = rho^n_e
                let inv_minus_one = (-n_ln).exp_m1();
                ln_sigma = n_ln;
                head_mass = -inv_minus_one / (rho - 1.0);
                head_moment = (inv_minus_one - n * d) / (d * d);
                threshold_weight = 1.0;
            }
        }
        let pi0_scaled = 1.0 / (head_mass + threshold_weight / eta);
        Ok(Self {
            rho,
            n_e,
            eta,
            ln_rho,
            ln_sigma,
            head_mass,
            head_moment,
            threshold_weight,
            pi0_scaled,
        })
    }

    pub fn pi0(&self) -> f64 {
        self.pi0_scaled * (-self.ln_sigma).exp()
    }

    /// Ratio of consecutive probabilities above the threshold, `(1 - p) * rho`.
    fn tail_ratio(&self) -> f64 {
        1.0 - self.eta
    }

    pub fn prob(&self, i: u64) -> f64 {
        if i < self.n_e {
            self.pi0_scaled * (i as f64 * self.ln_rho - self.ln_sigma).exp()
        } else {
            let k = i - self.n_e;
            let ratio = self.tail_ratio();
            let decay = if k == 0 {
                1.0
            } else if ratio == 0.0 {
                0.0
            } else {
                (k as f64 * ratio.ln()).exp()
            };
            self.pi0_scaled * self.threshold_weight * decay
        }
    }

    /// Probability mass of all states strictly above `last`.
    pub fn mass_above(&self, last: u64) -> f64 {
        let first = last + 1;
        let tail_from_threshold = self.pi0_scaled * self.threshold_weight / self.eta;
        if first >= self.n_e {
            let k = first - self.n_e;
            let ratio = self.tail_ratio();
            let decay = if k == 0 {
                1.0
            } else if ratio == 0.0 {
                0.0
            } else {
                (k as f64 * ratio.ln()).exp()
            };
            return tail_from_threshold * decay;
        }
        // head states first..n_e-1, then the whole geometric tail
        let head = if self.ln_rho == 0.0 {
            (self.n_e - first) as f64 * (-self.ln_sigma).exp()
        } else {
            let a = (first as f64 * self.ln_rho - self.ln_sigma).exp();
            (a - self.threshold_weight) / (1.0 - self.rho)
        };
        self.pi0_scaled * head + tail_from_threshold
    }

    /// `sum_{i < n_e} pi_i (R - C_W (i + 1) / mu) - C_I`.
    pub fn utility_inspect(&self, params: &SystemParams) -> f64 {
        self.pi0_scaled
            * (params.reward * self.head_mass - params.cost_per_slot() * self.head_moment)
            - params.inspect_cost
    }

    /// `sum_i pi_i (R - C_W (i + 1) / mu)`.
    pub fn utility_no_inspect(&self, params: &SystemParams) -> f64 {
        let n = self.n_e as f64;
        let tail_moment = self.threshold_weight * (n * self.eta + 1.0) / (self.eta * self.eta);
        params.reward - params.cost_per_slot() * self.pi0_scaled * (self.head_moment + tail_moment)
    }

    /// Expected loss a blind joiner suffers from the states an inspector
    /// would have refused: `sum_{i >= n_e} pi_i (C_W (i + 1) / mu - R)`.
    pub fn tail_loss(&self, params: &SystemParams) -> f64 {
        let n = self.n_e as f64;
        let eta = self.eta;
        self.pi0_scaled
            * self.threshold_weight
            * (params.cost_per_slot() * (1.0 + n * eta) / (eta * eta) - params.reward / eta)
    }
}

/// Stationary distribution at a fixed inspection probability.
///
/// `probabilities` holds `pi_0 .. pi_N`; `tail_mass` is the closed-form mass
/// of every state above `N`. Any state can be evaluated with [`prob`].
///
/// [`prob`]: StationaryDistribution::prob
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi0: f64,
    pub probabilities: Vec<f64>,
    pub tail_mass: f64,
    chain: Chain,
}

impl StationaryDistribution {
    pub fn prob(&self, i: u64) -> f64 {
        self.chain.prob(i)
    }

    pub fn n_e(&self) -> u64 {
        self.chain.n_e
    }

    pub fn eta(&self) -> f64 {
        self.chain.eta
    }

    /// Mass of all states above `last`, in closed form.
    pub fn mass_above(&self, last: u64) -> f64 {
        self.chain.mass_above(last)
    }

    /// Sum of the materialized vector plus the analytic tail.
    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum::<f64>() + self.tail_mass
    }

    /// Mean occupancy `sum_i i * pi_i`.
    pub fn mean_occupancy(&self) -> f64 {
        // sum (i + 1) pi_i - 1, using the same closed forms as the utilities
        let c = &self.chain;
        let n = c.n_e as f64;
        let tail_moment = c.threshold_weight * (n * c.eta + 1.0) / (c.eta * c.eta);
        c.pi0_scaled * (c.head_moment + tail_moment) - 1.0
    }
}

/// `pi_0` in closed form.
pub fn pi0(params: &SystemParams, p: f64) -> Result<f64> {
    Ok(Chain::new(params, p)?.pi0())
}

/// Materializes `pi_0 .. pi_N` for the smallest `N` whose closed-form tail
/// mass falls below `tail_eps`.
pub fn stationary_distribution(
    params: &SystemParams,
    p: f64,
    tail_eps: f64,
) -> Result<StationaryDistribution> {
    if !(tail_eps.is_finite() && tail_eps > 0.0) {
        return Err(ModelError::InvalidParams(format!(
            "tail_eps must be > 0, got {tail_eps}"
        )));
    }
    let chain = Chain::new(params, p)?;
    let mut probabilities = Vec::new();
    let mut i: u64 = 0;
    let tail_mass = loop {
        probabilities.push(chain.prob(i));
        let above = chain.mass_above(i);
        if above < tail_eps {
            break above;
        }
        if probabilities.len() >= MAX_MATERIALIZED_STATES {
            return Err(ModelError::DomainError(format!(
                "more than {MAX_MATERIALIZED_STATES} states needed to reach tail mass {tail_eps}"
            )));
        }
        i += 1;
    };
    Ok(StationaryDistribution {
        pi0: chain.pi0(),
        probabilities,
        tail_mass,
        chain,
    })
}

/// Expected utility of a customer who pays to inspect (may be negative).
pub fn utility_inspect(params: &SystemParams, p: f64) -> Result<f64> {
    Ok(Chain::new(params, p)?.utility_inspect(params))
}

/// Expected utility of a customer who joins without inspecting.
pub fn utility_no_inspect(params: &SystemParams, p: f64) -> Result<f64> {
    Ok(Chain::new(params, p)?.utility_no_inspect(params))
}

/// `U_I(p) - U_NI(p)`, evaluated through the tail identity
/// `U_NI = U_I + C_I - tail_loss` to avoid cancelling two large utilities.
pub fn inspection_advantage(params: &SystemParams, p: f64) -> Result<f64> {
    Ok(Chain::new(params, p)?.tail_loss(params) - params.inspect_cost)
}

/// Changes `(U_I(to) - U_I(from), U_NI(to) - U_NI(from))` in the inspection
/// probability.
///
/// Evaluated without subtracting the utilities themselves: when `rho^n_e` is
/// far below machine epsilon both utilities are flat to double precision, yet
/// the increments are still resolvable.
pub fn utility_increments(params: &SystemParams, from: f64, to: f64) -> Result<(f64, f64)> {
    let (a, b) = (Chain::new(params, from)?, Chain::new(params, to)?);
    if from == to {
        return Ok((0.0, 0.0));
    }
    let n = a.n_e as f64;
    let w = a.threshold_weight;
    let (s0, s1) = (a.head_mass, a.head_moment);
    let (d_from, d_to) = (1.0 / a.pi0_scaled, 1.0 / b.pi0_scaled);
    // 1/eta_from - 1/eta_to
    let inv_gap = a.rho * (to - from) / (a.eta * b.eta);
    let (u_from, u_to) = (1.0 / a.eta, 1.0 / b.eta);
    let scale = w * inv_gap / (d_from * d_to);
    let c = params.cost_per_slot();

    let d_inspect = (params.reward * s0 - c * s1) * scale;
    let d_blind = c * scale * (s0 * (n + u_from + u_to) + w * u_from * u_to - s1);
    Ok((d_inspect, d_blind))
}
