//! Discrete-event simulation of the queue with probabilistic inspection.
//!
//! Each arrival inspects with probability `p`. Inspectors join iff fewer than
//! `n_e` customers are present; everybody else joins. Service is FIFO and
//! exponential. The simulator is an independent check on the closed forms in
//! [`crate::model`]: it never evaluates them.
//!
//! Randomness comes from ChaCha8 (a counter-based stream) and exponential
//! variates are drawn by inverse CDF, so a seed reproduces a run bit for bit on
//! every platform.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModelError, Result};
use crate::model::{stationary_distribution, utility_inspect, utility_no_inspect, SystemParams};

pub const DEFAULT_STATE_CAP: u64 = 1_000_000;
pub const DEFAULT_BATCHES: usize = 32;

/// Tail mass left out of the analytic distribution in validation.
const ANALYTIC_TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    /// Inspection probability.
    pub p: f64,
    /// Arrival plus departure events to simulate, warmup included.
    pub horizon_events: u64,
    /// Leading events excluded from every statistic.
    pub warmup_events: u64,
    pub seed: u64,
    /// Occupancy at which a run with non-negative drift is declared divergent.
    pub state_cap: u64,
    /// Batches used for batch-means standard errors.
    pub batches: usize,
}

impl SimConfig {
    /// Warmup of 10% of the horizon, default cap and batch count.
    pub fn new(params: SystemParams, p: f64, horizon_events: u64, seed: u64) -> Self {
        Self {
            params,
            p,
            horizon_events,
            warmup_events: horizon_events / 10,
            seed,
            state_cap: DEFAULT_STATE_CAP,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ModelError::InvalidParams(format!(
                "inspection probability must lie in [0, 1], got {}",
                self.p
            )));
        }
        if self.horizon_events <= self.warmup_events {
            return Err(ModelError::InvalidParams(format!(
                "horizon_events ({}) must exceed warmup_events ({})",
                self.horizon_events, self.warmup_events
            )));
        }
        if self.batches < 2 {
            return Err(ModelError::InvalidParams(
                "need at least two batches".into(),
            ));
        }
        Ok(())
    }

    fn load(&self) -> f64 {
        (1.0 - self.p) * self.params.rho()
    }
}

/// Sample mean with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }
}

/// Per-batch accumulators; the batch-means estimator absorbs the serial
/// correlation between consecutive customers.
#[derive(Debug, Clone)]
struct Batched {
    batches: Vec<Moments>,
}

impl Batched {
    fn new(n: usize) -> Self {
        Self {
            batches: vec![Moments::default(); n],
        }
    }

    fn push(&mut self, batch: usize, x: f64) {
        self.batches[batch].push(x);
    }

    fn estimate(&self) -> Estimate {
        let total = self
            .batches
            .iter()
            .fold(Moments::default(), |acc, m| Moments {
                count: acc.count + m.count,
                sum: acc.sum + m.sum,
                sum_sq: acc.sum_sq + m.sum_sq,
            });
        if total.count == 0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                samples: 0,
            };
        }
        let n = total.count as f64;
        let mean = total.sum / n;
        let means: Vec<f64> = self
            .batches
            .iter()
            .filter(|m| m.count > 0)
            .map(|m| m.sum / m.count as f64)
            .collect();
        let std_error = if means.len() >= self.batches.len() / 2 && means.len() >= 2 {
            let k = means.len() as f64;
            let centre = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|m| (m - centre).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else if total.count > 1 {
            let var = ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean,
            std_error,
            samples: total.count,
        }
    }
}

/// Same as [`Batched`] but for time-weighted averages.
#[derive(Debug, Clone)]
struct TimeBatched {
    weighted: Vec<f64>,
    time: Vec<f64>,
}

impl TimeBatched {
    fn new(n: usize) -> Self {
        Self {
            weighted: vec![0.0; n],
            time: vec![0.0; n],
        }
    }

    fn push(&mut self, batch: usize, value: f64, dt: f64) {
        self.weighted[batch] += value * dt;
        self.time[batch] += dt;
    }

    fn estimate(&self) -> Estimate {
        let total_time: f64 = self.time.iter().sum();
        let mean = self.weighted.iter().sum::<f64>() / total_time;
        let means: Vec<f64> = self
            .weighted
            .iter()
            .zip(&self.time)
            .filter(|(_, &t)| t > 0.0)
            .map(|(w, t)| w / t)
            .collect();
        let k = means.len() as f64;
        let std_error = if means.len() >= 2 {
            let centre = means.iter().sum::<f64>() / k;
            (means.iter().map(|m| (m - centre).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean,
            std_error,
            samples: means.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Time-weighted fraction of the observed period spent in each state.
    pub empirical_pi: Vec<f64>,
    /// Fraction of observed arrivals that found each state.
    pub arrival_pi: Vec<f64>,
    /// Time-weighted fraction of the period with an empty system.
    pub pi0: Estimate,
    /// Fraction of arrivals that found the system empty.
    pub arrival_pi0: Estimate,
    /// Time-average occupancy.
    pub mean_occupancy: Estimate,
    /// Average realized net benefit of inspectors (joined or balked).
    pub u_inspect_hat: Estimate,
    /// Average realized net benefit of blind joiners.
    pub u_no_inspect_hat: Estimate,
    /// Joined arrivals over all observed arrivals.
    pub joined_fraction: f64,
    /// Among completed inspectors, the fraction that joined.
    pub inspector_join_fraction: f64,
    /// Mean of `R - C_W * sojourn` over inspectors that joined and finished.
    pub inspector_joined_value: f64,
    pub max_state_seen: u64,
    pub observed_time: f64,
    pub observed_arrivals: u64,
    /// `(1 - p) * rho >= 1`: the chain has no stationary law.
    pub divergent: bool,
}

struct Customer {
    arrival: f64,
    inspector: bool,
    batch: Option<usize>,
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

pub fn simulate(config: &SimConfig) -> Result<SimStats> {
    config.validate()?;
    let params = config.params;
    let n_e = params.naor_threshold();
    let load = config.load();
    let divergent = load >= 1.0;
    let measured = config.horizon_events - config.warmup_events;
    let batch_len = measured.div_ceil(config.batches as u64);
    let batch_of = |event: u64| -> Option<usize> {
        (event >= config.warmup_events).then(|| {
            (((event - config.warmup_events) / batch_len) as usize).min(config.batches - 1)
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut queue: VecDeque<Customer> = VecDeque::new();
    let mut t = 0.0;
    let mut next_arrival = exponential(&mut rng, params.lambda);
    let mut next_departure = f64::INFINITY;

    let mut occupancy_time: Vec<f64> = Vec::new();
    let mut arrival_counts: Vec<u64> = Vec::new();
    let mut empty_time = TimeBatched::new(config.batches);
    let mut level_time = TimeBatched::new(config.batches);
    let mut arrival_empty = Batched::new(config.batches);
    let mut u_inspect = Batched::new(config.batches);
    let mut u_blind = Batched::new(config.batches);
    let mut joined_value = Moments::default();
    let mut inspectors_done: u64 = 0;
    let mut observed_arrivals: u64 = 0;
    let mut joined_arrivals: u64 = 0;
    let mut max_state: u64 = 0;

    for event in 0..config.horizon_events {
        let state = queue.len() as u64;
        let next = next_arrival.min(next_departure);
        if let Some(b) = batch_of(event) {
            let dt = next - t;
            let i = state as usize;
            if occupancy_time.len() <= i {
                occupancy_time.resize(i + 1, 0.0);
            }
            occupancy_time[i] += dt;
            empty_time.push(b, if state == 0 { 1.0 } else { 0.0 }, dt);
            level_time.push(b, state as f64, dt);
        }
        t = next;
        let batch = batch_of(event);

        if next_arrival <= next_departure {
            next_arrival = t + exponential(&mut rng, params.lambda);
            let inspector = rng.gen::<f64>() < config.p;
            let joins = !inspector || state < n_e;
            if let Some(b) = batch {
                observed_arrivals += 1;
                let i = state as usize;
                if arrival_counts.len() <= i {
                    arrival_counts.resize(i + 1, 0);
                }
                arrival_counts[i] += 1;
                arrival_empty.push(b, if state == 0 { 1.0 } else { 0.0 });
                if joins {
                    joined_arrivals += 1;
                }
                if inspector && !joins {
                    u_inspect.push(b, -params.inspect_cost);
                    inspectors_done += 1;
                }
            }
            if joins {
                if queue.is_empty() {
                    next_departure = t + exponential(&mut rng, params.mu);
                }
                queue.push_back(Customer {
                    arrival: t,
                    inspector,
                    batch,
                });
                let n = queue.len() as u64;
                max_state = max_state.max(n);
                if divergent && n > config.state_cap {
                    return Err(ModelError::DivergenceDetected {
                        state: n,
                        cap: config.state_cap,
                        load,
                    });
                }
            }
        } else {
            let done = queue.pop_front().expect("departure from empty system");
            next_departure = if queue.is_empty() {
                f64::INFINITY
            } else {
                t + exponential(&mut rng, params.mu)
            };
            if let Some(b) = done.batch {
                let value = params.reward - params.wait_cost * (t - done.arrival);
                if done.inspector {
                    u_inspect.push(b, value - params.inspect_cost);
                    joined_value.push(value);
                    inspectors_done += 1;
                } else {
                    u_blind.push(b, value);
                }
            }
        }
    }

    let observed_time: f64 = occupancy_time.iter().sum();
    let empirical_pi = occupancy_time.iter().map(|x| x / observed_time).collect();
    let arrival_pi = arrival_counts
        .iter()
        .map(|&c| c as f64 / observed_arrivals.max(1) as f64)
        .collect();
    let ratio = |num: f64, den: u64| if den == 0 { f64::NAN } else { num / den as f64 };
    Ok(SimStats {
        empirical_pi,
        arrival_pi,
        pi0: empty_time.estimate(),
        arrival_pi0: arrival_empty.estimate(),
        mean_occupancy: level_time.estimate(),
        u_inspect_hat: u_inspect.estimate(),
        u_no_inspect_hat: u_blind.estimate(),
        joined_fraction: ratio(joined_arrivals as f64, observed_arrivals),
        inspector_join_fraction: ratio(joined_value.count as f64, inspectors_done),
        inspector_joined_value: ratio(joined_value.sum, joined_value.count),
        max_state_seen: max_state,
        observed_time,
        observed_arrivals,
        divergent,
    })
}

/// Half the L1 distance between two distributions on the non-negative
/// integers; missing entries count as zero.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    0.5 * (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Simulated against closed-form value of one utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityCheck {
    pub analytic: f64,
    pub estimate: Estimate,
    /// `(estimate - analytic) / std_error`.
    pub z_score: f64,
}

impl UtilityCheck {
    fn new(analytic: f64, estimate: Estimate) -> Self {
        let diff = estimate.mean - analytic;
        let z_score = if diff == 0.0 {
            0.0
        } else {
            diff / estimate.std_error
        };
        Self {
            analytic,
            estimate,
            z_score,
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score.abs() <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tv_distance: f64,
    pub tol_tv: f64,
    pub u_inspect: UtilityCheck,
    pub u_no_inspect: UtilityCheck,
    pub stats: SimStats,
    pub pass: bool,
}

/// Standard errors allowed between simulated and closed-form utilities.
pub const UTILITY_SIGMAS: f64 = 3.0;

/// Runs the simulator and scores it against the closed forms: total
/// variation between the distributions and z-scores of both utilities.
pub fn validate_against_analytic(config: &SimConfig, tol_tv: f64) -> Result<ValidationReport> {
    config.validate()?;
    let analytic = stationary_distribution(&config.params, config.p, ANALYTIC_TAIL_EPS)?;
    let stats = simulate(config)?;

    let n = stats.empirical_pi.len().max(analytic.probabilities.len());
    let mut l1 = 0.0;
    for i in 0..n {
        let e = stats.empirical_pi.get(i).copied().unwrap_or(0.0);
        l1 += (e - analytic.prob(i as u64)).abs();
    }
    l1 += analytic.mass_above(n as u64 - 1);
    let tv_distance = 0.5 * l1;

    let u_inspect = UtilityCheck::new(
        utility_inspect(&config.params, config.p)?,
        stats.u_inspect_hat,
    );
    let u_no_inspect = UtilityCheck::new(
        utility_no_inspect(&config.params, config.p)?,
        stats.u_no_inspect_hat,
    );
    let pass = tv_distance < tol_tv
        && u_inspect.within(UTILITY_SIGMAS)
        && u_no_inspect.within(UTILITY_SIGMAS);
    Ok(ValidationReport {
        tv_distance,
        tol_tv,
        u_inspect,
        u_no_inspect,
        stats,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParams {
        SystemParams::new(0.9, 1.0, 5.0, 1.0)
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new(base(), 0.5, 1000, 1);
        assert!(c.validate().is_ok());
        c.warmup_events = 1000;
        assert!(c.validate().is_err());
        let c = SimConfig::new(base(), 1.5, 1000, 1);
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let c = SimConfig::new(base(), 0.5, 50_000, 7);
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let other = SimConfig { seed: 8, ..c };
        assert_ne!(simulate(&c).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn full_inspection_never_exceeds_threshold() {
        let c = SimConfig::new(base(), 1.0, 200_000, 3);
        let s = simulate(&c).unwrap();
        assert!(s.max_state_seen <= 5);
        assert!(s.empirical_pi.len() <= 6);
    }

    #[test]
    fn distribution_sums_to_one() {
        let s = simulate(&SimConfig::new(base(), 0.3, 100_000, 11)).unwrap();
        assert!((s.empirical_pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.u_inspect_hat.std_error > 0.0);
        assert!(s.u_no_inspect_hat.std_error > 0.0);
    }

    #[test]
    fn divergence_is_detected() {
        let params = SystemParams::new(2.0, 1.0, 5.0, 1.0);
        let c = SimConfig {
            state_cap: 200,
            ..SimConfig::new(params, 0.0, 100_000, 5)
        };
        assert!(matches!(
            simulate(&c),
            Err(ModelError::DivergenceDetected { .. })
        ));
    }

    #[test]
    fn total_variation_basics() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(total_variation(&[1.0], &[0.0, 1.0]), 1.0);
        assert!((total_variation(&[0.6, 0.4], &[0.4, 0.6]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validation_refuses_unstable_regime() {
        let params = SystemParams::new(1.2, 1.0, 5.0, 1.0);
        let c = SimConfig::new(params, 0.0, 1000, 1);
        assert!(matches!(
            validate_against_analytic(&c, 0.02),
            Err(ModelError::UnstableRegime { .. })
        ));
    }
}
