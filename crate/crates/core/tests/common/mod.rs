#![allow(dead_code)]

use infoq::SystemParams;
use proptest::prelude::*;

/// Stable markets with `rho` in [0.05, 0.98] and `n_e` in [1, 60], kept away
/// from integer `R * mu / C_W`.
pub fn stable_params() -> impl Strategy<Value = SystemParams> {
    (
        0.05f64..0.98,
        0.5f64..5.0,
        1u64..=60,
        0.01f64..0.99,
        0.1f64..5.0,
    )
        .prop_map(|(rho, mu, n, frac, cw)| {
            SystemParams::new(rho * mu, mu, (n as f64 + frac) * cw / mu, cw)
        })
}

/// Birth-death weights summed term by term, normalized. Independent of the
/// closed forms; only meant for loads comfortably below one.
pub fn series_distribution(params: &SystemParams, p: f64) -> Vec<f64> {
    let rho = params.lambda / params.mu;
    let n_e = (params.reward * params.mu / params.wait_cost).floor() as usize;
    let mut weights = vec![1.0f64];
    let mut total = 1.0;
    let mut i = 0;
    loop {
        let birth = if i < n_e { rho } else { (1.0 - p) * rho };
        let next = weights[i] * birth;
        if next == 0.0 || (i >= n_e && next < 1e-20 * total) {
            break;
        }
        weights.push(next);
        total += next;
        i += 1;
    }
    weights.iter().map(|w| w / total).collect()
}

/// Expected utilities summed state by state from a distribution.
pub fn series_utilities(params: &SystemParams, pi: &[f64]) -> (f64, f64) {
    let n_e = (params.reward * params.mu / params.wait_cost).floor() as usize;
    let value = |i: usize| params.reward - params.wait_cost * (i as f64 + 1.0) / params.mu;
    let inspect: f64 = pi
        .iter()
        .take(n_e)
        .enumerate()
        .map(|(i, x)| x * value(i))
        .sum();
    let blind: f64 = pi.iter().enumerate().map(|(i, x)| x * value(i)).sum();
    (inspect - params.inspect_cost, blind)
}
