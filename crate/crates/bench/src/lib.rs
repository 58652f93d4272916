//! Market fixtures shared by the benchmarks.

use infoq::SystemParams;

/// Market with λ = 1, μ = 1.5, R = 20 and the given waiting cost.
pub fn reference_market(wait_cost: f64) -> SystemParams {
    SystemParams::new(1.0, 1.5, 20.0, wait_cost)
}

/// Reference market with an inspection fee in the interior-equilibrium range.
pub fn interior_market() -> SystemParams {
    reference_market(1.0).with_inspect_cost(2e-4)
}
