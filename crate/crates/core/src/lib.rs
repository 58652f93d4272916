//! Customer equilibria and revenue-optimal pricing for an unobservable M/M/1
//! queue in which arriving customers may pay to see the queue length.
//!
//! - [`model`]: parameters, stationary distribution and expected utilities
//! - [`equilibrium`]: the symmetric inspection equilibrium (closed form and bisection)
//! - [`pricing`]: optimal access fee and information fee
//! - [`policy`]: which mechanism wins as the waiting cost varies
//! - [`sim`]: seeded discrete-event simulator used as an independent oracle

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod model;
pub mod policy;
pub mod pricing;
pub mod search;
pub mod sim;

pub use equilibrium::{
    equilibrium_bisect, equilibrium_closed_form, quadratic_coeffs, solve_equilibrium,
    EquilibriumBranch, EquilibriumResult, QuadraticCoeffs,
};
pub use error::{ModelError, Result};
pub use model::{
    derive, inspection_advantage, pi0, stationary_distribution, utility_increments,
    utility_inspect, utility_no_inspect, DerivedParams, StationaryDistribution, SystemParams,
};
pub use policy::{compare_policies, find_thresholds, PolicyReport, PolicyRow, Winner};
pub use pricing::access::{
    join_equilibrium, optimal_access_fee, revenue_access, JoinEquilibrium, JoinRegime,
};
pub use pricing::info::{
    optimize_info_fee_heuristic, optimize_info_fee_refine, revenue_info, HeuristicTrace,
    InfoEvaluation, StopReason,
};
pub use pricing::{FeeCandidate, PricingResult};
pub use sim::{
    simulate, validate_against_analytic, Estimate, SimConfig, SimStats, ValidationReport,
};
