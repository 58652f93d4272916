//! Which mechanism earns more, access fees or information fees, as the
//! waiting cost varies.

use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::model::SystemParams;
use crate::pricing::access::optimal_access_fee;
use crate::pricing::info::optimize_info_fee_refine;

/// Revenues closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Width to which each threshold is bisected.
pub const THRESHOLD_TOLERANCE: f64 = 1e-4;

/// Fee tolerance used for the information optimum inside comparisons.
pub const INFO_FEE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Access,
    Info,
    Tie,
}

impl Winner {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Access => "access",
            Self::Info => "info",
            Self::Tie => "tie",
        }
    }

    /// Side of the comparison for threshold detection; ties count as access.
    fn prefers_access(&self) -> bool {
        !matches!(self, Self::Info)
    }
}

impl std::fmt::Display for Winner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyRow {
    pub wait_cost: f64,
    pub access_revenue: f64,
    pub info_revenue: f64,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyReport {
    /// One row per grid point, ordered by waiting cost.
    pub rows: Vec<PolicyRow>,
    /// Waiting costs at which the better mechanism switches.
    pub thresholds: Vec<f64>,
    /// More than two switches were found; the grid may be too coarse or the
    /// revenue curves unusually shaped.
    pub excess_crossings: bool,
}

pub fn compare_policies(params: &SystemParams) -> Result<PolicyRow> {
    let access = optimal_access_fee(params)?;
    let info = optimize_info_fee_refine(params, INFO_FEE_TOLERANCE)?;
    let (ra, ri) = (access.optimal_revenue, info.optimal_revenue);
    let winner = if (ra - ri).abs() <= TIE_TOLERANCE {
        Winner::Tie
    } else if ra > ri {
        Winner::Access
    } else {
        Winner::Info
    };
    Ok(PolicyRow {
        wait_cost: params.wait_cost,
        access_revenue: ra,
        info_revenue: ri,
        winner,
    })
}

/// Sweeps `grid_n` evenly spaced waiting costs over `[cw_lo, cw_hi]` and
/// bisects every switch of the winning mechanism to [`THRESHOLD_TOLERANCE`].
pub fn find_thresholds(
    params: &SystemParams,
    cw_lo: f64,
    cw_hi: f64,
    grid_n: usize,
) -> Result<PolicyReport> {
    if !(cw_lo > 0.0 && cw_lo < cw_hi && cw_hi.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "need 0 < cw_lo < cw_hi, got [{cw_lo}, {cw_hi}]"
        )));
    }
    if grid_n < 16 {
        return Err(ModelError::InvalidParams(format!(
            "grid_n must be >= 16, got {grid_n}"
        )));
    }
    let at = |cw: f64| compare_policies(&params.with_wait_cost(cw));
    let last = (grid_n - 1) as f64;
    let rows: Vec<PolicyRow> = (0..grid_n)
        .into_par_iter()
        .map(|k| {
            let cw = if k + 1 == grid_n {
                cw_hi
            } else {
                cw_lo + (cw_hi - cw_lo) * (k as f64 / last)
            };
            at(cw)
        })
        .collect::<Result<_>>()?;

    let mut thresholds = Vec::new();
    for pair in rows.windows(2) {
        let (left, right) = (pair[0], pair[1]);
        let side = left.winner.prefers_access();
        if side == right.winner.prefers_access() {
            continue;
        }
        let (mut lo, mut hi) = (left.wait_cost, right.wait_cost);
        while hi - lo > THRESHOLD_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if at(mid)?.winner.prefers_access() == side {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        thresholds.push(0.5 * (lo + hi));
    }
    let excess_crossings = thresholds.len() > 2;
    Ok(PolicyReport {
        rows,
        thresholds,
        excess_crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig(wait_cost: f64) -> SystemParams {
        SystemParams::new(2.2, 2.8, 10.0, wait_cost)
    }

    #[test]
    fn patient_customers_favor_access() {
        let row = compare_policies(&fig(1e-4)).unwrap();
        assert_eq!(row.winner, Winner::Access);
        assert!(row.info_revenue < 1e-3);
        assert!((row.access_revenue - 22.0).abs() < 1e-2);
    }

    #[test]
    fn impatient_customers_favor_info() {
        for cw in [20.0, 30.0, 50.0] {
            assert_eq!(
                compare_policies(&fig(cw)).unwrap().winner,
                Winner::Info,
                "C_W = {cw}"
            );
        }
    }

    #[test]
    fn negligible_money_scale_is_a_tie() {
        let p = SystemParams::new(2.2, 2.8, 1e-12, 1e-12);
        let row = compare_policies(&p).unwrap();
        assert_eq!(row.winner, Winner::Tie);
    }

    #[test]
    fn single_threshold_on_wide_range() {
        let report = find_thresholds(&fig(1.0), 0.1, 30.0, 60).unwrap();
        assert_eq!(report.thresholds.len(), 1, "{:?}", report.thresholds);
        assert!(!report.excess_crossings);
        let th = report.thresholds[0];
        assert!(th > 10.0 && th < 16.0, "{th}");
        // access prefix, info suffix
        let first_info = report
            .rows
            .iter()
            .position(|r| r.winner == Winner::Info)
            .unwrap();
        assert!(report.rows[..first_info]
            .iter()
            .all(|r| r.winner == Winner::Access));
        assert!(report.rows[first_info..]
            .iter()
            .all(|r| r.winner == Winner::Info));
        assert!(report
            .rows
            .windows(2)
            .all(|w| w[0].wait_cost < w[1].wait_cost));
    }

    #[test]
    fn no_threshold_below_crossing() {
        let report = find_thresholds(&fig(1.0), 0.1, 5.0, 32).unwrap();
        assert!(report.thresholds.is_empty());
        assert!(report.rows.iter().all(|r| r.winner == Winner::Access));
    }

    #[test]
    fn rejects_bad_sweeps() {
        assert!(find_thresholds(&fig(1.0), 0.0, 5.0, 32).is_err());
        assert!(find_thresholds(&fig(1.0), 5.0, 1.0, 32).is_err());
        assert!(find_thresholds(&fig(1.0), 0.1, 5.0, 8).is_err());
    }
}
