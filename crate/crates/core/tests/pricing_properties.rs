mod common;

use infoq::pricing::info::{default_step, info_choke_price};
use infoq::search::grid_max;
use infoq::{
    join_equilibrium, optimal_access_fee, optimize_info_fee_heuristic, optimize_info_fee_refine,
    revenue_access, revenue_info, ModelError, SystemParams,
};
use proptest::prelude::*;

fn market() -> impl Strategy<Value = SystemParams> {
    (0.05f64..0.95, 0.5f64..5.0, 0.5f64..50.0, 0.05f64..5.0)
        .prop_map(|(rho, mu, reward, cw)| SystemParams::new(rho * mu, mu, reward, cw))
}

fn fig(wait_cost: f64) -> SystemParams {
    SystemParams::new(2.2, 2.8, 10.0, wait_cost)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn access_optimum_beats_fine_grid(params in market()) {
        let best = optimal_access_fee(&params).unwrap();
        let grid = grid_max(
            |f| revenue_access(&params, f),
            0.0,
            params.reward,
            100_001,
        )
        .unwrap();
        prop_assert!(best.optimal_revenue >= grid.value - 1e-9 * grid.value.max(1.0),
            "{} < {}", best.optimal_revenue, grid.value);
        prop_assert!(best.optimal_revenue - grid.value <= 1e-3 * params.lambda * params.reward);
    }

    #[test]
    fn joining_falls_and_revenue_is_concave(params in market()) {
        let top = params.reward - params.wait_cost / params.mu;
        prop_assume!(top > 0.0);
        let fees: Vec<f64> = (0..=200).map(|k| top * k as f64 / 200.0).collect();
        let q: Vec<f64> = fees
            .iter()
            .map(|&f| join_equilibrium(&params, f).unwrap().q_star)
            .collect();
        prop_assert!(q.windows(2).all(|w| w[1] <= w[0]));
        let r: Vec<f64> = fees
            .iter()
            .map(|&f| revenue_access(&params, f).unwrap())
            .collect();
        let tol = 1e-9 * params.lambda * params.reward;
        for w in r.windows(3) {
            prop_assert!(w[1] >= 0.5 * (w[0] + w[2]) - tol);
        }
    }
}

#[test]
fn access_rejects_overload() {
    let params = SystemParams::new(3.0, 2.8, 10.0, 1.0);
    assert!(matches!(
        optimal_access_fee(&params),
        Err(ModelError::DomainError(_))
    ));
}

#[test]
fn access_revenue_decreases_in_wait_cost() {
    let mu_r = 28.0;
    let revenues: Vec<f64> = (1..=100)
        .map(|k| {
            optimal_access_fee(&fig(mu_r * k as f64 / 101.0))
                .unwrap()
                .optimal_revenue
        })
        .collect();
    assert!(revenues.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn info_revenue_vanishes_for_patient_customers() {
    assert!(
        optimize_info_fee_refine(&fig(1e-4), 1e-9)
            .unwrap()
            .optimal_revenue
            < 1e-3
    );
}

#[test]
fn info_revenue_rises_while_threshold_is_fixed() {
    // R_I* jumps down wherever n_e drops (C_W = 14 and 28 here); between
    // those points it increases
    let mut runs: Vec<(u64, Vec<f64>)> = Vec::new();
    for k in 10..=100 {
        let params = fig(0.5 * k as f64);
        let r = optimize_info_fee_refine(&params, 1e-9)
            .unwrap()
            .optimal_revenue;
        match runs.last_mut() {
            Some((n, v)) if *n == params.naor_threshold() => v.push(r),
            _ => runs.push((params.naor_threshold(), vec![r])),
        }
    }
    assert_eq!(
        runs.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        vec![5, 4, 3, 2, 1, 0]
    );
    for (n, v) in &runs {
        assert!(v.windows(2).all(|w| w[1] > w[0]), "n_e = {n}: {v:?}");
    }
    let at = |cw: f64| {
        optimize_info_fee_refine(&fig(cw), 1e-9)
            .unwrap()
            .optimal_revenue
    };
    assert!(at(14.1) < at(14.0));
}

#[test]
fn refined_info_optimum_matches_million_point_grid() {
    for cw in [5.0, 20.0] {
        let params = fig(cw);
        let refined = optimize_info_fee_refine(&params, 1e-9).unwrap();
        let upper = info_choke_price(&params).unwrap().unwrap();
        let grid = grid_max(|c| revenue_info(&params, c), 0.0, upper, 1_000_001).unwrap();
        assert!(refined.optimal_revenue >= grid.value - 1e-12, "C_W = {cw}");
        assert!(
            (refined.optimal_fee - grid.x).abs() < 1e-5,
            "C_W = {cw}: {} vs {}",
            refined.optimal_fee,
            grid.x
        );
    }
}

#[test]
fn heuristic_gap_shrinks_with_step() {
    // a market where every tested step lands below the choke price
    let params = fig(20.0);
    let upper = info_choke_price(&params).unwrap().unwrap();
    let best = grid_max(|c| revenue_info(&params, c), 0.0, upper, 1_000_001)
        .unwrap()
        .value;
    let gaps: Vec<f64> = [1.0, 0.5, 0.1, 0.01]
        .iter()
        .map(|&s| {
            best - optimize_info_fee_heuristic(&params, s, params.reward)
                .unwrap()
                .best_revenue
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps.iter().all(|&g| g >= -1e-12));
}

#[test]
fn heuristic_lands_within_one_step_of_grid_argmax() {
    let params = fig(20.0);
    let upper = info_choke_price(&params).unwrap().unwrap();
    let grid = grid_max(|c| revenue_info(&params, c), 0.0, upper, 100_001).unwrap();
    for step in [0.5, 0.1, default_step(&params)] {
        let t = optimize_info_fee_heuristic(&params, step, params.reward).unwrap();
        assert!(
            (t.best_fee - grid.x).abs() <= step,
            "step {step}: {} vs {}",
            t.best_fee,
            grid.x
        );
    }
}
