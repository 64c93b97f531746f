mod common;

use cbm_core::cost::{CostStructure, VariableCostKind};
use cbm_core::degradation::{hitting_cdf, GammaProcessSpec, LinearCombination};
use cbm_core::policy::{cv, cv_closed, q0, MaintenanceModel, PolicySpec, RepairFactor, RepairModel};
use cbm_core::simulate::*;
use cbm_core::special::{sample_gamma, RngStream};
use common::{worked_model, Lcg};

fn within(est: &SimEstimate, exact: f64, k: f64) -> bool {
    (est.mean - exact).abs() <= k * est.std_error
}

#[test]
fn zero_cost_scenario_is_exact() {
    let mut m = worked_model();
    m.costs = CostStructure {
        c_inspect: 0.0,
        fixed: vec![0.0; 3],
        variable_kind: VariableCostKind::Linear,
        variable_rate: vec![0.0; 3],
        c_threshold: 0.0,
        c_replace: 0.0,
        budget: None,
    };
    let e = estimate_q0(&m, &PolicySpec::new(3, 2.0).unwrap(), &SimPlan::new(200, 1)).unwrap();
    assert_eq!(e.mean, 0.0);
    assert_eq!(e.std_error, 0.0);
}

#[test]
fn worked_point_agrees_with_analytic() {
    let m = worked_model();
    let p = PolicySpec::new(3, 1.9474).unwrap();
    let plan = SimPlan::new(3000, 42);
    let eq = estimate_q0(&m, &p, &plan).unwrap();
    let ec = estimate_cv(&m, &p, &plan).unwrap();
    assert!(within(&eq, q0(&m, &p).unwrap(), 3.0), "{eq:?}");
    assert!(within(&ec, cv(&m, &p).unwrap(), 3.0), "{ec:?}");
    assert!((eq.mean / 332.6066 - 1.0).abs() < 0.1);
    assert!((ec.mean / 147.8725 - 1.0).abs() < 0.1);
}

#[test]
fn hybrid_has_lower_variance_than_event_driven() {
    let m = worked_model();
    let p = PolicySpec::new(3, 1.9474).unwrap();
    let hybrid = estimate_q0(&m, &p, &SimPlan::new(3000, 7)).unwrap();
    let event = estimate_q0(&m, &p, &SimPlan { estimator: EstimatorKind::FullEventDriven, ..SimPlan::new(3000, 7) }).unwrap();
    assert!(hybrid.std_error < event.std_error);
    // Both are unbiased for the same expectation.
    let exact = q0(&m, &p).unwrap();
    assert!(within(&event, exact, 4.0), "{event:?} vs {exact}");
}

#[test]
fn constant_costs_have_zero_variance() {
    let mut m = worked_model();
    m.costs.variable_kind = VariableCostKind::Constant;
    let p = PolicySpec::new(4, 1.2).unwrap();
    let e = estimate_cv(&m, &p, &SimPlan::new(100, 3)).unwrap();
    assert_eq!(e.std_error, 0.0);
    assert!((e.mean - cv(&m, &p).unwrap()).abs() < 1e-12 * e.mean);
}

#[test]
fn linear_costs_match_closed_form() {
    let mut rng = Lcg(12);
    for _ in 0..3 {
        let mut m = worked_model();
        m.repair = RepairModel {
            a1: RepairFactor::ScaledExpSaturation { scale: rng.uniform(1.0, 1.2), level: 1.2, dip: 0.2 },
            a2: RepairFactor::ScaledExpSaturation { scale: rng.uniform(1.0, 1.2), level: 1.2, dip: 0.2 },
        };
        m.costs.variable_rate = (0..3).map(|_| rng.uniform(1.0, 9.0)).collect();
        let p = PolicySpec::new(1 + (rng.uniform(0.0, 5.0) as usize), rng.uniform(0.5, 2.5)).unwrap();
        let e = estimate_cv(&m, &p, &SimPlan::new(5000, rng.0)).unwrap();
        assert!(within(&e, cv_closed(&m, &p).unwrap(), 3.0), "{e:?}");
    }
}

#[test]
fn hitting_estimator() {
    let combo = common::worked_combo();
    assert_eq!(estimate_hitting(&combo, 0.0, 1.0, 1000, 5).unwrap().mean, 1.0);
    let e = estimate_hitting(&combo, 20.0, 2.5, 1_000_000, 9).unwrap();
    assert!(within(&e, hitting_cdf(&combo, 20.0, 2.5).unwrap(), 3.0), "{e:?}");
    let again = estimate_hitting(&combo, 20.0, 2.5, 1_000_000, 9).unwrap();
    assert_eq!(e, again);
}

#[test]
fn common_random_numbers_across_cost_changes() {
    let a = worked_model();
    let mut b: MaintenanceModel = a.clone();
    b.costs.c_threshold = 250.0;
    b.costs.variable_rate = vec![3.0, 7.0, 11.0];
    let p = PolicySpec::new(3, 1.5).unwrap();
    let plan = SimPlan::new(500, 2027);
    let ra = simulate_replications(&a, &p, &plan).unwrap();
    let rb = simulate_replications(&b, &p, &plan).unwrap();
    let diffs: Vec<f64> = ra
        .iter()
        .zip(&rb)
        .flat_map(|(x, y)| x.cycle_degradation.iter().zip(&y.cycle_degradation).map(|(u, v)| u - v))
        .collect();
    let e = SimEstimate::from_samples(&diffs);
    assert_eq!(e.mean, 0.0);
    assert_eq!(e.std_error, 0.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let m = worked_model();
    let p = PolicySpec::new(2, 1.1).unwrap();
    let plan = SimPlan::new(400, 11);
    let base = estimate_q0(&m, &p, &plan).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| estimate_q0(&m, &p, &plan).unwrap());
    assert_eq!(base, single);
}

#[test]
fn standard_errors_have_nominal_coverage() {
    let (shape, scale) = (1.7, 2.3);
    let truth = shape * scale;
    let mut covered = 0;
    for rep in 0..500u64 {
        let mut rng = RngStream::new(99, rep);
        let xs: Vec<f64> = (0..400).map(|_| sample_gamma(shape, scale, &mut rng).unwrap()).collect();
        let e = SimEstimate::from_samples(&xs);
        covered += usize::from((e.mean - truth).abs() <= 1.96 * e.std_error);
    }
    let rate = covered as f64 / 500.0;
    assert!((rate - 0.95).abs() <= 0.02, "coverage {rate}");
}

#[test]
fn sampled_paths_are_monotone() {
    let combo = LinearCombination::from_parts(&[1.0, 0.5], &[GammaProcessSpec::new(1.0, 2.0, 1.0).unwrap(), GammaProcessSpec::new(2.0, 1.0, 0.5).unwrap()]).unwrap();
    let times: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let rows = sample_paths(&combo, &times, &mut RngStream::new(1, 1)).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b >= a));
    }
}
