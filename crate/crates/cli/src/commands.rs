//! One function per subcommand. Each writes its table and summary through
//! [`Output`]; per-point numerical failures become empty cells and warnings.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use cbm_core::cost::{cost_combination, ConditionalCostSlice};
use cbm_core::degradation::{combo_moments, overall_pdf, ExpansionConfig, MoschopoulosExpansion};
use cbm_core::heterogeneity::mixed_hitting_prob;
use cbm_core::orderstat::{r_out_of_n_hitting_cdf, OrderStatMonitor};
use cbm_core::policy::{
    cv, cv_closed, feasible_set, maintained_hitting_cdf, optimize as optimize_policy, q0, FeasibleOutcome,
    MaintenanceModel, PolicySpec,
};
use cbm_core::quad::integrate;
use cbm_core::scenario::Scenario;
use cbm_core::simulate::{estimate_hitting, simulate_replications, SimEstimate};
use cbm_core::special::{GammaSampler, RngStream};
use cbm_core::{Error, Result};

use crate::output::{jnum, num, Output};
use crate::{invalid, Failure};

/// Stream keys for draws made here, apart from the simulator's own.
const KEY_PATHS: u64 = 0x7061_7468;
const KEY_ORDERSTAT: u64 = 0x6f72_6473;

/// Collects per-point failures without aborting the table.
#[derive(Default)]
struct Report {
    warnings: Vec<String>,
    failures: usize,
}

impl Report {
    fn cell<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures += 1;
                self.warnings.push(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self, out: &Output, results: Value, tolerances: Value) -> Result<(), Failure> {
        let status = if self.failures == 0 { "ok" } else { "partial" };
        out.summary(status, results, tolerances, &self.warnings)?;
        if self.failures > 0 {
            return Err(Failure::Numerical(format!(
                "{} evaluation(s) failed; see summary.json",
                self.failures
            )));
        }
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `count` equally spaced points ending at `max`, excluding zero.
fn ladder(max: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| if i == count { max } else { max * i as f64 / count as f64 })
        .collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn expansion_tolerances() -> Value {
    let cfg = ExpansionConfig::default();
    json!({ "series_tail": jnum(cfg.tail_tol), "series_max_terms": cfg.max_terms })
}

pub fn density(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let combo = s.combo()?;
    let t = s.curves.density_time;
    let exp = MoschopoulosExpansion::new(&combo, t, ExpansionConfig::default())?;
    let mut report = Report::default();
    let rows: Vec<Vec<String>> = ladder(s.curves.y_max, s.curves.y_count)
        .into_iter()
        .map(|y| {
            let pdf = report.cell(overall_pdf(&exp, y), || format!("pdf at y = {y}"));
            let cdf = report.cell(exp.cdf(y), || format!("cdf at y = {y}"));
            vec![num(y), opt(pdf), opt(cdf)]
        })
        .collect();
    out.table(&header(&["y", "pdf", "cdf"]), &rows)?;
    let m = combo_moments(&combo, t);
    let results = json!({
        "time": jnum(t),
        "mean": jnum(m.mean),
        "variance": jnum(m.variance),
        "series_terms": exp.truncation_k(),
        "retained_mass": jnum(exp.mass()),
    });
    report.finish(out, results, expansion_tolerances())
}

pub fn hitting(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let combo = s.combo()?;
    let cycles = &s.curves.cycles;
    let evaluated: Vec<(f64, Vec<Result<f64>>)> = ladder(s.curves.t_max, s.curves.t_count)
        .into_par_iter()
        .map(|t| {
            let mut v: Vec<Result<f64>> = cycles
                .iter()
                .map(|&j| maintained_hitting_cdf(&combo, &s.repair, s.threshold, j, t))
                .collect();
            if let Some(re) = &s.random_effect {
                match mixed_hitting_prob(re, &combo, s.threshold, t) {
                    Ok(m) => v.extend([Ok(m.quadrature), Ok(m.series)]),
                    Err(e) => v.extend([Err(e.clone()), Err(e)]),
                }
            }
            (t, v)
        })
        .collect();
    let mut names: Vec<String> = std::iter::once("t".to_string())
        .chain(cycles.iter().map(|j| format!("F_j{j}")))
        .collect();
    if s.random_effect.is_some() {
        names.extend(["F_mixed_quad".to_string(), "F_mixed_series".to_string()]);
    }
    let mut report = Report::default();
    let mut route_gap: f64 = 0.0;
    let mut rows = Vec::with_capacity(evaluated.len());
    for (t, values) in evaluated {
        let mut row = vec![num(t)];
        let mut cells = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            let c = report.cell(v, || format!("{} at t = {t}", names[i + 1]));
            cells.push(c);
            row.push(opt(c));
        }
        if s.random_effect.is_some() {
            if let [.., Some(q), Some(r)] = cells[..] {
                route_gap = route_gap.max((q - r).abs());
            }
        }
        rows.push(row);
    }
    out.table(&names, &rows)?;
    let mut results = json!({ "threshold": jnum(s.threshold), "cycles": cycles });
    if s.random_effect.is_some() {
        results["mixed_route_max_gap"] = jnum(route_gap);
    }
    report.finish(out, results, expansion_tolerances())
}

pub fn cost_surface(s: &Scenario, out: &Output, with_hitting: bool) -> Result<(), Failure> {
    let model = s.model()?;
    let grid = &s.grid;
    let budget = s.costs.budget;
    let cells: Vec<(usize, f64)> = (1..=grid.n_max)
        .flat_map(|n| grid.t_values().into_iter().map(move |t| (n, t)))
        .collect();
    type Cell = (Result<f64>, Result<f64>, Vec<Result<f64>>);
    let evaluated: Vec<Cell> = cells
        .par_iter()
        .map(|&(n, t)| {
            let p = PolicySpec::new(n, t);
            let q = p.clone().and_then(|p| q0(&model, &p));
            let c = p.and_then(|p| cv(&model, &p));
            let hits = if with_hitting {
                (1..=n)
                    .map(|j| maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, j, t))
                    .collect()
            } else {
                Vec::new()
            };
            (q, c, hits)
        })
        .collect();
    let mut names = header(&["N", "T", "Q0", "CV", "feasible"]);
    if with_hitting {
        names.extend((1..=grid.n_max).map(|j| format!("F_hit_j{j}")));
    }
    let mut report = Report::default();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut rows = Vec::with_capacity(cells.len());
    for (&(n, t), (q, c, hits)) in cells.iter().zip(evaluated) {
        let q = report.cell(q, || format!("Q0 at N = {n}, T = {t}"));
        let c = report.cell(c, || format!("CV at N = {n}, T = {t}"));
        let feasible = c.map(|c| budget.is_none_or(|k| c <= k));
        if let (Some(q), Some(true)) = (q, feasible) {
            if best.is_none_or(|(_, _, b)| q < b) {
                best = Some((n, t, q));
            }
        }
        let mut row = vec![
            n.to_string(),
            num(t),
            opt(q),
            opt(c),
            feasible.map(|f| u8::from(f).to_string()).unwrap_or_default(),
        ];
        if with_hitting {
            for (j, h) in hits.into_iter().enumerate() {
                row.push(opt(report.cell(h, || format!("F_hit_j{} at N = {n}, T = {t}", j + 1))));
            }
            row.resize(names.len(), String::new());
        }
        rows.push(row);
    }
    out.table(&names, &rows)?;
    let results = json!({
        "budget": budget.map(jnum),
        "cells": rows.len(),
        "best_feasible_cell": best.map(|(n, t, q)| json!({ "N": n, "T": jnum(t), "Q0": jnum(q) })),
    });
    report.finish(out, results, expansion_tolerances())
}

fn feasible_json(outcome: &FeasibleOutcome) -> Value {
    match outcome {
        FeasibleOutcome::Empty => json!({ "kind": "empty" }),
        FeasibleOutcome::Unconstrained => json!({ "kind": "unconstrained" }),
        FeasibleOutcome::Bounded(set) => {
            let boundary: Map<String, Value> = set.boundary.iter().map(|(n, t)| (n.to_string(), jnum(*t))).collect();
            json!({ "kind": "bounded", "n1": set.n1, "n2": set.n2, "boundary_T": boundary })
        }
    }
}

pub fn optimize(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let model = s.model()?;
    let grid = &s.grid;
    let budget = s.costs.budget;
    let outcome = budget.map(|k| feasible_set(&model, k, grid.n_max)).transpose()?;
    let ts = grid.t_values();
    let mut report = Report::default();
    let mut rows = Vec::with_capacity(grid.n_max);
    for n in 1..=grid.n_max {
        let upper = match &outcome {
            None => Some(None),
            Some(o) => o.t_upper(n),
        };
        let allowed: Vec<f64> = match upper {
            None => Vec::new(),
            Some(None) => ts.clone(),
            Some(Some(root)) => ts.iter().copied().filter(|&t| t <= root).collect(),
        };
        let values: Vec<(f64, Result<f64>)> = allowed
            .par_iter()
            .map(|&t| (t, PolicySpec::new(n, t).and_then(|p| q0(&model, &p))))
            .collect();
        let mut best: Option<(f64, f64)> = None;
        for (t, v) in values {
            if let Some(q) = report.cell(v, || format!("Q0 at N = {n}, T = {t}")) {
                if best.is_none_or(|(_, b)| q < b) {
                    best = Some((t, q));
                }
            }
        }
        let cv_best = best.and_then(|(t, _)| {
            report.cell(PolicySpec::new(n, t).and_then(|p| cv(&model, &p)), || {
                format!("CV at N = {n}, T = {t}")
            })
        });
        let upper_text = match upper {
            None => String::new(),
            Some(None) => "inf".to_string(),
            Some(Some(t)) => num(t),
        };
        rows.push(vec![
            n.to_string(),
            upper_text,
            opt(best.map(|b| b.0)),
            opt(best.map(|b| b.1)),
            opt(cv_best),
        ]);
    }
    out.table(&header(&["N", "T_upper", "T_best", "Q0_best", "CV_best"]), &rows)?;
    let tolerances = json!({
        "boundary_bisection_rel": 1e-12,
        "golden_section_abs": 1e-4,
        "t_limits": [jnum(cbm_core::policy::T_LIMIT_LOW), jnum(cbm_core::policy::T_LIMIT_HIGH)],
    });
    let feasible = outcome.as_ref().map(feasible_json);
    match optimize_policy(&model, grid, budget) {
        Ok(o) => {
            let results = json!({
                "N_opt": o.n_opt,
                "T_opt": jnum(o.t_opt),
                "Q0": jnum(o.q0),
                "CV": jnum(o.cv),
                "constrained": o.constrained,
                "budget": budget.map(jnum),
                "grid_T": jnum(o.grid_t),
                "grid_Q0": jnum(o.grid_q0),
                "feasible_set": feasible,
            });
            report.finish(out, results, tolerances)
        }
        Err(e @ Error::Infeasible(_)) => {
            let results = json!({ "budget": budget.map(jnum), "feasible_set": feasible });
            out.summary("infeasible", results, tolerances, &report.warnings)?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn orderstat(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let mon = s.orderstat.ok_or_else(|| invalid("orderstat", "the subcommand needs an [orderstat] section"))?;
    let mut report = Report::default();
    let mut rows = Vec::new();
    let mut last = None;
    for t in ladder(s.curves.t_max, s.curves.t_count) {
        let mut row = vec![num(t)];
        for r in 1..=mon.n {
            let m = OrderStatMonitor { r, ..mon };
            let p = report.cell(r_out_of_n_hitting_cdf(&m, t), || format!("P_r{r} at t = {t}"));
            if r == mon.r {
                last = p;
            }
            row.push(opt(p));
        }
        rows.push(row);
    }
    let mut names = vec!["t".to_string()];
    names.extend((1..=mon.n).map(|r| format!("P_r{r}")));
    out.table(&names, &rows)?;
    let results = json!({
        "n": mon.n,
        "r": mon.r,
        "threshold": jnum(mon.threshold),
        "configured_r_at_t_max": last.map(jnum),
    });
    report.finish(out, results, json!({}))
}

/// The configured policy, or the optimum under the configured budget.
fn policy_for(s: &Scenario, model: &MaintenanceModel) -> Result<PolicySpec> {
    match s.simulation.policy {
        Some(p) => PolicySpec::new(p.n, p.t),
        None => {
            let o = optimize_policy(model, &s.grid, s.costs.budget)?;
            PolicySpec::new(o.n_opt, o.t_opt)
        }
    }
}

fn estimate_json(e: &SimEstimate, analytic: f64) -> Value {
    json!({
        "estimate": jnum(e.mean),
        "std_error": jnum(e.std_error),
        "analytic": jnum(analytic),
        "z": jnum(z_score(e, analytic)),
    })
}

fn z_score(e: &SimEstimate, analytic: f64) -> f64 {
    let d = e.mean - analytic;
    if d == 0.0 {
        0.0
    } else {
        d / e.std_error
    }
}

pub fn simulate(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let model = s.model()?;
    let policy = policy_for(s, &model)?;
    let plan = s.simulation.plan();
    let recs = simulate_replications(&model, &policy, &plan)?;
    let cost: Vec<f64> = recs.iter().map(|r| r.cost_rate).collect();
    let var: Vec<f64> = recs.iter().map(|r| r.variable_rate).collect();
    let mut quantities = vec![
        ("Q0".to_string(), SimEstimate::from_samples(&cost), q0(&model, &policy)?),
        ("CV".to_string(), SimEstimate::from_samples(&var), cv(&model, &policy)?),
    ];
    let (n, t) = (policy.replacement_count, policy.inspection_interval);
    for j in 1..=n {
        let hits: Vec<f64> = recs.iter().map(|r| f64::from(u8::from(r.cycle_hit[j - 1]))).collect();
        let f = maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, j, t)?;
        quantities.push((format!("F_hit_j{j}"), SimEstimate::from_samples(&hits), f));
    }
    let rows: Vec<Vec<String>> = quantities
        .iter()
        .map(|(name, e, a)| vec![name.clone(), num(e.mean), num(e.std_error), num(*a), num(z_score(e, *a))])
        .collect();
    out.table(&header(&["quantity", "estimate", "std_error", "analytic", "z"]), &rows)?;
    let estimates: Map<String, Value> = quantities.iter().map(|(k, e, a)| (k.clone(), estimate_json(e, *a))).collect();
    let results = json!({
        "policy": { "N": n, "T": jnum(t) },
        "replications": plan.replications,
        "seed": plan.seed,
        "estimator": format!("{:?}", plan.estimator),
        "estimates": estimates,
    });
    Report::default().finish(out, results, json!({}))
}

struct Check {
    name: String,
    analytic: f64,
    estimate: f64,
    tolerance: f64,
}

impl Check {
    fn error(&self) -> f64 {
        (self.estimate - self.analytic).abs()
    }

    fn pass(&self) -> bool {
        self.error() <= self.tolerance
    }
}

/// Three standard errors, floored at one count in `reps` for near-certain events.
fn mc_band(e: &SimEstimate) -> f64 {
    3.0 * e.std_error.max(1.0 / e.replications as f64)
}

fn orderstat_mc(mon: &OrderStatMonitor, t: f64, reps: usize, seed: u64) -> Result<SimEstimate> {
    let sampler = GammaSampler::new(mon.common_spec.shape_at(t), mon.weight * mon.common_spec.beta)?;
    let hits: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::keyed(seed, &[KEY_ORDERSTAT, rep]);
            let above = (0..mon.n).filter(|_| sampler.sample(&mut rng) >= mon.threshold).count();
            f64::from(u8::from(above >= mon.r))
        })
        .collect();
    Ok(SimEstimate::from_samples(&hits))
}

pub fn validate(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let model = s.model()?;
    let combo = &model.combo;
    let plan = s.simulation.plan();
    let (reps, seed) = (plan.replications, plan.seed);
    let mut report = Report::default();
    let mut checks = Vec::new();

    let t = s.curves.density_time;
    let y_max = s.curves.y_max;
    let density_check = MoschopoulosExpansion::new(combo, t, ExpansionConfig::default()).and_then(|exp| {
        let integral = integrate(|y| overall_pdf(&exp, y).unwrap_or(f64::NAN), 0.0, y_max, 1e-10)?;
        Ok((exp.cdf(y_max)?, integral))
    });
    if let Some((cdf, integral)) = report.cell(density_check, || "density integral".into()) {
        checks.push(Check {
            name: format!("density_integral_y{}", num(y_max)),
            analytic: cdf,
            estimate: integral,
            tolerance: 1e-6,
        });
    }

    for frac in [0.25, 0.5, 1.0] {
        let th = s.curves.t_max * frac;
        let r = cbm_core::degradation::hitting_cdf(combo, s.threshold, th)
            .and_then(|a| Ok((a, estimate_hitting(combo, s.threshold, th, reps, seed)?)));
        if let Some((a, e)) = report.cell(r, || format!("hitting at t = {th}")) {
            checks.push(Check {
                name: format!("hitting_mc_t{}", num(th)),
                analytic: a,
                estimate: e.mean,
                tolerance: mc_band(&e),
            });
        }
    }

    let sim = policy_for(s, &model).and_then(|p| {
        let recs = simulate_replications(&model, &p, &plan)?;
        let cost: Vec<f64> = recs.iter().map(|r| r.cost_rate).collect();
        let var: Vec<f64> = recs.iter().map(|r| r.variable_rate).collect();
        Ok((
            p,
            SimEstimate::from_samples(&cost),
            SimEstimate::from_samples(&var),
            q0(&model, &p)?,
            cv(&model, &p)?,
            cv_closed(&model, &p)?,
        ))
    });
    match sim {
        Ok((p, eq, ec, aq, ac, closed)) => {
            let tag = format!("N{}_T{}", p.replacement_count, num(p.inspection_interval));
            checks.push(Check {
                name: format!("q0_mc_{tag}"),
                analytic: aq,
                estimate: eq.mean,
                tolerance: 3.0 * eq.std_error,
            });
            checks.push(Check {
                name: format!("cv_mc_{tag}"),
                analytic: ac,
                estimate: ec.mean,
                tolerance: 3.0 * ec.std_error,
            });
            checks.push(Check {
                name: format!("cv_closed_form_{tag}"),
                analytic: ac,
                estimate: closed,
                tolerance: 1e-8 * ac.abs().max(1.0),
            });
        }
        Err(e) => {
            report.cell::<()>(Err(e), || "policy simulation".into());
        }
    }

    let tm = s.curves.t_max * 0.5;
    if let Some(re) = &s.random_effect {
        let r = mixed_hitting_prob(re, combo, s.threshold, tm);
        if let Some(m) = report.cell(r, || format!("mixed hitting at t = {tm}")) {
            checks.push(Check {
                name: format!("mixed_routes_t{}", num(tm)),
                analytic: m.series,
                estimate: m.quadrature,
                tolerance: 1e-4,
            });
        }
    }

    if let Some(mon) = &s.orderstat {
        let r = r_out_of_n_hitting_cdf(mon, tm).and_then(|a| Ok((a, orderstat_mc(mon, tm, reps, seed)?)));
        if let Some((a, e)) = report.cell(r, || "order statistic".into()) {
            checks.push(Check {
                name: format!("orderstat_{}of{}_t{}", mon.r, mon.n, num(tm)),
                analytic: a,
                estimate: e.mean,
                tolerance: mc_band(&e),
            });
        }
    }

    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                num(c.analytic),
                num(c.estimate),
                num(c.error()),
                num(c.tolerance),
                u8::from(c.pass()).to_string(),
            ]
        })
        .collect();
    out.table(&header(&["check", "analytic", "estimate", "abs_error", "tolerance", "pass"]), &rows)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.as_str()).collect();
    let results = json!({
        "checks": checks.len(),
        "passed": checks.len() - failed.len(),
        "failed": failed,
        "replications": reps,
        "seed": seed,
    });
    let tolerances = json!({
        "density_integral": 1e-6,
        "monte_carlo": "3 standard errors (probabilities floored at 1/replications)",
        "cv_closed_form_rel": 1e-8,
        "mixed_routes": 1e-4,
    });
    if failed.is_empty() {
        report.finish(out, results, tolerances)
    } else {
        let n = failed.len();
        out.summary("failed", results, tolerances, &report.warnings)?;
        Err(Failure::Numerical(format!("{n} check(s) failed; see validate.csv")))
    }
}

pub fn paths(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let combo = s.combo()?;
    let times = ladder(s.curves.t_max, s.curves.t_count);
    let mut rows = Vec::with_capacity(s.curves.paths * times.len());
    for p in 0..s.curves.paths {
        let mut rng = RngStream::keyed(s.simulation.seed, &[KEY_PATHS, p as u64]);
        let path = cbm_core::simulate::sample_paths(&combo, &times, &mut rng)?;
        for (t, values) in times.iter().zip(path) {
            let mut row = vec![p.to_string(), num(*t)];
            row.extend(values.into_iter().map(num));
            rows.push(row);
        }
    }
    let mut names = header(&["path", "t"]);
    names.extend((1..=combo.len()).map(|k| format!("X{k}")));
    names.push("Y".into());
    out.table(&names, &rows)?;
    let results = json!({ "paths": s.curves.paths, "points_per_path": times.len(), "seed": s.simulation.seed });
    Report::default().finish(out, results, json!({}))
}

pub fn conditional(s: &Scenario, out: &Output) -> Result<(), Failure> {
    let combo = s.combo()?;
    let costs = s.cost_structure();
    let t = s.curves.density_time;
    let y = s.curves.conditional_y.unwrap_or_else(|| combo_moments(&combo, t).mean);
    let um = combo_moments(&cost_combination(&combo, &costs)?, t);
    let u_max = um.mean + 6.0 * um.variance.sqrt();
    let slice = ConditionalCostSlice::new(&combo, &costs, t, y, u_max, &s.quadrature)?;
    let us = ladder(u_max, s.curves.y_count);
    let densities: Vec<_> = us.par_iter().map(|&u| slice.density(u)).collect();
    let mut report = Report::default();
    let mut mass = 0.0;
    let (mut prev_u, mut prev_d) = (0.0, slice.density(0.0).density);
    let mut flagged = 0;
    let rows: Vec<Vec<String>> = us
        .iter()
        .zip(&densities)
        .map(|(&u, d)| {
            mass += 0.5 * (u - prev_u) * (d.density + prev_d);
            (prev_u, prev_d) = (u, d.density);
            flagged += usize::from(d.warning);
            vec![
                num(u),
                num(d.density),
                num(d.raw),
                u8::from(d.clamped).to_string(),
                u8::from(d.warning).to_string(),
            ]
        })
        .collect();
    out.table(&header(&["u", "density", "raw", "clamped", "warning"]), &rows)?;
    if slice.smoothed() {
        report.warnings.push(format!(
            "characteristic function above cf_tol at radius {}; density is Gaussian-smoothed",
            num(slice.radius())
        ));
    }
    if flagged > 0 {
        report.warnings.push(format!("{flagged} point(s) with negative inversion output beyond ripple level"));
    }
    let results = json!({
        "time": jnum(t),
        "y": jnum(slice.y()),
        "marginal_density": jnum(slice.marginal()),
        "radius": jnum(slice.radius()),
        "smoothed": slice.smoothed(),
        "doublings": slice.doublings(),
        "trapezoid_mass": jnum(mass),
    });
    let q = &s.quadrature;
    let tolerances = json!({
        "cf_tol": jnum(q.cf_tol),
        "rel_tol": jnum(q.rel_tol),
        "max_radius": jnum(q.max_radius),
        "initial_nodes": q.initial_nodes,
        "max_doublings": q.max_doublings,
    });
    report.finish(out, results, tolerances)
}
