//! Seeded Monte Carlo counterparts of the analytic quantities.
//!
//! Every random draw comes from its own stream keyed by what it represents
//! (replication, cycle, defect type, ...), so results do not depend on thread
//! scheduling and two scenarios that differ only in costs see identical
//! degradation paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostStructure, VariableCostKind};
use crate::degradation::{sample_overall, LinearCombination};
use crate::error::{Error, Result};
use crate::policy::{MaintenanceModel, PolicySpec};
use crate::special::{sample_poisson, GammaSampler, RngStream};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Expected defect counts, sampled degradation.
    #[default]
    HybridCounts,
    /// Poisson defect counts with one degradation draw per occurrence.
    FullEventDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: EstimatorKind,
}

impl SimPlan {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            estimator: EstimatorKind::HybridCounts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config {
                field: "simulation.replications".into(),
                message: "need at least one replication".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl SimEstimate {
    /// Sample mean and its standard error, summed pairwise in input order.
    /// Moments are taken about the first sample, so a constant sample has an
    /// exactly zero error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let shift = xs.first().copied().unwrap_or(0.0);
        let dev: Vec<f64> = xs.iter().map(|x| x - shift).collect();
        let offset = pairwise_sum(&dev) / n as f64;
        let std_error = if n > 1 {
            let sq: Vec<f64> = dev.iter().map(|d| (d - offset) * (d - offset)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean: shift + offset,
            std_error,
            replications: n,
        }
    }
}

/// Outcome of one simulated replacement cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    /// Total cost over the replacement cycle divided by `NT`.
    pub cost_rate: f64,
    /// Variable cost over the cycle divided by `NT`.
    pub variable_rate: f64,
    /// Combined degradation `Y_j` drawn in each inspection cycle.
    pub cycle_degradation: Vec<f64>,
    /// Whether `Y_j` reached the threshold, per cycle.
    pub cycle_hit: Vec<bool>,
}

const TAG_DEGRADATION: u64 = 0;
const TAG_COUNT: u64 = 1;
const TAG_OCCURRENCE: u64 = 2;
const TAG_THRESHOLD: u64 = 3;

fn variable_cost(kind: VariableCostKind, rate: f64, x: f64) -> f64 {
    match kind {
        VariableCostKind::Constant => rate,
        VariableCostKind::Linear => rate * x,
        VariableCostKind::Quadratic => rate * x * x,
    }
}

/// Simulates one replacement cycle under `policy`.
pub fn simulate_replication(
    model: &MaintenanceModel,
    policy: &PolicySpec,
    plan: &SimPlan,
    rep: u64,
) -> Result<ReplicationRecord> {
    let (n, t) = (policy.replacement_count, policy.inspection_interval);
    let (a1, a2) = model.factors(t)?;
    let costs = &model.costs;
    let kind = costs.variable_kind;
    let lambda = model.arrivals.rate;
    let mut total = costs.c_replace;
    let mut variable = 0.0;
    let mut cycle_degradation = Vec::with_capacity(n);
    let mut cycle_hit = Vec::with_capacity(n);
    for j in 1..=n {
        let count = a1.powi(j as i32 - 1) / lambda;
        let growth = a2.powi(j as i32 - 1);
        let jj = j as u64;
        total += costs.c_inspect;
        let mut y = 0.0;
        for (k, (c, (&fixed, &rate))) in model
            .combo
            .components()
            .iter()
            .zip(costs.fixed.iter().zip(&costs.variable_rate))
            .enumerate()
        {
            let kk = k as u64;
            let sampler = GammaSampler::new(c.spec.shape_at(t), c.spec.beta * growth)?;
            let x = sampler.sample(&mut RngStream::keyed(plan.seed, &[TAG_DEGRADATION, rep, jj, kk]));
            y += c.weight * x;
            match plan.estimator {
                EstimatorKind::HybridCounts => {
                    let v = count * variable_cost(kind, rate, x);
                    variable += v;
                    total += count * fixed + v;
                }
                EstimatorKind::FullEventDriven => {
                    let mut rng = RngStream::keyed(plan.seed, &[TAG_COUNT, rep, jj, kk]);
                    let m = sample_poisson(count, &mut rng)?;
                    for occ in 0..m {
                        let x = sampler.sample(&mut RngStream::keyed(
                            plan.seed,
                            &[TAG_OCCURRENCE, rep, jj, kk, occ],
                        ));
                        let v = variable_cost(kind, rate, x);
                        variable += v;
                        total += fixed + v;
                    }
                }
            }
        }
        let hit = y >= model.threshold;
        if hit {
            total += costs.c_threshold
                * match plan.estimator {
                    EstimatorKind::HybridCounts => count,
                    EstimatorKind::FullEventDriven => {
                        let mut rng = RngStream::keyed(plan.seed, &[TAG_THRESHOLD, rep, jj]);
                        sample_poisson(count, &mut rng)? as f64
                    }
                };
        }
        cycle_degradation.push(y);
        cycle_hit.push(hit);
    }
    let span = n as f64 * t;
    Ok(ReplicationRecord {
        cost_rate: total / span,
        variable_rate: variable / span,
        cycle_degradation,
        cycle_hit,
    })
}

/// All replications of `plan`, in replication order.
pub fn simulate_replications(
    model: &MaintenanceModel,
    policy: &PolicySpec,
    plan: &SimPlan,
) -> Result<Vec<ReplicationRecord>> {
    model.validate()?;
    policy.validate()?;
    plan.validate()?;
    (0..plan.replications as u64)
        .into_par_iter()
        .map(|rep| simulate_replication(model, policy, plan, rep))
        .collect()
}

/// Monte Carlo estimate of `Q₀(N, T)`.
pub fn estimate_q0(model: &MaintenanceModel, policy: &PolicySpec, plan: &SimPlan) -> Result<SimEstimate> {
    let recs = simulate_replications(model, policy, plan)?;
    let xs: Vec<f64> = recs.iter().map(|r| r.cost_rate).collect();
    Ok(SimEstimate::from_samples(&xs))
}

/// Monte Carlo estimate of `CV(N, T)`.
pub fn estimate_cv(model: &MaintenanceModel, policy: &PolicySpec, plan: &SimPlan) -> Result<SimEstimate> {
    let recs = simulate_replications(model, policy, plan)?;
    let xs: Vec<f64> = recs.iter().map(|r| r.variable_rate).collect();
    Ok(SimEstimate::from_samples(&xs))
}

/// Binomial estimate of `P(Y(t) ≥ level)`.
pub fn estimate_hitting(
    combo: &LinearCombination,
    level: f64,
    t: f64,
    reps: usize,
    seed: u64,
) -> Result<SimEstimate> {
    crate::error::ensure_non_negative("threshold", level)?;
    crate::error::ensure_positive("time", t)?;
    SimPlan::new(reps, seed).validate()?;
    let hits: usize = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let y = sample_overall(combo, t, &mut RngStream::keyed(seed, &[rep]));
            usize::from(y >= level)
        })
        .sum();
    let p = hits as f64 / reps as f64;
    Ok(SimEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        replications: reps,
    })
}

/// One joint draw of `(Y(t), U(t))` from shared component draws.
pub fn sample_joint(
    combo: &LinearCombination,
    costs: &CostStructure,
    t: f64,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let mut y = 0.0;
    let mut u = 0.0;
    for (c, &rate) in combo.components().iter().zip(&costs.variable_rate) {
        let x = GammaSampler::new(c.spec.shape_at(t), c.spec.beta)?.sample(rng);
        y += c.weight * x;
        u += rate * x;
    }
    Ok((y, u))
}

/// Trajectories of every `X_k` and of `Y` on `times` (sorted, positive),
/// built from independent gamma increments.
pub fn sample_paths(
    combo: &LinearCombination,
    times: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<Vec<f64>>> {
    let n = combo.len();
    let mut rows = Vec::with_capacity(times.len());
    let mut level = vec![0.0; n];
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev) {
            return Err(Error::Domain {
                what: "path time (must increase)",
                value: t,
            });
        }
        for (x, c) in level.iter_mut().zip(combo.components()) {
            let inc = c.spec.shape_at(t) - c.spec.shape_at(prev);
            *x += GammaSampler::new(inc, c.spec.beta)?.sample(rng);
        }
        let y: f64 = level
            .iter()
            .zip(combo.components())
            .map(|(x, c)| c.weight * x)
            .sum();
        let mut row = level.clone();
        row.push(y);
        rows.push(row);
        prev = t;
    }
    Ok(rows)
}
