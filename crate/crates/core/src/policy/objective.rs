//! The long-run cost rate `Q₀(N, T)`, the variable-cost rate `CV(N, T)` and
//! the analytic diagnostics of the reduced model.

use serde::Serialize;

use super::{maintained_hitting_cdf, MaintenanceModel, PolicySpec, RepairFactor};
use crate::cost::{expected_variable_cost, VariableCostKind};
use crate::error::{Error, Result};

/// `Σ_{j=0}^{n−1} r^j`, summed directly when `r` is within 1e-12 of one.
pub(crate) fn geometric_sum(r: f64, n: usize) -> f64 {
    if (r - 1.0).abs() <= 1e-12 {
        (0..n).map(|j| r.powi(j as i32)).sum()
    } else {
        (r.powi(n as i32) - 1.0) / (r - 1.0)
    }
}

/// Per-unit-time contributions to `Q₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub inspection: f64,
    pub fixed: f64,
    pub variable: f64,
    pub threshold: f64,
    pub replacement: f64,
    pub total: f64,
}

pub fn q0_breakdown(model: &MaintenanceModel, policy: &PolicySpec) -> Result<CostBreakdown> {
    policy.validate()?;
    let (n, t) = (policy.replacement_count, policy.inspection_interval);
    let (a1, a2) = model.factors(t)?;
    let costs = &model.costs;
    let lambda = model.arrivals.rate;
    let fixed_sum: f64 = costs.fixed.iter().sum();
    let mut fixed = 0.0;
    let mut variable = 0.0;
    let mut threshold = 0.0;
    for j in 1..=n {
        let count = a1.powi(j as i32 - 1) / lambda;
        fixed += count * fixed_sum;
        variable += count * cycle_variable_cost(model, j, t, a2);
        if costs.c_threshold > 0.0 {
            let f = maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, j, t)?;
            threshold += count * costs.c_threshold * f;
        }
    }
    let span = n as f64 * t;
    let inspection = costs.c_inspect / t;
    let replacement = costs.c_replace / span;
    let (fixed, variable, threshold) = (fixed / span, variable / span, threshold / span);
    Ok(CostBreakdown {
        inspection,
        fixed,
        variable,
        threshold,
        replacement,
        total: inspection + fixed + variable + threshold + replacement,
    })
}

fn cycle_variable_cost(model: &MaintenanceModel, j: usize, t: f64, a2: f64) -> f64 {
    model
        .combo
        .components()
        .iter()
        .zip(&model.costs.variable_rate)
        .map(|(c, &rate)| expected_variable_cost(&c.spec, rate, model.costs.variable_kind, j, t, a2))
        .sum()
}

/// Expected total cost per unit time over a replacement cycle.
pub fn q0(model: &MaintenanceModel, policy: &PolicySpec) -> Result<f64> {
    Ok(q0_breakdown(model, policy)?.total)
}

/// Expected variable cost per unit time, by direct summation over cycles.
pub fn cv(model: &MaintenanceModel, policy: &PolicySpec) -> Result<f64> {
    policy.validate()?;
    let (n, t) = (policy.replacement_count, policy.inspection_interval);
    let (a1, a2) = model.factors(t)?;
    let total: f64 = (1..=n)
        .map(|j| a1.powi(j as i32 - 1) / model.arrivals.rate * cycle_variable_cost(model, j, t, a2))
        .sum();
    Ok(total / (n as f64 * t))
}

/// `CV` through the geometric-series closed forms of each cost kind.
pub fn cv_closed(model: &MaintenanceModel, policy: &PolicySpec) -> Result<f64> {
    policy.validate()?;
    let (n, t) = (policy.replacement_count, policy.inspection_interval);
    let (a1, a2) = model.factors(t)?;
    let rates = model.combo.components().iter().zip(&model.costs.variable_rate);
    let (ratio, per_cycle): (f64, f64) = match model.costs.variable_kind {
        VariableCostKind::Constant => (a1, model.costs.variable_rate.iter().sum()),
        VariableCostKind::Linear => (
            a1 * a2,
            rates.map(|(c, r)| r * c.spec.shape_at(t) * c.spec.beta).sum(),
        ),
        VariableCostKind::Quadratic => (
            a1 * a2 * a2,
            rates
                .map(|(c, r)| {
                    let a = c.spec.shape_at(t);
                    r * c.spec.beta * c.spec.beta * (a + a * a)
                })
                .sum(),
        ),
    };
    Ok(geometric_sum(ratio, n) * per_cycle / (model.arrivals.rate * n as f64 * t))
}

/// Constant factors, shapes linear in time, linear variable cost.
fn reduced_factors(model: &MaintenanceModel) -> Result<(f64, f64)> {
    let (RepairFactor::Constant { value: a1 }, RepairFactor::Constant { value: a2 }) =
        (model.repair.a1, model.repair.a2)
    else {
        return Err(Error::UnsupportedModel("reduced form needs constant repair factors"));
    };
    if model.combo.components().iter().any(|c| c.spec.xi != 1.0) {
        return Err(Error::UnsupportedModel("reduced form needs shapes linear in time"));
    }
    if model.costs.variable_kind != VariableCostKind::Linear {
        return Err(Error::UnsupportedModel("reduced form needs linear variable cost"));
    }
    Ok((a1, a2))
}

struct Reduced {
    a1: f64,
    a2: f64,
    lambda: f64,
    fixed_sum: f64,
    /// `Σ c_k α_k β_k` with α_k the shape rate.
    var_sum: f64,
}

impl Reduced {
    fn new(model: &MaintenanceModel) -> Result<Self> {
        let (a1, a2) = reduced_factors(model)?;
        Ok(Self {
            a1,
            a2,
            lambda: model.arrivals.rate,
            fixed_sum: model.costs.fixed.iter().sum(),
            var_sum: model
                .combo
                .components()
                .iter()
                .zip(&model.costs.variable_rate)
                .map(|(c, r)| r * c.spec.alpha * c.spec.beta)
                .sum(),
        })
    }

    /// `Σ_{j=1}^{n} a₁^{j−1} F^{(j)}(T)`.
    fn weighted_hits(&self, model: &MaintenanceModel, n: usize, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for j in 1..=n {
            let f = maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, j, t)?;
            acc += self.a1.powi(j as i32 - 1) * f;
        }
        Ok(acc)
    }
}

/// `Q₀` written out for the reduced model.
pub fn q0_reduced(model: &MaintenanceModel, n: usize, t: f64) -> Result<f64> {
    let p = PolicySpec::new(n, t)?;
    let r = Reduced::new(model)?;
    let costs = &model.costs;
    let nf = n as f64;
    let hits = if costs.c_threshold > 0.0 {
        r.weighted_hits(model, p.replacement_count, t)?
    } else {
        0.0
    };
    Ok(costs.c_inspect / t
        + costs.c_replace / (nf * t)
        + geometric_sum(r.a1, n) * r.fixed_sum / (r.lambda * nf * t)
        + geometric_sum(r.a1 * r.a2, n) * r.var_sum / (r.lambda * nf)
        + costs.c_threshold / (r.lambda * nf * t) * hits)
}

/// Left minus right side of the first-order condition in `T` for the reduced
/// model. It equals `(λ N T² / c_F) · ∂Q₀/∂T`, so its sign follows the slope.
pub fn stationarity_residual(model: &MaintenanceModel, n: usize, t: f64) -> Result<f64> {
    PolicySpec::new(n, t)?;
    let r = Reduced::new(model)?;
    let costs = &model.costs;
    if costs.c_threshold == 0.0 {
        return Err(Error::Undefined("stationarity condition needs a positive threshold cost"));
    }
    let h = 1e-4 * t;
    let mut lhs = 0.0;
    for j in 1..=n {
        let f = |s| maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, j, s);
        let density = (f(t + h)? - f(t - h)?) / (2.0 * h);
        lhs += r.a1.powi(j as i32 - 1) * (density * t - f(t)?);
    }
    let rhs = r.lambda / costs.c_threshold
        * (n as f64 * costs.c_inspect
            + geometric_sum(r.a1, n) * r.fixed_sum / r.lambda
            + costs.c_replace);
    Ok(lhs - rhs)
}

/// The bound `D(N, T)`: replacing after `N + 1` rather than `N` cycles is
/// cheaper exactly when `c_R > D(N, T)`.
pub fn replacement_bound(model: &MaintenanceModel, n: usize, t: f64) -> Result<f64> {
    PolicySpec::new(n, t)?;
    let r = Reduced::new(model)?;
    let nf = n as f64;
    let ratio = r.a1 * r.a2;
    let fixed = r.fixed_sum / r.lambda * (nf * r.a1.powi(n as i32) - geometric_sum(r.a1, n));
    let variable =
        t * r.var_sum / r.lambda * (nf * ratio.powi(n as i32) - geometric_sum(ratio, n));
    let c_f = model.costs.c_threshold;
    let hitting = if c_f > 0.0 {
        let next = maintained_hitting_cdf(&model.combo, &model.repair, model.threshold, n + 1, t)?;
        c_f / r.lambda * (nf * r.a1.powi(n as i32) * next - r.weighted_hits(model, n, t)?)
    } else {
        0.0
    };
    Ok(fixed + variable + hitting)
}

/// Whether `c_R < D(1, T)`, the condition under which a single cycle is
/// already cheaper than two.
pub fn replacement_worthwhile(model: &MaintenanceModel, t: f64) -> Result<bool> {
    Ok(model.costs.c_replace < replacement_bound(model, 1, t)?)
}
