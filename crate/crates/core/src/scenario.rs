//! A complete, file-backed parameterization of one study.
//!
//! Scenarios are TOML. Serializing a parsed scenario gives the resolved form,
//! which parses back to an identical value.

use serde::{Deserialize, Serialize};

use crate::cost::{CostStructure, QuadratureSpec, VariableCostKind};
use crate::degradation::{Component, GammaProcessSpec, LinearCombination};
use crate::error::{Error, Result};
use crate::heterogeneity::{ArrivalModel, RandomEffectModel};
use crate::orderstat::OrderStatMonitor;
use crate::policy::{GridSpec, MaintenanceModel, PolicySpec, RepairModel};
use crate::simulate::{EstimatorKind, SimPlan};

/// One defect type: its weight in the overall degradation, its gamma process
/// and its costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    pub weight: f64,
    pub alpha: f64,
    pub xi: f64,
    pub beta: f64,
    pub fixed_cost: f64,
    pub variable_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub inspect: f64,
    pub variable_kind: VariableCostKind,
    pub threshold: f64,
    pub replace: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub n: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: EstimatorKind,
    /// Policy to simulate; the unconstrained optimum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
}

impl SimulationConfig {
    pub fn plan(&self) -> SimPlan {
        SimPlan {
            replications: self.replications,
            seed: self.seed,
            estimator: self.estimator,
        }
    }
}

/// Evaluation grids for the curve-producing subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Time at which `density` evaluates `Y(t)`.
    pub density_time: f64,
    pub y_max: f64,
    pub y_count: usize,
    pub t_max: f64,
    pub t_count: usize,
    /// Inspection cycles reported by `hitting`.
    pub cycles: Vec<usize>,
    pub paths: usize,
    /// Level `y` for `conditional`; the mean of `Y(density_time)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional_y: Option<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            density_time: 1.0,
            y_max: 40.0,
            y_count: 200,
            t_max: 7.0,
            t_count: 70,
            cycles: vec![1],
            paths: 5,
            conditional_y: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Special-maintenance threshold `L` on the overall degradation.
    pub threshold: f64,
    pub defects: Vec<DefectConfig>,
    pub repair: RepairModel,
    pub costs: CostConfig,
    pub arrivals: ArrivalModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_effect: Option<RandomEffectModel>,
    pub grid: GridSpec,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orderstat: Option<OrderStatMonitor>,
    #[serde(default)]
    pub curves: CurveConfig,
}

fn at(field: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let field = field.into();
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::Config {
            field,
            message: other.to_string(),
        },
    }
}

fn config(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config {
            field: e
                .span()
                .map(|r| format!("byte {}..{}", r.start, r.end))
                .unwrap_or_else(|| "<document>".into()),
            message: e.message().to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Resolved TOML; parses back to an equal scenario.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config("<document>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.defects.is_empty() {
            return Err(config("defects", "need at least one defect type"));
        }
        for (i, d) in self.defects.iter().enumerate() {
            GammaProcessSpec::new(d.alpha, d.xi, d.beta).map_err(at(format!("defects[{i}]")))?;
            if !(d.weight.is_finite() && d.weight > 0.0) {
                return Err(config(&format!("defects[{i}].weight"), "must be positive"));
            }
        }
        self.repair.a1.validate().map_err(at("repair.a1"))?;
        self.repair.a2.validate().map_err(at("repair.a2"))?;
        self.cost_structure().validate(self.defects.len()).map_err(at("costs"))?;
        self.arrivals.validate().map_err(at("arrivals"))?;
        if let Some(re) = &self.random_effect {
            re.validate().map_err(at("random_effect"))?;
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(config("threshold", "must be positive"));
        }
        self.grid.validate().map_err(at("grid"))?;
        self.simulation.plan().validate().map_err(at("simulation"))?;
        if let Some(p) = self.simulation.policy {
            PolicySpec::new(p.n, p.t).map_err(at("simulation.policy"))?;
        }
        let q = &self.quadrature;
        if !(q.cf_tol > 0.0 && q.cf_tol < 1.0) || !(q.rel_tol > 0.0) || q.initial_nodes == 0 {
            return Err(config("quadrature", "need 0 < cf_tol < 1, rel_tol > 0 and nodes > 0"));
        }
        if !(q.max_radius > 0.0) || q.radius.is_some_and(|r| !(r > 0.0)) {
            return Err(config("quadrature", "radii must be positive"));
        }
        if let Some(m) = &self.orderstat {
            m.validate().map_err(at("orderstat"))?;
        }
        let c = &self.curves;
        if !(c.density_time > 0.0 && c.y_max > 0.0 && c.t_max > 0.0) {
            return Err(config("curves", "time and level ranges must be positive"));
        }
        if c.y_count == 0 || c.t_count == 0 {
            return Err(config("curves", "point counts must be positive"));
        }
        if c.conditional_y.is_some_and(|y| !(y > 0.0 && y.is_finite())) {
            return Err(config("curves.conditional_y", "must be positive"));
        }
        if c.cycles.is_empty() || c.cycles.contains(&0) {
            return Err(config("curves.cycles", "need cycle indices starting at 1"));
        }
        Ok(())
    }

    pub fn combo(&self) -> Result<LinearCombination> {
        let comps = self
            .defects
            .iter()
            .map(|d| {
                Ok(Component {
                    weight: d.weight,
                    spec: GammaProcessSpec::new(d.alpha, d.xi, d.beta)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LinearCombination::new(comps)
    }

    pub fn cost_structure(&self) -> CostStructure {
        CostStructure {
            c_inspect: self.costs.inspect,
            fixed: self.defects.iter().map(|d| d.fixed_cost).collect(),
            variable_kind: self.costs.variable_kind,
            variable_rate: self.defects.iter().map(|d| d.variable_rate).collect(),
            c_threshold: self.costs.threshold,
            c_replace: self.costs.replace,
            budget: self.costs.budget,
        }
    }

    pub fn model(&self) -> Result<MaintenanceModel> {
        let model = MaintenanceModel {
            combo: self.combo()?,
            repair: self.repair,
            costs: self.cost_structure(),
            arrivals: self.arrivals,
            threshold: self.threshold,
        };
        model.validate()?;
        Ok(model)
    }
}
