//! Periodic inspection with imperfect repair, replaced after `N` cycles.
//!
//! Each inspection cycle has length `T`. In cycle `j` the expected defect
//! count per type is `a₁(T)^{j−1}/λ` and defect scales grow to
//! `β_k a₂(T)^{j−1}`, a geometric process in both the arrival and the
//! degradation dimension.

mod feasible;
mod objective;

pub use feasible::{
    cost_surface, feasible_set, optimize, FeasibleOutcome, FeasibleSet, GridSpec, PolicyOptimum,
    SurfaceCell, T_LIMIT_HIGH, T_LIMIT_LOW,
};
pub use objective::{
    cv, cv_closed, q0, q0_breakdown, q0_reduced, replacement_bound, replacement_worthwhile,
    stationarity_residual, CostBreakdown,
};

use serde::{Deserialize, Serialize};

use crate::cost::CostStructure;
use crate::degradation::{hitting_cdf, LinearCombination};
use crate::error::{ensure_positive, Error, Result};
use crate::heterogeneity::ArrivalModel;

/// Functional form of a repair factor `a(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RepairFactor {
    Constant { value: f64 },
    /// `scale · (level − dip · e^{−T})`.
    ScaledExpSaturation { scale: f64, level: f64, dip: f64 },
}

impl RepairFactor {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RepairFactor::Constant { value } => ensure_positive("repair factor", value).map(drop),
            RepairFactor::ScaledExpSaturation { scale, level, dip } => {
                ensure_positive("repair factor scale", scale)?;
                ensure_positive("repair factor level", level)?;
                if !(dip >= 0.0 && dip <= level) {
                    return Err(Error::Model(format!(
                        "saturation dip {dip} must lie in [0, level = {level}]"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let v = match *self {
            RepairFactor::Constant { value } => value,
            RepairFactor::ScaledExpSaturation { scale, level, dip } => {
                scale * (level - dip * (-t).exp())
            }
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Model(format!("repair factor {v} at T = {t} is not positive")))
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, RepairFactor::Constant { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// Arrival growth `a₁`.
    A1,
    /// Degradation-scale growth `a₂`.
    A2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairModel {
    pub a1: RepairFactor,
    pub a2: RepairFactor,
}

impl RepairModel {
    pub fn constant(a1: f64, a2: f64) -> Self {
        Self {
            a1: RepairFactor::Constant { value: a1 },
            a2: RepairFactor::Constant { value: a2 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.a1.validate()?;
        self.a2.validate()
    }
}

pub fn repair_factor(model: &RepairModel, which: Factor, t: f64) -> Result<f64> {
    ensure_positive("inspection interval", t)?;
    match which {
        Factor::A1 => model.a1.at(t),
        Factor::A2 => model.a2.at(t),
    }
}

/// Everything the policy economics depend on apart from `(N, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceModel {
    pub combo: LinearCombination,
    pub repair: RepairModel,
    pub costs: CostStructure,
    pub arrivals: ArrivalModel,
    /// Special-maintenance threshold `L` on the overall degradation.
    pub threshold: f64,
}

impl MaintenanceModel {
    pub fn validate(&self) -> Result<()> {
        self.repair.validate()?;
        self.costs.validate(self.combo.len())?;
        self.arrivals.validate()?;
        ensure_positive("threshold", self.threshold)?;
        Ok(())
    }

    pub fn factors(&self, t: f64) -> Result<(f64, f64)> {
        Ok((
            repair_factor(&self.repair, Factor::A1, t)?,
            repair_factor(&self.repair, Factor::A2, t)?,
        ))
    }
}

/// A maintenance policy: inspect every `T`, replace at the `N`-th inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub inspection_interval: f64,
    pub replacement_count: usize,
}

impl PolicySpec {
    pub fn new(replacement_count: usize, inspection_interval: f64) -> Result<Self> {
        let p = Self {
            inspection_interval,
            replacement_count,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("inspection interval", self.inspection_interval)?;
        if self.replacement_count == 0 {
            return Err(Error::Domain {
                what: "replacement count",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// `F^{(j)}(T)`: probability that the degradation accumulated over cycle `j`
/// reaches `level`, with all scales multiplied by `a₂(T)^{j−1}`.
pub fn maintained_hitting_cdf(
    combo: &LinearCombination,
    model: &RepairModel,
    level: f64,
    j: usize,
    t: f64,
) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain {
            what: "cycle index",
            value: 0.0,
        });
    }
    let a2 = repair_factor(model, Factor::A2, t)?;
    let scaled = combo.rescaled(a2.powi(j as i32 - 1));
    hitting_cdf(&scaled, level, t)
}
