//! The budget-feasible region `{(N, T) : CV(N, T) ≤ K}` and the grid optimizer.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{cv, q0};
use super::{MaintenanceModel, PolicySpec};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Finite stand-ins for `T → 0` and `T → ∞`.
pub const T_LIMIT_LOW: f64 = 1e-4;
pub const T_LIMIT_HIGH: f64 = 1e3;

const ROOT_REL_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 1e-4;

/// Boundary of the feasible region when it is neither empty nor everything.
///
/// Every `N < n1` is feasible at all `T`; `n1 ≤ N < n2` is feasible for
/// `T ≤ boundary[N]`; `N ≥ n2` is infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleSet {
    pub budget: f64,
    pub n1: usize,
    pub n2: usize,
    pub boundary: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FeasibleOutcome {
    /// Even `N = 1` exceeds the budget as `T → 0`.
    Empty,
    /// The budget never binds up to `n_max`.
    Unconstrained,
    Bounded(FeasibleSet),
}

impl FeasibleOutcome {
    /// Largest feasible `T` at `n`: `Some(None)` when unbounded, `None` when
    /// no `T` is feasible.
    pub fn t_upper(&self, n: usize) -> Option<Option<f64>> {
        match self {
            FeasibleOutcome::Empty => None,
            FeasibleOutcome::Unconstrained => Some(None),
            FeasibleOutcome::Bounded(set) if n < set.n1 => Some(None),
            FeasibleOutcome::Bounded(set) => set.boundary.get(&n).map(|&t| Some(t)),
        }
    }
}

fn cv_at(model: &MaintenanceModel, n: usize, t: f64) -> Result<f64> {
    cv(model, &PolicySpec::new(n, t)?)
}

/// Locates `N₁`, `N₂` and the boundary roots `T_N*` for budget `K`.
pub fn feasible_set(model: &MaintenanceModel, budget: f64, n_max: usize) -> Result<FeasibleOutcome> {
    ensure_non_negative("budget", budget)?;
    if n_max == 0 {
        return Err(Error::Domain {
            what: "n_max",
            value: 0.0,
        });
    }
    let low1 = cv_at(model, 1, T_LIMIT_LOW)?;
    if low1 > cv_at(model, 1, T_LIMIT_HIGH)? {
        return Err(Error::UnsupportedModel(
            "budget boundary needs the variable-cost rate to increase in T",
        ));
    }
    if low1 > budget {
        return Ok(FeasibleOutcome::Empty);
    }
    let mut n1 = None;
    for n in 1..=n_max {
        if cv_at(model, n, T_LIMIT_HIGH)? > budget {
            n1 = Some(n);
            break;
        }
    }
    let Some(n1) = n1 else {
        return Ok(FeasibleOutcome::Unconstrained);
    };
    let mut n2 = n_max + 1;
    for n in n1..=n_max {
        if cv_at(model, n, T_LIMIT_LOW)? > budget {
            n2 = n;
            break;
        }
    }
    let boundary = (n1..n2)
        .map(|n| Ok((n, boundary_root(model, n, budget)?)))
        .collect::<Result<_>>()?;
    Ok(FeasibleOutcome::Bounded(FeasibleSet {
        budget,
        n1,
        n2,
        boundary,
    }))
}

/// Bisection in `log T` for `CV(n, T) = K`; returns the feasible end.
fn boundary_root(model: &MaintenanceModel, n: usize, budget: f64) -> Result<f64> {
    let (mut lo, mut hi) = (T_LIMIT_LOW, T_LIMIT_HIGH);
    while hi / lo - 1.0 > ROOT_REL_TOL {
        let mid = (lo * hi).sqrt();
        if cv_at(model, n, mid)? > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

/// Search grid: `t_count` equally spaced `T` values on `[t_lo, t_hi]` and
/// `N = 1..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_count: usize,
    pub n_max: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("grid t_lo", self.t_lo)?;
        if !(self.t_hi >= self.t_lo) || self.t_count == 0 || self.n_max == 0 {
            return Err(Error::Config {
                field: "grid".into(),
                message: format!(
                    "need 0 < t_lo ≤ t_hi and positive counts, got {}:{}:{} with n_max {}",
                    self.t_lo, self.t_hi, self.t_count, self.n_max
                ),
            });
        }
        if self.t_count == 1 && self.t_hi != self.t_lo {
            return Err(Error::Config {
                field: "grid".into(),
                message: "a single T point needs t_lo = t_hi".into(),
            });
        }
        Ok(())
    }

    pub fn t_values(&self) -> Vec<f64> {
        if self.t_count == 1 {
            return vec![self.t_lo];
        }
        let step = (self.t_hi - self.t_lo) / (self.t_count - 1) as f64;
        (0..self.t_count)
            .map(|i| {
                if i + 1 == self.t_count {
                    self.t_hi
                } else {
                    self.t_lo + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub n: usize,
    pub t: f64,
    pub q0: f64,
    pub cv: f64,
    pub feasible: bool,
}

/// `Q₀` and `CV` on every grid cell, in `(N, T)` row-major order.
pub fn cost_surface(model: &MaintenanceModel, grid: &GridSpec, budget: Option<f64>) -> Result<Vec<SurfaceCell>> {
    grid.validate()?;
    let ts = grid.t_values();
    let cells: Vec<(usize, f64)> = (1..=grid.n_max)
        .flat_map(|n| ts.iter().map(move |&t| (n, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(n, t)| {
            let p = PolicySpec::new(n, t)?;
            let cv = cv(model, &p)?;
            Ok(SurfaceCell {
                n,
                t,
                q0: q0(model, &p)?,
                cv,
                feasible: budget.is_none_or(|k| cv <= k),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOptimum {
    pub n_opt: usize,
    pub t_opt: f64,
    pub q0: f64,
    pub cv: f64,
    pub constrained: bool,
    /// Best grid cell before refinement.
    pub grid_t: f64,
    pub grid_q0: f64,
    pub feasible: Option<FeasibleOutcome>,
}

/// Minimizes `Q₀` over the grid, optionally subject to `CV ≤ K`, then refines
/// `T` at the winning `N` by golden-section search between the neighbouring
/// candidates. When constrained, each `N` also tries its boundary root `T_N*`
/// if it lies inside the grid range.
pub fn optimize(model: &MaintenanceModel, grid: &GridSpec, budget: Option<f64>) -> Result<PolicyOptimum> {
    model.validate()?;
    grid.validate()?;
    let ts = grid.t_values();
    let feasible = budget.map(|k| feasible_set(model, k, grid.n_max)).transpose()?;

    let mut candidates: Vec<(usize, Vec<f64>)> = Vec::with_capacity(grid.n_max);
    for n in 1..=grid.n_max {
        let upper = match &feasible {
            None => Some(None),
            Some(outcome) => outcome.t_upper(n),
        };
        let list = match upper {
            None => Vec::new(),
            Some(None) => ts.clone(),
            Some(Some(root)) => {
                let mut v: Vec<f64> = ts.iter().copied().filter(|&t| t <= root).collect();
                if (grid.t_lo..=grid.t_hi).contains(&root) && v.last() != Some(&root) {
                    v.push(root);
                }
                v
            }
        };
        if !list.is_empty() {
            candidates.push((n, list));
        }
    }
    if candidates.is_empty() {
        return Err(Error::Infeasible(format!(
            "no grid policy satisfies the budget {}",
            budget.unwrap_or(f64::INFINITY)
        )));
    }

    let cells: Vec<(usize, usize, f64)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(ci, (_, list))| list.iter().enumerate().map(move |(ti, &t)| (ci, ti, t)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(ci, _, t)| q0(model, &PolicySpec::new(candidates[ci].0, t)?))
        .collect::<Result<_>>()?;
    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty");
    let (ci, ti, grid_t) = cells[best];
    let grid_q0 = values[best];
    let (n_opt, list) = &candidates[ci];
    let n_opt = *n_opt;

    let lo = if ti > 0 { list[ti - 1] } else { list[ti] };
    let hi = if ti + 1 < list.len() { list[ti + 1] } else { list[ti] };
    let (mut t_opt, mut q_opt) = (grid_t, grid_q0);
    if hi > lo {
        let f = |t: f64| q0(model, &PolicySpec::new(n_opt, t)?);
        let (t, q) = golden_section(f, lo, hi, GOLDEN_TOL)?;
        if q < q_opt {
            t_opt = t;
            q_opt = q;
        }
    }
    let cv = cv(model, &PolicySpec::new(n_opt, t_opt)?)?;
    Ok(PolicyOptimum {
        n_opt,
        t_opt,
        q0: q_opt,
        cv,
        constrained: budget.is_some(),
        grid_t,
        grid_q0,
        feasible,
    })
}

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_hit_both_ends() {
        let g = GridSpec {
            t_lo: 1.0,
            t_hi: 7.0,
            t_count: 10,
            n_max: 8,
        };
        let ts = g.t_values();
        assert_eq!(ts.len(), 10);
        assert_eq!(ts[0], 1.0);
        assert_eq!(ts[9], 7.0);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (t, v) = golden_section(|x| Ok((x - 1.3).powi(2) + 2.0), 0.0, 4.0, 1e-8).unwrap();
        assert!((t - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
