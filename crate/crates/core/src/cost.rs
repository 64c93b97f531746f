//! Repair costs: the cost process `U(t) = Σ c_k X_k(t)`, its joint law with
//! the degradation `Y(t)`, and per-defect expected variable costs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degradation::{combo_moments, GammaProcessSpec, LinearCombination, MoschopoulosExpansion};
use crate::error::{ensure_non_negative, Error, Result};
use crate::quad::composite_legendre;

/// How the variable repair cost of a defect depends on its degradation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableCostKind {
    /// Flat `c_k` per defect.
    Constant,
    /// `c_k · y`.
    Linear,
    /// `c_k · y²`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostStructure {
    pub c_inspect: f64,
    pub fixed: Vec<f64>,
    pub variable_kind: VariableCostKind,
    pub variable_rate: Vec<f64>,
    pub c_threshold: f64,
    pub c_replace: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

impl CostStructure {
    /// Checks signs and that both per-defect lists have length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (what, got) in [
            ("fixed costs", self.fixed.len()),
            ("variable rates", self.variable_rate.len()),
        ] {
            if got != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        ensure_non_negative("inspection cost", self.c_inspect)?;
        ensure_non_negative("threshold cost", self.c_threshold)?;
        ensure_non_negative("replacement cost", self.c_replace)?;
        for &c in &self.fixed {
            ensure_non_negative("fixed cost", c)?;
        }
        for &c in &self.variable_rate {
            ensure_non_negative("variable cost rate", c)?;
        }
        if let Some(k) = self.budget {
            ensure_non_negative("budget", k)?;
        }
        Ok(())
    }

    fn require_linear(&self, n: usize) -> Result<()> {
        self.validate(n)?;
        match self.variable_kind {
            VariableCostKind::Linear => Ok(()),
            other => Err(Error::UnsupportedCostKind(other)),
        }
    }
}

/// The cost process `U(t)`: the same gamma processes weighted by `c_k`.
pub fn cost_combination(combo: &LinearCombination, costs: &CostStructure) -> Result<LinearCombination> {
    costs.require_linear(combo.len())?;
    combo.reweighted(&costs.variable_rate)
}

/// `Cov(Y(t), U(t)) = Σ b_k c_k α_k(t) β_k²`.
pub fn cov_yu(combo: &LinearCombination, costs: &CostStructure, t: f64) -> Result<f64> {
    costs.require_linear(combo.len())?;
    Ok(combo
        .components()
        .iter()
        .zip(&costs.variable_rate)
        .map(|(c, rate)| c.weight * rate * c.spec.shape_at(t) * c.spec.beta * c.spec.beta)
        .sum())
}

/// Log-modulus and argument of `Π_k (1 − i x_k)^{−a_k}`, principal branch.
#[inline]
fn cf_polar(terms: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    terms.fold((0.0, 0.0), |(m, p), (a, x)| {
        (m - 0.5 * a * (x * x).ln_1p(), p + a * x.atan())
    })
}

/// Characteristic function of `(Y(t), U(t))` at `(t1, t2)`.
pub fn joint_cf(
    combo: &LinearCombination,
    costs: &CostStructure,
    t: f64,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    costs.require_linear(combo.len())?;
    let (m, p) = cf_polar(
        combo
            .components()
            .iter()
            .zip(&costs.variable_rate)
            .map(|(c, rate)| (c.spec.shape_at(t), (c.weight * t1 + rate * t2) * c.spec.beta)),
    );
    Ok(Complex64::from_polar(m.exp(), p))
}

/// Controls for the two-dimensional Fourier inversion.
///
/// Frequencies are measured in standardized units: `t1 σ_Y` and `t2 σ_U`.
/// When the characteristic function has not dropped below `cf_tol` on the
/// circle of radius `max_radius`, a Gaussian window that equals `cf_tol` at the
/// boundary is applied instead of a hard cut. The result is then the density
/// smoothed by a narrow Gaussian kernel, which removes truncation ringing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Fixed truncation radius; `None` searches for one.
    pub radius: Option<f64>,
    pub max_radius: f64,
    pub cf_tol: f64,
    /// Minimum node count along each axis.
    pub initial_nodes: usize,
    pub max_doublings: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radius: None,
            max_radius: 400.0,
            cf_tol: 1e-8,
            initial_nodes: 256,
            max_doublings: 3,
            rel_tol: 1e-4,
        }
    }
}

const PANEL_ORDER: usize = 16;
const RIPPLE: f64 = 1e-6;

/// One evaluation of the conditional cost density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalDensity {
    pub density: f64,
    /// Inversion output before clamping.
    pub raw: f64,
    /// Small negative ripple was clamped to zero.
    pub clamped: bool,
    /// Negative beyond the ripple tolerance.
    pub warning: bool,
}

impl ConditionalDensity {
    fn from_raw(raw: f64) -> Self {
        Self {
            density: raw.max(0.0),
            raw,
            clamped: (-RIPPLE..0.0).contains(&raw),
            warning: raw < -RIPPLE,
        }
    }
}

/// Conditional density of `U(t)` given `Y(t) = y`, precomputed for one `y` so
/// that a sweep over `u` costs one pass over the outer nodes per point.
#[derive(Debug, Clone)]
pub struct ConditionalCostSlice {
    y: f64,
    marginal: f64,
    sigma_u: f64,
    prefactor: f64,
    t2_nodes: Vec<f64>,
    inner: Vec<Complex64>,
    radius: f64,
    smoothed: bool,
    doublings: usize,
}

struct Setup {
    shapes: Vec<f64>,
    /// Per component: (b_k β_k / σ_Y, c_k β_k / σ_U).
    coef: Vec<(f64, f64)>,
    sigma_y: f64,
    sigma_u: f64,
    freq1: f64,
    freq2: f64,
}

impl Setup {
    #[inline]
    fn cf(&self, s1: f64, s2: f64) -> Complex64 {
        let (m, p) = cf_polar(
            self.shapes
                .iter()
                .zip(&self.coef)
                .map(|(&a, &(p1, p2))| (a, p1 * s1 + p2 * s2)),
        );
        Complex64::from_polar(m.exp(), p)
    }

    fn boundary_max(&self, r: f64) -> f64 {
        (0..128)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / 128.0;
                self.cf(r * th.cos(), r * th.sin()).norm()
            })
            .fold(0.0, f64::max)
    }
}

impl ConditionalCostSlice {
    /// Builds the slice at `y`, resolving oscillations for `u ≤ u_max`.
    pub fn new(
        combo: &LinearCombination,
        costs: &CostStructure,
        t: f64,
        y: f64,
        u_max: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let probes: Vec<f64> = (1..=32).map(|i| u_max * i as f64 / 32.0).collect();
        Self::converged(combo, costs, t, y, u_max, &probes, spec)
    }

    fn converged(
        combo: &LinearCombination,
        costs: &CostStructure,
        t: f64,
        y: f64,
        u_max: f64,
        probes: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        crate::error::ensure_positive("conditioning time", t)?;
        crate::error::ensure_positive("conditioning level", y)?;
        crate::error::ensure_positive("cost upper bound", u_max)?;
        let ucombo = cost_combination(combo, costs)?;
        let marginal = MoschopoulosExpansion::new(combo, t, Default::default())?.pdf(y);
        if !(marginal >= 1e-300) {
            return Err(Error::Conditioning { density: marginal });
        }
        let my = combo_moments(combo, t);
        let mu = combo_moments(&ucombo, t);
        let (sigma_y, sigma_u) = (my.variance.sqrt(), mu.variance.sqrt());
        let setup = Setup {
            shapes: combo.components().iter().map(|c| c.spec.shape_at(t)).collect(),
            coef: combo
                .components()
                .iter()
                .zip(&costs.variable_rate)
                .map(|(c, r)| (c.weight * c.spec.beta / sigma_y, r * c.spec.beta / sigma_u))
                .collect(),
            sigma_y,
            sigma_u,
            freq1: (my.mean + y) / sigma_y,
            freq2: (mu.mean + u_max) / sigma_u,
        };
        let (radius, smoothed) = match spec.radius {
            Some(r) => (r, setup.boundary_max(r) >= spec.cf_tol),
            None => {
                let mut r = 4.0;
                while r < spec.max_radius && setup.boundary_max(r) >= spec.cf_tol {
                    r *= 2.0;
                }
                let r = r.min(spec.max_radius);
                (r, setup.boundary_max(r) >= spec.cf_tol)
            }
        };
        let mut previous = Self::build(&setup, y, marginal, radius, smoothed, 0, spec)?;
        let mut prev_vals: Vec<f64> = probes.iter().map(|&u| previous.raw(u)).collect();
        for level in 1..=spec.max_doublings {
            let next = Self::build(&setup, y, marginal, radius, smoothed, level, spec)?;
            let vals: Vec<f64> = probes.iter().map(|&u| next.raw(u)).collect();
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = vals
                .iter()
                .zip(&prev_vals)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if diff <= spec.rel_tol * scale.max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            previous = next;
            prev_vals = vals;
        }
        if spec.max_doublings == 0 {
            return Ok(previous);
        }
        Err(Error::Quadrature(format!(
            "conditional cost density at y = {y} did not settle after {} doublings",
            spec.max_doublings
        )))
    }

    fn build(
        setup: &Setup,
        y: f64,
        marginal: f64,
        radius: f64,
        smoothed: bool,
        level: usize,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let panels = |extent: f64, freq: f64| {
            let nodes = (1.5 * freq.max(1.0) * extent).ceil() as usize;
            let base = nodes.max(spec.initial_nodes).div_ceil(PANEL_ORDER);
            base << level
        };
        let r1 = composite_legendre(-radius, radius, panels(2.0 * radius, setup.freq1), PANEL_ORDER)?;
        let r2 = composite_legendre(0.0, radius, panels(radius, setup.freq2), PANEL_ORDER)?;
        let kappa2 = if smoothed {
            2.0 * (1.0 / spec.cf_tol).ln() / (radius * radius)
        } else {
            0.0
        };
        let window = |s1: f64, s2: f64| (-0.5 * kappa2 * (s1 * s1 + s2 * s2)).exp();
        let ys = y / setup.sigma_y;
        let outer: Vec<(f64, Complex64)> = r1
            .nodes
            .iter()
            .zip(&r1.weights)
            .map(|(&s1, &w)| (s1, Complex64::from_polar(w, -s1 * ys)))
            .collect();
        let inner: Vec<Complex64> = r2
            .nodes
            .par_iter()
            .zip(r2.weights.par_iter())
            .map(|(&s2, &w2)| {
                let acc: Complex64 = outer
                    .iter()
                    .map(|&(s1, e1)| e1 * setup.cf(s1, s2) * window(s1, s2))
                    .sum();
                acc * w2
            })
            .collect();
        Ok(Self {
            y,
            marginal,
            sigma_u: setup.sigma_u,
            prefactor: 1.0
                / (2.0 * std::f64::consts::PI.powi(2) * setup.sigma_y * setup.sigma_u * marginal),
            t2_nodes: r2.nodes,
            inner,
            radius,
            smoothed,
            doublings: level,
        })
    }

    fn raw(&self, u: f64) -> f64 {
        let us = u / self.sigma_u;
        let v: f64 = self
            .t2_nodes
            .iter()
            .zip(&self.inner)
            .map(|(&s2, a)| (a * Complex64::from_polar(1.0, -s2 * us)).re)
            .sum();
        v * self.prefactor
    }

    pub fn density(&self, u: f64) -> ConditionalDensity {
        ConditionalDensity::from_raw(self.raw(u))
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `g(y)`, the density of `Y(t)` used as the denominator.
    pub fn marginal(&self) -> f64 {
        self.marginal
    }

    /// Truncation radius in standardized frequency units.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether the Gaussian spectral window was applied.
    pub fn smoothed(&self) -> bool {
        self.smoothed
    }

    pub fn doublings(&self) -> usize {
        self.doublings
    }
}

/// Conditional density of `U(t)` at `u` given `Y(t) = y`.
pub fn conditional_cost_pdf(
    combo: &LinearCombination,
    costs: &CostStructure,
    t: f64,
    y: f64,
    u: f64,
    quad: &QuadratureSpec,
) -> Result<ConditionalDensity> {
    crate::error::ensure_positive("conditional cost", u)?;
    let slice = ConditionalCostSlice::converged(combo, costs, t, y, u, &[u], quad)?;
    Ok(slice.density(u))
}

/// Expected variable repair cost of one defect of type `spec` in cycle `j`,
/// whose degradation is `Gamma(α(T), β a2^{j−1})`.
pub fn expected_variable_cost(
    spec: &GammaProcessSpec,
    rate: f64,
    kind: VariableCostKind,
    j: usize,
    t: f64,
    a2_factor: f64,
) -> f64 {
    let shape = spec.shape_at(t);
    let growth = a2_factor.powi(j.saturating_sub(1) as i32);
    match kind {
        VariableCostKind::Constant => rate,
        VariableCostKind::Linear => rate * shape * spec.beta * growth,
        VariableCostKind::Quadratic => {
            rate * spec.beta * spec.beta * (shape + shape * shape) * growth * growth
        }
    }
}
