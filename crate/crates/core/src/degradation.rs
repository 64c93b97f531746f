//! Gamma degradation processes and their weighted sum.
//!
//! Each defect type degrades as a gamma process `X_k(t) ~ Gamma(α_k t^{ξ_k}, β_k)`
//! (shape, scale). The overall degradation is `Y(t) = Σ b_k X_k(t)`. Its law is
//! a gamma mixture
//!
//! ```text
//! g(y) = Σ_k p_k · Gamma(y; ρ(t) + k, β₀),   p_k = D(t) ζ_k,
//! β₀ = min_k b_k β_k,   ρ(t) = Σ_k α_k(t),   D(t) = Π_k (β₀ / (b_k β_k))^{α_k(t)},
//! η_m = Σ_j α_j(t) (1 − β₀/(b_j β_j))^m / m,
//! ζ_0 = 1,   ζ_{k+1} = (1/(k+1)) Σ_{j=1}^{k+1} j η_j ζ_{k+1−j}.
//! ```
//!
//! The series is truncated once the accumulated mixture mass reaches
//! `1 − tail_tol`. The recursion is run on a rescaled copy of ζ with a running
//! log-scale, so `D(t)` may underflow and `ζ_k` may overflow without affecting
//! the mixture weights `p_k`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::special::{gamma_tails, ln_gamma_unchecked, GammaSampler, RngStream};

/// Degradation law of one defect type: shape `alpha · t^xi`, scale `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaProcessSpec {
    pub alpha: f64,
    pub xi: f64,
    pub beta: f64,
}

impl GammaProcessSpec {
    pub fn new(alpha: f64, xi: f64, beta: f64) -> Result<Self> {
        let spec = Self { alpha, xi, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("process alpha", self.alpha)?;
        ensure_positive("process xi", self.xi)?;
        ensure_positive("process beta", self.beta)?;
        Ok(())
    }

    /// Shape function α(t) = alpha · t^xi.
    pub fn shape_at(&self, t: f64) -> f64 {
        self.alpha * t.powf(self.xi)
    }

    /// Same process with scale multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            beta: self.beta * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub spec: GammaProcessSpec,
}

/// Weighted sum `Σ b_k X_k(t)` of independent gamma processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Component>", into = "Vec<Component>")]
pub struct LinearCombination {
    components: Vec<Component>,
}

impl LinearCombination {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "linear combination components",
                expected: 1,
                got: 0,
            });
        }
        for c in &components {
            ensure_non_negative("combination weight", c.weight)?;
            c.spec.validate()?;
        }
        if components.iter().all(|c| c.weight == 0.0) {
            return Err(Error::Domain {
                what: "combination weights (all zero)",
                value: 0.0,
            });
        }
        Ok(Self { components })
    }

    pub fn from_parts(weights: &[f64], specs: &[GammaProcessSpec]) -> Result<Self> {
        if weights.len() != specs.len() {
            return Err(Error::DimensionMismatch {
                what: "weights vs process specs",
                expected: specs.len(),
                got: weights.len(),
            });
        }
        Self::new(
            weights
                .iter()
                .zip(specs)
                .map(|(&weight, &spec)| Component { weight, spec })
                .collect(),
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn specs(&self) -> Vec<GammaProcessSpec> {
        self.components.iter().map(|c| c.spec).collect()
    }

    /// Same combination with every scale `β_k` multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component {
                    weight: c.weight,
                    spec: c.spec.rescaled(factor),
                })
                .collect(),
        }
    }

    /// Same processes under new weights.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self> {
        Self::from_parts(weights, &self.specs())
    }
}

impl TryFrom<Vec<Component>> for LinearCombination {
    type Error = Error;

    fn try_from(components: Vec<Component>) -> Result<Self> {
        Self::new(components)
    }
}

impl From<LinearCombination> for Vec<Component> {
    fn from(combo: LinearCombination) -> Self {
        combo.components
    }
}

pub(crate) fn ln_gamma_pdf_unchecked(x: f64, shape: f64, scale: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - ln_gamma_unchecked(shape)
}

/// Gamma density with the given shape and scale; zero for `x ≤ 0`.
pub fn gamma_pdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma scale", scale)?;
    if x.is_nan() {
        return Err(Error::Domain {
            what: "gamma pdf argument",
            value: x,
        });
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(ln_gamma_pdf_unchecked(x, shape, scale).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of `Y(t)`.
pub fn combo_moments(combo: &LinearCombination, t: f64) -> Moments {
    let (mean, variance) = combo.components.iter().fold((0.0, 0.0), |(m, v), c| {
        let shape = c.spec.shape_at(t);
        let s = c.weight * c.spec.beta;
        (m + s * shape, v + s * s * shape)
    });
    Moments { mean, variance }
}

/// Truncation controls for the mixture series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub tail_tol: f64,
    pub max_terms: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-10,
            max_terms: 100_000,
        }
    }
}

/// Truncated gamma-mixture representation of `Y(t)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct MoschopoulosExpansion {
    beta0: f64,
    ln_d: f64,
    rho: f64,
    eta: Vec<f64>,
    /// Mixture weights p_k = D(t) ζ_k.
    weights: Vec<f64>,
    /// ζ_k / e^{ln_scale}, kept for reporting.
    zeta_scaled: Vec<f64>,
    ln_scale: f64,
    tail_tol: f64,
}

const RESCALE_AT: f64 = 1e200;

impl MoschopoulosExpansion {
    pub fn new(combo: &LinearCombination, t: f64, config: ExpansionConfig) -> Result<Self> {
        ensure_positive("expansion time", t)?;
        ensure_positive("expansion tail tolerance", config.tail_tol)?;
        let terms: Vec<(f64, f64)> = combo
            .components
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| (c.spec.shape_at(t), c.weight * c.spec.beta))
            .filter(|&(shape, _)| shape > 0.0)
            .collect();
        if terms.is_empty() {
            return Err(Error::Domain {
                what: "expansion time (all shapes vanish)",
                value: t,
            });
        }
        let beta0 = terms.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
        let rho: f64 = terms.iter().map(|&(a, _)| a).sum();
        let ln_d: f64 = terms.iter().map(|&(a, s)| a * (beta0 / s).ln()).sum();
        // Components at the minimum scale contribute nothing to η.
        let ratios: Vec<(f64, f64)> = terms
            .iter()
            .map(|&(a, s)| (a, 1.0 - beta0 / s))
            .filter(|&(_, q)| q > 0.0)
            .collect();
        let mut powers: Vec<f64> = vec![1.0; ratios.len()];

        let mut eta: Vec<f64> = Vec::new();
        let mut scaled = vec![1.0];
        let mut ln_scale = 0.0;
        let mut mass = ln_d.exp();
        while mass < 1.0 - config.tail_tol {
            let k = scaled.len() - 1;
            if k + 1 >= config.max_terms || ratios.is_empty() {
                return Err(Error::Truncation {
                    achieved_mass: mass,
                    terms: k + 1,
                });
            }
            let m = (k + 1) as f64;
            let mut next_eta = 0.0;
            for ((a, q), pw) in ratios.iter().zip(powers.iter_mut()) {
                *pw *= q;
                next_eta += a * *pw;
            }
            eta.push(next_eta / m);
            // ζ_{k+1} = (1/(k+1)) Σ_{j=1}^{k+1} j η_j ζ_{k+1−j}
            let mut acc = 0.0;
            for j in 1..=k + 1 {
                acc += j as f64 * eta[j - 1] * scaled[k + 1 - j];
            }
            let next = acc / m;
            scaled.push(next);
            if next > RESCALE_AT {
                for v in scaled.iter_mut() {
                    *v /= RESCALE_AT;
                }
                ln_scale += RESCALE_AT.ln();
            }
            let last = *scaled.last().expect("non-empty");
            if last > 0.0 {
                mass += (ln_d + ln_scale + last.ln()).exp();
            }
            if !mass.is_finite() {
                return Err(Error::Truncation {
                    achieved_mass: mass,
                    terms: scaled.len(),
                });
            }
        }
        let weights = scaled
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    (ln_d + ln_scale + v.ln()).exp()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            beta0,
            ln_d,
            rho,
            eta,
            weights,
            zeta_scaled: scaled,
            ln_scale,
            tail_tol: config.tail_tol,
        })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// D(t); may underflow to zero for long horizons, see [`Self::ln_big_d`].
    pub fn big_d(&self) -> f64 {
        self.ln_d.exp()
    }

    pub fn ln_big_d(&self) -> f64 {
        self.ln_d
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// η_1, η_2, … up to the truncation index.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Mixture weights D(t) ζ_k, k = 0..=K.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ζ_0, …, ζ_K. Entries overflow to infinity when D(t) is tiny.
    pub fn zeta(&self) -> Vec<f64> {
        let factor = self.ln_scale.exp();
        self.zeta_scaled.iter().map(|v| v * factor).collect()
    }

    pub fn truncation_k(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Retained mixture mass D(t) Σ_{k≤K} ζ_k.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mixture mass beyond the truncation point. Its terms have shapes above
    /// the last retained one, so tail probabilities assign it the last
    /// retained term's tail, which bounds the omitted contribution.
    fn dropped_mass(&self) -> f64 {
        (1.0 - self.mass()).max(0.0)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let ln_y = y.ln();
        let ln_b = self.beta0.ln();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| {
                let shape = self.rho + k as f64;
                (p.ln() + (shape - 1.0) * ln_y - y / self.beta0 - shape * ln_b
                    - ln_gamma_unchecked(shape))
                .exp()
            })
            .sum()
    }

    /// Upper tails Q(ρ + k, x) for k = 0..=K via the upward recurrence
    /// Q(s + 1, x) = Q(s, x) + x^s e^{−x} / Γ(s + 1).
    fn upper_tails(&self, x: f64) -> Result<Vec<f64>> {
        let n = self.weights.len();
        let mut out = Vec::with_capacity(n);
        let mut q = gamma_tails(self.rho, x)?.q;
        out.push(q);
        if x == 0.0 {
            out.resize(n, 1.0);
            return Ok(out);
        }
        let ln_x = x.ln();
        for k in 1..n {
            let s = self.rho + (k - 1) as f64;
            q += (s * ln_x - x - ln_gamma_unchecked(s + 1.0)).exp();
            out.push(q.min(1.0));
        }
        Ok(out)
    }

    /// P(Y ≥ level).
    pub fn survival(&self, level: f64) -> Result<f64> {
        ensure_non_negative("survival level", level)?;
        let tails = self.upper_tails(level / self.beta0)?;
        let retained: f64 = self.weights.iter().zip(&tails).map(|(p, q)| p * q).sum();
        Ok((retained + self.dropped_mass() * tails[tails.len() - 1]).min(1.0))
    }

    /// P(Y ≤ y), accurate in absolute terms.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        ensure_non_negative("cdf argument", y)?;
        let tails = self.upper_tails(y / self.beta0)?;
        let retained: f64 = self.weights.iter().zip(&tails).map(|(p, q)| p * (1.0 - q)).sum();
        Ok((retained + self.dropped_mass() * (1.0 - tails[tails.len() - 1])).clamp(0.0, 1.0))
    }
}

/// Builds the mixture series of `Y(t)` with the default term cap.
pub fn moschopoulos_expand(
    combo: &LinearCombination,
    t: f64,
    tail_tol: f64,
) -> Result<MoschopoulosExpansion> {
    MoschopoulosExpansion::new(
        combo,
        t,
        ExpansionConfig {
            tail_tol,
            ..ExpansionConfig::default()
        },
    )
}

pub fn overall_pdf(expansion: &MoschopoulosExpansion, y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::Domain {
            what: "density argument",
            value: y,
        });
    }
    Ok(expansion.pdf(y))
}

pub fn overall_survival(expansion: &MoschopoulosExpansion, level: f64) -> Result<f64> {
    expansion.survival(level)
}

/// CDF of the first time `Y` reaches `level`: P(σ_L ≤ t) = P(Y(t) ≥ L).
pub fn hitting_cdf(combo: &LinearCombination, level: f64, t: f64) -> Result<f64> {
    hitting_cdf_with(combo, level, t, ExpansionConfig::default())
}

pub fn hitting_cdf_with(
    combo: &LinearCombination,
    level: f64,
    t: f64,
    config: ExpansionConfig,
) -> Result<f64> {
    ensure_positive("hitting level", level)?;
    ensure_positive("hitting time", t)?;
    MoschopoulosExpansion::new(combo, t, config)?.survival(level)
}

/// One draw of `Y(t)`.
pub fn sample_overall(combo: &LinearCombination, t: f64, rng: &mut RngStream) -> f64 {
    combo
        .components
        .iter()
        .map(|c| {
            let shape = c.spec.shape_at(t);
            if shape > 0.0 && c.weight > 0.0 {
                let sampler = GammaSampler::new(shape, c.spec.beta).expect("validated spec");
                c.weight * sampler.sample(rng)
            } else {
                0.0
            }
        })
        .sum()
}
