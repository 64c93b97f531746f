//! Unit-to-unit heterogeneity: a gamma random effect with a log-linear
//! covariate link, and the mixed-exponential law of defect inter-occurrence
//! times.
//!
//! Conditional on the effect `w`, each `X_k(t)` is `Gamma(α_k(t), β_{z,k}/w)`
//! with `β_{z,k} = β_k · exp(β′z)`. The effect is `Gamma(δ, rate γ)`.

use serde::{Deserialize, Serialize};

use crate::degradation::{ExpansionConfig, GammaProcessSpec, LinearCombination, MoschopoulosExpansion};
use crate::error::{ensure_positive, Error, Result};
use crate::quad::{gauss_laguerre, integrate_to_infinity};
use crate::special::{ln_gamma_unchecked, regularized_beta_split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomEffectModel {
    /// Rate γ of the effect distribution.
    pub gamma_param: f64,
    /// Shape δ of the effect distribution.
    pub delta_param: f64,
    #[serde(default)]
    pub covariate_coeffs: Vec<f64>,
    #[serde(default)]
    pub covariates: Vec<f64>,
}

impl RandomEffectModel {
    pub fn new(gamma_param: f64, delta_param: f64) -> Result<Self> {
        let model = Self {
            gamma_param,
            delta_param,
            covariate_coeffs: Vec::new(),
            covariates: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_covariates(mut self, coeffs: Vec<f64>, covariates: Vec<f64>) -> Result<Self> {
        self.covariate_coeffs = coeffs;
        self.covariates = covariates;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("random effect gamma", self.gamma_param)?;
        ensure_positive("random effect delta", self.delta_param)?;
        if self.covariate_coeffs.len() != self.covariates.len() {
            return Err(Error::DimensionMismatch {
                what: "covariates vs coefficients",
                expected: self.covariate_coeffs.len(),
                got: self.covariates.len(),
            });
        }
        for &v in self.covariate_coeffs.iter().chain(&self.covariates) {
            if !v.is_finite() {
                return Err(Error::Domain {
                    what: "covariate entry",
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Mean δ/γ and variance δ/γ² of the effect.
    pub fn effect_moments(&self) -> (f64, f64) {
        let g = self.gamma_param;
        (self.delta_param / g, self.delta_param / (g * g))
    }

    fn link(&self) -> f64 {
        self.covariate_coeffs
            .iter()
            .zip(&self.covariates)
            .map(|(b, z)| b * z)
            .sum::<f64>()
            .exp()
    }
}

/// The covariate link `exp(β′z)`. Applied to a process, it multiplies the
/// scale, so `z = 0` leaves `base_spec` unchanged.
pub fn covariate_scale(model: &RandomEffectModel, base_spec: &GammaProcessSpec) -> Result<f64> {
    model.validate()?;
    base_spec.validate()?;
    Ok(model.link())
}

/// `base_spec` with its scale replaced by `β_{z,k} = β_k exp(β′z)`.
pub fn covariate_spec(model: &RandomEffectModel, base_spec: &GammaProcessSpec) -> Result<GammaProcessSpec> {
    Ok(base_spec.rescaled(covariate_scale(model, base_spec)?))
}

/// Joint density of `(X_1(t), …, X_n(t))` with the effect integrated out.
pub fn mixed_joint_density(
    model: &RandomEffectModel,
    specs: &[GammaProcessSpec],
    t: f64,
    x: &[f64],
) -> Result<f64> {
    ensure_positive("time", t)?;
    if specs.len() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "density arguments vs process specs",
            expected: specs.len(),
            got: x.len(),
        });
    }
    let link = covariate_scale(model, specs.first().ok_or(Error::DimensionMismatch {
        what: "process specs",
        expected: 1,
        got: 0,
    })?)?;
    let (g, d) = (model.gamma_param, model.delta_param);
    let mut rho = 0.0;
    let mut rate_sum = g;
    let mut ln_f = d * g.ln() - ln_gamma_unchecked(d);
    for (spec, &xk) in specs.iter().zip(x) {
        spec.validate()?;
        ensure_positive("density argument", xk)?;
        let a = spec.shape_at(t);
        let bz = spec.beta * link;
        rho += a;
        rate_sum += xk / bz;
        ln_f += (a - 1.0) * xk.ln() - a * bz.ln() - ln_gamma_unchecked(a);
    }
    ln_f += ln_gamma_unchecked(d + rho) - (d + rho) * rate_sum.ln();
    Ok(ln_f.exp())
}

/// `P(Y(t) ≥ L)` under the random effect, by two independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedHitting {
    /// Average of the conditional survival over the effect: Gauss–Laguerre,
    /// or adaptive when the Laguerre rule has not settled by its node cap.
    pub quadrature: f64,
    /// Mixture series with incomplete-beta terms `I_{γ/(γ+L/β₀)}(δ, ρ+k)`.
    pub series: f64,
    /// Laguerre nodes in the last rule tried.
    pub nodes: usize,
    pub adaptive: bool,
}

const MIX_NODES_START: usize = 16;
const MIX_NODES_MAX: usize = 1024;
const MIX_REL_TOL: f64 = 1e-8;

/// Hitting probability of level `L` by time `t` for a unit drawn from the
/// random-effect population.
pub fn mixed_hitting_prob(
    model: &RandomEffectModel,
    combo: &LinearCombination,
    level: f64,
    t: f64,
) -> Result<MixedHitting> {
    ensure_positive("threshold", level)?;
    ensure_positive("time", t)?;
    let link = covariate_scale(model, &combo.components()[0].spec)?;
    let exp = MoschopoulosExpansion::new(&combo.rescaled(link), t, ExpansionConfig::default())?;
    let (g, d) = (model.gamma_param, model.delta_param);

    // Given w the scales are β_z / w, so P(Y ≥ L | w) = S_z(L w); v = γ w is
    // Gamma(δ, 1).
    let avg = |n: usize| -> Result<f64> {
        let rule = gauss_laguerre(n, d - 1.0)?;
        let mut acc = 0.0;
        for (&v, &wt) in rule.nodes.iter().zip(&rule.weights) {
            acc += wt * exp.survival(level * v / g)?;
        }
        Ok(acc.clamp(0.0, 1.0))
    };
    let mut n = MIX_NODES_START;
    let mut prev = avg(n)?;
    let mut adaptive = false;
    let quadrature = loop {
        if n >= MIX_NODES_MAX {
            // Short times put a logarithmic kink in S_z at the origin.
            adaptive = true;
            break effect_average_adaptive(&exp, level / g, d, MIX_REL_TOL * prev.abs())?;
        }
        n *= 2;
        let next = avg(n)?;
        if (next - prev).abs() <= MIX_REL_TOL * next.abs().max(1e-12) {
            break next;
        }
        prev = next;
    };

    let c = level / exp.beta0();
    let (x, y) = (g / (g + c), c / (g + c));
    let mut series = 0.0;
    for (k, &p) in exp.weights().iter().enumerate() {
        if p > 0.0 {
            series += p * regularized_beta_split(x, y, d, exp.rho() + k as f64)?;
        }
    }
    Ok(MixedHitting {
        quadrature,
        series: series.clamp(0.0, 1.0),
        nodes: n,
        adaptive,
    })
}

/// `E[S(c v)]` for `v ~ Gamma(d, 1)` by adaptive integration in `s = v^{1/m}`,
/// with `m d ≥ 2` so the integrand vanishes at the origin.
fn effect_average_adaptive(exp: &MoschopoulosExpansion, c: f64, d: f64, tol: f64) -> Result<f64> {
    let m = (2.0 / d).ceil().max(1.0);
    let ln_norm = m.ln() - ln_gamma_unchecked(d);
    let failure = std::cell::Cell::new(None);
    let value = integrate_to_infinity(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let v = s.powf(m);
            match exp.survival(c * v) {
                Ok(sv) => sv * (ln_norm + (m * d - 1.0) * s.ln() - v).exp(),
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        0.0,
        tol.max(f64::MIN_POSITIVE),
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value.clamp(0.0, 1.0)),
    }
}

/// Which constant appears in the exponential factor of the arrival-rate
/// mixing density.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingExponent {
    /// `e^{−ν/λ}`, as printed.
    #[default]
    Nu,
    /// `e^{−μ/λ}`, the variant that normalizes for `μ ≠ ν`.
    Mu,
}

/// Defect arrivals: mean inter-occurrence time `rate` (λ) and the parameters
/// (μ, ν) of the inverse-gamma mixing law used for the joint density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    pub rate: f64,
    pub mix_mu: f64,
    pub mix_nu: f64,
    #[serde(default)]
    pub mixing_exponent: MixingExponent,
}

impl ArrivalModel {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("arrival rate", self.rate)?;
        ensure_positive("mixing mu", self.mix_mu)?;
        ensure_positive("mixing nu", self.mix_nu)?;
        Ok(())
    }

    /// Constant in the `e^{−c/λ}` factor of the mixing density.
    pub fn exponent_constant(&self) -> f64 {
        match self.mixing_exponent {
            MixingExponent::Nu => self.mix_nu,
            MixingExponent::Mu => self.mix_mu,
        }
    }

    /// Mixing density of the mean inter-occurrence time at `lambda`.
    pub fn mixing_pdf(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let nu = self.mix_nu;
        (nu * self.mix_mu.ln() - ln_gamma_unchecked(nu) - (nu + 1.0) * lambda.ln()
            - self.exponent_constant() / lambda)
            .exp()
    }
}

/// Joint density of the inter-occurrence times `T_1, …, T_n`, exponential
/// given λ with λ mixed over the inverse-gamma law.
pub fn arrival_joint_pdf(model: &ArrivalModel, times: &[f64]) -> Result<f64> {
    model.validate()?;
    let mut total = 0.0;
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain {
                what: "inter-occurrence time",
                value: t,
            });
        }
        total += t;
    }
    let n = times.len() as f64;
    let nu = model.mix_nu;
    let s = n + nu;
    Ok((nu * model.mix_mu.ln() + ln_gamma_unchecked(s)
        - ln_gamma_unchecked(nu)
        - s * (model.exponent_constant() + total).ln())
    .exp())
}
