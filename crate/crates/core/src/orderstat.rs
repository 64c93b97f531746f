//! r-out-of-n monitoring of i.i.d. component degradations.
//!
//! Each component follows `Y_k(t) = b X_k(t)` with `X_k` i.i.d. gamma
//! processes, so the marginal is `Gamma(α(t), bβ)`. The monitor fires once at
//! least `r` of the `n` components exceed `L₂`.

use serde::{Deserialize, Serialize};

use crate::degradation::GammaProcessSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::special::{gamma_cdf, gamma_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderStatMonitor {
    pub n: usize,
    pub r: usize,
    pub common_spec: GammaProcessSpec,
    pub weight: f64,
    pub threshold: f64,
}

impl OrderStatMonitor {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.r == 0 || self.r > self.n {
            return Err(Error::Config {
                field: "orderstat".into(),
                message: format!("need 1 ≤ r ≤ n, got r = {}, n = {}", self.r, self.n),
            });
        }
        self.common_spec.validate()?;
        ensure_positive("component weight", self.weight)?;
        ensure_positive("monitor threshold", self.threshold)?;
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.weight * self.common_spec.beta
    }
}

/// `Σ_{k=r}^{n} C(n,k) p^k q^{n−k}` with `q = 1 − p` passed separately.
/// Near one it is formed as the complement of the lower sum.
fn binomial_upper(n: usize, r: usize, p: f64, q: f64) -> f64 {
    let mut coeff = 1.0;
    let (mut lower, mut upper) = (0.0, 0.0);
    for k in 0..=n {
        let term = coeff * p.powi(k as i32) * q.powi((n - k) as i32);
        if k >= r {
            upper += term;
        } else {
            lower += term;
        }
        coeff = coeff * (n - k) as f64 / (k + 1) as f64;
    }
    let v = if upper <= 0.5 { upper } else { 1.0 - lower };
    v.clamp(0.0, 1.0)
}

/// `P(Y_(r)(t) ≤ y)`: at least `r` of the components lie at or below `y`.
pub fn order_stat_cdf(mon: &OrderStatMonitor, y: f64, t: f64) -> Result<f64> {
    mon.validate()?;
    ensure_positive("order statistic level", y)?;
    ensure_positive("time", t)?;
    let shape = mon.common_spec.shape_at(t);
    let f = gamma_cdf(y, shape, mon.scale())?;
    let s = gamma_sf(y, shape, mon.scale())?;
    Ok(binomial_upper(mon.n, mon.r, f, s))
}

/// Probability that at least `r` components exceed the threshold by time `t`,
/// i.e. the CDF of the monitor's first hitting time.
pub fn r_out_of_n_hitting_cdf(mon: &OrderStatMonitor, t: f64) -> Result<f64> {
    mon.validate()?;
    ensure_positive("time", t)?;
    let shape = mon.common_spec.shape_at(t);
    let f = gamma_cdf(mon.threshold, shape, mon.scale())?;
    let s = gamma_sf(mon.threshold, shape, mon.scale())?;
    Ok(binomial_upper(mon.n, mon.r, s, f))
}
