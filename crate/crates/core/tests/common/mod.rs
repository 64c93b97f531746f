//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use cbm_core::cost::{CostStructure, VariableCostKind};
use cbm_core::degradation::{GammaProcessSpec, LinearCombination};

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Split into panels first so narrow features are not skipped.
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 24)
        })
        .sum()
}

/// ∫_a^∞ f by the map x = a + u/(1 − u).
pub fn simpson_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    simpson(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - u;
            let v = f(a + u / d) / (d * d);
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

pub fn worked_combo() -> LinearCombination {
    let specs = [1.0, 2.0, 3.0].map(|b| GammaProcessSpec::new(1.0, 2.0, b).unwrap());
    LinearCombination::from_parts(&[0.2, 0.7, 0.4], &specs).unwrap()
}

pub fn worked_costs() -> CostStructure {
    CostStructure {
        c_inspect: 0.05,
        fixed: vec![2.0; 3],
        variable_kind: VariableCostKind::Linear,
        variable_rate: vec![7.0; 3],
        c_threshold: 100.0,
        c_replace: 1000.0,
        budget: Some(130.0),
    }
}

/// Small deterministic generator for randomized parameter sets, kept apart
/// from the library's streams.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        lo + (hi - lo) * ((self.0 >> 11) as f64 / (1u64 << 53) as f64)
    }
}

pub fn worked_model() -> cbm_core::policy::MaintenanceModel {
    use cbm_core::heterogeneity::{ArrivalModel, MixingExponent};
    use cbm_core::policy::{MaintenanceModel, RepairFactor, RepairModel};
    MaintenanceModel {
        combo: worked_combo(),
        repair: RepairModel {
            a1: RepairFactor::ScaledExpSaturation { scale: 1.1, level: 1.2, dip: 0.2 },
            a2: RepairFactor::ScaledExpSaturation { scale: 1.15, level: 1.2, dip: 0.2 },
        },
        costs: worked_costs(),
        arrivals: ArrivalModel { rate: 1.0, mix_mu: 1.0, mix_nu: 1.0, mixing_exponent: MixingExponent::Nu },
        threshold: 20.0,
    }
}

pub fn worked_grid() -> cbm_core::policy::GridSpec {
    cbm_core::policy::GridSpec { t_lo: 1.0, t_hi: 7.0, t_count: 10, n_max: 8 }
}

/// ∫_0^∞ of a density with a possible `y^{ρ−1}` singularity at the origin:
/// `y = s^m` on [0, 1] with `mρ ≥ 2`, then the tail map beyond one.
pub fn integrate_density(f: impl Fn(f64) -> f64, rho: f64, tol: f64) -> f64 {
    let m = (2.0 / rho).ceil().max(1.0);
    let head = simpson(
        |s| if s <= 0.0 { 0.0 } else { f(s.powf(m)) * m * s.powf(m - 1.0) },
        0.0,
        1.0,
        tol,
    );
    head + simpson_to_infinity(f, 1.0, tol)
}
