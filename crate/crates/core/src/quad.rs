//! Gaussian quadrature rules and an adaptive Gauss–Kronrod integrator.
//!
//! Rules are built with the Golub–Welsch procedure: the nodes are the
//! eigenvalues of the Jacobi matrix of the orthogonal polynomial family and the
//! weights are the squared first components of its eigenvectors. Only those
//! first components are tracked, so the cost is O(n²).

use crate::error::{Error, Result};

/// A quadrature rule: nodes and matching weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigen-decomposes the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (length n − 1). Returns sorted eigenvalues and the first
/// components of the normalized eigenvectors.
fn golub_welsch(mut diag: Vec<f64>, off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        return Ok((diag, z));
    }
    const MAX_SWEEPS: usize = 60;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= f64::EPSILON * (diag[m].abs() + diag[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::Quadrature(format!(
                    "tridiagonal QL failed to converge for eigenvalue {l} of {n}"
                )));
            }
            sweeps += 1;
            let mut p = diag[l];
            let mut g = (diag[l + 1] - p) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - p + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            p = 0.0;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                if g.abs() <= f.abs() {
                    c = g / f;
                    r = c.hypot(1.0);
                    e[i + 1] = f * r;
                    s = 1.0 / r;
                    c *= s;
                } else {
                    s = f / g;
                    r = s.hypot(1.0);
                    e[i + 1] = g * r;
                    c = 1.0 / r;
                    s *= c;
                }
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let nodes = order.iter().map(|&i| diag[i]).collect();
    let first = order.iter().map(|&i| z[i]).collect();
    Ok((nodes, first))
}

/// n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::Quadrature("empty Gauss–Legendre rule".into()));
    }
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, first) = golub_welsch(vec![0.0; n], &off)?;
    let weights = first.iter().map(|v| 2.0 * v * v).collect();
    Ok(Rule { nodes, weights })
}

/// n-point generalized Gauss–Laguerre rule for the probability weight
/// v^a e^{−v} / Γ(a + 1) on (0, ∞). Weights sum to one.
pub fn gauss_laguerre(n: usize, a: f64) -> Result<Rule> {
    if n == 0 || !(a > -1.0) {
        return Err(Error::Quadrature(format!(
            "invalid Gauss–Laguerre rule n = {n}, a = {a}"
        )));
    }
    let diag = (0..n).map(|i| 2.0 * i as f64 + 1.0 + a).collect();
    let off: Vec<f64> = (1..n)
        .map(|i| {
            let i = i as f64;
            (i * (i + a)).sqrt()
        })
        .collect();
    let (nodes, first) = golub_welsch(diag, &off)?;
    let weights = first.iter().map(|v| v * v).collect();
    Ok(Rule { nodes, weights })
}

/// Composite Gauss–Legendre rule on [a, b] with `panels` equal panels of
/// `order` points each.
pub fn composite_legendre(a: f64, b: f64, panels: usize, order: usize) -> Result<Rule> {
    let base = gauss_legendre(order)?;
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(lo + 0.5 * width * (x + 1.0));
            weights.push(0.5 * width * w);
        }
    }
    Ok(Rule { nodes, weights })
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over the finite interval
/// [a, b] to absolute-or-relative tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = kronrod15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut error = e;
    while error > tol.max(tol * total.abs()) {
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "adaptive integration on [{a}, {b}] stalled with error {error:e}"
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, v, e) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        total += v1 + v2 - v;
        error += e1 + e2 - e;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    Ok(pieces.iter().map(|p| p.2).sum())
}

/// Adaptive integration over [a, ∞) via the substitution x = a + u/(1 − u).
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> Result<f64> {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - u;
            let v = f(a + u / d) / (d * d);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
