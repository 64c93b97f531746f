//! Special functions and seeded random sampling.
//!
//! All gamma-family quantities are evaluated in log space so that the large
//! shape arguments produced by long mixture series (shape `ρ + k` with `k` in
//! the thousands) neither overflow nor lose relative precision.
//!
//! The incomplete gamma routines split at `x = s + 1`: the power series is used
//! below the split and a Lentz continued fraction above it. For `s < 1/2` the
//! upper tail below the split is computed from an explicit small-shape
//! expansion, which keeps `Γ(s, x)` relatively accurate even when `Q(s, x)` is
//! close to zero.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 4.0 * f64::EPSILON;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 1_000_000;

/// ζ(k) − 1 for k = 2, 3, …, 40.
const ZETA_MINUS_ONE: [f64; 39] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_1e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_889e-13,
];

/// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Σ_{k≥2} (−1)^k (ζ(k) − 1) s^k / k, valid for |s| ≤ 1/2.
fn zeta_tail_series(s: f64) -> f64 {
    let mut power = s;
    let mut sum = 0.0;
    for (i, z) in ZETA_MINUS_ONE.iter().enumerate() {
        power *= s;
        let k = (i + 2) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * z * power / k;
    }
    sum
}

/// ln Γ(1 + s) for |s| ≤ 1/2, relatively accurate near s = 0.
fn ln_gamma_1p_small(s: f64) -> f64 {
    -s.ln_1p() + s * (1.0 - EULER_GAMMA) + zeta_tail_series(s)
}

/// Γ(1 + s) − 1 for |s| ≤ 1/2.
fn gamma_1p_minus_1(s: f64) -> f64 {
    ln_gamma_1p_small(s).exp_m1()
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// ln Γ(x) for finite x > 0, without argument checks.
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_1p_small(x) - x.ln()
    } else if x < 1.5 {
        ln_gamma_1p_small(x - 1.0)
    } else if x < 2.5 {
        let s = x - 2.0;
        s * (1.0 - EULER_GAMMA) + zeta_tail_series(s)
    } else {
        ln_gamma_lanczos(x)
    }
}

/// Natural logarithm of the gamma function.
pub fn log_gamma(x: f64) -> Result<f64> {
    ensure_positive("log_gamma argument", x)?;
    Ok(ln_gamma_unchecked(x))
}

/// Both regularized tails of the incomplete gamma function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTails {
    /// Regularized lower tail P(s, x).
    pub p: f64,
    /// Regularized upper tail Q(s, x).
    pub q: f64,
    /// ln Q(s, x), finite even when `q` underflows.
    pub ln_q: f64,
}

/// Regularized incomplete gamma tails P(s, x) and Q(s, x).
pub fn regularized_gamma(s: f64, x: f64) -> Result<GammaTails> {
    ensure_positive("incomplete gamma shape", s)?;
    ensure_non_negative("incomplete gamma argument", x)?;
    gamma_tails(s, x)
}

pub(crate) fn gamma_tails(s: f64, x: f64) -> Result<GammaTails> {
    if x == 0.0 {
        return Ok(GammaTails {
            p: 0.0,
            q: 1.0,
            ln_q: 0.0,
        });
    }
    if x.is_infinite() {
        return Ok(GammaTails {
            p: 1.0,
            q: 0.0,
            ln_q: f64::NEG_INFINITY,
        });
    }
    if x < s + 1.0 {
        let p = lower_series(s, x)?;
        if s < 0.5 {
            let ln_upper = small_shape_ln_upper(s, x)?;
            let ln_q = ln_upper - ln_gamma_unchecked(s);
            Ok(GammaTails {
                p,
                q: ln_q.exp(),
                ln_q,
            })
        } else {
            let q = 1.0 - p;
            Ok(GammaTails { p, q, ln_q: q.ln() })
        }
    } else {
        let ln_q = upper_continued_fraction(s, x)?;
        let q = ln_q.exp();
        Ok(GammaTails {
            p: 1.0 - q,
            q,
            ln_q,
        })
    }
}

/// P(s, x) by its power series; intended for x < s + 1.
fn lower_series(s: f64, x: f64) -> Result<f64> {
    let ln_prefactor = s * x.ln() - x - ln_gamma_unchecked(s + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = s;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok((ln_prefactor + sum.ln()).exp().min(1.0));
        }
    }
    Err(Error::IncompleteGamma { s, x })
}

/// ln Q(s, x) by the modified Lentz continued fraction; intended for x ≥ s + 1.
fn upper_continued_fraction(s: f64, x: f64) -> Result<f64> {
    let ln_prefactor = s * x.ln() - x - ln_gamma_unchecked(s);
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(ln_prefactor + h.ln());
        }
    }
    Err(Error::IncompleteGamma { s, x })
}

/// ln Γ(s, x) for s < 1/2 and x < s + 1.
///
/// Γ(s, x) = [Γ(1+s) − 1 − (x^s − 1)] / s − x^s Σ_{n≥1} (−x)^n / (n! (s + n)).
fn small_shape_ln_upper(s: f64, x: f64) -> Result<f64> {
    let ln_x = x.ln();
    let head = (gamma_1p_minus_1(s) - (s * ln_x).exp_m1()) / s;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut converged = false;
    for n in 1..MAX_ITER {
        term *= -x / n as f64;
        let contrib = term / (s + n as f64);
        sum += contrib;
        if contrib.abs() < EPS * sum.abs().max(TINY) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IncompleteGamma { s, x });
    }
    let upper = head - (s * ln_x).exp() * sum;
    if upper > 0.0 {
        Ok(upper.ln())
    } else {
        Err(Error::IncompleteGamma { s, x })
    }
}

/// ln Γ_ui(s, x) = ln ∫_x^∞ z^{s−1} e^{−z} dz.
pub fn ln_upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    let tails = regularized_gamma(s, x)?;
    Ok(tails.ln_q + ln_gamma_unchecked(s))
}

/// Unregularized upper incomplete gamma function Γ_ui(s, x).
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    Ok(ln_upper_incomplete_gamma(s, x)?.exp())
}

/// CDF of the gamma law with the given shape and scale.
pub fn gamma_cdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma scale", scale)?;
    ensure_non_negative("gamma cdf argument", x)?;
    Ok(gamma_tails(shape, x / scale)?.p)
}

/// Survival function P(X ≥ x) of the gamma law.
pub fn gamma_sf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma scale", scale)?;
    ensure_non_negative("gamma survival argument", x)?;
    Ok(gamma_tails(shape, x / scale)?.q)
}

/// ln B(x, y).
pub fn ln_beta(x: f64, y: f64) -> Result<f64> {
    ensure_positive("beta argument x", x)?;
    ensure_positive("beta argument y", y)?;
    Ok(ln_gamma_unchecked(x) + ln_gamma_unchecked(y) - ln_gamma_unchecked(x + y))
}

/// The beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    Ok(ln_beta(x, y)?.exp())
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "incomplete beta argument",
            value: x,
        });
    }
    regularized_beta_split(x, 1.0 - x, a, b)
}

/// I_x(a, b) with the complement `y = 1 − x` supplied separately so that
/// arguments near one keep their precision.
pub(crate) fn regularized_beta_split(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    ensure_positive("incomplete beta a", a)?;
    ensure_positive("incomplete beta b", b)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma_unchecked(a + b) - ln_gamma_unchecked(a) - ln_gamma_unchecked(b)
        + a * x.ln()
        + b * y.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        let cf = beta_continued_fraction(a, b, x)?;
        Ok((ln_front + cf.ln()).exp() / a)
    } else {
        let cf = beta_continued_fraction(b, a, y)?;
        Ok(1.0 - (ln_front + cf.ln()).exp() / b)
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::IncompleteBeta { a, b, x })
}

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for distinct stream ids under one seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Stream whose id is a hash of `key`, e.g. `(replication, cycle, defect)`.
    pub fn keyed(seed: u64, key: &[u64]) -> Self {
        let mut h = 0x6a09_e667_f3bc_c909_u64;
        for &k in key {
            h = splitmix64(h ^ splitmix64(k));
        }
        Self::new(seed, h)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Reusable gamma sampler for repeated draws with fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct GammaSampler(Gamma<f64>);

impl GammaSampler {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        ensure_positive("gamma shape", shape)?;
        ensure_positive("gamma scale", scale)?;
        Gamma::new(shape, scale)
            .map(GammaSampler)
            .map_err(|_| Error::Domain {
                what: "gamma parameters",
                value: shape,
            })
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.0.sample(rng)
    }
}

/// One variate from Gamma(shape, scale).
pub fn sample_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> Result<f64> {
    Ok(GammaSampler::new(shape, scale)?.sample(rng))
}

/// One Poisson variate with the given mean (zero mean yields zero).
pub fn sample_poisson(mean: f64, rng: &mut RngStream) -> Result<u64> {
    ensure_non_negative("poisson mean", mean)?;
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::Domain {
        what: "poisson mean",
        value: mean,
    })?;
    Ok(dist.sample(rng) as u64)
}
