//! Sample L-moments, GEV fitting from L-moments, and percentile bootstrap.
//!
//! L-moments are linear in the order statistics, so ties and plateaux in the
//! empirical distribution (as produced by maxima over Cantor-like sets) need
//! no special treatment.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::rng::RngStream;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The L-moment estimator is trusted for |shape| up to this value.
pub const SHAPE_VALIDITY: f64 = 0.5;

/// Sample L-moments: location, scale, skewness and kurtosis ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LMomentSet {
    pub l1: f64,
    pub l2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl LMomentSet {
    /// Constant sample: `l2 == 0`, ratios undefined (reported as 0).
    pub fn is_degenerate(&self) -> bool {
        self.l2 == 0.0
    }
}

/// Unbiased probability-weighted-moment estimators `b_0..b_3` accumulated
/// over a sorted sample in which value `j` occurs `counts[j]` times.
fn pwm_weighted(sorted: &[f64], counts: impl Iterator<Item = u32>, total: usize) -> [f64; 4] {
    let nf = total as f64;
    let (d1, d2, d3) = (nf - 1.0, (nf - 1.0) * (nf - 2.0), (nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let mut b = [0.0; 4];
    let mut pos = 0usize;
    for (&x, c) in sorted.iter().zip(counts) {
        for _ in 0..c {
            let i = pos as f64; // (rank - 1)
            b[0] += x;
            b[1] += x * i / d1;
            b[2] += x * i * (i - 1.0) / d2;
            b[3] += x * i * (i - 1.0) * (i - 2.0) / d3;
            pos += 1;
        }
    }
    b.map(|v| v / nf)
}

fn from_pwm(b: [f64; 4], constant: bool) -> LMomentSet {
    let l1 = b[0];
    if constant {
        return LMomentSet { l1, l2: 0.0, t3: 0.0, t4: 0.0 };
    }
    let l2 = 2.0 * b[1] - b[0];
    let l3 = 6.0 * b[2] - 6.0 * b[1] + b[0];
    let l4 = 20.0 * b[3] - 30.0 * b[2] + 12.0 * b[1] - b[0];
    LMomentSet { l1, l2, t3: l3 / l2, t4: l4 / l2 }
}

/// L-moments of an already sorted sample.
pub fn lmoments_sorted(sorted: &[f64]) -> LMomentSet {
    let b = pwm_weighted(sorted, std::iter::repeat(1), sorted.len());
    from_pwm(b, sorted.first() == sorted.last())
}

fn check_sample(data: &[f64]) -> Result<()> {
    if data.len() < 4 {
        return Err(Error::SampleTooSmall { needed: 4, got: data.len() });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Sample L-moments from the unbiased estimators
/// `b_r = (1/N) sum_i [C(i-1, r) / C(N-1, r)] x_(i)`.
pub fn sample_lmoments(data: &[f64]) -> Result<LMomentSet> {
    check_sample(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(lmoments_sorted(&sorted))
}

/// L-skewness of a GEV with Hosking shape `k` (= -xi).
fn tau3_of_k(k: f64) -> f64 {
    let (ln2, ln3) = (std::f64::consts::LN_2, 3f64.ln());
    if k == 0.0 {
        return 2.0 * ln3 / ln2 - 3.0;
    }
    // 2 (1 - 3^-k) / (1 - 2^-k) - 3
    2.0 * (-k * ln3).exp_m1() / (-k * ln2).exp_m1() - 3.0
}

fn dtau3_dk(k: f64) -> f64 {
    let (ln2, ln3) = (std::f64::consts::LN_2, 3f64.ln());
    if k.abs() < 1e-6 {
        return -(ln3 / ln2) * (ln3 - ln2);
    }
    let a = -(-k * ln3).exp_m1();
    let b = -(-k * ln2).exp_m1();
    let da = ln3 * (-k * ln3).exp();
    let db = ln2 * (-k * ln2).exp();
    2.0 * (da * b - a * db) / (b * b)
}

/// Hosking's rational approximation of the shape from the L-skewness.
pub fn shape_rational_approx(t3: f64) -> f64 {
    let c = 2.0 / (3.0 + t3) - std::f64::consts::LN_2 / 3f64.ln();
    7.8590 * c + 2.9554 * c * c
}

/// Solves `tau3(k) = t3` for the Hosking shape. Starts from the rational
/// approximation and polishes with safeguarded Newton steps; tau3 is strictly
/// decreasing on (-1, inf), from 1 to -1.
fn solve_shape(t3: f64) -> Result<f64> {
    if !(t3 > -1.0 && t3 < 1.0) {
        return Err(Error::Domain(format!("L-skewness {t3} outside (-1, 1)")));
    }
    let (mut lo, mut hi) = (-1.0 + 1e-12, 1.0);
    while tau3_of_k(hi) > t3 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain(format!("L-skewness {t3} too close to -1")));
        }
    }
    let mut k = shape_rational_approx(t3).clamp(lo, hi);
    for _ in 0..100 {
        let f = tau3_of_k(k) - t3;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let mut next = k - f / dtau3_dk(k);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-15 * (1.0 + k.abs()) {
            k = next;
            break;
        }
        k = next;
    }
    Ok(k)
}

/// zeta(2), zeta(3), ..., zeta(20)
const ZETA: [f64; 19] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
];

/// `ln Gamma(1+k)` for `|k| < 0.1` by its Taylor series
/// `-gamma k + sum_j (-k)^j zeta(j)/j`, accurate relative to the result.
fn ln_gamma_1p_small(k: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -k;
    for (j, z) in ZETA.iter().enumerate() {
        pow *= -k;
        sum += z * pow / (j + 2) as f64;
    }
    -EULER_GAMMA * k + sum
}

fn gamma_1p(k: f64) -> f64 {
    if k.abs() < 0.1 {
        ln_gamma_1p_small(k).exp()
    } else {
        gamma(1.0 + k)
    }
}

/// `(1 - Gamma(1+k)) / k`, tending to Euler's constant.
fn one_minus_gamma_over_k(k: f64) -> f64 {
    if k == 0.0 {
        EULER_GAMMA
    } else if k.abs() < 0.1 {
        -ln_gamma_1p_small(k).exp_m1() / k
    } else {
        (1.0 - gamma(1.0 + k)) / k
    }
}

/// `k / (1 - 2^-k)`, tending to `1/ln 2`.
fn k_over_one_minus_pow2(k: f64) -> f64 {
    if k == 0.0 {
        1.0 / std::f64::consts::LN_2
    } else {
        k / -(-k * std::f64::consts::LN_2).exp_m1()
    }
}

/// GEV fit from L-moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevEstimate {
    pub params: GevParams,
    /// |xi| exceeds [`SHAPE_VALIDITY`]; the estimate is less reliable.
    pub outside_validity: bool,
}

/// GEV parameters from sample L-moments (Hosking's relations, shape sign
/// flipped so that positive `xi` is Fréchet-type).
pub fn fit_gev_lmoments(lm: &LMomentSet) -> Result<GevEstimate> {
    if lm.is_degenerate() {
        return Err(Error::Degenerate);
    }
    if !(lm.l2 > 0.0) || !lm.l1.is_finite() || !lm.l2.is_finite() {
        return Err(Error::Domain(format!("invalid L-moments l1={} l2={}", lm.l1, lm.l2)));
    }
    let k = solve_shape(lm.t3)?;
    let sigma = lm.l2 * k_over_one_minus_pow2(k) / gamma_1p(k);
    let mu = lm.l1 - sigma * one_minus_gamma_over_k(k);
    let params = GevParams::new(mu, sigma, -k)?;
    Ok(GevEstimate { params, outside_validity: k.abs() > SHAPE_VALIDITY })
}

/// Population `(lambda1, lambda2, tau3)` of a GEV; requires `xi < 1`.
pub fn gev_lmoments(params: &GevParams) -> Result<(f64, f64, f64)> {
    let k = -params.xi;
    if !(k > -1.0) {
        return Err(Error::Domain(format!("GEV L-moments need xi < 1, got {}", params.xi)));
    }
    let l1 = params.mu + params.sigma * one_minus_gamma_over_k(k);
    let l2 = params.sigma * gamma_1p(k) / k_over_one_minus_pow2(k);
    Ok((l1, l2, tau3_of_k(k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamIntervals {
    pub mu: Interval,
    pub sigma: Interval,
    pub xi: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GevParams,
    pub outside_validity: bool,
    /// Percentile intervals; `None` when no bootstrap was run or too few
    /// resamples could be fitted.
    pub ci95: Option<ParamIntervals>,
    pub n_boot: usize,
    /// Resamples that could not be fitted (e.g. constant) and were dropped.
    pub n_failed: usize,
    /// Bootstrap was requested but produced no usable interval.
    pub degenerate: bool,
}

/// Point fit without intervals.
pub fn fit(data: &[f64]) -> Result<FitResult> {
    let est = fit_gev_lmoments(&sample_lmoments(data)?)?;
    Ok(FitResult {
        params: est.params,
        outside_validity: est.outside_validity,
        ci95: None,
        n_boot: 0,
        n_failed: 0,
        degenerate: false,
    })
}

/// Linear-interpolation quantile of a sorted slice.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Point fit plus percentile bootstrap intervals from `b` resamples with
/// replacement. Intervals are widened, if needed, to contain the point
/// estimate.
pub fn bootstrap_ci(data: &[f64], b: usize, level: f64, rng: &mut RngStream) -> Result<FitResult> {
    if b < 100 {
        return Err(Error::Domain(format!("bootstrap needs at least 100 resamples, got {b}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} not in (0,1)")));
    }
    check_sample(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let point = fit_gev_lmoments(&lmoments_sorted(&sorted))?;

    let n = sorted.len();
    let mut counts = vec![0u32; n];
    let mut draws: [Vec<f64>; 3] = Default::default();
    let mut failed = 0;
    for _ in 0..b {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            counts[rng.index(n)] += 1;
        }
        let used = counts.iter().enumerate().filter(|(_, &c)| c > 0);
        let first = used.clone().next().map(|(i, _)| sorted[i]);
        let last = used.last().map(|(i, _)| sorted[i]);
        let pwm = pwm_weighted(&sorted, counts.iter().copied(), n);
        let lm = from_pwm(pwm, first == last);
        match fit_gev_lmoments(&lm) {
            Ok(est) => {
                draws[0].push(est.params.mu);
                draws[1].push(est.params.sigma);
                draws[2].push(est.params.xi);
            }
            Err(_) => failed += 1,
        }
    }

    let successes = b - failed;
    let ci95 = if successes >= 2 {
        let tail = (1.0 - level) / 2.0;
        let interval = |values: &mut Vec<f64>, est: f64| {
            values.sort_by(f64::total_cmp);
            let lo = sorted_quantile(values, tail).min(est);
            let hi = sorted_quantile(values, 1.0 - tail).max(est);
            Interval { lo, hi }
        };
        let [mut mus, mut sigmas, mut xis] = draws;
        Some(ParamIntervals {
            mu: interval(&mut mus, point.params.mu),
            sigma: interval(&mut sigmas, point.params.sigma),
            xi: interval(&mut xis, point.params.xi),
        })
    } else {
        None
    };
    Ok(FitResult {
        params: point.params,
        outside_validity: point.outside_validity,
        degenerate: ci95.is_none(),
        ci95,
        n_boot: b,
        n_failed: failed,
    })
}
