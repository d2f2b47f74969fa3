//! Generalised extreme value distribution and the predicted dependence of its
//! parameters on the information dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::ObservableKind;

/// Below this |shape| the Gumbel form `exp(-exp(-z))` is used.
pub const GUMBEL_SWITCH: f64 = 1e-8;

/// Location, scale and shape. `xi > 0` is Fréchet-type (lower endpoint),
/// `xi < 0` Weibull-type (upper endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() || !xi.is_finite() {
            return Err(Error::Domain(format!("invalid GEV parameters ({mu}, {sigma}, {xi})")));
        }
        Ok(Self { mu, sigma, xi })
    }

    pub fn gumbel(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, 0.0)
    }

    /// Finite support endpoint `mu - sigma/xi`, if any.
    pub fn endpoint(&self) -> Option<f64> {
        (self.xi.abs() >= GUMBEL_SWITCH).then(|| self.mu - self.sigma / self.xi)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        if self.xi.abs() < GUMBEL_SWITCH {
            return (-(-z).exp()).exp();
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return if self.xi > 0.0 { 0.0 } else { 1.0 };
        }
        // [1 + xi z]^(-1/xi) = exp(-ln1p(xi z) / xi)
        (-(-t.ln_1p() / self.xi).exp()).exp()
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile probability {p} not in (0,1)")));
        }
        let y = -p.ln();
        if self.xi.abs() < GUMBEL_SWITCH {
            Ok(self.mu - self.sigma * y.ln())
        } else {
            Ok(self.mu + self.sigma * (-self.xi * y.ln()).exp_m1() / self.xi)
        }
    }
}

/// Free function form of [`GevParams::cdf`].
pub fn gev_cdf(params: &GevParams, x: f64) -> f64 {
    params.cdf(x)
}

/// Free function form of [`GevParams::quantile`].
pub fn gev_quantile(params: &GevParams, p: f64) -> Result<f64> {
    params.quantile(p)
}

/// How a fitted parameter is expected to depend on the block count `n` at
/// fixed series length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ScalingLaw {
    Constant { value: f64 },
    /// `slope * ln n + const`
    AffineInLnN { slope: f64 },
    /// `const * n^exponent`
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalPrediction {
    pub xi_pred: f64,
    pub sigma_law: ScalingLaw,
    pub mu_law: ScalingLaw,
}

/// Predicted shape and scaling laws for an observable on a measure of
/// information dimension `delta`.
///
/// g1: xi = 0, sigma = 1/delta, mu slope -1/delta in ln n.
/// g2: xi = 1/(alpha delta), sigma and mu ~ n^(-1/(alpha delta)).
/// g3: xi = -1/(alpha delta), sigma ~ n^(1/(alpha delta)), mu = C.
pub fn prediction(kind: ObservableKind, delta: f64, alpha: f64, c: f64) -> Result<TheoreticalPrediction> {
    check_delta_alpha(kind, delta, alpha)?;
    let inv = 1.0 / (alpha * delta);
    Ok(match kind {
        ObservableKind::G1 => TheoreticalPrediction {
            xi_pred: 0.0,
            sigma_law: ScalingLaw::Constant { value: 1.0 / delta },
            mu_law: ScalingLaw::AffineInLnN { slope: -1.0 / delta },
        },
        ObservableKind::G2 => TheoreticalPrediction {
            xi_pred: inv,
            sigma_law: ScalingLaw::PowerLaw { exponent: -inv },
            mu_law: ScalingLaw::PowerLaw { exponent: -inv },
        },
        ObservableKind::G3 => TheoreticalPrediction {
            xi_pred: -inv,
            sigma_law: ScalingLaw::PowerLaw { exponent: inv },
            mu_law: ScalingLaw::Constant { value: c },
        },
    })
}

fn check_delta_alpha(kind: ObservableKind, delta: f64, alpha: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("dimension must be positive, got {delta}")));
    }
    if kind != ObservableKind::G1 && (!(alpha > 0.0) || !alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Point prediction at block count `n` of a length-`k` series.
///
/// For g1 this is exact: `sigma = 1/delta`, `mu = ln(k/n)/delta`. For g2 and
/// g3 the power-law prefactors are not determined by the theory and are set
/// to 1; only the exponents are meaningful.
pub fn theoretical_params(
    kind: ObservableKind,
    delta: f64,
    alpha: f64,
    c: f64,
    k: usize,
    n: usize,
) -> Result<GevParams> {
    let pred = prediction(kind, delta, alpha, c)?;
    if n == 0 || k < n {
        return Err(Error::InvalidPartition { n, len: k });
    }
    let nf = n as f64;
    let eval = |law: ScalingLaw| match law {
        ScalingLaw::Constant { value } => value,
        ScalingLaw::AffineInLnN { slope } => -slope * (k as f64 / nf).ln(),
        ScalingLaw::PowerLaw { exponent } => nf.powf(exponent),
    };
    Ok(GevParams { mu: eval(pred.mu_law), sigma: eval(pred.sigma_law), xi: pred.xi_pred })
}

/// Empirical `(1 - 1/m)`-quantile of a sample (linear interpolation between
/// order statistics, `h = (N-1) p`). For the g1 observable `ln m / gamma_m`
/// tends to the information dimension.
pub fn gamma_m_diagnostic(sample: &[f64], m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("m must be at least 2, got {m}")));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if m > sample.len() {
        return Err(Error::Domain(format!("m = {m} exceeds sample size {}", sample.len())));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite);
    }
    let p = 1.0 - 1.0 / m as f64;
    let h = (sample.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let mut work = sample.to_vec();
    let (_, &mut lo_val, upper) = work.select_nth_unstable_by(lo, f64::total_cmp);
    let hi_val = upper.iter().copied().min_by(f64::total_cmp).unwrap_or(lo_val);
    Ok(lo_val + frac * (hi_val - lo_val))
}
