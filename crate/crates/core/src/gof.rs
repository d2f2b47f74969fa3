//! Kolmogorov-Smirnov deviation and comparison of candidate families.
//!
//! D is reported as a raw deviation for ranking models, not converted into a
//! p-value. The candidate list is a fixed stand-in for "a wide class of
//! continuous distributions": GEV, Gumbel, normal and two-parameter
//! exponential, each fitted by L-moments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::lmoments::{fit_gev_lmoments, sample_lmoments, EULER_GAMMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub sample_size: usize,
    pub model_name: String,
}

/// `D = max_i max(i/N - F(x_(i)), F(x_(i)) - (i-1)/N)`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], model_cdf: F, model_name: &str) -> Result<KsReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ks_sorted(&sorted, model_cdf, model_name))
}

fn ks_sorted<F: Fn(f64) -> f64>(sorted: &[f64], model_cdf: F, model_name: &str) -> KsReport {
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = model_cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    });
    KsReport { statistic: d.clamp(0.0, 1.0), sample_size: sorted.len(), model_name: model_name.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gev,
    Gumbel,
    Normal,
    Exponential,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Gev, Family::Gumbel, Family::Normal, Family::Exponential];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gev => "gev",
            Family::Gumbel => "gumbel",
            Family::Normal => "normal",
            Family::Exponential => "exponential",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::Domain(format!("unknown family '{s}'")))
    }
}

/// A fitted candidate distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CandidateModel {
    Gev { params: GevParams },
    Gumbel { mu: f64, sigma: f64 },
    Normal { mu: f64, sigma: f64 },
    Exponential { location: f64, scale: f64 },
}

impl CandidateModel {
    pub fn family(&self) -> Family {
        match self {
            CandidateModel::Gev { .. } => Family::Gev,
            CandidateModel::Gumbel { .. } => Family::Gumbel,
            CandidateModel::Normal { .. } => Family::Normal,
            CandidateModel::Exponential { .. } => Family::Exponential,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            CandidateModel::Gev { params } => params.cdf(x),
            CandidateModel::Gumbel { mu, sigma } => (-(-(x - mu) / sigma).exp()).exp(),
            CandidateModel::Normal { mu, sigma } => 0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2)),
            CandidateModel::Exponential { location, scale } => {
                if x <= location {
                    0.0
                } else {
                    -(-(x - location) / scale).exp_m1()
                }
            }
        }
    }
}

/// Fit `family` to `sample` by its L-moment estimator.
///
/// Gumbel: `sigma = l2/ln2`, `mu = l1 - gamma_E sigma`. Normal:
/// `sigma = l2 sqrt(pi)`, `mu = l1`. Exponential: `scale = 2 l2`,
/// `location = l1 - scale`; rejected when the sample extends below the
/// fitted location.
pub fn fit_candidate(family: Family, sample: &[f64]) -> Result<CandidateModel> {
    let lm = sample_lmoments(sample)?;
    if lm.is_degenerate() {
        return Err(Error::Degenerate);
    }
    Ok(match family {
        Family::Gev => CandidateModel::Gev { params: fit_gev_lmoments(&lm)?.params },
        Family::Gumbel => {
            let sigma = lm.l2 / std::f64::consts::LN_2;
            CandidateModel::Gumbel { mu: lm.l1 - EULER_GAMMA * sigma, sigma }
        }
        Family::Normal => CandidateModel::Normal { mu: lm.l1, sigma: lm.l2 * std::f64::consts::PI.sqrt() },
        Family::Exponential => {
            let scale = 2.0 * lm.l2;
            let location = lm.l1 - scale;
            let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
            if min < location {
                return Err(Error::Domain(format!(
                    "exponential support starts at {location}, sample minimum is {min}"
                )));
            }
            CandidateModel::Exponential { location, scale }
        }
    })
}

/// KS deviation of every family that can be fitted, ascending by D.
pub fn rank_families(sample: &[f64], families: &[Family]) -> Result<Vec<KsReport>> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut reports: Vec<KsReport> = families
        .iter()
        .filter_map(|&f| fit_candidate(f, sample).ok())
        .map(|model| ks_sorted(&sorted, |x| model.cdf(x), model.family().name()))
        .collect();
    if reports.is_empty() {
        return Err(Error::Insufficient("no candidate family could be fitted".into()));
    }
    // stable sort: ties keep family order
    reports.sort_by(|a, b| a.statistic.total_cmp(&b.statistic));
    Ok(reports)
}

/// Ranks all candidate families; the first entry is the winner.
pub fn model_selection(sample: &[f64]) -> Result<Vec<KsReport>> {
    rank_families(sample, &Family::ALL)
}
