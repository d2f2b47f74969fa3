//! Information dimension from fitted GEV parameters.
//!
//! Point routes invert the predicted constants (`sigma(g1) = 1/D`,
//! `|xi(g2/g3)| = 1/(alpha D)`); slope routes regress a parameter against the
//! block count: `mu(g1)` linearly against `ln n`, the power-law parameters as
//! `log10(param)` against `log10 n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::lmoments::FitResult;
use crate::observables::ObservableKind;

/// Slope routes only use block counts with `n >= MIN_BLOCK_COUNT` and
/// `k/n >= MIN_BLOCK_COUNT`.
pub const MIN_BLOCK_COUNT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    LnN,
    Log10N,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub stderr_intercept: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = intercept + slope x`, with standard errors
/// from the residual variance.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!("x has {} points, y has {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Insufficient(format!("linear fit needs 3 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n {
        return Err(Error::Domain("degenerate abscissa: all x equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)).sum();
    let s2 = ssr / (n - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        stderr_slope: (s2 / sxx).sqrt(),
        stderr_intercept: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub line: LinearFit,
    pub abscissa: Abscissa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SigmaG1,
    XiG2,
    XiG3,
    MuG1Slope,
    MuG2Slope,
    SigmaG2Slope,
    SigmaG3Slope,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::SigmaG1,
        Method::XiG2,
        Method::XiG3,
        Method::MuG1Slope,
        Method::MuG2Slope,
        Method::SigmaG2Slope,
        Method::SigmaG3Slope,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::SigmaG1 => "sigma_g1",
            Method::XiG2 => "xi_g2",
            Method::XiG3 => "xi_g3",
            Method::MuG1Slope => "mu_g1_slope",
            Method::MuG2Slope => "mu_g2_slope",
            Method::SigmaG2Slope => "sigma_g2_slope",
            Method::SigmaG3Slope => "sigma_g3_slope",
        }
    }

    pub fn observable(&self) -> ObservableKind {
        match self {
            Method::SigmaG1 | Method::MuG1Slope => ObservableKind::G1,
            Method::XiG2 | Method::MuG2Slope | Method::SigmaG2Slope => ObservableKind::G2,
            Method::XiG3 | Method::SigmaG3Slope => ObservableKind::G3,
        }
    }

    pub fn slope_route(&self) -> Option<SlopeRoute> {
        match self {
            Method::MuG1Slope => Some(SlopeRoute::MuG1),
            Method::MuG2Slope => Some(SlopeRoute::MuG2),
            Method::SigmaG2Slope => Some(SlopeRoute::SigmaG2),
            Method::SigmaG3Slope => Some(SlopeRoute::SigmaG3),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s.trim())
            .ok_or_else(|| Error::Domain(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeRoute {
    MuG1,
    MuG2,
    SigmaG2,
    SigmaG3,
}

impl SlopeRoute {
    pub fn method(&self) -> Method {
        match self {
            SlopeRoute::MuG1 => Method::MuG1Slope,
            SlopeRoute::MuG2 => Method::MuG2Slope,
            SlopeRoute::SigmaG2 => Method::SigmaG2Slope,
            SlopeRoute::SigmaG3 => Method::SigmaG3Slope,
        }
    }

    pub fn observable(&self) -> ObservableKind {
        self.method().observable()
    }

    pub fn abscissa(&self) -> Abscissa {
        match self {
            SlopeRoute::MuG1 => Abscissa::LnN,
            _ => Abscissa::Log10N,
        }
    }

    fn param(&self, p: &GevParams) -> f64 {
        match self {
            SlopeRoute::MuG1 | SlopeRoute::MuG2 => p.mu,
            SlopeRoute::SigmaG2 | SlopeRoute::SigmaG3 => p.sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub delta: f64,
    /// One standard deviation.
    pub uncertainty: f64,
    pub method: Method,
    /// Block counts dropped by the `n, m >= 1000` gate (slope routes).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_n: Vec<usize>,
    /// The regression behind a slope estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean: f64,
    /// Sample standard deviation; `None` for a single member.
    pub std: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

/// Mean, sample standard deviation and standard error of the mean.
pub fn aggregate_ensemble(values: &[f64]) -> Result<EnsembleStats> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok(EnsembleStats { mean, std: None, stderr: None, count: 1 });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    Ok(EnsembleStats { mean, std: Some(std), stderr: Some(std / n.sqrt()), count: values.len() })
}

/// Spread of an ensemble grouped by center: pooled within-center standard
/// deviation, standard deviation of the center means, and the standard
/// deviation of all members together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadComponents {
    pub within_centers: Option<f64>,
    pub between_centers: Option<f64>,
    pub combined: Option<f64>,
}

pub fn spread_components(groups: &[Vec<f64>]) -> Result<SpreadComponents> {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let combined = aggregate_ensemble(&all)?.std;
    let (mut ss, mut dof) = (0.0, 0usize);
    let mut means = Vec::new();
    for g in groups.iter().filter(|g| !g.is_empty()) {
        let s = aggregate_ensemble(g)?;
        means.push(s.mean);
        if let Some(sd) = s.std {
            ss += sd * sd * (g.len() - 1) as f64;
            dof += g.len() - 1;
        }
    }
    let within_centers = (dof > 0).then(|| (ss / dof as f64).sqrt());
    let between_centers = aggregate_ensemble(&means)?.std;
    Ok(SpreadComponents { within_centers, between_centers, combined })
}

/// `D = 1/<sigma(g1)>`, uncertainty `std(sigma) / <sigma>^2`.
pub fn delta_from_sigma_g1(sigma: &EnsembleStats) -> Result<DimensionEstimate> {
    if !(sigma.mean > 0.0) || !sigma.mean.is_finite() {
        return Err(Error::Domain(format!("mean scale must be positive, got {}", sigma.mean)));
    }
    Ok(DimensionEstimate {
        delta: 1.0 / sigma.mean,
        uncertainty: sigma.std.unwrap_or(0.0) / (sigma.mean * sigma.mean),
        method: Method::SigmaG1,
        excluded_n: Vec::new(),
        scaling: None,
    })
}

/// `D = 1/(alpha |<xi>|)`, uncertainty `std(xi) / (alpha <xi>^2)`.
pub fn delta_from_xi(xi: &EnsembleStats, alpha: f64, method: Method) -> Result<DimensionEstimate> {
    if !matches!(method, Method::XiG2 | Method::XiG3) {
        return Err(Error::Domain(format!("{method} is not a shape route")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if xi.mean == 0.0 || !xi.mean.is_finite() {
        return Err(Error::UndefinedEstimator("zero mean shape carries no dimension information".into()));
    }
    Ok(DimensionEstimate {
        delta: 1.0 / (alpha * xi.mean.abs()),
        uncertainty: xi.std.unwrap_or(0.0) / (alpha * xi.mean * xi.mean),
        method,
        excluded_n: Vec::new(),
        scaling: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub n: usize,
    /// Block size `k div n`.
    pub m: usize,
    pub fit: FitResult,
}

/// Fitted parameters against block count for one observable, all rows cut
/// from series of the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSeries {
    pub system: String,
    pub kind: ObservableKind,
    pub alpha: f64,
    pub c: f64,
    pub rows: Vec<ParamRow>,
}

impl ParamSeries {
    pub fn new(system: &str, kind: ObservableKind, alpha: f64, c: f64, mut rows: Vec<ParamRow>) -> Result<Self> {
        rows.sort_by_key(|r| r.n);
        if rows.windows(2).any(|w| w[0].n == w[1].n) {
            return Err(Error::Domain("block counts must be distinct".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.n == 0 || r.m == 0) {
            return Err(Error::InvalidPartition { n: r.n, len: r.n * r.m });
        }
        Ok(Self { system: system.to_string(), kind, alpha, c, rows })
    }

    /// Series of parameter means across members with identical n-grids.
    pub fn ensemble_mean(members: &[ParamSeries]) -> Result<ParamSeries> {
        let first = members.first().ok_or(Error::EmptySample)?;
        let grid: Vec<(usize, usize)> = first.rows.iter().map(|r| (r.n, r.m)).collect();
        if members.iter().any(|m| m.rows.iter().map(|r| (r.n, r.m)).ne(grid.iter().copied())) {
            return Err(Error::Domain("ensemble members have different n-grids".into()));
        }
        let count = members.len() as f64;
        let rows = grid
            .iter()
            .enumerate()
            .map(|(i, &(n, m))| {
                let mean = |f: fn(&GevParams) -> f64| members.iter().map(|m| f(&m.rows[i].fit.params)).sum::<f64>() / count;
                let params = GevParams { mu: mean(|p| p.mu), sigma: mean(|p| p.sigma), xi: mean(|p| p.xi) };
                ParamRow {
                    n,
                    m,
                    fit: FitResult {
                        params,
                        outside_validity: params.xi.abs() > crate::lmoments::SHAPE_VALIDITY,
                        ci95: None,
                        n_boot: 0,
                        n_failed: 0,
                        degenerate: false,
                    },
                }
            })
            .collect();
        ParamSeries::new(&first.system, first.kind, first.alpha, first.c, rows)
    }
}

fn gate(row: &ParamRow) -> bool {
    row.n >= MIN_BLOCK_COUNT && row.m >= MIN_BLOCK_COUNT
}

/// Dimension from the slope of a parameter against the block count.
///
/// `mu(g1)`: `mu = a - (1/D) ln n`, so `D = 1/|slope|`. Power-law routes:
/// `log10 p = a + kappa log10 n` with `|kappa| = 1/(alpha D)`.
pub fn delta_from_slope(series: &ParamSeries, route: SlopeRoute) -> Result<DimensionEstimate> {
    if series.kind != route.observable() {
        return Err(Error::Domain(format!(
            "route {} needs {} fits, series has {}",
            route.method(),
            route.observable(),
            series.kind
        )));
    }
    let (kept, excluded): (Vec<&ParamRow>, Vec<&ParamRow>) = series.rows.iter().partition(|r| gate(r));
    let excluded_n: Vec<usize> = excluded.iter().map(|r| r.n).collect();
    if kept.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{} needs 3 block counts with n, k/n >= {MIN_BLOCK_COUNT}; {} qualify (excluded {:?})",
            route.method(),
            kept.len(),
            excluded_n
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match route.abscissa() {
        Abscissa::LnN => kept.iter().map(|r| ((r.n as f64).ln(), route.param(&r.fit.params))).unzip(),
        Abscissa::Log10N => {
            let mut xs = Vec::with_capacity(kept.len());
            let mut ys = Vec::with_capacity(kept.len());
            for r in &kept {
                let v = route.param(&r.fit.params);
                if !(v > 0.0) {
                    return Err(Error::Domain(format!("{} at n = {} is {v}, cannot take log", route.method(), r.n)));
                }
                xs.push((r.n as f64).log10());
                ys.push(v.log10());
            }
            (xs, ys)
        }
    };
    let line = linear_fit(&xs, &ys)?;
    let kappa = line.slope.abs();
    if kappa == 0.0 {
        return Err(Error::UndefinedEstimator(format!("{}: zero slope", route.method())));
    }
    let scale = route_scale(route, series.alpha);
    Ok(DimensionEstimate {
        delta: 1.0 / (scale * kappa),
        uncertainty: line.stderr_slope / (scale * kappa * kappa),
        method: route.method(),
        excluded_n,
        scaling: Some(ScalingFit { line, abscissa: route.abscissa() }),
    })
}

fn route_scale(route: SlopeRoute, alpha: f64) -> f64 {
    match route {
        SlopeRoute::MuG1 => 1.0,
        _ => alpha,
    }
}

/// Slope route over an ensemble. The dimension comes from the curve of
/// ensemble means; the uncertainty is the standard deviation of the
/// per-member slopes propagated through `D = 1/(scale |kappa|)` (regression
/// error when fewer than two members yield a slope).
pub fn ensemble_delta_from_slope(members: &[ParamSeries], route: SlopeRoute) -> Result<DimensionEstimate> {
    let mean = ParamSeries::ensemble_mean(members)?;
    let mut est = delta_from_slope(&mean, route)?;
    let slopes = member_slopes(members, route);
    if let Ok(EnsembleStats { std: Some(std), .. }) = aggregate_ensemble(&slopes) {
        est.uncertainty = slope_to_delta_uncertainty(std, est.delta, route, mean.alpha);
    }
    Ok(est)
}

/// `|kappa|` of every member for which the route is defined.
pub fn member_slopes(members: &[ParamSeries], route: SlopeRoute) -> Vec<f64> {
    members
        .iter()
        .filter_map(|m| delta_from_slope(m, route).ok())
        .filter_map(|e| e.scaling.map(|s| s.line.slope.abs()))
        .collect()
}

/// Standard deviation of `|kappa|` mapped to one of `D`, linearized at `D`.
pub fn slope_to_delta_uncertainty(slope_std: f64, delta: f64, route: SlopeRoute, alpha: f64) -> f64 {
    slope_std * route_scale(route, alpha) * delta * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gev::theoretical_params;
    use crate::rng::RngStream;

    fn row(n: usize, m: usize, params: GevParams) -> ParamRow {
        ParamRow {
            n,
            m,
            fit: FitResult { params, outside_validity: false, ci95: None, n_boot: 0, n_failed: 0, degenerate: false },
        }
    }

    fn synthetic(kind: ObservableKind, delta: f64, alpha: f64, k: usize, grid: &[usize]) -> ParamSeries {
        let rows = grid.iter().map(|&n| row(n, k / n, theoretical_params(kind, delta, alpha, 10.0, k, n).unwrap())).collect();
        ParamSeries::new("synthetic", kind, alpha, 10.0, rows).unwrap()
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.stderr_slope < 1e-12);
    }

    #[test]
    fn repeated_abscissa_ok() {
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [1.0, 1.2, 2.1, 2.9];
        assert!(linear_fit(&x, &y).is_ok());
    }

    #[test]
    fn degenerate_abscissa() {
        assert!(linear_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn noisy_line_intercept_within_three_stderr() {
        let mut rng = RngStream::new(12, 0);
        let mut misses = 0;
        for _ in 0..200 {
            let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
            let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 3.0 + (rng.uniform() - 0.5)).collect();
            let f = linear_fit(&x, &y).unwrap();
            if (f.intercept + 3.0).abs() > 3.0 * f.stderr_intercept {
                misses += 1;
            }
        }
        assert!(misses <= 4, "{misses} misses out of 200");
    }

    #[test]
    fn sigma_g1_route() {
        let s = EnsembleStats { mean: 1.58496, std: Some(0.0), stderr: Some(0.0), count: 10 };
        assert!((delta_from_sigma_g1(&s).unwrap().delta - 0.63093).abs() < 1e-5);
        let t = EnsembleStats { mean: 1.0 / 1.585, std: None, stderr: None, count: 1 };
        assert!((delta_from_sigma_g1(&t).unwrap().delta - 1.585).abs() < 1e-12);
        let bad = EnsembleStats { mean: 0.0, std: None, stderr: None, count: 1 };
        assert!(delta_from_sigma_g1(&bad).is_err());
    }

    #[test]
    fn sigma_g1_uncertainty_propagation() {
        let s = EnsembleStats { mean: 2.0, std: Some(0.4), stderr: None, count: 5 };
        assert!((delta_from_sigma_g1(&s).unwrap().uncertainty - 0.1).abs() < 1e-15);
    }

    #[test]
    fn xi_route() {
        let pos = EnsembleStats { mean: 0.39624, std: Some(0.01), stderr: None, count: 3 };
        let neg = EnsembleStats { mean: -0.39624, ..pos };
        let a = delta_from_xi(&pos, 4.0, Method::XiG2).unwrap();
        let b = delta_from_xi(&neg, 4.0, Method::XiG3).unwrap();
        assert!((a.delta - 0.63093).abs() < 1e-5);
        assert_eq!(a.delta, b.delta);
        assert_eq!(a.uncertainty, b.uncertainty);
        let zero = EnsembleStats { mean: 0.0, ..pos };
        assert!(matches!(delta_from_xi(&zero, 4.0, Method::XiG2), Err(Error::UndefinedEstimator(_))));
    }

    #[test]
    fn mu_g1_exact_regression() {
        let delta = 0.6309;
        let rows = [1000, 2000, 5000, 10_000]
            .iter()
            .map(|&n| row(n, 10_000_000 / n, GevParams::gumbel(3.0 - (n as f64).ln() / delta, 1.0).unwrap()))
            .collect();
        let s = ParamSeries::new("s", ObservableKind::G1, 4.0, 10.0, rows).unwrap();
        let est = delta_from_slope(&s, SlopeRoute::MuG1).unwrap();
        assert!((est.delta - delta).abs() < 1e-12);
        assert!(est.excluded_n.is_empty());
    }

    #[test]
    fn slope_gate_excludes_and_reports() {
        let grid = [100, 1000, 2000, 5000, 10_000, 20_000];
        let s = synthetic(ObservableKind::G2, 0.7, 4.0, 10_000_000, &grid);
        let est = delta_from_slope(&s, SlopeRoute::MuG2).unwrap();
        assert_eq!(est.excluded_n, vec![100, 20_000]);
        let short = synthetic(ObservableKind::G2, 0.7, 4.0, 10_000_000, &[100, 1000, 2000]);
        assert!(matches!(delta_from_slope(&short, SlopeRoute::MuG2), Err(Error::Insufficient(_))));
    }

    #[test]
    fn route_observable_mismatch() {
        let s = synthetic(ObservableKind::G2, 0.7, 4.0, 10_000_000, &[1000, 2000, 5000]);
        assert!(delta_from_slope(&s, SlopeRoute::SigmaG3).is_err());
    }

    #[test]
    fn synthetic_truth_all_routes() {
        let k = 100_000_000;
        let grid = [1000, 2000, 5000, 10_000, 50_000];
        for delta in [0.6309, 1.0, 1.2583, 1.585] {
            let alpha = 4.0;
            let mut found = Vec::new();
            for route in [SlopeRoute::MuG1, SlopeRoute::MuG2, SlopeRoute::SigmaG2, SlopeRoute::SigmaG3] {
                let s = synthetic(route.observable(), delta, alpha, k, &grid);
                found.push(delta_from_slope(&s, route).unwrap().delta);
            }
            let g1 = theoretical_params(ObservableKind::G1, delta, alpha, 10.0, k, 1000).unwrap();
            let stats = |v: f64| EnsembleStats { mean: v, std: Some(0.0), stderr: Some(0.0), count: 2 };
            found.push(delta_from_sigma_g1(&stats(g1.sigma)).unwrap().delta);
            for (kind, m) in [(ObservableKind::G2, Method::XiG2), (ObservableKind::G3, Method::XiG3)] {
                let p = theoretical_params(kind, delta, alpha, 10.0, k, 1000).unwrap();
                found.push(delta_from_xi(&stats(p.xi), alpha, m).unwrap().delta);
            }
            for d in found {
                assert!((d - delta).abs() < 1e-10, "{d} vs {delta}");
            }
        }
    }

    #[test]
    fn aggregate_examples() {
        let same = aggregate_ensemble(&[2.0; 5]).unwrap();
        assert_eq!(same.std, Some(0.0));
        let two = aggregate_ensemble(&[1.0, 4.0]).unwrap();
        assert_eq!(two.mean, 2.5);
        let one = aggregate_ensemble(&[1.0]).unwrap();
        assert_eq!(one.std, None);
        let mut rng = RngStream::new(3, 3);
        let thirty: Vec<f64> = (0..30).map(|_| rng.uniform()).collect();
        let s = aggregate_ensemble(&thirty).unwrap();
        assert!((s.stderr.unwrap() - s.std.unwrap() / 30f64.sqrt()).abs() < 1e-12);
        assert!(aggregate_ensemble(&[]).is_err());
    }

    #[test]
    fn spread_components_split() {
        let groups = vec![vec![1.0, 1.0, 1.0], vec![3.0, 3.0, 3.0]];
        let c = spread_components(&groups).unwrap();
        assert_eq!(c.within_centers, Some(0.0));
        assert!((c.between_centers.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.combined.unwrap() > 0.0);
    }

    #[test]
    fn ensemble_slope_uses_member_spread() {
        let k = 10_000_000;
        let grid = [1000, 2000, 5000, 10_000];
        let deltas = [0.60, 0.62, 0.64];
        let members: Vec<ParamSeries> =
            deltas.iter().map(|&d| synthetic(ObservableKind::G2, d, 4.0, k, &grid)).collect();
        let est = ensemble_delta_from_slope(&members, SlopeRoute::MuG2).unwrap();
        assert!(est.delta > 0.6 && est.delta < 0.64);
        // slopes are exactly 1/(4 D) per member
        let kappas: Vec<f64> = deltas.iter().map(|d| 1.0 / (4.0 * d)).collect();
        let mean = kappas.iter().sum::<f64>() / 3.0;
        let std = (kappas.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        let kappa = 1.0 / (4.0 * est.delta);
        assert!((est.uncertainty - std / (4.0 * kappa * kappa)).abs() < 1e-12);
    }

    #[test]
    fn method_tags_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }
}
