use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dimension::{
    aggregate_ensemble, delta_from_sigma_g1, delta_from_xi, ensemble_delta_from_slope, linear_fit, member_slopes,
    slope_to_delta_uncertainty, spread_components, DimensionEstimate, Method, ParamRow, ParamSeries,
    SpreadComponents,
};
use crate::error::{Error, Result};
use crate::gev::{theoretical_params, GevParams};
use crate::lmoments::{FitResult, SHAPE_VALIDITY};
use crate::maps::SystemSpec;
use crate::observables::ObservableKind;

use super::fmt_sig9;
use super::records::ExperimentRecord;
use super::run::reason_code;

/// Theoretical dimension by system tag. Tags without an explicit system fall
/// back to the classical parameters (none for `weighted_ifs`).
#[derive(Debug, Clone, Default)]
pub struct TheoryLookup {
    systems: BTreeMap<String, SystemSpec>,
}

impl TheoryLookup {
    pub fn from_systems<'a>(systems: impl IntoIterator<Item = &'a SystemSpec>) -> Self {
        let mut lookup = Self::default();
        for s in systems {
            lookup.systems.insert(s.tag().to_string(), s.clone());
        }
        lookup
    }

    pub fn insert(&mut self, system: SystemSpec) {
        self.systems.insert(system.tag().to_string(), system);
    }

    pub fn dimension(&self, tag: &str) -> Option<f64> {
        if let Some(s) = self.systems.get(tag) {
            return s.theoretical_dimension();
        }
        let fallback = match tag {
            "cantor" => SystemSpec::cantor(),
            "sierpinski" => SystemSpec::Sierpinski,
            "baker" => SystemSpec::baker_classical(),
            "henon" => SystemSpec::henon_classical(),
            "lozi" => SystemSpec::lozi_classical(),
            _ => return None,
        };
        fallback.theoretical_dimension()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodEstimate {
    pub estimate: DimensionEstimate,
    /// Spread of the per-member values split by center: the fitted
    /// parameter for point routes, the slope (mapped to dimension units) for
    /// slope routes.
    pub spread: Option<SpreadComponents>,
    pub members: usize,
    /// Members left out because their orbit hit the center below the
    /// distance clamp.
    pub clamped_excluded: usize,
}

fn row_of(r: &ExperimentRecord, params: GevParams) -> ParamRow {
    ParamRow {
        n: r.n,
        m: r.m,
        fit: FitResult {
            params,
            outside_validity: params.xi.abs() > SHAPE_VALIDITY,
            ci95: r.ci95,
            n_boot: 0,
            n_failed: 0,
            degenerate: false,
        },
    }
}

fn common_alpha(recs: &[&ExperimentRecord]) -> Result<(f64, f64)> {
    let first = recs.first().ok_or(Error::EmptySample)?;
    if recs.iter().any(|r| r.alpha != first.alpha || r.c != first.c) {
        return Err(Error::Domain("records mix different alpha or C values".into()));
    }
    Ok((first.alpha, first.c))
}

/// One parameter series per (center, realization) member whose cells all
/// succeeded and whose orbit never hit the distance clamp, keyed by that
/// member.
pub fn member_series(
    records: &[ExperimentRecord],
    system: &str,
    kind: ObservableKind,
) -> Result<Vec<((usize, usize), ParamSeries)>> {
    let recs: Vec<&ExperimentRecord> =
        records.iter().filter(|r| r.system == system && r.observable == kind).collect();
    let (alpha, c) = common_alpha(&recs)?;
    let mut by_member: BTreeMap<(usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in recs {
        by_member.entry((r.center_idx, r.realization_idx)).or_default().push(r);
    }
    let mut out = Vec::new();
    for (key, rows) in by_member {
        if rows.iter().any(|r| r.clamp_count > 0) {
            continue;
        }
        let Some(rows) = rows.iter().map(|r| r.params.map(|p| row_of(r, p))).collect::<Option<Vec<_>>>() else {
            continue;
        };
        out.push((key, ParamSeries::new(system, kind, alpha, c, rows)?));
    }
    Ok(out)
}

/// Dimension estimate for one system and method, recomputed from raw records.
///
/// Point routes use the grid entry whose block count is closest to the
/// block size (`n ~ sqrt(k)`); slope routes use every member whose cells all
/// succeeded. Members with clamped distances are left out of both: one of
/// their block maxima is an artifact of floating-point resolution.
pub fn estimate_dimension(records: &[ExperimentRecord], system: &str, method: Method) -> Result<MethodEstimate> {
    let kind = method.observable();
    let recs: Vec<&ExperimentRecord> =
        records.iter().filter(|r| r.system == system && r.observable == kind).collect();
    if recs.is_empty() {
        return Err(Error::Insufficient(format!("no {kind} records for system '{system}'")));
    }
    let (alpha, _) = common_alpha(&recs)?;
    let mut clamped: Vec<(usize, usize)> =
        recs.iter().filter(|r| r.clamp_count > 0).map(|r| (r.center_idx, r.realization_idx)).collect();
    clamped.sort_unstable();
    clamped.dedup();
    let clamped_excluded = clamped.len();

    if let Some(route) = method.slope_route() {
        let members = member_series(records, system, kind)?;
        if members.is_empty() {
            return Err(Error::Insufficient(format!("no complete {kind} member for '{system}'")));
        }
        let series: Vec<ParamSeries> = members.iter().map(|(_, s)| s.clone()).collect();
        let estimate = ensemble_delta_from_slope(&series, route)?;
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for ((center, _), s) in &members {
            if let Some(kappa) = member_slopes(std::slice::from_ref(s), route).first() {
                groups.entry(*center).or_default().push(*kappa);
            }
        }
        let groups: Vec<Vec<f64>> = groups.into_values().collect();
        let to_delta = |v: Option<f64>| v.map(|sd| slope_to_delta_uncertainty(sd, estimate.delta, route, alpha));
        let spread = spread_components(&groups).ok().map(|s| SpreadComponents {
            within_centers: to_delta(s.within_centers),
            between_centers: to_delta(s.between_centers),
            combined: to_delta(s.combined),
        });
        return Ok(MethodEstimate { estimate, spread, members: series.len(), clamped_excluded });
    }

    let mut grid: Vec<(usize, usize)> = recs.iter().map(|r| (r.n, r.m)).collect();
    grid.sort_unstable();
    grid.dedup();
    let balance = |&(n, m): &(usize, usize)| ((n as f64).ln() - (m as f64).ln()).abs();
    let (n_pick, _) = *grid
        .iter()
        .min_by(|a, b| balance(a).total_cmp(&balance(b)))
        .expect("non-empty grid");
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in recs.iter().filter(|r| r.n == n_pick && r.clamp_count == 0) {
        if let Some(p) = r.params {
            let v = if method == Method::SigmaG1 { p.sigma } else { p.xi };
            groups.entry(r.center_idx).or_default().push(v);
        }
    }
    let values: Vec<f64> = groups.values().flatten().copied().collect();
    if values.is_empty() {
        return Err(Error::Insufficient(format!("every {kind} cell at n = {n_pick} failed for '{system}'")));
    }
    let stats = aggregate_ensemble(&values)?;
    let estimate = match method {
        Method::SigmaG1 => delta_from_sigma_g1(&stats)?,
        _ => delta_from_xi(&stats, alpha, method)?,
    };
    let groups: Vec<Vec<f64>> = groups.into_values().collect();
    Ok(MethodEstimate { estimate, spread: spread_components(&groups).ok(), members: values.len(), clamped_excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    /// IFS attractors: Cantor and Sierpinski.
    T1,
    /// Dissipative maps: Baker, Hénon, Lozi.
    T2,
}

impl TableKind {
    pub fn systems(&self) -> &'static [&'static str] {
        match self {
            TableKind::T1 => &["cantor", "sierpinski"],
            TableKind::T2 => &["baker", "henon", "lozi"],
        }
    }
}

impl std::str::FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TableKind::T1),
            "t2" => Ok(TableKind::T2),
            other => Err(Error::Domain(format!("unknown table '{other}' (expected t1 or t2)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub value: Option<f64>,
    pub uncertainty: Option<f64>,
    /// Reason code for a blank cell.
    pub reason: Option<String>,
}

impl TableCell {
    fn blank(reason: &str) -> Self {
        Self { value: None, uncertainty: None, reason: Some(reason.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub method: Option<Method>,
    pub cells: Vec<TableCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableData {
    pub kind: TableKind,
    pub systems: Vec<String>,
    pub rows: Vec<TableRow>,
    pub warnings: Vec<String>,
}

const TABLE_METHODS: [(Method, &str); 3] = [
    (Method::MuG2Slope, "mu(g2)"),
    (Method::SigmaG2Slope, "sigma(g2)"),
    (Method::SigmaG3Slope, "sigma(g3)"),
];

/// Dimension from each slope route and system, plus the theoretical row.
/// Cells that cannot be estimated are blank with a reason code.
pub fn emit_table(records: &[ExperimentRecord], kind: TableKind, theory: &TheoryLookup) -> TableData {
    let systems = kind.systems();
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for (method, label) in TABLE_METHODS {
        let cells = systems
            .iter()
            .map(|&sys| {
                if !records.iter().any(|r| r.system == sys) {
                    return TableCell::blank("no_records");
                }
                match estimate_dimension(records, sys, method) {
                    Ok(e) => TableCell {
                        value: Some(e.estimate.delta),
                        uncertainty: Some(e.estimate.uncertainty),
                        reason: None,
                    },
                    Err(err) => {
                        warnings.push(format!("{sys} {label}: {err}"));
                        TableCell::blank(reason_code(&err))
                    }
                }
            })
            .collect();
        rows.push(TableRow { label: label.to_string(), method: Some(method), cells });
    }
    let cells = systems
        .iter()
        .map(|&sys| match theory.dimension(sys) {
            Some(d) => TableCell { value: Some(d), uncertainty: None, reason: None },
            None => TableCell::blank("unknown_theory"),
        })
        .collect();
    rows.push(TableRow { label: "theoretical".into(), method: None, cells });
    if !systems.iter().any(|s| records.iter().any(|r| r.system == *s)) {
        warnings.push(format!("no records for any of {}", systems.join(", ")));
    }
    TableData { kind, systems: systems.iter().map(|s| s.to_string()).collect(), rows, warnings }
}

impl TableData {
    /// CSV with three columns per system: value, one standard deviation,
    /// and a reason code for blanks.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["quantity".to_string()];
        for s in &self.systems {
            header.extend([format!("{s}_delta"), format!("{s}_std"), format!("{s}_note")]);
        }
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = vec![row.label.clone()];
            for cell in &row.cells {
                fields.push(cell.value.map(fmt_sig9).unwrap_or_default());
                fields.push(cell.uncertainty.map(fmt_sig9).unwrap_or_default());
                fields.push(cell.reason.clone().unwrap_or_default());
            }
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Aligned plain-text rendering, four decimals.
    pub fn render_text(&self) -> String {
        let mut grid = vec![std::iter::once("".to_string()).chain(self.systems.iter().cloned()).collect::<Vec<_>>()];
        for row in &self.rows {
            let mut line = vec![row.label.clone()];
            for cell in &row.cells {
                line.push(match (cell.value, cell.uncertainty, &cell.reason) {
                    (Some(v), Some(u), _) => format!("{v:.4} +/- {u:.4}"),
                    (Some(v), None, _) => format!("{v:.4}"),
                    (None, _, Some(r)) => format!("[{r}]"),
                    (None, _, None) => String::new(),
                });
            }
            grid.push(line);
        }
        let widths: Vec<usize> =
            (0..grid[0].len()).map(|j| grid.iter().map(|l| l[j].chars().count()).max().unwrap_or(0)).collect();
        let mut s = String::new();
        for line in grid {
            let cols: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(s, "{}", cols.join("  ").trim_end());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GevParam {
    Mu,
    Sigma,
    Xi,
}

impl GevParam {
    pub const ALL: [GevParam; 3] = [GevParam::Mu, GevParam::Sigma, GevParam::Xi];

    pub fn tag(&self) -> &'static str {
        match self {
            GevParam::Mu => "mu",
            GevParam::Sigma => "sigma",
            GevParam::Xi => "xi",
        }
    }

    fn of(&self, p: &GevParams) -> f64 {
        match self {
            GevParam::Mu => p.mu,
            GevParam::Sigma => p.sigma,
            GevParam::Xi => p.xi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub log10_n: f64,
    pub mean: f64,
    pub std: Option<f64>,
    pub fit_value: Option<f64>,
    pub theory_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub system: String,
    pub observable: ObservableKind,
    pub parameter: GevParam,
    pub points: Vec<CurvePoint>,
}

impl CurveSeries {
    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.csv", self.system, self.observable.tag(), self.parameter.tag())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "log10_n,mean,std,fit_value,theory_value")?;
        let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig9(p.log10_n),
                fmt_sig9(p.mean),
                opt(p.std),
                opt(p.fit_value),
                opt(p.theory_value)
            )?;
        }
        Ok(())
    }
}

/// Power-law parameters are fitted on log-log axes, the rest linearly in
/// `log10 n`.
fn is_power_law(kind: ObservableKind, param: GevParam) -> bool {
    matches!(
        (kind, param),
        (ObservableKind::G2, GevParam::Mu) | (ObservableKind::G2, GevParam::Sigma) | (ObservableKind::G3, GevParam::Sigma)
    )
}

/// Ensemble mean and standard deviation of each parameter against
/// `log10 n`, with a linear-fit overlay (three or more block counts) and
/// the theoretical value where the theory fixes it.
pub fn emit_curves(records: &[ExperimentRecord], theory: &TheoryLookup) -> Vec<CurveSeries> {
    let mut groups: BTreeMap<(String, ObservableKind), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.system.clone(), r.observable)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((system, kind), recs) in groups {
        let delta = theory.dimension(&system);
        let (alpha, c) = (recs[0].alpha, recs[0].c);
        let mut by_n: BTreeMap<(usize, usize), Vec<GevParams>> = BTreeMap::new();
        for r in &recs {
            if let Some(p) = r.params {
                by_n.entry((r.n, r.m)).or_default().push(p);
            }
        }
        if by_n.is_empty() {
            continue;
        }
        for param in GevParam::ALL {
            let mut points: Vec<CurvePoint> = by_n
                .iter()
                .map(|(&(n, m), ps)| {
                    let values: Vec<f64> = ps.iter().map(|p| param.of(p)).collect();
                    let stats = aggregate_ensemble(&values).ok();
                    let theory_value = delta.and_then(|d| {
                        let t = theoretical_params(kind, d, alpha, c, n * m, n).ok()?;
                        (!is_power_law(kind, param)).then(|| param.of(&t))
                    });
                    CurvePoint {
                        n,
                        log10_n: (n as f64).log10(),
                        mean: stats.map_or(f64::NAN, |s| s.mean),
                        std: stats.and_then(|s| s.std),
                        fit_value: None,
                        theory_value,
                    }
                })
                .collect();
            overlay_fit(&mut points, is_power_law(kind, param));
            out.push(CurveSeries { system: system.clone(), observable: kind, parameter: param, points });
        }
    }
    out
}

fn overlay_fit(points: &mut [CurvePoint], log_log: bool) {
    if points.len() < 3 {
        return;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.log10_n).collect();
    if log_log {
        if points.iter().any(|p| !(p.mean > 0.0)) {
            return;
        }
        let ys: Vec<f64> = points.iter().map(|p| p.mean.log10()).collect();
        if let Ok(line) = linear_fit(&xs, &ys) {
            for p in points.iter_mut() {
                p.fit_value = Some(10f64.powf(line.predict(p.log10_n)));
            }
        }
    } else {
        let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
        if let Ok(line) = linear_fit(&xs, &ys) {
            for p in points.iter_mut() {
                p.fit_value = Some(line.predict(p.log10_n));
            }
        }
    }
}

/// Writes one CSV per curve into `dir`; returns the paths.
pub fn write_curves(curves: &[CurveSeries], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    curves
        .iter()
        .map(|c| {
            let path = dir.join(c.file_name());
            let mut buf = Vec::new();
            c.write_csv(&mut buf)?;
            fs::write(&path, buf)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(system: &str, kind: ObservableKind, c: usize, r: usize, n: usize, m: usize, p: Option<GevParams>) -> ExperimentRecord {
        ExperimentRecord {
            system: system.into(),
            observable: kind,
            alpha: 4.0,
            c: 10.0,
            center_idx: c,
            realization_idx: r,
            n,
            m,
            params: p,
            ci95: None,
            ks_winner: if p.is_some() { "GEV".into() } else { "fail:degenerate".into() },
            ks_d: None,
            clamp_count: 0,
            cell_seed: 0,
        }
    }

    /// Exact theoretical curves for one system at `k = 1e8`, two members.
    fn synthetic(system: &str, delta: f64) -> Vec<ExperimentRecord> {
        let k = 100_000_000;
        let mut out = Vec::new();
        for member in 0..2 {
            for kind in ObservableKind::ALL {
                for n in [1000, 2000, 5000, 10_000] {
                    let p = theoretical_params(kind, delta, 4.0, 10.0, k, n).unwrap();
                    out.push(rec(system, kind, member, 0, n, k / n, Some(p)));
                }
            }
        }
        out
    }

    #[test]
    fn table_on_exact_records_recovers_dimensions() {
        let mut records = synthetic("cantor", 2f64.ln() / 3f64.ln());
        records.extend(synthetic("sierpinski", 3f64.ln() / 2f64.ln()));
        let t = emit_table(&records, TableKind::T1, &TheoryLookup::default());
        for row in &t.rows[..3] {
            assert!((row.cells[0].value.unwrap() - 0.6309297535714574).abs() < 1e-10, "{row:?}");
            assert!((row.cells[1].value.unwrap() - 1.5849625007211563).abs() < 1e-10, "{row:?}");
        }
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn theoretical_cells() {
        let t1 = emit_table(&[], TableKind::T1, &TheoryLookup::default());
        assert_eq!(t1.rows[3].label, "theoretical");
        assert_eq!(format!("{:.4}", t1.rows[3].cells[1].value.unwrap()), "1.5850");
        let t2 = emit_table(&[], TableKind::T2, &TheoryLookup::default());
        let baker = t2.rows[3].cells[0].value.unwrap();
        assert!((1.4357..1.4358).contains(&baker), "{baker}");
    }

    #[test]
    fn empty_records_blank_with_warning() {
        let t = emit_table(&[], TableKind::T2, &TheoryLookup::default());
        for row in &t.rows[..3] {
            assert!(row.cells.iter().all(|c| c.value.is_none() && c.reason.as_deref() == Some("no_records")));
        }
        assert!(!t.warnings.is_empty());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("quantity,baker_delta,baker_std,baker_note"));
    }

    #[test]
    fn table_matches_direct_recomputation() {
        let records = synthetic("lozi", 1.4);
        let t = emit_table(&records, TableKind::T2, &TheoryLookup::default());
        for row in &t.rows[..3] {
            let direct = estimate_dimension(&records, "lozi", row.method.unwrap()).unwrap();
            assert_eq!(row.cells[2].value, Some(direct.estimate.delta));
        }
        assert_eq!(t.rows[0].cells[0].reason.as_deref(), Some("no_records"));
    }

    #[test]
    fn insufficient_grid_gives_reason() {
        let records: Vec<_> = synthetic("cantor", 0.63).into_iter().filter(|r| r.n <= 2000).collect();
        let t = emit_table(&records, TableKind::T1, &TheoryLookup::default());
        assert_eq!(t.rows[0].cells[0].reason.as_deref(), Some("insufficient"));
    }

    #[test]
    fn failed_member_dropped_from_slope() {
        let mut records = synthetic("cantor", 0.63);
        records[0].params = None;
        let e = estimate_dimension(&records, "cantor", Method::MuG1Slope).unwrap();
        assert_eq!(e.members, 1);
        assert!((e.estimate.delta - 0.63).abs() < 1e-10);
    }

    #[test]
    fn clamped_members_excluded() {
        let mut records = synthetic("cantor", 0.63);
        for r in records.iter_mut().filter(|r| r.center_idx == 1) {
            r.clamp_count = 1;
            if let Some(p) = r.params.as_mut() {
                p.sigma *= 50.0;
                p.mu *= 50.0;
            }
        }
        for m in Method::ALL {
            let e = estimate_dimension(&records, "cantor", m).unwrap();
            assert!((e.estimate.delta - 0.63).abs() < 1e-10, "{m}");
            assert_eq!(e.clamped_excluded, 1);
        }
    }

    #[test]
    fn point_routes_pick_balanced_n() {
        let records = synthetic("cantor", 0.63);
        for m in [Method::SigmaG1, Method::XiG2, Method::XiG3] {
            let e = estimate_dimension(&records, "cantor", m).unwrap();
            assert!((e.estimate.delta - 0.63).abs() < 1e-10, "{m}");
            assert_eq!(e.members, 2);
        }
    }

    #[test]
    fn single_n_curve_has_no_fit() {
        let records: Vec<_> = synthetic("cantor", 0.63).into_iter().filter(|r| r.n == 1000).collect();
        let curves = emit_curves(&records, &TheoryLookup::default());
        assert_eq!(curves.len(), 9);
        for c in &curves {
            assert_eq!(c.points.len(), 1);
            assert!(c.points[0].fit_value.is_none());
            assert!(c.points[0].mean.is_finite());
            assert_eq!(c.points[0].std, Some(0.0));
        }
    }

    #[test]
    fn exact_law_fit_equals_mean() {
        let curves = emit_curves(&synthetic("cantor", 0.63), &TheoryLookup::default());
        for c in &curves {
            for p in &c.points {
                let f = p.fit_value.unwrap();
                assert!((f - p.mean).abs() <= 1e-9 * p.mean.abs().max(1.0), "{} {}", c.file_name(), p.n);
            }
        }
    }

    #[test]
    fn sigma_g1_theory_is_inverse_dimension() {
        let curves = emit_curves(&synthetic("cantor", 0.63), &TheoryLookup::default());
        let sigma = curves
            .iter()
            .find(|c| c.observable == ObservableKind::G1 && c.parameter == GevParam::Sigma)
            .unwrap();
        for p in &sigma.points {
            assert!((p.theory_value.unwrap() - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
        }
        let mu_g2 = curves
            .iter()
            .find(|c| c.observable == ObservableKind::G2 && c.parameter == GevParam::Mu)
            .unwrap();
        assert!(mu_g2.points.iter().all(|p| p.theory_value.is_none()));
    }

    #[test]
    fn curves_written_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let curves = emit_curves(&synthetic("cantor", 0.63), &TheoryLookup::default());
        let paths = write_curves(&curves, dir.path()).unwrap();
        assert_eq!(paths.len(), 9);
        let text = fs::read_to_string(dir.path().join("cantor_g1_sigma.csv")).unwrap();
        assert!(text.starts_with("log10_n,mean,std,fit_value,theory_value\n3,"));
    }
}
