use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{DimensionEstimate, Method, SpreadComponents};
use crate::error::{Error, Result};
use crate::gof::model_selection;
use crate::lmoments::{bootstrap_ci, fit, FitResult};
use crate::maps::Point;
use crate::observables::{stream_block_minima, ObservableKind, StreamedMinima};
use crate::rng::{Purpose, RngStream};

use super::config::{ExperimentConfig, ObservableTemplate};
use super::records::{write_records_csv, ExperimentRecord, RunSidecar, SeedLineage};
use super::report::{estimate_dimension, TheoryLookup};

const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub system: String,
    pub method: Method,
    pub estimate: Option<DimensionEstimate>,
    pub spread: Option<SpreadComponents>,
    pub members: usize,
    pub clamped_excluded: usize,
    pub theoretical: Option<f64>,
    /// Why no estimate was produced.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub records: usize,
    pub failed_cells: usize,
    pub estimates: Vec<EstimateEntry>,
}

impl RunSummary {
    pub fn from_records(records: &[ExperimentRecord], theory: &TheoryLookup) -> Self {
        let mut systems: Vec<&str> = records.iter().map(|r| r.system.as_str()).collect();
        systems.sort_unstable();
        systems.dedup();
        let mut estimates = Vec::new();
        for system in systems {
            for method in Method::ALL {
                if !records.iter().any(|r| r.system == system && r.observable == method.observable()) {
                    continue;
                }
                let theoretical = theory.dimension(system);
                let entry = match estimate_dimension(records, system, method) {
                    Ok(e) => EstimateEntry {
                        system: system.to_string(),
                        method,
                        estimate: Some(e.estimate),
                        spread: e.spread,
                        members: e.members,
                        clamped_excluded: e.clamped_excluded,
                        theoretical,
                        reason: None,
                    },
                    Err(err) => EstimateEntry {
                        system: system.to_string(),
                        method,
                        estimate: None,
                        spread: None,
                        members: 0,
                        clamped_excluded: 0,
                        theoretical,
                        reason: Some(err.to_string()),
                    },
                };
                estimates.push(entry);
            }
        }
        Self { records: records.len(), failed_cells: records.iter().filter(|r| r.failed()).count(), estimates }
    }

    pub fn get(&self, system: &str, method: Method) -> Option<&EstimateEntry> {
        self.estimates.iter().find(|e| e.system == system && e.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    pub summary: RunSummary,
}

/// Runs every (center, realization) member of the grid on the current rayon
/// pool. Each member streams one orbit of length `k` and serves all block
/// counts and observables. Records come out sorted by (center, realization,
/// observable, n) whatever the schedule.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let members: Vec<(usize, usize)> =
        (0..config.centers).flat_map(|c| (0..config.ensemble).map(move |r| (c, r))).collect();
    let per_member: Vec<Vec<ExperimentRecord>> =
        members.par_iter().map(|&(c, r)| run_member(config, c, r, &config.n_grid, &config.observables)).collect();
    let records: Vec<ExperimentRecord> = per_member.into_iter().flatten().collect();
    let theory = TheoryLookup::from_systems([&config.system]);
    let summary = RunSummary::from_records(&records, &theory);
    Ok(RunOutput { config: config.clone(), records, summary })
}

/// Recomputes a single record from the config and its grid key.
pub fn reproduce_record(
    config: &ExperimentConfig,
    center_idx: usize,
    realization_idx: usize,
    kind: ObservableKind,
    n: usize,
) -> Result<ExperimentRecord> {
    let template = config
        .observables
        .iter()
        .find(|o| o.kind == kind)
        .ok_or_else(|| Error::Domain(format!("observable {kind} not in config")))?;
    if !config.n_grid.contains(&n) {
        return Err(Error::Domain(format!("n = {n} not in the config grid")));
    }
    run_member(config, center_idx, realization_idx, &[n], std::slice::from_ref(template))
        .pop()
        .ok_or_else(|| Error::Domain("no record produced".into()))
}

fn orbit_points(config: &ExperimentConfig, c: usize, r: usize) -> Result<(Point, Point)> {
    let basin = config.start.unwrap_or_else(|| config.system.default_basin_point());
    let center = match config.center {
        Some(p) => p,
        None => {
            let mut rng = RngStream::keyed(config.seed, Purpose::Center, c as u64, 0, 0);
            config.system.select_center_from(basin, &mut rng, config.burn_in)?
        }
    };
    let mut rng = RngStream::keyed(config.seed, Purpose::Start, c as u64, r as u64, 0);
    let start = config.system.select_center_from(basin, &mut rng, config.burn_in)?;
    Ok((center, start))
}

fn run_member(
    config: &ExperimentConfig,
    c: usize,
    r: usize,
    n_grid: &[usize],
    observables: &[ObservableTemplate],
) -> Vec<ExperimentRecord> {
    let mut orbit_rng = RngStream::keyed(config.seed, Purpose::Orbit, c as u64, r as u64, 0);
    let cell_seed = orbit_rng.stream();
    let streamed: Result<StreamedMinima> = orbit_points(config, c, r)
        .and_then(|(center, start)| stream_block_minima(&config.system, start, center, config.k, n_grid, &mut orbit_rng));

    let mut out = Vec::with_capacity(observables.len() * n_grid.len());
    let mut obs_sorted: Vec<&ObservableTemplate> = observables.iter().collect();
    obs_sorted.sort_by_key(|o| o.kind);
    for obs in obs_sorted {
        let mut order: Vec<usize> = (0..n_grid.len()).collect();
        order.sort_by_key(|&i| n_grid[i]);
        for i in order {
            let n = n_grid[i];
            let mut rec = ExperimentRecord {
                system: config.system.tag().to_string(),
                observable: obs.kind,
                alpha: obs.alpha,
                c: obs.c,
                center_idx: c,
                realization_idx: r,
                n,
                m: config.k / n,
                params: None,
                ci95: None,
                ks_winner: String::new(),
                ks_d: None,
                clamp_count: 0,
                cell_seed,
            };
            match &streamed {
                Err(e) => rec.ks_winner = format!("fail:{}", reason_code(e)),
                Ok(s) => {
                    rec.clamp_count = s.clamp_count;
                    let maxima = s.per_n[i].maxima(obs.kind, obs.alpha, obs.c).maxima;
                    match fit_cell(config, c, r, obs.kind, n, &maxima) {
                        Err(e) => rec.ks_winner = format!("fail:{}", reason_code(&e)),
                        Ok(f) => {
                            rec.params = Some(f.params);
                            rec.ci95 = f.ci95;
                            if let Ok(ranking) = model_selection(&maxima) {
                                if let Some(best) = ranking.first() {
                                    rec.ks_winner = best.model_name.clone();
                                    rec.ks_d = Some(best.statistic);
                                }
                            }
                        }
                    }
                }
            }
            out.push(rec);
        }
    }
    out
}

fn fit_cell(config: &ExperimentConfig, c: usize, r: usize, kind: ObservableKind, n: usize, maxima: &[f64]) -> Result<FitResult> {
    if config.bootstrap_b == 0 {
        return fit(maxima);
    }
    let extra = ((kind as u64) << 32) | n as u64;
    let mut rng = RngStream::keyed(config.seed, Purpose::Bootstrap, c as u64, r as u64, extra);
    bootstrap_ci(maxima, config.bootstrap_b, CI_LEVEL, &mut rng)
}

/// Short machine-readable failure reason.
pub(crate) fn reason_code(e: &Error) -> &'static str {
    match e {
        Error::OrbitDivergence { .. } => "divergence",
        Error::InvalidSystem(_) => "invalid_system",
        Error::InvalidPartition { .. } => "invalid_partition",
        Error::EmptySample => "empty",
        Error::SampleTooSmall { .. } => "sample_too_small",
        Error::NonFinite => "non_finite",
        Error::Degenerate => "degenerate",
        Error::Domain(_) => "domain",
        Error::UndefinedEstimator(_) => "undefined",
        Error::Insufficient(_) => "insufficient",
        Error::Config { .. } => "config",
        Error::Record(_) => "record",
        Error::Io(_) => "io",
    }
}

/// Writes `<dir>/<stem>.csv` and the `<dir>/<stem>.json` sidecar; returns
/// both paths.
pub fn write_run(output: &RunOutput, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let mut buf = Vec::new();
    write_records_csv(&output.records, &mut buf)?;
    fs::write(&csv_path, buf)?;
    let sidecar = RunSidecar {
        config: output.config.clone(),
        config_text: output.config.to_config_text(),
        seed_lineage: SeedLineage::new(output.config.seed),
        summary: output.summary.clone(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    fs::write(&json_path, json)?;
    Ok((csv_path, json_path))
}
