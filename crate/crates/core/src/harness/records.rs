use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::lmoments::{Interval, ParamIntervals};
use crate::observables::ObservableKind;

use super::config::ExperimentConfig;
use super::fmt_sig9;
use super::run::RunSummary;

pub const RECORD_COLUMNS: [&str; 21] = [
    "system",
    "observable",
    "alpha",
    "C",
    "center_idx",
    "realization_idx",
    "n",
    "m",
    "mu",
    "sigma",
    "xi",
    "mu_lo",
    "mu_hi",
    "sigma_lo",
    "sigma_hi",
    "xi_lo",
    "xi_hi",
    "ks_winner",
    "ks_D",
    "clamp_count",
    "cell_seed",
];

/// One fitted cell of the (center, realization, observable, n) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub system: String,
    pub observable: ObservableKind,
    pub alpha: f64,
    pub c: f64,
    pub center_idx: usize,
    pub realization_idx: usize,
    pub n: usize,
    pub m: usize,
    /// `None` when the cell failed; `ks_winner` then holds `fail:<reason>`.
    pub params: Option<GevParams>,
    pub ci95: Option<ParamIntervals>,
    pub ks_winner: String,
    pub ks_d: Option<f64>,
    pub clamp_count: u64,
    /// Stream id of the orbit generator under the root seed.
    pub cell_seed: u64,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.params.is_none()
    }

    pub fn key(&self) -> (usize, usize, ObservableKind, usize) {
        (self.center_idx, self.realization_idx, self.observable, self.n)
    }

    fn fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
        let p = self.params;
        let ci = self.ci95;
        vec![
            self.system.clone(),
            self.observable.tag().to_string(),
            fmt_sig9(self.alpha),
            fmt_sig9(self.c),
            self.center_idx.to_string(),
            self.realization_idx.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            opt(p.map(|p| p.mu)),
            opt(p.map(|p| p.sigma)),
            opt(p.map(|p| p.xi)),
            opt(ci.map(|c| c.mu.lo)),
            opt(ci.map(|c| c.mu.hi)),
            opt(ci.map(|c| c.sigma.lo)),
            opt(ci.map(|c| c.sigma.hi)),
            opt(ci.map(|c| c.xi.lo)),
            opt(ci.map(|c| c.xi.hi)),
            self.ks_winner.clone(),
            opt(self.ks_d),
            self.clamp_count.to_string(),
            self.cell_seed.to_string(),
        ]
    }

    fn from_fields(row: &csv::StringRecord, line: u64) -> Result<Self> {
        let bad = |col: &str, v: &str| Error::Record(format!("line {line}: column {col}: cannot parse '{v}'"));
        let get = |i: usize| row.get(i).unwrap_or("");
        let float = |i: usize| -> Result<Option<f64>> {
            let v = get(i);
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse::<f64>().map(Some).map_err(|_| bad(RECORD_COLUMNS[i], v))
            }
        };
        let req_float = |i: usize| float(i)?.ok_or_else(|| bad(RECORD_COLUMNS[i], ""));
        let int = |i: usize| get(i).parse::<u64>().map_err(|_| bad(RECORD_COLUMNS[i], get(i)));

        let params = match (float(8)?, float(9)?, float(10)?) {
            (Some(mu), Some(sigma), Some(xi)) => Some(GevParams { mu, sigma, xi }),
            (None, None, None) => None,
            _ => return Err(Error::Record(format!("line {line}: partial parameter triple"))),
        };
        let bounds: Vec<Option<f64>> = (11..17).map(float).collect::<Result<_>>()?;
        let ci95 = if bounds.iter().all(Option::is_some) {
            let b: Vec<f64> = bounds.into_iter().flatten().collect();
            Some(ParamIntervals {
                mu: Interval { lo: b[0], hi: b[1] },
                sigma: Interval { lo: b[2], hi: b[3] },
                xi: Interval { lo: b[4], hi: b[5] },
            })
        } else if bounds.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::Record(format!("line {line}: partial interval columns")));
        };
        Ok(ExperimentRecord {
            system: get(0).to_string(),
            observable: get(1).parse().map_err(|_| bad("observable", get(1)))?,
            alpha: req_float(2)?,
            c: req_float(3)?,
            center_idx: int(4)? as usize,
            realization_idx: int(5)? as usize,
            n: int(6)? as usize,
            m: int(7)? as usize,
            params,
            ci95,
            ks_winner: get(17).to_string(),
            ks_d: float(18)?,
            clamp_count: int(19)?,
            cell_seed: int(20)?,
        })
    }
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a records CSV; the header must match [`RECORD_COLUMNS`] exactly.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORD_COLUMNS.iter().copied()) {
        return Err(Error::Record(format!("unexpected header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.records()
        .enumerate()
        .map(|(i, row)| ExperimentRecord::from_fields(&row?, i as u64 + 2))
        .collect()
}

/// How every random stream of a run is derived from the root seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub root_seed: u64,
    pub generator: String,
    pub scheme: String,
}

impl SeedLineage {
    pub fn new(root_seed: u64) -> Self {
        Self {
            root_seed,
            generator: "ChaCha8, seeded from root_seed, one stream id per key".into(),
            scheme: "stream id = splitmix64 chain over (purpose, center_idx, realization_idx, extra); \
                     purposes: center=1 (key (c,0,0)), start=2 (key (c,r,0)), orbit=3 (key (c,r,0), stored as cell_seed), \
                     bootstrap=4 (key (c,r,observable_ordinal<<32|n))"
                .into(),
        }
    }
}

/// JSON written next to a records CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub config: ExperimentConfig,
    pub config_text: String,
    pub seed_lineage: SeedLineage,
    pub summary: RunSummary,
}

pub fn read_sidecar(path: &Path) -> Result<RunSidecar> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
