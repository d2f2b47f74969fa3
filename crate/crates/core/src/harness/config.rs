use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{IfsBranch, Point, SystemSpec};
use crate::observables::ObservableKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableTemplate {
    pub kind: ObservableKind,
    pub alpha: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub observables: Vec<ObservableTemplate>,
    /// Series length per realization.
    pub k: usize,
    pub n_grid: Vec<usize>,
    /// Realizations per center.
    pub ensemble: usize,
    pub centers: usize,
    pub seed: u64,
    pub burn_in: usize,
    /// Bootstrap resamples per cell; 0 skips intervals.
    pub bootstrap_b: usize,
    pub output_dir: PathBuf,
    /// Basin point for center and start selection; system default if unset.
    pub start: Option<Point>,
    /// Fixed center shared by every realization (requires `centers = 1`).
    pub center: Option<Point>,
}

const KEYS: &[&str] = &[
    "system",
    "weight",
    "ifs_offsets",
    "ifs_ratios",
    "ifs_weights",
    "baker_alpha",
    "gamma_a",
    "gamma_b",
    "a",
    "b",
    "start",
    "center",
    "observables",
    "alpha",
    "C",
    "k",
    "n_grid",
    "ensemble",
    "centers",
    "seed",
    "burn_in",
    "bootstrap_B",
    "output_dir",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        let line = self.map.get(key).map_or(0, |(l, _)| *l);
        Error::Config { line, key: key.to_string(), msg: msg.into() }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse::<f64>().map_err(|_| self.err(key, format!("'{v}' is not a number"))),
        }
    }

    fn count_or(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.raw(key) {
            None => default.ok_or_else(|| self.err(key, "required")),
            Some(v) => parse_count(v).ok_or_else(|| self.err(key, format!("'{v}' is not a non-negative integer"))),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                split_list(v)
                    .map(|s| s.parse::<f64>().map_err(|_| self.err(key, format!("'{s}' is not a number"))))
                    .collect()
            })
            .transpose()
    }

    fn point(&self, key: &str) -> Result<Option<Point>> {
        match self.floats(key)? {
            None => Ok(None),
            Some(c) => Point::from_slice(&c).map(Some).map_err(|e| self.err(key, e.to_string())),
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Integer, also accepted in exact scientific form (`1e7`).
fn parse_count(v: &str) -> Option<usize> {
    let v = v.trim().replace('_', "");
    if let Ok(n) = v.parse::<usize>() {
        return Some(n);
    }
    let f: f64 = v.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(53)).then_some(f as usize)
}

/// Parses a `key = value` config document. `#` starts a comment; list values
/// are comma-separated. Defaults are filled in and the result validated.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.to_string(),
            msg: "expected 'key = value'".into(),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config { line, key: key.to_string(), msg: "unknown key".into() });
        }
        if let Some((first, _)) = map.get(key) {
            return Err(Error::Config { line, key: key.to_string(), msg: format!("duplicate key (first set on line {first})") });
        }
        map.insert(key.to_string(), (line, value.trim().to_string()));
    }
    let e = Entries { map };

    let system = parse_system(&e)?;
    system.validate().map_err(|err| e.err("system", err.to_string()))?;

    let kinds = match e.raw("observables") {
        None => ObservableKind::ALL.to_vec(),
        Some(v) => {
            let mut kinds = Vec::new();
            for s in split_list(v) {
                let kind: ObservableKind = s.parse().map_err(|err: Error| e.err("observables", err.to_string()))?;
                if kinds.contains(&kind) {
                    return Err(e.err("observables", format!("{kind} listed twice")));
                }
                kinds.push(kind);
            }
            if kinds.is_empty() {
                return Err(e.err("observables", "empty list"));
            }
            kinds
        }
    };
    let alpha = e.f64_or("alpha", 4.0)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(e.err("alpha", "must be positive"));
    }
    let c = e.f64_or("C", 10.0)?;
    if !c.is_finite() {
        return Err(e.err("C", "must be finite"));
    }
    let observables = kinds.into_iter().map(|kind| ObservableTemplate { kind, alpha, c }).collect();

    let k = e.count_or("k", None)?;
    if k < 2 {
        return Err(e.err("k", "series length must be at least 2"));
    }
    let n_grid = match e.raw("n_grid") {
        None => vec![((k as f64).sqrt().round() as usize).max(1)],
        Some(v) => split_list(v)
            .map(|s| parse_count(s).ok_or_else(|| e.err("n_grid", format!("'{s}' is not a block count"))))
            .collect::<Result<Vec<_>>>()?,
    };
    let grid_key = if e.raw("n_grid").is_some() { "n_grid" } else { "k" };
    if n_grid.is_empty() {
        return Err(e.err("n_grid", "empty list"));
    }
    for (i, &n) in n_grid.iter().enumerate() {
        if n == 0 {
            return Err(e.err(grid_key, "block count must be at least 1"));
        }
        if k / n < 2 {
            return Err(e.err(grid_key, format!("n = {n} leaves blocks of {} < 2 values", k / n)));
        }
        if n_grid[..i].contains(&n) {
            return Err(e.err(grid_key, format!("n = {n} listed twice")));
        }
    }

    let ensemble = e.count_or("ensemble", Some(30))?;
    if ensemble == 0 {
        return Err(e.err("ensemble", "must be at least 1"));
    }
    let centers = e.count_or("centers", Some(30))?;
    if centers == 0 {
        return Err(e.err("centers", "must be at least 1"));
    }
    let seed = match e.raw("seed") {
        None => 0,
        Some(v) => v.parse::<u64>().map_err(|_| e.err("seed", format!("'{v}' is not a 64-bit unsigned integer")))?,
    };
    let burn_in = e.count_or("burn_in", Some(system.default_burn_in()))?;
    if burn_in == 0 {
        return Err(e.err("burn_in", "must be at least 1"));
    }
    let bootstrap_b = e.count_or("bootstrap_B", Some(1000))?;
    if bootstrap_b != 0 && bootstrap_b < 100 {
        return Err(e.err("bootstrap_B", "must be 0 (no intervals) or at least 100"));
    }
    let output_dir = PathBuf::from(e.raw("output_dir").unwrap_or("out"));

    let dim = system.ambient_dim();
    let start = e.point("start")?;
    let center = e.point("center")?;
    for (key, p) in [("start", start), ("center", center)] {
        if let Some(p) = p {
            if p.dim() != dim {
                return Err(e.err(key, format!("{} coordinates given, system is {dim}-dimensional", p.dim())));
            }
            if !p.is_finite() {
                return Err(e.err(key, "non-finite coordinate"));
            }
        }
    }
    if center.is_some() && centers != 1 {
        return Err(e.err("centers", "a fixed center requires centers = 1"));
    }

    Ok(ExperimentConfig {
        system,
        observables,
        k,
        n_grid,
        ensemble,
        centers,
        seed,
        burn_in,
        bootstrap_b,
        output_dir,
        start,
        center,
    })
}

fn parse_system(e: &Entries) -> Result<SystemSpec> {
    let tag = e.raw("system").ok_or_else(|| e.err("system", "required"))?;
    let allowed: &[&str] = match tag {
        "cantor" => &["weight"],
        "sierpinski" => &[],
        "weighted_ifs" => &["ifs_offsets", "ifs_ratios", "ifs_weights"],
        "baker" => &["baker_alpha", "gamma_a", "gamma_b"],
        "henon" | "lozi" => &["a", "b"],
        other => return Err(e.err("system", format!("unknown system '{other}'"))),
    };
    for key in ["weight", "ifs_offsets", "ifs_ratios", "ifs_weights", "baker_alpha", "gamma_a", "gamma_b", "a", "b"] {
        if e.raw(key).is_some() && !allowed.contains(&key) {
            return Err(e.err(key, format!("not a parameter of system '{tag}'")));
        }
    }
    Ok(match tag {
        "cantor" => SystemSpec::CantorIfs { w: e.f64_or("weight", 0.5)? },
        "sierpinski" => SystemSpec::Sierpinski,
        "weighted_ifs" => {
            let offsets = e.floats("ifs_offsets")?.ok_or_else(|| e.err("ifs_offsets", "required"))?;
            let ratios = e.floats("ifs_ratios")?.ok_or_else(|| e.err("ifs_ratios", "required"))?;
            let weights = e.floats("ifs_weights")?.ok_or_else(|| e.err("ifs_weights", "required"))?;
            if ratios.len() != offsets.len() {
                return Err(e.err("ifs_ratios", format!("{} ratios for {} offsets", ratios.len(), offsets.len())));
            }
            if weights.len() != offsets.len() {
                return Err(e.err("ifs_weights", format!("{} weights for {} offsets", weights.len(), offsets.len())));
            }
            let branches = offsets
                .iter()
                .zip(&ratios)
                .zip(&weights)
                .map(|((&offset, &ratio), &weight)| IfsBranch { offset, ratio, weight })
                .collect();
            SystemSpec::WeightedIfs { branches }
        }
        "baker" => {
            let SystemSpec::Baker { alpha, gamma_a, gamma_b } = SystemSpec::baker_classical() else { unreachable!() };
            SystemSpec::Baker {
                alpha: e.f64_or("baker_alpha", alpha)?,
                gamma_a: e.f64_or("gamma_a", gamma_a)?,
                gamma_b: e.f64_or("gamma_b", gamma_b)?,
            }
        }
        "henon" => SystemSpec::Henon { a: e.f64_or("a", 1.4)?, b: e.f64_or("b", 0.3)? },
        _ => SystemSpec::Lozi { a: e.f64_or("a", 1.7)?, b: e.f64_or("b", 0.5)? },
    })
}

impl ExperimentConfig {
    /// Minimal config with every default applied.
    pub fn new(system: SystemSpec, k: usize) -> Result<Self> {
        let mut text = format!("k = {k}\n");
        text.push_str(&system_lines(&system));
        parse_config(&text)
    }

    /// Fully resolved config as a config document; parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let mut s = system_lines(&self.system);
        let join = |v: &[f64]| v.iter().map(|x| fmt_roundtrip(*x)).collect::<Vec<_>>().join(", ");
        if let Some(p) = self.start {
            let _ = writeln!(s, "start = {}", join(p.coords()));
        }
        if let Some(p) = self.center {
            let _ = writeln!(s, "center = {}", join(p.coords()));
        }
        let kinds: Vec<&str> = self.observables.iter().map(|o| o.kind.tag()).collect();
        let _ = writeln!(s, "observables = {}", kinds.join(", "));
        if let Some(o) = self.observables.first() {
            let _ = writeln!(s, "alpha = {}", fmt_roundtrip(o.alpha));
            let _ = writeln!(s, "C = {}", fmt_roundtrip(o.c));
        }
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "n_grid = {}", grid.join(", "));
        let _ = writeln!(s, "ensemble = {}", self.ensemble);
        let _ = writeln!(s, "centers = {}", self.centers);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "burn_in = {}", self.burn_in);
        let _ = writeln!(s, "bootstrap_B = {}", self.bootstrap_b);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }

    /// Block size for each grid entry.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.n_grid.iter().map(|n| self.k / n).collect()
    }

    pub fn members(&self) -> usize {
        self.centers * self.ensemble
    }
}

fn fmt_roundtrip(x: f64) -> String {
    format!("{x:?}")
}

fn system_lines(system: &SystemSpec) -> String {
    let f = |x: &f64| fmt_roundtrip(*x);
    let mut s = format!("system = {}\n", system.tag());
    match system {
        SystemSpec::CantorIfs { w } => {
            let _ = writeln!(s, "weight = {}", f(w));
        }
        SystemSpec::Sierpinski => {}
        SystemSpec::WeightedIfs { branches } => {
            let col = |g: fn(&IfsBranch) -> f64| branches.iter().map(|b| f(&g(b))).collect::<Vec<_>>().join(", ");
            let _ = writeln!(s, "ifs_offsets = {}", col(|b| b.offset));
            let _ = writeln!(s, "ifs_ratios = {}", col(|b| b.ratio));
            let _ = writeln!(s, "ifs_weights = {}", col(|b| b.weight));
        }
        SystemSpec::Baker { alpha, gamma_a, gamma_b } => {
            let _ = writeln!(s, "baker_alpha = {}\ngamma_a = {}\ngamma_b = {}", f(alpha), f(gamma_a), f(gamma_b));
        }
        SystemSpec::Henon { a, b } | SystemSpec::Lozi { a, b } => {
            let _ = writeln!(s, "a = {}\nb = {}", f(a), f(b));
        }
    }
    s
}
