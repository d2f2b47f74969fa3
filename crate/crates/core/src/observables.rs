//! Distance observables along orbits, and block maxima.
//!
//! All three observables are strictly decreasing functions of the distance to
//! the center, so the maximum of a block is the observable evaluated at the
//! block's minimum distance. [`stream_block_minima`] exploits this: it keeps
//! only the running minimum distance per block, for several block counts at
//! once, and never stores the series.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Point, SystemSpec};
use crate::rng::RngStream;

/// Distances below this are clamped to it before evaluating an observable.
pub const DISTANCE_CLAMP: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    /// `-ln d`
    G1,
    /// `d^(-1/alpha)`
    G2,
    /// `C - d^(1/alpha)`
    G3,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 3] = [ObservableKind::G1, ObservableKind::G2, ObservableKind::G3];

    pub fn tag(&self) -> &'static str {
        match self {
            ObservableKind::G1 => "g1",
            ObservableKind::G2 => "g2",
            ObservableKind::G3 => "g3",
        }
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g1" => Ok(ObservableKind::G1),
            "g2" => Ok(ObservableKind::G2),
            "g3" => Ok(ObservableKind::G3),
            other => Err(Error::Domain(format!("unknown observable '{other}'"))),
        }
    }
}

impl std::fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    pub alpha: f64,
    pub c: f64,
    pub center: Point,
}

impl ObservableSpec {
    pub fn new(kind: ObservableKind, alpha: f64, c: f64, center: Point) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !c.is_finite() {
            return Err(Error::Domain("C must be finite".into()));
        }
        if !center.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { kind, alpha, c, center })
    }

    pub fn g1(center: Point) -> Self {
        Self { kind: ObservableKind::G1, alpha: 1.0, c: 0.0, center }
    }

    /// Observable value at `p`, plus whether the distance was clamped.
    pub fn evaluate_clamped(&self, p: &Point) -> (f64, bool) {
        let d = p.distance(&self.center);
        let clamped = d < DISTANCE_CLAMP;
        (of_distance(self.kind, self.alpha, self.c, d), clamped)
    }

    pub fn evaluate(&self, p: &Point) -> f64 {
        self.evaluate_clamped(p).0
    }
}

/// Observable as a function of distance (after clamping).
#[inline]
pub fn of_distance(kind: ObservableKind, alpha: f64, c: f64, d: f64) -> f64 {
    let d = d.max(DISTANCE_CLAMP);
    match kind {
        ObservableKind::G1 => -d.ln(),
        ObservableKind::G2 => d.powf(-1.0 / alpha),
        ObservableKind::G3 => c - d.powf(1.0 / alpha),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub values: Vec<f64>,
    pub clamp_count: u64,
}

/// `X_i = g(dist(f^i(start), center))` for `i < k`. Materializes the whole
/// series; use [`stream_block_minima`] for long runs.
pub fn series(
    system: &SystemSpec,
    obs: &ObservableSpec,
    start: Point,
    k: usize,
    rng: &mut RngStream,
) -> Result<ObservableSeries> {
    if k == 0 {
        return Err(Error::Domain("series length must be at least 1".into()));
    }
    system.check_point(&start)?;
    system.check_point(&obs.center)?;
    let mut values = Vec::with_capacity(k);
    let mut clamp_count = 0;
    let mut p = start;
    for i in 0..k {
        if i > 0 {
            p = system.advance(p, rng);
            if !p.is_finite() {
                return Err(Error::OrbitDivergence { step: i });
            }
        }
        let (v, clamped) = obs.evaluate_clamped(&p);
        clamp_count += clamped as u64;
        values.push(v);
    }
    Ok(ObservableSeries { values, clamp_count })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximaSample {
    pub maxima: Vec<f64>,
    pub block_size: usize,
    pub n: usize,
}

/// Block size for `n` blocks over `k` values; rejects `n < 1` and `n > k`.
pub fn block_size(k: usize, n: usize) -> Result<usize> {
    if n == 0 || n > k {
        return Err(Error::InvalidPartition { n, len: k });
    }
    Ok(k / n)
}

/// Maxima of `n` consecutive non-overlapping blocks of `k / n` values each.
/// A trailing remainder (when `n` does not divide the length) is dropped.
pub fn block_maxima(values: &[f64], n: usize) -> Result<MaximaSample> {
    let m = block_size(values.len(), n)?;
    let maxima = values[..n * m]
        .chunks_exact(m)
        .map(|block| block.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(MaximaSample { maxima, block_size: m, n })
}

/// Per-block minimum distances for one block count.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMinima {
    pub n: usize,
    pub block_size: usize,
    pub minima: Vec<f64>,
}

impl BlockMinima {
    /// Block maxima of the observable, from the block minimum distances.
    pub fn maxima(&self, kind: ObservableKind, alpha: f64, c: f64) -> MaximaSample {
        MaximaSample {
            maxima: self.minima.iter().map(|&d| of_distance(kind, alpha, c, d)).collect(),
            block_size: self.block_size,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamedMinima {
    pub per_n: Vec<BlockMinima>,
    /// Steps whose distance fell below [`DISTANCE_CLAMP`].
    pub clamp_count: u64,
}

struct Tracker {
    m: usize,
    filled: usize,
    pos: usize,
    current: f64,
    minima: Vec<f64>,
}

/// Streams `k` orbit points from `start` and records, for every `n` in
/// `n_grid`, the minimum distance to `center` in each of the `n` blocks.
pub fn stream_block_minima(
    system: &SystemSpec,
    start: Point,
    center: Point,
    k: usize,
    n_grid: &[usize],
    rng: &mut RngStream,
) -> Result<StreamedMinima> {
    system.check_point(&start)?;
    system.check_point(&center)?;
    let mut trackers = n_grid
        .iter()
        .map(|&n| {
            let m = block_size(k, n)?;
            Ok(Tracker { m, filled: 0, pos: 0, current: f64::INFINITY, minima: Vec::with_capacity(n) })
        })
        .collect::<Result<Vec<_>>>()?;
    let limits: Vec<usize> = n_grid.iter().zip(&trackers).map(|(&n, t)| n * t.m).collect();

    let mut clamp_count = 0u64;
    let mut p = start;
    for i in 0..k {
        if i > 0 {
            p = system.advance(p, rng);
            if !p.is_finite() {
                return Err(Error::OrbitDivergence { step: i });
            }
        }
        let d = p.distance(&center);
        clamp_count += (d < DISTANCE_CLAMP) as u64;
        for (t, &limit) in trackers.iter_mut().zip(&limits) {
            if i >= limit {
                continue;
            }
            if d < t.current {
                t.current = d;
            }
            t.pos += 1;
            if t.pos == t.m {
                t.minima.push(t.current);
                t.filled += 1;
                t.pos = 0;
                t.current = f64::INFINITY;
            }
        }
    }

    let per_n = n_grid
        .iter()
        .zip(trackers)
        .map(|(&n, t)| {
            debug_assert_eq!(t.filled, n);
            BlockMinima { n, block_size: t.m, minima: t.minima }
        })
        .collect();
    Ok(StreamedMinima { per_n, clamp_count })
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    /// Distinct sample values, ascending.
    pub support: Vec<f64>,
    /// Fraction of the sample `<=` each support point.
    pub cumulative: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(Error::NonFinite);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut support = Vec::new();
        let mut cumulative = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if support.last() == Some(&x) {
                *cumulative.last_mut().unwrap() = (i + 1) as f64 / n;
            } else {
                support.push(x);
                cumulative.push((i + 1) as f64 / n);
            }
        }
        Ok(Self { support, cumulative })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Two-column CSV (`x,F`), one row per jump.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,F")?;
        for (x, f) in self.support.iter().zip(&self.cumulative) {
            writeln!(out, "{},{}", crate::harness::fmt_sig9(*x), crate::harness::fmt_sig9(*f))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn center() -> Point {
        Point::d1(0.0)
    }

    #[test]
    fn evaluate_examples() {
        let p = Point::d1(1.0 / E);
        assert!((ObservableSpec::g1(center()).evaluate(&p) - 1.0).abs() < 1e-15);

        let g2 = ObservableSpec::new(ObservableKind::G2, 4.0, 10.0, center()).unwrap();
        assert!((g2.evaluate(&Point::d1(1.0 / 16.0)) - 2.0).abs() < 1e-15);

        let g3 = ObservableSpec::new(ObservableKind::G3, 4.0, 10.0, center()).unwrap();
        assert!((g3.evaluate(&Point::d1(1.0 / 16.0)) - 9.5).abs() < 1e-15);
    }

    #[test]
    fn zero_distance_is_clamped() {
        let g1 = ObservableSpec::g1(center());
        let (v, clamped) = g1.evaluate_clamped(&center());
        assert!(clamped);
        assert!(v.is_finite());
        assert!((v + DISTANCE_CLAMP.ln()).abs() < 1e-12);

        let g3 = ObservableSpec::new(ObservableKind::G3, 4.0, 10.0, center()).unwrap();
        assert_eq!(g3.evaluate(&center()), 10.0);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(ObservableSpec::new(ObservableKind::G2, 0.0, 10.0, center()).is_err());
        assert!(ObservableSpec::new(ObservableKind::G3, 4.0, f64::NAN, center()).is_err());
    }

    #[test]
    fn block_maxima_examples() {
        let s = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        assert_eq!(block_maxima(&s, 2).unwrap().maxima, vec![4.0, 9.0]);
        assert_eq!(block_maxima(&s, 8).unwrap().maxima, s.to_vec());
        let c = [2.5; 12];
        assert!(block_maxima(&c, 3).unwrap().maxima.iter().all(|&x| x == 2.5));
    }

    #[test]
    fn block_maxima_partition_errors() {
        assert!(matches!(block_maxima(&[1.0, 2.0], 0), Err(Error::InvalidPartition { .. })));
        assert!(matches!(block_maxima(&[1.0, 2.0], 3), Err(Error::InvalidPartition { .. })));
    }

    #[test]
    fn block_maxima_drops_remainder() {
        let s = [1.0, 5.0, 2.0, 3.0, 9.0];
        let b = block_maxima(&s, 2).unwrap();
        assert_eq!(b.block_size, 2);
        assert_eq!(b.maxima, vec![5.0, 3.0]);
    }

    #[test]
    fn series_single_value() {
        let sys = SystemSpec::cantor();
        let obs = ObservableSpec::g1(Point::d1(0.0));
        let s = series(&sys, &obs, Point::d1(0.25), 1, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(s.values, vec![-(0.25f64).ln()]);
    }

    #[test]
    fn series_deterministic() {
        let sys = SystemSpec::cantor();
        let obs = ObservableSpec::g1(Point::d1(0.25));
        let a = series(&sys, &obs, Point::d1(0.0), 500, &mut RngStream::new(3, 3)).unwrap();
        let b = series(&sys, &obs, Point::d1(0.0), 500, &mut RngStream::new(3, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cantor_g1_series_has_no_clamps() {
        let sys = SystemSpec::cantor();
        let zeta = sys.select_center(&mut RngStream::new(11, 0), 1_000).unwrap();
        let start = sys.select_center(&mut RngStream::new(11, 1), 1_000).unwrap();
        let s = series(&sys, &ObservableSpec::g1(zeta), start, 10_000, &mut RngStream::new(11, 2)).unwrap();
        assert_eq!(s.clamp_count, 0);
        assert!(s.values.iter().all(|v| v.is_finite()));
    }

    /// The streamed maxima must equal block maxima of the materialized
    /// series, bit for bit, for every observable.
    #[test]
    fn streaming_matches_materialized() {
        for sys in [SystemSpec::cantor(), SystemSpec::Sierpinski, SystemSpec::henon_classical()] {
            let zeta = sys.select_center(&mut RngStream::new(5, 0), 2_000).unwrap();
            let start = sys.select_center(&mut RngStream::new(5, 1), 2_000).unwrap();
            let k = 6_000;
            let grid = [10, 30, 60, 7];
            let streamed =
                stream_block_minima(&sys, start, zeta, k, &grid, &mut RngStream::new(5, 2)).unwrap();
            for kind in ObservableKind::ALL {
                let obs = ObservableSpec::new(kind, 4.0, 10.0, zeta).unwrap();
                let s = series(&sys, &obs, start, k, &mut RngStream::new(5, 2)).unwrap();
                assert_eq!(s.clamp_count, streamed.clamp_count);
                for bm in &streamed.per_n {
                    let direct = block_maxima(&s.values, bm.n).unwrap();
                    let via_min = bm.maxima(kind, 4.0, 10.0);
                    assert_eq!(direct, via_min, "{} {kind} n={}", sys.tag(), bm.n);
                }
            }
        }
    }

    #[test]
    fn g3_series_bounded_by_c() {
        let sys = SystemSpec::Sierpinski;
        let zeta = sys.select_center(&mut RngStream::new(8, 0), 1_000).unwrap();
        let obs = ObservableSpec::new(ObservableKind::G3, 4.0, 10.0, zeta).unwrap();
        let s = series(&sys, &obs, Point::d2(0.0, 0.0), 5_000, &mut RngStream::new(8, 1)).unwrap();
        assert!(s.values.iter().all(|&v| v <= 10.0));
    }

    #[test]
    fn empirical_cdf_examples() {
        let f = EmpiricalCdf::new(&[1.0, 2.0, 3.0]).unwrap();
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(3.0), 1.0);

        let g = EmpiricalCdf::new(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(g.support, vec![5.0]);
        assert_eq!(g.cumulative, vec![1.0]);
        assert_eq!(g.eval(4.999), 0.0);

        assert!(matches!(EmpiricalCdf::new(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn empirical_cdf_csv() {
        let f = EmpiricalCdf::new(&[2.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,F\n1,0.5\n2,1\n");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ecdf_monotone(sample in prop::collection::vec(-1e3f64..1e3, 1..60)) {
                let f = EmpiricalCdf::new(&sample).unwrap();
                prop_assert!(f.support.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(f.cumulative.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(*f.cumulative.last().unwrap(), 1.0);
            }

            #[test]
            fn block_maxima_permutation_invariant(
                mut values in prop::collection::vec(-1e3f64..1e3, 24),
                n in prop::sample::select(vec![1usize, 2, 3, 4, 6, 8, 12, 24]),
                seed in any::<u64>(),
            ) {
                let before = block_maxima(&values, n).unwrap();
                let m = values.len() / n;
                let mut rng = RngStream::new(seed, 0);
                for block in values.chunks_mut(m) {
                    for i in (1..block.len()).rev() {
                        block.swap(i, rng.index(i + 1));
                    }
                }
                let after = block_maxima(&values, n).unwrap();
                prop_assert_eq!(before, after);
            }

            #[test]
            fn maxima_dominate_their_block(values in prop::collection::vec(-1e3f64..1e3, 1..80), n in 1usize..10) {
                prop_assume!(n <= values.len());
                let b = block_maxima(&values, n).unwrap();
                prop_assert_eq!(b.n * b.block_size, values.len() - values.len() % n);
                for (j, mx) in b.maxima.iter().enumerate() {
                    for v in &values[j * b.block_size..(j + 1) * b.block_size] {
                        prop_assert!(mx >= v);
                    }
                }
            }
        }
    }
}
