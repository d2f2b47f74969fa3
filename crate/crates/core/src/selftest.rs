//! Invariant suite runnable from a release binary.

use std::time::Instant;

use crate::dimension::Method;
use crate::error::Result;
use crate::gev::{theoretical_params, GevParams, GUMBEL_SWITCH};
use crate::harness::{estimate_dimension, parse_config, run_experiment, write_records_csv, ExperimentRecord};
use crate::lmoments::{fit, sample_lmoments};
use crate::observables::ObservableKind;
use crate::rng::{Purpose, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = (&'static str, fn() -> std::result::Result<String, String>);

const CHECKS: [Check; 7] = [
    ("gev_cdf_monotone_gumbel_continuity", gev_cdf_checks),
    ("gev_quantile_roundtrip", quantile_roundtrip),
    ("lmoments_pairwise_oracle", lmoments_exhaustive),
    ("gumbel_l_skewness", gumbel_l_skewness),
    ("fit_affine_equivariance", affine_equivariance),
    ("synthetic_dimension_recovery", synthetic_recovery),
    ("thread_count_determinism", thread_determinism),
];

/// Runs every check, in order, and reports each outcome.
pub fn run_selftest() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let t = Instant::now();
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
        })
        .collect()
}

fn params(mu: f64, sigma: f64, xi: f64) -> GevParams {
    GevParams::new(mu, sigma, xi).expect("valid parameters")
}

fn gev_cdf_checks() -> std::result::Result<String, String> {
    let mut worst_jump = 0.0f64;
    for xi in [-0.9, -0.5, -0.1, 0.0, 1e-9, 0.1, 0.5, 1.5] {
        let p = params(0.3, 1.7, xi);
        let mut prev = 0.0;
        for i in 0..=4000 {
            let x = -30.0 + 0.015 * i as f64;
            let f = p.cdf(x);
            if !(0.0..=1.0).contains(&f) || f < prev {
                return Err(format!("cdf not monotone in [0,1] at xi = {xi}, x = {x}"));
            }
            prev = f;
        }
    }
    for xi in [GUMBEL_SWITCH * 0.1, GUMBEL_SWITCH, 2.0 * GUMBEL_SWITCH, 1e-7, -1e-7, -2.0 * GUMBEL_SWITCH] {
        let g = params(1.0, 2.0, 0.0);
        let p = params(1.0, 2.0, xi);
        for i in 0..=2000 {
            let x = 1.0 - 20.0 + 0.02 * i as f64;
            worst_jump = worst_jump.max((p.cdf(x) - g.cdf(x)).abs());
        }
    }
    if worst_jump > 1e-6 {
        return Err(format!("Gumbel limit discontinuity {worst_jump:e}"));
    }
    Ok(format!("max |F(xi) - F(0)| near the switch = {worst_jump:.1e}"))
}

fn quantile_roundtrip() -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    for xi in [-0.45, -0.2, -1e-9, 0.0, 3e-8, 0.25, 0.45] {
        let p = params(-2.0, 0.7, xi);
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let x = p.quantile(u).map_err(|e| e.to_string())?;
            let back = p.cdf(x);
            worst = worst.max(((back - u) / u).abs());
        }
    }
    if worst > 1e-10 {
        return Err(format!("round trip error {worst:e}"));
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// L-moments by direct averaging over all subsets of size 2, 3 and 4.
fn lmoments_by_subsets(x: &[f64]) -> [f64; 4] {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let l1 = s.iter().sum::<f64>() / n as f64;
    let (mut a2, mut a3, mut a4) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            a2 += s[j] - s[i];
            for k in j + 1..n {
                a3 += s[k] - 2.0 * s[j] + s[i];
                for l in k + 1..n {
                    a4 += s[l] - 3.0 * s[k] + 3.0 * s[j] - s[i];
                }
            }
        }
    }
    [l1, a2 / (2.0 * choose(n, 2)), a3 / (3.0 * choose(n, 3)), a4 / (4.0 * choose(n, 4))]
}

fn compare_lmoments(sample: &[f64]) -> std::result::Result<(), String> {
    let [l1, l2, l3, l4] = lmoments_by_subsets(sample);
    let got = sample_lmoments(sample).map_err(|e| e.to_string())?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    let ok = close(got.l1, l1)
        && close(got.l2, l2)
        && (l2 == 0.0 || (close(got.t3 * got.l2, l3) && close(got.t4 * got.l2, l4)));
    if ok {
        Ok(())
    } else {
        Err(format!("mismatch on {sample:?}: got {got:?}, oracle {:?}", [l1, l2, l3, l4]))
    }
}

fn lmoments_exhaustive() -> std::result::Result<String, String> {
    let mut checked = 0usize;
    // every ordered sample over a three-letter alphabet, sizes 4..=8
    let alphabet = [0.0, 1.0, 2.5];
    for n in 4..=8 {
        let mut digits = vec![0usize; n];
        loop {
            let sample: Vec<f64> = digits.iter().map(|&d| alphabet[d]).collect();
            compare_lmoments(&sample)?;
            checked += 1;
            let mut i = 0;
            while i < n && digits[i] == alphabet.len() - 1 {
                digits[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            digits[i] += 1;
        }
    }
    // every multiset over a five-letter alphabet, sizes 4..=12
    let alphabet = [-3.0, 0.0, 1.0, 2.5, 7.25];
    for n in 4..=12 {
        let mut idx = vec![0usize; n];
        loop {
            let sample: Vec<f64> = idx.iter().map(|&d| alphabet[d]).collect();
            compare_lmoments(&sample)?;
            checked += 1;
            let Some(pos) = (0..n).rev().find(|&p| idx[p] < alphabet.len() - 1) else { break };
            let v = idx[pos] + 1;
            idx[pos..].iter_mut().for_each(|d| *d = v);
        }
    }
    Ok(format!("{checked} samples match the subset-average oracle"))
}

fn gumbel_l_skewness() -> std::result::Result<String, String> {
    let mut rng = RngStream::keyed(20, Purpose::Synthetic, 0, 0, 0);
    let sample: Vec<f64> = (0..100_000).map(|_| -(-(1.0 - rng.uniform()).ln()).ln()).collect();
    let t3 = sample_lmoments(&sample).map_err(|e| e.to_string())?.t3;
    let want = (9.0f64 / 8.0).ln() / 2f64.ln();
    if (t3 - want).abs() > 0.005 {
        return Err(format!("t3 = {t3}, expected {want}"));
    }
    Ok(format!("t3 = {t3:.5} (limit {want:.5})"))
}

fn affine_equivariance() -> std::result::Result<String, String> {
    let mut rng = RngStream::keyed(21, Purpose::Synthetic, 0, 0, 0);
    let mut worst = 0.0f64;
    for xi in [-0.3, 0.0, 0.2, 0.4] {
        let p = params(0.5, 1.3, xi);
        let sample: Vec<f64> = (0..500).map(|_| p.quantile(rng.uniform().max(1e-12)).unwrap()).collect();
        let base = fit(&sample).map_err(|e| e.to_string())?.params;
        for (a, b) in [(2.0, -1.0), (0.125, 10.0), (1000.0, 3.0)] {
            let moved: Vec<f64> = sample.iter().map(|x| a * x + b).collect();
            let got = fit(&moved).map_err(|e| e.to_string())?.params;
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
            worst = worst
                .max(rel(got.mu, a * base.mu + b))
                .max(rel(got.sigma, a * base.sigma))
                .max((got.xi - base.xi).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("affine mismatch {worst:e}"));
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn synthetic_recovery() -> std::result::Result<String, String> {
    let k = 100_000_000;
    let mut worst = 0.0f64;
    for delta in [0.6309297535714574, 1.0, 1.25826, 1.5849625007211563] {
        let mut records = Vec::new();
        for kind in ObservableKind::ALL {
            for n in [1000, 2000, 5000, 10_000, 20_000] {
                let p = theoretical_params(kind, delta, 4.0, 10.0, k, n).map_err(|e| e.to_string())?;
                records.push(ExperimentRecord {
                    system: "synthetic".into(),
                    observable: kind,
                    alpha: 4.0,
                    c: 10.0,
                    center_idx: 0,
                    realization_idx: 0,
                    n,
                    m: k / n,
                    params: Some(p),
                    ci95: None,
                    ks_winner: "GEV".into(),
                    ks_d: None,
                    clamp_count: 0,
                    cell_seed: 0,
                });
            }
        }
        for method in Method::ALL {
            let est = estimate_dimension(&records, "synthetic", method).map_err(|e| format!("{method}: {e}"))?;
            worst = worst.max((est.estimate.delta - delta).abs());
        }
    }
    if worst > 1e-10 {
        return Err(format!("recovered dimension off by {worst:e}"));
    }
    Ok(format!("all 7 routes within {worst:.1e}"))
}

fn run_bytes(text: &str, threads: usize) -> Result<Vec<u8>> {
    let cfg = parse_config(text)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::Domain(e.to_string()))?;
    let out = pool.install(|| run_experiment(&cfg))?;
    let mut buf = Vec::new();
    write_records_csv(&out.records, &mut buf)?;
    buf.extend(serde_json::to_vec(&out.summary)?);
    Ok(buf)
}

fn thread_determinism() -> std::result::Result<String, String> {
    let configs = [
        "system = cantor\nk = 40000\nn_grid = 100, 200, 400\nensemble = 3\ncenters = 3\nseed = 5\nbootstrap_B = 100\n",
        "system = henon\nk = 20000\nn_grid = 50, 100\nensemble = 2\ncenters = 3\nseed = 6\nbootstrap_B = 100\n",
    ];
    for text in configs {
        let one = run_bytes(text, 1).map_err(|e| e.to_string())?;
        let many = run_bytes(text, 4).map_err(|e| e.to_string())?;
        if one != many {
            return Err("1-thread and 4-thread runs differ".into());
        }
    }
    Ok("byte-identical under 1 and 4 threads".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_oracle_small_example() {
        let [l1, l2, l3, _] = lmoments_by_subsets(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(l1, 2.5);
        assert!((l2 - 10.0 / 12.0).abs() < 1e-15);
        assert!(l3.abs() < 1e-15);
    }

    #[test]
    fn multiset_enumeration_count() {
        // C(n + 4, 4) multisets of size n over five letters
        let expected: f64 = (4..=12).map(|n| choose(n + 4, 4)).sum();
        let msg = lmoments_exhaustive().unwrap();
        let ordered: usize = (4..=8).map(|n| 3usize.pow(n)).sum();
        assert!(msg.starts_with(&format!("{} ", ordered + expected as usize)), "{msg}");
    }
}
