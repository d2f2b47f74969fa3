//! Config-driven experiments: parse a config, run the center x realization
//! grid, persist records, and turn records into tables, curves and
//! dimension estimates.

mod config;
mod records;
mod report;
mod run;

pub use config::{parse_config, ExperimentConfig, ObservableTemplate};
pub use records::{
    read_records_csv, read_sidecar, write_records_csv, ExperimentRecord, RunSidecar, SeedLineage, RECORD_COLUMNS,
};
pub use report::{
    emit_curves, emit_table, estimate_dimension, member_series, write_curves, CurvePoint, CurveSeries, GevParam,
    MethodEstimate, TableCell, TableData, TableKind, TableRow, TheoryLookup,
};
pub use run::{reproduce_record, run_experiment, write_run, EstimateEntry, RunOutput, RunSummary};

/// Shortest decimal with at most 9 significant digits, in the style of C's
/// `%.9g`: trailing zeros dropped, exponent form outside `1e-4 ..= 1e9`.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let fixed = format!("{x:.*}", (8 - exp) as usize);
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
