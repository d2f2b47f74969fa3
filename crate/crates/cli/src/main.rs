use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use evdim::dimension::Method;
use evdim::harness::{
    emit_curves, emit_table, estimate_dimension, parse_config, read_records_csv, read_sidecar, run_experiment,
    write_curves, write_run, ExperimentRecord, TableKind, TheoryLookup,
};
use evdim::selftest::run_selftest;

/// Overrides the output directory of every subcommand (below `--out`).
const OUT_DIR_ENV: &str = "EVDIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "evdim", version, about = "Extreme value statistics and information dimension of singular measures")]
struct Cli {
    /// Root seed, replacing the config's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Dimension table from record files.
    Table {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        #[arg(long, value_enum)]
        table: TableArg,
    },
    /// Parameter-vs-log10(n) curves, one CSV per system, observable and parameter.
    Curves {
        #[arg(required = true)]
        records: Vec<PathBuf>,
    },
    /// Dimension estimate from record files by one method.
    Dimension {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// sigma_g1, xi_g2, xi_g3, mu_g1_slope, mu_g2_slope, sigma_g2_slope or sigma_g3_slope
        #[arg(long)]
        method: Method,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    T1,
    T2,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(cli: &Cli, fallback: &Path) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| fallback.to_path_buf())
}

/// Records from every file, plus the systems named in their JSON sidecars.
fn load(paths: &[PathBuf]) -> evdim::Result<(Vec<ExperimentRecord>, TheoryLookup)> {
    let mut records = Vec::new();
    let mut theory = TheoryLookup::default();
    for p in paths {
        let file = fs::File::open(p).map_err(|e| evdim::Error::Io(format!("{}: {e}", p.display())))?;
        records.extend(read_records_csv(file)?);
        let sidecar = p.with_extension("json");
        if sidecar.exists() {
            theory.insert(read_sidecar(&sidecar)?.config.system);
        }
    }
    Ok((records, theory))
}

fn execute(cli: &Cli) -> evdim::Result<ExitCode> {
    match &cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(config).map_err(|e| evdim::Error::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = parse_config(&text)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            cfg.output_dir = out_dir(cli, &cfg.output_dir);
            let output = run_experiment(&cfg)?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
            let (csv, json) = write_run(&output, &cfg.output_dir, stem)?;
            println!("records: {}", csv.display());
            println!("summary: {}", json.display());
            println!("cells: {} ({} failed)", output.summary.records, output.summary.failed_cells);
            for e in &output.summary.estimates {
                let theory = e.theoretical.map(|t| format!(" (theory {t:.4})")).unwrap_or_default();
                match (&e.estimate, &e.reason) {
                    (Some(est), _) => println!(
                        "{} {}: {:.4} +/- {:.4}{theory}",
                        e.system, e.method, est.delta, est.uncertainty
                    ),
                    (None, reason) => println!("{} {}: n/a ({}){theory}", e.system, e.method, reason.as_deref().unwrap_or("")),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Table { records, table } => {
            let (recs, theory) = load(records)?;
            let kind = match table {
                TableArg::T1 => TableKind::T1,
                TableArg::T2 => TableKind::T2,
            };
            let data = emit_table(&recs, kind, &theory);
            for w in &data.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", data.render_text());
            let dir = out_dir(cli, Path::new("out"));
            fs::create_dir_all(&dir)?;
            let name = match kind {
                TableKind::T1 => "table_t1.csv",
                TableKind::T2 => "table_t2.csv",
            };
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            fs::write(dir.join(name), buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Curves { records } => {
            let (recs, theory) = load(records)?;
            let curves = emit_curves(&recs, &theory);
            let dir = out_dir(cli, Path::new("out"));
            for p in write_curves(&curves, &dir)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dimension { records, method } => {
            let (recs, theory) = load(records)?;
            let mut systems: Vec<&str> = recs.iter().map(|r| r.system.as_str()).collect();
            systems.sort_unstable();
            systems.dedup();
            if systems.is_empty() {
                return Err(evdim::Error::Insufficient("no records".into()));
            }
            let mut failures = 0;
            for sys in systems {
                let theory = theory.dimension(sys).map(|t| format!(" (theory {t:.4})")).unwrap_or_default();
                match estimate_dimension(&recs, sys, *method) {
                    Ok(e) => {
                        let excluded = if e.estimate.excluded_n.is_empty() {
                            String::new()
                        } else {
                            format!(" [excluded n: {:?}]", e.estimate.excluded_n)
                        };
                        println!(
                            "{sys} {method}: {:.4} +/- {:.4}{theory} over {} members{excluded}",
                            e.estimate.delta, e.estimate.uncertainty, e.members
                        );
                    }
                    Err(err) => {
                        failures += 1;
                        println!("{sys} {method}: n/a ({err}){theory}");
                    }
                }
            }
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Selftest => {
            let outcomes = run_selftest();
            let mut failed = 0;
            for o in &outcomes {
                let status = if o.passed { "PASS" } else { "FAIL" };
                println!("{status} {} ({:.2}s): {}", o.name, o.seconds, o.detail);
                failed += usize::from(!o.passed);
            }
            println!("{} checks, {failed} failed", outcomes.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
