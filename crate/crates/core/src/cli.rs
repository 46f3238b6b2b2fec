//! Command implementations behind the `mmd-classify` binary.
//!
//! Each command writes its normal output to `out`, diagnostics to `err`,
//! and returns the process exit code: 0 on success, 1 for invalid input or
//! configuration, 2 for I/O failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classifiers::{classify_fixed, run_test, ReplaySource, TestConfig};
use crate::clusters::Problem;
use crate::config::{ConfigFile, Plan};
use crate::error::{Error, Result};
use crate::exponents::{achievable_exponents, Case, ExponentParams, ExponentReport, TestKind, Thresholds};
use crate::kernel::KernelSpec;
use crate::montecarlo::{case_distances, ExperimentResult, Runner, ThresholdRules};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_IO
    }
}

fn report_failure(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Default worker count: the available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Reads and validates a config file, applying run overrides.
pub fn load_config(path: &Path, seed: Option<u64>, trials: Option<usize>) -> Result<(ConfigFile, Plan)> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut cfg = ConfigFile::from_toml(&text)?;
    cfg.override_run(seed, trials);
    let plan = cfg.build()?;
    Ok((cfg, plan))
}

/// Seventeen significant digits.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub config_path: String,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    pub output_paths: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub workers: usize,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// When false the wall-time column is left empty, making whole files
    /// reproducible byte for byte.
    pub timing: bool,
    /// Restrict to these experiment names; empty runs all.
    pub only: Vec<String>,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "x_param",
    "x_value",
    "expected_tau",
    "error_prob",
    "ci95",
    "censored_frac",
    "mean_wall_time_s",
    "trials",
    "seed",
];

fn csv_row(param: &str, x: Option<f64>, r: &ExperimentResult, seed: u64, timing: bool) -> Vec<String> {
    vec![
        param.to_string(),
        x.map(|v| v.to_string()).unwrap_or_default(),
        fmt_full(r.mean_tau),
        fmt_full(r.error_prob),
        fmt_full(r.error_ci95),
        fmt_full(r.censored_fraction),
        if timing { fmt_full(r.mean_wall_time) } else { String::new() },
        r.trials.to_string(),
        seed.to_string(),
    ]
}

fn write_csv(path: &Path, hash: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(file, "# config_hash={hash}").map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    w.write_record(CSV_COLUMNS).map_err(to_err)?;
    for r in rows {
        w.write_record(r).map_err(to_err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn simulate(args: &SimulateArgs, log: &mut dyn Write) -> Result<()> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let (cfg, plan) = load_config(&args.config, args.seed, args.trials)?;
    for name in &args.only {
        if !plan.experiments.iter().any(|e| &e.name == name) {
            return Err(Error::invalid("only", format!("no experiment named {name:?}")));
        }
    }
    let hash = cfg.digest();
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let runner = Runner::new(args.workers)?;
    let mut outputs = Vec::new();
    for exp in &plan.experiments {
        if !args.only.is_empty() && !args.only.contains(&exp.name) {
            continue;
        }
        let _ = writeln!(log, "running {} ({} points)", exp.name, exp.grid.len().max(1));
        let rows = if exp.grid.is_empty() {
            let r = runner.estimate(&exp.spec)?;
            vec![csv_row("none", None, &r, exp.spec.base_seed, args.timing)]
        } else {
            runner
                .sweep(&exp.spec, &exp.grid)?
                .iter()
                .map(|row| csv_row(row.param, Some(row.x_value), &row.result, row.seed, args.timing))
                .collect()
        };
        let path = args.out.join(format!("{}.csv", exp.name));
        write_csv(&path, &hash, &rows)?;
        outputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        config_hash: hash,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: args.config.display().to_string(),
        workers: runner.workers(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        output_paths: outputs,
    };
    let path = args.out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))
}

/// Runs every configured experiment and writes one CSV each plus
/// `manifest.json` into the output directory.
pub fn cmd_simulate(args: &SimulateArgs, err: &mut dyn Write) -> i32 {
    match simulate(args, err) {
        Ok(()) => EXIT_OK,
        Err(e) => report_failure(err, &e),
    }
}

#[derive(Debug, Clone)]
pub struct ExponentsArgs {
    pub config: PathBuf,
    pub csv: Option<PathBuf>,
    /// Uncertainty sizes to evaluate; empty uses the configured sizes.
    pub delta_sweep: Vec<f64>,
}

/// One line of the exponent table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub delta: f64,
    pub test: TestKind,
    pub case: Case,
    pub report: ExponentReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub d1: f64,
    pub d2: f64,
    pub d1_bar: Option<f64>,
    pub d2_bar: Option<f64>,
}

pub fn distances(p: &Problem) -> Result<Distances> {
    let has_null = p.null_cluster().is_some();
    Ok(Distances {
        d1: p.d1()?,
        d2: p.d2()?,
        d1_bar: if has_null { Some(p.d1_bar()?) } else { None },
        d2_bar: if has_null { Some(p.d2_bar()?) } else { None },
    })
}

const DESIGNS: [(TestKind, Case); 6] = [
    (TestKind::Fixed, Case::Simple),
    (TestKind::Sequential, Case::Simple),
    (TestKind::TwoPhase, Case::Simple),
    (TestKind::Fixed, Case::General),
    (TestKind::Sequential, Case::General),
    (TestKind::TwoPhase, Case::General),
];

/// Exponent reports for all six designs. General designs are reported as
/// not applicable when the problem has no null cluster.
pub fn exponent_rows(p: &Problem, rules: &ThresholdRules, k: usize) -> Result<Vec<ExponentRow>> {
    let delta = p.clusters()[0].uncertainty.size();
    let k0 = p.kernel().sup_bound();
    let k32 = u32::try_from(k).map_err(|_| Error::invalid("K", "too large"))?;
    DESIGNS
        .iter()
        .map(|&(test, case)| {
            if case == Case::General && p.null_cluster().is_none() {
                return Ok(ExponentRow {
                    delta,
                    test,
                    case,
                    report: ExponentReport::not_applicable("no null cluster configured"),
                });
            }
            let (d1, d2) = case_distances(p, case)?;
            let params = ExponentParams::new(d1, d2, k0, p.alpha())?;
            let r = |t: Option<crate::montecarlo::Threshold>, name: &str| {
                t.map(|t| t.resolve(d1, d2))
                    .ok_or_else(|| Error::invalid(format!("exponents.{name}"), "required"))
            };
            let thresholds = match (test, case) {
                (TestKind::Fixed, Case::Simple) => Thresholds::None,
                (TestKind::Sequential | TestKind::TwoPhase, Case::Simple) | (TestKind::Fixed, Case::General) => {
                    Thresholds::Single(r(rules.lambda, "lambda")?)
                }
                (TestKind::Sequential, Case::General) => {
                    Thresholds::Pair(r(rules.lambda1, "lambda1")?, r(rules.lambda2, "lambda2")?)
                }
                (TestKind::TwoPhase, Case::General) => Thresholds::Triple(
                    r(rules.lambda1, "lambda1")?,
                    r(rules.lambda2, "lambda2")?,
                    r(rules.lambda3, "lambda3")?,
                ),
            };
            let kk = (test == TestKind::TwoPhase).then_some(k32);
            Ok(ExponentRow {
                delta,
                test,
                case,
                report: achievable_exponents(test, case, &params, thresholds, kk)?,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into())
}

fn exponents(args: &ExponentsArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, plan) = load_config(&args.config, None, None)?;
    let section = cfg.exponents.unwrap_or_default();
    let rules = section.resolved_rules();
    let k = section.k.unwrap_or(cfg.k);
    let problems: Vec<Problem> = if args.delta_sweep.is_empty() {
        vec![plan.problem.clone()]
    } else {
        args.delta_sweep
            .iter()
            .map(|&d| {
                plan.problem
                    .with_uncertainty_size(d)
                    .map_err(|e| Error::invalid(format!("delta-sweep {d}"), e.to_string()))
            })
            .collect::<Result<_>>()?
    };
    let mut csv_rows = Vec::new();
    let io = |e: std::io::Error| Error::Io(e.to_string());
    for p in &problems {
        let d = distances(p)?;
        let rows = exponent_rows(p, &rules, k)?;
        writeln!(out, "delta = {}", p.clusters()[0].uncertainty.size()).map_err(io)?;
        writeln!(
            out,
            "D1 = {:.6e}  D2 = {:.6e}  D1_bar = {}  D2_bar = {}",
            d.d1,
            d.d2,
            opt(d.d1_bar),
            opt(d.d2_bar)
        )
        .map_err(io)?;
        writeln!(out, "{:<11} {:<8} {:>18} {:>18}  regime", "test", "case", "misclassification", "false_alarm")
            .map_err(io)?;
        for row in &rows {
            writeln!(
                out,
                "{:<11} {:<8} {:>18} {:>18}  {}",
                row.test.to_string(),
                row.case.to_string(),
                row.report.misclassification.to_string(),
                row.report.false_alarm.to_string(),
                row.report.regime_note
            )
            .map_err(io)?;
            csv_rows.push((d, row.clone()));
        }
        writeln!(out).map_err(io)?;
    }
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let to_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        w.write_record([
            "delta",
            "test",
            "case",
            "d1",
            "d2",
            "misclassification",
            "false_alarm",
            "regime",
        ])
        .map_err(to_err)?;
        for (d, row) in &csv_rows {
            let (d1, d2) = match row.case {
                Case::Simple => (Some(d.d1), Some(d.d2)),
                Case::General => (d.d1_bar, d.d2_bar),
            };
            let e = |x: Option<f64>| x.map(fmt_full).unwrap_or_default();
            w.write_record([
                row.delta.to_string(),
                row.test.to_string(),
                row.case.to_string(),
                e(d1),
                e(d2),
                e(row.report.misclassification.value()),
                e(row.report.false_alarm.value()),
                row.report.regime_note.clone(),
            ])
            .map_err(to_err)?;
        }
        w.flush().map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Prints the cluster distances and the exponent table for a config.
pub fn cmd_exponents(args: &ExponentsArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match exponents(args, out) {
        Ok(()) => EXIT_OK,
        Err(e) => report_failure(err, &e),
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyArgs {
    /// CSV with a column named `x`; may also hold `y1..yM`.
    pub x: PathBuf,
    /// CSV with columns `y1..yM`, when they are not in the `x` file.
    pub ys: Option<PathBuf>,
    pub test: TestKind,
    pub case: Case,
    pub lambda: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub alpha: f64,
    pub n: Option<usize>,
    pub n0: usize,
    pub k: usize,
    pub tau_max: Option<usize>,
    pub sigma0: f64,
}

/// Named numeric columns of a CSV file. Empty cells end a column early,
/// so sequences may have different lengths.
pub fn read_columns(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let bad = |msg: String| Error::Parse(format!("{}: {msg}", path.display()));
    let headers: Vec<String> = rdr.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let mut cols: Vec<(String, Vec<f64>)> = headers.into_iter().map(|h| (h, Vec::new())).collect();
    let mut ended = vec![false; cols.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() > cols.len() {
            return Err(bad(format!("row {} has {} fields, header has {}", line + 2, rec.len(), cols.len())));
        }
        for (j, (name, col)) in cols.iter_mut().enumerate() {
            let cell = rec.get(j).unwrap_or("");
            if cell.is_empty() {
                ended[j] = true;
                continue;
            }
            if ended[j] {
                return Err(bad(format!("column {name} has a gap before row {}", line + 2)));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| bad(format!("row {}, column {name}: {cell:?} is not a number", line + 2)))?;
            if !v.is_finite() {
                return Err(bad(format!("row {}, column {name}: non-finite value", line + 2)));
            }
            col.push(v);
        }
    }
    Ok(cols)
}

fn take_x(cols: &mut Vec<(String, Vec<f64>)>) -> Option<Vec<f64>> {
    let i = cols.iter().position(|(h, _)| h == "x")?;
    Some(cols.remove(i).1)
}

fn take_ys(cols: Vec<(String, Vec<f64>)>, path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut ys: Vec<(usize, Vec<f64>)> = Vec::new();
    for (h, c) in cols {
        let idx = h
            .strip_prefix('y')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::Parse(format!("{}: unexpected column {h:?}", path.display())))?;
        ys.push((idx, c));
    }
    ys.sort_by_key(|(i, _)| *i);
    for (want, (got, _)) in ys.iter().enumerate() {
        if *got != want + 1 {
            return Err(Error::Parse(format!("{}: training columns must be y1..yM without gaps", path.display())));
        }
    }
    if ys.is_empty() {
        return Err(Error::Parse(format!("{}: no training columns y1..yM", path.display())));
    }
    Ok(ys.into_iter().map(|(_, c)| c).collect())
}

fn classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let kernel = KernelSpec::gaussian(args.sigma0)?;
    let mut cols = read_columns(&args.x)?;
    let x = take_x(&mut cols).ok_or_else(|| Error::Parse(format!("{}: no column named x", args.x.display())))?;
    let ys = match &args.ys {
        Some(p) => {
            let extra: Vec<_> = cols.into_iter().filter(|(h, _)| h.starts_with('y')).collect();
            if !extra.is_empty() {
                return Err(Error::Parse("training columns given in both files".into()));
            }
            take_ys(read_columns(p)?, p)?
        }
        None => take_ys(cols, &args.x)?,
    };
    let cfg = TestConfig {
        alpha: args.alpha,
        n: args.n.unwrap_or(match args.test {
            TestKind::TwoPhase => x.len() / args.k.max(1),
            _ => x.len(),
        }),
        n0: args.n0,
        k: args.k,
        lambda: args.lambda,
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        lambda3: args.lambda3,
        tau_max: args.tau_max.unwrap_or(x.len().max(args.n0)),
    };
    let verdict = match args.test {
        TestKind::Fixed if args.n.is_none() => {
            if args.case == Case::General && args.lambda.is_none() {
                return Err(Error::invalid("lambda", "required for the general case"));
            }
            classify_fixed(&x, &ys, &kernel, args.case, args.lambda)?
        }
        test => {
            cfg.validate(test, args.case)?;
            run_test(ReplaySource::new(x, ys), test, &cfg, args.case, &kernel)?
        }
    };
    let json = serde_json::to_string(&verdict).expect("verdict serializes");
    writeln!(out, "{json}").map_err(|e| Error::Io(e.to_string()))
}

/// Classifies sequences read from CSV and prints the verdict as JSON.
pub fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match classify(args, out) {
        Ok(()) => EXIT_OK,
        Err(e) => report_failure(err, &e),
    }
}
