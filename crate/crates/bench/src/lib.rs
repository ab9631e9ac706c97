//! Run records, case execution and report output for `oap-bench`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use oap::ap::{ap_solve, BlockPartition};
use oap::linalg::relative_residual;
use oap::problems::GeneratedProblem;
use oap::solver::{oap_solve, roap_solve, SolveOptions, SolveReport, Termination, Variant};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 8] = [
    "problem",
    "n",
    "solver",
    "restarts",
    "inner_iters",
    "relres",
    "relerr",
    "time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Roap2,
    Roap3,
    Oap2,
    Oap3,
    Ap,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Roap2,
        SolverKind::Roap3,
        SolverKind::Oap2,
        SolverKind::Oap3,
        SolverKind::Ap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Roap2 => "roap2",
            SolverKind::Roap3 => "roap3",
            SolverKind::Oap2 => "oap2",
            SolverKind::Oap3 => "oap3",
            SolverKind::Ap => "ap",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown solver `{s}` (expected roap2, roap3, oap2, oap3 or ap)")
            })
    }
}

/// One row of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub restarts: usize,
    pub inner_iters: usize,
    /// `‖b − Ax‖ / ‖b‖` recomputed after the solve; infinite if the solver failed.
    pub relres: f64,
    pub relerr: Option<f64>,
    pub time_ms: f64,
}

impl RunRecord {
    fn sort_key(&self) -> (&str, usize, &str) {
        (&self.problem, self.n, &self.solver)
    }
}

/// Orders records by problem, size and solver.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Finished(Termination),
    Failed(String),
}

impl Status {
    pub fn converged(&self) -> bool {
        matches!(self, Status::Finished(Termination::Converged))
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Finished(t) => f.write_str(t.as_str()),
            Status::Failed(msg) => write!(f, "error: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseOptions {
    pub solve: SolveOptions,
    /// Row blocks for the AP baseline.
    pub blocks: usize,
    /// Sweep cap for the AP baseline when `solve.max_restarts` is unset.
    pub max_sweeps: usize,
}

impl Default for CaseOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            blocks: 4,
            max_sweeps: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub record: RunRecord,
    pub status: Status,
    pub report: Option<SolveReport>,
}

fn solve(
    problem: &GeneratedProblem,
    solver: SolverKind,
    opts: &CaseOptions,
) -> oap::Result<(Vec<f64>, SolveReport)> {
    let (a, b) = (&problem.a, &problem.b);
    match solver {
        SolverKind::Roap2 => roap_solve(a, b, Variant::Bidiagonal, &opts.solve),
        SolverKind::Roap3 => roap_solve(a, b, Variant::Tridiagonal, &opts.solve),
        SolverKind::Oap2 => oap_solve(a, b, Variant::Bidiagonal, &opts.solve),
        SolverKind::Oap3 => oap_solve(a, b, Variant::Tridiagonal, &opts.solve),
        SolverKind::Ap => {
            let part = BlockPartition::contiguous(a.nrows(), opts.blocks)?;
            let sweeps = opts.solve.max_restarts.unwrap_or(opts.max_sweeps);
            ap_solve(a, b, &part, opts.solve.tol, sweeps)
        }
    }
}

/// Runs one solver on one problem. Solver errors end up in `status`.
pub fn run_case(problem: &GeneratedProblem, solver: SolverKind, opts: &CaseOptions) -> CaseResult {
    let start = Instant::now();
    let outcome = opts
        .solve
        .validate()
        .and_then(|_| solve(problem, solver, opts));
    let time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut record = RunRecord {
        problem: problem.label.clone(),
        n: problem.n(),
        solver: solver.name().to_string(),
        restarts: 0,
        inner_iters: 0,
        relres: f64::INFINITY,
        relerr: None,
        time_ms,
    };
    match outcome {
        Ok((x, report)) => {
            record.restarts = report.restarts;
            record.inner_iters = report.total_inner();
            match relative_residual(&problem.a, &x, &problem.b) {
                Ok(r) => record.relres = r,
                Err(e) => {
                    return CaseResult {
                        record,
                        status: Status::Failed(e.to_string()),
                        report: Some(report),
                    }
                }
            }
            record.relerr = problem.x_true.as_ref().map(|xt| {
                let diff: f64 = x.iter().zip(xt).map(|(a, b)| (a - b) * (a - b)).sum();
                let size: f64 = xt.iter().map(|v| v * v).sum();
                (diff / size).sqrt()
            });
            CaseResult {
                record,
                status: Status::Finished(report.termination),
                report: Some(report),
            }
        }
        Err(e) => CaseResult {
            record,
            status: Status::Failed(e.to_string()),
            report: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {}: {source}", path.display())]
    Create { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn write_csv(records: &[RunRecord], out: impl Write) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<RunRecord>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let records = r.deserialize().collect::<Result<Vec<RunRecord>, _>>()?;
    Ok(records)
}

fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4e}")
    } else {
        "-".into()
    }
}

/// Problems and sizes as rows, solvers as columns; each cell is
/// `relres (restarts)`.
pub fn write_markdown(records: &[RunRecord], mut out: impl Write) -> io::Result<()> {
    let mut solvers: Vec<&str> = records.iter().map(|r| r.solver.as_str()).collect();
    solvers.sort_unstable();
    solvers.dedup();
    let mut rows: BTreeMap<(&str, usize), BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        rows.entry((&r.problem, r.n))
            .or_default()
            .insert(&r.solver, r);
    }

    write!(out, "| problem | n |")?;
    for s in &solvers {
        write!(out, " {s} |")?;
    }
    writeln!(out)?;
    write!(out, "|---|---:|")?;
    for _ in &solvers {
        write!(out, "---:|")?;
    }
    writeln!(out)?;
    for ((problem, n), cells) in &rows {
        write!(out, "| {problem} | {n} |")?;
        for s in &solvers {
            match cells.get(s) {
                Some(r) => write!(out, " {} ({}) |", sci(r.relres), r.restarts)?,
                None => write!(out, " |")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_report(
    records: &[RunRecord],
    format: Format,
    out: impl Write,
) -> Result<(), ReportError> {
    match format {
        Format::Csv => write_csv(records, out),
        Format::Markdown => Ok(write_markdown(records, out)?),
    }
}

/// Writes the report to `path`.
pub fn emit_report(records: &[RunRecord], format: Format, path: &Path) -> Result<(), ReportError> {
    let file = File::create(path).map_err(|source| ReportError::Create {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    write_report(records, format, &mut w)?;
    w.flush()?;
    Ok(())
}
