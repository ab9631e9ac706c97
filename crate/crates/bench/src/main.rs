use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oap::linalg::mmio::{read_matrix, read_vector, write_matrix, write_vector};
use oap::problems::{convdiff_mesh, lshape_m_for, GeneratedProblem, ProblemSpec};
use oap::solver::{RhsMode, SolveOptions};
use oap_bench::{
    emit_report, run_case, sort_records, write_report, CaseOptions, CaseResult, Format, SolverKind,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "oap-bench",
    version,
    about = "Generate test problems and run OAP solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated problem as Matrix Market files.
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output directory for matrix.mtx, rhs.mtx and solution.mtx.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one system given as files or as a generated family.
    Solve {
        #[arg(long, requires = "rhs", conflicts_with = "family")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "matrix")]
        rhs: Option<PathBuf>,
        /// Known solution, used for the relerr column.
        #[arg(long, requires = "matrix")]
        solution: Option<PathBuf>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the pinned example suite.
    Bench {
        /// Examples to run (1 convdiff2d, 2 poisson-lshape, 3 tridiag-unsym, 4 random-dense).
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
        examples: Vec<u8>,
        /// Sizes to run instead of each example's default list.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
        #[arg(long, default_value_t = 1.0)]
        p2: f64,
        #[arg(long, default_value_t = 0.0)]
        p3: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Worker threads; all cores when unset.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Convdiff2d,
    PoissonLshape,
    TridiagUnsym,
    RandomDense,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Problem size; convdiff2d needs one of the pinned sizes unless --nx/--ny are given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, requires = "ny")]
    nx: Option<usize>,
    #[arg(long, requires = "nx")]
    ny: Option<usize>,
    /// L-shape grid parameter (h = 1/(2m)).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    p1: f64,
    #[arg(long, default_value_t = 1.0)]
    p2: f64,
    #[arg(long, default_value_t = 0.0)]
    p3: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Use b = A·1 with known solution 1 (convdiff2d, poisson-lshape).
    #[arg(long)]
    constructed: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhsModeArg {
    CycleResidual,
    OriginalB,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [SolverKind::Roap2, SolverKind::Roap3])]
    solver: Vec<SolverKind>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    orth_tol: f64,
    /// Restart cap (sweeps for ap); n when unset.
    #[arg(long)]
    max_restarts: Option<usize>,
    #[arg(long, value_enum, default_value_t = RhsModeArg::CycleResidual)]
    rhs_mode: RhsModeArg,
    /// Row blocks for ap.
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Report file; stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn case_options(&self) -> CaseOptions {
        CaseOptions {
            solve: SolveOptions {
                tol: self.tol,
                orth_tol: self.orth_tol,
                max_restarts: self.max_restarts,
                rhs_mode: match self.rhs_mode {
                    RhsModeArg::CycleResidual => RhsMode::CycleResidual,
                    RhsModeArg::OriginalB => RhsMode::OriginalB,
                },
                ..SolveOptions::default()
            },
            blocks: self.blocks,
            ..CaseOptions::default()
        }
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

type Failure = Box<dyn std::error::Error>;

fn usage(msg: impl Into<String>) -> Failure {
    msg.into().into()
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, Failure> {
        let family = self.family.ok_or_else(|| usage("--family is required"))?;
        let need_n = || {
            self.n
                .ok_or_else(|| usage("--n is required for this family"))
        };
        Ok(match family {
            Family::Convdiff2d => {
                let (nx, ny) = match (self.nx, self.ny) {
                    (Some(nx), Some(ny)) => (nx, ny),
                    _ => {
                        let n = need_n()?;
                        convdiff_mesh(n).ok_or_else(|| {
                            usage(format!("no pinned mesh for n = {n}; pass --nx and --ny"))
                        })?
                    }
                };
                ProblemSpec::ConvDiff2d {
                    nx,
                    ny,
                    p1: self.p1,
                    p2: self.p2,
                    p3: self.p3,
                    constructed: self.constructed,
                }
            }
            Family::PoissonLshape => ProblemSpec::PoissonLShape {
                m: match self.m {
                    Some(m) => m,
                    None => lshape_m_for(need_n()?),
                },
                constructed: self.constructed,
            },
            Family::TridiagUnsym => ProblemSpec::TridiagUnsym { n: need_n()? },
            Family::RandomDense => ProblemSpec::RandomDense {
                n: need_n()?,
                seed: self.seed,
            },
        })
    }
}

fn load(matrix: &Path, rhs: &Path, solution: Option<&Path>) -> Result<GeneratedProblem, Failure> {
    let a = read_matrix(matrix)?;
    let b = read_vector(rhs)?;
    let x_true = solution.map(read_vector).transpose()?;
    let label = matrix
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    Ok(GeneratedProblem {
        a,
        b,
        x_true,
        label,
    })
}

fn default_sizes(example: u8) -> Result<Vec<usize>, Failure> {
    Ok(match example {
        1 => vec![90, 171, 361, 551, 741, 1131, 1521, 2401],
        2 => vec![200, 500, 1000, 1400, 1700, 2100],
        3 => vec![600, 900, 1200, 1500, 1800, 2100],
        4 => vec![300, 600, 900],
        _ => {
            return Err(usage(format!(
                "unknown example {example} (expected 1 to 4)"
            )))
        }
    })
}

fn example_spec(
    example: u8,
    n: usize,
    p: (f64, f64, f64),
    seed: u64,
) -> Result<ProblemSpec, Failure> {
    Ok(match example {
        1 => {
            let (nx, ny) = convdiff_mesh(n)
                .ok_or_else(|| usage(format!("no pinned convdiff2d mesh for n = {n}")))?;
            ProblemSpec::ConvDiff2d {
                nx,
                ny,
                p1: p.0,
                p2: p.1,
                p3: p.2,
                constructed: false,
            }
        }
        2 => ProblemSpec::PoissonLShape {
            m: lshape_m_for(n),
            constructed: false,
        },
        3 => ProblemSpec::TridiagUnsym { n },
        4 => ProblemSpec::RandomDense { n, seed },
        _ => {
            return Err(usage(format!(
                "unknown example {example} (expected 1 to 4)"
            )))
        }
    })
}

fn report(results: Vec<CaseResult>, run: &RunArgs) -> Result<bool, Failure> {
    let mut all_converged = true;
    for r in &results {
        if !r.status.converged() {
            all_converged = false;
            eprintln!(
                "{} n={} {}: {}",
                r.record.problem, r.record.n, r.record.solver, r.status
            );
        }
    }
    let mut records: Vec<_> = results.into_iter().map(|r| r.record).collect();
    sort_records(&mut records);
    match &run.out {
        Some(path) => emit_report(&records, run.format(), path)?,
        None => write_report(&records, run.format(), io::stdout().lock())?,
    }
    Ok(all_converged)
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Gen { problem, out } => {
            let p = problem.spec()?.generate()?;
            std::fs::create_dir_all(&out)?;
            write_matrix(out.join("matrix.mtx"), &p.a)?;
            write_vector(out.join("rhs.mtx"), &p.b)?;
            if let Some(x) = &p.x_true {
                write_vector(out.join("solution.mtx"), x)?;
            }
            Ok(true)
        }
        Command::Solve {
            matrix,
            rhs,
            solution,
            problem,
            run,
        } => {
            let p = match (&matrix, &rhs) {
                (Some(m), Some(r)) => load(m, r, solution.as_deref())?,
                _ => problem.spec()?.generate()?,
            };
            let opts = run.case_options();
            let results = run.solver.iter().map(|&s| run_case(&p, s, &opts)).collect();
            report(results, &run)
        }
        Command::Bench {
            examples,
            sizes,
            p1,
            p2,
            p3,
            seed,
            threads,
            run,
        } => {
            let mut specs = Vec::new();
            for &e in &examples {
                let list = match &sizes {
                    Some(s) => s.clone(),
                    None => default_sizes(e)?,
                };
                for n in list {
                    specs.push(example_spec(e, n, (p1, p2, p3), seed)?);
                }
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()?;
            let opts = run.case_options();
            let results = pool.install(|| {
                specs
                    .par_iter()
                    .map(|spec| -> Result<Vec<CaseResult>, String> {
                        let p = spec.generate().map_err(|e| e.to_string())?;
                        Ok(run.solver.iter().map(|&s| run_case(&p, s, &opts)).collect())
                    })
                    .collect::<Result<Vec<_>, _>>()
            })?;
            report(results.into_iter().flatten().collect(), &run)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
