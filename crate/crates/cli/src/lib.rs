//! `mlpr`: single solves, benchmark sweeps and performance profiles.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mlpagerank::bench::{
    load_suite_dir, performance_profile, read_rows, run_suite, synthetic_suite, write_profile_csv, write_rows,
    BenchmarkSuite, PerformanceProfile, ProfileMetric, DEFAULT_ALPHAS,
};
use mlpagerank::datagen::{
    assemble_real_world, build_cycle_tensor, build_first_order, gen_synthetic, load_edgelist, load_tensor,
    save_tensor, DEFAULT_GAMMA, SYNTHETIC_GENERATOR,
};
use mlpagerank::solvers::{solve, JacobianAction, Method, SolverOptions};
use mlpagerank::tensor::ColumnCheck;
use mlpagerank::{FlattenedTensor, PageRankProblem};

/// Exit code for a run that finished without converging.
pub const EXIT_NOT_CONVERGED: u8 = 1;
/// Exit code for argument, input, validation or I/O failures.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mlpr", version, about = "Multilinear PageRank solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with one method.
    Solve(SolveArgs),
    /// Sweep methods and damping factors over a suite of problems.
    Bench(BenchArgs),
    /// Dolan-Moré performance profiles from a bench CSV.
    Profile(ProfileArgs),
    /// Write a problem tensor to a file in the MLPR-TENSOR format.
    Generate(GenerateArgs),
}

/// Failure stage named in error messages.
#[derive(Debug, Clone, Copy)]
enum Stage {
    Parse,
    Validate,
    Solve,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::Validate => "validate",
            Stage::Solve => "solve",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Tensor file in the MLPR-TENSOR format.
    #[arg(long, value_name = "PATH", group = "source")]
    pub tensor: Option<PathBuf>,
    /// Seeded random third-order tensor of dimension N.
    #[arg(long, value_name = "N", group = "source")]
    pub synthetic: Option<usize>,
    #[arg(long, default_value_t = 1, requires = "synthetic")]
    pub seed: u64,
    /// Edge list; builds the mixed 3-cycle / random-walk tensor.
    #[arg(long, value_name = "PATH", group = "source")]
    pub graph: Option<PathBuf>,
    /// Weight of the 3-cycle component for --graph.
    #[arg(long, default_value_t = DEFAULT_GAMMA, requires = "graph")]
    pub gamma: f64,
    /// Rescale tensor columns that do not sum to one instead of rejecting them.
    #[arg(long)]
    pub repair: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Outer tolerance on ‖f(x)‖₁.
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    /// Inner GMRES tolerance on the residual 2-norm.
    #[arg(long, default_value_t = 1e-14)]
    pub inner_tol: f64,
    /// Maximum number of outer iterations.
    #[arg(long, default_value_t = 1000)]
    pub kmax: usize,
    /// Krylov dimension.
    #[arg(long, default_value_t = 40)]
    pub p: usize,
    /// Extrapolation window parameter (q + 2 iterates per cycle).
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    /// Finite-difference Jacobian actions for ng-mpe, ng-rre and na.
    #[arg(long)]
    pub fd: bool,
    /// Stop after this many outer iterations without improvement.
    #[arg(long, default_value_t = 20)]
    pub stagnation_window: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            outer_tol: self.tol,
            inner_tol: self.inner_tol,
            max_outer: self.kmax,
            krylov_dim: self.p,
            window: self.q,
            jacobian: if self.fd {
                JacobianAction::FiniteDifference
            } else {
                JacobianAction::Analytic
            },
            stagnation_window: self.stagnation_window,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Damping factor in [0, 1).
    #[arg(long)]
    pub alpha: f64,
    /// One of fp, newton, ng, ngfd, ng-mpe, ng-rre, na.
    #[arg(long, default_value = "ng")]
    pub method: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report destination.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// CSV residual history destination (`iter,residual_l1`).
    #[arg(long, value_name = "PATH")]
    pub history: Option<PathBuf>,
    /// Include the solution vector in the JSON report.
    #[arg(long)]
    pub emit_solution: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `*.mlpr` tensor files.
    #[arg(long, value_name = "DIR", group = "suite_source")]
    pub suite: Option<PathBuf>,
    /// Comma-separated sizes of a seeded synthetic suite.
    #[arg(long, value_name = "N,..", value_delimiter = ',', group = "suite_source")]
    pub synthetic_sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated damping factors.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated method ids, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub methods: Vec<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Concurrent cells.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub repair: bool,
    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// CSV written by `mlpr bench`.
    pub bench_csv: PathBuf,
    /// `iters`, `time_s`, or `all`.
    #[arg(long, default_value = "all")]
    pub metric: String,
    /// Log-spaced τ samples in addition to the breakpoints.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// CSV destination (`metric,method,tau,fraction`); standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON destination.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

/// JSON report of `mlpr solve`.
#[derive(Debug, Serialize)]
pub struct SolveJson {
    pub method: String,
    pub status: String,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub newton_steps: usize,
    pub extrapolation_fallbacks: usize,
    pub wall_time_s: f64,
    pub final_residual_l1: f64,
    pub alpha: f64,
    pub problem: String,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a).map(|()| 0),
        Command::Profile(a) => cmd_profile(&a).map(|()| 0),
        Command::Generate(a) => cmd_generate(&a).map(|()| 0),
    }
}

fn check(repair: bool) -> ColumnCheck {
    if repair {
        ColumnCheck::Repair
    } else {
        ColumnCheck::Strict
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// Loads or builds the tensor; returns it with a display name.
fn load_problem_tensor(a: &ProblemArgs) -> Result<(String, FlattenedTensor)> {
    if let Some(path) = &a.tensor {
        let t = load_tensor(path, check(a.repair)).context(Stage::Parse)?;
        Ok((stem(path), t))
    } else if let Some(n) = a.synthetic {
        let (t, _) = gen_synthetic(n, a.seed).context(Stage::Validate)?;
        Ok((format!("synthetic-n{n}-s{}", a.seed), t))
    } else if let Some(path) = &a.graph {
        let g = load_edgelist(path).context(Stage::Parse)?;
        let n = g.n();
        if n == 0 {
            return Err(anyhow::anyhow!("graph {} has no nodes", path.display())).context(Stage::Validate);
        }
        let v = vec![1.0 / n as f64; n];
        let cycles = build_cycle_tensor(&g);
        let t = assemble_real_world(&cycles.raw, &build_first_order(&g), &v, a.gamma).context(Stage::Validate)?;
        Ok((format!("{}-gamma{}", stem(path), a.gamma), t))
    } else {
        bail!("{}: one of --tensor, --synthetic or --graph is required", Stage::Parse)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .context(Stage::Write)?;
    Ok(BufWriter::new(f))
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let method: Method = a.method.parse().context(Stage::Parse)?;
    let (name, tensor) = load_problem_tensor(&a.problem)?;
    let (n, m) = (tensor.dim(), tensor.order());
    let problem = PageRankProblem::uniform(Arc::new(tensor), a.alpha).context(Stage::Validate)?;
    let opts = a.solver.options();
    opts.validate().context(Stage::Validate)?;
    let regularity = problem.check_regularity();
    if !regularity.regular {
        eprintln!(
            "note: alpha = {} is outside the regular regime alpha < 1/(m-1) = {:.6}",
            a.alpha,
            1.0 / (m as f64 - 1.0)
        );
    }

    let report = solve(&problem, method, &opts).context(Stage::Solve)?;

    let json = SolveJson {
        method: method.id().into(),
        status: report.status.id().into(),
        outer_iterations: report.outer_iterations,
        inner_iterations_total: report.inner_iterations_total(),
        newton_steps: report.newton_steps,
        extrapolation_fallbacks: report.extrapolation_fallbacks,
        wall_time_s: report.wall_time.as_secs_f64(),
        final_residual_l1: report.final_residual(),
        alpha: a.alpha,
        problem: name,
        n,
        m,
        solution: a.emit_solution.then(|| report.solution.clone()),
    };
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &json).context(Stage::Write)?;
        writeln!(w).and_then(|()| w.flush()).context(Stage::Write)?;
    }
    if let Some(path) = &a.history {
        let mut w = create(path)?;
        (|| -> io::Result<()> {
            writeln!(w, "iter,residual_l1")?;
            for (k, r) in report.residual_history.iter().enumerate() {
                writeln!(w, "{k},{r:e}")?;
            }
            w.flush()
        })()
        .context(Stage::Write)?;
    }
    println!(
        "{} {} alpha={} status={} iters={} inner={} residual={:e} time={:.6}s",
        json.problem,
        json.method,
        json.alpha,
        json.status,
        json.outer_iterations,
        json.inner_iterations_total,
        json.final_residual_l1,
        json.wall_time_s
    );
    Ok(if report.converged() { 0 } else { EXIT_NOT_CONVERGED })
}

fn parse_methods(ids: &[String]) -> Result<Vec<Method>> {
    if ids.len() == 1 && ids[0].eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    ids.iter()
        .map(|s| s.trim().parse::<Method>().map_err(anyhow::Error::from))
        .collect::<Result<_>>()
        .context(Stage::Parse)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let methods = parse_methods(&a.methods)?;
    let problems = match (&a.suite, &a.synthetic_sizes) {
        (Some(dir), _) => load_suite_dir(dir, check(a.repair)).context(Stage::Parse)?,
        (None, Some(sizes)) => synthetic_suite(sizes, a.seed).context(Stage::Validate)?,
        (None, None) => bail!("{}: one of --suite or --synthetic-sizes is required", Stage::Parse),
    };
    let alphas = a.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let suite = BenchmarkSuite::new(problems, alphas, methods, a.solver.options()).context(Stage::Validate)?;
    eprintln!(
        "running {} cells ({} problems x {} alphas x {} methods)",
        suite.cells(),
        suite.problems().len(),
        suite.alphas().len(),
        suite.methods().len()
    );
    let rows = run_suite(&suite, a.jobs).context(Stage::Solve)?;
    match &a.out {
        Some(path) => write_rows(create(path)?, &rows),
        None => write_rows(io::stdout().lock(), &rows),
    }
    .context(Stage::Write)?;
    let solved = rows.iter().filter(|r| r.converged()).count();
    eprintln!("{solved}/{} cells converged", rows.len());
    Ok(())
}

fn cmd_profile(a: &ProfileArgs) -> Result<()> {
    let metrics = match a.metric.as_str() {
        "all" => vec![ProfileMetric::Iters, ProfileMetric::Time],
        m => vec![m.parse::<ProfileMetric>().context(Stage::Parse)?],
    };
    let file = File::open(&a.bench_csv)
        .with_context(|| format!("cannot open {}", a.bench_csv.display()))
        .context(Stage::Parse)?;
    let rows = read_rows(io::BufReader::new(file))
        .with_context(|| a.bench_csv.display().to_string())
        .context(Stage::Parse)?;
    let profiles: Vec<PerformanceProfile> = metrics
        .into_iter()
        .map(|m| performance_profile(&rows, m, a.grid))
        .collect::<Result<_, _>>()
        .context(Stage::Validate)?;

    let mut buf = Vec::new();
    for (k, p) in profiles.iter().enumerate() {
        let mut part = Vec::new();
        write_profile_csv(&mut part, p).context(Stage::Write)?;
        // keep a single header line
        let text = String::from_utf8(part).expect("csv output is UTF-8");
        let body = if k == 0 { text.as_str() } else { text.split_once('\n').map_or("", |(_, b)| b) };
        buf.extend_from_slice(body.as_bytes());
    }
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(&buf).and_then(|()| w.flush()).context(Stage::Write)?;
        }
        None => io::stdout().lock().write_all(&buf).context(Stage::Write)?,
    }
    if let Some(path) = &a.json {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &profiles).context(Stage::Write)?;
        writeln!(w).and_then(|()| w.flush()).context(Stage::Write)?;
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let (name, tensor) = load_problem_tensor(&a.problem)?;
    let mut comments = vec![format!("problem {name}")];
    if a.problem.synthetic.is_some() {
        comments.push(format!("generator: {SYNTHETIC_GENERATOR}"));
        comments.push(format!("seed {}", a.problem.seed));
    }
    if a.problem.graph.is_some() {
        comments.push(format!("gamma {}; teleportation v = e/n", a.problem.gamma));
    }
    let refs: Vec<&str> = comments.iter().map(String::as_str).collect();
    save_tensor(&a.out, &tensor, &refs).context(Stage::Write)?;
    eprintln!("wrote {} (m={}, n={})", a.out.display(), tensor.order(), tensor.dim());
    Ok(())
}
