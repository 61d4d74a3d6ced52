use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{gen_synthetic, load_tensor};
use crate::error::{Error, Result};
use crate::problem::PageRankProblem;
use crate::solvers::{solve, Method, SolverOptions};
use crate::tensor::{ColumnCheck, FlattenedTensor};

pub const DEFAULT_ALPHAS: [f64; 9] = [0.49, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95, 0.99, 0.999];

#[derive(Debug, Clone)]
pub struct SuiteProblem {
    pub name: String,
    pub tensor: Arc<FlattenedTensor>,
    pub teleport: Vec<f64>,
}

impl SuiteProblem {
    /// Problem with uniform teleportation.
    pub fn uniform(name: impl Into<String>, tensor: FlattenedTensor) -> Self {
        let n = tensor.dim();
        Self {
            name: name.into(),
            tensor: Arc::new(tensor),
            teleport: vec![1.0 / n as f64; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSuite {
    problems: Vec<SuiteProblem>,
    alphas: Vec<f64>,
    methods: Vec<Method>,
    options: SolverOptions,
}

impl BenchmarkSuite {
    pub fn new(
        problems: Vec<SuiteProblem>,
        alphas: Vec<f64>,
        methods: Vec<Method>,
        options: SolverOptions,
    ) -> Result<Self> {
        if problems.is_empty() || alphas.is_empty() || methods.is_empty() {
            return Err(Error::InvalidParameter(
                "a benchmark suite needs at least one problem, alpha and method".into(),
            ));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = problems.iter().find(|p| !seen.insert(p.name.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate problem name {:?}", dup.name)));
        }
        options.validate()?;
        Ok(Self {
            problems,
            alphas,
            methods,
            options,
        })
    }

    pub fn problems(&self) -> &[SuiteProblem] {
        &self.problems
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    pub fn cells(&self) -> usize {
        self.problems.len() * self.alphas.len() * self.methods.len()
    }
}

/// One (problem, α, method) result. Failed cells carry the error text in
/// `status` and leave the numeric columns empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub alpha: f64,
    pub method: String,
    pub status: String,
    pub iters: Option<usize>,
    pub inner_iters: Option<usize>,
    pub time_s: Option<f64>,
    pub final_residual: Option<f64>,
}

impl BenchRow {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

fn run_cell(p: &SuiteProblem, alpha: f64, method: Method, opts: &SolverOptions) -> BenchRow {
    let outcome = PageRankProblem::new(Arc::clone(&p.tensor), alpha, p.teleport.clone())
        .and_then(|prob| solve(&prob, method, opts));
    let mut row = BenchRow {
        problem: p.name.clone(),
        alpha,
        method: method.id().to_string(),
        status: String::new(),
        iters: None,
        inner_iters: None,
        time_s: None,
        final_residual: None,
    };
    match outcome {
        Ok(r) => {
            row.status = r.status.id().to_string();
            row.iters = Some(r.outer_iterations);
            row.inner_iters = Some(r.inner_iterations_total());
            row.time_s = Some(r.wall_time.as_secs_f64());
            row.final_residual = Some(r.final_residual());
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Runs every cell, ordered by problem, then α, then method. `jobs > 1`
/// solves cells concurrently; the row order does not depend on it.
pub fn run_suite(suite: &BenchmarkSuite, jobs: usize) -> Result<Vec<BenchRow>> {
    let cells: Vec<(&SuiteProblem, f64, Method)> = suite
        .problems
        .iter()
        .flat_map(|p| {
            suite
                .alphas
                .iter()
                .flat_map(move |&a| suite.methods.iter().map(move |&m| (p, a, m)))
        })
        .collect();
    let opts = &suite.options;
    if jobs <= 1 {
        return Ok(cells.into_iter().map(|(p, a, m)| run_cell(p, a, m, opts)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|&(p, a, m)| run_cell(p, a, m, opts)).collect()))
}

/// Every `*.mlpr` file in `dir`, sorted by file name, named by its stem.
pub fn load_suite_dir(dir: impl AsRef<Path>, check: ColumnCheck) -> Result<Vec<SuiteProblem>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::from(e).in_file(dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "mlpr"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no .mlpr tensor files in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok(SuiteProblem::uniform(name, load_tensor(p, check)?))
        })
        .collect()
}

/// One seeded synthetic problem per size, named `synthetic-n{size}`.
pub fn synthetic_suite(sizes: &[usize], seed: u64) -> Result<Vec<SuiteProblem>> {
    sizes
        .iter()
        .map(|&n| {
            let (tensor, _) = gen_synthetic(n, seed)?;
            Ok(SuiteProblem::uniform(format!("synthetic-n{n}"), tensor))
        })
        .collect()
}

/// CSV with header `problem,alpha,method,status,iters,inner_iters,time_s,final_residual`.
pub fn write_rows<W: Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
