use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::tensor::{ColumnCheck, FlattenedTensor, RankOneTerm, STOCHASTIC_TOL};

/// Mixing weight between the 3-cycle tensor and the first-order walk when
/// none is given.
pub const DEFAULT_GAMMA: f64 = 0.5;

/// Directed graph on nodes `1..=n`, without duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    /// Builds a graph from 1-based edges; duplicates are dropped and the
    /// edge list is sorted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(s, d)) = set.iter().find(|&&(s, d)| s == 0 || d == 0 || s > n || d > n) {
            return Err(Error::InvalidParameter(format!(
                "edge ({s}, {d}) outside the node range 1..={n}"
            )));
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// 0-based out-neighbour lists, each sorted.
    fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(s, d) in &self.edges {
            out[s - 1].push(d - 1);
        }
        out
    }
}

/// Erdős–Rényi style digraph: each ordered pair `(i, j)`, `i ≠ j`, is an edge
/// with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Result<DirectedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    DirectedGraph::new(n, edges)
}

/// Parses `src dst` lines. Lines starting with `%` or `#` are comments, except
/// a `# nodes N` header which fixes the node count (otherwise the largest id).
/// Tokens after the first two on a line are ignored.
pub fn parse_edgelist(text: &str) -> Result<DirectedGraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if let Some(rest) = l.strip_prefix('#') {
            let mut t = rest.split_whitespace();
            if t.next() == Some("nodes") {
                let tok = t.next().ok_or_else(|| Error::parse(line, "missing node count"))?;
                let n = tok
                    .parse()
                    .map_err(|_| Error::parse(line, format!("invalid node count {tok:?}")))?;
                declared = Some(n);
            }
            continue;
        }
        if l.is_empty() || l.starts_with('%') {
            continue;
        }
        let mut t = l.split_whitespace();
        let mut id = |what: &str| -> Result<usize> {
            let tok = t.next().ok_or_else(|| Error::parse(line, format!("missing {what} node")))?;
            match tok.parse::<usize>() {
                Ok(0) => Err(Error::parse(line, "node ids are 1-based")),
                Ok(v) => Ok(v),
                Err(_) => Err(Error::parse(line, format!("invalid {what} node {tok:?}"))),
            }
        };
        let s = id("source")?;
        let d = id("target")?;
        edges.push((line, s, d));
    }
    let max_id = edges.iter().map(|&(_, s, d)| s.max(d)).max().unwrap_or(0);
    let n = declared.unwrap_or(max_id);
    if let Some(&(line, s, d)) = edges.iter().find(|&&(_, s, d)| s > n || d > n) {
        return Err(Error::parse(line, format!("edge ({s}, {d}) exceeds declared node count {n}")));
    }
    DirectedGraph::new(n, edges.into_iter().map(|(_, s, d)| (s, d)))
}

pub fn load_edgelist(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_edgelist(&text).map_err(|e| e.in_file(path))
}

/// Sparse matrix as 0-based `(row, col, value)` triplets with unique
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::InvalidParameter(format!(
                "entry ({r}, {c}) outside a {rows} x {cols} matrix"
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for &(r, _, v) in &self.entries {
            s[r] += v;
        }
        s
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, c, v) in &self.entries {
            s[c] += v;
        }
        s
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("sparse matvec", self.cols, x.len())?;
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            d[r][c] += v;
        }
        d
    }

    /// Each column with a positive sum scaled to sum one; zero columns kept.
    fn normalize_columns(&self) -> Self {
        let sums = self.column_sums();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, if sums[c] > 0.0 { v / sums[c] } else { v }))
                .collect(),
        }
    }
}

/// Unnormalized third-order 3-cycle tensor of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTensor {
    /// `n x n²` unfolding: `t_ijk = 1` sits at row `i`, column `j + k n`.
    pub raw: SparseMatrix,
    /// Distinct cycles `{a→b→c→a}`; each contributes three tensor entries.
    pub geometric_cycles: usize,
}

impl CycleTensor {
    pub fn entries(&self) -> usize {
        self.raw.nnz()
    }
}

/// `t_ijk = 1` iff `i→j`, `j→k`, `k→i` are edges and `i, j, k` are distinct.
pub fn build_cycle_tensor(g: &DirectedGraph) -> CycleTensor {
    let n = g.n();
    let succ = g.successors();
    let edge_set: HashSet<(usize, usize)> = g.edges().iter().map(|&(s, d)| (s - 1, d - 1)).collect();
    let mut entries = Vec::new();
    for i in 0..n {
        for &j in &succ[i] {
            if j == i {
                continue;
            }
            for &k in &succ[j] {
                if k != i && k != j && edge_set.contains(&(k, i)) {
                    entries.push((i, j + k * n, 1.0));
                }
            }
        }
    }
    let geometric_cycles = entries.len() / 3;
    CycleTensor {
        raw: SparseMatrix {
            rows: n,
            cols: n * n,
            entries,
        },
        geometric_cycles,
    }
}

/// Row-stochastic random walk `P = D⁺A`; rows of nodes without out-edges are
/// zero.
pub fn build_first_order(g: &DirectedGraph) -> SparseMatrix {
    let succ = g.successors();
    let entries = succ
        .iter()
        .enumerate()
        .flat_map(|(i, out)| {
            let w = 1.0 / out.len() as f64;
            out.iter().map(move |&j| (i, j, w))
        })
        .collect();
    SparseMatrix {
        rows: g.n(),
        cols: g.n(),
        entries,
    }
}

/// `e_rᵀ - e_nᵀ B`: the mass each column of `B` is missing.
pub fn dangling_row(b: &SparseMatrix) -> Result<Vec<f64>> {
    if let Some(&(r, c, v)) = b.entries.iter().find(|e| !(e.2 >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative entry {v} at ({r}, {c})")));
    }
    b.column_sums()
        .into_iter()
        .enumerate()
        .map(|(c, s)| {
            if s > 1.0 + 1e-9 {
                return Err(Error::InvalidParameter(format!("column {c} sums to {s} > 1")));
            }
            let d = 1.0 - s;
            Ok(if d < 0.0 && d >= -1e-12 { 0.0 } else { d.max(0.0) })
        })
        .collect()
}

/// Third-order transition tensor
///
/// ```text
/// R = γ [Q + v dang(Q)] + (1 - γ) [Pᵀ + v dang(Pᵀ)] ⊗ e_nᵀ
/// ```
///
/// with `Q` the column-normalized 3-cycle unfolding and `P` the row-stochastic
/// walk. The `v dang(·)` terms are kept as a rank-one term, so the result is
/// stored with `O(nnz(Q) + n nnz(P))` entries. The broadcast block puts
/// column `j` of `Pᵀ` at every unfolding column `j + k n`.
pub fn assemble_real_world(
    q_raw: &SparseMatrix,
    p: &SparseMatrix,
    v: &[f64],
    gamma: f64,
) -> Result<FlattenedTensor> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let n = p.rows();
    check_len("first-order matrix columns", n, p.cols())?;
    check_len("cycle tensor rows", n, q_raw.rows())?;
    check_len("cycle tensor columns", n * n, q_raw.cols())?;
    check_len("teleportation vector", n, v.len())?;
    if v.iter().any(|x| !(*x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidParameter("teleportation vector must be stochastic".into()));
    }

    let q = q_raw.normalize_columns();
    let pt = p.transpose();
    let dang_q = dangling_row(&q)?;
    let dang_p = dangling_row(&pt)?;

    let mut triplets = Vec::with_capacity(q.nnz() + n * pt.nnz());
    if gamma > 0.0 {
        triplets.extend(q.entries().iter().map(|&(r, c, x)| (r, c, gamma * x)));
    }
    if gamma < 1.0 {
        for &(r, j, x) in pt.entries() {
            for k in 0..n {
                triplets.push((r, j + k * n, (1.0 - gamma) * x));
            }
        }
    }
    let weights = (0..n * n)
        .map(|c| gamma * dang_q[c] + (1.0 - gamma) * dang_p[c % n])
        .collect();
    let term = RankOneTerm {
        direction: v.to_vec(),
        weights,
    };
    FlattenedTensor::sparse_with(3, n, &triplets, Some(term), ColumnCheck::Strict)
}
