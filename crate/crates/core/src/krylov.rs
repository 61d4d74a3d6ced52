//! Arnoldi process, unrestarted GMRES over an abstract operator, and a dense
//! LU solve for the classical Newton baseline.

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2, norm_inf, scale, DenseMatrix};

/// Anything that maps `R^n -> R^n` (approximately) linearly.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("dense operator", self.cols(), x.len())?;
        Ok(self.matvec(x))
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.f)(x)
    }
}

/// `h_{j+1,j} <= BREAKDOWN_TOL * β` ends the process as a lucky breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Orthonormal Krylov basis and the Hessenberg projection of one Arnoldi run.
#[derive(Debug, Clone)]
pub struct KrylovWorkspace {
    /// `v_1, …, v_{k+1}` (only `v_1, …, v_k` after a breakdown).
    pub basis: Vec<Vec<f64>>,
    /// Column `j` holds `h_{1,j}, …, h_{j+1,j}`.
    pub hessenberg_columns: Vec<Vec<f64>>,
    /// Norm of the starting vector.
    pub beta: f64,
    pub breakdown: bool,
}

impl KrylovWorkspace {
    /// Number of completed Arnoldi steps `k`.
    pub fn steps(&self) -> usize {
        self.hessenberg_columns.len()
    }

    /// The `(k+1) x k` upper-Hessenberg matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let k = self.steps();
        let mut h = DenseMatrix::zeros(k + 1, k);
        for (j, col) in self.hessenberg_columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                h[(i, j)] = v;
            }
        }
        h
    }
}

struct Arnoldi<'a, O: ?Sized> {
    op: &'a O,
    ws: KrylovWorkspace,
    reorthogonalize: bool,
}

impl<'a, O: LinearOperator + ?Sized> Arnoldi<'a, O> {
    fn start(op: &'a O, r0: &[f64], reorthogonalize: bool) -> Result<Self> {
        check_len("arnoldi start vector", op.dim(), r0.len())?;
        let beta = norm2(r0);
        if beta == 0.0 {
            return Err(Error::ZeroResidual);
        }
        let mut v1 = r0.to_vec();
        scale(&mut v1, 1.0 / beta);
        Ok(Self {
            op,
            ws: KrylovWorkspace {
                basis: vec![v1],
                hessenberg_columns: Vec::new(),
                beta,
                breakdown: false,
            },
            reorthogonalize,
        })
    }

    /// One modified Gram-Schmidt step; returns the new Hessenberg column.
    fn step(&mut self) -> Result<&[f64]> {
        let j = self.ws.steps();
        let mut w = self.op.apply(&self.ws.basis[j])?;
        check_len("operator output", self.op.dim(), w.len())?;
        let mut h = vec![0.0; j + 2];
        for (i, v) in self.ws.basis.iter().enumerate() {
            h[i] = dot(&w, v);
            axpy(&mut w, -h[i], v);
        }
        if self.reorthogonalize {
            for (i, v) in self.ws.basis.iter().enumerate() {
                let c = dot(&w, v);
                h[i] += c;
                axpy(&mut w, -c, v);
            }
        }
        let h_next = norm2(&w);
        h[j + 1] = h_next;
        if h_next <= BREAKDOWN_TOL * self.ws.beta {
            self.ws.breakdown = true;
        } else {
            scale(&mut w, 1.0 / h_next);
            self.ws.basis.push(w);
        }
        self.ws.hessenberg_columns.push(h);
        Ok(self.ws.hessenberg_columns.last().unwrap())
    }
}

/// Runs up to `p` Arnoldi steps from `r0`, stopping early on breakdown.
/// A zero `r0` yields [`Error::ZeroResidual`].
pub fn arnoldi<O>(op: &O, r0: &[f64], p: usize, reorthogonalize: bool) -> Result<KrylovWorkspace>
where
    O: LinearOperator + ?Sized,
{
    if p == 0 {
        return Err(Error::InvalidParameter("Krylov dimension must be >= 1".into()));
    }
    let mut process = Arnoldi::start(op, r0, reorthogonalize)?;
    while process.ws.steps() < p && !process.ws.breakdown {
        process.step()?;
    }
    Ok(process.ws)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Absolute tolerance on the residual 2-norm.
    pub tol: f64,
    /// Krylov dimension `p`; at most `p` iterations, no restart.
    pub max_dim: usize,
    /// Second Gram-Schmidt pass.
    pub reorthogonalize: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_dim: 40,
            reorthogonalize: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    /// Final residual norm: the Givens estimate, or the monitor's value when
    /// a monitor was supplied.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: bool,
    /// Givens residual estimates `ρ_0 = β, ρ_1, …`.
    pub estimates: Vec<f64>,
}

/// GMRES for `A x = rhs` starting from `x0`.
pub fn gmres<O>(op: &O, rhs: &[f64], x0: &[f64], opts: &GmresOptions) -> Result<GmresOutcome>
where
    O: LinearOperator + ?Sized,
{
    gmres_monitored(op, rhs, x0, opts, None)
}

/// Candidate-residual callback: given the iterate `x_j`, returns the residual
/// norm used for the stopping test instead of the Givens estimate.
pub type ResidualMonitor<'m> = &'m mut dyn FnMut(&[f64]) -> Result<f64>;

/// GMRES with an optional [`ResidualMonitor`] for the per-iteration test.
pub fn gmres_monitored<O>(
    op: &O,
    rhs: &[f64],
    x0: &[f64],
    opts: &GmresOptions,
    mut monitor: Option<ResidualMonitor<'_>>,
) -> Result<GmresOutcome>
where
    O: LinearOperator + ?Sized,
{
    let n = op.dim();
    check_len("gmres rhs", n, rhs.len())?;
    check_len("gmres initial guess", n, x0.len())?;
    if !(opts.tol > 0.0) || opts.max_dim == 0 {
        return Err(Error::InvalidParameter(
            "gmres needs tol > 0 and Krylov dimension >= 1".into(),
        ));
    }

    let r0 = if x0.iter().all(|&v| v == 0.0) {
        rhs.to_vec()
    } else {
        let ax = op.apply(x0)?;
        rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let mut process = match Arnoldi::start(op, &r0, opts.reorthogonalize) {
        Ok(p) => p,
        Err(Error::ZeroResidual) => {
            return Ok(GmresOutcome {
                solution: x0.to_vec(),
                residual_norm: 0.0,
                iterations: 0,
                converged: true,
                breakdown: false,
                estimates: vec![0.0],
            })
        }
        Err(e) => return Err(e),
    };

    let beta = process.ws.beta;
    let mut g = vec![beta];
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    // columns of the triangular factor
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut estimates = vec![beta];
    let mut residual = beta;
    let mut converged = false;

    while process.ws.steps() < opts.max_dim {
        let mut h = process.step()?.to_vec();
        let j = h.len() - 2;
        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let (a, b) = (h[j], h[j + 1]);
        let r = a.hypot(b);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
        h[j] = r;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        g.push(-s * g[j]);
        g[j] *= c;
        h.truncate(j + 1);
        r_cols.push(h);

        let estimate = g[j + 1].abs();
        estimates.push(estimate);
        residual = match monitor.as_deref_mut() {
            Some(check) => check(&assemble(&process.ws.basis, &r_cols, &g, x0))?,
            None => estimate,
        };
        if residual <= opts.tol {
            converged = true;
            break;
        }
        if process.ws.breakdown {
            break;
        }
    }

    let solution = assemble(&process.ws.basis, &r_cols, &g, x0);
    Ok(GmresOutcome {
        solution,
        residual_norm: residual,
        iterations: r_cols.len(),
        converged,
        breakdown: process.ws.breakdown,
        estimates,
    })
}

/// `x0 + V_k y` where `R_k y = g_{1:k}`.
fn assemble(basis: &[Vec<f64>], r_cols: &[Vec<f64>], g: &[f64], x0: &[f64]) -> Vec<f64> {
    let k = r_cols.len();
    let mut y = g[..k].to_vec();
    for i in (0..k).rev() {
        let diag = r_cols[i][i];
        y[i] = if diag != 0.0 { y[i] / diag } else { 0.0 };
        for row in 0..i {
            y[row] -= r_cols[i][row] * y[i];
        }
    }
    let mut x = x0.to_vec();
    for (v, yi) in basis.iter().zip(&y) {
        axpy(&mut x, *yi, v);
    }
    x
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape {
            context: "dense_solve (square matrix)",
            expected: n,
            found: a.cols(),
        });
    }
    check_len("dense_solve rhs", n, b.len())?;
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let scale_ref = (0..n)
        .map(|i| norm_inf(lu.row(i)))
        .fold(0.0, f64::max);
    let pivot_floor = n as f64 * f64::EPSILON * scale_ref;

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax > pivot_floor) {
            return Err(Error::SingularMatrix { pivot: k });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= factor * lu[(k, j)];
                }
                x[i] -= factor * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(x)
}
