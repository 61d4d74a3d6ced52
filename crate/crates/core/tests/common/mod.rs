#![allow(dead_code)]

use std::sync::Arc;

use mlpagerank::linalg::DenseMatrix;
use mlpagerank::{FlattenedTensor, PageRankProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense column-stochastic tensor with about `density` of its entries nonzero.
/// Returns the tensor and its column-major data.
pub fn random_tensor(order: usize, n: usize, density: f64, seed: u64) -> (FlattenedTensor, Vec<f64>) {
    let mut r = rng(seed);
    let cols = n.pow(order as u32 - 1);
    let mut data = vec![0.0; n * cols];
    for col in data.chunks_mut(n) {
        for v in col.iter_mut() {
            if r.random::<f64>() < density {
                *v = r.random::<f64>();
            }
        }
        let s: f64 = col.iter().sum();
        if s == 0.0 {
            col[r.random_range(0..n)] = 1.0;
        } else {
            col.iter_mut().for_each(|v| *v /= s);
        }
    }
    (FlattenedTensor::dense(order, n, data.clone()).unwrap(), data)
}

/// Same entries stored sparsely.
pub fn as_sparse(order: usize, n: usize, data: &[f64]) -> FlattenedTensor {
    let triplets: Vec<_> = data
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, &v)| (k % n, k / n, v))
        .collect();
    FlattenedTensor::sparse(order, n, &triplets).unwrap()
}

pub fn random_simplex(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let x: Vec<f64> = (0..n).map(|_| r.random::<f64>() + 1e-3).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random::<f64>() * 2.0 - 1.0).collect()
}

/// All multi-indices `(i2, ..., im)` of `slots` digits in `0..n`.
pub fn multi_indices(n: usize, slots: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..slots {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |d| {
                    let mut p = prefix.clone();
                    p.push(d);
                    p
                })
            })
            .collect();
    }
    out
}

/// Column of the trailing indices, `i2` varying fastest.
pub fn column_of(n: usize, idx: &[usize]) -> usize {
    idx.iter().enumerate().map(|(k, &d)| d * n.pow(k as u32)).sum()
}

/// `Σ_{i2..im} R[i, (i2..im)] x_{i2} ⋯ x_{im}` by explicit loops.
pub fn brute_multilinear(order: usize, n: usize, data: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for idx in multi_indices(n, order - 1) {
        let c = column_of(n, &idx);
        let p: f64 = idx.iter().map(|&d| x[d]).product();
        for i in 0..n {
            y[i] += data[c * n + i] * p;
        }
    }
    y
}

/// `∂/∂x_j` of `αR(x⊗…⊗x) - x` by explicit loops over slots.
pub fn brute_jacobian(order: usize, n: usize, data: &[f64], x: &[f64], alpha: f64) -> Vec<Vec<f64>> {
    let mut j = vec![vec![0.0; n]; n];
    for idx in multi_indices(n, order - 1) {
        let c = column_of(n, &idx);
        for s in 0..order - 1 {
            let p: f64 = idx
                .iter()
                .enumerate()
                .filter(|&(t, _)| t != s)
                .map(|(_, &d)| x[d])
                .product();
            for i in 0..n {
                j[i][idx[s]] += alpha * data[c * n + i] * p;
            }
        }
    }
    for (i, row) in j.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    j
}

pub fn problem(tensor: FlattenedTensor, alpha: f64) -> PageRankProblem {
    PageRankProblem::uniform(Arc::new(tensor), alpha).unwrap()
}

pub fn synthetic_problem(n: usize, seed: u64, alpha: f64) -> PageRankProblem {
    let (t, v) = mlpagerank::datagen::gen_synthetic(n, seed).unwrap();
    PageRankProblem::new(Arc::new(t), alpha, v).unwrap()
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Dense matrix `U diag(s) Vᵀ`-like with controlled conditioning: a random
/// orthogonal-ish mix of a diagonal whose entries lie in `[1, cond]`.
pub fn conditioned_matrix(n: usize, cond: f64, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    let householder = |r: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| r.random::<f64>() - 0.5).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / nv).collect()
    };
    let u = householder(&mut r);
    let w = householder(&mut r);
    let diag: Vec<f64> = (0..n)
        .map(|i| cond.powf(i as f64 / (n - 1) as f64) * if r.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    // (I - 2uuᵀ) diag (I - 2wwᵀ)
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                let hu = if i == k { 1.0 } else { 0.0 } - 2.0 * u[i] * u[k];
                let hw = if k == j { 1.0 } else { 0.0 } - 2.0 * w[k] * w[j];
                s += hu * diag[k] * hw;
            }
            m[(i, j)] = s;
        }
    }
    m
}

/// Seeded `n x n` matrix `M = A Bᵀ` of rank `rank`, scaled to spectral
/// radius (bounded by its Frobenius norm) `radius`.
pub fn low_rank_contraction(n: usize, rank: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..rank).map(|_| r.random::<f64>() - 0.5).collect()).collect();
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..rank).map(|_| r.random::<f64>() - 0.5).collect()).collect();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..rank).map(|k| a[i][k] * b[j][k]).sum()).collect())
        .collect();
    let frob: f64 = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for row in &mut m {
        row.iter_mut().for_each(|v| *v *= radius / frob);
    }
    m
}
