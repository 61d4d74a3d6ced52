//! The mode-1 unfolding of an order-`m`, dimension-`n` transition tensor and
//! the tensor-vector kernels built on it.
//!
//! The unfolding `R` has `n` rows and `n^(m-1)` columns. Column `c` holds the
//! fibre for the trailing indices `(i2, ..., im)` with `i2` varying fastest:
//!
//! ```text
//! c = i2 + i3*n + ... + im*n^(m-2)        (0-based)
//! ```
//!
//! so `R * (x ⊗ x)` selects column `j*n + j` when `x = e_j`.
//!
//! Besides dense and sparse storage a tensor may carry a rank-one term
//! `u * wᵀ` on top of the stored entries. Graph-derived tensors use it for
//! teleportation columns, which would otherwise be dense.

use crate::error::{check_len, Error, Result};
use crate::linalg::DenseMatrix;

/// Tolerance on `|column sum - 1|` accepted by validation.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Largest `n` for which assembling the dense `n x n` Jacobian is considered
/// affordable.
pub const DENSE_JACOBIAN_SOFT_CAP: usize = 5000;

/// What to do with columns whose sums drift from one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnCheck {
    /// Reject any column off by more than [`STOCHASTIC_TOL`].
    #[default]
    Strict,
    /// Rescale every column with a positive sum to sum exactly to one.
    Repair,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Column-major `n x cols`.
    Dense(Vec<f64>),
    Sparse(Csc),
}

#[derive(Debug, Clone, PartialEq)]
struct Csc {
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    fn from_triplets(n: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n || c >= cols {
                return Err(Error::InvalidTensor(format!(
                    "entry ({r}, {c}) outside a {n} x {cols} unfolding"
                )));
            }
            if v != 0.0 {
                sorted.push((r, c, v));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (c, r));

        let mut col_ptr = vec![0usize; cols + 1];
        let mut rows = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                // duplicate coordinates accumulate
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            col_ptr[c + 1] += 1;
            rows.push(r);
            values.push(v);
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(Self {
            col_ptr,
            rows,
            values,
        })
    }

    fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.rows[range.clone()], &self.values[range])
    }
}

/// A rank-one term `direction * weightsᵀ` added to the stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm {
    /// Length `n`.
    pub direction: Vec<f64>,
    /// Length `n^(m-1)`, one weight per column.
    pub weights: Vec<f64>,
}

/// Column-stochastic mode-1 unfolding of a transition probability tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenedTensor {
    order: usize,
    dim: usize,
    cols: usize,
    storage: Storage,
    rank_one: Option<RankOneTerm>,
}

fn column_count(order: usize, dim: usize) -> Result<usize> {
    if order < 2 {
        return Err(Error::InvalidTensor(format!("order must be >= 2, got {order}")));
    }
    if dim < 1 {
        return Err(Error::InvalidTensor("dimension must be >= 1".into()));
    }
    u32::try_from(order - 1)
        .ok()
        .and_then(|e| dim.checked_pow(e))
        .ok_or_else(|| Error::InvalidTensor(format!("n^(m-1) overflows for n={dim}, m={order}")))
}

impl FlattenedTensor {
    /// Dense unfolding from column-major data (`data[c * n + i] = R[i, c]`).
    pub fn dense(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::dense_with(order, dim, data, ColumnCheck::Strict)
    }

    pub fn dense_with(order: usize, dim: usize, data: Vec<f64>, check: ColumnCheck) -> Result<Self> {
        let cols = column_count(order, dim)?;
        check_len("dense tensor data", dim * cols, data.len())?;
        Self::build(order, dim, cols, Storage::Dense(data), None, check)
    }

    /// Sparse unfolding from 0-based `(row, column, value)` triplets.
    /// Duplicate coordinates are summed.
    pub fn sparse(order: usize, dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        Self::sparse_with(order, dim, triplets, None, ColumnCheck::Strict)
    }

    /// Sparse unfolding plus an optional rank-one term.
    pub fn sparse_with(
        order: usize,
        dim: usize,
        triplets: &[(usize, usize, f64)],
        rank_one: Option<RankOneTerm>,
        check: ColumnCheck,
    ) -> Result<Self> {
        let cols = column_count(order, dim)?;
        if let Some(term) = &rank_one {
            check_len("rank-one direction", dim, term.direction.len())?;
            check_len("rank-one weights", cols, term.weights.len())?;
        }
        let csc = Csc::from_triplets(dim, cols, triplets)?;
        Self::build(order, dim, cols, Storage::Sparse(csc), rank_one, check)
    }

    fn build(
        order: usize,
        dim: usize,
        cols: usize,
        storage: Storage,
        rank_one: Option<RankOneTerm>,
        check: ColumnCheck,
    ) -> Result<Self> {
        let mut tensor = Self {
            order,
            dim,
            cols,
            storage,
            rank_one,
        };
        tensor.check_nonnegative()?;
        if check == ColumnCheck::Repair {
            tensor.renormalize()?;
        }
        tensor.validate()?;
        Ok(tensor)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n^(m-1)`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn rank_one(&self) -> Option<&RankOneTerm> {
        self.rank_one.as_ref()
    }

    /// Number of explicitly stored entries (the rank-one term is not counted).
    pub fn stored_entries(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Sparse(s) => s.values.len(),
        }
    }

    /// Trailing indices `(i2, ..., im)` of column `c`, `i2` first.
    pub fn column_digits(&self, c: usize) -> Vec<usize> {
        let mut rest = c;
        (0..self.order - 1)
            .map(|_| {
                let d = rest % self.dim;
                rest /= self.dim;
                d
            })
            .collect()
    }

    /// Column index of the trailing indices `(i2, ..., im)`.
    pub fn column_index(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.dim + d)
    }

    /// Materialized column `c` including the rank-one term.
    pub fn column(&self, c: usize) -> Vec<f64> {
        let n = self.dim;
        let mut out = match &self.storage {
            Storage::Dense(d) => d[c * n..(c + 1) * n].to_vec(),
            Storage::Sparse(s) => {
                let mut col = vec![0.0; n];
                let (rows, vals) = s.column(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    col[r] += v;
                }
                col
            }
        };
        if let Some(term) = &self.rank_one {
            let w = term.weights[c];
            if w != 0.0 {
                for (o, u) in out.iter_mut().zip(&term.direction) {
                    *o += w * u;
                }
            }
        }
        out
    }

    /// Entry `R[i, c]` including the rank-one term.
    pub fn entry(&self, i: usize, c: usize) -> f64 {
        let stored = match &self.storage {
            Storage::Dense(d) => d[c * self.dim + i],
            Storage::Sparse(s) => {
                let (rows, vals) = s.column(c);
                rows.iter()
                    .zip(vals)
                    .filter(|(&r, _)| r == i)
                    .map(|(_, &v)| v)
                    .sum()
            }
        };
        stored
            + self
                .rank_one
                .as_ref()
                .map_or(0.0, |t| t.direction[i] * t.weights[c])
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums: Vec<f64> = match &self.storage {
            Storage::Dense(d) => d.chunks(self.dim).map(|col| col.iter().sum()).collect(),
            Storage::Sparse(s) => (0..self.cols).map(|c| s.column(c).1.iter().sum()).collect(),
        };
        if let Some(term) = &self.rank_one {
            let mass: f64 = term.direction.iter().sum();
            for (s, w) in sums.iter_mut().zip(&term.weights) {
                *s += mass * w;
            }
        }
        sums
    }

    /// All nonzero entries as 0-based triplets, the rank-one term expanded.
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for c in 0..self.cols {
            for (i, v) in self.column(c).into_iter().enumerate() {
                if v != 0.0 {
                    out.push((i, c, v));
                }
            }
        }
        out
    }

    fn check_nonnegative(&self) -> Result<()> {
        let bad = |row: usize, column: usize, value: f64| Error::NegativeEntry { row, column, value };
        match &self.storage {
            Storage::Dense(d) => {
                if let Some(k) = d.iter().position(|v| !(*v >= 0.0)) {
                    return Err(bad(k % self.dim, k / self.dim, d[k]));
                }
            }
            Storage::Sparse(s) => {
                for c in 0..self.cols {
                    let (rows, vals) = s.column(c);
                    if let Some(k) = vals.iter().position(|v| !(*v >= 0.0)) {
                        return Err(bad(rows[k], c, vals[k]));
                    }
                }
            }
        }
        if let Some(term) = &self.rank_one {
            if term.direction.iter().any(|v| !(*v >= 0.0)) || term.weights.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidTensor("rank-one term has negative entries".into()));
            }
        }
        Ok(())
    }

    fn renormalize(&mut self) -> Result<()> {
        let sums = self.column_sums();
        if let Some(c) = sums.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::NotStochastic { column: c, sum: sums[c] });
        }
        match &mut self.storage {
            Storage::Dense(d) => {
                for (col, s) in d.chunks_mut(self.dim).zip(&sums) {
                    col.iter_mut().for_each(|v| *v /= s);
                }
            }
            Storage::Sparse(csc) => {
                for (c, s) in sums.iter().enumerate() {
                    let range = csc.col_ptr[c]..csc.col_ptr[c + 1];
                    csc.values[range].iter_mut().for_each(|v| *v /= s);
                }
            }
        }
        if let Some(term) = &mut self.rank_one {
            for (w, s) in term.weights.iter_mut().zip(&sums) {
                *w /= s;
            }
        }
        Ok(())
    }

    /// Checks column-stochasticity to within [`STOCHASTIC_TOL`], naming the
    /// worst column on failure.
    pub fn validate(&self) -> Result<()> {
        self.check_nonnegative()?;
        let (worst, sum) = self
            .column_sums()
            .into_iter()
            .enumerate()
            .fold((0, 1.0), |(wc, ws), (c, s)| {
                if !((s - 1.0).abs() <= (ws - 1.0_f64).abs()) {
                    (c, s)
                } else {
                    (wc, ws)
                }
            });
        if (sum - 1.0).abs() > STOCHASTIC_TOL || !sum.is_finite() {
            return Err(Error::NotStochastic { column: worst, sum });
        }
        Ok(())
    }

    /// Visits every column that can contribute, in increasing order, with
    /// its trailing digits. `f` returns the scalar weight of that column;
    /// the weighted stored column is accumulated into `y` and the weighted
    /// rank-one coefficient is returned.
    fn accumulate<F>(&self, y: &mut [f64], mut weight: F) -> f64
    where
        F: FnMut(&[usize]) -> f64,
    {
        let n = self.dim;
        let mut digits = vec![0usize; self.order - 1];
        // Neumaier-compensated, since this sums up to n^(m-1) terms
        let (mut rank_one_coeff, mut carry) = (0.0_f64, 0.0_f64);
        for c in 0..self.cols {
            let w_c = self.rank_one.as_ref().map_or(0.0, |t| t.weights[c]);
            let stored = match &self.storage {
                Storage::Dense(_) => true,
                Storage::Sparse(s) => s.col_ptr[c + 1] > s.col_ptr[c],
            };
            if stored || w_c != 0.0 {
                let w = weight(&digits);
                if w != 0.0 {
                    match &self.storage {
                        Storage::Dense(d) => {
                            for (yi, r) in y.iter_mut().zip(&d[c * n..(c + 1) * n]) {
                                *yi += w * r;
                            }
                        }
                        Storage::Sparse(s) => {
                            let (rows, vals) = s.column(c);
                            for (&r, &v) in rows.iter().zip(vals) {
                                y[r] += w * v;
                            }
                        }
                    }
                    let term = w_c * w;
                    let t = rank_one_coeff + term;
                    carry += if rank_one_coeff.abs() >= term.abs() {
                        (rank_one_coeff - t) + term
                    } else {
                        (term - t) + rank_one_coeff
                    };
                    rank_one_coeff = t;
                }
            }
            // odometer over (i2, ..., im)
            for d in digits.iter_mut() {
                *d += 1;
                if *d < n {
                    break;
                }
                *d = 0;
            }
        }
        rank_one_coeff + carry
    }

    fn add_rank_one(&self, y: &mut [f64], coeff: f64) {
        if let Some(term) = &self.rank_one {
            for (yi, u) in y.iter_mut().zip(&term.direction) {
                *yi += coeff * u;
            }
        }
    }

    /// `R (x ⊗ x ⊗ ... ⊗ x)` with `m - 1` factors.
    pub fn apply_multilinear(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_multilinear", self.dim, x.len())?;
        let mut y = vec![0.0; self.dim];
        let coeff = self.accumulate(&mut y, |digits| digits.iter().map(|&d| x[d]).product());
        self.add_rank_one(&mut y, coeff);
        Ok(y)
    }

    /// Matrix-free Jacobian action of `f(x) = αR(x⊗…⊗x) + (1-α)v - x`:
    /// `α Σ_s R(x ⊗ … ⊗ w ⊗ … ⊗ x) - w` with `w` in slot `s`.
    pub fn jacobian_apply(&self, x: &[f64], w: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_len("jacobian_apply (x)", self.dim, x.len())?;
        check_len("jacobian_apply (w)", self.dim, w.len())?;
        let slots = self.order - 1;
        let mut y = vec![0.0; self.dim];
        let mut prefix = vec![1.0; slots + 1];
        let coeff = self.accumulate(&mut y, |digits| {
            for (t, &d) in digits.iter().enumerate() {
                prefix[t + 1] = prefix[t] * x[d];
            }
            let mut suffix = 1.0;
            let mut total = 0.0;
            for s in (0..slots).rev() {
                total += prefix[s] * w[digits[s]] * suffix;
                suffix *= x[digits[s]];
            }
            total
        });
        self.add_rank_one(&mut y, coeff);
        for (yi, wi) in y.iter_mut().zip(w) {
            *yi = alpha * *yi - wi;
        }
        Ok(y)
    }

    /// The `n x n` Jacobian `αR(I⊗x⊗…⊗x + … + x⊗…⊗x⊗I) - I`.
    ///
    /// Cost is `O(stored entries * m + n^2)`; intended for `n` up to
    /// [`DENSE_JACOBIAN_SOFT_CAP`].
    pub fn dense_jacobian(&self, x: &[f64], alpha: f64) -> Result<DenseMatrix> {
        check_len("dense_jacobian", self.dim, x.len())?;
        let n = self.dim;
        let slots = self.order - 1;
        let mut jac = DenseMatrix::zeros(n, n);
        let mut rank_one_row = vec![0.0; n];
        let mut digits = vec![0usize; slots];
        let mut prefix = vec![1.0; slots + 1];
        let mut partial = vec![0.0; slots];
        for c in 0..self.cols {
            for (t, &d) in digits.iter().enumerate() {
                prefix[t + 1] = prefix[t] * x[d];
            }
            let mut suffix = 1.0;
            for s in (0..slots).rev() {
                partial[s] = prefix[s] * suffix;
                suffix *= x[digits[s]];
            }
            match &self.storage {
                Storage::Dense(d) => {
                    let col = &d[c * n..(c + 1) * n];
                    for s in 0..slots {
                        let j = digits[s];
                        let p = partial[s];
                        if p != 0.0 {
                            for (i, r) in col.iter().enumerate() {
                                jac[(i, j)] += r * p;
                            }
                        }
                    }
                }
                Storage::Sparse(sp) => {
                    let (rows, vals) = sp.column(c);
                    for s in 0..slots {
                        let j = digits[s];
                        for (&i, &v) in rows.iter().zip(vals) {
                            jac[(i, j)] += v * partial[s];
                        }
                    }
                }
            }
            if let Some(term) = &self.rank_one {
                let w_c = term.weights[c];
                if w_c != 0.0 {
                    for s in 0..slots {
                        rank_one_row[digits[s]] += w_c * partial[s];
                    }
                }
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < n {
                    break;
                }
                *d = 0;
            }
        }
        if let Some(term) = &self.rank_one {
            for (i, u) in term.direction.iter().enumerate() {
                for (j, g) in rank_one_row.iter().enumerate() {
                    jac[(i, j)] += u * g;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] *= alpha;
            }
            jac[(i, i)] -= 1.0;
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_half() -> FlattenedTensor {
        FlattenedTensor::dense(3, 2, vec![0.5; 8]).unwrap()
    }

    /// Pseudo-random stochastic dense tensor without pulling in an RNG.
    fn lcg_tensor(order: usize, n: usize, seed: u64) -> FlattenedTensor {
        let cols = n.pow(order as u32 - 1);
        let mut state = seed;
        let mut data: Vec<f64> = (0..n * cols)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        for col in data.chunks_mut(n) {
            let s: f64 = col.iter().sum();
            col.iter_mut().for_each(|v| *v /= s);
        }
        FlattenedTensor::dense_with(order, n, data, ColumnCheck::Repair).unwrap()
    }

    #[test]
    fn uniform_columns_give_uniform_output() {
        let y = uniform_half().apply_multilinear(&[0.3, 0.7]).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_vector_selects_diagonal_column() {
        let t = lcg_tensor(3, 3, 11);
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            let y = t.apply_multilinear(&e).unwrap();
            assert_eq!(y, t.column(j * 3 + j));
        }
    }

    #[test]
    fn column_index_round_trips_digits() {
        let t = lcg_tensor(4, 3, 5);
        for c in 0..t.cols() {
            assert_eq!(t.column_index(&t.column_digits(c)), c);
        }
        assert_eq!(t.column_digits(1 + 2 * 3), vec![1, 2, 0]);
    }

    #[test]
    fn shape_errors() {
        let t = uniform_half();
        assert!(matches!(t.apply_multilinear(&[1.0]), Err(Error::Shape { .. })));
        assert!(t.jacobian_apply(&[0.5, 0.5], &[1.0], 0.5).is_err());
        assert!(t.dense_jacobian(&[1.0, 0.0, 0.0], 0.5).is_err());
        assert!(FlattenedTensor::dense(3, 2, vec![0.5; 7]).is_err());
    }

    #[test]
    fn validation_rejects_bad_columns() {
        let mut data = vec![0.5; 8];
        data[3] = 0.6;
        match FlattenedTensor::dense(3, 2, data.clone()) {
            Err(Error::NotStochastic { column, .. }) => assert_eq!(column, 1),
            other => panic!("unexpected {other:?}"),
        }
        let repaired = FlattenedTensor::dense_with(3, 2, data, ColumnCheck::Repair).unwrap();
        assert!((repaired.column_sums()[1] - 1.0).abs() < 1e-15);

        let mut neg = vec![0.5; 8];
        neg[0] = -0.5;
        neg[1] = 1.5;
        assert!(matches!(
            FlattenedTensor::dense(3, 2, neg),
            Err(Error::NegativeEntry { row: 0, column: 0, .. })
        ));
        assert!(FlattenedTensor::dense(1, 2, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn last_bit_drift_is_accepted() {
        let mut data = vec![0.5; 8];
        data[0] += 1e-14;
        assert!(FlattenedTensor::dense(3, 2, data).is_ok());
    }

    #[test]
    fn sparse_and_dense_agree() {
        let dense = lcg_tensor(3, 4, 3);
        let sparse = FlattenedTensor::sparse(3, 4, &dense.to_triplets()).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let w = [1.0, -2.0, 0.5, 0.25];
        let a = dense.apply_multilinear(&x).unwrap();
        let b = sparse.apply_multilinear(&x).unwrap();
        let ja = dense.jacobian_apply(&x, &w, 0.7).unwrap();
        let jb = sparse.jacobian_apply(&x, &w, 0.7).unwrap();
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() < 1e-15);
            assert!((ja[i] - jb[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn sparse_duplicates_accumulate() {
        let t = FlattenedTensor::sparse(2, 2, &[(0, 0, 0.25), (0, 0, 0.75), (1, 1, 1.0)]).unwrap();
        assert_eq!(t.stored_entries(), 2);
        assert_eq!(t.entry(0, 0), 1.0);
    }

    #[test]
    fn rank_one_term_matches_materialized_tensor() {
        // half of each column explicit, half teleported to u
        let n = 3;
        let u = vec![0.2, 0.3, 0.5];
        let mut triplets = Vec::new();
        let mut weights = vec![0.0; n * n];
        for c in 0..n * n {
            if c % 2 == 0 {
                triplets.push((c % n, c, 0.5));
                weights[c] = 0.5;
            } else {
                weights[c] = 1.0;
            }
        }
        let structured = FlattenedTensor::sparse_with(
            3,
            n,
            &triplets,
            Some(RankOneTerm {
                direction: u,
                weights,
            }),
            ColumnCheck::Strict,
        )
        .unwrap();
        let explicit = FlattenedTensor::sparse(3, n, &structured.to_triplets()).unwrap();
        let x = [0.5, 0.25, 0.25];
        let w = [0.3, -0.1, 0.7];
        let a = structured.apply_multilinear(&x).unwrap();
        let b = explicit.apply_multilinear(&x).unwrap();
        let ja = structured.jacobian_apply(&x, &w, 0.9).unwrap();
        let jb = explicit.jacobian_apply(&x, &w, 0.9).unwrap();
        let da = structured.dense_jacobian(&x, 0.9).unwrap();
        let db = explicit.dense_jacobian(&x, 0.9).unwrap();
        for i in 0..n {
            assert!((a[i] - b[i]).abs() < 1e-15);
            assert!((ja[i] - jb[i]).abs() < 1e-15);
            for j in 0..n {
                assert!((da[(i, j)] - db[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jacobian_with_zero_alpha_is_negative_identity() {
        let t = lcg_tensor(3, 3, 9);
        let x = [0.2, 0.3, 0.5];
        let w = [1.0, -2.0, 3.0];
        assert_eq!(t.jacobian_apply(&x, &w, 0.0).unwrap(), vec![-1.0, 2.0, -3.0]);
        assert_eq!(t.jacobian_apply(&x, &[0.0; 3], 0.85).unwrap(), vec![0.0; 3]);
        let j = t.dense_jacobian(&x, 0.0).unwrap();
        assert_eq!(j, {
            let mut m = DenseMatrix::identity(3);
            for i in 0..3 {
                m[(i, i)] = -1.0;
            }
            m
        });
    }

    #[test]
    fn uniform_tensor_jacobian() {
        // every slot term is R(e_j ⊗ x) = [0.5, 0.5] for stochastic x, so
        // J = 2 * 0.5 * ones - I = [[0, 1], [1, 0]]
        let j = uniform_half().dense_jacobian(&[0.5, 0.5], 1.0).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[(i, k)] - expected[(i, k)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dense_jacobian_columns_match_jacobian_apply() {
        for order in [2, 3, 4] {
            let t = lcg_tensor(order, 3, 21 + order as u64);
            let x = [0.1, 0.6, 0.3];
            let jac = t.dense_jacobian(&x, 0.85).unwrap();
            for j in 0..3 {
                let mut e = vec![0.0; 3];
                e[j] = 1.0;
                let col = t.jacobian_apply(&x, &e, 0.85).unwrap();
                for i in 0..3 {
                    assert!((jac[(i, j)] - col[i]).abs() <= 1e-14, "m={order} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn order_two_is_a_matrix() {
        let t = lcg_tensor(2, 4, 1);
        let x = [0.1, 0.2, 0.3, 0.4];
        let y = t.apply_multilinear(&x).unwrap();
        for i in 0..4 {
            let direct: f64 = (0..4).map(|c| t.entry(i, c) * x[c]).sum();
            assert!((y[i] - direct).abs() < 1e-15);
        }
    }
}
