use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::FlattenedTensor;

/// Description of the generator, suitable for a file header.
pub const SYNTHETIC_GENERATOR: &str = "ChaCha8Rng::seed_from_u64(seed); R filled column-major \
with uniform [0,1) draws; columns normalized to sum 1, zero columns replaced by v = e/n";

/// Random third-order problem data `(R, v)` with `R` of size `n x n²` and
/// `v = e/n`. Identical seeds give bitwise-identical tensors.
pub fn gen_synthetic(n: usize, seed: u64) -> Result<(FlattenedTensor, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("synthetic dimension must be >= 1".into()));
    }
    let cols = n
        .checked_mul(n)
        .and_then(|c| c.checked_mul(n))
        .ok_or_else(|| Error::InvalidParameter(format!("n = {n} is too large")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data: Vec<f64> = (0..cols).map(|_| rng.random::<f64>()).collect();
    let v = vec![1.0 / n as f64; n];
    normalize_columns(&mut data, n, &v);
    Ok((FlattenedTensor::dense(3, n, data)?, v))
}

/// Scales each length-`n` column of the column-major `data` to sum to one;
/// a column summing to zero is replaced by `v`.
pub fn normalize_columns(data: &mut [f64], n: usize, v: &[f64]) {
    for col in data.chunks_mut(n) {
        let s: f64 = col.iter().sum();
        if s > 0.0 {
            col.iter_mut().for_each(|x| *x /= s);
        } else {
            col.copy_from_slice(v);
        }
    }
}
