//! Minimal polynomial (MPE) and reduced rank (RRE) extrapolation of a vector
//! sequence, both computed from a QR factorization of the first differences.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2};

/// Diagonal entries of the difference factor below this multiple of
/// `‖ΔS‖_F` are treated as zero.
pub const RANK_TOL: f64 = 1e-13;

/// `|Σc| < SINGULAR_TOL * max|c|` marks a singular MPE normalization.
pub const SINGULAR_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtrapolationMethod {
    Mpe,
    Rre,
}

impl fmt::Display for ExtrapolationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mpe => "mpe",
            Self::Rre => "rre",
        })
    }
}

impl FromStr for ExtrapolationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpe" => Ok(Self::Mpe),
            "rre" => Ok(Self::Rre),
            other => Err(Error::InvalidParameter(format!("unknown extrapolation method {other:?}"))),
        }
    }
}

/// The iterates `s⁽⁰⁾, …, s⁽q+1⁾`.
#[derive(Debug, Clone)]
pub struct SequenceWindow {
    iterates: Vec<Vec<f64>>,
}

impl SequenceWindow {
    pub fn new(iterates: Vec<Vec<f64>>) -> Result<Self> {
        if iterates.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "an extrapolation window needs at least 3 iterates, got {}",
                iterates.len()
            )));
        }
        let n = iterates[0].len();
        if let Some(bad) = iterates.iter().find(|s| s.len() != n) {
            return Err(Error::Shape {
                context: "extrapolation window",
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self { iterates })
    }

    /// `q`, where the window holds `q + 2` iterates.
    pub fn q(&self) -> usize {
        self.iterates.len() - 2
    }

    pub fn iterates(&self) -> &[Vec<f64>] {
        &self.iterates
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().unwrap()
    }
}

/// Result of one extrapolation.
#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub vector: Vec<f64>,
    /// Normalized combination weights `γ_0, …, γ_q'` (they sum to one).
    pub gamma: Vec<f64>,
    /// `q'`, the window length actually used after rank truncation.
    pub effective_q: usize,
}

/// Modified Gram-Schmidt QR of the difference columns, stopped at the first
/// numerically dependent column. `r_cols[j]` holds `R[0..=min(j, rank-1), j]`;
/// when the factor is truncated the last entry of `r_cols` belongs to the
/// dependent column and only has `rank` entries.
struct DifferenceQr {
    q: Vec<Vec<f64>>,
    r_cols: Vec<Vec<f64>>,
    rank: usize,
}

impl DifferenceQr {
    fn factor(diffs: &[Vec<f64>]) -> Self {
        let frob = diffs.iter().map(|d| dot(d, d)).sum::<f64>().sqrt();
        let floor = RANK_TOL * frob;
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r_cols = Vec::new();
        for d in diffs {
            let mut w = d.clone();
            let mut col = Vec::with_capacity(q.len() + 1);
            for qi in &q {
                let r = dot(&w, qi);
                axpy(&mut w, -r, qi);
                col.push(r);
            }
            let diag = norm2(&w);
            if !(diag > floor) {
                r_cols.push(col);
                break;
            }
            w.iter_mut().for_each(|v| *v /= diag);
            col.push(diag);
            q.push(w);
            r_cols.push(col);
        }
        let rank = q.len();
        Self { q, r_cols, rank }
    }
}

/// Solves the upper-triangular `R_k y = b` where column `j` of `R_k` is
/// `r_cols[j]`.
fn back_substitute(r_cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut y = b.to_vec();
    for i in (0..k).rev() {
        y[i] /= r_cols[i][i];
        for row in 0..i {
            y[row] -= r_cols[i][row] * y[i];
        }
    }
    y
}

/// Solves `R_kᵀ y = b`.
fn forward_substitute_transposed(r_cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut y = b.to_vec();
    for i in 0..k {
        // row i of Rᵀ is column i of R
        let col = &r_cols[i];
        let mut s = y[i];
        for j in 0..i {
            s -= col[j] * y[j];
        }
        y[i] = s / col[i];
    }
    y
}

/// MPE weights for window length `q` from a factor whose first `q` columns
/// are independent: `R_{q-1} c = -r_q`, `c_q = 1`, `γ = c / Σc`.
fn mpe_gamma(qr: &DifferenceQr, q: usize) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = qr.r_cols[q][..q].iter().map(|v| -v).collect();
    let mut c = back_substitute(&qr.r_cols[..q], &rhs);
    c.push(1.0);
    let coefficient_sum: f64 = c.iter().sum();
    let cmax = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(coefficient_sum.abs() >= SINGULAR_TOL * cmax) || !coefficient_sum.is_finite() {
        return Err(Error::ExtrapolationSingular(coefficient_sum));
    }
    Ok(c.into_iter().map(|ci| ci / coefficient_sum).collect())
}

/// RRE weights from a full-rank factor `R_q`: `R_qᵀ R_q d = e`,
/// `γ = d / Σd`.
fn rre_gamma(qr: &DifferenceQr, q: usize) -> Result<Vec<f64>> {
    let ones = vec![1.0; q + 1];
    let y = forward_substitute_transposed(&qr.r_cols[..=q], &ones);
    let d = back_substitute(&qr.r_cols[..=q], &y);
    let total: f64 = d.iter().sum();
    if !(total.abs() > 0.0) || !total.is_finite() {
        return Err(Error::ExtrapolationSingular(total));
    }
    Ok(d.into_iter().map(|di| di / total).collect())
}

/// Extrapolates the window with the requested method.
///
/// When the differences are numerically rank deficient the window is
/// truncated to the numerical rank `q'`. A truncated factor has an exact
/// null combination, which is where MPE and RRE coincide, so both methods
/// use the MPE weights in that case. A window with vanishing differences
/// returns `s⁽⁰⁾`.
pub fn extrapolate(window: &SequenceWindow, method: ExtrapolationMethod) -> Result<Extrapolated> {
    let s = window.iterates();
    let q = window.q();
    let diffs: Vec<Vec<f64>> = s
        .windows(2)
        .map(|pair| pair[1].iter().zip(&pair[0]).map(|(b, a)| b - a).collect())
        .collect();
    let qr = DifferenceQr::factor(&diffs);

    if qr.rank == 0 {
        return Ok(Extrapolated {
            vector: s[0].clone(),
            gamma: vec![1.0],
            effective_q: 0,
        });
    }

    let (effective_q, gamma) = if qr.rank == q + 1 {
        let gamma = match method {
            ExtrapolationMethod::Mpe => mpe_gamma(&qr, q)?,
            ExtrapolationMethod::Rre => rre_gamma(&qr, q)?,
        };
        (q, gamma)
    } else {
        (qr.rank, mpe_gamma(&qr, qr.rank)?)
    };

    // ξ_0 = 1 - γ_0, ξ_j = ξ_{j-1} - γ_j
    let mut xi = Vec::with_capacity(effective_q);
    let mut acc = 1.0;
    for g in &gamma[..effective_q] {
        acc -= g;
        xi.push(acc);
    }
    // t = s0 + Q_{q'-1} (R_{q'-1} ξ)
    let mut vector = s[0].clone();
    for i in 0..effective_q {
        let zi: f64 = (i..effective_q).map(|j| qr.r_cols[j][i] * xi[j]).sum();
        axpy(&mut vector, zi, &qr.q[i]);
    }
    Ok(Extrapolated {
        vector,
        gamma,
        effective_q,
    })
}

pub fn mpe(window: &SequenceWindow) -> Result<Vec<f64>> {
    extrapolate(window, ExtrapolationMethod::Mpe).map(|e| e.vector)
}

pub fn rre(window: &SequenceWindow) -> Result<Vec<f64>> {
    extrapolate(window, ExtrapolationMethod::Rre).map(|e| e.vector)
}
