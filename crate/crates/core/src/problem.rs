use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::tensor::{FlattenedTensor, STOCHASTIC_TOL};

/// `x = α R(x⊗…⊗x) + (1-α) v` over a shared, immutable tensor.
#[derive(Debug, Clone)]
pub struct PageRankProblem {
    tensor: Arc<FlattenedTensor>,
    alpha: f64,
    teleport: Vec<f64>,
}

impl PageRankProblem {
    pub fn new(tensor: Arc<FlattenedTensor>, alpha: f64, teleport: Vec<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "damping factor must lie in [0, 1), got {alpha}"
            )));
        }
        check_len("teleportation vector", tensor.dim(), teleport.len())?;
        if teleport.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "teleportation vector has negative entries".into(),
            ));
        }
        let sum: f64 = teleport.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidParameter(format!(
                "teleportation vector sums to {sum}, expected 1"
            )));
        }
        Ok(Self {
            tensor,
            alpha,
            teleport,
        })
    }

    /// Problem with the uniform teleportation vector `e / n`.
    pub fn uniform(tensor: Arc<FlattenedTensor>, alpha: f64) -> Result<Self> {
        let n = tensor.dim();
        Self::new(tensor, alpha, vec![1.0 / n as f64; n])
    }

    pub fn tensor(&self) -> &FlattenedTensor {
        &self.tensor
    }

    pub fn shared_tensor(&self) -> Arc<FlattenedTensor> {
        Arc::clone(&self.tensor)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn teleport(&self) -> &[f64] {
        &self.teleport
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    /// Same tensor and teleportation, different damping factor.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.shared_tensor(), alpha, self.teleport.clone())
    }

    /// `g(x) = αR(x⊗…⊗x) + (1-α)v`.
    pub fn fixed_point_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.tensor.apply_multilinear(x)?;
        let a = self.alpha;
        for (yi, vi) in y.iter_mut().zip(&self.teleport) {
            *yi = a * *yi + (1.0 - a) * vi;
        }
        Ok(y)
    }

    /// `f(x) = g(x) - x`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.fixed_point_map(x)?;
        for (fi, xi) in f.iter_mut().zip(x) {
            *fi -= xi;
        }
        Ok(f)
    }

    pub fn jacobian_apply(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.tensor.jacobian_apply(x, w, self.alpha)
    }

    pub fn check_regularity(&self) -> Regularity {
        Regularity::of(self.order(), self.alpha)
    }
}

/// Whether the damping factor lies in the regime `α < 1/(m-1)` where the
/// negated Jacobian is a nonsingular M-matrix on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    /// `1/(m-1) - α`; negative outside the regular regime.
    pub margin: f64,
}

impl Regularity {
    pub fn of(order: usize, alpha: f64) -> Self {
        let threshold = 1.0 / (order as f64 - 1.0);
        Self {
            regular: alpha < threshold,
            margin: threshold - alpha,
        }
    }
}

/// `z⁺ / ‖z⁺‖₁`, the projection onto the probability simplex used after
/// every outer update.
pub fn project(z: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    let mass: f64 = out.iter().sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::DegenerateProjection);
    }
    out.iter_mut().for_each(|v| *v /= mass);
    Ok(out)
}
