use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Unregularized fits refuse design matrices worse conditioned than this.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    /// k × N.
    pub w_out: DMatrix<f64>,
    pub alpha: f64,
}

/// `W = Y Φᵀ (Φ Φᵀ + αI)⁻¹` for states `phi` (N × K) and targets `y` (k × K).
///
/// With `alpha > 0` the normal equations are solved by Cholesky. With
/// `alpha == 0` the problem is solved as least squares on `Φᵀ` through an SVD,
/// after checking the conditioning of `Φ`.
pub fn ridge_fit(phi: &DMatrix<f64>, y: &DMatrix<f64>, alpha: f64) -> Result<RidgeSolution> {
    let (n, k_samples) = phi.shape();
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite and nonnegative"));
    }
    if k_samples == 0 || n == 0 {
        return Err(Error::InsufficientData("ridge fit needs at least one sample and feature".into()));
    }
    if y.ncols() != k_samples {
        return Err(Error::Dimension {
            context: "ridge target samples",
            expected: k_samples,
            actual: y.ncols(),
        });
    }
    if phi.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("ridge inputs must be finite"));
    }

    let w_out = if alpha == 0.0 {
        let svd = phi.transpose().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if svd.singular_values.len() < n || smin <= 0.0 || smax / smin > MAX_CONDITION {
            return Err(Error::RankDeficient);
        }
        let x = svd
            .solve(&y.transpose(), 0.0)
            .map_err(|e| Error::invalid(e.to_string()))?;
        x.transpose()
    } else {
        return ridge_from_gram(&(phi * phi.transpose()), &(y * phi.transpose()), alpha);
    };
    if w_out.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient);
    }
    Ok(RidgeSolution { w_out, alpha })
}

/// Ridge solution from accumulated statistics `gram = Φ Φᵀ` (N × N) and
/// `cross = Y Φᵀ` (k × N), for `alpha > 0`.
pub fn ridge_from_gram(gram: &DMatrix<f64>, cross: &DMatrix<f64>, alpha: f64) -> Result<RidgeSolution> {
    let n = gram.nrows();
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be positive and finite"));
    }
    if gram.ncols() != n || cross.ncols() != n {
        return Err(Error::Dimension {
            context: "ridge statistics",
            expected: n,
            actual: cross.ncols(),
        });
    }
    let mut a = gram.clone();
    for i in 0..n {
        a[(i, i)] += alpha;
    }
    let b = cross.transpose();
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a
            .svd(true, true)
            .solve(&b, 0.0)
            .map_err(|e| Error::invalid(e.to_string()))?,
    };
    let w_out = x.transpose();
    if w_out.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient);
    }
    Ok(RidgeSolution { w_out, alpha })
}

pub fn predict(solution: &RidgeSolution, phi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if solution.w_out.ncols() != phi.nrows() {
        return Err(Error::Dimension {
            context: "readout features",
            expected: solution.w_out.ncols(),
            actual: phi.nrows(),
        });
    }
    Ok(&solution.w_out * phi)
}

/// Appends a constant-one feature row.
pub fn add_bias_row(phi: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = phi.shape();
    debug_assert!(k == phi.ncols());
    phi.clone().insert_row(n, 1.0)
}
