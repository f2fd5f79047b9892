//! Recovery quality measures.

use crate::error::{Error, Result};
use crate::solvers::{FactorModel, ORTHONORMAL_TOL};
use crate::tensor::DenseTensor;

/// Success threshold on both the relative error and the factor distance.
pub const SUCCESS_THRESHOLD: f64 = 1e-2;

/// `‖rec − truth‖_F / ‖truth‖_F`.
pub fn relative_error(rec: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    let norm = truth.fro_norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("relative error against a zero tensor".into()));
    }
    Ok(rec.sub(truth)?.fro_norm() / norm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub relerr: f64,
    pub factor_err: f64,
    /// `(√rₙ − ‖AₙᵀÂₙ‖_F)/√rₙ` for each mode.
    pub per_mode_subspace_err: Vec<f64>,
    pub success: bool,
}

/// `(√rₙ − ‖AₙᵀÂₙ‖_F)/√rₙ` for each mode; zero when the column spaces agree
/// and one when they are orthogonal.
pub fn subspace_errors(truth: &FactorModel, est: &FactorModel) -> Result<Vec<f64>> {
    if truth.ranks() != est.ranks() || truth.shape() != est.shape() {
        return Err(Error::DimensionMismatch(format!(
            "ranks {:?} on {} vs {:?} on {}",
            truth.ranks(),
            truth.shape(),
            est.ranks(),
            est.shape()
        )));
    }
    for (name, m) in [("truth", truth), ("estimate", est)] {
        let dev = m.orthonormality_error();
        if !(dev <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidArgument(format!(
                "{name} factors are not orthonormal (deviation {dev:.3e})"
            )));
        }
    }
    truth
        .factors
        .iter()
        .zip(&est.factors)
        .map(|(a, b)| {
            let root = (a.cols() as f64).sqrt();
            Ok((root - a.t_matmul(b)?.fro_norm()) / root)
        })
        .collect()
}

/// Reconstruction distance relative to the truth plus the per-mode subspace
/// errors.
pub fn factor_recovery_error(truth: &FactorModel, est: &FactorModel) -> Result<f64> {
    Ok(recovery_report(truth, est)?.factor_err)
}

pub fn recovery_report(truth: &FactorModel, est: &FactorModel) -> Result<RecoveryReport> {
    let per_mode = subspace_errors(truth, est)?;
    let relerr = relative_error(&est.reconstruct(), &truth.reconstruct())?;
    let factor_err = relerr + per_mode.iter().sum::<f64>();
    Ok(RecoveryReport {
        relerr,
        factor_err,
        per_mode_subspace_err: per_mode,
        success: success(factor_err, SUCCESS_THRESHOLD),
    })
}

/// `err ≤ threshold`, inclusive.
pub fn success(err: f64, threshold: f64) -> bool {
    err <= threshold
}
