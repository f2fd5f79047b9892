use crate::error::Result;
use crate::matrix::Matrix;
use crate::observation::LinearMeasurement;
use crate::tensor::DenseTensor;

use super::objective::project_onto_factors;

/// Imputation step for general linear measurements: the tensor closest to
/// `x̂ ×ᵢ AᵢAᵢᵀ` that reproduces `measured` exactly.
pub fn generalized_x_update<L: LinearMeasurement + ?Sized>(
    x_hat: &DenseTensor,
    factors: &[Matrix],
    op: &L,
    measured: &[f64],
) -> Result<DenseTensor> {
    let (_, lifted) = project_onto_factors(x_hat, factors)?;
    op.correct(&lifted, measured)
}
