use crate::error::Result;
use crate::matrix::Matrix;
use crate::tensor::{product_all, DenseTensor};

use super::model::{check_orthonormal, FactorModel, MaskedData};

/// `½‖core ×ᵢ Aᵢ − x‖²`.
pub fn objective_f(model: &FactorModel, x: &DenseTensor) -> Result<f64> {
    let recon = product_all(&model.core, &model.factors, false)?;
    let diff = recon.sub(x)?;
    Ok(0.5 * diff.fro_norm().powi(2))
}

/// `x ×ᵢ Aᵢᵀ` and its lift `x ×ᵢ AᵢAᵢᵀ`.
pub(crate) fn project_onto_factors(
    x: &DenseTensor,
    factors: &[Matrix],
) -> Result<(DenseTensor, DenseTensor)> {
    let core = product_all(x, factors, true)?;
    let lifted = product_all(&core, factors, false)?;
    Ok((core, lifted))
}

/// `½‖x ×ᵢ AᵢAᵢᵀ − x‖²`, evaluated directly.
pub fn objective_g(factors: &[Matrix], x: &DenseTensor) -> Result<f64> {
    check_orthonormal(factors)?;
    let (_, lifted) = project_onto_factors(x, factors)?;
    Ok(0.5 * lifted.sub(x)?.fro_norm().powi(2))
}

/// `½(‖x‖² − ‖x ×ᵢ Aᵢᵀ‖²)`, which equals [`objective_g`] for orthonormal
/// factors.
pub fn objective_g_energy(factors: &[Matrix], x: &DenseTensor) -> Result<f64> {
    check_orthonormal(factors)?;
    let core = product_all(x, factors, true)?;
    Ok(0.5 * (x.fro_norm().powi(2) - core.fro_norm().powi(2)))
}

/// `h(x) = ½‖P_Ωc(x)‖² − ½‖(P_Ωc(x) + P_Ω(M)) ×ᵢ Aᵢᵀ‖²`: the objective as a
/// function of the unobserved entries only.
pub fn objective_h(x: &DenseTensor, factors: &[Matrix], data: &MaskedData) -> Result<f64> {
    let free = data.mask().project_complement(x)?;
    let completed = free.add(data.observed())?;
    let core = product_all(&completed, factors, true)?;
    Ok(0.5 * free.fro_norm().powi(2) - 0.5 * core.fro_norm().powi(2))
}

/// Gradient of [`objective_h`] at a feasible point:
/// `P_Ωc(x̂) − P_Ωc(x̂ ×ᵢ AᵢAᵢᵀ)`.
pub fn grad_h(x_hat: &DenseTensor, factors: &[Matrix], data: &MaskedData) -> Result<DenseTensor> {
    check_orthonormal(factors)?;
    data.check_feasible(x_hat)?;
    let (_, lifted) = project_onto_factors(x_hat, factors)?;
    data.mask().project_complement(&x_hat.sub(&lifted)?)
}
