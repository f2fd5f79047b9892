use crate::error::Result;
use crate::matrix::Matrix;
use crate::tensor::DenseTensor;

use super::ihooi::mode_gram_input;
use super::model::MaskedData;
use super::objective::project_onto_factors;

/// First-order optimality residuals at `(A, X)`.
#[derive(Clone, Debug)]
pub struct KktResidual {
    /// Multipliers `Λₙ = AₙᵀGₙGₙᵀAₙ`.
    pub lambda: Vec<Matrix>,
    /// Multiplier for the data constraint, supported on `Ω`.
    pub y: DenseTensor,
    /// `‖GₙGₙᵀAₙ − AₙΛₙ‖_F` per mode.
    pub res_a: Vec<f64>,
    /// `‖X − X ×ᵢ AᵢAᵢᵀ + P_Ω(Y)‖_F`.
    pub res_x: f64,
    /// `‖AₙᵀAₙ − I‖_F` per mode.
    pub res_orth: Vec<f64>,
    /// `‖P_Ω(X − M)‖_F`.
    pub res_feas: f64,
}

impl KktResidual {
    /// Largest residual of any kind.
    pub fn max(&self) -> f64 {
        self.res_a
            .iter()
            .chain(&self.res_orth)
            .copied()
            .fold(self.res_x.max(self.res_feas), f64::max)
    }
}

pub fn kkt_residual(factors: &[Matrix], x: &DenseTensor, data: &MaskedData) -> Result<KktResidual> {
    let mut lambda = Vec::with_capacity(factors.len());
    let mut res_a = Vec::with_capacity(factors.len());
    for (n, a) in factors.iter().enumerate() {
        let g = mode_gram_input(x, factors, n)?;
        let gta = g.t_matmul(a)?;
        let ggta = g.matmul(&gta)?;
        let raw = gta.t_matmul(&gta)?;
        let sym = raw.add(&raw.transpose())?.scaled(0.5);
        res_a.push(ggta.sub(&a.matmul(&sym)?)?.fro_norm());
        lambda.push(sym);
    }
    let (_, lifted) = project_onto_factors(x, factors)?;
    let mask = data.mask();
    let y = mask.project(&lifted.sub(data.observed())?)?;
    let res_x = x.sub(&lifted)?.add(&y)?.fro_norm();
    let res_orth = factors.iter().map(Matrix::orthonormality_error).collect();
    let res_feas = mask.residual_norm(x, data.observed())?;
    Ok(KktResidual {
        lambda,
        y,
        res_a,
        res_x,
        res_orth,
        res_feas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::sample_uniform;
    use crate::rng;
    use crate::solvers::truncated_hosvd;
    use crate::tensor::Shape;

    fn exact(seed: u64) -> DenseTensor {
        let shape = Shape::new(vec![6, 5, 4]).unwrap();
        let mut r = rng::seeded(seed);
        let t = DenseTensor::new(shape, rng::gaussian_vec(&mut r, 120)).unwrap();
        truncated_hosvd(&t, &[2, 2, 2]).unwrap().reconstruct()
    }

    #[test]
    fn vanishes_at_exact_decomposition() {
        let m = exact(1);
        let model = truncated_hosvd(&m, &[2, 2, 2]).unwrap();
        let data = MaskedData::new(sample_uniform(m.shape(), 0.5, 2).unwrap(), &m).unwrap();
        let k = kkt_residual(&model.factors, &m, &data).unwrap();
        assert!(k.max() <= 1e-9, "{k:?}");
        for l in &k.lambda {
            assert!(l.max_abs_diff(&l.transpose()) <= 1e-12);
        }
    }

    #[test]
    fn flags_non_orthonormal_factors() {
        let m = exact(3);
        let mut factors = truncated_hosvd(&m, &[2, 2, 2]).unwrap().factors;
        let mut r = rng::seeded(4);
        factors[0] = rng::gaussian_matrix(&mut r, 6, 2);
        let data = MaskedData::complete(&m).unwrap();
        let k = kkt_residual(&factors, &m, &data).unwrap();
        assert!(k.res_orth[0] > 1e-3);
        assert_eq!(k.res_orth[1], k.res_orth[1].min(1e-12));
    }
}
