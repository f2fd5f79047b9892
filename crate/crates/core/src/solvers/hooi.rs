use crate::error::Result;
use crate::linalg::leading_subspace;
use crate::matrix::Matrix;
use crate::tensor::{product_all, unfold, DenseTensor};

use super::ihooi::ihooi_solve_with_init;
use super::model::{FactorModel, MaskedData, MultilinearRank, RankStrategy, SolverConfig};
use super::trace::IterationTrace;

/// Leading left singular vectors of every unfolding, with the matching core.
pub fn truncated_hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<FactorModel> {
    MultilinearRank::new(ranks.to_vec(), t.shape())?;
    let factors = ranks
        .iter()
        .enumerate()
        .map(|(n, &r)| Ok(leading_subspace(&unfold(t, n)?, r)?.0))
        .collect::<Result<Vec<Matrix>>>()?;
    let core = product_all(t, &factors, true)?;
    FactorModel::new(core, factors)
}

/// Higher-order orthogonal iteration on complete data, started from the
/// truncated HOSVD. Any rank strategy in `config` is replaced by `ranks`.
pub fn hooi_solve(
    t: &DenseTensor,
    ranks: &[usize],
    config: &SolverConfig,
) -> Result<(FactorModel, IterationTrace)> {
    let start = truncated_hosvd(t, ranks)?;
    let data = MaskedData::complete(t)?;
    let config = SolverConfig {
        rank_strategy: RankStrategy::Fixed(ranks.to_vec()),
        ..config.clone()
    };
    let out = ihooi_solve_with_init(&data, &config, start.factors)?;
    Ok((out.model, out.trace))
}
