use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::rng::{self, Rng};
use crate::tensor::{fold, unfold, DenseTensor};

use super::model::RankStrategy;
use super::trace::IterationTrace;

/// Stream tag separating rank-augmentation draws from initialization.
const RANK_STREAM: u64 = 0x7261_6e6b;

pub(crate) fn rank_rng(seed: u64) -> Rng {
    rng::seeded(rng::derive_seed(seed, &[RANK_STREAM]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankDecision {
    Unchanged,
    Increased { mode: usize, rank: usize },
}

/// `|1 − fit/prev_fit| ≤ threshold`. A zero previous fit never counts as a
/// stall: the data are already matched.
pub fn stall_detected(prev_fit: f64, fit: f64, threshold: f64) -> bool {
    prev_fit > 0.0 && (1.0 - fit / prev_fit).abs() <= threshold
}

/// Grows one mode's rank when the fit has stalled.
///
/// The mode with the most room left (`max − r`, smallest index on ties) gains
/// up to `delta` random orthonormalized columns; `core`, when given, is
/// zero-padded so the reconstruction is unchanged.
pub fn maybe_increase_rank(
    trace: &IterationTrace,
    strategy: &RankStrategy,
    factors: &mut [Matrix],
    core: Option<&mut DenseTensor>,
    rng: &mut Rng,
) -> Result<RankDecision> {
    let RankStrategy::Increasing {
        max,
        delta,
        fit_stall_threshold,
        ..
    } = strategy
    else {
        return Ok(RankDecision::Unchanged);
    };
    let Some((prev_fit, fit)) = trace.last_two_fits() else {
        return Ok(RankDecision::Unchanged);
    };
    if !stall_detected(prev_fit, fit, *fit_stall_threshold) {
        return Ok(RankDecision::Unchanged);
    }
    if max.len() != factors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} max ranks for {} factors",
            max.len(),
            factors.len()
        )));
    }
    let mut best: Option<(usize, usize)> = None;
    for (n, (a, &cap)) in factors.iter().zip(max).enumerate() {
        let room = cap.saturating_sub(a.cols());
        if room > 0 && best.is_none_or(|(_, r)| room > r) {
            best = Some((n, room));
        }
    }
    let Some((mode, room)) = best else {
        return Ok(RankDecision::Unchanged);
    };
    let added = room.min(*delta);
    factors[mode] = augment_factor(&factors[mode], added, rng)?;
    let rank = factors[mode].cols();
    if let Some(core) = core {
        *core = pad_core(core, mode, rank)?;
    }
    Ok(RankDecision::Increased { mode, rank })
}

/// Appends `extra` random columns, each orthonormalized against the rest.
pub fn augment_factor(a: &Matrix, extra: usize, rng: &mut Rng) -> Result<Matrix> {
    let rows = a.rows();
    if a.cols() + extra > rows {
        return Err(Error::RankOutOfRange {
            rank: a.cols() + extra,
            max: rows,
        });
    }
    let mut out = a.clone();
    for _ in 0..extra {
        let col = loop {
            let mut v = rng::gaussian_vec(rng, rows);
            let before = dot(&v, &v).sqrt();
            // two Gram–Schmidt passes keep the column orthogonal to working precision
            for _ in 0..2 {
                for j in 0..out.cols() {
                    let q = out.col(j);
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-8 * before {
                v.iter_mut().for_each(|x| *x /= norm);
                break v;
            }
        };
        out.push_col(&col);
    }
    Ok(out)
}

/// Extends mode `n` of `core` to length `len` with zero slices.
pub fn pad_core(core: &DenseTensor, n: usize, len: usize) -> Result<DenseTensor> {
    let unfolded = unfold(core, n)?;
    let current = unfolded.rows();
    if len < current {
        return Err(Error::InvalidArgument(format!(
            "cannot pad mode {n} from {current} down to {len}"
        )));
    }
    let padded = Matrix::from_fn(len, unfolded.cols(), |i, j| {
        if i < current {
            unfolded.get(i, j)
        } else {
            0.0
        }
    });
    fold(&padded, n, &core.shape().with_dim(n, len))
}
