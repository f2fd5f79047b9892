use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{gap_ratio, leading_subspace};
use crate::matrix::Matrix;
use crate::tensor::{product_except, unfold, DenseTensor};

use super::model::{
    check_orthonormal, initial_factors, FactorModel, MaskedData, RankStrategy, SolverConfig,
};
use super::objective::project_onto_factors;
use super::rank::{maybe_increase_rank, rank_rng, RankDecision};
use super::trace::{IterationRecord, IterationTrace, SolveOutput, StopReason};

/// `Gₙ = unfold_n(x ×_{i≠n} Aᵢᵀ)`, the matrix whose leading left singular
/// vectors give the next `Aₙ`.
pub fn mode_gram_input(x: &DenseTensor, factors: &[Matrix], n: usize) -> Result<Matrix> {
    let reduced = product_except(x, factors, Some(n), true)?;
    unfold(&reduced, n)
}

/// Current iterate `(A, X)` together with `g(A, X)`.
#[derive(Clone, Debug)]
pub struct IhooiState {
    pub factors: Vec<Matrix>,
    pub x: DenseTensor,
    pub obj: f64,
}

impl IhooiState {
    pub fn new(factors: Vec<Matrix>, x: DenseTensor) -> Result<Self> {
        check_orthonormal(&factors)?;
        let (_, lifted) = project_onto_factors(&x, &factors)?;
        let obj = 0.5 * lifted.sub(&x)?.fro_norm().powi(2);
        Ok(Self { factors, x, obj })
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::cols).collect()
    }
}

/// Residual on `Ω` of the projection `x ×ᵢ AᵢAᵢᵀ`.
pub(crate) fn ihooi_fit(state: &IhooiState, data: &MaskedData) -> Result<f64> {
    let (_, lifted) = project_onto_factors(&state.x, &state.factors)?;
    data.mask().residual_norm(&lifted, data.observed())
}

/// One sweep: every factor in turn, then the unobserved entries.
///
/// The ranks are those of the incoming factors. The returned record has
/// `iteration` and `elapsed` left at zero for the caller to fill in.
pub fn ihooi_iterate(
    state: &IhooiState,
    data: &MaskedData,
) -> Result<(IhooiState, IterationRecord)> {
    let mut factors = state.factors.clone();
    let mut gap_ratios = Vec::with_capacity(factors.len());
    for n in 0..factors.len() {
        let g = mode_gram_input(&state.x, &factors, n)?;
        let r = factors[n].cols();
        let (basis, spectrum) = leading_subspace(&g, r)?;
        gap_ratios.push(gap_ratio(&spectrum, r));
        factors[n] = basis;
    }

    let (_, lifted) = project_onto_factors(&state.x, &factors)?;
    let mut x = lifted;
    data.mask().overwrite_observed(&mut x, data.observed())?;
    let x_change = x.sub(&state.x)?.fro_norm();

    let (_, lifted) = project_onto_factors(&x, &factors)?;
    let obj = 0.5 * lifted.sub(&x)?.fro_norm().powi(2);
    let fit = data.mask().residual_norm(&lifted, data.observed())?;
    let unobserved_norm = data.mask().complement_norm(&x)?;
    let record = IterationRecord {
        iteration: 0,
        fit,
        obj,
        rel_obj_change: (obj - state.obj).abs() / (1.0 + state.obj),
        gap_ratios,
        x_change,
        unobserved_norm,
        ranks: factors.iter().map(Matrix::cols).collect(),
        elapsed: 0.0,
    };
    if !(fit.is_finite() && obj.is_finite() && x_change.is_finite()) {
        return Err(Error::Numerical("iHOOI iterate became non-finite".into()));
    }
    Ok((IhooiState { factors, x, obj }, record))
}

/// Runs iHOOI from orthonormalized Gaussian factors and the zero-filled data.
pub fn ihooi_solve(data: &MaskedData, config: &SolverConfig) -> Result<SolveOutput> {
    config.validate(data.shape())?;
    let factors = initial_factors(data.shape(), config.rank_strategy.initial_ranks(), config.seed)?;
    ihooi_solve_with_init(data, config, factors)
}

/// Runs iHOOI from the given starting factors.
pub fn ihooi_solve_with_init(
    data: &MaskedData,
    config: &SolverConfig,
    factors: Vec<Matrix>,
) -> Result<SolveOutput> {
    let start = Instant::now();
    let mut trace = prepare(data, config, &factors)?;
    let mut state = IhooiState::new(factors, data.observed().clone())?;
    trace.initial_obj = state.obj;
    trace.initial_fit = ihooi_fit(&state, data)?;
    let mut rng = rank_rng(config.seed);
    let scale = fit_scale(data);

    trace.stop = Some(loop {
        if let Some(stop) = budget_exhausted(&trace, config, &start) {
            break stop;
        }
        let (next, mut record) = ihooi_iterate(&state, data)?;
        record.iteration = trace.len() + 1;
        record.elapsed = start.elapsed().as_secs_f64();
        let (fit, change) = (record.fit, record.rel_obj_change);
        state = next;
        trace.records.push(record);
        if fit / scale <= config.tol {
            break StopReason::FitTolerance;
        }
        let decision = match &config.rank_strategy {
            RankStrategy::Fixed(_) => RankDecision::Unchanged,
            strategy => maybe_increase_rank(&trace, strategy, &mut state.factors, None, &mut rng)?,
        };
        if let RankDecision::Increased { .. } = decision {
            // the enlarged subspace captures more of x, so g can only drop
            state = IhooiState::new(state.factors, state.x)?;
        } else if change <= config.tol {
            break StopReason::ObjectiveStall;
        }
    });

    let (core, _) = project_onto_factors(&state.x, &state.factors)?;
    let model = FactorModel::new(core, state.factors)?;
    Ok(SolveOutput {
        model,
        x: state.x,
        trace,
    })
}

/// Shared validation for the incomplete-data solvers; returns a trace with
/// any warnings already recorded.
pub(crate) fn prepare(
    data: &MaskedData,
    config: &SolverConfig,
    factors: &[Matrix],
) -> Result<IterationTrace> {
    config.validate(data.shape())?;
    if data.mask().is_empty() {
        return Err(Error::EmptyMask);
    }
    let expected = config.rank_strategy.initial_ranks();
    let dims = data.shape().dims();
    if factors.len() != dims.len()
        || factors
            .iter()
            .zip(dims.iter().zip(expected))
            .any(|(a, (&m, &r))| a.rows() != m || a.cols() != r)
    {
        return Err(Error::DimensionMismatch(
            "starting factors do not match the data shape and initial ranks".into(),
        ));
    }
    check_orthonormal(factors)?;
    let mut trace = IterationTrace::default();
    let full_rank = |r: &[usize]| r.iter().zip(dims).all(|(r, m)| r == m);
    let reaches_full = match &config.rank_strategy {
        RankStrategy::Fixed(r) => full_rank(r),
        RankStrategy::Increasing { max, .. } => full_rank(max),
    };
    if reaches_full && !data.mask().is_full() {
        trace.warnings.push(
            "ranks equal the tensor dimensions while entries are missing: \
             the model can fit any completion and will overfit"
                .into(),
        );
    }
    Ok(trace)
}

pub(crate) fn fit_scale(data: &MaskedData) -> f64 {
    let norm = data.observed_norm();
    if norm > 0.0 {
        norm
    } else {
        1.0
    }
}

pub(crate) fn budget_exhausted(
    trace: &IterationTrace,
    config: &SolverConfig,
    start: &Instant,
) -> Option<StopReason> {
    if trace.len() >= config.max_iters {
        Some(StopReason::MaxIterations)
    } else if start.elapsed().as_secs_f64() >= config.max_seconds {
        Some(StopReason::MaxSeconds)
    } else {
        None
    }
}
