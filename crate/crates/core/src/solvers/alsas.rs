use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{economy_qr, lsq_via_pinv};
use crate::matrix::Matrix;
use crate::tensor::{mode_product, product_all, product_except, unfold, DenseTensor};

use super::ihooi::{budget_exhausted, fit_scale, prepare};
use super::model::{initial_factors, FactorModel, MaskedData, RankStrategy, SolverConfig};
use super::rank::{maybe_increase_rank, rank_rng, RankDecision};
use super::trace::{IterationRecord, SolveOutput, StopReason};

/// Current iterate `(C, A, X)` together with `f(C, A, X)`.
#[derive(Clone, Debug)]
pub struct AlsasState {
    pub model: FactorModel,
    pub x: DenseTensor,
    pub obj: f64,
}

impl AlsasState {
    pub fn new(model: FactorModel, x: DenseTensor) -> Result<Self> {
        let obj = 0.5 * model.reconstruct().sub(&x)?.fro_norm().powi(2);
        Ok(Self { model, x, obj })
    }
}

/// Core minimizing `‖C ×ᵢ Aᵢ − x‖` for orthonormal factors: `x ×ᵢ Aᵢᵀ`.
pub fn alsas_core_update(x: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    product_all(x, factors, true)
}

/// Least-squares update of factor `n` with the core and the other factors
/// held fixed: `X₍ₙ₎Bₙᵀ(BₙBₙᵀ)†` where `Bₙ = unfold_n(C ×_{i≠n} Aᵢ)`.
pub fn alsas_factor_update(
    x: &DenseTensor,
    core: &DenseTensor,
    factors: &[Matrix],
    n: usize,
) -> Result<Matrix> {
    let b = unfold(&product_except(core, factors, Some(n), false)?, n)?;
    lsq_via_pinv(&unfold(x, n)?, &b)
}

/// Replaces each `Aₙ` by the `Q` of its QR factorization and absorbs the
/// `R` factors into the core; the reconstruction is unchanged.
pub fn normalize_factors(
    core: &DenseTensor,
    factors: &[Matrix],
) -> Result<(DenseTensor, Vec<Matrix>)> {
    let mut core = core.clone();
    let mut qs = Vec::with_capacity(factors.len());
    for (n, a) in factors.iter().enumerate() {
        let qr = economy_qr(a)?;
        core = mode_product(&core, &qr.r, n)?;
        qs.push(qr.q);
    }
    Ok((core, qs))
}

/// One sweep: core, each factor by least squares, renormalization, then the
/// unobserved entries.
pub fn alsas_iterate(
    state: &AlsasState,
    data: &MaskedData,
) -> Result<(AlsasState, IterationRecord)> {
    let core = alsas_core_update(&state.x, &state.model.factors)?;
    let mut factors = state.model.factors.clone();
    for n in 0..factors.len() {
        factors[n] = alsas_factor_update(&state.x, &core, &factors, n)?;
    }
    let (core, factors) = normalize_factors(&core, &factors)?;
    let model = FactorModel::new(core, factors)?;

    let recon = model.reconstruct();
    let mut x = recon.clone();
    data.mask().overwrite_observed(&mut x, data.observed())?;
    let x_change = x.sub(&state.x)?.fro_norm();
    let fit = data.mask().residual_norm(&recon, data.observed())?;
    let obj = 0.5 * recon.sub(&x)?.fro_norm().powi(2);
    if !(fit.is_finite() && obj.is_finite() && x_change.is_finite()) {
        return Err(Error::Numerical("ALSaS iterate became non-finite".into()));
    }
    let record = IterationRecord {
        iteration: 0,
        fit,
        obj,
        rel_obj_change: (obj - state.obj).abs() / (1.0 + state.obj),
        gap_ratios: Vec::new(),
        x_change,
        unobserved_norm: data.mask().complement_norm(&x)?,
        ranks: model.ranks(),
        elapsed: 0.0,
    };
    Ok((AlsasState { model, x, obj }, record))
}

/// Runs ALSaS from orthonormalized Gaussian factors and the zero-filled data.
pub fn alsas_solve(data: &MaskedData, config: &SolverConfig) -> Result<SolveOutput> {
    config.validate(data.shape())?;
    let factors = initial_factors(data.shape(), config.rank_strategy.initial_ranks(), config.seed)?;
    alsas_solve_with_init(data, config, factors)
}

/// Runs ALSaS from the given starting factors.
pub fn alsas_solve_with_init(
    data: &MaskedData,
    config: &SolverConfig,
    factors: Vec<Matrix>,
) -> Result<SolveOutput> {
    let start = Instant::now();
    let mut trace = prepare(data, config, &factors)?;
    let x = data.observed().clone();
    let core = alsas_core_update(&x, &factors)?;
    let mut state = AlsasState::new(FactorModel::new(core, factors)?, x)?;
    trace.initial_obj = state.obj;
    trace.initial_fit = data
        .mask()
        .residual_norm(&state.model.reconstruct(), data.observed())?;
    let mut rng = rank_rng(config.seed);
    let scale = fit_scale(data);

    trace.stop = Some(loop {
        if let Some(stop) = budget_exhausted(&trace, config, &start) {
            break stop;
        }
        let (next, mut record) = alsas_iterate(&state, data)?;
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
            strategy => maybe_increase_rank(
                &trace,
                strategy,
                &mut state.model.factors,
                Some(&mut state.model.core),
                &mut rng,
            )?,
        };
        if decision == RankDecision::Unchanged && change <= config.tol {
            break StopReason::ObjectiveStall;
        }
    });

    Ok(SolveOutput {
        model: state.model,
        x: state.x,
        trace,
    })
}
