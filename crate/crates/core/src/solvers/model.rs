use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::observation::ObservationMask;
use crate::rng;
use crate::tensor::{product_all, DenseTensor, Shape};

/// Tolerance on `‖AₙᵀAₙ − I‖_F` accepted as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Multilinear rank `(r₁, …, r_N)` with `1 ≤ rₙ ≤ mₙ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearRank(Vec<usize>);

impl MultilinearRank {
    pub fn new(ranks: Vec<usize>, shape: &Shape) -> Result<Self> {
        if ranks.len() != shape.ndims() {
            return Err(Error::DimensionMismatch(format!(
                "{} ranks for a {}-way tensor",
                ranks.len(),
                shape.ndims()
            )));
        }
        for (&r, &m) in ranks.iter().zip(shape.dims()) {
            if r == 0 || r > m {
                return Err(Error::RankOutOfRange { rank: r, max: m });
            }
        }
        Ok(Self(ranks))
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Tucker model `core ×₁ A₁ … ×_N A_N` with orthonormal factors.
#[derive(Clone, Debug)]
pub struct FactorModel {
    pub core: DenseTensor,
    pub factors: Vec<Matrix>,
}

impl FactorModel {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.ndims() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a {}-way core",
                factors.len(),
                core.ndims()
            )));
        }
        for (n, (a, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if a.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {n} has {} columns, core mode has {r}",
                    a.cols()
                )));
            }
            if a.rows() < a.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "factor {n} is {}x{}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.dims().to_vec()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.factors.iter().map(Matrix::rows).collect()).expect("factors are non-empty")
    }

    pub fn reconstruct(&self) -> DenseTensor {
        product_all(&self.core, &self.factors, false).expect("validated shapes")
    }

    /// Largest `‖AₙᵀAₙ − I‖_F` over the factors.
    pub fn orthonormality_error(&self) -> f64 {
        max_orthonormality_error(&self.factors)
    }
}

pub(crate) fn max_orthonormality_error(factors: &[Matrix]) -> f64 {
    factors
        .iter()
        .map(Matrix::orthonormality_error)
        .fold(0.0, f64::max)
}

pub(crate) fn check_orthonormal(factors: &[Matrix]) -> Result<()> {
    for (mode, a) in factors.iter().enumerate() {
        let deviation = a.orthonormality_error();
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(Error::NonOrthonormal { mode, deviation });
        }
    }
    Ok(())
}

/// Observed entries of a data tensor.
///
/// `observed` holds `P_Ω(M)`: the data on `Ω` and zeros elsewhere.
#[derive(Clone, Debug)]
pub struct MaskedData {
    mask: ObservationMask,
    observed: DenseTensor,
}

impl MaskedData {
    /// Keeps the entries of `data` selected by `mask`.
    pub fn new(mask: ObservationMask, data: &DenseTensor) -> Result<Self> {
        let observed = mask.project(data)?;
        if !observed.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { mask, observed })
    }

    /// Observed values listed in ascending flat-index order.
    pub fn from_values(mask: ObservationMask, values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let observed = mask.scatter(values)?;
        Ok(Self { mask, observed })
    }

    pub fn complete(data: &DenseTensor) -> Result<Self> {
        Self::new(ObservationMask::full(data.shape().clone()), data)
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    pub fn observed(&self) -> &DenseTensor {
        &self.observed
    }

    pub fn shape(&self) -> &Shape {
        self.mask.shape()
    }

    pub fn values(&self) -> Vec<f64> {
        self.mask.gather(&self.observed).expect("same shape")
    }

    pub fn observed_norm(&self) -> f64 {
        self.observed.fro_norm()
    }

    /// Largest deviation of `x` from the data on `Ω`.
    pub(crate) fn feasibility_gap(&self, x: &DenseTensor) -> Result<f64> {
        if x.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape().dims().to_vec(),
                found: x.dims().to_vec(),
            });
        }
        let (xs, ms) = (x.data(), self.observed.data());
        Ok(self
            .mask
            .indices()
            .iter()
            .map(|&k| (xs[k] - ms[k]).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_feasible(&self, x: &DenseTensor) -> Result<()> {
        let gap = self.feasibility_gap(x)?;
        let scale = self
            .observed
            .data()
            .iter()
            .fold(1.0_f64, |acc, v| acc.max(v.abs()));
        if gap > 1e-10 * scale {
            return Err(Error::Infeasible(gap));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RankStrategy {
    Fixed(Vec<usize>),
    /// Starts at `start` and grows one mode at a time whenever the fit
    /// stalls, never exceeding `max`.
    Increasing {
        start: Vec<usize>,
        max: Vec<usize>,
        delta: usize,
        fit_stall_threshold: f64,
    },
}

impl RankStrategy {
    pub fn initial_ranks(&self) -> &[usize] {
        match self {
            RankStrategy::Fixed(r) => r,
            RankStrategy::Increasing { start, .. } => start,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ihooi,
    Alsas,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ihooi => "ihooi",
            SolverKind::Alsas => "alsas",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub max_seconds: f64,
    pub rank_strategy: RankStrategy,
    pub seed: u64,
}

impl SolverConfig {
    /// Default tolerances with fixed ranks.
    pub fn fixed(ranks: Vec<usize>) -> Self {
        Self {
            tol: 1e-5,
            max_iters: 2000,
            max_seconds: f64::INFINITY,
            rank_strategy: RankStrategy::Fixed(ranks),
            seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, shape: &Shape) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.max_seconds > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "max_seconds must be positive, got {}",
                self.max_seconds
            )));
        }
        match &self.rank_strategy {
            RankStrategy::Fixed(r) => {
                MultilinearRank::new(r.clone(), shape)?;
            }
            RankStrategy::Increasing {
                start,
                max,
                delta,
                fit_stall_threshold,
            } => {
                MultilinearRank::new(start.clone(), shape)?;
                MultilinearRank::new(max.clone(), shape)?;
                if start.iter().zip(max).any(|(s, m)| s > m) {
                    return Err(Error::InvalidArgument(format!(
                        "start ranks {start:?} exceed max ranks {max:?}"
                    )));
                }
                if *delta == 0 {
                    return Err(Error::InvalidArgument("rank increment must be positive".into()));
                }
                if !(*fit_stall_threshold > 0.0) {
                    return Err(Error::InvalidArgument(
                        "fit stall threshold must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Orthonormalized Gaussian starting factors.
pub fn initial_factors(shape: &Shape, ranks: &[usize], seed: u64) -> Result<Vec<Matrix>> {
    MultilinearRank::new(ranks.to_vec(), shape)?;
    let mut rng = rng::seeded(seed);
    Ok(shape
        .dims()
        .iter()
        .zip(ranks)
        .map(|(&m, &r)| rng::random_orthonormal(&mut rng, m, r))
        .collect())
}
