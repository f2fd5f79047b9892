//! Observed index sets, the projections onto them, and linear measurement
//! operators.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::spd_solve;
use crate::matrix::{dot, Matrix};
use crate::rng;
use crate::tensor::{DenseTensor, Shape};

/// Set Ω of observed entries, stored as sorted unique flat indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    shape: Shape,
    indices: Vec<usize>,
}

impl ObservationMask {
    /// Validates and sorts `indices`; duplicates and out-of-range entries are
    /// rejected.
    pub fn new(shape: Shape, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        let total = shape.numel();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate observed index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= total {
                return Err(Error::InvalidArgument(format!(
                    "observed index {last} out of range for {total} entries"
                )));
            }
        }
        Ok(Self { shape, indices })
    }

    pub fn full(shape: Shape) -> Self {
        let indices = (0..shape.numel()).collect();
        Self { shape, indices }
    }

    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            indices: Vec::new(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.shape.numel()
    }

    /// Sample ratio `|Ω| / Π mₙ`.
    pub fn sample_ratio(&self) -> f64 {
        self.indices.len() as f64 / self.shape.numel() as f64
    }

    fn check(&self, t: &DenseTensor) -> Result<()> {
        if t.shape() != &self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.dims().to_vec(),
                found: t.dims().to_vec(),
            });
        }
        Ok(())
    }

    /// `P_Ω(t)`: keeps observed entries, zeros the rest.
    pub fn project(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        let mut out = DenseTensor::zeros(self.shape.clone());
        let (src, dst) = (t.data(), out.data_mut());
        for &k in &self.indices {
            dst[k] = src[k];
        }
        Ok(out)
    }

    /// `P_Ω^c(t)`: zeros observed entries, keeps the rest.
    pub fn project_complement(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        let mut out = t.clone();
        let dst = out.data_mut();
        for &k in &self.indices {
            dst[k] = 0.0;
        }
        Ok(out)
    }

    /// Values of `t` at the observed positions, in index order.
    pub fn gather(&self, t: &DenseTensor) -> Result<Vec<f64>> {
        self.check(t)?;
        let src = t.data();
        Ok(self.indices.iter().map(|&k| src[k]).collect())
    }

    /// Zero tensor with `values` placed at the observed positions.
    pub fn scatter(&self, values: &[f64]) -> Result<DenseTensor> {
        if values.len() != self.indices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} observed entries",
                values.len(),
                self.indices.len()
            )));
        }
        let mut out = DenseTensor::zeros(self.shape.clone());
        let dst = out.data_mut();
        for (&k, &v) in self.indices.iter().zip(values) {
            dst[k] = v;
        }
        Ok(out)
    }

    /// Overwrites the observed entries of `t` with those of `source`.
    pub fn overwrite_observed(&self, t: &mut DenseTensor, source: &DenseTensor) -> Result<()> {
        self.check(t)?;
        self.check(source)?;
        let src = source.data();
        let dst = t.data_mut();
        for &k in &self.indices {
            dst[k] = src[k];
        }
        Ok(())
    }

    /// `‖P_Ω(a − b)‖_F` without materializing the difference.
    pub fn residual_norm(&self, a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let (x, y) = (a.data(), b.data());
        Ok(self
            .indices
            .iter()
            .map(|&k| (x[k] - y[k]).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `‖P_Ω^c(t)‖_F`.
    pub fn complement_norm(&self, t: &DenseTensor) -> Result<f64> {
        self.check(t)?;
        let total: f64 = t.data().iter().map(|v| v * v).sum();
        let on: f64 = self.indices.iter().map(|&k| t.data()[k].powi(2)).sum();
        Ok((total - on).max(0.0).sqrt())
    }
}

/// Draws `round(sr·Π mₙ)` distinct entries uniformly at random.
pub fn sample_uniform(shape: &Shape, sr: f64, seed: u64) -> Result<ObservationMask> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sample ratio must lie in (0, 1], got {sr}"
        )));
    }
    let total = shape.numel();
    let count = ((sr * total as f64).round() as usize).min(total);
    let mut rng = rng::seeded(seed);
    // partial Fisher–Yates over the flat index range
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(count);
    ObservationMask::new(shape.clone(), pool)
}

/// Linear measurement operator `𝓛: ℝ^{m₁×…×m_N} → ℝ^K` with its adjoint and
/// a solver for `𝓛𝓛*`.
pub trait LinearMeasurement {
    fn shape(&self) -> &Shape;

    /// Number of measurements `K`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, x: &DenseTensor) -> Result<Vec<f64>>;

    fn adjoint(&self, y: &[f64]) -> Result<DenseTensor>;

    /// `(𝓛𝓛*)⁻¹ y`.
    fn gram_solve(&self, y: &[f64]) -> Result<Vec<f64>>;

    /// Closest tensor to `base` (in Frobenius norm) satisfying `𝓛(x) = measured`:
    /// `base + 𝓛*(𝓛𝓛*)⁻¹(measured − 𝓛(base))`.
    fn correct(&self, base: &DenseTensor, measured: &[f64]) -> Result<DenseTensor> {
        if measured.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} measurements for an operator with {} rows",
                measured.len(),
                self.len()
            )));
        }
        let predicted = self.apply(base)?;
        let residual: Vec<f64> = measured.iter().zip(&predicted).map(|(m, p)| m - p).collect();
        let lifted = self.adjoint(&self.gram_solve(&residual)?)?;
        base.add(&lifted)
    }
}

/// `𝓛 = P_Ω`, read off as the vector of observed values.
#[derive(Clone, Debug)]
pub struct SamplingOperator {
    mask: ObservationMask,
}

pub fn sampling_as_measurement(mask: ObservationMask) -> SamplingOperator {
    SamplingOperator { mask }
}

impl SamplingOperator {
    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }
}

impl LinearMeasurement for SamplingOperator {
    fn shape(&self) -> &Shape {
        self.mask.shape()
    }

    fn len(&self) -> usize {
        self.mask.len()
    }

    fn apply(&self, x: &DenseTensor) -> Result<Vec<f64>> {
        self.mask.gather(x)
    }

    fn adjoint(&self, y: &[f64]) -> Result<DenseTensor> {
        self.mask.scatter(y)
    }

    fn gram_solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(y.to_vec())
    }

    /// Copies the measured values into place, so the observed entries are
    /// reproduced exactly.
    fn correct(&self, base: &DenseTensor, measured: &[f64]) -> Result<DenseTensor> {
        if measured.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} measurements for {} observed entries",
                measured.len(),
                self.len()
            )));
        }
        if base.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape().dims().to_vec(),
                found: base.dims().to_vec(),
            });
        }
        let mut out = base.clone();
        let dst = out.data_mut();
        for (&k, &v) in self.mask.indices().iter().zip(measured) {
            dst[k] = v;
        }
        Ok(out)
    }
}

/// Explicit `K × Π mₙ` measurement matrix acting on `vec(x)`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    shape: Shape,
    matrix: Matrix,
    gram: Matrix,
}

impl DenseOperator {
    /// Fails when the rows of `matrix` are not linearly independent.
    pub fn new(shape: Shape, matrix: Matrix) -> Result<Self> {
        if matrix.cols() != shape.numel() {
            return Err(Error::DimensionMismatch(format!(
                "operator has {} columns, tensor has {} entries",
                matrix.cols(),
                shape.numel()
            )));
        }
        let gram = matrix.matmul_t(&matrix)?;
        // probe the factorization once so ill-conditioned operators fail here
        spd_solve(&gram, &vec![0.0; gram.rows()])?;
        Ok(Self { shape, matrix, gram })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

impl LinearMeasurement for DenseOperator {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn len(&self) -> usize {
        self.matrix.rows()
    }

    fn apply(&self, x: &DenseTensor) -> Result<Vec<f64>> {
        if x.shape() != &self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.dims().to_vec(),
                found: x.dims().to_vec(),
            });
        }
        let v = Matrix::new(x.len(), 1, x.data().to_vec())?;
        Ok(self.matrix.matmul(&v)?.into_data())
    }

    fn adjoint(&self, y: &[f64]) -> Result<DenseTensor> {
        if y.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} measurements",
                y.len(),
                self.len()
            )));
        }
        let data = (0..self.matrix.cols())
            .map(|j| dot(self.matrix.col(j), y))
            .collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    fn gram_solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        spd_solve(&self.gram, y)
    }
}
