//! Dense N-way tensors and the multilinear primitives built on them.
//!
//! Storage is lexicographic with the first index varying fastest, so the flat
//! data of a tensor *is* its vectorization and element `(i₁,…,i_N)` lives at
//! `i₁ + m₁·(i₂ + m₂·(i₃ + …))`. Mode indices are 0-based throughout.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Dimensions `(m₁,…,m_N)` of a tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("a tensor needs at least one mode".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero-length mode in {dims:?}")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape(format!("{dims:?} overflows the address space")))?;
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn ndims(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self, n: usize) -> usize {
        self.0[n]
    }

    /// Total number of entries.
    pub fn numel(&self) -> usize {
        self.0.iter().product()
    }

    pub fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.ndims() {
            return Err(Error::ModeOutOfRange {
                mode: n,
                ndims: self.ndims(),
            });
        }
        Ok(())
    }

    /// Product of the dims before mode `n` and after it.
    fn split(&self, n: usize) -> (usize, usize) {
        let left = self.0[..n].iter().product();
        let right = self.0[n + 1..].iter().product();
        (left, right)
    }

    /// Same shape with mode `n` resized to `len`.
    pub fn with_dim(&self, n: usize, len: usize) -> Shape {
        let mut dims = self.0.clone();
        dims[n] = len;
        Shape(dims)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.ndims());
        idx.iter()
            .zip(&self.0)
            .rev()
            .fold(0, |acc, (&i, &m)| acc * m + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.0
            .iter()
            .map(|&m| {
                let i = flat % m;
                flat /= m;
                i
            })
            .collect()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl TryFrom<&[usize]> for Shape {
    type Error = Error;
    fn try_from(dims: &[usize]) -> Result<Self> {
        Shape::new(dims.to_vec())
    }
}

/// Dense real N-way array.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.numel() {
            return Err(Error::DimensionMismatch(format!(
                "shape {shape} needs {} values, got {}",
                shape.numel(),
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.numel()];
        Self { shape, data }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let data = (0..shape.numel())
            .map(|k| f(&shape.multi_index(k)))
            .collect();
        Self { shape, data }
    }

    /// A matrix viewed as a 2-way tensor.
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            shape: Shape(vec![m.rows(), m.cols()]),
            data: m.data().to_vec(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn ndims(&self) -> usize {
        self.shape.ndims()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.shape.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.shape.flat_index(idx);
        self.data[k] = v;
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.dims().to_vec(),
                found: other.dims().to_vec(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn fro_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Mode-`n` matricization: an `mₙ × Π_{i≠n} mᵢ` matrix whose columns are the
/// mode-`n` fibers in lexicographic order of the remaining indices.
pub fn unfold(t: &DenseTensor, n: usize) -> Result<Matrix> {
    t.shape.check_mode(n)?;
    let m = t.shape.dim(n);
    let (left, right) = t.shape.split(n);
    let ncols = left * right;
    let mut out = vec![0.0; m * ncols];
    for r in 0..right {
        for i in 0..m {
            let src = &t.data[left * (i + m * r)..left * (i + m * r) + left];
            for (l, &v) in src.iter().enumerate() {
                out[i + m * (l + left * r)] = v;
            }
        }
    }
    Matrix::new(m, ncols, out)
}

/// Inverse of [`unfold`].
pub fn fold(mat: &Matrix, n: usize, shape: &Shape) -> Result<DenseTensor> {
    shape.check_mode(n)?;
    let m = shape.dim(n);
    let (left, right) = shape.split(n);
    if mat.rows() != m || mat.cols() != left * right {
        return Err(Error::DimensionMismatch(format!(
            "cannot fold a {}x{} matrix along mode {n} into {shape}",
            mat.rows(),
            mat.cols()
        )));
    }
    let src = mat.data();
    let mut data = vec![0.0; shape.numel()];
    for r in 0..right {
        for i in 0..m {
            let dst = &mut data[left * (i + m * r)..left * (i + m * r) + left];
            for (l, d) in dst.iter_mut().enumerate() {
                *d = src[i + m * (l + left * r)];
            }
        }
    }
    DenseTensor::new(shape.clone(), data)
}

/// Mode-`n` product `t ×ₙ b`; `b` must have `mₙ` columns.
pub fn mode_product(t: &DenseTensor, b: &Matrix, n: usize) -> Result<DenseTensor> {
    mode_product_impl(t, b, n, false)
}

/// `t ×ₙ bᵀ` without forming the transpose.
pub fn mode_product_t(t: &DenseTensor, b: &Matrix, n: usize) -> Result<DenseTensor> {
    mode_product_impl(t, b, n, true)
}

fn mode_product_impl(t: &DenseTensor, b: &Matrix, n: usize, transpose: bool) -> Result<DenseTensor> {
    t.shape.check_mode(n)?;
    let (out_rows, inner) = if transpose {
        (b.cols(), b.rows())
    } else {
        (b.rows(), b.cols())
    };
    if inner != t.shape.dim(n) {
        return Err(Error::DimensionMismatch(format!(
            "mode-{n} product needs {} columns, matrix supplies {inner}",
            t.shape.dim(n)
        )));
    }
    let unfolded = unfold(t, n)?;
    let product = if transpose {
        b.t_matmul(&unfolded)?
    } else {
        b.matmul(&unfolded)?
    };
    fold(&product, n, &t.shape.with_dim(n, out_rows))
}

/// One factor of a [`multi_mode_product`].
#[derive(Clone, Copy, Debug)]
pub struct ModeFactor<'a> {
    pub matrix: &'a Matrix,
    pub mode: usize,
    pub transpose: bool,
}

impl<'a> ModeFactor<'a> {
    pub fn new(matrix: &'a Matrix, mode: usize) -> Self {
        Self {
            matrix,
            mode,
            transpose: false,
        }
    }

    pub fn transposed(matrix: &'a Matrix, mode: usize) -> Self {
        Self {
            matrix,
            mode,
            transpose: true,
        }
    }
}

/// Applies several mode products, one matrix per mode.
pub fn multi_mode_product(t: &DenseTensor, factors: &[ModeFactor<'_>]) -> Result<DenseTensor> {
    let mut seen = vec![false; t.ndims()];
    for f in factors {
        t.shape.check_mode(f.mode)?;
        if std::mem::replace(&mut seen[f.mode], true) {
            return Err(Error::DuplicateMode(f.mode));
        }
    }
    let mut out = t.clone();
    for f in factors {
        out = mode_product_impl(&out, f.matrix, f.mode, f.transpose)?;
    }
    Ok(out)
}

/// `t ×₁ m₁ ×₂ m₂ … ×_N m_N` (or with every matrix transposed).
pub fn product_all(t: &DenseTensor, mats: &[Matrix], transpose: bool) -> Result<DenseTensor> {
    product_except(t, mats, None, transpose)
}

/// Like [`product_all`] but skipping mode `skip`.
pub fn product_except(
    t: &DenseTensor,
    mats: &[Matrix],
    skip: Option<usize>,
    transpose: bool,
) -> Result<DenseTensor> {
    if mats.len() != t.ndims() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for a {}-way tensor",
            mats.len(),
            t.ndims()
        )));
    }
    let factors: Vec<ModeFactor<'_>> = mats
        .iter()
        .enumerate()
        .filter(|(n, _)| Some(*n) != skip)
        .map(|(n, m)| ModeFactor {
            matrix: m,
            mode: n,
            transpose,
        })
        .collect();
    multi_mode_product(t, &factors)
}

/// `vec(t)`: the flat data in lexicographic order.
pub fn vectorize(t: &DenseTensor) -> &[f64] {
    t.data()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = b.shape();
    Matrix::from_fn(a.rows() * p, a.cols() * q, |row, col| {
        a.get(row / p, col / q) * b.get(row % p, col % q)
    })
}

/// `mats[last] ⊗ … ⊗ mats[0]`, the reversed Kronecker chain that pairs with
/// first-index-fastest vectorization.
pub fn kron_reversed<'a>(mats: impl DoubleEndedIterator<Item = &'a Matrix>) -> Matrix {
    mats.rev()
        .fold(Matrix::identity(1), |acc, m| kron(&acc, m))
}

pub fn inner(t: &DenseTensor, s: &DenseTensor) -> Result<f64> {
    t.check_same_shape(s)?;
    Ok(dot(&t.data, &s.data))
}

pub fn fro_norm(t: &DenseTensor) -> f64 {
    t.fro_norm()
}
