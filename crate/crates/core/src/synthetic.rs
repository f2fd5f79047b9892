//! Seeded random low-multilinear-rank test problems.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{economy_qr, leading_subspace};
use crate::matrix::Matrix;
use crate::rng;
use crate::solvers::{FactorModel, MultilinearRank};
use crate::tensor::{mode_product, product_all, unfold, DenseTensor, Shape};

/// Relative cutoff used when counting the numerical rank of an unfolding.
pub const NUMERICAL_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Core and factors with i.i.d. standard normal entries.
    Gaussian,
    /// Core uniform on `[0, 1]`; factors orthonormal columns scaled by
    /// `i^{-1/2}`.
    PowerLaw,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::PowerLaw => "powerlaw",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Family::Gaussian),
            "powerlaw" | "power-law" | "power_law" => Ok(Family::PowerLaw),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub shape: Shape,
    pub ranks: Vec<usize>,
    pub seed: u64,
    /// Build the data from orthonormalized factors instead of the raw draws.
    pub orthonormalize_factors: bool,
}

impl GeneratorSpec {
    pub fn new(family: Family, dims: &[usize], ranks: &[usize], seed: u64) -> Result<Self> {
        let spec = Self {
            family,
            shape: Shape::new(dims.to_vec())?,
            ranks: ranks.to_vec(),
            seed,
            orthonormalize_factors: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        MultilinearRank::new(self.ranks.clone(), &self.shape)?;
        let total: usize = self.ranks.iter().product();
        for &r in &self.ranks {
            // a mode rank cannot exceed the product of the others
            if r * r > total {
                return Err(Error::InvalidArgument(format!(
                    "ranks {:?} are not attainable together",
                    self.ranks
                )));
            }
        }
        Ok(())
    }

    /// Plain-text sidecar describing the instance.
    pub fn to_manifest(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        format!(
            "family {}\nshape {}\nranks {}\nseed {}\northonormalize_factors {}\n",
            self.family,
            join(self.shape.dims()),
            join(&self.ranks),
            self.seed,
            self.orthonormalize_factors
        )
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let mut family = None;
        let mut dims = None;
        let mut ranks = None;
        let mut seed = None;
        let mut ortho = false;
        let list = |v: &str| -> Result<Vec<usize>> {
            v.split_whitespace()
                .map(|s| s.parse().map_err(|_| Error::Format(format!("bad integer `{s}`"))))
                .collect()
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "family" => family = Some(value.trim().parse()?),
                "shape" => dims = Some(list(value)?),
                "ranks" => ranks = Some(list(value)?),
                "seed" => {
                    seed = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|_| Error::Format(format!("bad seed `{value}`")))?,
                    )
                }
                "orthonormalize_factors" => {
                    ortho = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::Format(format!("bad flag `{value}`")))?
                }
                other => return Err(Error::Format(format!("unknown manifest key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("manifest lacks `{k}`"));
        let mut spec = Self::new(
            family.ok_or_else(|| missing("family"))?,
            &dims.ok_or_else(|| missing("shape"))?,
            &ranks.ok_or_else(|| missing("ranks"))?,
            seed.ok_or_else(|| missing("seed"))?,
        )?;
        spec.orthonormalize_factors = ortho;
        Ok(spec)
    }
}

/// Draws a ground-truth model and its full tensor.
///
/// The returned model always has orthonormal factors; any scaling of the raw
/// factors is absorbed into its core so that it reconstructs the tensor.
pub fn generate(spec: &GeneratorSpec) -> Result<(FactorModel, DenseTensor)> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let core_shape = Shape::new(spec.ranks.clone())?;
    let core_data: Vec<f64> = match spec.family {
        Family::Gaussian => rng::gaussian_vec(&mut rng, core_shape.numel()),
        Family::PowerLaw => (0..core_shape.numel()).map(|_| rng.random::<f64>()).collect(),
    };
    let core = DenseTensor::new(core_shape, core_data)?;
    let raw: Vec<Matrix> = spec
        .shape
        .dims()
        .iter()
        .zip(&spec.ranks)
        .map(|(&m, &r)| match spec.family {
            Family::Gaussian => rng::gaussian_matrix(&mut rng, m, r),
            Family::PowerLaw => {
                let q = rng::random_orthonormal(&mut rng, m, r);
                let decay: Vec<f64> = (1..=r).map(|i| (i as f64).powf(-0.5)).collect();
                q.matmul(&Matrix::diag(&decay)).expect("r columns")
            }
        })
        .collect();

    let mut truth_core = core.clone();
    let mut orthonormal = Vec::with_capacity(raw.len());
    for (n, a) in raw.iter().enumerate() {
        let qr = economy_qr(a)?;
        if !spec.orthonormalize_factors {
            truth_core = mode_product(&truth_core, &qr.r, n)?;
        }
        orthonormal.push(qr.q);
    }
    let model = FactorModel::new(truth_core, orthonormal)?;
    let data = if spec.orthonormalize_factors {
        model.reconstruct()
    } else {
        product_all(&core, &raw, false)?
    };

    if spec.family == Family::Gaussian {
        let ranks = unfolding_ranks(&data, NUMERICAL_RANK_TOL)?;
        if ranks != spec.ranks {
            return Err(Error::Numerical(format!(
                "generated tensor has unfolding ranks {ranks:?}, requested {:?}",
                spec.ranks
            )));
        }
    }
    Ok((model, data))
}

/// Number of singular values above `rel_tol·σ₁` for each unfolding.
pub fn unfolding_ranks(t: &DenseTensor, rel_tol: f64) -> Result<Vec<usize>> {
    (0..t.ndims())
        .map(|n| {
            let g = unfold(t, n)?;
            let (_, s) = leading_subspace(&g, 1)?;
            let cutoff = s.first().copied().unwrap_or(0.0) * rel_tol;
            Ok(s.iter().filter(|&&v| v > cutoff).count())
        })
        .collect()
}

/// `t + sigma·ε` with standard normal `ε`; `sigma = 0` returns `t` unchanged.
pub fn add_noise(t: &DenseTensor, sigma: f64, seed: u64) -> Result<DenseTensor> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be finite and nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(t.clone());
    }
    let mut rng = rng::seeded(seed);
    let mut out = t.clone();
    for v in out.data_mut() {
        *v += sigma * rng::standard_normal(&mut rng);
    }
    Ok(out)
}
