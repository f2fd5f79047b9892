//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a `Xoshiro256PlusPlus`
//! seeded through `seed_from_u64`, so results are reproducible per seed on
//! any platform for a given build.

use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::economy_qr;
use crate::matrix::Matrix;

pub type Rng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a base seed and a list of discriminators into an independent seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub fn standard_normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| standard_normal(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, gaussian_vec(rng, rows * cols)).expect("sized")
}

/// Q factor of an `rows × cols` Gaussian matrix.
pub fn random_orthonormal(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows, "cannot fit {cols} orthonormal columns in R^{rows}");
    economy_qr(&gaussian_matrix(rng, rows, cols))
        .expect("Gaussian matrices are finite and tall")
        .q
}
