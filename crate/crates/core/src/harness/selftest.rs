//! Quick property checks runnable from the command line.

use rand::Rng as _;

use crate::error::Result;
use crate::linalg::{economy_qr, svd};
use crate::matrix::Matrix;
use crate::observation::{sample_uniform, sampling_as_measurement};
use crate::rng::{self, Rng};
use crate::solvers::{
    alsas_core_update, alsas_factor_update, generalized_x_update, grad_h, hooi_solve,
    ihooi_solve, initial_factors, normalize_factors, objective_g, objective_g_energy,
    objective_h, truncated_hosvd, MaskedData, SolverConfig,
};
use crate::synthetic::{add_noise, generate, Family, GeneratorSpec};
use crate::tensor::{fold, mode_product, product_all, unfold, DenseTensor, Shape};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_tensor(rng: &mut Rng, dims: &[usize]) -> DenseTensor {
    let shape = Shape::new(dims.to_vec()).expect("positive dims");
    let n = shape.numel();
    DenseTensor::new(shape, rng::gaussian_vec(rng, n)).expect("sized")
}

fn random_dims(rng: &mut Rng, order: usize, max: usize) -> Vec<usize> {
    (0..order).map(|_| rng.random_range(1..=max)).collect()
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn fold_roundtrip(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    for _ in 0..50 {
        let order = r.random_range(1..=4);
        let dims = random_dims(&mut r, order, 5);
        let t = random_tensor(&mut r, &dims);
        for n in 0..dims.len() {
            if fold(&unfold(&t, n)?, n, t.shape())? != t {
                return Ok((false, format!("mode {n} of {dims:?}")));
            }
        }
    }
    Ok((true, "50 shapes, bit-exact".into()))
}

fn mode_product_sum(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let dims = random_dims(&mut r, 3, 4);
        let t = random_tensor(&mut r, &dims);
        let n = r.random_range(0..3);
        let rows = 1 + r.random_range(0..4);
        let b = rng::gaussian_matrix(&mut r, rows, dims[n]);
        let p = mode_product(&t, &b, n)?;
        let out = p.shape().clone();
        for flat in 0..out.numel() {
            let idx = out.multi_index(flat);
            let mut src = idx.clone();
            let mut acc = 0.0;
            for k in 0..dims[n] {
                src[n] = k;
                acc += t.get(&src) * b.get(idx[n], k);
            }
            worst = worst.max((acc - p.data()[flat]).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max diff {worst:.2e}")))
}

fn energy_identity(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    let mut worst = 0.0_f64;
    for i in 0..20 {
        let x = random_tensor(&mut r, &[5, 4, 3]);
        let factors = initial_factors(x.shape(), &[2, 2, 2], seed + i)?;
        let d = (objective_g(&factors, &x)? - objective_g_energy(&factors, &x)?).abs();
        worst = worst.max(d / x.fro_norm().powi(2));
    }
    Ok((worst <= 1e-10, format!("max relative diff {worst:.2e}")))
}

fn masked_instance(seed: u64) -> Result<(MaskedData, DenseTensor, Vec<Matrix>)> {
    let mut r = rng::seeded(seed);
    let m = random_tensor(&mut r, &[4, 3, 3]);
    let mask = sample_uniform(m.shape(), 0.5, seed)?;
    let data = MaskedData::new(mask.clone(), &m)?;
    let free = mask.project_complement(&random_tensor(&mut r, &[4, 3, 3]))?;
    let x = free.add(data.observed())?;
    let factors = initial_factors(m.shape(), &[2, 2, 2], seed + 1)?;
    Ok((data, x, factors))
}

fn gradient(seed: u64) -> Result<(bool, String)> {
    let (data, x, factors) = masked_instance(seed)?;
    let g = grad_h(&x, &factors, &data)?;
    let h = 1e-5;
    let mut worst = 0.0_f64;
    let free: Vec<usize> = (0..x.len())
        .filter(|k| data.mask().indices().binary_search(k).is_err())
        .collect();
    for &k in free.iter().take(10) {
        let mut xp = x.clone();
        xp.data_mut()[k] += h;
        let mut xm = x.clone();
        xm.data_mut()[k] -= h;
        let fd = (objective_h(&xp, &factors, &data)? - objective_h(&xm, &factors, &data)?) / (2.0 * h);
        let exact = g.data()[k];
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-8));
    }
    Ok((worst <= 1e-6, format!("max relative diff {worst:.2e}")))
}

fn lipschitz(seed: u64) -> Result<(bool, String)> {
    let (data, x, factors) = masked_instance(seed)?;
    let mut r = rng::seeded(seed + 7);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let y = data
            .mask()
            .project_complement(&random_tensor(&mut r, x.dims()))?
            .add(data.observed())?;
        let lhs = grad_h(&x, &factors, &data)?.sub(&grad_h(&y, &factors, &data)?)?.fro_norm();
        let rhs = x.sub(&y)?.fro_norm();
        worst = worst.max(lhs / rhs);
    }
    Ok((worst <= 1.0 + 1e-10, format!("max ratio {worst:.6}")))
}

fn von_neumann(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let s = 1 + r.random_range(0..6);
        let t = 1 + r.random_range(0..6);
        let x = rng::gaussian_matrix(&mut r, s, t);
        let y = rng::gaussian_matrix(&mut r, s, t);
        let inner: f64 = x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
        let bound: f64 = svd(&x)?.s.iter().zip(&svd(&y)?.s).map(|(a, b)| a * b).sum();
        worst = worst.min(bound - inner);
    }
    Ok((worst >= -1e-10, format!("min slack {worst:.2e}")))
}

fn alsas_normalization(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    let x = random_tensor(&mut r, &[5, 4, 4]);
    let factors = initial_factors(x.shape(), &[2, 2, 2], seed)?;
    let core = alsas_core_update(&x, &factors)?;
    let mut half = factors.clone();
    for n in 0..3 {
        half[n] = alsas_factor_update(&x, &core, &half, n)?;
    }
    let before = product_all(&core, &half, false)?;
    let (c2, q) = normalize_factors(&core, &half)?;
    let after = product_all(&c2, &q, false)?;
    let rel = after.sub(&before)?.fro_norm() / before.fro_norm();
    Ok((rel <= 1e-10, format!("relative change {rel:.2e}")))
}

fn sampling_update(seed: u64) -> Result<(bool, String)> {
    let (data, x, factors) = masked_instance(seed)?;
    let op = sampling_as_measurement(data.mask().clone());
    let out = generalized_x_update(&x, &factors, &op, &data.values())?;
    let exact = data
        .mask()
        .indices()
        .iter()
        .all(|&k| out.data()[k].to_bits() == data.observed().data()[k].to_bits());
    Ok((exact, "observed entries reproduced bit-exactly".into()))
}

fn ihooi_monotone(seed: u64) -> Result<(bool, String)> {
    let spec = GeneratorSpec::new(Family::Gaussian, &[10, 10, 10], &[2, 2, 2], seed)?;
    let (_, m) = generate(&spec)?;
    let data = MaskedData::new(sample_uniform(m.shape(), 0.5, seed)?, &m)?;
    let cfg = SolverConfig::fixed(vec![2, 2, 2]).with_max_iters(100).with_seed(seed);
    let out = ihooi_solve(&data, &cfg)?;
    Ok((
        out.trace.is_monotone(1e-12),
        format!("{} iterations", out.trace.len()),
    ))
}

fn hooi_refines(seed: u64) -> Result<(bool, String)> {
    let spec = GeneratorSpec::new(Family::Gaussian, &[12, 12, 12], &[3, 3, 3], seed)?;
    let (_, m) = generate(&spec)?;
    let noisy = add_noise(&m, 0.1 * m.fro_norm() / (m.len() as f64).sqrt(), seed)?;
    let start = truncated_hosvd(&noisy, &[3, 3, 3])?;
    let base = start.reconstruct().sub(&noisy)?.fro_norm();
    let (model, trace) = hooi_solve(&noisy, &[3, 3, 3], &SolverConfig::fixed(vec![3, 3, 3]))?;
    let fit = model.reconstruct().sub(&noisy)?.fro_norm();
    Ok((
        trace.is_monotone(1e-12) && fit <= base * (1.0 + 1e-12),
        format!("fit {fit:.6e} vs HOSVD {base:.6e}"),
    ))
}

fn qr_sanity(seed: u64) -> Result<(bool, String)> {
    let mut r = rng::seeded(seed);
    let a = rng::gaussian_matrix(&mut r, 7, 3);
    let qr = economy_qr(&a)?;
    let err = qr.q.matmul(&qr.r)?.sub(&a)?.fro_norm() / a.fro_norm();
    Ok((err <= 1e-12 && qr.q.orthonormality_error() <= 1e-12, format!("reconstruction {err:.2e}")))
}

/// Runs every check with the given base seed.
pub fn run_selftest(seed: u64) -> Vec<CheckResult> {
    vec![
        check("fold/unfold roundtrip", || fold_roundtrip(seed)),
        check("mode product vs direct sum", || mode_product_sum(seed)),
        check("energy identity", || energy_identity(seed)),
        check("economy QR", || qr_sanity(seed)),
        check("gradient vs finite differences", || gradient(seed)),
        check("gradient Lipschitz bound", || lipschitz(seed)),
        check("von Neumann trace inequality", || von_neumann(seed)),
        check("ALSaS normalization invariance", || alsas_normalization(seed)),
        check("sampling-operator update", || sampling_update(seed)),
        check("iHOOI objective monotone", || ihooi_monotone(seed)),
        check("HOOI refines truncated HOSVD", || hooi_refines(seed)),
    ]
}
