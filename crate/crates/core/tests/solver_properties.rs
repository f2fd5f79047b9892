use ihosvd::metrics::relative_error;
use ihosvd::rng;
use ihosvd::solvers::{
    alsas_solve, augment_factor, ihooi_iterate, ihooi_solve, initial_factors, kkt_residual,
    mode_gram_input, objective_g, pad_core, IhooiState, MaskedData, RankStrategy, SolverConfig,
    StopReason,
};
use ihosvd::synthetic::{generate, Family, GeneratorSpec};
use ihosvd::tensor::product_all;
use ihosvd::{sample_uniform, DenseTensor, Matrix};

fn instance(dims: &[usize], ranks: &[usize], sr: f64, seed: u64) -> (DenseTensor, MaskedData) {
    let spec = GeneratorSpec::new(Family::Gaussian, dims, ranks, seed).unwrap();
    let (_, m) = generate(&spec).unwrap();
    let mask = sample_uniform(m.shape(), sr, seed ^ 0x5a5a).unwrap();
    let data = MaskedData::new(mask, &m).unwrap();
    (m, data)
}

fn sq(m: &Matrix) -> f64 {
    m.fro_norm().powi(2)
}

#[test]
fn factor_sweep_decrease_matches_captured_energy() {
    for seed in 0..6 {
        let (_, data) = instance(&[7, 6, 5], &[2, 3, 2], 0.6, seed);
        let factors = initial_factors(data.shape(), &[2, 3, 2], seed + 100).unwrap();
        let x = data.observed().clone();
        let state = IhooiState::new(factors.clone(), x.clone()).unwrap();
        let (next, _) = ihooi_iterate(&state, &data).unwrap();

        // replay the sweep mode by mode with the partially updated factors
        let mut current = factors.clone();
        let mut predicted = 0.0;
        for n in 0..3 {
            let g = mode_gram_input(&x, &current, n).unwrap();
            let gain = sq(&next.factors[n].t_matmul(&g).unwrap()) - sq(&current[n].t_matmul(&g).unwrap());
            assert!(gain >= -1e-10, "mode {n} lost energy {gain}");
            predicted += 0.5 * gain;
            current[n] = next.factors[n].clone();
        }
        let actual = objective_g(&factors, &x).unwrap() - objective_g(&next.factors, &x).unwrap();
        assert!((actual - predicted).abs() <= 1e-10 * (1.0 + actual.abs()), "{actual} vs {predicted}");
    }
}

#[test]
fn imputation_step_does_not_increase_objective() {
    let (_, data) = instance(&[8, 8, 8], &[2, 2, 2], 0.4, 3);
    let factors = initial_factors(data.shape(), &[2, 2, 2], 4).unwrap();
    let mut state = IhooiState::new(factors, data.observed().clone()).unwrap();
    for _ in 0..30 {
        let (next, rec) = ihooi_iterate(&state, &data).unwrap();
        let after_factors = objective_g(&next.factors, &state.x).unwrap();
        assert!(after_factors <= state.obj + 1e-12 * (1.0 + state.obj));
        assert!(rec.obj <= after_factors + 1e-12 * (1.0 + after_factors));
        // observed entries stay pinned to the data
        assert_eq!(data.mask().gather(&next.x).unwrap(), data.values());
        state = next;
    }
}

#[test]
fn converged_ihooi_satisfies_kkt_conditions() {
    let (m, data) = instance(&[10, 9, 8], &[2, 2, 2], 0.6, 11);
    let config = SolverConfig::fixed(vec![2, 2, 2]).with_tol(1e-12).with_max_iters(3000).with_seed(5);
    let out = ihooi_solve(&data, &config).unwrap();
    assert!(relative_error(&out.model.reconstruct(), &m).unwrap() < 1e-6);
    let kkt = kkt_residual(out.factors(), &out.x, &data).unwrap();
    let scale = 1.0 + data.observed_norm().powi(2);
    assert!(kkt.res_a.iter().all(|&r| r <= 1e-6 * scale), "{:?}", kkt.res_a);
    assert!(kkt.res_x <= 1e-6 * scale);
    assert!(kkt.res_orth.iter().all(|&r| r <= 1e-12));
    assert!(kkt.res_feas <= 1e-12);
}

#[test]
fn both_solvers_recover_most_instances() {
    let mut recovered = [0, 0];
    for seed in 20..30 {
        let (m, data) = instance(&[9, 9, 9], &[2, 2, 2], 0.5, seed);
        let config = SolverConfig::fixed(vec![2, 2, 2]).with_tol(1e-9).with_seed(seed);
        for (k, out) in [ihooi_solve(&data, &config).unwrap(), alsas_solve(&data, &config).unwrap()].iter().enumerate() {
            assert!(out.trace.is_monotone(1e-12));
            assert!(out.model.orthonormality_error() < 1e-12);
            recovered[k] += usize::from(relative_error(&out.model.reconstruct(), &m).unwrap() < 1e-4);
        }
    }
    // an unlucky start can trap iHOOI in a basin where the unobserved entries grow without bound
    assert!(recovered.iter().all(|&k| k >= 8), "{recovered:?}");
}

#[test]
fn stalled_start_recovers_from_another_seed() {
    let (m, data) = instance(&[9, 9, 9], &[2, 2, 2], 0.5, 23);
    let config = SolverConfig::fixed(vec![2, 2, 2]).with_tol(1e-9).with_max_iters(300);
    let stuck = ihooi_solve(&data, &config.clone().with_seed(23)).unwrap();
    assert!(stuck.trace.is_monotone(1e-12));
    let norms: Vec<f64> = stuck.trace.records.iter().map(|r| r.unobserved_norm).collect();
    assert!(norms.last().unwrap() > &(2.0 * norms[10]));
    let fresh = ihooi_solve(&data, &config.with_seed(0)).unwrap();
    assert!(relative_error(&fresh.model.reconstruct(), &m).unwrap() < 1e-4);
}

#[test]
fn rank_growth_keeps_reconstruction() {
    let mut r = rng::seeded(8);
    let core = DenseTensor::new(ihosvd::Shape::new(vec![2, 3, 2]).unwrap(), rng::gaussian_vec(&mut r, 12)).unwrap();
    let factors: Vec<Matrix> = [(6, 2), (5, 3), (4, 2)].iter().map(|&(d, k)| rng::random_orthonormal(&mut r, d, k)).collect();
    let before = product_all(&core, &factors, false).unwrap();

    let mut grown = factors.clone();
    grown[1] = augment_factor(&factors[1], 2, &mut r).unwrap();
    assert!(grown[1].orthonormality_error() < 1e-13);
    assert_eq!(grown[1].leading_cols(3), factors[1]);
    let padded = pad_core(&core, 1, 5).unwrap();
    let after = product_all(&padded, &grown, false).unwrap();
    assert!(after.max_abs_diff(&before).unwrap() < 1e-14);

    assert!(augment_factor(&factors[2], 3, &mut r).is_err());
    assert!(pad_core(&core, 1, 1).is_err());
}

#[test]
fn increasing_ranks_stop_at_the_cap() {
    let (m, data) = instance(&[12, 12, 12], &[3, 3, 3], 0.5, 31);
    let config = SolverConfig {
        rank_strategy: RankStrategy::Increasing {
            start: vec![1, 1, 1],
            max: vec![3, 3, 3],
            delta: 1,
            fit_stall_threshold: 1e-2,
        },
        ..SolverConfig::fixed(vec![1, 1, 1]).with_tol(1e-8).with_seed(2)
    };
    for out in [ihooi_solve(&data, &config).unwrap(), alsas_solve(&data, &config).unwrap()] {
        assert_eq!(out.model.ranks(), vec![3, 3, 3]);
        let ranks: Vec<&Vec<usize>> = out.trace.records.iter().map(|rec| &rec.ranks).collect();
        assert!(ranks.windows(2).all(|w| w[0].iter().zip(w[1]).all(|(a, b)| a <= b)));
        assert!(relative_error(&out.model.reconstruct(), &m).unwrap() < 1e-4);
    }
}

#[test]
fn stop_reasons() {
    let (_, data) = instance(&[6, 6, 6], &[2, 2, 2], 0.5, 40);
    let base = SolverConfig::fixed(vec![2, 2, 2]).with_seed(1);
    let out = ihooi_solve(&data, &base.clone().with_max_iters(3).with_tol(f64::MIN_POSITIVE)).unwrap();
    assert_eq!(out.trace.stop, Some(StopReason::MaxIterations));
    assert_eq!(out.trace.len(), 3);

    let out = ihooi_solve(&data, &base.clone().with_tol(1e-3)).unwrap();
    assert!(matches!(out.trace.stop, Some(StopReason::FitTolerance | StopReason::ObjectiveStall)));

    let timed = SolverConfig { max_seconds: 1e-9, ..base.clone() };
    let out = alsas_solve(&data, &timed).unwrap();
    assert_eq!(out.trace.stop, Some(StopReason::MaxSeconds));
    assert!(ihooi_solve(&data, &base.with_tol(0.0)).is_err());
}

#[test]
fn same_seed_same_trace() {
    let (_, data) = instance(&[7, 7, 7], &[2, 2, 2], 0.5, 50);
    let config = SolverConfig::fixed(vec![2, 2, 2]).with_max_iters(50).with_seed(9);
    let strip = |o: ihosvd::solvers::SolveOutput| -> Vec<(f64, f64)> { o.trace.records.iter().map(|r| (r.obj, r.fit)).collect() };
    assert_eq!(strip(ihooi_solve(&data, &config).unwrap()), strip(ihooi_solve(&data, &config).unwrap()));
    assert_eq!(strip(alsas_solve(&data, &config).unwrap()), strip(alsas_solve(&data, &config).unwrap()));
}
