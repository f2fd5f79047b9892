use proptest::prelude::*;

use ihosvd::io::{read_mask_text, read_tensor_binary, read_tensor_text, write_mask_text, write_tensor_binary, write_tensor_text};
use ihosvd::linalg::{economy_qr, leading_subspace, svd};
use ihosvd::tensor::{fold, kron, mode_product, product_all, unfold};
use ihosvd::{DenseTensor, Matrix, ObservationMask, Shape};

fn tensor_strategy(max_order: usize, max_dim: usize) -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(1..=max_dim, 1..=max_order).prop_flat_map(|dims| {
        let n: usize = dims.iter().product();
        prop::collection::vec(-10.0..10.0f64, n)
            .prop_map(move |data| DenseTensor::new(Shape::new(dims.clone()).unwrap(), data).unwrap())
    })
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0..5.0f64, r * c).prop_map(move |d| Matrix::new(r, c, d).unwrap())
    })
}

/// Product of two random factors, so the rank is at most `inner`.
fn low_rank_strategy() -> impl Strategy<Value = Matrix> {
    (1..=8usize, 1..=8usize, 1..=3usize).prop_flat_map(|(r, c, k)| {
        (
            prop::collection::vec(-3.0..3.0f64, r * k),
            prop::collection::vec(-3.0..3.0f64, k * c),
        )
            .prop_map(move |(a, b)| Matrix::new(r, k, a).unwrap().matmul(&Matrix::new(k, c, b).unwrap()).unwrap())
    })
}

fn check_svd(m: &Matrix) -> Result<(), TestCaseError> {
    let d = svd(m).unwrap();
    let scale = 1.0 + m.fro_norm();
    prop_assert!(d.reconstruct().max_abs_diff(m) <= 1e-12 * scale);
    prop_assert!(d.u.orthonormality_error() <= 1e-12);
    prop_assert!(d.v.orthonormality_error() <= 1e-12);
    prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    prop_assert!(d.s.iter().all(|&s| s >= 0.0));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unfold_fold_roundtrip(t in tensor_strategy(4, 5), pick in 0usize..4) {
        let n = pick % t.ndims();
        let u = unfold(&t, n).unwrap();
        prop_assert_eq!(u.rows(), t.dims()[n]);
        prop_assert_eq!(fold(&u, n, t.shape()).unwrap(), t);
    }

    #[test]
    fn products_in_distinct_modes_commute(t in tensor_strategy(4, 4), seed in any::<u64>()) {
        prop_assume!(t.ndims() >= 2);
        let mut r = ihosvd::rng::seeded(seed);
        let a = ihosvd::rng::gaussian_matrix(&mut r, 3, t.dims()[0]);
        let b = ihosvd::rng::gaussian_matrix(&mut r, 2, t.dims()[1]);
        let ab = mode_product(&mode_product(&t, &a, 0).unwrap(), &b, 1).unwrap();
        let ba = mode_product(&mode_product(&t, &b, 1).unwrap(), &a, 0).unwrap();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() <= 1e-10);
    }

    #[test]
    fn orthonormal_projection_is_idempotent(t in tensor_strategy(3, 5), seed in any::<u64>()) {
        let mut r = ihosvd::rng::seeded(seed);
        let factors: Vec<Matrix> = t.dims().iter().map(|&d| ihosvd::rng::random_orthonormal(&mut r, d, 1 + d / 2)).collect();
        let once = product_all(&product_all(&t, &factors, true).unwrap(), &factors, false).unwrap();
        let twice = product_all(&product_all(&once, &factors, true).unwrap(), &factors, false).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() <= 1e-10);
        prop_assert!(once.fro_norm() <= t.fro_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn kron_shape_and_entries(a in matrix_strategy(3, 3), b in matrix_strategy(3, 3)) {
        let k = kron(&a, &b);
        prop_assert_eq!(k.shape(), (a.rows() * b.rows(), a.cols() * b.cols()));
        for i in 0..k.rows() {
            for j in 0..k.cols() {
                let want = a.get(i / b.rows(), j / b.cols()) * b.get(i % b.rows(), j % b.cols());
                prop_assert_eq!(k.get(i, j), want);
            }
        }
    }

    #[test]
    fn svd_of_general_matrices(m in matrix_strategy(9, 9)) {
        check_svd(&m)?;
    }

    #[test]
    fn svd_of_rank_deficient_matrices(m in low_rank_strategy()) {
        check_svd(&m)?;
    }

    #[test]
    fn qr_reconstructs(m in matrix_strategy(8, 8)) {
        prop_assume!(m.rows() >= m.cols());
        let qr = economy_qr(&m).unwrap();
        prop_assert!(qr.q.matmul(&qr.r).unwrap().max_abs_diff(&m) <= 1e-12 * (1.0 + m.fro_norm()));
        prop_assert!(qr.q.orthonormality_error() <= 1e-12);
        for j in 0..qr.r.cols() {
            prop_assert!(qr.r.get(j, j) >= 0.0);
            for i in j + 1..qr.r.rows() {
                prop_assert_eq!(qr.r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn leading_subspace_is_orthonormal_for_any_width(m in matrix_strategy(6, 20), pick in 1usize..7) {
        let r = 1 + (pick - 1) % m.rows();
        let (basis, _) = leading_subspace(&m, r).unwrap();
        prop_assert_eq!(basis.shape(), (m.rows(), r));
        prop_assert!(basis.orthonormality_error() <= 1e-12);
    }

    #[test]
    fn tensor_binary_roundtrip(t in tensor_strategy(4, 4)) {
        let mut buf = Vec::new();
        write_tensor_binary(&t, &mut buf).unwrap();
        prop_assert_eq!(read_tensor_binary(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn tensor_text_roundtrip(t in tensor_strategy(3, 4)) {
        let mut buf = Vec::new();
        write_tensor_text(&t, &mut buf).unwrap();
        prop_assert_eq!(read_tensor_text(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn mask_text_roundtrip_and_scatter(dims in prop::collection::vec(1usize..5, 1..4), keep in prop::collection::vec(any::<bool>(), 64)) {
        let shape = Shape::new(dims).unwrap();
        let indices: Vec<usize> = (0..shape.numel()).filter(|&k| keep[k % keep.len()]).collect();
        let mask = ObservationMask::new(shape.clone(), indices.clone()).unwrap();
        let mut buf = Vec::new();
        write_mask_text(&mask, &mut buf).unwrap();
        let back = read_mask_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back.indices(), indices.as_slice());

        let values: Vec<f64> = indices.iter().map(|&k| k as f64 + 0.5).collect();
        let t = mask.scatter(&values).unwrap();
        prop_assert_eq!(mask.gather(&t).unwrap(), values);
        let total = mask.project(&t).unwrap().add(&mask.project_complement(&t).unwrap()).unwrap();
        prop_assert_eq!(total, t);
    }
}

#[test]
fn corrupt_files_are_rejected() {
    assert!(read_tensor_binary(&b"NOPE\x01\0\0\0"[..]).is_err());
    assert!(read_tensor_text(&b"2 2 2\n1\n2\n3\n"[..]).is_err());
    assert!(read_tensor_text(&b"1 2\n1\nx\n"[..]).is_err());
    assert!(read_mask_text(&b"1 4 2\n3\n3\n"[..]).is_err());
    assert!(read_mask_text(&b"1 4 1\n9\n"[..]).is_err());
}
