use std::ffi::CStr;
use std::ptr;

use ihosvd::metrics::relative_error;
use ihosvd::sample_uniform;
use ihosvd::synthetic::{generate, Family, GeneratorSpec};
use ihosvd::{DenseTensor, Shape};
use ihosvd_ffi::*;

fn last_error() -> String {
    let p = ihosvd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Sampled {
    truth: DenseTensor,
    indices: Vec<usize>,
    values: Vec<f64>,
}

fn sampled(dims: &[usize], ranks: &[usize], sr: f64, seed: u64) -> Sampled {
    let spec = GeneratorSpec::new(Family::Gaussian, dims, ranks, seed).unwrap();
    let (_, truth) = generate(&spec).unwrap();
    let mask = sample_uniform(truth.shape(), sr, seed + 1).unwrap();
    let indices = mask.indices().to_vec();
    let values = indices.iter().map(|&k| truth.data()[k]).collect();
    Sampled { truth, indices, values }
}

unsafe fn problem(dims: &[usize], s: &Sampled) -> *mut IhosvdProblem {
    let mut p = ptr::null_mut();
    let st = ihosvd_problem_new(dims.as_ptr(), dims.len(), s.indices.as_ptr(), s.values.as_ptr(), s.indices.len(), &mut p);
    assert_eq!(st, IhosvdStatus::Ok);
    p
}

#[test]
fn completes_low_rank_tensor_with_both_methods() {
    let dims = [12, 11, 10];
    let s = sampled(&dims, &[2, 2, 2], 0.5, 5);
    unsafe {
        let p = problem(&dims, &s);
        for method in [IhosvdMethod::Ihooi, IhosvdMethod::Alsas] {
            let mut opts = ihosvd_options_default();
            opts.tol = 1e-8;
            opts.seed = 3;
            let mut r = ptr::null_mut();
            let st = ihosvd_solve(p, method, [2, 2, 2].as_ptr(), ptr::null(), 3, &opts, &mut r);
            assert_eq!(st, IhosvdStatus::Ok, "{}", last_error());
            assert_eq!(ihosvd_result_ndims(r), 3);

            let mut ranks = [0usize; 3];
            assert_eq!(ihosvd_result_ranks(r, ranks.as_mut_ptr(), 3), IhosvdStatus::Ok);
            assert_eq!(ranks, [2, 2, 2]);

            let mut full = vec![0.0; s.truth.len()];
            assert_eq!(ihosvd_result_reconstruct(r, full.as_mut_ptr(), full.len()), IhosvdStatus::Ok);
            let rec = DenseTensor::new(Shape::new(dims.to_vec()).unwrap(), full).unwrap();
            assert!(relative_error(&rec, &s.truth).unwrap() < 1e-5);

            let (mut iters, mut fit) = (0usize, f64::NAN);
            assert_eq!(ihosvd_result_summary(r, &mut iters, &mut fit), IhosvdStatus::Ok);
            assert!(iters > 0 && fit < 1e-5, "{iters} {fit}");

            // factor columns are orthonormal
            let mut a = vec![0.0; 11 * 2];
            assert_eq!(ihosvd_result_factor(r, 1, a.as_mut_ptr(), a.len()), IhosvdStatus::Ok);
            let dot = |i: usize, j: usize| (0..11).map(|k| a[i * 11 + k] * a[j * 11 + k]).sum::<f64>();
            assert!((dot(0, 0) - 1.0).abs() < 1e-10 && dot(0, 1).abs() < 1e-10);

            let mut core = vec![0.0; 8];
            assert_eq!(ihosvd_result_core(r, core.as_mut_ptr(), 8), IhosvdStatus::Ok);
            ihosvd_result_free(r);
        }
        ihosvd_problem_free(p);
    }
}

#[test]
fn rank_increase_through_max_ranks() {
    let dims = [12, 12, 12];
    let s = sampled(&dims, &[2, 2, 2], 0.5, 9);
    unsafe {
        let p = problem(&dims, &s);
        let mut r = ptr::null_mut();
        let st = ihosvd_solve(p, IhosvdMethod::Ihooi, [1, 1, 1].as_ptr(), [4, 4, 4].as_ptr(), 3, ptr::null(), &mut r);
        assert_eq!(st, IhosvdStatus::Ok, "{}", last_error());
        let mut ranks = [0usize; 3];
        assert_eq!(ihosvd_result_ranks(r, ranks.as_mut_ptr(), 3), IhosvdStatus::Ok);
        assert!(ranks.iter().all(|&k| (2..=4).contains(&k)), "{ranks:?}");
        ihosvd_result_free(r);
        ihosvd_problem_free(p);
    }
}

#[test]
fn value_order_follows_indices() {
    let dims = [2, 2];
    // unsorted input, each value equal to its flat position
    let indices = [3usize, 0, 2];
    let values = [3.0, 0.0, 2.0];
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ihosvd_problem_new(dims.as_ptr(), 2, indices.as_ptr(), values.as_ptr(), 3, &mut p), IhosvdStatus::Ok);
        let mut r = ptr::null_mut();
        let mut opts = ihosvd_options_default();
        opts.max_iters = 0;
        assert_eq!(ihosvd_solve(p, IhosvdMethod::Ihooi, [2, 2].as_ptr(), ptr::null(), 2, &opts, &mut r), IhosvdStatus::Ok);
        // full rank with no iterations keeps the observed data exactly
        let mut full = [f64::NAN; 4];
        assert_eq!(ihosvd_result_reconstruct(r, full.as_mut_ptr(), 4), IhosvdStatus::Ok);
        for (k, v) in [(0, 0.0), (2, 2.0), (3, 3.0)] {
            assert!((full[k] - v).abs() < 1e-12, "{full:?}");
        }
        ihosvd_result_free(r);
        ihosvd_problem_free(p);
    }
}

#[test]
fn error_codes() {
    let dims = [3usize, 3];
    unsafe {
        let mut p = ptr::null_mut();
        let st = ihosvd_problem_new(dims.as_ptr(), 2, [1usize, 1].as_ptr(), [0.5, 0.5].as_ptr(), 2, &mut p);
        assert_eq!(st, IhosvdStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(last_error().contains("duplicate"));

        let st = ihosvd_problem_new(dims.as_ptr(), 2, [9usize].as_ptr(), [0.5].as_ptr(), 1, &mut p);
        assert_eq!(st, IhosvdStatus::InvalidArgument);

        let st = ihosvd_problem_new(dims.as_ptr(), 2, [0usize].as_ptr(), [f64::NAN].as_ptr(), 1, &mut p);
        assert_eq!(st, IhosvdStatus::Numerical);

        let st = ihosvd_problem_new(ptr::null(), 2, [0usize].as_ptr(), [1.0].as_ptr(), 1, &mut p);
        assert_eq!(st, IhosvdStatus::NullPointer);
        assert_eq!(last_error(), "dims is null");

        let st = ihosvd_problem_new(dims.as_ptr(), 2, [0usize, 4].as_ptr(), [1.0, 2.0].as_ptr(), 2, ptr::null_mut());
        assert_eq!(st, IhosvdStatus::NullPointer);

        let mut p = ptr::null_mut();
        let st = ihosvd_problem_new(dims.as_ptr(), 2, [0usize, 4, 8].as_ptr(), [1.0, 2.0, 3.0].as_ptr(), 3, &mut p);
        assert_eq!(st, IhosvdStatus::Ok);

        let mut r = ptr::null_mut();
        let st = ihosvd_solve(p, IhosvdMethod::Alsas, [4usize, 1].as_ptr(), ptr::null(), 2, ptr::null(), &mut r);
        assert_eq!(st, IhosvdStatus::InvalidArgument);
        assert!(r.is_null());

        let mut opts = ihosvd_options_default();
        opts.tol = -1.0;
        let st = ihosvd_solve(p, IhosvdMethod::Ihooi, [1usize, 1].as_ptr(), ptr::null(), 2, &opts, &mut r);
        assert_eq!(st, IhosvdStatus::InvalidArgument);
        assert!(last_error().contains("tol"));

        let st = ihosvd_solve(ptr::null(), IhosvdMethod::Ihooi, [1usize, 1].as_ptr(), ptr::null(), 2, ptr::null(), &mut r);
        assert_eq!(st, IhosvdStatus::NullPointer);

        let st = ihosvd_solve(p, IhosvdMethod::Ihooi, [1usize, 1].as_ptr(), ptr::null(), 2, ptr::null(), &mut r);
        assert_eq!(st, IhosvdStatus::Ok);
        let mut small = [0.0; 4];
        assert_eq!(ihosvd_result_reconstruct(r, small.as_mut_ptr(), 4), IhosvdStatus::BufferTooSmall);
        assert_eq!(ihosvd_result_factor(r, 2, small.as_mut_ptr(), 4), IhosvdStatus::InvalidArgument);
        assert_eq!(ihosvd_result_core(r, ptr::null_mut(), 1), IhosvdStatus::NullPointer);
        assert_eq!(ihosvd_result_ranks(ptr::null(), ptr::null_mut(), 0), IhosvdStatus::NullPointer);
        assert_eq!(ihosvd_result_ndims(ptr::null()), 0);
        ihosvd_result_free(r);
        ihosvd_problem_free(p);

        ihosvd_result_free(ptr::null_mut());
        ihosvd_problem_free(ptr::null_mut());
    }
}

#[test]
fn status_strings_are_static() {
    for (s, want) in [
        (IhosvdStatus::Ok, "ok"),
        (IhosvdStatus::BufferTooSmall, "buffer too small"),
        (IhosvdStatus::Panic, "internal panic"),
    ] {
        assert_eq!(unsafe { CStr::from_ptr(ihosvd_status_str(s)) }.to_str().unwrap(), want);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ihosvd.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct IhosvdProblem IhosvdProblem;"));
    assert!(header.contains("IHOSVD_STATUS_BUFFER_TOO_SMALL = 5"));
}

#[test]
fn c_example_links_against_static_library() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("libihosvd_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("complete");
    let out = std::process::Command::new("cc")
        .arg(manifest.join("examples/complete.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("relative error"));
}
