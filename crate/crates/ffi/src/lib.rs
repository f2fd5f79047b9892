//! C interface to the `ihosvd` completion solvers.
//!
//! A caller builds an [`IhosvdProblem`] from a shape and a list of observed
//! entries, runs [`ihosvd_solve`] to get an [`IhosvdResult`], then copies
//! out whatever it needs. Both handles are opaque and must be released with
//! their `_free` function. Tensors cross the boundary as flat `double`
//! arrays with the first index varying fastest; factor matrices are
//! column-major.
//!
//! Every fallible function returns an [`IhosvdStatus`]. On failure the
//! detailed message for the calling thread is available through
//! [`ihosvd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use ihosvd::solvers::{alsas_solve, ihooi_solve, MaskedData, RankStrategy, SolveOutput, SolverConfig};
use ihosvd::{Error, ObservationMask, Shape};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IhosvdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IhosvdMethod {
    Ihooi = 0,
    Alsas = 1,
}

/// Solver settings. Start from [`ihosvd_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IhosvdOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Wall-clock budget; zero or negative means unlimited.
    pub max_seconds: f64,
    pub seed: u64,
    /// Relative fit improvement below which a rank is increased. Only used
    /// when maximum ranks are passed to [`ihosvd_solve`].
    pub fit_stall_threshold: f64,
    pub rank_step: usize,
}

/// Observed entries of a tensor.
pub struct IhosvdProblem {
    data: MaskedData,
}

/// Fitted Tucker model plus solver diagnostics.
pub struct IhosvdResult {
    out: SolveOutput,
    observed_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IhosvdStatus {
    match e {
        Error::DimensionMismatch(_) | Error::ShapeMismatch { .. } => IhosvdStatus::DimensionMismatch,
        e if e.is_numerical() => IhosvdStatus::Numerical,
        _ => IhosvdStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), IhosvdStatus>) -> IhosvdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IhosvdStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            IhosvdStatus::Panic
        }
    }
}

fn fail(e: Error) -> IhosvdStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> IhosvdStatus {
    set_error(format!("{what} is null"));
    IhosvdStatus::NullPointer
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], IhosvdStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], IhosvdStatus> {
    if len < need {
        set_error(format!("{what} holds {len} elements, {need} required"));
        return Err(IhosvdStatus::BufferTooSmall);
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

unsafe fn result_ref<'a>(r: *const IhosvdResult) -> Result<&'a IhosvdResult, IhosvdStatus> {
    r.as_ref().ok_or_else(|| null("result"))
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ihosvd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ihosvd_status_str(status: IhosvdStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        IhosvdStatus::Ok => b"ok\0",
        IhosvdStatus::NullPointer => b"null pointer\0",
        IhosvdStatus::InvalidArgument => b"invalid argument\0",
        IhosvdStatus::DimensionMismatch => b"dimension mismatch\0",
        IhosvdStatus::Numerical => b"numerical failure\0",
        IhosvdStatus::BufferTooSmall => b"buffer too small\0",
        IhosvdStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ihosvd_options_default() -> IhosvdOptions {
    let base = SolverConfig::fixed(Vec::new());
    IhosvdOptions {
        tol: base.tol,
        max_iters: base.max_iters,
        max_seconds: 0.0,
        seed: base.seed,
        fit_stall_threshold: 1e-2,
        rank_step: 1,
    }
}

/// Builds a problem from `n_obs` observed entries of a tensor with
/// dimensions `dims[0..ndims]`. `indices` are flat positions (first index
/// fastest), `values` the data at those positions.
///
/// # Safety
/// `dims`, `indices` and `values` must point to arrays of the stated
/// lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_problem_new(
    dims: *const usize,
    ndims: usize,
    indices: *const usize,
    values: *const f64,
    n_obs: usize,
    out: *mut *mut IhosvdProblem,
) -> IhosvdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let dims = input(dims, ndims, "dims")?;
        let indices = input(indices, n_obs, "indices")?;
        let values = input(values, n_obs, "values")?;
        let shape = Shape::new(dims.to_vec()).map_err(fail)?;
        // the mask sorts its indices, so the values are keyed by position first
        let mut pairs: Vec<(usize, f64)> = indices.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        let mask = ObservationMask::new(shape, pairs.iter().map(|p| p.0).collect()).map_err(fail)?;
        let vals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let data = MaskedData::from_values(mask, &vals).map_err(fail)?;
        *out = Box::into_raw(Box::new(IhosvdProblem { data }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`ihosvd_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_problem_free(p: *mut IhosvdProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Fits a Tucker model to the observed entries.
///
/// With `max_ranks` null the ranks stay fixed at `ranks`. Otherwise `ranks`
/// is the starting point and each mode may grow up to `max_ranks`.
///
/// # Safety
/// `problem` must be a live handle; `ranks` (and `max_ranks` if non-null)
/// must hold `nranks` entries; `options` may be null for defaults; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_solve(
    problem: *const IhosvdProblem,
    method: IhosvdMethod,
    ranks: *const usize,
    max_ranks: *const usize,
    nranks: usize,
    options: *const IhosvdOptions,
    out: *mut *mut IhosvdResult,
) -> IhosvdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let problem = problem.as_ref().ok_or_else(|| null("problem"))?;
        let opts = options.as_ref().copied().unwrap_or_else(|| ihosvd_options_default());
        let start = input(ranks, nranks, "ranks")?.to_vec();
        let strategy = if max_ranks.is_null() {
            RankStrategy::Fixed(start)
        } else {
            RankStrategy::Increasing {
                start,
                max: input(max_ranks, nranks, "max_ranks")?.to_vec(),
                delta: opts.rank_step,
                fit_stall_threshold: opts.fit_stall_threshold,
            }
        };
        let config = SolverConfig {
            tol: opts.tol,
            max_iters: opts.max_iters,
            max_seconds: if opts.max_seconds > 0.0 { opts.max_seconds } else { f64::INFINITY },
            rank_strategy: strategy,
            seed: opts.seed,
        };
        let solved = match method {
            IhosvdMethod::Ihooi => ihooi_solve(&problem.data, &config),
            IhosvdMethod::Alsas => alsas_solve(&problem.data, &config),
        };
        let result = IhosvdResult {
            out: solved.map_err(fail)?,
            observed_norm: problem.data.observed_norm(),
        };
        *out = Box::into_raw(Box::new(result));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from [`ihosvd_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_free(r: *mut IhosvdResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of modes of the fitted model.
///
/// # Safety
/// `r` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_ndims(r: *const IhosvdResult) -> usize {
    r.as_ref().map_or(0, |r| r.out.model.factors.len())
}

/// Writes the final multilinear rank into `buf[0..ndims]`.
///
/// # Safety
/// `r` must be a live result handle and `buf` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_ranks(r: *const IhosvdResult, buf: *mut usize, len: usize) -> IhosvdStatus {
    guard(|| {
        let ranks = result_ref(r)?.out.model.ranks();
        output(buf, len, ranks.len(), "buf")?.copy_from_slice(&ranks);
        Ok(())
    })
}

/// Writes the full reconstruction (product of the dimensions entries).
///
/// # Safety
/// `r` must be a live result handle and `buf` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_reconstruct(r: *const IhosvdResult, buf: *mut f64, len: usize) -> IhosvdStatus {
    guard(|| {
        let t = result_ref(r)?.out.model.reconstruct();
        output(buf, len, t.len(), "buf")?.copy_from_slice(t.data());
        Ok(())
    })
}

/// Writes the core tensor (product of the ranks entries).
///
/// # Safety
/// `r` must be a live result handle and `buf` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_core(r: *const IhosvdResult, buf: *mut f64, len: usize) -> IhosvdStatus {
    guard(|| {
        let core = &result_ref(r)?.out.model.core;
        output(buf, len, core.len(), "buf")?.copy_from_slice(core.data());
        Ok(())
    })
}

/// Writes factor `mode` column-major (dimension × rank entries).
///
/// # Safety
/// `r` must be a live result handle and `buf` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_factor(
    r: *const IhosvdResult,
    mode: usize,
    buf: *mut f64,
    len: usize,
) -> IhosvdStatus {
    guard(|| {
        let factors = &result_ref(r)?.out.model.factors;
        let a = factors.get(mode).ok_or_else(|| {
            fail(Error::ModeOutOfRange {
                mode,
                ndims: factors.len(),
            })
        })?;
        output(buf, len, a.data().len(), "buf")?.copy_from_slice(a.data());
        Ok(())
    })
}

/// Iterations run and the final relative fit on the observed entries.
///
/// # Safety
/// `r` must be a live result handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn ihosvd_result_summary(
    r: *const IhosvdResult,
    iterations: *mut usize,
    relative_fit: *mut f64,
) -> IhosvdStatus {
    guard(|| {
        let r = result_ref(r)?;
        let trace = &r.out.trace;
        if let Some(it) = iterations.as_mut() {
            *it = trace.len();
        }
        if let Some(f) = relative_fit.as_mut() {
            let fit = trace.last().map_or(trace.initial_fit, |rec| rec.fit);
            *f = if r.observed_norm > 0.0 { fit / r.observed_norm } else { fit };
        }
        Ok(())
    })
}
