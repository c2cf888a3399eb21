//! C ABI for the recovery library: opaque handles, status codes, and JSON
//! bridges, so other languages can generate instances, run the solvers, and
//! read results without touching Rust types.
//!
//! Ownership rules: every `*_generate`/`*_from_json`/`ranklift_solve` call
//! that returns `RANKLIFT_STATUS_OK` hands the caller a handle that must be
//! released with the matching `*_free`; strings returned through out
//! parameters are released with `ranklift_string_free`. Handles are not
//! thread-safe to mutate but may be shared read-only across threads.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ranklift::model::{
    AnyInstance, CorruptionMode, InstanceParams, NoiseModel, OutlierModel, SeedTriple, TruthKind,
};
use ranklift::solvers::{
    solve_nonconvex, solve_phaselift, solve_toeplitz, solve_wf, ConvexConfig, NonconvexConfig,
    ResultJson, SolverId, WfConfig,
};
use ranklift::{Error, Scalar};

/// Pass as `t_max` to use the solver's default iteration budget.
pub const RANKLIFT_TMAX_DEFAULT: u64 = u64::MAX;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankliftStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    Utf8Error = 4,
    JsonError = 5,
}

/// Ground-truth family for generated instances.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankliftKind {
    /// Real `X0 = U0 U0'` with i.i.d. standard Gaussian factor.
    GaussianFactor = 0,
    /// Complex Hermitian Toeplitz PSD truth from a random Vandermonde form.
    ToeplitzVandermonde = 1,
}

/// Outlier value model; `a`/`b` parameters are per model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankliftOutlierModel {
    /// `beta = +-a` with equiprobable signs.
    RademacherScaled = 0,
    /// `beta ~ N(0, a^2)`.
    AdditiveGaussian = 1,
    /// `|beta| ~ Unif[a, b]` with a random sign.
    UniformAmplitude = 2,
}

/// Solver selector, matching the CLI names.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankliftSolver {
    Nonconvex = 0,
    Wf = 1,
    Phaselift = 2,
    Toeplitz = 3,
}

/// Parameters for `ranklift_instance_generate`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RankliftGenParams {
    pub n: u64,
    pub m: u64,
    pub r: u64,
    pub kind: RankliftKind,
    /// Fraction of measurements hit by outliers, in [0, 1).
    pub outlier_fraction: f64,
    pub outlier_model: RankliftOutlierModel,
    /// First model parameter (amplitude, sigma, or lower bound).
    pub outlier_a: f64,
    /// Second model parameter (upper bound; unused otherwise).
    pub outlier_b: f64,
    /// Half-width of the uniform entrywise noise; 0 disables it.
    pub noise_half_width: f64,
    /// Replace corrupted measurements instead of adding to them.
    pub replace_outliers: bool,
    /// Master seed; the three internal streams derive from it.
    pub seed: u64,
}

/// Opaque problem instance.
pub struct RankliftInstance {
    inner: AnyInstance,
}

/// Opaque recovery result.
pub struct RankliftResult {
    json: ResultJson,
}

fn status_of(err: &Error) -> RankliftStatus {
    match err {
        Error::InvalidSpec(_) | Error::DimensionMismatch(_) | Error::ZeroReference => {
            RankliftStatus::InvalidArgument
        }
        Error::Json(_) | Error::SchemaVersion { .. } | Error::MalformedData(_) => {
            RankliftStatus::JsonError
        }
        _ => RankliftStatus::NumericalFailure,
    }
}

fn guarded(body: impl FnOnce() -> RankliftStatus) -> RankliftStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => RankliftStatus::NumericalFailure,
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> RankliftStatus {
    if out.is_null() {
        return RankliftStatus::NullArgument;
    }
    *out = Box::into_raw(Box::new(value));
    RankliftStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ranklift_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Generate an instance from explicit parameters.
///
/// # Safety
/// `out` must be a valid pointer; on `RANKLIFT_STATUS_OK` it receives a
/// handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn ranklift_instance_generate(
    params: RankliftGenParams,
    out: *mut *mut RankliftInstance,
) -> RankliftStatus {
    guarded(|| {
        let kind = match params.kind {
            RankliftKind::GaussianFactor => TruthKind::GaussianFactor,
            RankliftKind::ToeplitzVandermonde => TruthKind::ToeplitzVandermonde,
        };
        let outlier_model = match params.outlier_model {
            RankliftOutlierModel::RademacherScaled => OutlierModel::RademacherScaled {
                amplitude: params.outlier_a,
            },
            RankliftOutlierModel::AdditiveGaussian => OutlierModel::AdditiveGaussian {
                sigma: params.outlier_a,
            },
            RankliftOutlierModel::UniformAmplitude => OutlierModel::UniformAmplitude {
                lo: params.outlier_a,
                hi: params.outlier_b,
            },
        };
        let instance_params = InstanceParams {
            n: params.n as usize,
            m: params.m as usize,
            r: params.r as usize,
            kind,
            outlier_fraction: params.outlier_fraction,
            outlier_model,
            noise_model: if params.noise_half_width > 0.0 {
                NoiseModel::UniformEntrywise {
                    half_width: params.noise_half_width,
                }
            } else {
                NoiseModel::None
            },
            mode: if params.replace_outliers {
                CorruptionMode::Replace
            } else {
                CorruptionMode::Additive
            },
            seeds: SeedTriple::derive(params.seed),
        };
        let built = if kind.is_complex() {
            ranklift::model::make_instance::<ranklift::num_complex::Complex64>(&instance_params)
                .map(AnyInstance::Complex)
        } else {
            ranklift::model::make_instance::<f64>(&instance_params).map(AnyInstance::Real)
        };
        match built {
            Ok(inner) => unsafe { write_out(out, RankliftInstance { inner }) },
            Err(e) => status_of(&e),
        }
    })
}

/// Parse an instance from its JSON form (the `gen` file format).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` as in
/// `ranklift_instance_generate`.
#[no_mangle]
pub unsafe extern "C" fn ranklift_instance_from_json(
    json: *const c_char,
    out: *mut *mut RankliftInstance,
) -> RankliftStatus {
    guarded(|| {
        if json.is_null() {
            return RankliftStatus::NullArgument;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => return RankliftStatus::Utf8Error,
        };
        let parsed: ranklift::model::InstanceJson = match serde_json::from_str(text) {
            Ok(p) => p,
            Err(_) => return RankliftStatus::JsonError,
        };
        match AnyInstance::from_json(&parsed) {
            Ok(inner) => unsafe { write_out(out, RankliftInstance { inner }) },
            Err(e) => status_of(&e),
        }
    })
}

/// Serialize an instance to JSON (caller frees via `ranklift_string_free`).
///
/// # Safety
/// `instance` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ranklift_instance_to_json(
    instance: *const RankliftInstance,
    out: *mut *mut c_char,
) -> RankliftStatus {
    guarded(|| {
        if instance.is_null() || out.is_null() {
            return RankliftStatus::NullArgument;
        }
        let json = unsafe { &*instance }.inner.to_json();
        match serde_json::to_string_pretty(&json)
            .ok()
            .and_then(|s| CString::new(s).ok())
        {
            Some(s) => {
                unsafe { *out = s.into_raw() };
                RankliftStatus::Ok
            }
            None => RankliftStatus::JsonError,
        }
    })
}

/// Problem dimensions of an instance.
///
/// # Safety
/// All pointers must be valid; `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranklift_instance_dims(
    instance: *const RankliftInstance,
    n: *mut u64,
    m: *mut u64,
    r: *mut u64,
) -> RankliftStatus {
    guarded(|| {
        if instance.is_null() || n.is_null() || m.is_null() || r.is_null() {
            return RankliftStatus::NullArgument;
        }
        let inst = unsafe { &*instance };
        unsafe {
            *n = inst.inner.n() as u64;
            *m = inst.inner.m() as u64;
            *r = inst.inner.rank() as u64;
        }
        RankliftStatus::Ok
    })
}

/// Release an instance handle (accepts NULL).
///
/// # Safety
/// `instance` must be NULL or a handle returned by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ranklift_instance_free(instance: *mut RankliftInstance) {
    if !instance.is_null() {
        drop(unsafe { Box::from_raw(instance) });
    }
}

fn run_solver<S: Scalar>(
    inst: &ranklift::model::Instance<S>,
    solver: SolverId,
    rank_guess: usize,
    t_max: usize,
) -> Result<ResultJson, Error> {
    let config_echo = serde_json::json!({
        "solver": solver.as_str(),
        "rank_guess": rank_guess,
        "t_max": t_max,
    });
    let result = match solver {
        SolverId::Nonconvex => {
            solve_nonconvex(inst, &NonconvexConfig::new(rank_guess).with_t_max(t_max))
        }
        SolverId::Wf => solve_wf(inst, &WfConfig::new(rank_guess).with_t_max(t_max)),
        SolverId::Phaselift => solve_phaselift(inst, &ConvexConfig::new().with_t_max(t_max)),
        SolverId::Toeplitz => {
            solve_toeplitz(inst, &ConvexConfig::new().toeplitz().with_t_max(t_max))
        }
    }?;
    Ok(result.to_json(solver, inst, rank_guess, config_echo))
}

/// Run a solver. `rank_guess = 0` uses the instance's truth rank;
/// `t_max = RANKLIFT_TMAX_DEFAULT` uses the solver default. A diverged run
/// still returns `RANKLIFT_STATUS_OK` with a result whose `diverged` flag
/// is set (recovery failure is data).
///
/// # Safety
/// `instance` must be a live handle and `out` a valid pointer; the returned
/// result handle is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn ranklift_solve(
    instance: *const RankliftInstance,
    solver: RankliftSolver,
    rank_guess: u64,
    t_max: u64,
    out: *mut *mut RankliftResult,
) -> RankliftStatus {
    guarded(|| {
        if instance.is_null() || out.is_null() {
            return RankliftStatus::NullArgument;
        }
        let inst = unsafe { &*instance };
        let solver = match solver {
            RankliftSolver::Nonconvex => SolverId::Nonconvex,
            RankliftSolver::Wf => SolverId::Wf,
            RankliftSolver::Phaselift => SolverId::Phaselift,
            RankliftSolver::Toeplitz => SolverId::Toeplitz,
        };
        if solver == SolverId::Toeplitz && !matches!(inst.inner, AnyInstance::Complex(_)) {
            return RankliftStatus::InvalidArgument;
        }
        let guess = if rank_guess == 0 {
            inst.inner.rank()
        } else {
            rank_guess as usize
        };
        let budget = if t_max == RANKLIFT_TMAX_DEFAULT {
            solver.default_t_max()
        } else {
            t_max as usize
        };
        let solved = match &inst.inner {
            AnyInstance::Real(i) => run_solver(i, solver, guess, budget),
            AnyInstance::Complex(i) => run_solver(i, solver, guess, budget),
        };
        match solved {
            Ok(json) => unsafe { write_out(out, RankliftResult { json }) },
            Err(Error::Diverged { iteration }) => {
                let (n, m, r) = (inst.inner.n(), inst.inner.m(), inst.inner.rank());
                let json = ResultJson {
                    schema_version: ranklift::SCHEMA_VERSION.to_string(),
                    solver,
                    n,
                    m,
                    truth_rank: r,
                    rank_guess: guess,
                    is_complex: matches!(inst.inner, AnyInstance::Complex(_)),
                    seeds: match &inst.inner {
                        AnyInstance::Real(i) => i.seeds,
                        AnyInstance::Complex(i) => i.seeds,
                    },
                    diverged: true,
                    iterations_run: iteration,
                    rel_error: None,
                    sq_error: None,
                    wall_time_s: 0.0,
                    step_source: None,
                    objective_history: vec![],
                    estimate_kind: "none".to_string(),
                    estimate_cols: 0,
                    estimate_entries: vec![],
                    config: serde_json::Value::Null,
                };
                unsafe { write_out(out, RankliftResult { json }) }
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Relative recovery error against the ground truth; NaN when the run
/// diverged or the truth is zero.
///
/// # Safety
/// `result` must be a live handle; `rel_error` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ranklift_result_rel_error(
    result: *const RankliftResult,
    rel_error: *mut f64,
) -> RankliftStatus {
    guarded(|| {
        if result.is_null() || rel_error.is_null() {
            return RankliftStatus::NullArgument;
        }
        unsafe { *rel_error = (*result).json.rel_error.unwrap_or(f64::NAN) };
        RankliftStatus::Ok
    })
}

/// Whether the run hit the divergence guard.
///
/// # Safety
/// `result` must be a live handle; `diverged` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ranklift_result_diverged(
    result: *const RankliftResult,
    diverged: *mut bool,
) -> RankliftStatus {
    guarded(|| {
        if result.is_null() || diverged.is_null() {
            return RankliftStatus::NullArgument;
        }
        unsafe { *diverged = (*result).json.diverged };
        RankliftStatus::Ok
    })
}

/// Serialize a result to JSON (caller frees via `ranklift_string_free`).
///
/// # Safety
/// `result` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ranklift_result_to_json(
    result: *const RankliftResult,
    out: *mut *mut c_char,
) -> RankliftStatus {
    guarded(|| {
        if result.is_null() || out.is_null() {
            return RankliftStatus::NullArgument;
        }
        match serde_json::to_string_pretty(&unsafe { &*result }.json)
            .ok()
            .and_then(|s| CString::new(s).ok())
        {
            Some(s) => {
                unsafe { *out = s.into_raw() };
                RankliftStatus::Ok
            }
            None => RankliftStatus::JsonError,
        }
    })
}

/// Release a result handle (accepts NULL).
///
/// # Safety
/// `result` must be NULL or a handle returned by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ranklift_result_free(result: *mut RankliftResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Release a string returned by the `*_to_json` functions (accepts NULL).
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ranklift_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
