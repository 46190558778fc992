//! C interface to `bregman_lab`.
//!
//! Every function returns a [`BlgStatus`]. On failure a message is available
//! from [`blg_last_error_message`] on the calling thread. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use bregman_lab::bregman::{self, Generator};
use bregman_lab::matrix::{self, MatrixKind, PdMatrix};
use bregman_lab::projection::{self, ProjectionOptions};
use bregman_lab::run::{self, Command};
use bregman_lab::scenario::{load_scenario, Overrides, Scenario, ScenarioError};
use bregman_lab::sets::ConvexSet;
use bregman_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    DimensionMismatch = 4,
    NotPositiveDefinite = 5,
    NoConvergence = 6,
    Parse = 7,
    Validation = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlgMatrixKind {
    Classical = 0,
    Umegaki = 1,
    Quantum = 2,
}

pub struct BlgGenerator(Generator);

pub struct BlgSet(ConvexSet);

pub struct BlgScenario(Scenario);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BlgStatus {
    match e {
        Error::Domain { .. } | Error::DomainExit | Error::LeftSet { .. } => BlgStatus::Domain,
        Error::DimensionMismatch { .. } => BlgStatus::DimensionMismatch,
        Error::NotPositiveDefinite { .. } | Error::NotSymmetric(_) => BlgStatus::NotPositiveDefinite,
        Error::NoProgress { .. }
        | Error::MaxIterations { .. }
        | Error::NoConvergence { .. }
        | Error::NotFoundInBox { .. }
        | Error::InfeasibleModel { .. } => BlgStatus::NoConvergence,
        Error::NotProjectionCapable(_)
        | Error::InvalidArgument(_)
        | Error::EmptySet
        | Error::EmptyModel
        | Error::SamplerFailure(_) => BlgStatus::InvalidArgument,
    }
}

type Outcome = Result<(), (BlgStatus, String)>;

fn fail(e: Error) -> (BlgStatus, String) {
    (status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Outcome) -> BlgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BlgStatus::Internal
        }
    }
}

fn null() -> (BlgStatus, String) {
    (BlgStatus::NullPointer, "null pointer argument".to_string())
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], (BlgStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char) -> Result<&'a str, (BlgStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BlgStatus::InvalidArgument, "string is not UTF-8".to_string()))
}

unsafe fn reference<'a, T>(p: *const T) -> Result<&'a T, (BlgStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread. Valid until the next call.
#[no_mangle]
pub extern "C" fn blg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a generator by identifier (`sq_norm`, `neg_entropy`, `mat_classical`,
/// `mat_umegaki`, `mat_quantum`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn blg_generator_new(
    name: *const c_char,
    dimension: usize,
    out: *mut *mut BlgGenerator,
) -> BlgStatus {
    guard(|| {
        let g = Generator::from_name(string(name)?, dimension).map_err(fail)?;
        write(out, Box::into_raw(Box::new(BlgGenerator(g))))
    })
}

/// # Safety
/// `g` must come from [`blg_generator_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blg_generator_free(g: *mut BlgGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `D_g(x, y)` for vectors of length `len`.
///
/// # Safety
/// `x` and `y` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_bregman_distance(
    g: *const BlgGenerator,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> BlgStatus {
    guard(|| {
        let g = reference(g)?;
        let d = bregman::bregman_distance(&g.0, slice(x, len)?, slice(y, len)?).map_err(fail)?;
        write(out, d)
    })
}

/// Signed residual of the three-point identity.
///
/// # Safety
/// `x`, `y` and `z` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_three_point_residual(
    g: *const BlgGenerator,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> BlgStatus {
    guard(|| {
        let g = reference(g)?;
        let r = bregman::three_point_residual(&g.0, slice(x, len)?, slice(y, len)?, slice(z, len)?).map_err(fail)?;
        write(out, r)
    })
}

/// Closed-form matrix divergence of two symmetric `n × n` matrices in row-major order.
///
/// # Safety
/// `a` and `b` must point to `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_matrix_divergence(
    kind: BlgMatrixKind,
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> BlgStatus {
    guard(|| {
        let kind = match kind {
            BlgMatrixKind::Classical => MatrixKind::Classical,
            BlgMatrixKind::Umegaki => MatrixKind::Umegaki,
            BlgMatrixKind::Quantum => MatrixKind::Quantum,
        };
        let ma = PdMatrix::from_rows(n, slice(a, n * n)?).map_err(fail)?;
        let mb = PdMatrix::from_rows(n, slice(b, n * n)?).map_err(fail)?;
        write(out, matrix::matrix_divergence(kind, &ma, &mb).map_err(fail)?)
    })
}

fn new_set(set: ConvexSet, out: *mut *mut BlgSet) -> Outcome {
    let problems = set.validate();
    if !problems.is_empty() {
        return Err((BlgStatus::InvalidArgument, problems.join("; ")));
    }
    unsafe { write(out, Box::into_raw(Box::new(BlgSet(set)))) }
}

/// # Safety
/// `center` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_set_ball(center: *const f64, len: usize, radius: f64, out: *mut *mut BlgSet) -> BlgStatus {
    guard(|| new_set(ConvexSet::ball(slice(center, len)?.to_vec(), radius), out))
}

/// # Safety
/// `lower` and `upper` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_set_box(
    lower: *const f64,
    upper: *const f64,
    len: usize,
    out: *mut *mut BlgSet,
) -> BlgStatus {
    guard(|| new_set(ConvexSet::cube(slice(lower, len)?.to_vec(), slice(upper, len)?.to_vec()), out))
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn blg_set_simplex(dimension: usize, out: *mut *mut BlgSet) -> BlgStatus {
    guard(|| new_set(ConvexSet::simplex(dimension), out))
}

/// # Safety
/// `s` must come from a `blg_set_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blg_set_free(s: *mut BlgSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Bregman projection of `x` onto `set`. Writes `len` doubles to `out_point`
/// and, when non-null, the sampled certificate violation to `out_certificate`.
///
/// # Safety
/// `x` and `out_point` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blg_bregman_project(
    g: *const BlgGenerator,
    set: *const BlgSet,
    x: *const f64,
    len: usize,
    out_point: *mut f64,
    out_certificate: *mut f64,
) -> BlgStatus {
    guard(|| {
        let (g, set) = (reference(g)?, reference(set)?);
        let x = slice(x, len)?;
        if out_point.is_null() {
            return Err(null());
        }
        let p = projection::bregman_project(&g.0, &set.0, x, &ProjectionOptions::default()).map_err(fail)?;
        std::slice::from_raw_parts_mut(out_point, len).copy_from_slice(&p.point);
        if !out_certificate.is_null() {
            out_certificate.write(p.certificate_violation);
        }
        Ok(())
    })
}

/// Loads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn blg_scenario_load(path: *const c_char, out: *mut *mut BlgScenario) -> BlgStatus {
    guard(|| {
        let sc = load_scenario(Path::new(string(path)?), &Overrides::default()).map_err(|e| {
            let status = match e {
                ScenarioError::Io { .. } => BlgStatus::InvalidArgument,
                ScenarioError::Parse { .. } => BlgStatus::Parse,
                ScenarioError::Validation(_) => BlgStatus::Validation,
            };
            (status, e.to_string())
        })?;
        write(out, Box::into_raw(Box::new(BlgScenario(sc))))
    })
}

/// # Safety
/// `s` must come from [`blg_scenario_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blg_scenario_free(s: *mut BlgScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs a command (`distance`, `project`, `classify`, `barycenter`, `verify`,
/// `all`) and returns the report as JSON, to be released with [`blg_string_free`].
/// `out_exit_code`, when non-null, receives the command-line exit code.
///
/// # Safety
/// `command` must be a NUL-terminated string and `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn blg_run(
    scenario: *const BlgScenario,
    command: *const c_char,
    out_json: *mut *mut c_char,
    out_exit_code: *mut i32,
) -> BlgStatus {
    guard(|| {
        let sc = reference(scenario)?;
        let name = string(command)?;
        let cmd = Command::from_name(name)
            .ok_or_else(|| (BlgStatus::InvalidArgument, format!("unknown command `{name}`")))?;
        let report = run::run(&sc.0, cmd).map_err(|e| (status_of(&e.source), e.to_string()))?;
        let json = CString::new(report.to_json()).map_err(|_| (BlgStatus::Internal, "NUL in report".to_string()))?;
        if !out_exit_code.is_null() {
            out_exit_code.write(report.exit_code());
        }
        write(out_json, json.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
