//! C ABI for the mtbvp solver.
//!
//! Every function returns an [`MtbvpStatus`]; on failure the message is
//! available from [`mtbvp_last_error_message`] on the calling thread.
//! Handles are created by the library and must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mtbvp::config::RunConfig;
use mtbvp::denominator::{classify_phase, diophantine_scan, separation_check, Verdict};
use mtbvp::problem::{AOverPi, Ratio};
use mtbvp::series::{solve_problem, SolutionField};
use mtbvp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtbvpStatus {
    Ok = 0,
    Runtime = 1,
    Validation = 2,
    SingularModeWithData = 3,
    CaseNotTabulated = 4,
    NullPointer = 5,
    OutOfDomain = 6,
}

/// Parsed and validated problem with its run controls.
pub struct MtbvpProblem {
    config: RunConfig,
}

/// Solved series.
pub struct MtbvpSolution {
    field: SolutionField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MtbvpStatus {
    match e {
        Error::OutOfDomain { .. } | Error::DerivativeOrder { .. } => MtbvpStatus::OutOfDomain,
        other => match other.exit_code() {
            2 => MtbvpStatus::Validation,
            3 => MtbvpStatus::SingularModeWithData,
            4 => MtbvpStatus::CaseNotTabulated,
            _ => MtbvpStatus::Runtime,
        },
    }
}

fn fail(e: Error) -> MtbvpStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null() -> MtbvpStatus {
    set_error("null pointer argument");
    MtbvpStatus::NullPointer
}

fn guard(body: impl FnOnce() -> MtbvpStatus) -> MtbvpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => {
            if s == MtbvpStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            MtbvpStatus::Runtime
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, MtbvpStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        MtbvpStatus::Validation
    })
}

/// Parses a TOML configuration. Relative `csv:` paths resolve against the
/// current directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_problem_from_toml(toml: *const c_char, out: *mut *mut MtbvpProblem) -> MtbvpStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let text = match str_arg(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = match RunConfig::from_toml_str(text, Path::new(".")) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        if let Err(e) = config.spec.ensure_valid() {
            return fail(e);
        }
        *out = Box::into_raw(Box::new(MtbvpProblem { config }));
        MtbvpStatus::Ok
    })
}

/// # Safety
/// `problem` must come from [`mtbvp_problem_from_toml`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_problem_free(problem: *mut MtbvpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_solve(problem: *const MtbvpProblem, out: *mut *mut MtbvpSolution) -> MtbvpStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let cfg = &(*problem).config;
        match solve_problem(&cfg.spec, &cfg.solve) {
            Ok(field) => {
                *out = Box::into_raw(Box::new(MtbvpSolution { field }));
                MtbvpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `D_x^dx D_y^dy u(x, y)`.
///
/// # Safety
/// `solution` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_solution_eval(
    solution: *const MtbvpSolution,
    x: f64,
    y: f64,
    dx: u32,
    dy: u32,
    out: *mut f64,
) -> MtbvpStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return null();
        }
        match (*solution).field.evaluate(x, y, dx as usize, dy as usize) {
            Ok(v) => {
                *out = v;
                MtbvpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of modes that enter the sum.
///
/// # Safety
/// `solution` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_solution_modes(solution: *const MtbvpSolution, out: *mut u64) -> MtbvpStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return null();
        }
        *out = (*solution).field.modes.len() as u64;
        MtbvpStatus::Ok
    })
}

/// # Safety
/// `solution` must come from [`mtbvp_solve`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_solution_free(solution: *mut MtbvpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Phase of the asymptotic denominator in radians.
///
/// # Safety
/// `phase_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_classify_phase(two_n: u32, gamma: u32, q: u32, phase_out: *mut f64) -> MtbvpStatus {
    guard(|| {
        if phase_out.is_null() {
            return null();
        }
        match classify_phase(two_n as usize, gamma, q as usize) {
            Ok(p) => {
                *phase_out = p.phase.value();
                MtbvpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Separation check for `a/pi = num/den`. `separated` receives 1 or 0 and
/// `delta1` the bound (NaN when not separated).
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_separation_check(
    num: u64,
    den: u64,
    two_n: u32,
    gamma: u32,
    q: u32,
    separated: *mut i32,
    delta1: *mut f64,
) -> MtbvpStatus {
    guard(|| {
        if separated.is_null() || delta1.is_null() {
            return null();
        }
        let Some(r) = Ratio::new(num, den) else {
            set_error("a/pi must be a positive ratio");
            return MtbvpStatus::Validation;
        };
        let phase = match classify_phase(two_n as usize, gamma, q as usize) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match separation_check(&AOverPi::Rational(r), &phase) {
            Ok(s) => {
                *separated = (s.verdict == Verdict::Separated) as i32;
                *delta1 = s.delta1.unwrap_or(f64::NAN);
                MtbvpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Minimum of `k^(b + b eps) |sin(pi k^b tau + phase)|` over `k <= k_max`
/// for a tagged irrational `tau` such as `"sqrt2"`.
///
/// # Safety
/// `tau` must be a NUL-terminated string; `min_w` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtbvp_diophantine_floor(
    tau: *const c_char,
    two_n: u32,
    gamma: u32,
    q: u32,
    b: u32,
    epsilon: f64,
    k_max: u64,
    min_w: *mut f64,
) -> MtbvpStatus {
    guard(|| {
        if min_w.is_null() {
            return null();
        }
        let tau = match str_arg(tau) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let run = || -> mtbvp::Result<f64> {
            let phase = classify_phase(two_n as usize, gamma, q as usize)?;
            let tau = AOverPi::parse(&format!("irrational:{tau}"))?;
            Ok(diophantine_scan(&tau, b as usize, epsilon, &phase, k_max as usize)?.min_w)
        };
        match run() {
            Ok(v) => {
                *min_w = v;
                MtbvpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn mtbvp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn mtbvp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
