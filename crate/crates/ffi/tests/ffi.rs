use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mtbvp_ffi::*;

const LB: &str = "s = 1\nn = 1\na_over_pi = \"1\"\nphi = [\"sin(x)\"]\n[run]\nk = 3\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(mtbvp_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn solve_and_evaluate() {
    let toml = CString::new(LB).unwrap();
    let mut problem = ptr::null_mut();
    let mut solution = ptr::null_mut();
    unsafe {
        assert_eq!(mtbvp_problem_from_toml(toml.as_ptr(), &mut problem), MtbvpStatus::Ok);
        assert_eq!(mtbvp_solve(problem, &mut solution), MtbvpStatus::Ok);
        let mut u = 0.0;
        assert_eq!(mtbvp_solution_eval(solution, std::f64::consts::FRAC_PI_2, -std::f64::consts::PI, 0, 0, &mut u), MtbvpStatus::Ok);
        assert!((u - 1.0).abs() < 1e-10);
        let mut modes = 0;
        assert_eq!(mtbvp_solution_modes(solution, &mut modes), MtbvpStatus::Ok);
        assert_eq!(modes, 1);
        assert_eq!(mtbvp_solution_eval(solution, 5.0, 0.0, 0, 0, &mut u), MtbvpStatus::OutOfDomain);
        assert!(last_error().contains("outside"));
        assert_eq!(mtbvp_solution_eval(solution, 1.0, 0.0, 2, 2, &mut u), MtbvpStatus::OutOfDomain);
        mtbvp_solution_free(solution);
        mtbvp_problem_free(problem);
    }
}

#[test]
fn validation_and_null_pointers() {
    let toml = CString::new("s = 3\nn = 2\na_over_pi = \"1\"\n").unwrap();
    let mut problem = ptr::null_mut();
    unsafe {
        assert_eq!(mtbvp_problem_from_toml(toml.as_ptr(), &mut problem), MtbvpStatus::Validation);
        assert!(problem.is_null());
        assert!(last_error().contains("b = s/n not integer"));
        assert_eq!(mtbvp_problem_from_toml(ptr::null(), &mut problem), MtbvpStatus::NullPointer);
        assert_eq!(mtbvp_solve(ptr::null(), ptr::null_mut()), MtbvpStatus::NullPointer);
        mtbvp_problem_free(ptr::null_mut());
        mtbvp_solution_free(ptr::null_mut());
    }
}

#[test]
fn singular_mode_status() {
    let toml = CString::new("s = 1\nn = 1\na_over_pi = \"1/4\"\nphi = [\"sin(3*x)\"]\n[run]\nk = 4\nsingular_tol = 0.02\n").unwrap();
    let mut problem = ptr::null_mut();
    let mut solution = ptr::null_mut();
    unsafe {
        assert_eq!(mtbvp_problem_from_toml(toml.as_ptr(), &mut problem), MtbvpStatus::Ok);
        assert_eq!(mtbvp_solve(problem, &mut solution), MtbvpStatus::SingularModeWithData);
        assert!(solution.is_null());
        mtbvp_problem_free(problem);
    }
}

#[test]
fn denominator_helpers() {
    unsafe {
        let mut phase = 0.0;
        assert_eq!(mtbvp_classify_phase(4, 1, 1, &mut phase), MtbvpStatus::Ok);
        assert!((phase - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(mtbvp_classify_phase(3, 1, 0, &mut phase), MtbvpStatus::CaseNotTabulated);
        let (mut sep, mut d1) = (0, 0.0);
        assert_eq!(mtbvp_separation_check(1, 3, 4, 1, 1, &mut sep, &mut d1), MtbvpStatus::Ok);
        assert_eq!(sep, 1);
        assert!((d1 - 0.5).abs() < 1e-12);
        assert_eq!(mtbvp_separation_check(1, 2, 4, 1, 1, &mut sep, &mut d1), MtbvpStatus::Ok);
        assert_eq!(sep, 0);
        assert!(d1.is_nan());
        let tau = CString::new("sqrt2").unwrap();
        let mut w = 0.0;
        assert_eq!(mtbvp_diophantine_floor(tau.as_ptr(), 4, 1, 1, 1, 0.5, 10_000, &mut w), MtbvpStatus::Ok);
        assert!(w > 0.0);
        assert_eq!(mtbvp_diophantine_floor(tau.as_ptr(), 4, 1, 1, 1, 2.0, 100, &mut w), MtbvpStatus::Validation);
        let v = CStr::from_ptr(mtbvp_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/mtbvp.h")).unwrap();
    for name in [
        "mtbvp_problem_from_toml",
        "mtbvp_problem_free",
        "mtbvp_solve",
        "mtbvp_solution_eval",
        "mtbvp_solution_free",
        "mtbvp_classify_phase",
        "mtbvp_separation_check",
        "mtbvp_diophantine_floor",
        "mtbvp_last_error_message",
        "mtbvp_version",
        "MTBVP_STATUS_NULL_POINTER",
        "MTBVP_STATUS_OUT_OF_DOMAIN",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles the C example against the header and the static library when
/// a C compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let archive = profile_dir.join("libmtbvp_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no archive at {} or no cc", archive.display());
        return;
    }
    let out = tempfile_path("mtbvp_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&archive)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("u(pi/2,-pi) = 1.000000"));
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
