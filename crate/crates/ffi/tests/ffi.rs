use std::ffi::{CStr, CString};
use std::ptr;

use rsld_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { rsld_string_free(s) };
    out
}

fn last_error() -> String {
    let p = rsld_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn program(text: &str) -> *mut RsldProgram {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rsld_program_parse(c(text).as_ptr(), &mut p) }, RsldStatus::Ok);
    p
}

#[test]
fn growing_resolvents_hit_the_bound() {
    let p = program("p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y).");
    assert_eq!(unsafe { rsld_program_len(p) }, 1);
    let mut d = ptr::null_mut();
    let st = unsafe { rsld_derive(p, c("q, p(x,x)").as_ptr(), ptr::null(), c("odd-even").as_ptr(), ptr::null(), 20, true, &mut d) };
    assert_eq!(st, RsldStatus::Ok);
    unsafe {
        assert_eq!(rsld_derivation_outcome(d), RsldOutcome::BoundExceeded);
        assert_eq!(rsld_derivation_len(d), 20);
        for k in 0..20 {
            assert_eq!(rsld_derivation_reduced_len(d, k), 2 * k as i64 + 2);
        }
        assert_eq!(rsld_derivation_reduced_len(d, 10_000), -1);
        let mut s = ptr::null_mut();
        assert_eq!(rsld_derivation_trace(d, true, &mut s), RsldStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert!(v.is_object());
        rsld_derivation_free(d);
        rsld_program_free(p);
    }
}

#[test]
fn self_loop_is_pruned() {
    let p = program("p <- p.");
    let mut d = ptr::null_mut();
    let st = unsafe { rsld_derive(p, c("p").as_ptr(), c("sld").as_ptr(), ptr::null(), c("evrl").as_ptr(), 100, true, &mut d) };
    assert_eq!(st, RsldStatus::Ok);
    unsafe {
        assert_eq!(rsld_derivation_outcome(d), RsldOutcome::Pruned);
        let mut s = ptr::null_mut();
        assert_eq!(rsld_derivation_trace(d, false, &mut s), RsldStatus::Ok);
        assert!(!take(s).is_empty());
        rsld_derivation_free(d);
        rsld_program_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { rsld_program_parse(c("p <- .q(").as_ptr(), &mut p) }, RsldStatus::ParseError);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { rsld_program_parse(ptr::null(), &mut p) }, RsldStatus::NullArgument);
    assert_eq!(unsafe { rsld_program_parse(c("p.").as_ptr(), ptr::null_mut()) }, RsldStatus::NullArgument);

    let bytes = [0xffu8, 0];
    assert_eq!(unsafe { rsld_program_parse(bytes.as_ptr().cast(), &mut p) }, RsldStatus::InvalidUtf8);

    let p = program("p.");
    let mut d = ptr::null_mut();
    let st = unsafe { rsld_derive(p, c("p").as_ptr(), c("nonsense").as_ptr(), ptr::null(), ptr::null(), 5, true, &mut d) };
    assert_eq!(st, RsldStatus::InvalidOption);
    assert!(last_error().contains("nonsense"));
    let st = unsafe { rsld_derive(p, c("p").as_ptr(), c("psld").as_ptr(), c("odd-even").as_ptr(), ptr::null(), 5, true, &mut d) };
    assert_eq!(st, RsldStatus::EngineError);
    let st = unsafe { rsld_derive(ptr::null(), c("p").as_ptr(), ptr::null(), ptr::null(), ptr::null(), 5, true, &mut d) };
    assert_eq!(st, RsldStatus::NullArgument);
    assert!(d.is_null());
    unsafe { rsld_program_free(p) };
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        rsld_program_free(ptr::null_mut());
        rsld_derivation_free(ptr::null_mut());
        rsld_string_free(ptr::null_mut());
        assert_eq!(rsld_program_len(ptr::null()), 0);
        assert_eq!(rsld_derivation_len(ptr::null()), 0);
    }
}

#[test]
fn reduce_drops_redundant_atoms() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rsld_reduce(c("p(x), p(a)").as_ptr(), ptr::null(), false, &mut s) }, RsldStatus::Ok);
    assert_eq!(take(s), "p(a)");
    assert_eq!(unsafe { rsld_reduce(c("p(x), p(a)").as_ptr(), c("x").as_ptr(), true, &mut s) }, RsldStatus::Ok);
    assert_eq!(take(s), "p(x), p(a)");
}

#[test]
fn spec_independence_check() {
    let mut passed = -1;
    assert_eq!(unsafe { rsld_check_spec_independence(c("stack").as_ptr(), 50, 1, &mut passed) }, RsldStatus::Ok);
    assert_eq!(passed, 1);
    assert_eq!(unsafe { rsld_check_spec_independence(c("center").as_ptr(), 50, 1, &mut passed) }, RsldStatus::Ok);
    assert_eq!(passed, 0);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(rsld_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_lists_the_exports() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rsld.h")).unwrap();
    for f in ["rsld_program_parse", "rsld_derive", "rsld_reduce", "rsld_last_error", "RSLD_STATUS_PANIC"] {
        assert!(h.contains(f), "{f}");
    }
}
