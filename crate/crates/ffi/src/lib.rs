//! C ABI over the resolution engine.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! fallible call returns an [`RsldStatus`]; on failure the message is
//! available from [`rsld_last_error`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`rsld_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rsld::engine::trace::{to_json, to_text};
use rsld::lab::lowering::check_specialisation_independence;
use rsld::reduction::{reduce_list_goal, ReductionMode};
use rsld::{derive, parse_goal, parse_priority_goal, parse_program, DerivationRecord, DeriveOptions, LoopCheck, Mode, PriorityGoal, Program, Rule, Var};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsldStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidOption = 4,
    EngineError = 5,
    Panic = 6,
}

/// Outcome of a derivation; values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsldOutcome {
    Refuted = 0,
    Failed = 1,
    BoundExceeded = 2,
    Pruned = 3,
}

/// A parsed program.
pub struct RsldProgram(Program);

/// A finished derivation.
pub struct RsldDerivation(DerivationRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RsldStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RsldStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsldStatus::Ok,
        Ok(Err(Failure(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            RsldStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RsldStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(RsldStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(RsldStatus::EngineError, "output contains a nul byte".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(RsldStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn rsld_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn rsld_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rsld_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses program text.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsld_program_parse(text: *const c_char, out: *mut *mut RsldProgram) -> RsldStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(text, "text")?;
        let p = parse_program(text).map_err(|e| Failure(RsldStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(RsldProgram(p)));
        Ok(())
    })
}

/// Number of clauses.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsld_program_len(program: *const RsldProgram) -> usize {
    program.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `program` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rsld_program_free(program: *mut RsldProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Runs one derivation. `mode`, `rule` and `loop_check` take the
/// command-line spellings; null selects `rsld`, `stack` and `off`.
///
/// # Safety
/// Pointers must be valid as described; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsld_derive(
    program: *const RsldProgram,
    goal: *const c_char,
    mode: *const c_char,
    rule: *const c_char,
    loop_check: *const c_char,
    max_steps: usize,
    advancement: bool,
    out: *mut *mut RsldDerivation,
) -> RsldStatus {
    guard(|| {
        check_out(out)?;
        let program = &program.as_ref().ok_or_else(|| Failure(RsldStatus::NullArgument, "program is null".into()))?.0;
        let goal = str_arg(goal, "goal")?;
        let bad = |e: String| Failure(RsldStatus::InvalidOption, e);
        let mode: Mode = opt_str_arg(mode, "mode")?.unwrap_or("rsld").parse().map_err(bad)?;
        let rule: Rule = opt_str_arg(rule, "rule")?.unwrap_or("stack").parse().map_err(|e: rsld::scheduling::ScheduleError| bad(e.to_string()))?;
        let check: LoopCheck = opt_str_arg(loop_check, "loop_check")?.unwrap_or("off").parse().map_err(bad)?;
        let parse_err = |e: rsld::syntax::ParseError| Failure(RsldStatus::ParseError, e.to_string());
        let g = if mode.is_list() { PriorityGoal::from_list(&parse_goal(goal).map_err(parse_err)?) } else { parse_priority_goal(goal).map_err(parse_err)? };
        program.check_atoms(g.iter().map(|a| &a.atom)).map_err(|e| Failure(RsldStatus::ParseError, e.to_string()))?;
        let opts = DeriveOptions::new(mode, rule).max_steps(max_steps).loop_check(check).advancement(advancement);
        let d = derive(program, &g, &opts).map_err(|e| Failure(RsldStatus::EngineError, e.to_string()))?;
        *out = Box::into_raw(Box::new(RsldDerivation(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsld_derivation_outcome(d: *const RsldDerivation) -> RsldOutcome {
    match d.as_ref().map(|d| d.0.status.exit_code()) {
        Some(0) => RsldOutcome::Refuted,
        Some(2) => RsldOutcome::BoundExceeded,
        Some(3) => RsldOutcome::Pruned,
        _ => RsldOutcome::Failed,
    }
}

/// Number of resolution steps.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsld_derivation_len(d: *const RsldDerivation) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Length of the reduced resolvent at stage `stage`, or -1 when out of range.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsld_derivation_reduced_len(d: *const RsldDerivation, stage: usize) -> i64 {
    d.as_ref().and_then(|d| d.0.stages.get(stage)).map_or(-1, |s| s.reduced.len() as i64)
}

/// The trace as JSON (`json` true) or text.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsld_derivation_trace(d: *const RsldDerivation, json: bool, out: *mut *mut c_char) -> RsldStatus {
    guard(|| {
        check_out(out)?;
        let d = &d.as_ref().ok_or_else(|| Failure(RsldStatus::NullArgument, "derivation is null".into()))?.0;
        let s = if json { to_json(d).to_string() } else { to_text(d) };
        out_string(s, out)
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rsld_derivation_free(d: *mut RsldDerivation) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Reduces a list goal, protecting the comma-separated variables in
/// `protect` (may be null). Writes the reduced goal.
///
/// # Safety
/// Strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsld_reduce(goal: *const c_char, protect: *const c_char, exhaustive: bool, out: *mut *mut c_char) -> RsldStatus {
    guard(|| {
        check_out(out)?;
        let g = parse_goal(str_arg(goal, "goal")?).map_err(|e| Failure(RsldStatus::ParseError, e.to_string()))?;
        let protect = opt_str_arg(protect, "protect")?
            .unwrap_or("")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Var::new)
            .collect();
        let mode = if exhaustive { ReductionMode::Exhaustive } else { ReductionMode::Greedy };
        let (n, _) = reduce_list_goal(&g, &protect, mode);
        out_string(n.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "), out)
    })
}

/// Runs the specialisation-independence suite; writes 1 to `passed` when
/// no trial failed.
///
/// # Safety
/// `rule` must be nul-terminated; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rsld_check_spec_independence(rule: *const c_char, trials: u64, seed: u64, passed: *mut i32) -> RsldStatus {
    guard(|| {
        check_out(passed)?;
        let rule: Rule = str_arg(rule, "rule")?.parse().map_err(|e: rsld::scheduling::ScheduleError| Failure(RsldStatus::InvalidOption, e.to_string()))?;
        *passed = i32::from(check_specialisation_independence(&rule, trials, seed).passed());
        Ok(())
    })
}
