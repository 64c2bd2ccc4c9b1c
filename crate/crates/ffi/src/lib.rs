//! C interface to the cut-elimination machines.
//!
//! Terms and runs live behind opaque handles. Every handle returned through
//! an out-pointer is owned by the caller and released with the matching
//! `_free` function. Fallible calls return a [`SesameStatus`]; on failure the
//! message is kept per thread and read with [`sesame_last_error`].
//!
//! Panics never cross the boundary: they are caught and reported as
//! [`SesameStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sesame_core::bam::{self, BamError};
use sesame_core::families::FamilySpec;
use sesame_core::metrics::RunMetrics;
use sesame_core::names::alpha_eq;
use sesame_core::oracle::{self, Mode, Policy};
use sesame_core::sesame::{self, SesameError};
use sesame_core::syntax::{parse, print, Style};
use sesame_core::term::Term;
use sesame_core::typing::is_typable;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SesameStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Improper = 4,
    Clash = 5,
    StepLimit = 6,
    OpenTerm = 7,
    UnknownFamily = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SesameMachine {
    /// The strong machine; accepts open terms.
    Sesame = 0,
    /// The basic machine; closed terms only.
    Bam = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SesameOracleMode {
    GoodFull = 0,
    GoodNonErasing = 1,
    BasicNonErasing = 2,
}

/// Transition counts of a finished run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SesameMetrics {
    pub transitions: u64,
    pub principal: u64,
    pub search: u64,
    pub multiplicative: u64,
    pub exponential: u64,
    pub initial_size: u64,
    pub max_copied_value_size: u64,
    pub elapsed_ns: u64,
}

/// Opaque term handle.
pub struct SesameTerm(Term);

/// Opaque handle on a finished machine run.
pub struct SesameRun {
    metrics: RunMetrics,
    transitions: u64,
    result: Term,
    readback: Term,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Outcome<T> = Result<T, (SesameStatus, String)>;

/// Runs `f`, catching panics and recording the error message.
fn guard(f: impl FnOnce() -> Outcome<()>) -> SesameStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SesameStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            SesameStatus::Panic
        }
    }
}

fn null(what: &str) -> (SesameStatus, String) {
    (SesameStatus::NullArgument, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Outcome<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (SesameStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn read_term<'a>(t: *const SesameTerm, what: &str) -> Outcome<&'a Term> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Outcome<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn sesame_failure(e: SesameError) -> (SesameStatus, String) {
    let status = match &e {
        SesameError::Improper(_) => SesameStatus::Improper,
        SesameError::Clash(_) | SesameError::ClashHalt { .. } => SesameStatus::Clash,
        SesameError::StepLimitExceeded { .. } => SesameStatus::StepLimit,
        SesameError::InternalInvariant(_) => SesameStatus::Internal,
    };
    (status, e.to_string())
}

fn bam_failure(e: BamError) -> (SesameStatus, String) {
    let status = match &e {
        BamError::Improper(_) => SesameStatus::Improper,
        BamError::Clash(_) | BamError::ClashHalt { .. } => SesameStatus::Clash,
        BamError::StepLimitExceeded { .. } => SesameStatus::StepLimit,
        BamError::OpenTerm(_) | BamError::UnboundVariable(_) => SesameStatus::OpenTerm,
    };
    (status, e.to_string())
}

fn limit(step_limit: u64) -> usize {
    usize::try_from(step_limit).unwrap_or(usize::MAX)
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sesame_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an ASCII or Unicode term.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_parse(src: *const c_char, out: *mut *mut SesameTerm) -> SesameStatus {
    guard(|| {
        let src = read_str(src, "src")?;
        let t = parse(src).map_err(|e| (SesameStatus::Syntax, e.to_string()))?;
        write_out(out, SesameTerm(t))
    })
}

/// Builds a member of a term family, e.g. `sigma:3` or `cutpi:3,4`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_family(spec: *const c_char, out: *mut *mut SesameTerm) -> SesameStatus {
    guard(|| {
        let spec: FamilySpec = read_str(spec, "spec")?
            .parse()
            .map_err(|e: sesame_core::families::FamilyError| (SesameStatus::UnknownFamily, e.to_string()))?;
        write_out(out, SesameTerm(spec.generate()))
    })
}

/// # Safety
/// `term` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_free(term: *mut SesameTerm) {
    if !term.is_null() {
        drop(Box::from_raw(term));
    }
}

/// Prints a term; release the string with [`sesame_string_free`]. Null on a
/// null handle.
///
/// # Safety
/// `term` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_to_string(term: *const SesameTerm, unicode: bool) -> *mut c_char {
    match term.as_ref() {
        Some(t) => to_c_string(print(&t.0, if unicode { Style::Unicode } else { Style::Ascii })),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sesame_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Node count of a term; 0 on a null handle.
///
/// # Safety
/// `term` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_size(term: *const SesameTerm) -> u64 {
    term.as_ref().map_or(0, |t| t.0.size() as u64)
}

/// # Safety
/// `term` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_is_typable(term: *const SesameTerm) -> bool {
    term.as_ref().is_some_and(|t| is_typable(&t.0))
}

/// Equality up to renaming of bound variables.
///
/// # Safety
/// Both handles must be null or live.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_alpha_eq(a: *const SesameTerm, b: *const SesameTerm) -> bool {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => alpha_eq(&a.0, &b.0),
        _ => false,
    }
}

/// Removes every cut of a term, as done at the end of a strong run.
///
/// # Safety
/// `term` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_term_gc(term: *const SesameTerm, out: *mut *mut SesameTerm) -> SesameStatus {
    guard(|| {
        let t = read_term(term, "term")?;
        write_out(out, SesameTerm(sesame::gc(t)))
    })
}

/// Runs a machine to its final state.
///
/// # Safety
/// `term` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_run(
    term: *const SesameTerm,
    machine: SesameMachine,
    step_limit: u64,
    out: *mut *mut SesameRun,
) -> SesameStatus {
    guard(|| {
        let t = read_term(term, "term")?;
        let run = match machine {
            SesameMachine::Sesame => {
                let r = sesame::run(t, limit(step_limit)).map_err(sesame_failure)?;
                SesameRun {
                    transitions: r.transitions.len() as u64,
                    result: r.result(),
                    readback: r.readback(),
                    metrics: r.state.metrics,
                }
            }
            SesameMachine::Bam => {
                let r = bam::run(t, limit(step_limit)).map_err(bam_failure)?;
                let answer = r.state.readback();
                SesameRun {
                    transitions: r.transitions.len() as u64,
                    result: answer.clone(),
                    readback: answer,
                    metrics: r.state.metrics,
                }
            }
        };
        write_out(out, run)
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sesame_run_free(run: *mut SesameRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Fills `out` with the counts of a run.
///
/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_run_metrics(run: *const SesameRun, out: *mut SesameMetrics) -> SesameStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = &r.metrics;
        *out = SesameMetrics {
            transitions: r.transitions,
            principal: m.principal_total(),
            search: m.search_total(),
            multiplicative: m.multiplicative_total(),
            exponential: m.exponential_total(),
            initial_size: m.initial_size as u64,
            max_copied_value_size: m.max_copied_value_size as u64,
            elapsed_ns: u64::try_from(m.elapsed.as_nanos()).unwrap_or(u64::MAX),
        };
        Ok(())
    })
}

/// The result of a run: garbage collected for the strong machine, the answer
/// as is for the basic one. A new handle the caller owns.
///
/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_run_result(run: *const SesameRun, out: *mut *mut SesameTerm) -> SesameStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        write_out(out, SesameTerm(r.result.clone()))
    })
}

/// The read-back of the final state, before garbage collection.
///
/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sesame_run_readback(run: *const SesameRun, out: *mut *mut SesameTerm) -> SesameStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        write_out(out, SesameTerm(r.readback.clone()))
    })
}

/// Normalizes with the rewriting oracle, leftmost first. `steps` may be
/// null.
///
/// # Safety
/// `term` must be a live handle, `out` a valid pointer and `steps` null or
/// valid.
#[no_mangle]
pub unsafe extern "C" fn sesame_normalize(
    term: *const SesameTerm,
    mode: SesameOracleMode,
    step_limit: u64,
    out: *mut *mut SesameTerm,
    steps: *mut u64,
) -> SesameStatus {
    guard(|| {
        let t = read_term(term, "term")?;
        let mode = match mode {
            SesameOracleMode::GoodFull => Mode::GoodFull,
            SesameOracleMode::GoodNonErasing => Mode::GoodNonErasing,
            SesameOracleMode::BasicNonErasing => Mode::BasicNonErasing,
        };
        let n = oracle::normalize(t, mode, Policy::Leftmost, limit(step_limit)).map_err(|e| {
            let status = match e {
                oracle::OracleError::StepLimitExceeded { .. } => SesameStatus::StepLimit,
                oracle::OracleError::ClashEncountered { .. } => SesameStatus::Clash,
                oracle::OracleError::StaleRedex(_) => SesameStatus::Internal,
            };
            (status, e.to_string())
        })?;
        if let Some(s) = steps.as_mut() {
            *s = n.steps.len() as u64;
        }
        write_out(out, SesameTerm(n.term))
    })
}
