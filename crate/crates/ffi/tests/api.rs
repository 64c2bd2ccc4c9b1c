use std::ffi::{CStr, CString};
use std::ptr;

use sesame_ffi::*;

const EXAMPLE: &str = "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4";

fn parse(src: &str) -> *mut SesameTerm {
    let src = CString::new(src).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { sesame_term_parse(src.as_ptr(), &mut t) }, SesameStatus::Ok);
    t
}

fn render(t: *const SesameTerm) -> String {
    unsafe {
        let s = sesame_term_to_string(t, false);
        let out = CStr::from_ptr(s).to_str().unwrap().to_string();
        sesame_string_free(s);
        out
    }
}

fn last_error() -> String {
    let p = sesame_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn runs_the_running_example() {
    let t = parse(EXAMPLE);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { sesame_run(t, SesameMachine::Sesame, 1000, &mut run) }, SesameStatus::Ok);
    let mut m = SesameMetrics::default();
    assert_eq!(unsafe { sesame_run_metrics(run, &mut m) }, SesameStatus::Ok);
    assert_eq!((m.transitions, m.principal, m.search), (13, 6, 7));
    assert!(m.search <= m.initial_size * (m.principal + 1));

    let mut result = ptr::null_mut();
    assert_eq!(unsafe { sesame_run_result(run, &mut result) }, SesameStatus::Ok);
    let expected = parse("\\m1m1");
    assert!(unsafe { sesame_term_alpha_eq(result, expected) });
    let mut readback = ptr::null_mut();
    assert_eq!(unsafe { sesame_run_readback(run, &mut readback) }, SesameStatus::Ok);
    assert!(render(readback).starts_with("[!\\"));
    unsafe {
        for h in [t, result, expected, readback] {
            sesame_term_free(h);
        }
        sesame_run_free(run);
    }
}

#[test]
fn machines_and_oracle_agree_on_a_family() {
    let spec = CString::new("sigma:3").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { sesame_term_family(spec.as_ptr(), &mut t) }, SesameStatus::Ok);
    assert!(unsafe { sesame_term_is_typable(t) });
    let mut results = Vec::new();
    for machine in [SesameMachine::Sesame, SesameMachine::Bam] {
        let mut run = ptr::null_mut();
        assert_eq!(unsafe { sesame_run(t, machine, 100_000, &mut run) }, SesameStatus::Ok);
        let mut m = SesameMetrics::default();
        unsafe { sesame_run_metrics(run, &mut m) };
        assert_eq!(m.multiplicative, 0);
        let mut r = ptr::null_mut();
        unsafe { sesame_run_result(run, &mut r) };
        results.push(r);
        unsafe { sesame_run_free(run) };
    }
    let mut normal = ptr::null_mut();
    let mut steps = 0u64;
    let status = unsafe { sesame_normalize(t, SesameOracleMode::GoodFull, 100_000, &mut normal, &mut steps) };
    assert_eq!(status, SesameStatus::Ok);
    assert!(steps > 8);
    assert!(unsafe { sesame_term_alpha_eq(results[0], normal) });
    // the basic machine leaves its cuts in place
    let bang_identity = parse("!\\m1m1");
    assert!(!unsafe { sesame_term_alpha_eq(results[1], bang_identity) });
    let mut collected = ptr::null_mut();
    assert_eq!(unsafe { sesame_term_gc(results[1], &mut collected) }, SesameStatus::Ok);
    assert!(unsafe { sesame_term_alpha_eq(collected, bang_identity) }, "{}", render(collected));
    unsafe {
        for h in results.into_iter().chain([t, normal, bang_identity, collected]) {
            sesame_term_free(h);
        }
    }
}

#[test]
fn failures_carry_a_status_and_a_message() {
    let mut t = ptr::null_mut();
    let bad = CString::new("[m1-").unwrap();
    assert_eq!(unsafe { sesame_term_parse(bad.as_ptr(), &mut t) }, SesameStatus::Syntax);
    assert!(t.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { sesame_term_parse(ptr::null(), &mut t) }, SesameStatus::NullArgument);
    assert!(last_error().contains("null"));

    let improper = parse("\\m1m2");
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { sesame_run(improper, SesameMachine::Sesame, 100, &mut run) }, SesameStatus::Improper);

    let clash = parse("[\\m1m1-e1]e1");
    assert_eq!(unsafe { sesame_run(clash, SesameMachine::Sesame, 100, &mut run) }, SesameStatus::Clash);

    let open = parse("[e1?m2]m2");
    assert_eq!(unsafe { sesame_run(open, SesameMachine::Bam, 100, &mut run) }, SesameStatus::OpenTerm);

    let example = parse(EXAMPLE);
    assert_eq!(unsafe { sesame_run(example, SesameMachine::Sesame, 3, &mut run) }, SesameStatus::StepLimit);
    assert!(run.is_null());

    let family = CString::new("omega:2").unwrap();
    assert_eq!(unsafe { sesame_term_family(family.as_ptr(), &mut t) }, SesameStatus::UnknownFamily);

    // success clears the message
    let ok = parse("\\m1m1");
    assert!(sesame_last_error().is_null());
    unsafe {
        for h in [improper, clash, open, example, ok] {
            sesame_term_free(h);
        }
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        sesame_term_free(ptr::null_mut());
        sesame_run_free(ptr::null_mut());
        sesame_string_free(ptr::null_mut());
        assert!(sesame_term_to_string(ptr::null(), true).is_null());
        assert_eq!(sesame_term_size(ptr::null()), 0);
        assert!(!sesame_term_alpha_eq(ptr::null(), ptr::null()));
        assert_eq!(sesame_run_metrics(ptr::null(), ptr::null_mut()), SesameStatus::NullArgument);
    }
}
