use std::ffi::{CStr, CString};
use std::ptr;

use scverify_ffi::*;

const SYNAPSE: &str = include_str!("../../../corpus/synapse.l");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    sc_string_free(s);
    out
}

unsafe fn parse(src: &str) -> *mut ScProgram {
    let mut p = ptr::null_mut();
    assert_eq!(sc_program_parse(c(src).as_ptr(), &mut p), ScStatus::Ok);
    p
}

#[test]
fn eval_round_trip() {
    unsafe {
        let p = parse(SYNAPSE);
        let mut kind = ScEvalKind::Exhausted;
        let mut out = ptr::null_mut();
        let st = sc_eval(p, c("Main").as_ptr(), c("(rm wh2) : ([])").as_ptr(), 0, &mut kind, &mut out);
        assert_eq!(st, ScStatus::Ok);
        assert_eq!(kind, ScEvalKind::Value);
        assert_eq!(take(out), "True");
        let st = sc_eval(p, c("Main").as_ptr(), c("(wh2) : ([])").as_ptr(), 0, &mut kind, &mut out);
        assert_eq!(st, ScStatus::Ok);
        assert_eq!(kind, ScEvalKind::Bottom);
        sc_string_free(out);
        sc_program_free(p);
    }
}

#[test]
fn verify_direct() {
    unsafe {
        let p = parse(SYNAPSE);
        let mut v = ptr::null_mut();
        assert_eq!(sc_verify(p, c("Main").as_ptr(), false, 1, 0, &mut v), ScStatus::Ok);
        assert_eq!(sc_verdict_kind(v), ScVerdictKind::Safe);
        let residual = take(sc_verdict_residual(v));
        assert!(residual.starts_with("Main("));
        assert!(!residual.contains("False"));
        let summary = take(sc_verdict_summary_json(v));
        assert!(summary.contains("\"verdict\":\"safe\""));
        sc_verdict_free(v);
        sc_program_free(p);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sc_program_parse(c("F(e.x => e.x;").as_ptr(), &mut p), ScStatus::ParseError);
        assert!(p.is_null());
        assert!(!CStr::from_ptr(sc_last_error_message()).to_bytes().is_empty());
        assert_eq!(sc_program_parse(ptr::null(), &mut p), ScStatus::NullArgument);

        let q = parse("F(e.x) => e.x;");
        let mut v = ptr::null_mut();
        assert_eq!(sc_verify(q, c("Nope").as_ptr(), false, 1, 0, &mut v), ScStatus::ModelError);
        let msg = CStr::from_ptr(sc_last_error_message()).to_str().unwrap();
        assert!(msg.contains("Nope"), "{msg}");
        sc_program_free(q);
        sc_program_free(ptr::null_mut());
        sc_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_current() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/scverify.h")).unwrap();
    for name in ["sc_program_parse", "sc_eval", "sc_verify", "sc_verdict_kind", "sc_string_free", "sc_last_error_message"] {
        assert!(h.contains(name), "{name} missing from header");
    }
    assert!(h.contains("typedef struct ScProgram ScProgram;"));
}
