//! C interface. Handles are opaque; every fallible call returns an
//! [`ScStatus`] and leaves details in [`sc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scverify::driver::Options;
use scverify::semantics::{eval_call, EvalOutcome};
use scverify::syntax::{parse_expr, parse_program, Program};
use scverify::verify::{verify_model, Mode, ModelSpec, Report, Verdict, VerifyOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ModelError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScVerdictKind {
    Safe = 0,
    NotShownSafe = 1,
    BudgetExhausted = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScEvalKind {
    Value = 0,
    Bottom = 1,
    Exhausted = 2,
}

/// A parsed program.
pub struct ScProgram(Program);

/// The outcome of one verification.
pub struct ScVerdict(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: ScStatus, msg: &str) -> ScStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> ScStatus) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ScStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `s` must be null or a valid nul-terminated string.
unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, ScStatus> {
    if s.is_null() {
        return Err(fail(ScStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(ScStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread. Valid until the next
/// call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `source` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_program_parse(source: *const c_char, out: *mut *mut ScProgram) -> ScStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ScStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let src = match text(source) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_program(src) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(ScProgram(p)));
                ScStatus::Ok
            }
            Err(e) => fail(ScStatus::ParseError, &e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be null or come from [`sc_program_parse`], and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_program_free(p: *mut ScProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Evaluates `entry(data)`. `budget` bounds rule applications, 0 for
/// none. The rendered value, or the reason for ⊥, is stored in
/// `*result` and must be released with [`sc_string_free`].
///
/// # Safety
/// Pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn sc_eval(
    p: *const ScProgram,
    entry: *const c_char,
    data: *const c_char,
    budget: u64,
    kind: *mut ScEvalKind,
    result: *mut *mut c_char,
) -> ScStatus {
    guarded(|| {
        if p.is_null() || kind.is_null() || result.is_null() {
            return fail(ScStatus::NullArgument, "null argument");
        }
        let (entry, data) = match (text(entry), text(data)) {
            (Ok(e), Ok(d)) => (e, d),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let d = match parse_expr(data) {
            Ok(d) if d.is_ground() && d.is_passive() => d,
            Ok(_) => return fail(ScStatus::ParseError, "data must be ground and passive"),
            Err(e) => return fail(ScStatus::ParseError, &e.to_string()),
        };
        let outcome = eval_call(&(*p).0, entry, &[d], (budget > 0).then_some(budget));
        *kind = match &outcome {
            EvalOutcome::Value(_) => ScEvalKind::Value,
            EvalOutcome::Bottom { .. } => ScEvalKind::Bottom,
            EvalOutcome::Exhausted { .. } => ScEvalKind::Exhausted,
        };
        *result = owned(outcome.to_string());
        ScStatus::Ok
    })
}

/// Verifies that `entry` never returns `False`. `rounds` of 0 runs one
/// round and a second only when `False` survives; `max_nodes` of 0 keeps
/// the default budget.
///
/// # Safety
/// Pointers must be valid; `entry` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn sc_verify(
    p: *const ScProgram,
    entry: *const c_char,
    via_interpreter: bool,
    rounds: u32,
    max_nodes: usize,
    out: *mut *mut ScVerdict,
) -> ScStatus {
    guarded(|| {
        if p.is_null() || out.is_null() {
            return fail(ScStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let entry = match text(entry) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let m = match ModelSpec::from_first_rule("model", (*p).0.clone(), entry) {
            Ok(m) => m,
            Err(e) => return fail(ScStatus::ModelError, &e.to_string()),
        };
        let mut sc = Options::default();
        if max_nodes > 0 {
            sc.budget.max_nodes = max_nodes;
        }
        let opts = VerifyOptions {
            mode: if via_interpreter { Mode::ViaInterpreter } else { Mode::Direct },
            rounds,
            sc,
        };
        match verify_model(&m, opts) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(ScVerdict(r)));
                ScStatus::Ok
            }
            Err(e) => fail(ScStatus::ModelError, &e.to_string()),
        }
    })
}

/// # Safety
/// `v` must come from [`sc_verify`].
#[no_mangle]
pub unsafe extern "C" fn sc_verdict_kind(v: *const ScVerdict) -> ScVerdictKind {
    match &(*v).0.verdict {
        Verdict::Safe { .. } => ScVerdictKind::Safe,
        Verdict::NotShownSafe { .. } => ScVerdictKind::NotShownSafe,
        Verdict::BudgetExhausted { .. } => ScVerdictKind::BudgetExhausted,
    }
}

/// The residual program as source text, or null when the budget ran out.
/// Release with [`sc_string_free`].
///
/// # Safety
/// `v` must come from [`sc_verify`].
#[no_mangle]
pub unsafe extern "C" fn sc_verdict_residual(v: *const ScVerdict) -> *mut c_char {
    match (*v).0.verdict.residual() {
        Some(r) => owned(r.to_string()),
        None => ptr::null_mut(),
    }
}

/// Machine-readable summary as JSON. Release with [`sc_string_free`].
///
/// # Safety
/// `v` must come from [`sc_verify`].
#[no_mangle]
pub unsafe extern "C" fn sc_verdict_summary_json(v: *const ScVerdict) -> *mut c_char {
    owned(serde_json::to_string(&(*v).0.summary()).expect("summary serializes"))
}

/// # Safety
/// `v` must be null or come from [`sc_verify`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_verdict_free(v: *mut ScVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
