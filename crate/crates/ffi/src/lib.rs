//! C ABI over the `trachtenberg` crate.
//!
//! Conventions:
//! - Every fallible call returns a [`TbStatus`]; on anything but `TB_OK`
//!   the thread's last error message is available from
//!   [`tb_last_error_message`].
//! - Results are written through out-pointers, which are left untouched on
//!   failure.
//! - Strings passed in must be NUL-terminated UTF-8. Strings handed out as
//!   `char **` are owned by the caller and released with [`tb_string_free`].
//!   Strings returned as `const char *` are borrowed from a handle and live
//!   as long as the handle does.
//! - Handles ([`TbTrace`], [`TbSession`]) are opaque and released with
//!   their `_free` function. A handle must not be used from two threads at
//!   once.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use serde::Deserialize;

use trachtenberg::drill::{self, Answer, DrillConfig, DrillSession, NextChallenge, Verdict};
use trachtenberg::oracle::reference_multiply;
use trachtenberg::{ComputationTrace, DigitString, Error, Multiplier, PositionRole};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnsupportedMultiplier = 4,
    DomainError = 5,
    ConfigError = 6,
    NotFound = 7,
    ChallengeError = 8,
    ValidationError = 9,
    PersistenceError = 10,
    IoError = 11,
    SessionFinished = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbRole {
    Rightmost = 0,
    Interior = 1,
    Leading = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbVerdict {
    Correct = 0,
    Incorrect = 1,
}

/// One position of a trace, positions counted from the right.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TbStep {
    pub position_index: usize,
    pub role: TbRole,
    pub digit: u8,
    pub neighbour: u8,
    pub raw_value: i32,
    pub carry_in: u8,
    pub sum: i32,
    pub result_digit: u8,
    pub carry_out: u8,
}

pub struct TbTrace {
    trace: ComputationTrace,
    product: CString,
}

pub struct TbSession {
    session: DrillSession,
    id: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(TbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => TbStatus::ParseError,
            Error::Domain(_) if e.code() == "unsupported_multiplier" => TbStatus::UnsupportedMultiplier,
            Error::Domain(_) => TbStatus::DomainError,
            Error::Config(_) => TbStatus::ConfigError,
            Error::NotFound(_) => TbStatus::NotFound,
            Error::Challenge(_) => TbStatus::ChallengeError,
            Error::Validation(_) => TbStatus::ValidationError,
            Error::Persistence { .. } => TbStatus::PersistenceError,
            Error::Io(_) => TbStatus::IoError,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            TbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            TbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(TbStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

fn out_ptr<T>(p: *mut T, what: &str) -> FfiResult<()> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn multiplier(m: u32) -> FfiResult<Multiplier> {
    Ok(Multiplier::new(m)?)
}

fn json_string<T: serde::Serialize>(value: &T) -> FfiResult<String> {
    serde_json::to_string(value).map_err(|e| Failure(TbStatus::Panic, format!("serialization failed: {e}")))
}

/// Message describing the most recent failure on this thread, or NULL if
/// the last call succeeded. Valid until the next call into this library
/// from the same thread.
#[no_mangle]
pub extern "C" fn tb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string produced by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn tb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Multiplies a decimal digit string by `m` with the position rules.
#[no_mangle]
pub unsafe extern "C" fn tb_multiply(digits: *const c_char, m: u32, out_product: *mut *mut c_char) -> TbStatus {
    guard(|| {
        let a = DigitString::parse(input_str(digits, "digits")?)?;
        let m = multiplier(m)?;
        out_ptr(out_product, "out_product")?;
        *out_product = owned_string(trachtenberg::multiply(&a, m).to_text());
        Ok(())
    })
}

/// Multiplies by `m` in 0..=12 with ordinary long multiplication.
#[no_mangle]
pub unsafe extern "C" fn tb_reference_multiply(
    digits: *const c_char,
    m: u32,
    out_product: *mut *mut c_char,
) -> TbStatus {
    guard(|| {
        let a = DigitString::parse(input_str(digits, "digits")?)?;
        let product = reference_multiply(&a, m)?;
        out_ptr(out_product, "out_product")?;
        *out_product = owned_string(product.to_text());
        Ok(())
    })
}

/// Computes the full per-position trace of `digits × m`.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_new(digits: *const c_char, m: u32, out_trace: *mut *mut TbTrace) -> TbStatus {
    guard(|| {
        let a = DigitString::parse(input_str(digits, "digits")?)?;
        let m = multiplier(m)?;
        out_ptr(out_trace, "out_trace")?;
        let trace = trachtenberg::multiply_by_rule(&a, m);
        let product = CString::new(trace.product.to_text()).unwrap_or_default();
        *out_trace = Box::into_raw(Box::new(TbTrace { trace, product }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tb_trace_free(trace: *mut TbTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Product as a borrowed string, or NULL for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_product(trace: *const TbTrace) -> *const c_char {
    trace.as_ref().map_or(ptr::null(), |t| t.product.as_ptr())
}

/// Number of positions, including the leading zero position.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_step_count(trace: *const TbTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.steps.len())
}

/// The final carry written as an extra leading digit, or -1 if there is
/// none.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_extra_leading_digit(trace: *const TbTrace) -> i32 {
    trace
        .as_ref()
        .and_then(|t| t.trace.extra_leading_digit)
        .map_or(-1, i32::from)
}

#[no_mangle]
pub unsafe extern "C" fn tb_trace_step(trace: *const TbTrace, index: usize, out_step: *mut TbStep) -> TbStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        out_ptr(out_step, "out_step")?;
        let s = t.trace.steps.get(index).ok_or_else(|| {
            Failure(
                TbStatus::DomainError,
                format!("step {index} out of range (trace has {})", t.trace.steps.len()),
            )
        })?;
        *out_step = TbStep {
            position_index: s.position_index,
            role: match s.role {
                PositionRole::Rightmost => TbRole::Rightmost,
                PositionRole::Interior => TbRole::Interior,
                PositionRole::Leading => TbRole::Leading,
            },
            digit: s.digit,
            neighbour: s.neighbour,
            raw_value: s.raw_value,
            carry_in: s.carry_in,
            sum: s.sum,
            result_digit: s.result_digit,
            carry_out: s.carry_out,
        };
        Ok(())
    })
}

/// Worked formula of one position, e.g. `9+3+5=(1)7`.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_step_formula(
    trace: *const TbTrace,
    index: usize,
    out_formula: *mut *mut c_char,
) -> TbStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        out_ptr(out_formula, "out_formula")?;
        let s = t
            .trace
            .steps
            .get(index)
            .ok_or_else(|| Failure(TbStatus::DomainError, format!("step {index} out of range")))?;
        *out_formula = owned_string(s.formula_rendering.clone());
        Ok(())
    })
}

/// Four-row text table of the computation.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_render_table(trace: *const TbTrace, out_text: *mut *mut c_char) -> TbStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        out_ptr(out_text, "out_text")?;
        *out_text = owned_string(t.trace.render_table());
        Ok(())
    })
}

/// Structured trace as a JSON document.
#[no_mangle]
pub unsafe extern "C" fn tb_trace_to_json(trace: *const TbTrace, out_json: *mut *mut c_char) -> TbStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        out_ptr(out_json, "out_json")?;
        *out_json = owned_string(t.trace.to_structured().to_string());
        Ok(())
    })
}

fn new_session_handle(session: DrillSession) -> *mut TbSession {
    let id = CString::new(session.session_id.clone()).unwrap_or_default();
    Box::into_raw(Box::new(TbSession { session, id }))
}

/// Starts an in-memory drill session from a JSON config, for example
/// `{"multipliers":[6,11],"min_digits":2,"max_digits":4,"mode":"guided_steps","seed":1,"problem_count":5}`.
#[no_mangle]
pub unsafe extern "C" fn tb_session_new(config_json: *const c_char, out_session: *mut *mut TbSession) -> TbStatus {
    guard(|| {
        let text = input_str(config_json, "config_json")?;
        out_ptr(out_session, "out_session")?;
        let config: DrillConfig =
            serde_json::from_str(text).map_err(|e| Failure(TbStatus::ConfigError, format!("invalid drill config: {e}")))?;
        *out_session = new_session_handle(DrillSession::new(config)?);
        Ok(())
    })
}

/// Loads a session from `<store_dir>/<session_id>.log`.
#[no_mangle]
pub unsafe extern "C" fn tb_session_load(
    store_dir: *const c_char,
    session_id: *const c_char,
    out_session: *mut *mut TbSession,
) -> TbStatus {
    guard(|| {
        let dir = input_str(store_dir, "store_dir")?;
        let id = input_str(session_id, "session_id")?;
        out_ptr(out_session, "out_session")?;
        *out_session = new_session_handle(drill::load_session(Path::new(dir), id)?);
        Ok(())
    })
}

/// Appends the session's unsaved events to `<store_dir>/<session_id>.log`.
#[no_mangle]
pub unsafe extern "C" fn tb_session_save(session: *mut TbSession, store_dir: *const c_char) -> TbStatus {
    guard(|| {
        let s = handle_mut(session, "session")?;
        let dir = input_str(store_dir, "store_dir")?;
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        drill::save_session(Path::new(dir), &mut s.session)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tb_session_free(session: *mut TbSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Session id as a borrowed string, or NULL for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tb_session_id(session: *const TbSession) -> *const c_char {
    session.as_ref().map_or(ptr::null(), |s| s.id.as_ptr())
}

/// Writes the open challenge as JSON. Returns `TB_SESSION_FINISHED` and
/// leaves `out_json` untouched once every problem has been answered.
#[no_mangle]
pub unsafe extern "C" fn tb_session_next(session: *mut TbSession, out_json: *mut *mut c_char) -> TbStatus {
    guard(|| {
        let s = handle_mut(session, "session")?;
        out_ptr(out_json, "out_json")?;
        match s.session.next_challenge() {
            NextChallenge::Challenge(c) => {
                *out_json = owned_string(json_string(&c)?);
                Ok(())
            }
            NextChallenge::Finished => {
                Err(Failure(TbStatus::SessionFinished, "session finished".into()))
            }
        }
    })
}

fn respond(
    s: &mut TbSession,
    challenge_id: &str,
    answer: Answer,
    out_verdict: *mut TbVerdict,
    out_json: *mut *mut c_char,
) -> FfiResult<()> {
    let response = s.session.submit_response(challenge_id, answer)?;
    unsafe {
        if !out_verdict.is_null() {
            *out_verdict = match response.verdict {
                Verdict::Correct => TbVerdict::Correct,
                Verdict::Incorrect => TbVerdict::Incorrect,
            };
        }
        if !out_json.is_null() {
            *out_json = owned_string(json_string(&response)?);
        }
    }
    Ok(())
}

/// Answers a result-digit-and-carry challenge. `out_verdict` and
/// `out_json` (the full response with expected values and explanation) may
/// each be NULL.
#[no_mangle]
pub unsafe extern "C" fn tb_session_respond(
    session: *mut TbSession,
    challenge_id: *const c_char,
    digit: i64,
    carry: i64,
    out_verdict: *mut TbVerdict,
    out_json: *mut *mut c_char,
) -> TbStatus {
    guard(|| {
        let s = handle_mut(session, "session")?;
        let id = input_str(challenge_id, "challenge_id")?;
        respond(s, id, Answer::digit_and_carry(digit, carry), out_verdict, out_json)
    })
}

#[derive(Deserialize)]
struct JsonAnswer {
    challenge_id: String,
    #[serde(flatten)]
    answer: Answer,
}

/// Answers any challenge kind with a JSON body such as
/// `{"challenge_id":"p0-product","product":"5964"}` or
/// `{"challenge_id":"p0-s1-raw","raw_value":12}`.
#[no_mangle]
pub unsafe extern "C" fn tb_session_respond_json(
    session: *mut TbSession,
    answer_json: *const c_char,
    out_verdict: *mut TbVerdict,
    out_json: *mut *mut c_char,
) -> TbStatus {
    guard(|| {
        let s = handle_mut(session, "session")?;
        let text = input_str(answer_json, "answer_json")?;
        let parsed: JsonAnswer = serde_json::from_str(text)
            .map_err(|e| Failure(TbStatus::ValidationError, format!("invalid answer: {e}")))?;
        respond(s, &parsed.challenge_id, parsed.answer, out_verdict, out_json)
    })
}

/// Score, per-multiplier accuracy and progress as JSON.
#[no_mangle]
pub unsafe extern "C" fn tb_session_summary(session: *const TbSession, out_json: *mut *mut c_char) -> TbStatus {
    guard(|| {
        let s = handle(session, "session")?;
        out_ptr(out_json, "out_json")?;
        *out_json = owned_string(json_string(&s.session.summary())?);
        Ok(())
    })
}
