//! C interface to the drinlev library.
//!
//! One entry point. `drinlev_eval` takes a JSON request of the form
//!
//! ```json
//! {"argv": ["hecke", "--q", "2", "--p", "t", "--d", "2", "--k", "1"]}
//! ```
//!
//! where `argv` holds exactly the arguments the `drinlev` binary would
//! take (without the program name). Subcommands that read a document
//! via `--in` can instead receive it inline through an optional
//! `"input"` field; the library stages it in a temporary file for the
//! duration of the call:
//!
//! ```json
//! {"argv": ["admissible", "analyze"], "input": {"q": 2, "p": "t", "construction": "gamma0", "d": 2, "n": 1}}
//! ```
//!
//! The returned handle owns a status code (same meaning as the CLI
//! exit codes) and the JSON report text. Both stay valid until
//! `drinlev_result_free`. Every entry point catches panics; nothing
//! unwinds across the boundary.

use std::ffi::{c_char, CStr, CString};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::Deserialize;
use serde_json::{json, Value};

/// The request was evaluated and every check passed.
pub const DRINLEV_OK: i32 = 0;

/// The request was well formed but a mathematical check failed; the
/// report carries the partial result plus an "error" field.
pub const DRINLEV_CHECK_FAILED: i32 = 1;

/// Malformed request: unparseable JSON, unknown fields, bad arguments,
/// or a capacity bound was exceeded.
pub const DRINLEV_BAD_REQUEST: i32 = 2;

/// A panic was caught at the boundary. The report carries an "error"
/// field; the handle is still valid and must still be freed.
pub const DRINLEV_PANIC: i32 = 3;

/// A required pointer argument was null.
pub const DRINLEV_NULL_ARGUMENT: i32 = 4;

/// Opaque result handle. Layout is not part of the ABI; access goes
/// through `drinlev_result_status` and `drinlev_result_json`, release
/// through `drinlev_result_free`.
pub struct DrinlevResult {
    status: i32,
    json: CString,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Request {
    argv: Vec<String>,
    #[serde(default)]
    input: Option<Value>,
}

fn result_box(status: i32, value: Value) -> *mut DrinlevResult {
    // serde_json escapes control characters, so the text is NUL-free
    let json = CString::new(value.to_string()).expect("serialized JSON contains no NUL");
    Box::into_raw(Box::new(DrinlevResult { status, json }))
}

fn bad_request(msg: impl std::fmt::Display) -> *mut DrinlevResult {
    result_box(DRINLEV_BAD_REQUEST, json!({ "error": msg.to_string() }))
}

fn eval_request(req: Request) -> *mut DrinlevResult {
    let mut argv = req.argv;
    // keeps the staged document alive (and on disk) until eval returns
    let mut staged: Option<tempfile::NamedTempFile> = None;
    if let Some(doc) = req.input {
        if argv.iter().any(|a| a == "--in") {
            return bad_request("give the document inline as \"input\" or via --in, not both");
        }
        let mut file = match tempfile::NamedTempFile::new() {
            Ok(f) => f,
            Err(e) => return bad_request(format!("staging input document: {e}")),
        };
        if let Err(e) = file.write_all(doc.to_string().as_bytes()) {
            return bad_request(format!("staging input document: {e}"));
        }
        let path = match file.path().to_str() {
            Some(p) => p.to_string(),
            None => return bad_request("temporary path is not valid UTF-8"),
        };
        argv.push("--in".to_string());
        argv.push(path);
        staged = Some(file);
    }
    let outcome = catch_unwind(AssertUnwindSafe(|| drinlev::cli::eval_argv(&argv)));
    drop(staged);
    match outcome {
        Ok((value, code)) => result_box(code, value),
        Err(_) => result_box(DRINLEV_PANIC, json!({ "error": "internal panic during evaluation" })),
    }
}

/// Evaluate a JSON request and return a fresh result handle.
///
/// Never returns null: malformed requests, failed checks and caught
/// panics all come back as handles whose status says what happened.
/// The caller owns the handle and must release it with
/// `drinlev_result_free`.
#[no_mangle]
pub extern "C" fn drinlev_eval(request_json: *const c_char) -> *mut DrinlevResult {
    let guarded = catch_unwind(|| {
        if request_json.is_null() {
            return result_box(DRINLEV_NULL_ARGUMENT, json!({ "error": "null request" }));
        }
        let bytes = unsafe { CStr::from_ptr(request_json) }.to_bytes();
        let parsed: Result<Request, String> = std::str::from_utf8(bytes)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str(s).map_err(|e| e.to_string()));
        match parsed {
            Ok(req) => eval_request(req),
            Err(e) => bad_request(e),
        }
    });
    guarded.unwrap_or_else(|_| {
        result_box(DRINLEV_PANIC, json!({ "error": "internal panic while reading the request" }))
    })
}

/// Status code of a result: one of the DRINLEV_* constants.
/// A null handle reports DRINLEV_NULL_ARGUMENT.
#[no_mangle]
pub extern "C" fn drinlev_result_status(result: *const DrinlevResult) -> i32 {
    if result.is_null() {
        return DRINLEV_NULL_ARGUMENT;
    }
    unsafe { (*result).status }
}

/// The result's JSON report as a NUL-terminated string. The pointer
/// belongs to the handle and is valid until `drinlev_result_free`;
/// a null handle yields null.
#[no_mangle]
pub extern "C" fn drinlev_result_json(result: *const DrinlevResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    unsafe { (*result).json.as_ptr() }
}

/// Release a result handle. Null is accepted and ignored; freeing the
/// same handle twice is undefined behaviour, as with free(3).
#[no_mangle]
pub extern "C" fn drinlev_result_free(result: *mut DrinlevResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Library version as a static NUL-terminated string; never freed by
/// the caller.
#[no_mangle]
pub extern "C" fn drinlev_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
