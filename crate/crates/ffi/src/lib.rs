//! C ABI over the nemesys engine.
//!
//! Every call returns a [`NemesysStatus`]; on failure the message is kept per
//! thread and read with [`nemesys_last_error`]. Engines are opaque and must be
//! released with [`nemesys_engine_free`]. Strings handed out by the library
//! are released with [`nemesys_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nemesys::ground::{GroundExtras, GroundingConfig};
use nemesys::infer::{ReasonerConfig, SHARP_GAMMA};
use nemesys::lang::{parse_program, parse_term};
use nemesys::meta::load_interpreter;
use nemesys::{Engine, Error};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NemesysStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    MetaError = 4,
    GroundError = 5,
    UnknownAtom = 6,
    InvalidArgument = 7,
    NotRun = 8,
    Panic = 9,
}

/// Opaque engine handle.
pub struct NemesysEngine {
    engine: Engine,
    v: Option<Vec<f64>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(s).expect("nul bytes removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: NemesysStatus, msg: impl Into<String>) -> NemesysStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> NemesysStatus {
    match e {
        Error::Lang(_) => NemesysStatus::ParseError,
        Error::Meta(_) => NemesysStatus::MetaError,
        Error::Ground(_) => NemesysStatus::GroundError,
        Error::UnknownAtom(_) => NemesysStatus::UnknownAtom,
        _ => NemesysStatus::InvalidArgument,
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, NemesysStatus> {
    if p.is_null() {
        return Err(fail(NemesysStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(NemesysStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn guarded(f: impl FnOnce() -> NemesysStatus) -> NemesysStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(NemesysStatus::Panic, "internal panic"),
    }
}

/// Parses `program`, lifts it under the interpreter `meta` (a built-in name
/// or a file path) and grounds it. On success `*out` owns a new engine.
///
/// # Safety
/// `program` and `meta` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_new(program: *const c_char, meta: *const c_char, out: *mut *mut NemesysEngine) -> NemesysStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NemesysStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match str_arg(program, "program") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let meta = match str_arg(meta, "meta") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let prog = match parse_program(text) {
            Ok(p) => p,
            Err(e) => return fail(NemesysStatus::ParseError, e.to_string()),
        };
        let mp = match load_interpreter(meta) {
            Ok(m) => m,
            Err(e) => return fail(NemesysStatus::MetaError, e.to_string()),
        };
        match Engine::new(mp, &prog, &GroundingConfig::default(), &GroundExtras::default()) {
            Ok(engine) => {
                *out = Box::into_raw(Box::new(NemesysEngine { engine, v: None }));
                NemesysStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from [`nemesys_engine_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_free(engine: *mut NemesysEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Runs forward reasoning with identity rule weights. `steps == 0` uses the
/// grounding's derivation depth; `gamma <= 0` uses the sharp driver value.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_run(engine: *mut NemesysEngine, gamma: f64, steps: usize) -> NemesysStatus {
    guarded(|| {
        let Some(h) = engine.as_mut() else {
            return fail(NemesysStatus::NullPointer, "engine is null");
        };
        if gamma.is_nan() || gamma.is_infinite() {
            return fail(NemesysStatus::InvalidArgument, "gamma must be finite");
        }
        let cfg = ReasonerConfig {
            t: if steps == 0 { h.engine.grounding.default_t } else { steps },
            gamma: if gamma > 0.0 { gamma } else { SHARP_GAMMA },
            clamp: true,
            trace: false,
        };
        h.v = Some(h.engine.reason(&h.engine.identity_weights(), &cfg).v);
        NemesysStatus::Ok
    })
}

/// Writes the valuation of a ground atom from the last run into `*out`.
///
/// # Safety
/// `engine` must be a live handle, `atom` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_valuation(engine: *const NemesysEngine, atom: *const c_char, out: *mut f64) -> NemesysStatus {
    guarded(|| {
        let Some(h) = engine.as_ref() else {
            return fail(NemesysStatus::NullPointer, "engine is null");
        };
        if out.is_null() {
            return fail(NemesysStatus::NullPointer, "out is null");
        }
        let text = match str_arg(atom, "atom") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let Some(v) = &h.v else {
            return fail(NemesysStatus::NotRun, "call nemesys_engine_run first");
        };
        let t = match parse_term(text) {
            Ok(t) => t,
            Err(e) => return fail(NemesysStatus::ParseError, e.to_string()),
        };
        match h.engine.index_of(&t) {
            Ok(i) => {
                *out = v[i];
                NemesysStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Number of ground atoms, or 0 for a null handle.
///
/// # Safety
/// `engine` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_atom_count(engine: *const NemesysEngine) -> usize {
    engine.as_ref().map(|h| h.engine.grounding.table.len()).unwrap_or(0)
}

/// Grounding report as JSON, plus `valuations` when the engine has run.
/// Returns null on failure. Free the result with [`nemesys_string_free`].
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nemesys_engine_report_json(engine: *const NemesysEngine) -> *mut c_char {
    let mut out = ptr::null_mut();
    guarded(|| {
        let Some(h) = engine.as_ref() else {
            return fail(NemesysStatus::NullPointer, "engine is null");
        };
        let g = &h.engine.grounding;
        let valuations = h.v.as_ref().map(|v| {
            g.table
                .atoms()
                .iter()
                .zip(v)
                .map(|(a, x)| (nemesys::lang::render_term(a), *x))
                .collect::<std::collections::BTreeMap<_, _>>()
        });
        let doc = serde_json::json!({ "grounding": g.report, "valuations": valuations });
        out = CString::new(doc.to_string()).expect("JSON has no NUL bytes").into_raw();
        NemesysStatus::Ok
    });
    out
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nemesys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn nemesys_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null()))
}
