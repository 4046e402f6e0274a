use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use nemesys_ffi::*;

const PATH: &str = "\
1.0: edge(a,b).
1.0: edge(b,c).
1.0: path(X,Y) :- edge(X,Y).
1.0: path(X,Z) :- edge(X,Y), path(Y,Z).
";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = nemesys_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn engine(program: &str, meta: &str) -> *mut NemesysEngine {
    let mut e = ptr::null_mut();
    let st = unsafe { nemesys_engine_new(c(program).as_ptr(), c(meta).as_ptr(), &mut e) };
    assert_eq!(st, NemesysStatus::Ok, "{}", last_error());
    e
}

#[test]
fn run_and_read_valuations() {
    let e = engine(PATH, "naive");
    unsafe {
        assert!(nemesys_engine_atom_count(e) > 0);
        let mut x = -1.0;
        assert_eq!(nemesys_engine_valuation(e, c("solve(path(a,c))").as_ptr(), &mut x), NemesysStatus::NotRun);
        assert_eq!(nemesys_engine_run(e, 0.0, 0), NemesysStatus::Ok);
        assert_eq!(nemesys_engine_valuation(e, c("solve(path(a,c))").as_ptr(), &mut x), NemesysStatus::Ok);
        assert!(x > 0.99, "{x}");
        assert!(nemesys_last_error().is_null());
        nemesys_engine_free(e);
    }
}

#[test]
fn report_is_json_with_valuations_after_run() {
    let e = engine(PATH, "naive");
    unsafe {
        let s = nemesys_engine_report_json(e);
        let doc: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        nemesys_string_free(s);
        assert!(doc["valuations"].is_null());
        assert!(doc["grounding"]["atoms"].as_u64().unwrap() > 0);
        nemesys_engine_run(e, 0.01, 0);
        let s = nemesys_engine_report_json(e);
        let doc: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        nemesys_string_free(s);
        assert!(doc["valuations"]["solve(path(a,b))"].as_f64().unwrap() > 0.9);
        nemesys_engine_free(e);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(nemesys_engine_new(c("edge(a,").as_ptr(), c("naive").as_ptr(), &mut e), NemesysStatus::ParseError);
        assert!(e.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(nemesys_engine_new(c(PATH).as_ptr(), c("no_such_interpreter").as_ptr(), &mut e), NemesysStatus::MetaError);
        assert_eq!(nemesys_engine_new(ptr::null(), c("naive").as_ptr(), &mut e), NemesysStatus::NullPointer);
        assert_eq!(nemesys_engine_run(ptr::null_mut(), 0.0, 0), NemesysStatus::NullPointer);
        assert_eq!(nemesys_engine_atom_count(ptr::null()), 0);
        assert!(nemesys_engine_report_json(ptr::null()).is_null());
        nemesys_engine_free(ptr::null_mut());
        nemesys_string_free(ptr::null_mut());

        let e = engine(PATH, "naive");
        nemesys_engine_run(e, 0.0, 0);
        let mut x = 0.0;
        assert_eq!(nemesys_engine_valuation(e, c("solve(path(z,z))").as_ptr(), &mut x), NemesysStatus::UnknownAtom);
        assert!(last_error().contains("path(z,z)"));
        assert_eq!(nemesys_engine_run(e, f64::NAN, 0), NemesysStatus::InvalidArgument);
        nemesys_engine_free(e);
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nemesys.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["nemesys_engine_new", "nemesys_engine_run", "nemesys_engine_valuation", "nemesys_engine_report_json", "nemesys_string_free", "nemesys_last_error", "NEMESYS_STATUS_OK"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
