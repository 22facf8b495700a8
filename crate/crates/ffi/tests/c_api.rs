use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use serde_json::Value;
use tabletop_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    tt_string_free(s);
    v
}

fn last_error() -> String {
    let p = tt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn frame(ts: u64, state: &str, x: f64, y: f64, z: f64) -> CString {
    c(&format!(
        r#"{{"ts_us":{ts},"tracked":true,"hand_state":"{state}","joints":{{"hand_right":[{x},{y},{z}]}}}}"#
    ))
}

unsafe fn push(s: *mut TtSession, f: &CString) -> Vec<String> {
    let mut out = ptr::null_mut();
    assert_eq!(tt_session_push_frame(s, f.as_ptr(), &mut out), TtStatus::Ok);
    take(out)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["type"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn session_plays_a_successful_drop() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(tt_session_new(ptr::null(), &mut s), TtStatus::Ok);
        let mut events = Vec::new();
        for k in 0..3 {
            events.extend(push(s, &frame(k * 33_333, "closed", 0.3, 0.8, 1.6)));
        }
        for k in 3..5 {
            events.extend(push(s, &frame(k * 33_333, "open", -0.15, 0.9, 1.6)));
        }
        assert_eq!(events, ["grabbed", "released", "success"]);

        let (mut score, mut radius) = (0u32, 0f64);
        assert_eq!(
            tt_session_progress(s, &mut score, &mut radius),
            TtStatus::Ok
        );
        assert_eq!(score, 1);
        assert_eq!(radius, 0.15);

        let mut out = ptr::null_mut();
        assert_eq!(tt_session_metrics(s, &mut out), TtStatus::Ok);
        let m = take(out);
        assert_eq!(m["n_drops"], 1);
        assert_eq!(m["hit_rate"], 1.0);

        assert_eq!(tt_session_state(s, &mut out), TtStatus::Ok);
        let st = take(out);
        assert_eq!(st["score"], 1);
        assert_eq!(st["phase"]["name"], "feedback");
        tt_session_free(s);
    }
}

#[test]
fn rejected_frame_reports_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(tt_session_new(ptr::null(), &mut s), TtStatus::Ok);
        push(s, &frame(100, "open", 0.0, 1.0, 2.0));
        let mut out = ptr::null_mut();
        let back = frame(50, "open", 0.0, 1.0, 2.0);
        assert_eq!(
            tt_session_push_frame(s, back.as_ptr(), &mut out),
            TtStatus::RejectedFrame
        );
        assert!(out.is_null());
        assert!(last_error().contains("50"));

        let bad = c(r#"{"ts_us":1}"#);
        assert_eq!(
            tt_session_push_frame(s, bad.as_ptr(), &mut out),
            TtStatus::MalformedJson
        );
        assert_eq!(
            tt_session_push_frame(s, ptr::null(), &mut out),
            TtStatus::NullArgument
        );
        // The session still accepts later frames.
        assert!(push(s, &frame(200, "open", 0.0, 1.0, 2.0)).is_empty());
        tt_session_free(s);
    }
}

#[test]
fn config_overrides_are_applied_and_validated() {
    unsafe {
        let mut s = ptr::null_mut();
        let ok = c(r#"{"dda":{"r0":0.2}}"#);
        assert_eq!(tt_session_new(ok.as_ptr(), &mut s), TtStatus::Ok);
        let (mut score, mut radius) = (0u32, 0f64);
        tt_session_progress(s, &mut score, &mut radius);
        assert_eq!(radius, 0.2);
        tt_session_free(s);

        let mut s = ptr::null_mut();
        let bad = c(r#"{"dda":{"r0":5.0}}"#);
        assert_eq!(
            tt_session_new(bad.as_ptr(), &mut s),
            TtStatus::InvalidConfig
        );
        assert!(s.is_null());
        let junk = c("{not json");
        assert_eq!(
            tt_session_new(junk.as_ptr(), &mut s),
            TtStatus::MalformedJson
        );
    }
}

#[test]
fn store_roundtrip_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let root = c(dir.path().to_str().unwrap());
    unsafe {
        let mut store = ptr::null_mut();
        assert_eq!(tt_store_open(root.as_ptr(), &mut store), TtStatus::Ok);
        let mut s = ptr::null_mut();
        tt_session_new(ptr::null(), &mut s);
        push(s, &frame(0, "open", 0.0, 1.0, 2.0));

        let mut id = ptr::null_mut();
        assert_eq!(tt_store_save_session(store, s, &mut id), TtStatus::Ok);
        let id_str = CStr::from_ptr(id).to_str().unwrap().to_string();
        tt_string_free(id);

        let mut out = ptr::null_mut();
        assert_eq!(tt_store_list(store, &mut out), TtStatus::Ok);
        let list = take(out);
        assert_eq!(list.as_array().unwrap().len(), 1);
        assert_eq!(list[0]["session_id"], id_str.as_str());

        let cid = c(&id_str);
        assert_eq!(tt_store_load(store, cid.as_ptr(), &mut out), TtStatus::Ok);
        let rec = take(out);
        assert_eq!(rec["session_id"], id_str.as_str());
        assert_eq!(rec["schema_version"], 1);

        assert_eq!(tt_store_delete(store, cid.as_ptr()), TtStatus::Ok);
        assert_eq!(
            tt_store_load(store, cid.as_ptr(), &mut out),
            TtStatus::NotFound
        );
        assert_eq!(tt_store_delete(store, cid.as_ptr()), TtStatus::NotFound);
        tt_session_free(s);
        tt_store_free(store);
    }
}

#[test]
fn scalar_helpers_match_the_engine() {
    assert_eq!(tt_noise_sigma(0.002, 0.040, 0.5), 0.002);
    assert_eq!(tt_noise_sigma(0.002, 0.040, 5.0), 0.040);
    assert!((tt_noise_sigma(0.002, 0.040, 2.75) - 0.021).abs() < 1e-15);
    assert!(tt_hit_test(0.1, 0.0, 0.0, 0.0, 0.1));
    assert!(!tt_hit_test(0.11, 0.0, 0.0, 0.0, 0.1));

    let (mut r, mut s, mut m) = (0.15, 0u32, 0u32);
    for _ in 0..3 {
        assert_eq!(
            unsafe { tt_dda_update(&mut r, &mut s, &mut m, true) },
            TtStatus::Ok
        );
    }
    assert!((r - 0.12).abs() < 1e-15);
    assert_eq!((s, m), (0, 0));
    assert_eq!(
        unsafe { tt_dda_update(ptr::null_mut(), &mut s, &mut m, true) },
        TtStatus::NullArgument
    );
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        tt_string_free(ptr::null_mut());
        tt_session_free(ptr::null_mut());
        tt_store_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(tt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tabletop.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "tt_last_error",
        "tt_string_free",
        "tt_session_new",
        "tt_session_push_frame",
        "tt_session_state",
        "tt_session_metrics",
        "tt_session_progress",
        "tt_store_open",
        "tt_store_save_session",
        "tt_store_list",
        "tt_store_load",
        "tt_store_delete",
        "tt_noise_sigma",
        "tt_hit_test",
        "tt_dda_update",
        "typedef struct TtSession TtSession",
        "TT_STATUS_NOT_FOUND = 6",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_PROBE: &str = r#"#include <stdio.h>
#include <string.h>
#include "tabletop.h"

int main(void) {
    TtSession *s = NULL;
    if (tt_session_new(NULL, &s) != TT_STATUS_OK) return 1;
    char *events = NULL;
    const char *frame =
        "{\"ts_us\":0,\"tracked\":true,\"hand_state\":\"open\","
        "\"joints\":{\"hand_right\":[0.0,1.0,2.0]}}";
    if (tt_session_push_frame(s, frame, &events) != TT_STATUS_OK) return 2;
    if (strcmp(events, "[]") != 0) return 3;
    tt_string_free(events);
    if (tt_session_push_frame(s, "{}", &events) != TT_STATUS_MALFORMED_JSON) return 4;
    if (tt_last_error() == NULL) return 5;
    tt_session_free(s);
    printf("%.3f\n", tt_noise_sigma(0.002, 0.040, 2.75));
    return 0;
}
"#;

/// Compiles a C program against the header and, when the static library is
/// next to this test binary, links and runs it.
#[test]
fn c_program_builds_against_the_header() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipped");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, C_PROBE).unwrap();

    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .and_then(Path::parent)
        .map(|d| d.join("libtabletop_ffi.a"));
    let Some(lib) = lib.filter(|l| l.is_file()) else {
        let ok = Command::new(cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap();
        assert!(ok.success(), "header does not compile as C");
        return;
    };
    let bin = dir.path().join("probe");
    let ok = Command::new(cc)
        .args(["-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(ok.success(), "C probe failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C probe exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.021");
}
