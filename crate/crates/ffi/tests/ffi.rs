use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hdqchain_ffi::*;

fn run(config: &str) -> (HqStatus, *mut HqRun) {
    let c = CString::new(config).unwrap();
    let mut out = ptr::null_mut();
    let s = unsafe { hq_run_new(c.as_ptr(), &mut out) };
    (s, out)
}

fn text(p: *const std::ffi::c_char) -> String {
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn honest_run_through_the_handle() {
    let (s, h) = run(r#"{"qudit_dim": 2, "n_blocks": 4, "m_symbols": 1, "trials": 50, "seed": 0}"#);
    assert_eq!(s, HqStatus::Ok);
    unsafe {
        assert!(hq_run_all_pass(h));
        assert_eq!(hq_run_row_count(h), 1);
        let (mut det, mut tr, mut rate) = (9u64, 0u64, 1.0f64);
        assert_eq!(hq_run_row(h, 0, &mut det, &mut tr, &mut rate), HqStatus::Ok);
        assert_eq!((det, tr, rate), (0, 50, 0.0));
        assert_eq!(hq_run_row(h, 1, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), HqStatus::OutOfRange);
        assert_eq!(text(hq_run_transcript_hash(h)), text(hq_golden_transcript_hash()));
        assert!(text(hq_run_csv(h)).starts_with("scenario_kind,N,n,m,"));
        let json: serde_json::Value = serde_json::from_str(&text(hq_run_report_json(h))).unwrap();
        assert_eq!(json["all_pass"], true);
        hq_run_free(h);
    }
}

#[test]
fn seed_override_changes_the_transcript() {
    let cfg = CString::new(r#"{"qudit_dim": 2, "n_blocks": 4, "m_symbols": 1, "trials": 10}"#).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(hq_run_new_seeded(cfg.as_ptr(), 7, &mut h), HqStatus::Ok);
        assert_ne!(text(hq_run_transcript_hash(h)), text(hq_golden_transcript_hash()));
        hq_run_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (s, h) = run(r#"{"qudit_dim": 1, "n_blocks": 4, "m_symbols": 1}"#);
    assert_eq!(s, HqStatus::Config);
    assert!(h.is_null());
    assert!(text(hq_last_error()).contains("qudit_dim"));

    let (s, h) = run(r#"{"qudit_dim": 100, "n_blocks": 3, "m_symbols": 4, "amplitude_cap": 1000000}"#);
    assert_eq!(s, HqStatus::Resource);
    assert!(h.is_null());

    assert_eq!(run("not json").0, HqStatus::Config);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hq_run_new(ptr::null(), &mut out) }, HqStatus::NullArgument);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { hq_run_new(bad.as_ptr().cast(), &mut out) }, HqStatus::InvalidUtf8);
    let cfg = CString::new("{}").unwrap();
    assert_eq!(unsafe { hq_run_new(cfg.as_ptr(), ptr::null_mut()) }, HqStatus::NullArgument);
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        hq_run_free(ptr::null_mut());
        assert!(!hq_run_all_pass(ptr::null()));
        assert_eq!(hq_run_row_count(ptr::null()), 0);
        assert!(hq_run_csv(ptr::null()).is_null());
        assert_eq!(hq_run_row(ptr::null(), 0, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), HqStatus::NullArgument);
    }
}

#[test]
fn oracle_values() {
    let mut p = -1.0;
    for n in [2usize, 3, 5, 7] {
        let a = CString::new("intercept_resend").unwrap();
        assert_eq!(unsafe { hq_oracle(a.as_ptr(), n, 4, 1, &mut p) }, HqStatus::Ok);
        assert!((p - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
    }
    let a = CString::new("honest").unwrap();
    assert_eq!(unsafe { hq_oracle(a.as_ptr(), 3, 4, 2, &mut p) }, HqStatus::Ok);
    assert_eq!(p, 0.0);
    let a = CString::new(r#"{"kind":"intercept_resend","channel":{"chain_link":1},"basis":"fourier"}"#).unwrap();
    assert_eq!(unsafe { hq_oracle(a.as_ptr(), 3, 4, 1, &mut p) }, HqStatus::Unsupported);
    let a = CString::new("warp_drive").unwrap();
    assert_eq!(unsafe { hq_oracle(a.as_ptr(), 3, 4, 1, &mut p) }, HqStatus::Config);
}

#[test]
fn version_matches_the_crate() {
    assert_eq!(text(hq_version()), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libhdqchain_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/hdqchain.h");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "hdqchain.h"
int main(void) {
    HqRun *run = NULL;
    HqStatus s = hq_run_new("{\"qudit_dim\": 3, \"n_blocks\": 3, \"m_symbols\": 1, \"trials\": 20}", &run);
    if (s != HQ_STATUS_OK) { fprintf(stderr, "%s\n", hq_last_error()); return 1; }
    size_t rows = hq_run_row_count(run);
    double p = 0.0;
    if (hq_oracle("intercept_resend", 3, 3, 1, &p) != HQ_STATUS_OK) return 2;
    printf("%zu %s %.6f\n", rows, hq_run_all_pass(run) ? "pass" : "fail", p);
    hq_run_free(run);
    return hq_run_new("{", &run) == HQ_STATUS_CONFIG && run == NULL ? 0 : 3;
}
"#,
    )
    .unwrap();
    let inc = header.parent().unwrap();
    let syntax = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(inc).arg(&src).status();
    let Ok(syntax) = syntax else {
        eprintln!("no C compiler on PATH; header not checked");
        return;
    };
    assert!(syntax.success());

    let Some(lib) = static_lib() else {
        eprintln!("static library not built for this profile; link step skipped");
        return;
    };
    let exe = tmp.path().join("smoke");
    let st = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(inc)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1 pass 0.666667\n");
}
