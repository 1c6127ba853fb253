//! C ABI for running scenario configs and querying detection oracles.
//!
//! Strings passed in are NUL-terminated UTF-8. Strings handed out are owned
//! by the library: those from a run stay valid until `hq_run_free`, and the
//! last error message until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hdqchain::adversary::{detection_oracle, AttackScenario};
use hdqchain::runner::{csv_string, run_scenario, RunReport, ScenarioConfig, GOLDEN_TRANSCRIPT_HASH};
use hdqchain::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Resource = 4,
    Domain = 5,
    Ordering = 6,
    IncompleteInput = 7,
    ProtocolViolation = 8,
    Unsupported = 9,
    Io = 10,
    OutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for HqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => HqStatus::Domain,
            Error::Resource { .. } => HqStatus::Resource,
            Error::Ordering(_) => HqStatus::Ordering,
            Error::IncompleteInput(_) => HqStatus::IncompleteInput,
            Error::ProtocolViolation(_) => HqStatus::ProtocolViolation,
            Error::Config(_) => HqStatus::Config,
            Error::Unsupported(_) => HqStatus::Unsupported,
            Error::Io(_) => HqStatus::Io,
        }
    }
}

/// Finished run: the report plus its JSON and CSV renderings.
pub struct HqRun {
    report: RunReport,
    json: CString,
    csv: CString,
    transcript_hash: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HqStatus, msg: impl Into<String>) -> HqStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> HqStatus) -> HqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(HqStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, HqStatus> {
    if p.is_null() {
        return Err(fail(HqStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(HqStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn from_error(e: Error) -> HqStatus {
    let s = HqStatus::from(&e);
    fail(s, e.to_string())
}

fn new_run(config_json: *const c_char, seed: Option<u64>, out: *mut *mut HqRun) -> HqStatus {
    guard(|| {
        if out.is_null() {
            return fail(HqStatus::NullArgument, "out is null");
        }
        unsafe { *out = ptr::null_mut() };
        let text = match unsafe { read_str(config_json, "config_json") } {
            Ok(t) => t,
            Err(s) => return s,
        };
        let mut cfg = match ScenarioConfig::from_json_str(text) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let report = match run_scenario(&cfg) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let run = HqRun {
            json: CString::new(report.to_json()).expect("JSON has no NULs"),
            csv: CString::new(csv_string(&report)).expect("CSV has no NULs"),
            transcript_hash: CString::new(report.transcript_hash.clone()).expect("hex"),
            report,
        };
        unsafe { *out = Box::into_raw(Box::new(run)) };
        HqStatus::Ok
    })
}

/// Parses and runs a JSON scenario config. On success `*out` owns a new
/// handle; on failure it is set to null.
///
/// # Safety
/// `config_json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hq_run_new(config_json: *const c_char, out: *mut *mut HqRun) -> HqStatus {
    new_run(config_json, None, out)
}

/// As `hq_run_new`, with the config's seed replaced by `seed`.
///
/// # Safety
/// Same as `hq_run_new`.
#[no_mangle]
pub unsafe extern "C" fn hq_run_new_seeded(config_json: *const c_char, seed: u64, out: *mut *mut HqRun) -> HqStatus {
    new_run(config_json, Some(seed), out)
}

/// # Safety
/// `run` must come from `hq_run_new*` and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn hq_run_free(run: *mut HqRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_run_all_pass(run: *const HqRun) -> bool {
    run.as_ref().is_some_and(|r| r.report.all_pass)
}

/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_run_row_count(run: *const HqRun) -> usize {
    run.as_ref().map_or(0, |r| r.report.rows.len())
}

/// Detected count, trial count and rate of row `index`. Any out pointer may be null.
///
/// # Safety
/// `run` must be a live handle; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hq_run_row(
    run: *const HqRun,
    index: usize,
    detected: *mut u64,
    trials: *mut u64,
    rate: *mut f64,
) -> HqStatus {
    let Some(run) = run.as_ref() else {
        return fail(HqStatus::NullArgument, "run is null");
    };
    let Some(row) = run.report.rows.get(index) else {
        return fail(HqStatus::OutOfRange, format!("row {index} of {}", run.report.rows.len()));
    };
    if !detected.is_null() {
        *detected = row.stats.detected;
    }
    if !trials.is_null() {
        *trials = row.stats.trials;
    }
    if !rate.is_null() {
        *rate = row.stats.detection_rate;
    }
    HqStatus::Ok
}

/// Pretty JSON report, newline terminated. Borrowed from `run`.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_run_report_json(run: *const HqRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_run_csv(run: *const HqRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.csv.as_ptr())
}

/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hq_run_transcript_hash(run: *const HqRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.transcript_hash.as_ptr())
}

/// Closed-form detection probability. `attack` is either a bare kind such as
/// `"intercept_resend"` or a full JSON scenario object. Returns
/// `HQ_STATUS_UNSUPPORTED` where no closed form exists.
///
/// # Safety
/// `attack` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_oracle(
    attack: *const c_char,
    qudit_dim: usize,
    n_blocks: usize,
    m_symbols: usize,
    out: *mut f64,
) -> HqStatus {
    guard(|| {
        if out.is_null() {
            return fail(HqStatus::NullArgument, "out is null");
        }
        let text = match read_str(attack, "attack") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let json = if text.trim_start().starts_with('{') { text.to_string() } else { format!(r#"{{"kind":"{text}"}}"#) };
        let scenario: AttackScenario = match serde_json::from_str(&json) {
            Ok(s) => s,
            Err(e) => return fail(HqStatus::Config, format!("attack: {e}")),
        };
        match detection_oracle(&scenario, n_blocks, qudit_dim, m_symbols) {
            Ok(p) => {
                *out = p;
                HqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Message for the last failure on this thread, or null.
#[no_mangle]
pub extern "C" fn hq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hash of the reference honest run with four blocks, N = 2, one symbol, seed 0.
#[no_mangle]
pub extern "C" fn hq_golden_transcript_hash() -> *const c_char {
    static HASH: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    HASH.get_or_init(|| CString::new(GOLDEN_TRANSCRIPT_HASH).expect("hex")).as_ptr()
}
