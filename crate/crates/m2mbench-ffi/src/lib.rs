//! C ABI over the metric engine: opaque handles, integer status codes,
//! and a thread-local last-error message.
//!
//! Status codes mirror the CLI exit codes: 0 success, 1 invalid
//! argument (null pointer, non-UTF-8 string, short buffer), 2
//! configuration error, 3 data error, 4 metric undefined, 5 selfcheck
//! failure. Every function that can fail stores a message retrievable
//! with `m2mbench_last_error` until the next failing call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use m2mbench::config::{builtin_config, load_config, DatasetConfig};
use m2mbench::error::Error;
use m2mbench::io::{load_manifest, load_triplets};
use m2mbench::metrics::{
    compute_report, EvalOptions, LabelSource, MetricReport, TranslationTriplet,
};
use m2mbench::oracles::{
    generate_triplets, parse_oracle, OracleKind, OracleSpec, Pairing, DEFAULT_PAIR_CAP,
};
use m2mbench::schema::Domain;
use m2mbench::splitter::check_manifest;

pub const M2MBENCH_OK: c_int = 0;
pub const M2MBENCH_ERR_INVALID: c_int = 1;
pub const M2MBENCH_ERR_CONFIG: c_int = 2;
pub const M2MBENCH_ERR_DATA: c_int = 3;
pub const M2MBENCH_ERR_METRIC_UNDEFINED: c_int = 4;
pub const M2MBENCH_ERR_SELFCHECK: c_int = 5;

pub const M2MBENCH_METRIC_Q_TR: c_int = 0;
pub const M2MBENCH_METRIC_D_S: c_int = 1;
pub const M2MBENCH_METRIC_D_C: c_int = 2;
pub const M2MBENCH_METRIC_BIAS: c_int = 3;
pub const M2MBENCH_METRIC_D: c_int = 4;
pub const M2MBENCH_METRIC_D_C_MEAN: c_int = 5;
pub const M2MBENCH_METRIC_Q_TR_MEAN: c_int = 6;

pub const M2MBENCH_DIRECTION_A2B: c_int = 0;
pub const M2MBENCH_DIRECTION_B2A: c_int = 1;

/// Opaque dataset configuration (schema + partition).
#[allow(non_camel_case_types)]
pub struct m2mbench_config {
    inner: DatasetConfig,
}

/// Opaque triplet collection.
#[allow(non_camel_case_types)]
pub struct m2mbench_triplets {
    inner: Vec<TranslationTriplet>,
}

/// Opaque evaluation result.
#[allow(non_camel_case_types)]
pub struct m2mbench_report {
    inner: MetricReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn code_for(error: &Error) -> c_int {
    match error {
        Error::Config(_) => M2MBENCH_ERR_CONFIG,
        Error::Data(_) | Error::Io(_) => M2MBENCH_ERR_DATA,
        Error::MetricUndefined(_) => M2MBENCH_ERR_METRIC_UNDEFINED,
    }
}

fn fail(error: &Error) -> c_int {
    set_error(&error.to_string());
    code_for(error)
}

fn invalid(message: &str) -> c_int {
    set_error(message);
    M2MBENCH_ERR_INVALID
}

/// Runs `body` with panics converted to an invalid-argument status so
/// unwinding never crosses the ABI boundary.
fn guarded(body: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => invalid("internal panic"),
    }
}

/// # Safety
/// `text` must be null or a valid NUL-terminated string.
unsafe fn utf8<'a>(text: *const c_char, what: &str) -> Result<&'a str, c_int> {
    if text.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &str) -> c_int {
    if out.is_null() {
        return invalid(&format!("{what} output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    M2MBENCH_OK
}

/// Most recent error message for this thread; empty string when no
/// call has failed yet. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn m2mbench_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn m2mbench_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads a shipped configuration by dataset name
/// (3dshapes, synaction, celeba_d).
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. The handle must be released with `m2mbench_config_free`.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_config_builtin(
    name: *const c_char,
    out: *mut *mut m2mbench_config,
) -> c_int {
    guarded(|| {
        let name = match utf8(name, "dataset name") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match builtin_config(name) {
            Ok(inner) => write_out(out, m2mbench_config { inner }, "config"),
            Err(e) => fail(&e),
        }
    })
}

/// Loads a configuration from schema and partition files.
///
/// # Safety
/// Both paths must be valid NUL-terminated strings; `out` must be a
/// valid pointer. Release the handle with `m2mbench_config_free`.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_config_open(
    schema_path: *const c_char,
    partition_path: *const c_char,
    out: *mut *mut m2mbench_config,
) -> c_int {
    guarded(|| {
        let schema = match utf8(schema_path, "schema path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let partition = match utf8(partition_path, "partition path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match load_config(Path::new(schema), Path::new(partition)) {
            Ok(inner) => write_out(out, m2mbench_config { inner }, "config"),
            Err(e) => fail(&e),
        }
    })
}

/// Writes the 64-hex-digit partition hash (plus NUL) into `buf`.
/// `buf_len` must be at least 65.
///
/// # Safety
/// `config` must be a live handle from this library; `buf` must point
/// to at least `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_config_partition_hash(
    config: *const m2mbench_config,
    buf: *mut c_char,
    buf_len: usize,
) -> c_int {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return invalid("config is null");
        };
        if buf.is_null() {
            return invalid("buffer is null");
        }
        let hash = config.inner.partition_hash();
        if buf_len < hash.len() + 1 {
            return invalid("buffer must hold at least 65 bytes");
        }
        ptr::copy_nonoverlapping(hash.as_ptr() as *const c_char, buf, hash.len());
        *buf.add(hash.len()) = 0;
        M2MBENCH_OK
    })
}

/// # Safety
/// `config` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_config_free(config: *mut m2mbench_config) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Loads a triplet JSONL file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. Release the handle with `m2mbench_triplets_free`.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_triplets_open(
    path: *const c_char,
    out: *mut *mut m2mbench_triplets,
) -> c_int {
    guarded(|| {
        let path = match utf8(path, "triplet path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match load_triplets(Path::new(path)) {
            Ok((inner, _header)) => write_out(out, m2mbench_triplets { inner }, "triplets"),
            Err(e) => fail(&e),
        }
    })
}

/// Number of triplets in the collection; 0 for a null handle.
///
/// # Safety
/// `triplets` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_triplets_len(triplets: *const m2mbench_triplets) -> u64 {
    triplets.as_ref().map_or(0, |t| t.inner.len() as u64)
}

/// # Safety
/// `triplets` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_triplets_free(triplets: *mut m2mbench_triplets) {
    if !triplets.is_null() {
        drop(Box::from_raw(triplets));
    }
}

/// Generates triplets under a named oracle from two manifest files.
/// `epsilon < 0` disables label noise; `exhaustive != 0` enumerates
/// every cross-domain pair instead of sampling `pairs` per direction.
///
/// # Safety
/// `config` must be a live handle; the paths and `oracle` must be
/// valid NUL-terminated strings; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_simulate(
    config: *const m2mbench_config,
    manifest_a_path: *const c_char,
    manifest_b_path: *const c_char,
    oracle: *const c_char,
    epsilon: f64,
    pairs: u64,
    seed: u64,
    exhaustive: c_int,
    out: *mut *mut m2mbench_triplets,
) -> c_int {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return invalid("config is null");
        };
        let manifest_a = match utf8(manifest_a_path, "manifest A path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let manifest_b = match utf8(manifest_b_path, "manifest B path") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let oracle = match utf8(oracle, "oracle") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let result = (|| {
            let a = load_manifest(Path::new(manifest_a))?;
            let b = load_manifest(Path::new(manifest_b))?;
            let schema = &config.inner.schema;
            let partition = &config.inner.partition;
            let hash = config.inner.partition_hash();
            check_manifest(&a, schema, partition, &hash, Domain::A, "manifest A")?;
            check_manifest(&b, schema, partition, &hash, Domain::B, "manifest B")?;
            let mut kind = parse_oracle(oracle, &config.inner.schema, &config.inner.partition)?;
            if epsilon >= 0.0 {
                kind = OracleKind::Composite {
                    epsilon,
                    inner: Box::new(kind),
                };
                kind.validate(&config.inner.schema)?;
            }
            let spec = OracleSpec { kind, seed };
            generate_triplets(
                &spec,
                &config.inner.schema,
                &config.inner.partition,
                &a,
                &b,
                pairs,
                if exhaustive != 0 {
                    Pairing::Exhaustive
                } else {
                    Pairing::UniformRandom
                },
                DEFAULT_PAIR_CAP,
            )
        })();
        match result {
            Ok(inner) => write_out(out, m2mbench_triplets { inner }, "triplets"),
            Err(e) => fail(&e),
        }
    })
}

/// Scores a triplet collection. `ground_truth != 0` evaluates against
/// the ground-truth vectors carried by the triplets.
///
/// # Safety
/// `config` and `triplets` must be live handles; `out` must be a valid
/// pointer. Release the handle with `m2mbench_report_free`.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_evaluate(
    config: *const m2mbench_config,
    triplets: *const m2mbench_triplets,
    bias_threshold: f64,
    ground_truth: c_int,
    out: *mut *mut m2mbench_report,
) -> c_int {
    guarded(|| {
        let Some(config) = config.as_ref() else {
            return invalid("config is null");
        };
        let Some(triplets) = triplets.as_ref() else {
            return invalid("triplets is null");
        };
        let options = EvalOptions {
            label_source: if ground_truth != 0 {
                LabelSource::GroundTruth
            } else {
                LabelSource::AsGiven
            },
            bias_threshold,
        };
        match compute_report(
            &triplets.inner,
            &config.inner.schema,
            &config.inner.partition,
            &options,
        ) {
            Ok(inner) => write_out(out, m2mbench_report { inner }, "report"),
            Err(e) => fail(&e),
        }
    })
}

/// Reads one metric value (percent) out of a report. `direction` is
/// ignored for the aggregate metrics (`D`, mean content, mean
/// translation quality, bias).
///
/// # Safety
/// `report` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_report_value(
    report: *const m2mbench_report,
    metric: c_int,
    direction: c_int,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(report) = report.as_ref() else {
            return invalid("report is null");
        };
        if out.is_null() {
            return invalid("value output pointer is null");
        }
        let r = &report.inner;
        let a2b = match direction {
            M2MBENCH_DIRECTION_A2B => true,
            M2MBENCH_DIRECTION_B2A => false,
            _ => return invalid("direction must be 0 (A2B) or 1 (B2A)"),
        };
        let value = match metric {
            M2MBENCH_METRIC_Q_TR => {
                if a2b {
                    r.q_tr_a2b.value_percent
                } else {
                    r.q_tr_b2a.value_percent
                }
            }
            M2MBENCH_METRIC_D_S => {
                if a2b {
                    r.d_s_a2b.value_percent
                } else {
                    r.d_s_b2a.value_percent
                }
            }
            M2MBENCH_METRIC_D_C => {
                if a2b {
                    r.d_c_a2b.value_percent
                } else {
                    r.d_c_b2a.value_percent
                }
            }
            M2MBENCH_METRIC_BIAS => r.bias.value_percent,
            M2MBENCH_METRIC_D => r.aggregates.d,
            M2MBENCH_METRIC_D_C_MEAN => r.aggregates.d_c_mean,
            M2MBENCH_METRIC_Q_TR_MEAN => r.aggregates.q_tr_mean,
            _ => return invalid("unknown metric selector"),
        };
        *out = value;
        M2MBENCH_OK
    })
}

/// 1 when the report's bias exceeds its threshold, 0 when not, -1 for
/// a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_report_low_confidence(report: *const m2mbench_report) -> c_int {
    report
        .as_ref()
        .map_or(-1, |r| c_int::from(r.inner.aggregates.low_confidence))
}

/// Full report serialized as JSON. Returns NULL on failure; release
/// the string with `m2mbench_string_free`.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_report_json(report: *const m2mbench_report) -> *mut c_char {
    let Some(report) = report.as_ref() else {
        invalid("report is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&report.inner) {
        Ok(json) => match CString::new(json) {
            Ok(s) => s.into_raw(),
            Err(_) => {
                invalid("report contains an interior NUL");
                ptr::null_mut()
            }
        },
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_report_free(report: *mut m2mbench_report) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library; it is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn m2mbench_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the built-in consistency suite. Returns 0 when every check
/// passes, 5 otherwise (the first failure's message is retrievable via
/// `m2mbench_last_error`).
#[no_mangle]
pub extern "C" fn m2mbench_selfcheck() -> c_int {
    guarded(|| {
        let checks = m2mbench::selfcheck::run_selfcheck();
        for check in &checks {
            if !check.passed {
                set_error(&format!("{}: {}", check.name, check.detail));
                return M2MBENCH_ERR_SELFCHECK;
            }
        }
        M2MBENCH_OK
    })
}
