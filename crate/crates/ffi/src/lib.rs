//! C ABI over the termflow core.
//!
//! Every fallible call returns a [`TfStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and read with
//! [`tf_last_error_message`]. Strings returned by the library are owned by
//! the caller and released with [`tf_string_free`]; corpora with
//! [`tf_corpus_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use termflow::corpus::{load_corpus, BinScheme, CorpusIndex, TermQuery};
use termflow::diffusion::{adoption_rate, DiffusionParams};
use termflow::migration::{classify_roles, StrongThreshold};
use termflow::rank::{normal_percentile, poisson_cdf};
use termflow::trend::{analyze, SmoothingOrder, TrendConfig};
use termflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    MalformedInput = 4,
    InvalidArgument = 5,
    NotFound = 6,
    AnalysisFailed = 7,
    Panic = 8,
}

/// Opaque handle to an immutable corpus index.
pub struct TfCorpus {
    index: CorpusIndex,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

struct Failure(TfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = e.code();
        let status = match code.as_str() {
            "corpus.io" | "io.io" => TfStatus::Io,
            "corpus.malformed_record" | "io.json" | "io.csv" => TfStatus::MalformedInput,
            "corpus.unknown_discipline" | "corpus.unknown_bin" => TfStatus::NotFound,
            c if c.starts_with("migration.") || c.starts_with("trend.") => TfStatus::AnalysisFailed,
            _ => TfStatus::InvalidArgument,
        };
        Failure(status, format!("{code}: {e}"))
    }
}

fn fail(status: TfStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

/// Run `body`, record any failure and convert panics to [`TfStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            TfStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TfStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(fail(TfStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(TfStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn corpus<'a>(handle: *const TfCorpus) -> Result<&'a CorpusIndex, Failure> {
    handle
        .as_ref()
        .map(|c| &c.index)
        .ok_or_else(|| fail(TfStatus::NullArgument, "corpus is null"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(TfStatus::NullArgument, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(TfStatus::AnalysisFailed, "output contains a NUL byte"))
}

fn params(c: f64, p_m: f64, p_0: f64) -> Result<DiffusionParams, Failure> {
    DiffusionParams::new(c, p_m, p_0).map_err(|e| Failure::from(Error::from(e)))
}

/// Message of the last failed call on this thread, or null after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Load a JSON-lines or CSV corpus (by extension) into `*out`.
/// `bin_width` of 0 selects the default two-year bins.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_corpus_load(path: *const c_char, bin_width: u32, out: *mut *mut TfCorpus) -> TfStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() {
            return Err(fail(TfStatus::NullArgument, "output pointer is null"));
        }
        let scheme = match bin_width {
            0 => BinScheme::default(),
            w => BinScheme::new(w).map_err(|e| Failure::from(Error::from(e)))?,
        };
        let index = load_corpus(Path::new(path), None, scheme).map_err(|e| Failure::from(Error::from(e)))?;
        write(out, Box::into_raw(Box::new(TfCorpus { index })))
    })
}

/// # Safety
/// `corpus` must come from [`tf_corpus_load`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tf_corpus_free(corpus: *mut TfCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_corpus_document_count(corpus: *const TfCorpus, out: *mut u64) -> TfStatus {
    guard(|| write(out, self::corpus(corpus)?.total_documents() as u64))
}

/// Documents in one (discipline, bin) cell matching `term`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tf_count_matches(
    corpus: *const TfCorpus,
    term: *const c_char,
    discipline: *const c_char,
    bin_start: i32,
    out: *mut u32,
) -> TfStatus {
    guard(|| {
        let index = self::corpus(corpus)?;
        let query = TermQuery::single(text(term, "term")?).map_err(|e| Failure::from(Error::from(e)))?;
        let n = index
            .count_matches(&query, text(discipline, "discipline")?, bin_start)
            .map_err(|e| Failure::from(Error::from(e)))?;
        write(out, n)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_poisson_cdf(k: u64, lambda: f64, out: *mut f64) -> TfStatus {
    guard(|| write(out, poisson_cdf(k, lambda).map_err(|e| Failure::from(Error::from(e)))?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_normal_percentile(k: u64, lambda: f64, out: *mut f64) -> TfStatus {
    guard(|| write(out, normal_percentile(k, lambda).map_err(|e| Failure::from(Error::from(e)))?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_adoption_rate(c: f64, p_m: f64, p_0: f64, p: f64, out: *mut f64) -> TfStatus {
    guard(|| {
        let rate = adoption_rate(p, &params(c, p_m, p_0)?).map_err(|e| Failure::from(Error::from(e)))?;
        write(out, rate)
    })
}

/// Closed-form adopters at time `t`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_logistic_at(c: f64, p_m: f64, p_0: f64, t: f64, out: *mut f64) -> TfStatus {
    guard(|| write(out, params(c, p_m, p_0)?.at(t)))
}

/// Growth series for `term` in `discipline` as CSV in `*out`.
///
/// # Safety
/// Pointers must be valid; free `*out` with [`tf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tf_trend_csv(
    corpus: *const TfCorpus,
    term: *const c_char,
    discipline: *const c_char,
    smoothing_window: u32,
    support_threshold: u32,
    out: *mut *mut c_char,
) -> TfStatus {
    guard(|| {
        let index = self::corpus(corpus)?;
        let query = TermQuery::single(text(term, "term")?).map_err(|e| Failure::from(Error::from(e)))?;
        let config = TrendConfig {
            smoothing_window: smoothing_window as usize,
            support_threshold,
            order: SmoothingOrder::default(),
        };
        let series = analyze(index, &query, text(discipline, "discipline")?, &config)
            .map_err(|e| Failure::from(Error::from(e)))?;
        let mut buffer = Vec::new();
        series.write_csv(&mut buffer).map_err(|e| Failure::from(Error::from(e)))?;
        let csv = String::from_utf8(buffer).map_err(|_| fail(TfStatus::InvalidUtf8, "csv output"))?;
        write(out, owned_string(csv)?)
    })
}

/// Donor/borrower report for `term` across every discipline as JSON in
/// `*out`. Peaks at or above `strong_fraction` of the highest peak count
/// as strong.
///
/// # Safety
/// Pointers must be valid; free `*out` with [`tf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tf_migrate_json(
    corpus: *const TfCorpus,
    term: *const c_char,
    strong_fraction: f64,
    out: *mut *mut c_char,
) -> TfStatus {
    guard(|| {
        let index = self::corpus(corpus)?;
        let query = TermQuery::single(text(term, "term")?).map_err(|e| Failure::from(Error::from(e)))?;
        let config = TrendConfig::default();
        let series = index
            .disciplines()
            .iter()
            .map(|d| analyze(index, &query, d, &config))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::from(Error::from(e)))?;
        let report =
            classify_roles(&series, StrongThreshold::Relative(strong_fraction)).map_err(|e| Failure::from(Error::from(e)))?;
        let mut buffer = Vec::new();
        report.write_json(&mut buffer).map_err(|e| Failure::from(Error::from(e)))?;
        let json = String::from_utf8(buffer).map_err(|_| fail(TfStatus::InvalidUtf8, "json output"))?;
        write(out, owned_string(json)?)
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
