//! C ABI over `wetval-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_load` /
//! `*_fit` functions and released with the matching `*_free`. Fallible calls
//! return a [`WvStatus`]; the message for the most recent failure on the
//! calling thread is available from [`wv_last_error_message`]. Strings
//! returned by `wv_*_to_json` are owned by the caller and released with
//! [`wv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use wetval_core::design::{encode, EncodingSchema};
use wetval_core::error::{Error, EXIT_IO, EXIT_NUMERICAL};
use wetval_core::model::ModelDocument;
use wetval_core::ols::{adjusted_r_squared, f_statistic, fit_ols};
use wetval_core::quality::code_records;
use wetval_core::records::{parse_dataset_path, NormalizationTables, StudyRecord};
use wetval_core::screening::{screen, ScreeningReport};
use wetval_core::special::{f_upper_tail, t_p_value_two_sided};
use wetval_core::transfer::{
    parse_policy_sites_path, predict_value, transfer_error, BackTransform, PolicySite,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input data.
    InputError = 3,
    /// Rank deficiency or invalid degrees of freedom.
    NumericalError = 4,
    IoError = 5,
    IndexOutOfRange = 6,
    /// A Rust panic was caught at the boundary.
    InternalError = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WvBackTransform {
    NaiveExp = 0,
    HalfVarianceCorrected = 1,
}

impl From<WvBackTransform> for BackTransform {
    fn from(m: WvBackTransform) -> Self {
        match m {
            WvBackTransform::NaiveExp => BackTransform::NaiveExp,
            WvBackTransform::HalfVarianceCorrected => BackTransform::HalfVarianceCorrected,
        }
    }
}

/// Screened and quality-coded study records plus normalization tables.
pub struct WvDataset {
    report: ScreeningReport,
    records: Vec<StudyRecord>,
    tables: NormalizationTables,
}

/// A fitted model with its encoding schema.
pub struct WvFit {
    doc: ModelDocument,
    labels: Vec<CString>,
}

/// Policy sites for transfer.
pub struct WvSites {
    sites: Vec<PolicySite>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> WvStatus {
    match err.exit_code() {
        EXIT_NUMERICAL => WvStatus::NumericalError,
        EXIT_IO => WvStatus::IoError,
        _ => WvStatus::InputError,
    }
}

fn fail(status: WvStatus, msg: impl Into<String>) -> WvStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> WvStatus>(f: F) -> WvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(
            WvStatus::InternalError,
            "internal error: panic caught at the C boundary",
        ),
    }
}

fn core_err(e: impl Into<Error>) -> WvStatus {
    let e = e.into();
    fail(status_of(&e), e.to_string())
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, WvStatus> {
    str_arg(p, name).map(PathBuf::from)
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, WvStatus> {
    if p.is_null() {
        return Err(fail(WvStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WvStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(WvStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

macro_rules! try_arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next `wv_*` call on the same thread.
#[no_mangle]
pub extern "C" fn wv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a `wv_*` function returning an owned string.
#[no_mangle]
pub unsafe extern "C" fn wv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads, screens and quality-codes a dataset.
///
/// # Safety
/// Paths must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wv_dataset_load(
    data_path: *const c_char,
    rates_path: *const c_char,
    out: *mut *mut WvDataset,
) -> WvStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        let data = try_arg!(path_arg(data_path, "data_path"));
        let rates = try_arg!(path_arg(rates_path, "rates_path"));
        let records = match parse_dataset_path(&data) {
            Ok(r) => r,
            Err(e) => return core_err(e),
        };
        let tables = match NormalizationTables::from_path(&rates) {
            Ok(t) => t,
            Err(e) => return core_err(e),
        };
        let report = screen(&records);
        let records = code_records(&report.retained);
        *out = Box::into_raw(Box::new(WvDataset {
            report,
            records,
            tables,
        }));
        WvStatus::Ok
    })
}

/// # Safety
/// `ds` must be null or a handle from [`wv_dataset_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn wv_dataset_free(ds: *mut WvDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Records read before screening.
///
/// # Safety
/// `ds` must be a live dataset handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn wv_dataset_ingested(ds: *const WvDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.report.ingested)
}

/// Records retained by screening.
///
/// # Safety
/// As [`wv_dataset_ingested`].
#[no_mangle]
pub unsafe extern "C" fn wv_dataset_retained(ds: *const WvDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.records.len())
}

/// Distinct articles among the retained records.
///
/// # Safety
/// As [`wv_dataset_ingested`].
#[no_mangle]
pub unsafe extern "C" fn wv_dataset_articles(ds: *const WvDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.report.article_count)
}

/// Fits the meta-regression on a dataset. `schema_toml` may be null for the
/// default layout.
///
/// # Safety
/// `ds` must be live; `schema_toml` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_fit(
    ds: *const WvDataset,
    schema_toml: *const c_char,
    out: *mut *mut WvFit,
) -> WvStatus {
    guard(|| {
        non_null!(ds, out);
        *out = ptr::null_mut();
        let ds = &*ds;
        let schema = if schema_toml.is_null() {
            EncodingSchema::default_schema()
        } else {
            match EncodingSchema::from_toml(try_arg!(str_arg(schema_toml, "schema_toml"))) {
                Ok(s) => s,
                Err(e) => return core_err(e),
            }
        };
        let design = match encode(&ds.records, &schema, &ds.tables) {
            Ok(d) => d,
            Err(e) => return core_err(e),
        };
        let fit = match fit_ols(&design) {
            Ok(f) => f,
            Err(e) => return core_err(e),
        };
        match ModelDocument::new(schema, fit) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(WvFit::new(doc)));
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

impl WvFit {
    fn new(doc: ModelDocument) -> Self {
        let labels = doc
            .fit
            .column_labels
            .iter()
            .map(|l| CString::new(l.replace('\0', " ")).expect("NUL removed"))
            .collect();
        WvFit { doc, labels }
    }
}

/// # Safety
/// `fit` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_free(fit: *mut WvFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of parameters including the intercept.
///
/// # Safety
/// `fit` must be live or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn wv_fit_num_params(fit: *const WvFit) -> usize {
    fit.as_ref().map_or(0, |f| f.doc.fit.coefficients.len())
}

/// Label of parameter `index`, owned by the fit; null when out of range.
///
/// # Safety
/// `fit` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_label(fit: *const WvFit, index: usize) -> *const c_char {
    fit.as_ref()
        .and_then(|f| f.labels.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Per-parameter statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WvParameter {
    pub coefficient: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

/// Whole-model statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WvFitSummary {
    pub n: usize,
    pub df_residual: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
    pub sigma2: f64,
}

/// # Safety
/// `fit` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_parameter(
    fit: *const WvFit,
    index: usize,
    out: *mut WvParameter,
) -> WvStatus {
    guard(|| {
        non_null!(fit, out);
        let f = &(*fit).doc.fit;
        if index >= f.coefficients.len() {
            return fail(
                WvStatus::IndexOutOfRange,
                format!(
                    "parameter {index} out of range (model has {})",
                    f.coefficients.len()
                ),
            );
        }
        *out = WvParameter {
            coefficient: f.coefficients[index],
            std_error: f.std_errors[index],
            t_value: f.t_values[index],
            p_value: f.p_values[index],
        };
        WvStatus::Ok
    })
}

/// # Safety
/// `fit` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_summary(fit: *const WvFit, out: *mut WvFitSummary) -> WvStatus {
    guard(|| {
        non_null!(fit, out);
        let f = &(*fit).doc.fit;
        *out = WvFitSummary {
            n: f.n,
            df_residual: f.df_residual,
            r2: f.r2,
            adj_r2: f.adj_r2,
            f_stat: f.f_stat,
            f_p_value: f.f_p_value,
            sigma2: f.sigma2,
        };
        WvStatus::Ok
    })
}

/// Serializes the model (schema + fit) as JSON into `*out`; release with
/// [`wv_string_free`].
///
/// # Safety
/// `fit` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_to_json(fit: *const WvFit, out: *mut *mut c_char) -> WvStatus {
    guard(|| {
        non_null!(fit, out);
        *out = ptr::null_mut();
        match CString::new((*fit).doc.to_json()) {
            Ok(s) => {
                *out = s.into_raw();
                WvStatus::Ok
            }
            Err(_) => fail(WvStatus::InternalError, "model JSON contains NUL"),
        }
    })
}

/// Restores a model saved by [`wv_fit_to_json`] or the `fit` command.
///
/// # Safety
/// `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_fit_from_json(json: *const c_char, out: *mut *mut WvFit) -> WvStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        let text = try_arg!(str_arg(json, "json"));
        match ModelDocument::from_json(text) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(WvFit::new(doc)));
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

/// Reads policy sites from CSV.
///
/// # Safety
/// `path` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_sites_load(path: *const c_char, out: *mut *mut WvSites) -> WvStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        let path = try_arg!(path_arg(path, "path"));
        match parse_policy_sites_path(&path) {
            Ok(sites) => {
                *out = Box::into_raw(Box::new(WvSites { sites }));
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

/// # Safety
/// `sites` null or a handle from [`wv_sites_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn wv_sites_free(sites: *mut WvSites) {
    if !sites.is_null() {
        drop(Box::from_raw(sites));
    }
}

/// # Safety
/// `sites` live or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn wv_sites_count(sites: *const WvSites) -> usize {
    sites.as_ref().map_or(0, |s| s.sites.len())
}

/// Function transfer to site `index`: log prediction and back-transformed
/// value (2007 US$ per ha per year).
///
/// # Safety
/// Handles live; output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn wv_predict(
    fit: *const WvFit,
    sites: *const WvSites,
    index: usize,
    mode: WvBackTransform,
    out_log: *mut f64,
    out_value: *mut f64,
) -> WvStatus {
    guard(|| {
        non_null!(fit, sites, out_log, out_value);
        let doc = &(*fit).doc;
        let sites = &*sites;
        let Some(site) = sites.sites.get(index) else {
            return fail(
                WvStatus::IndexOutOfRange,
                format!("site {index} out of range"),
            );
        };
        match predict_value(&doc.fit, &doc.schema, site, mode.into()) {
            Ok(p) => {
                *out_log = p.log_prediction;
                *out_value = p.value_prediction;
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

/// Two-sided Student-t p-value; NaN for invalid arguments.
#[no_mangle]
pub extern "C" fn wv_t_p_value(t: f64, df: f64) -> f64 {
    t_p_value_two_sided(t, df)
}

/// Upper tail P(F ≥ f) of F(d1, d2); NaN for invalid arguments.
#[no_mangle]
pub extern "C" fn wv_f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    f_upper_tail(f, d1, d2)
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_adjusted_r_squared(
    r2: f64,
    n: usize,
    k: usize,
    out: *mut f64,
) -> WvStatus {
    guard(|| {
        non_null!(out);
        match adjusted_r_squared(r2, n, k) {
            Ok(v) => {
                *out = v;
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_f_statistic(r2: f64, n: usize, k: usize, out: *mut f64) -> WvStatus {
    guard(|| {
        non_null!(out);
        match f_statistic(r2, n, k) {
            Ok(v) => {
                *out = v;
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}

/// |predicted − observed| / observed.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wv_transfer_error(
    predicted: f64,
    observed: f64,
    out: *mut f64,
) -> WvStatus {
    guard(|| {
        non_null!(out);
        match transfer_error(predicted, observed) {
            Ok(v) => {
                *out = v;
                WvStatus::Ok
            }
            Err(e) => core_err(e),
        }
    })
}
