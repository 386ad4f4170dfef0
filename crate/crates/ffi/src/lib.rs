//! C interface to `forestcheck`.
//!
//! Models and reports are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an [`FcStatus`];
//! on failure the message is available from [`fc_last_error`] on the same
//! thread until the next call. Strings handed out by the library must be
//! released with [`fc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use forestcheck::audit::{AuditReport, ConfigEcho, ModelSummary};
use forestcheck::explain::abductive_explanation;
use forestcheck::ingest::{parse_space_config, GbtOptions, ModelBundle};
use forestcheck::model::decimal::format_rational;
use forestcheck::model::{Ensemble, FeatureSpace, Point};
use forestcheck::spec::parse_spec_entries;
use forestcheck::verify::{verify_suite, Limits};
use forestcheck::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed model, space, specification or instance.
    InvalidInput = 3,
    /// A gradient-boosted dump was loaded without a base score.
    MissingBaseScore = 4,
    /// An instance lies outside the feature space.
    OutOfDomain = 5,
    /// The node or time budget ran out.
    Exhausted = 6,
    Internal = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// Search budget for verification and explanation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FcOptions {
    pub max_nodes: u64,
    pub timeout_s: f64,
    /// Single-threaded search with reproducible witnesses.
    pub deterministic: bool,
}

/// A loaded model together with its feature space.
pub struct FcModel {
    space: FeatureSpace,
    bundle: ModelBundle,
    ensemble: Ensemble,
    base_score: Option<String>,
}

/// The outcome of checking a specification file.
pub struct FcReport {
    report: AuditReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> FcStatus {
    match err {
        Error::MissingBaseScore => FcStatus::MissingBaseScore,
        Error::PointOutOfDomain { .. } => FcStatus::OutOfDomain,
        Error::ResourceExhausted { .. } => FcStatus::Exhausted,
        Error::Internal(_) => FcStatus::Internal,
        _ => FcStatus::InvalidInput,
    }
}

struct Fail(FcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `body`, records any failure and converts panics.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> FcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FcStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            FcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(FcStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(FcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

unsafe fn limits(options: *const FcOptions) -> Result<Limits, Fail> {
    let o = if options.is_null() { fc_options_default() } else { *options };
    if !(o.timeout_s.is_finite() && o.timeout_s > 0.0) {
        return Err(Fail(FcStatus::InvalidInput, format!("timeout must be positive, got {}", o.timeout_s)));
    }
    Ok(Limits {
        max_nodes: o.max_nodes,
        timeout: Duration::from_secs_f64(o.timeout_s),
        deterministic: o.deterministic,
    })
}

unsafe fn instance(model: &FcModel, values: *const f32, len: usize) -> Result<Point, Fail> {
    if values.is_null() && len > 0 {
        return Err(null("values"));
    }
    let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
    let point = Point::from_f32s(slice)?;
    model.space.check_point(&point)?;
    Ok(point)
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Ten million nodes, 300 seconds, parallel search.
#[no_mangle]
pub extern "C" fn fc_options_default() -> FcOptions {
    let l = Limits::default();
    FcOptions {
        max_nodes: l.max_nodes,
        timeout_s: l.timeout.as_secs_f64(),
        deterministic: l.deterministic,
    }
}

/// Loads a model from JSON text. `base_score` may be null for additive
/// dumps; gradient-boosted dumps require it.
///
/// # Safety
/// String arguments must be null or nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_model_load(
    model_json: *const c_char,
    space_json: *const c_char,
    base_score: *const c_char,
    allow_missing_branch: bool,
    out: *mut *mut FcModel,
) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let model_json = text(model_json, "model_json")?;
        let space = parse_space_config(text(space_json, "space_json")?)?;
        let base_score = optional_text(base_score, "base_score")?;
        let bundle = ModelBundle::load(model_json, base_score, &space, GbtOptions { allow_missing_branch })?;
        let ensemble = bundle.ensemble();
        *out = Box::into_raw(Box::new(FcModel {
            space,
            bundle,
            ensemble,
            base_score: base_score.map(str::to_string),
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`fc_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_model_free(model: *mut FcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_model_feature_count(model: *const FcModel) -> usize {
    model.as_ref().map_or(0, |m| m.space.len())
}

/// Exact logit at `values` as decimal text (or `numer/denom` when the
/// expansion does not terminate). Free `*out_logit` with [`fc_string_free`].
///
/// # Safety
/// `values` must point to `len` floats; `out_logit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_model_logit(
    model: *const FcModel,
    values: *const f32,
    len: usize,
    out_logit: *mut *mut c_char,
) -> FcStatus {
    guard(|| {
        if out_logit.is_null() {
            return Err(null("out_logit"));
        }
        *out_logit = ptr::null_mut();
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let point = instance(model, values, len)?;
        let logit = model.bundle.logit_model().evaluate_exact(&point)?;
        *out_logit = owned(format_rational(&logit));
        Ok(())
    })
}

/// Checks every entry of a specification file. A malformed entry is
/// recorded in the report rather than failing the call.
///
/// # Safety
/// `options` may be null for defaults; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_verify(
    model: *const FcModel,
    specs_json: *const c_char,
    options: *const FcOptions,
    out: *mut *mut FcReport,
) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let limits = limits(options)?;
        let entries = parse_spec_entries(text(specs_json, "specs_json")?, &model.space)?;
        let suite = verify_suite(&model.ensemble, &entries, &limits);
        let config = ConfigEcho {
            base_score: model.base_score.clone(),
            ..ConfigEcho::with_limits(&limits)
        };
        let summary = ModelSummary::of(&model.ensemble, Some(&model.bundle));
        let report = AuditReport::new(summary, config, &model.space, &suite);
        *out = Box::into_raw(Box::new(FcReport { report }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`fc_verify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_report_free(report: *mut FcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// 0 when every specification holds, 1 when one is violated, 2 on errors,
/// exhausted budgets or a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_report_exit_code(report: *const FcReport) -> i32 {
    report.as_ref().map_or(2, |r| r.report.exit_code())
}

/// The report as JSON or plain text. Free `*out` with [`fc_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fc_report_render(report: *const FcReport, as_text: bool, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let r = &report.as_ref().ok_or_else(|| null("report"))?.report;
        *out = owned(if as_text { r.to_text() } else { r.to_json() });
        Ok(())
    })
}

/// A minimal set of features that alone fixes the prediction at `values`,
/// as JSON `{"features": [...], "predicted": ..., "logit": ..., ...}`.
/// `order` lists feature indices in deletion order and may be null.
///
/// # Safety
/// `values` must point to `len` floats and `order` to `order_len` indices.
#[no_mangle]
pub unsafe extern "C" fn fc_explain(
    model: *const FcModel,
    values: *const f32,
    len: usize,
    order: *const usize,
    order_len: usize,
    options: *const FcOptions,
    out_json: *mut *mut c_char,
) -> FcStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let point = instance(model, values, len)?;
        let limits = limits(options)?;
        let order = if order.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(order, order_len))
        };
        let r = abductive_explanation(&model.ensemble, &point, order, &limits)?;
        let names: Vec<&str> = model.space.names().collect();
        let json = serde_json::json!({
            "features": r.features.iter().map(|&j| names[j]).collect::<Vec<_>>(),
            "indices": r.features,
            "predicted": r.predicted.to_string(),
            "logit": format_rational(&r.logit),
            "queries_used": r.queries_used,
            "warning": r.warning(),
        });
        *out_json = owned(json.to_string());
        Ok(())
    })
}
