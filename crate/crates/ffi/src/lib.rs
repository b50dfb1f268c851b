//! C interface to mixcraft.
//!
//! Every fallible call returns a [`MixcraftStatus`]; on failure the message
//! is kept per thread and can be fetched with [`mixcraft_last_error`].
//! Handles are opaque and must be released with their `_free` function.
//! Strings returned by the library are released with
//! [`mixcraft_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mixcraft::data::{load_csv, sniff_header};
use mixcraft::mixture::mixture_pdf;
use mixcraft::{CriterionKind, Dataset, Error, EstimatorConfig, FitResult, MixtureModel, PreprocessingKind};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixcraftStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Numerical = 4,
    Panic = 5,
}

/// Row-major observations.
pub struct MixcraftDataset(Dataset);

/// A fitted or deserialized mixture.
pub struct MixcraftModel(MixtureModel);

/// Outcome of an estimation run.
pub struct MixcraftFit(FitResult);

/// Estimation settings. Names are the ones the command line accepts, e.g.
/// `"histogram"`, `"Parzen window"`, `"k-nearest neighbour"` and `"BIC"`.
/// Null names keep the defaults.
#[repr(C)]
pub struct MixcraftFitOptions {
    pub preprocessing: *const c_char,
    pub criterion: *const c_char,
    pub cmax: usize,
    pub ar: f64,
}

/// Headline numbers of a fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MixcraftSummary {
    pub c: usize,
    pub k: usize,
    pub ic: f64,
    pub log_l: f64,
    pub m: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl std::fmt::Display) {
    let text = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> MixcraftStatus {
    match err {
        Error::Io { .. } | Error::ParseError { .. } | Error::RaggedRows { .. } => MixcraftStatus::Io,
        e if e.is_usage() => MixcraftStatus::InvalidArgument,
        _ => MixcraftStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), MixcraftStatus>) -> MixcraftStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MixcraftStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            MixcraftStatus::Panic
        }
    }
}

fn lib<T>(r: mixcraft::Result<T>) -> Result<T, MixcraftStatus> {
    r.map_err(|e| {
        set_error(&e);
        status_of(&e)
    })
}

fn invalid(msg: &str) -> MixcraftStatus {
    set_error(msg);
    MixcraftStatus::InvalidArgument
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, MixcraftStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{what} is null"));
        MixcraftStatus::NullPointer
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, MixcraftStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("output pointer is null");
        MixcraftStatus::NullPointer
    })
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, MixcraftStatus> {
    let s = as_ref(p, what)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Library version; free with `mixcraft_string_free`.
#[no_mangle]
pub extern "C" fn mixcraft_version() -> *mut c_char {
    into_c_string(env!("CARGO_PKG_VERSION").to_owned())
}

/// Message of the last failed call on this thread, or null. Free with
/// `mixcraft_string_free`.
#[no_mangle]
pub extern "C" fn mixcraft_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(ptr::null_mut(), CString::into_raw))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copies `n * d` row-major values into a new dataset.
///
/// # Safety
/// `values` must point to `n * d` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_dataset_new(
    values: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut MixcraftDataset,
) -> MixcraftStatus {
    guard(|| {
        let out = out_ptr(out)?;
        as_ref(values, "values")?;
        let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows"))?;
        let slice = std::slice::from_raw_parts(values, len);
        let ds = lib(Dataset::new("dataset", d, slice.to_vec()))?;
        *out = Box::into_raw(Box::new(MixcraftDataset(ds)));
        Ok(())
    })
}

/// Reads a CSV file; a header row is detected automatically.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut MixcraftDataset,
) -> MixcraftStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let path = Path::new(as_str(path, "path")?);
        let ds = lib(sniff_header(path).and_then(|h| load_csv(path, h)))?;
        *out = Box::into_raw(Box::new(MixcraftDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a dataset handle.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_dataset_n(ds: *const MixcraftDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n())
}

/// # Safety
/// `ds` must be a dataset handle.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_dataset_d(ds: *const MixcraftDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.d())
}

/// # Safety
/// `ds` must be null or a dataset handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_dataset_free(ds: *mut MixcraftDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Default options: histogram preprocessing, AIC, `cmax = 15`, `ar = 0.1`.
#[no_mangle]
pub extern "C" fn mixcraft_fit_options_default() -> MixcraftFitOptions {
    let d = EstimatorConfig::default();
    MixcraftFitOptions {
        preprocessing: ptr::null(),
        criterion: ptr::null(),
        cmax: d.cmax,
        ar: d.ar,
    }
}

unsafe fn config_from(opts: *const MixcraftFitOptions) -> Result<EstimatorConfig, MixcraftStatus> {
    let mut config = EstimatorConfig::default();
    let Some(o) = opts.as_ref() else { return Ok(config) };
    if !o.preprocessing.is_null() {
        config.preprocessing = lib(as_str(o.preprocessing, "preprocessing")?.parse::<PreprocessingKind>())?;
    }
    if !o.criterion.is_null() {
        config.criterion = lib(as_str(o.criterion, "criterion")?.parse::<CriterionKind>())?;
    }
    config.cmax = o.cmax;
    config.ar = o.ar;
    Ok(config)
}

/// Estimates a mixture. `opts` may be null for the defaults.
///
/// # Safety
/// `ds` must be a dataset handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_fit(
    ds: *const MixcraftDataset,
    opts: *const MixcraftFitOptions,
    out: *mut *mut MixcraftFit,
) -> MixcraftStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let ds = as_ref(ds, "dataset")?;
        let config = config_from(opts)?;
        let res = lib(mixcraft::fit(&ds.0, &config))?;
        *out = Box::into_raw(Box::new(MixcraftFit(res)));
        Ok(())
    })
}

/// # Safety
/// `fit` must be a fit handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_fit_summary(fit: *const MixcraftFit, out: *mut MixcraftSummary) -> MixcraftStatus {
    guard(|| {
        let s = &as_ref(fit, "fit")?.0.summary;
        *out_ptr(out)? = MixcraftSummary {
            c: s.c,
            k: s.k,
            ic: s.ic,
            log_l: s.log_l,
            m: s.m,
        };
        Ok(())
    })
}

/// Copies the selected model into a new handle.
///
/// # Safety
/// `fit` must be a fit handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_fit_model(fit: *const MixcraftFit, out: *mut *mut MixcraftModel) -> MixcraftStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let model = as_ref(fit, "fit")?.0.model.clone();
        *out = Box::into_raw(Box::new(MixcraftModel(model)));
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a fit handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_fit_free(fit: *mut MixcraftFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_from_json(json: *const c_char, out: *mut *mut MixcraftModel) -> MixcraftStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let model = lib(MixtureModel::from_json(as_str(json, "json")?))?;
        *out = Box::into_raw(Box::new(MixcraftModel(model)));
        Ok(())
    })
}

/// JSON document of the model, or null; free with `mixcraft_string_free`.
///
/// # Safety
/// `model` must be a model handle.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_to_json(model: *const MixcraftModel) -> *mut c_char {
    model.as_ref().map_or(ptr::null_mut(), |m| into_c_string(m.0.to_json()))
}

/// # Safety
/// `model` must be a model handle.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_c(model: *const MixcraftModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.c())
}

/// # Safety
/// `model` must be a model handle.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_d(model: *const MixcraftModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.d())
}

/// Weight, mean (`d` values) and covariance (`d * d`, row-major) of
/// component `l`, counted from zero. Null outputs are skipped.
///
/// # Safety
/// `model` must be a model handle; non-null buffers must hold the sizes above.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_component(
    model: *const MixcraftModel,
    l: usize,
    weight: *mut f64,
    mean: *mut f64,
    covariance: *mut f64,
) -> MixcraftStatus {
    guard(|| {
        let m = &as_ref(model, "model")?.0;
        if l >= m.c() {
            return Err(invalid(&format!("component {l} out of range (c = {})", m.c())));
        }
        let (d, comp) = (m.d(), &m.components()[l]);
        if let Some(w) = weight.as_mut() {
            *w = m.weights()[l];
        }
        if !mean.is_null() {
            std::slice::from_raw_parts_mut(mean, d).copy_from_slice(comp.mu());
        }
        if !covariance.is_null() {
            let buf = std::slice::from_raw_parts_mut(covariance, d * d);
            for i in 0..d {
                for j in 0..d {
                    buf[i * d + j] = comp.sigma().get(i, j);
                }
            }
        }
        Ok(())
    })
}

/// Mixture density at `n` row-major points of dimension `d`.
///
/// # Safety
/// `points` must hold `n * d` doubles and `out` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_pdf(
    model: *const MixcraftModel,
    points: *const f64,
    n: usize,
    out: *mut f64,
) -> MixcraftStatus {
    guard(|| {
        let m = &as_ref(model, "model")?.0;
        as_ref(points, "points")?;
        let out = std::slice::from_raw_parts_mut(out_ptr(out)?, n);
        let pts = std::slice::from_raw_parts(points, n * m.d());
        for (o, y) in out.iter_mut().zip(pts.chunks_exact(m.d())) {
            *o = mixture_pdf(m, y);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a model handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mixcraft_model_free(model: *mut MixcraftModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
