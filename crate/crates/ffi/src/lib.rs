//! C ABI for hashrank.
//!
//! Every fallible function returns an [`HrStatus`]. On failure a message is
//! kept per thread and can be read with [`hr_last_error`]. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`hr_string_free`]; classifier handles are released with
//! [`hr_classifier_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hashrank::config::RunConfig;
use hashrank::{evaluation, persist, ranking, DomainClassifier, Error, HashtagStyle};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Consistency = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrHashtagStyle {
    Weibo = 0,
    Twitter = 1,
}

/// Loaded domain classifier.
pub struct HrClassifier {
    inner: DomainClassifier,
    labels: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> HrStatus {
    match e {
        Error::Io { .. } => HrStatus::Io,
        Error::Parse { .. } | Error::Json(_) => HrStatus::Parse,
        Error::Validation(_) => HrStatus::Validation,
        Error::Consistency(_) => HrStatus::Consistency,
    }
}

struct Fail(HrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HrStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside hashrank");
            HrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn hr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn hr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a classifier saved by `hashrank train`.
///
/// # Safety
/// `model_dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_load(
    model_dir: *const c_char,
    out: *mut *mut HrClassifier,
) -> HrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dir = str_arg(model_dir, "model_dir")?;
        let inner = persist::load_classifier(Path::new(dir))?;
        let labels = inner
            .labels
            .iter()
            .map(|l| {
                CString::new(l.as_str())
                    .map_err(|_| Fail(HrStatus::Validation, "label contains NUL".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.write(Box::into_raw(Box::new(HrClassifier { inner, labels })));
        Ok(())
    })
}

/// # Safety
/// `clf` must come from [`hr_classifier_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_free(clf: *mut HrClassifier) {
    if !clf.is_null() {
        drop(Box::from_raw(clf));
    }
}

/// Number of domain labels, 0 for a null handle.
///
/// # Safety
/// `clf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_num_labels(clf: *const HrClassifier) -> usize {
    clf.as_ref().map_or(0, |c| c.labels.len())
}

/// Label `index`, owned by the handle; null when out of range.
///
/// # Safety
/// `clf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_label(
    clf: *const HrClassifier,
    index: usize,
) -> *const c_char {
    clf.as_ref()
        .and_then(|c| c.labels.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Domain probabilities for `text`, written to `probs[0..num_labels]`, and
/// the index of the winning label.
///
/// # Safety
/// `clf` must be a live handle, `text` NUL-terminated, `probs` valid for
/// `probs_len` writes; `best` may be null.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_classify(
    clf: *const HrClassifier,
    text: *const c_char,
    probs: *mut f64,
    probs_len: usize,
    best: *mut usize,
) -> HrStatus {
    guard(|| {
        let clf = clf.as_ref().ok_or_else(|| null("classifier"))?;
        let text = str_arg(text, "text")?;
        let n = clf.labels.len();
        if probs_len < n {
            return Err(Fail(
                HrStatus::BufferTooSmall,
                format!("probability buffer holds {probs_len}, need {n}"),
            ));
        }
        if probs.is_null() {
            return Err(null("probs"));
        }
        let dist = clf.inner.classify_text(text);
        std::slice::from_raw_parts_mut(probs, n).copy_from_slice(&dist.probs);
        if !best.is_null() {
            best.write(dist.argmax());
        }
        Ok(())
    })
}

/// Hashtags in `text` as a JSON array of strings.
///
/// # Safety
/// `text` must be NUL-terminated; `out_json` writable. Free the result with
/// [`hr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hr_extract_hashtags(
    text: *const c_char,
    style: HrHashtagStyle,
    out_json: *mut *mut c_char,
) -> HrStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let text = str_arg(text, "text")?;
        let style = match style {
            HrHashtagStyle::Weibo => HashtagStyle::Weibo,
            HrHashtagStyle::Twitter => HashtagStyle::Twitter,
        };
        let tags = hashrank::corpus::extract_hashtags(text, style);
        let json =
            serde_json::to_string(&tags).map_err(|e| Fail(HrStatus::Parse, e.to_string()))?;
        let c = CString::new(json)
            .map_err(|_| Fail(HrStatus::Validation, "hashtag contains NUL".into()))?;
        out_json.write(c.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn hr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Recency weight of a post at `t_j` seen from `t_p`, decay constant `gamma`
/// in seconds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_decay_weight(
    t_p: i64,
    t_j: i64,
    gamma: f64,
    out: *mut f64,
) -> HrStatus {
    guard(|| {
        let w = ranking::decay_weight(t_p, t_j, gamma)?;
        write_out(out, w, "out")
    })
}

/// NDCG@k of relevances in ranked order against the same items' relevances.
///
/// # Safety
/// `ranked` and `ideal` must be valid for their lengths; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_ndcg_at_k(
    ranked: *const f64,
    ranked_len: usize,
    ideal: *const f64,
    ideal_len: usize,
    k: usize,
    out: *mut f64,
) -> HrStatus {
    guard(|| {
        let r = slice_arg(ranked, ranked_len, "ranked")?;
        let i = slice_arg(ideal, ideal_len, "ideal")?;
        let v = evaluation::ndcg_at_k(r, i, k)?;
        write_out(out, v, "out")
    })
}

/// Fleiss' kappa over a row-major `n_items x n_categories` count matrix.
///
/// # Safety
/// `counts` must hold `n_items * n_categories` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_fleiss_kappa(
    counts: *const u32,
    n_items: usize,
    n_categories: usize,
    out: *mut f64,
) -> HrStatus {
    guard(|| {
        let len = n_items
            .checked_mul(n_categories)
            .ok_or_else(|| Fail(HrStatus::Validation, "matrix size overflows".into()))?;
        let flat = slice_arg(counts, len, "counts")?;
        let rows: Vec<Vec<u32>> = if n_categories == 0 {
            vec![Vec::new(); n_items]
        } else {
            flat.chunks(n_categories).map(<[u32]>::to_vec).collect()
        };
        let v = evaluation::fleiss_kappa(&rows)?;
        write_out(out, v, "out")
    })
}

/// Run the `rank` step with a JSON config file (null for defaults), writing
/// the usual output files.
///
/// # Safety
/// `config_path` must be null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hr_rank(config_path: *const c_char) -> HrStatus {
    guard(|| {
        let cfg = if config_path.is_null() {
            RunConfig::default()
        } else {
            RunConfig::load(Path::new(str_arg(config_path, "config_path")?))?
        };
        cfg.validate()?;
        hashrank::cli::cmd_rank(&cfg, false)?;
        Ok(())
    })
}
