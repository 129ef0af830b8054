//! C interface to `cdgl`.
//!
//! Models are opaque handles. Every call returns a [`CdglStatus`]; on anything
//! other than `CDGL_STATUS_OK` or `CDGL_STATUS_CERTIFICATE_FAILURE` a message is available
//! from [`cdgl_last_error`] on the same thread. Strings handed out by the
//! library are freed with [`cdgl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use cdgl::dsl::{parse_model, render_model, Overrides};
use cdgl::fixtures::fixture_text;
use cdgl::free_lie::FreeLie;
use cdgl::graded::complex::homology;
use cdgl::report::{run_scenario, Scenario};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdglStatus {
    Ok = 0,
    /// The computation ran and some certificate failed.
    CertificateFailure = 1,
    /// Bad model text, unknown scenario or fixture, window too narrow, …
    InputError = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    /// A bug inside the library. The handle arguments are left untouched.
    Internal = 5,
}

/// Optional overrides for [`cdgl_run`]. Zero fields keep the model's own value.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CdglOptions {
    pub truncate: usize,
    pub wedge: usize,
    /// Nonzero to use `window_min..window_max`.
    pub has_window: i32,
    pub window_min: i64,
    pub window_max: i64,
}

/// A validated model: its source text plus the built algebra.
pub struct CdglModel {
    label: String,
    text: String,
    algebra: Arc<FreeLie>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).expect("nul bytes removed"));
}

fn fail(status: CdglStatus, msg: impl Into<String>) -> CdglStatus {
    set_error(msg);
    status
}

fn from_error(e: cdgl::Error) -> CdglStatus {
    let status = if e.is_input() { CdglStatus::InputError } else { CdglStatus::CertificateFailure };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CdglStatus) -> CdglStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(CdglStatus::Internal, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CdglStatus> {
    if p.is_null() {
        return Err(fail(CdglStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(CdglStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn load(label: String, text: String, out: *mut *mut CdglModel) -> CdglStatus {
    if out.is_null() {
        return fail(CdglStatus::NullPointer, "out is null");
    }
    let algebra = match parse_model(&text).and_then(|s| s.build(&Overrides::default())) {
        Ok(a) => a,
        Err(e) => return from_error(e),
    };
    let m = Box::new(CdglModel { label, text, algebra });
    unsafe { *out = Box::into_raw(m) };
    CdglStatus::Ok
}

/// Parses and validates model text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns a model to be released with [`cdgl_model_free`].
#[no_mangle]
pub unsafe extern "C" fn cdgl_model_parse(text: *const c_char, out: *mut *mut CdglModel) -> CdglStatus {
    guard(|| match read_str(text, "text") {
        Ok(t) => load("<text>".into(), t.to_string(), out),
        Err(s) => s,
    })
}

/// Loads a built-in model such as `"cp2"` or `"disk1"`.
///
/// # Safety
/// As for [`cdgl_model_parse`].
#[no_mangle]
pub unsafe extern "C" fn cdgl_model_fixture(name: *const c_char, out: *mut *mut CdglModel) -> CdglStatus {
    guard(|| {
        let name = match read_str(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match fixture_text(name) {
            Ok(t) => load(format!("fixture:{name}"), t.to_string(), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `model` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdgl_model_free(model: *mut CdglModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical text of the model. Free the result with [`cdgl_string_free`].
/// Returns null if `model` is null.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cdgl_model_render(model: *const CdglModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => into_c(render_model(&m.algebra, None)),
        None => ptr::null_mut(),
    }
}

/// Betti number of the model in `degree`, computed in the model's window.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdgl_model_betti(model: *const CdglModel, degree: i64, out: *mut usize) -> CdglStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(CdglStatus::NullPointer, "model or out is null");
        };
        let c = m.algebra.chain_complex(m.algebra.pres.window);
        match homology(&c, degree) {
            Ok(h) => {
                *out = h.betti;
                CdglStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs a scenario (`"check"`, `"homology"`, `"derivations"`, `"mc"`, `"gauge"`,
/// `"fibration"`, `"classify-cell"`, `"quasi-iso-suite"`) and hands back the
/// JSON report in `*json`. The status is `CDGL_STATUS_OK` when every certificate
/// passes and `CDGL_STATUS_CERTIFICATE_FAILURE` when the report says otherwise; in
/// both cases `*json` is set. `options` may be null.
///
/// # Safety
/// `model` must be a live handle, `scenario` a NUL-terminated string, `json`
/// a valid pointer, and `options` null or valid.
#[no_mangle]
pub unsafe extern "C" fn cdgl_run(
    model: *const CdglModel,
    scenario: *const c_char,
    options: *const CdglOptions,
    json: *mut *mut c_char,
) -> CdglStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), json.is_null()) else {
            return fail(CdglStatus::NullPointer, "model or json is null");
        };
        let scenario: Scenario = match read_str(scenario, "scenario").map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return from_error(e),
            Err(s) => return s,
        };
        let o = options.as_ref().copied().unwrap_or_default();
        let nz = |v: usize| (v != 0).then_some(v);
        let overrides = Overrides {
            truncate: nz(o.truncate),
            wedge: nz(o.wedge),
            window: (o.has_window != 0).then_some((o.window_min, o.window_max)),
        };
        match run_scenario(scenario, &m.label, &m.text, &overrides) {
            Ok(r) => {
                *json = into_c(r.to_json());
                if r.pass {
                    CdglStatus::Ok
                } else {
                    CdglStatus::CertificateFailure
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cdgl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn cdgl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn cdgl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
