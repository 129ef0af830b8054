use std::ffi::{CStr, CString};
use std::ptr;

use cdgl_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cdgl_last_error()) }.to_str().unwrap().to_string()
}

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { cdgl_string_free(s) };
    out
}

fn fixture(name: &str) -> *mut CdglModel {
    let name = CString::new(name).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cdgl_model_fixture(name.as_ptr(), &mut m) }, CdglStatus::Ok);
    m
}

fn run(m: *const CdglModel, scenario: &str, o: Option<&CdglOptions>) -> (CdglStatus, Option<String>) {
    let s = CString::new(scenario).unwrap();
    let mut json = ptr::null_mut();
    let st = unsafe { cdgl_run(m, s.as_ptr(), o.map_or(ptr::null(), |o| o as *const _), &mut json) };
    (st, (!json.is_null()).then(|| take(json)))
}

#[test]
fn parse_render_and_betti() {
    let text = CString::new("generator x : 1\n").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cdgl_model_parse(text.as_ptr(), &mut m) }, CdglStatus::Ok);
    let rendered = take(unsafe { cdgl_model_render(m) });
    assert!(rendered.contains("generator x : 1"));
    let mut b = usize::MAX;
    for (k, want) in [(0, 0), (1, 1), (2, 1), (3, 0)] {
        assert_eq!(unsafe { cdgl_model_betti(m, k, &mut b) }, CdglStatus::Ok);
        assert_eq!(b, want, "degree {k}");
    }
    // the window is -2..8, so degree 8 has no margin
    assert_eq!(unsafe { cdgl_model_betti(m, 8, &mut b) }, CdglStatus::InputError);
    assert!(last_error().contains("window"));
    unsafe { cdgl_model_free(m) };
}

#[test]
fn reports_match_the_library() {
    let m = fixture("cp2");
    let (st, json) = run(m, "classify-cell", None);
    assert_eq!(st, CdglStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&json.unwrap()).unwrap();
    assert_eq!(v["schema"], "cdgl-report/1");
    assert_eq!(v["model"]["input"], "fixture:cp2");
    let direct = cdgl::report::run_scenario(
        cdgl::report::Scenario::ClassifyCell,
        "fixture:cp2",
        cdgl::fixtures::fixture_text("cp2").unwrap(),
        &Default::default(),
    )
    .unwrap();
    assert_eq!(v, serde_json::from_str::<serde_json::Value>(&direct.to_json()).unwrap());
    unsafe { cdgl_model_free(m) };
}

#[test]
fn certificate_failure_still_yields_a_report() {
    let m = fixture("wedge");
    let o = CdglOptions { truncate: 4, ..Default::default() };
    let (st, json) = run(m, "quasi-iso-suite", Some(&o));
    assert_eq!(st, CdglStatus::CertificateFailure);
    let v: serde_json::Value = serde_json::from_str(&json.unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["model"]["truncation"], 4);
    unsafe { cdgl_model_free(m) };
}

#[test]
fn options_reach_the_model() {
    let m = fixture("disk1");
    let o = CdglOptions { truncate: 5, wedge: 4, has_window: 1, window_min: -1, window_max: 6 };
    let (st, json) = run(m, "homology", Some(&o));
    assert_eq!(st, CdglStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&json.unwrap()).unwrap();
    assert_eq!(v["model"]["truncation"], 5);
    assert_eq!(v["model"]["wedge"], 4);
    assert_eq!(v["model"]["window"], "-1..6");
    let bad = CdglOptions { has_window: 1, window_min: 3, window_max: 1, ..Default::default() };
    assert_eq!(run(m, "homology", Some(&bad)).0, CdglStatus::InputError);
    unsafe { cdgl_model_free(m) };
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    let bad = CString::new("generator x : 0\ngenerator y : 3\nd y = [x, x]").unwrap();
    assert_eq!(unsafe { cdgl_model_parse(bad.as_ptr(), &mut m) }, CdglStatus::InputError);
    assert!(m.is_null());
    assert!(last_error().starts_with("invalid model"), "{}", last_error());

    let syntax = CString::new("generator x : 1\nd x = [x,").unwrap();
    assert_eq!(unsafe { cdgl_model_parse(syntax.as_ptr(), &mut m) }, CdglStatus::InputError);
    assert!(last_error().starts_with("syntax error at 2:"), "{}", last_error());

    let nope = CString::new("nope").unwrap();
    assert_eq!(unsafe { cdgl_model_fixture(nope.as_ptr(), &mut m) }, CdglStatus::InputError);
    assert_eq!(unsafe { cdgl_model_parse(ptr::null(), &mut m) }, CdglStatus::NullPointer);
    assert_eq!(unsafe { cdgl_model_parse(bad.as_ptr(), ptr::null_mut()) }, CdglStatus::NullPointer);

    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { cdgl_model_parse(invalid.as_ptr().cast(), &mut m) }, CdglStatus::InvalidUtf8);

    let fx = fixture("gauge");
    assert_eq!(run(fx, "no-such-scenario", None).0, CdglStatus::InputError);
    assert_eq!(run(fx, "fibration", None), (CdglStatus::InputError, None));
    assert!(last_error().contains("sub-dgl"));
    assert_eq!(run(ptr::null(), "check", None).0, CdglStatus::NullPointer);
    // a successful call clears the message
    assert_eq!(run(fx, "homology", None).0, CdglStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { cdgl_model_free(fx) };

    unsafe {
        cdgl_model_free(ptr::null_mut());
        cdgl_string_free(ptr::null_mut());
    }
    assert!(unsafe { cdgl_model_render(ptr::null()) }.is_null());
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(cdgl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cdgl.h")).unwrap();
    for name in [
        "cdgl_model_parse",
        "cdgl_model_fixture",
        "cdgl_model_free",
        "cdgl_model_render",
        "cdgl_model_betti",
        "cdgl_run",
        "cdgl_last_error",
        "cdgl_string_free",
        "cdgl_version",
        "typedef struct CdglModel CdglModel;",
        "CDGL_STATUS_CERTIFICATE_FAILURE = 1",
        "CDGL_STATUS_INPUT_ERROR = 2",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
