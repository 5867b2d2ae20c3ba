use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use catflow_ffi::*;

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = catflow_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(json: &CStr) -> *mut CatflowModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { catflow_model_load_json(json.as_ptr(), &mut m) }, CatflowStatus::Ok);
    assert!(!m.is_null());
    m
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    catflow_string_free(s);
    out
}

fn nparts(m: *const CatflowModel, ob: &str) -> usize {
    let ob = CString::new(ob).unwrap();
    let mut n = usize::MAX;
    assert_eq!(unsafe { catflow_model_nparts(m, ob.as_ptr(), &mut n) }, CatflowStatus::Ok);
    n
}

#[test]
fn load_validate_and_count() {
    let m = load(&fixture("sir.json"));
    let mut v = usize::MAX;
    assert_eq!(unsafe { catflow_model_validate(m, &mut v) }, CatflowStatus::Ok);
    assert_eq!(v, 0);
    assert_eq!(nparts(m, "S"), 3);
    assert_eq!(nparts(m, "V"), 5);
    let bogus = CString::new("Nope").unwrap();
    let mut n = 0;
    assert_ne!(unsafe { catflow_model_nparts(m, bogus.as_ptr(), &mut n) }, CatflowStatus::Ok);
    assert!(last_error().contains("Nope"));
    unsafe { catflow_model_free(m) };
}

#[test]
fn json_round_trip() {
    let src = fixture("sir.json");
    let m = load(&src);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { catflow_model_to_json(m, &mut s) }, CatflowStatus::Ok);
    let text = unsafe { take(s) };
    assert_eq!(text, src.to_str().unwrap());
    unsafe { catflow_model_free(m) };
}

#[test]
fn translation_to_cld() {
    let m = load(&fixture("sir.json"));
    let target = CString::new("cld").unwrap();
    let mut cld = ptr::null_mut();
    assert_eq!(unsafe { catflow_model_translate(m, target.as_ptr(), &mut cld) }, CatflowStatus::Ok);
    assert_eq!(nparts(cld, "V"), 12);
    assert_eq!(nparts(cld, "L"), 17);
    let mut again = ptr::null_mut();
    assert_eq!(
        unsafe { catflow_model_translate(cld, target.as_ptr(), &mut again) },
        CatflowStatus::Unsupported
    );
    assert!(again.is_null());
    unsafe {
        catflow_model_free(cld);
        catflow_model_free(m);
    }
}

#[test]
fn rk4_from_scenario_file_or_body() {
    let m = load(&fixture("sir.json"));
    let file = fixture("sir-scenario.json");
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { catflow_simulate_rk4(m, file.as_ptr(), &mut a) }, CatflowStatus::Ok);
    let a = unsafe { take(a) };
    assert!(a.starts_with("t,S,I,R"));
    assert_eq!(a.lines().count(), 1002);

    let body = CString::new(r#"{"t0":0,"tf":1,"dt":0.5,"stocks":{"S":990,"I":10,"R":0},"params":{"c":10,"beta":0.05,"tRec":5}}"#).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { catflow_simulate_rk4(m, body.as_ptr(), &mut b) }, CatflowStatus::Ok);
    assert_eq!(unsafe { take(b) }.lines().count(), 4);
    unsafe { catflow_model_free(m) };
}

#[test]
fn simulation_rejects_non_sfd() {
    let m = load(&fixture("smoking-cld.json"));
    let file = fixture("sir-scenario.json");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { catflow_simulate_rk4(m, file.as_ptr(), &mut out) }, CatflowStatus::Unsupported);
    unsafe { catflow_model_free(m) };
}

#[test]
fn parse_errors_are_reported() {
    let bad = CString::new(r#"{"format_version":1,"kind":"sfd","body":{"S":[{"sname":"x"}],"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { catflow_model_load_json(bad.as_ptr(), &mut m) }, CatflowStatus::Parse);
    assert!(m.is_null());
    assert!(!last_error().is_empty());

    let version = CString::new(r#"{"format_version":99,"kind":"sfd","body":{}}"#).unwrap();
    assert_eq!(unsafe { catflow_model_load_json(version.as_ptr(), &mut m) }, CatflowStatus::Parse);
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = CString::new(vec![b'{', 0xff, b'}']).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { catflow_model_load_json(bytes.as_ptr(), &mut m) }, CatflowStatus::InvalidUtf8);
}

#[test]
fn null_arguments_are_rejected() {
    let mut m = ptr::null_mut();
    let mut n = 0usize;
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(catflow_model_load_json(ptr::null(), &mut m), CatflowStatus::NullPointer);
        assert_eq!(catflow_model_validate(ptr::null(), &mut n), CatflowStatus::NullPointer);
        assert_eq!(catflow_model_to_json(ptr::null(), &mut s), CatflowStatus::NullPointer);
        let json = fixture("sir.json");
        assert_eq!(catflow_model_load_json(json.as_ptr(), ptr::null_mut()), CatflowStatus::NullPointer);
        let live = load(&json);
        assert_eq!(catflow_model_validate(live, ptr::null_mut()), CatflowStatus::NullPointer);
        assert_eq!(catflow_model_nparts(live, ptr::null(), &mut n), CatflowStatus::NullPointer);
        catflow_model_free(live);
        catflow_model_free(ptr::null_mut());
        catflow_string_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_last_error() {
    let mut m = ptr::null_mut();
    unsafe { catflow_model_load_json(ptr::null(), &mut m) };
    assert!(!catflow_last_error().is_null());
    let live = load(&fixture("sir.json"));
    assert!(catflow_last_error().is_null());
    unsafe { catflow_model_free(live) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/catflow.h")).unwrap();
    for f in [
        "catflow_last_error",
        "catflow_model_load_json",
        "catflow_model_free",
        "catflow_string_free",
        "catflow_model_validate",
        "catflow_model_to_json",
        "catflow_model_nparts",
        "catflow_model_translate",
        "catflow_simulate_rk4",
        "CATFLOW_STATUS_NULL_POINTER",
        "typedef struct CatflowModel CatflowModel",
    ] {
        assert!(header.contains(f), "header is missing {f}");
    }
}
