//! C interface to catflow.
//!
//! Models cross the boundary as opaque `CatflowModel` handles created from
//! JSON model files. Every fallible function returns a `CatflowStatus`; on
//! failure `catflow_last_error` describes the problem for the calling thread.
//! Strings handed out by the library are freed with `catflow_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catflow::model::{Model, ModelFile};
use catflow::ode::{compile_odes, integrate, Method, Scenario};
use catflow::schemas::{diagram_violations, DiagramKind};
use catflow::translate::{sfd_to_ssd, ssd_to_cld};
use catflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Unsupported = 5,
    Panic = 6,
}

/// Opaque handle to a loaded model.
pub struct CatflowModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CatflowStatus, msg: impl Into<String>) -> CatflowStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> CatflowStatus {
    let status = if e.is_parse() {
        CatflowStatus::Parse
    } else if matches!(e, Error::Unsupported(_)) {
        CatflowStatus::Unsupported
    } else {
        CatflowStatus::Domain
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CatflowStatus) -> CatflowStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CatflowStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, CatflowStatus> {
    if p.is_null() {
        return Err(fail(CatflowStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CatflowStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> CatflowStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            CatflowStatus::Ok
        }
        Err(_) => fail(CatflowStatus::Domain, "output contains a NUL byte"),
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next catflow call on the same thread.
#[no_mangle]
pub extern "C" fn catflow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON model file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_load_json(json: *const c_char, out: *mut *mut CatflowModel) -> CatflowStatus {
    guard(|| {
        if out.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = tri!(read_str(json));
        let model = tri!(ModelFile::parse(text).and_then(|f| Model::from_file(&f)).map_err(from_error));
        *out = Box::into_raw(Box::new(CatflowModel { model }));
        CatflowStatus::Ok
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_free(model: *mut CatflowModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn catflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn model_ref<'a>(m: *const CatflowModel) -> Result<&'a Model, CatflowStatus> {
    m.as_ref()
        .map(|m| &m.model)
        .ok_or_else(|| fail(CatflowStatus::NullPointer, "null model handle"))
}

/// Counts structural and diagram-level violations; zero means valid.
///
/// # Safety
/// `model` must be a live handle and `violations` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_validate(model: *const CatflowModel, violations: *mut usize) -> CatflowStatus {
    guard(|| {
        let m = tri!(model_ref(model));
        if violations.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        *violations = match m.diagram() {
            Some((kind, d)) => {
                let structural = d.validate();
                if structural.is_empty() {
                    diagram_violations(kind, d).len()
                } else {
                    structural.len()
                }
            }
            None => 0,
        };
        CatflowStatus::Ok
    })
}

/// Serializes a model back to its JSON file form.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_to_json(model: *const CatflowModel, out: *mut *mut c_char) -> CatflowStatus {
    guard(|| {
        let m = tri!(model_ref(model));
        if out.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        let file = tri!(m.to_file(None).map_err(from_error));
        write_string(out, file.to_json_string())
    })
}

/// Number of parts of `object` in the model's diagram.
///
/// # Safety
/// `model` must be a live handle, `object` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_nparts(
    model: *const CatflowModel,
    object: *const c_char,
    out: *mut usize,
) -> CatflowStatus {
    guard(|| {
        let m = tri!(model_ref(model));
        let ob = tri!(read_str(object));
        if out.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        let Some((_, d)) = m.diagram() else {
            return fail(CatflowStatus::Unsupported, "model is not a diagram");
        };
        *out = tri!(d.try_nparts(ob).map_err(from_error));
        CatflowStatus::Ok
    })
}

/// Translates an SFD to `"ssd"` or `"cld"`, or an SSD to `"cld"`.
///
/// # Safety
/// `model` must be a live handle, `target` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn catflow_model_translate(
    model: *const CatflowModel,
    target: *const c_char,
    out: *mut *mut CatflowModel,
) -> CatflowStatus {
    guard(|| {
        let m = tri!(model_ref(model));
        let target = tri!(read_str(target));
        if out.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some((kind, d)) = m.diagram() else {
            return fail(CatflowStatus::Unsupported, "model is not a diagram");
        };
        let result = match (kind, target) {
            (DiagramKind::Sfd, "ssd") => sfd_to_ssd(d).map(|x| (DiagramKind::Ssd, x)),
            (DiagramKind::Sfd, "cld") => sfd_to_ssd(d).and_then(|s| ssd_to_cld(&s)).map(|(c, _)| (DiagramKind::Cld, c)),
            (DiagramKind::Ssd, "cld") => ssd_to_cld(d).map(|(c, _)| (DiagramKind::Cld, c)),
            _ => return fail(CatflowStatus::Unsupported, format!("cannot translate {kind} to `{target}`")),
        };
        let (k, inst) = tri!(result.map_err(from_error));
        *out = Box::into_raw(Box::new(CatflowModel {
            model: Model::Diagram(k, inst),
        }));
        CatflowStatus::Ok
    })
}

/// Integrates an SFD with fixed-step RK4 under a scenario given as JSON
/// (a model file of kind `scenario`, or its bare body) and returns the
/// trajectory CSV.
///
/// # Safety
/// `model` must be a live handle, `scenario_json` NUL-terminated, `csv_out` valid.
#[no_mangle]
pub unsafe extern "C" fn catflow_simulate_rk4(
    model: *const CatflowModel,
    scenario_json: *const c_char,
    csv_out: *mut *mut c_char,
) -> CatflowStatus {
    guard(|| {
        let m = tri!(model_ref(model));
        let text = tri!(read_str(scenario_json));
        if csv_out.is_null() {
            return fail(CatflowStatus::NullPointer, "null output pointer");
        }
        let Some((DiagramKind::Sfd, sfd)) = m.diagram() else {
            return fail(CatflowStatus::Unsupported, "simulation needs a stock and flow diagram");
        };
        let scenario = match ModelFile::parse(text).and_then(|f| Model::from_file(&f)) {
            Ok(Model::Scenario(s)) => s,
            Ok(_) => return fail(CatflowStatus::Parse, "expected a scenario"),
            Err(_) => tri!(serde_json_scenario(text)),
        };
        let csv = tri!(compile_odes(sfd)
            .and_then(|sys| integrate(&sys, &scenario, Method::Rk4))
            .and_then(|t| t.to_csv())
            .map_err(from_error));
        write_string(csv_out, csv)
    })
}

fn serde_json_scenario(text: &str) -> Result<Scenario, CatflowStatus> {
    let wrapped = format!(r#"{{"format_version":1,"kind":"scenario","body":{text}}}"#);
    match ModelFile::parse(&wrapped).and_then(|f| Model::from_file(&f)) {
        Ok(Model::Scenario(s)) => Ok(s),
        Ok(_) => Err(fail(CatflowStatus::Parse, "expected a scenario")),
        Err(e) => Err(from_error(e)),
    }
}
