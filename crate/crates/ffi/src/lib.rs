//! C interface. Objects cross the boundary as opaque handles that the caller
//! frees with the matching `*_free` function. Every fallible call returns a
//! [`P3Status`]; the message of the last failure on the calling thread is
//! available from [`p3_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use poisson3::catalog;
use poisson3::expr::{Domain, Point};
use poisson3::families::{classify, FamilySpec};
use poisson3::reduction::{casimir, darboux, verify_chart_seeded, CasimirFn, DarbouxChart};
use poisson3::structure::{CoordinateMap, StructureMatrix};
use poisson3::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P3Status {
    Ok = 0,
    /// The computation ran but its check did not pass.
    CheckFailed = 1,
    NullArgument = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    InvalidInput = 5,
    NotSeparable = 6,
    Vanishing = 7,
    OutsideDomain = 8,
    Numerical = 9,
    UnknownEntry = 10,
    Panic = 11,
}

/// A structure matrix, with its family spec when it came from one.
pub struct P3Structure {
    matrix: StructureMatrix,
    spec: Option<FamilySpec>,
}

pub struct P3Casimir(CasimirFn);

pub struct P3Chart(DarbouxChart);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> P3Status {
    match e {
        Error::Parse(_) => P3Status::Parse,
        Error::NotSeparable { .. } => P3Status::NotSeparable,
        Error::Vanishing { .. } | Error::NonPositive { .. } | Error::IdenticallyZero { .. } => {
            P3Status::Vanishing
        }
        Error::OutsideDomain(_) => P3Status::OutsideDomain,
        Error::UnknownEntry(_) => P3Status::UnknownEntry,
        Error::Eval(_)
        | Error::SingularJacobian(_)
        | Error::InverseFailed { .. }
        | Error::Integration(_)
        | Error::NotEvaluable { .. } => P3Status::Numerical,
        _ => P3Status::InvalidInput,
    }
}

/// Run `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<P3Status, (P3Status, String)>) -> P3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            set_error(format!("internal panic: {what}"));
            P3Status::Panic
        }
    }
}

fn fail(e: Error) -> (P3Status, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (P3Status, String) {
    (P3Status::NullArgument, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (P3Status, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (P3Status::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn point(p: *const f64, what: &str) -> Result<Point, (P3Status, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok([*p, *p.add(1), *p.add(2)])
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (P3Status, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (P3Status, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = value;
    Ok(())
}

unsafe fn write_point(out: *mut f64, p: Point, what: &str) -> Result<(), (P3Status, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    for (i, v) in p.into_iter().enumerate() {
        *out.add(i) = v;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn p3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn p3_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn p3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Structure from three entry expressions on the box `lo < x < hi`.
///
/// # Safety
/// Strings must be NUL-terminated; `lo` and `hi` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_new(
    u: *const c_char,
    v: *const c_char,
    w: *const c_char,
    lo: *const f64,
    hi: *const f64,
    out: *mut *mut P3Structure,
) -> P3Status {
    guard(|| {
        let (u, v, w) = (text(u, "u")?, text(v, "v")?, text(w, "w")?);
        let domain = Domain::new(point(lo, "lo")?, point(hi, "hi")?).map_err(|e| fail(e.into()))?;
        let matrix = StructureMatrix::parse(u, v, w, domain).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(P3Structure { matrix, spec: None })), "out")?;
        Ok(P3Status::Ok)
    })
}

/// Structure from a JSON family spec.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_from_spec(json: *const c_char, out: *mut *mut P3Structure) -> P3Status {
    guard(|| {
        let spec: FamilySpec = serde_json::from_str(text(json, "json")?).map_err(|e| fail(e.into()))?;
        let matrix = spec.build().map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(P3Structure { matrix, spec: Some(spec) })), "out")?;
        Ok(P3Status::Ok)
    })
}

/// Structure of a catalog entry with its default parameters and domain.
///
/// # Safety
/// `id` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_from_catalog(id: *const c_char, out: *mut *mut P3Structure) -> P3Status {
    guard(|| {
        let entry = catalog::get(text(id, "id")?).map_err(fail)?;
        let matrix = entry.spec.build().map_err(fail)?;
        let s = P3Structure { matrix, spec: Some(entry.spec.clone()) };
        write_out(out, Box::into_raw(Box::new(s)), "out")?;
        Ok(P3Status::Ok)
    })
}

/// Bind a parameter. A spec-backed structure is rebuilt and revalidated.
///
/// # Safety
/// `s` must be a live handle; `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_set_param(s: *mut P3Structure, name: *const c_char, value: f64) -> P3Status {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("s"))?;
        let name = text(name, "name")?.to_string();
        match &mut s.spec {
            Some(spec) => {
                let mut next = spec.clone();
                let mut params = next.params().clone();
                params.insert(name, value);
                next.set_params(params);
                s.matrix = next.build().map_err(fail)?;
                *spec = next;
            }
            None => {
                s.matrix.params.insert(name, value);
            }
        }
        Ok(P3Status::Ok)
    })
}

/// # Safety
/// `s` must come from a `p3_structure_*` constructor and not be used after.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_free(s: *mut P3Structure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `(u, v, w)` at `x`.
///
/// # Safety
/// `s` must be live; `x` and `out` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn p3_structure_eval(s: *const P3Structure, x: *const f64, out: *mut f64) -> P3Status {
    guard(|| {
        let s = handle(s, "s")?;
        let vals = s.matrix.values_at(&point(x, "x")?).map_err(fail)?;
        write_point(out, vals, "out")?;
        Ok(P3Status::Ok)
    })
}

/// Sample the Jacobi identity. Returns `CheckFailed` when the worst
/// relative residual exceeds `tol`; the residual is written either way.
///
/// # Safety
/// `s` must be live; `max_rel_residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn p3_jacobi_check(
    s: *const P3Structure,
    samples: usize,
    tol: f64,
    seed: u64,
    max_rel_residual: *mut f64,
) -> P3Status {
    guard(|| {
        let s = handle(s, "s")?;
        let r = s.matrix.check_jacobi_seeded(samples, tol, seed);
        if !max_rel_residual.is_null() {
            *max_rel_residual = r.max_rel_residual;
        }
        Ok(if r.verdict.passed() { P3Status::Ok } else { P3Status::CheckFailed })
    })
}

/// Family tag such as `gamma-pair(u)`; free with [`p3_string_free`].
///
/// # Safety
/// `s` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_classify(s: *const P3Structure, out: *mut *mut c_char) -> P3Status {
    guard(|| {
        let s = handle(s, "s")?;
        let tag = CString::new(classify(&s.matrix).tag.to_string()).expect("tag has no NUL");
        write_out(out, tag.into_raw(), "out")?;
        Ok(P3Status::Ok)
    })
}

fn spec_of(s: &P3Structure) -> Result<FamilySpec, (P3Status, String)> {
    match &s.spec {
        Some(spec) => Ok(spec.clone()),
        None => poisson3::cli::spec_from_structure(&s.matrix).map_err(fail),
    }
}

/// # Safety
/// `s` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_casimir_new(s: *const P3Structure, out: *mut *mut P3Casimir) -> P3Status {
    guard(|| {
        let c = casimir(&spec_of(handle(s, "s")?)?).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(P3Casimir(c))), "out")?;
        Ok(P3Status::Ok)
    })
}

/// # Safety
/// `c` must be live; `x` must point to 3 doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_casimir_eval(c: *const P3Casimir, x: *const f64, out: *mut f64) -> P3Status {
    guard(|| {
        let v = handle(c, "c")?.0.eval(&point(x, "x")?).map_err(fail)?;
        write_out(out, v, "out")?;
        Ok(P3Status::Ok)
    })
}

/// # Safety
/// `c` must come from [`p3_casimir_new`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn p3_casimir_free(c: *mut P3Casimir) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Darboux chart; `alternate` selects the eta-factor chart for pairs.
///
/// # Safety
/// `s` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_new(s: *const P3Structure, alternate: bool, out: *mut *mut P3Chart) -> P3Status {
    guard(|| {
        let chart = darboux(&spec_of(handle(s, "s")?)?, alternate).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(P3Chart(chart))), "out")?;
        Ok(P3Status::Ok)
    })
}

/// # Safety
/// `c` must be live; `x` and `y` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_forward(c: *const P3Chart, x: *const f64, y: *mut f64) -> P3Status {
    guard(|| {
        let z = handle(c, "c")?.0.forward(&point(x, "x")?).map_err(fail)?;
        write_point(y, z, "y")?;
        Ok(P3Status::Ok)
    })
}

/// # Safety
/// `c` must be live; `y` and `x` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_inverse(c: *const P3Chart, y: *const f64, x: *mut f64) -> P3Status {
    guard(|| {
        let p = handle(c, "c")?.0.inverse(&point(y, "y")?).map_err(fail)?;
        write_point(x, p, "x")?;
        Ok(P3Status::Ok)
    })
}

/// The time factor at the source point `x`.
///
/// # Safety
/// `c` must be live; `x` must point to 3 doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_mu_hat(c: *const P3Chart, x: *const f64, out: *mut f64) -> P3Status {
    guard(|| {
        let v = handle(c, "c")?.0.mu_hat_at_source(&point(x, "x")?).map_err(fail)?;
        write_out(out, v, "out")?;
        Ok(P3Status::Ok)
    })
}

/// Index (0-based) of the Casimir coordinate.
///
/// # Safety
/// `c` must be live.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_distinguished(c: *const P3Chart) -> i32 {
    c.as_ref().map_or(-1, |c| c.0.distinguished as i32)
}

/// Compare the pushed-forward structure with the canonical matrix.
/// `CheckFailed` when deviation or round trip exceed the chart tolerance.
///
/// # Safety
/// Handles must be live; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_verify(
    s: *const P3Structure,
    c: *const P3Chart,
    samples: usize,
    seed: u64,
    max_deviation: *mut f64,
    max_round_trip: *mut f64,
) -> P3Status {
    guard(|| {
        let r = verify_chart_seeded(&handle(s, "s")?.matrix, &handle(c, "c")?.0, samples, seed);
        if !max_deviation.is_null() {
            *max_deviation = r.max_deviation;
        }
        if !max_round_trip.is_null() {
            *max_round_trip = r.max_round_trip;
        }
        Ok(if r.verdict.passed() { P3Status::Ok } else { P3Status::CheckFailed })
    })
}

/// # Safety
/// `c` must come from [`p3_chart_new`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn p3_chart_free(c: *mut P3Chart) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
