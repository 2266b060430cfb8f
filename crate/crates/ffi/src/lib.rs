//! C ABI over the hyperpolygon library.
//!
//! Quivers and solutions are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`HpStatus`]; on failure the
//! message is available from [`hp_last_error`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`hp_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hyperpolygon::branes::involution_type_report;
use hyperpolygon::io::{to_json_string, QuiverDoc, SolutionDoc};
use hyperpolygon::moment::hyperpolygon_residual;
use hyperpolygon::quiver::{count_gt_hamiltonians, dim_hyperpolygon_space, dim_polygon_space};
use hyperpolygon::solver::dimension_report;
use hyperpolygon::{CometQuiver, Error, Representation, SolveOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed input: bad quiver, level vector, option or JSON.
    InvalidInput = 3,
    /// The best start was returned but did not reach the tolerance.
    NotConverged = 4,
    SingularPoint = 5,
    NotOnShell = 6,
    Inconclusive = 7,
    Io = 8,
    Panic = 99,
}

/// Opaque comet quiver.
pub struct HpQuiver {
    quiver: CometQuiver,
}

/// Opaque solution: quiver, level and representation.
pub struct HpSolution {
    doc: SolutionDoc,
    quiver: CometQuiver,
    rep: Representation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HpStatus {
    match e {
        Error::NotConverged(_) => HpStatus::NotConverged,
        Error::SingularPoint(_) => HpStatus::SingularPoint,
        Error::NotOnShell(_) => HpStatus::NotOnShell,
        Error::Inconclusive(_) => HpStatus::Inconclusive,
        Error::Io(_) => HpStatus::Io,
        _ => HpStatus::InvalidInput,
    }
}

struct Failure(HpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null() -> Failure {
    Failure(HpStatus::NullPointer, "null pointer argument".into())
}

/// Run `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<HpStatus, Failure>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(HpStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<HpStatus, Failure> {
    let c = CString::new(s).map_err(|_| Failure(HpStatus::InvalidInput, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(HpStatus::Ok)
}

unsafe fn quiver_ref<'a>(q: *const HpQuiver) -> Result<&'a HpQuiver, Failure> {
    q.as_ref().ok_or_else(null)
}

unsafe fn solution_ref<'a>(s: *const HpSolution) -> Result<&'a HpSolution, Failure> {
    s.as_ref().ok_or_else(null)
}

fn solution_handle(doc: SolutionDoc) -> Result<*mut HpSolution, Failure> {
    let (quiver, rep) = doc.parts()?;
    Ok(Box::into_raw(Box::new(HpSolution { doc, quiver, rep })))
}

/// Message of the last failed call on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a quiver document such as `{"arms": [[1,2],[1,2]], "loops": 1}`.
#[no_mangle]
pub unsafe extern "C" fn hp_quiver_from_json(json: *const c_char, out: *mut *mut HpQuiver) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let doc: QuiverDoc = serde_json::from_str(read_str(json)?).map_err(Error::from)?;
        let quiver = doc.to_quiver()?;
        *out = Box::into_raw(Box::new(HpQuiver { quiver }));
        Ok(HpStatus::Ok)
    })
}

/// Comet with `n` identical arms (complete flags if `complete`, else
/// minimal), `g` loops and central rank `r`.
#[no_mangle]
pub unsafe extern "C" fn hp_quiver_comet(
    r: usize,
    n: usize,
    g: usize,
    complete: bool,
    out: *mut *mut HpQuiver,
) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let quiver = if complete { CometQuiver::complete(r, n, g)? } else { CometQuiver::minimal(r, n, g)? };
        *out = Box::into_raw(Box::new(HpQuiver { quiver }));
        Ok(HpStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hp_quiver_free(q: *mut HpQuiver) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hp_quiver_n_arms(q: *const HpQuiver, out: *mut usize) -> HpStatus {
    guard(|| {
        let q = quiver_ref(q)?;
        *out.as_mut().ok_or_else(null)? = q.quiver.n_arms();
        Ok(HpStatus::Ok)
    })
}

/// Predicted complex dimensions of the polygon and hyperpolygon spaces.
#[no_mangle]
pub unsafe extern "C" fn hp_quiver_dims(
    q: *const HpQuiver,
    dim_polygon: *mut i64,
    dim_hyperpolygon: *mut i64,
) -> HpStatus {
    guard(|| {
        let q = quiver_ref(q)?;
        *dim_polygon.as_mut().ok_or_else(null)? = dim_polygon_space(&q.quiver);
        *dim_hyperpolygon.as_mut().ok_or_else(null)? = dim_hyperpolygon_space(&q.quiver);
        Ok(HpStatus::Ok)
    })
}

/// Gelfand-Tsetlin tally; fails for arms that are neither complete nor minimal.
#[no_mangle]
pub unsafe extern "C" fn hp_quiver_count_gt(q: *const HpQuiver, out: *mut i64) -> HpStatus {
    guard(|| {
        let q = quiver_ref(q)?;
        *out.as_mut().ok_or_else(null)? = count_gt_hamiltonians(&q.quiver)?;
        Ok(HpStatus::Ok)
    })
}

unsafe fn solve_impl(
    q: *const HpQuiver,
    alpha: *const f64,
    n_alpha: usize,
    seed: u64,
    starts: usize,
    polygon: bool,
    out: *mut *mut HpSolution,
) -> HpStatus {
    guard(|| {
        let q = quiver_ref(q)?;
        if out.is_null() || (alpha.is_null() && n_alpha > 0) {
            return Err(null());
        }
        let alpha = if n_alpha == 0 { Vec::new() } else { std::slice::from_raw_parts(alpha, n_alpha).to_vec() };
        let opts = SolveOptions {
            seed,
            starts: if starts == 0 { SolveOptions::default().starts } else { starts },
            ..Default::default()
        };
        let result = if polygon {
            hyperpolygon::solve_polygon(&q.quiver, &alpha, &opts)
        } else {
            hyperpolygon::solve(&q.quiver, &alpha, &opts)
        };
        let mode = if polygon { "polygon" } else { "hyperpolygon" };
        match result {
            Ok(sol) => {
                let mut doc = SolutionDoc::new(&q.quiver, &alpha, &sol, mode, &opts);
                doc.dimension = dimension_report(&q.quiver, &sol.representation, &alpha).ok();
                *out = solution_handle(doc)?;
                Ok(HpStatus::Ok)
            }
            Err(Error::NotConverged(best)) => {
                let msg = format!("not converged: best aggregate residual {:.3e}", best.residual.aggregate);
                *out = solution_handle(SolutionDoc::new(&q.quiver, &alpha, &best, mode, &opts))?;
                set_error(&msg);
                Ok(HpStatus::NotConverged)
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// Solve the hyperpolygon equations at the `n_alpha` levels. `starts = 0`
/// uses the default. On `HP_STATUS_NOT_CONVERGED` the best start is still
/// written to `out` and must be freed.
#[no_mangle]
pub unsafe extern "C" fn hp_solve(
    q: *const HpQuiver,
    alpha: *const f64,
    n_alpha: usize,
    seed: u64,
    starts: usize,
    out: *mut *mut HpSolution,
) -> HpStatus {
    solve_impl(q, alpha, n_alpha, seed, starts, false, out)
}

/// As [`hp_solve`] with the momenta held at zero.
#[no_mangle]
pub unsafe extern "C" fn hp_solve_polygon(
    q: *const HpQuiver,
    alpha: *const f64,
    n_alpha: usize,
    seed: u64,
    starts: usize,
    out: *mut *mut HpSolution,
) -> HpStatus {
    solve_impl(q, alpha, n_alpha, seed, starts, true, out)
}

#[no_mangle]
pub unsafe extern "C" fn hp_solution_from_json(json: *const c_char, out: *mut *mut HpSolution) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let doc: SolutionDoc = serde_json::from_str(read_str(json)?).map_err(Error::from)?;
        *out = solution_handle(doc)?;
        Ok(HpStatus::Ok)
    })
}

/// Pretty JSON solution document.
#[no_mangle]
pub unsafe extern "C" fn hp_solution_to_json(s: *const HpSolution, out: *mut *mut c_char) -> HpStatus {
    guard(|| {
        let s = solution_ref(s)?;
        if out.is_null() {
            return Err(null());
        }
        write_string(out, to_json_string(&s.doc, true)?)
    })
}

/// Aggregate residual, recomputed from the stored representation.
#[no_mangle]
pub unsafe extern "C" fn hp_solution_residual(s: *const HpSolution, out: *mut f64) -> HpStatus {
    guard(|| {
        let s = solution_ref(s)?;
        *out.as_mut().ok_or_else(null)? = hyperpolygon_residual(&s.quiver, &s.rep, &s.doc.alpha)?.aggregate;
        Ok(HpStatus::Ok)
    })
}

/// Numerical quotient dimension at the solution. Writes `-1` when the real
/// dimension is odd. Returns `HP_STATUS_SINGULAR_POINT` (with outputs still
/// written) when the rank gap is below the regularity threshold.
#[no_mangle]
pub unsafe extern "C" fn hp_solution_dimension(
    s: *const HpSolution,
    quotient_complex: *mut i64,
    gap: *mut f64,
) -> HpStatus {
    guard(|| {
        let s = solution_ref(s)?;
        let report = dimension_report(&s.quiver, &s.rep, &s.doc.alpha)?;
        *quotient_complex.as_mut().ok_or_else(null)? = report.quotient_complex.unwrap_or(-1);
        *gap.as_mut().ok_or_else(null)? = report.gap;
        if report.singular {
            set_error(&format!("singular point: rank gap {:.3e}", report.gap));
            return Ok(HpStatus::SingularPoint);
        }
        Ok(HpStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hp_solution_free(s: *mut HpSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Classification of the sign involution against I, J, K as JSON.
#[no_mangle]
pub unsafe extern "C" fn hp_brane_report_json(
    q: *const HpQuiver,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> HpStatus {
    guard(|| {
        let q = quiver_ref(q)?;
        if out.is_null() {
            return Err(null());
        }
        let report = involution_type_report(&q.quiver, samples, seed)?;
        write_string(out, to_json_string(&report, false)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
