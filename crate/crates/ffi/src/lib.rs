//! C ABI over `pspec-core`.
//!
//! Every entry point returns a [`PspecStatus`]; results come back through out
//! pointers. Domains and eigen solutions are opaque handles released with
//! their `_free` function. After a failure, `pspec_last_error_message` holds a
//! description for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pspec_core::bounds::{evaluate_labeled, BoundId, Params};
use pspec_core::capacity::{capacity_radius, lieb_radius};
use pspec_core::cheeger::cheeger_constant;
use pspec_core::eigen::{solve_first_eigen, EigenResult, SolveOptions};
use pspec_core::geometry::geometry_summary;
use pspec_core::shapes::find_builtin;
use pspec_core::{rasterize_shape, Error, GridDomain, ShapeSpec};

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PspecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidShape = 3,
    InvalidExponent = 4,
    NonConvergence = 5,
    PreconditionViolated = 6,
    Unsupported = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Rasterized domain.
pub struct PspecDomain {
    label: String,
    inner: GridDomain,
}

/// First eigenpair of a domain.
pub struct PspecEigen {
    inner: EigenResult,
}

/// One evaluated bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PspecBoundResult {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
}

/// Geometric summary of a planar domain.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PspecGeometry {
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub reduced_inradius: f64,
    pub circumradius: f64,
    pub connectivity: u32,
    pub convex: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PspecStatus {
    match e {
        Error::InvalidSpec(_) | Error::FeatureTooThin { .. } | Error::InvalidDomain(_) => PspecStatus::InvalidShape,
        Error::InvalidExponent(_) | Error::ExponentOutOfRange { .. } | Error::ConformalCase(_) => {
            PspecStatus::InvalidExponent
        }
        Error::NonConvergence { .. } => PspecStatus::NonConvergence,
        Error::PreconditionViolated { .. } | Error::NotSymmetric => PspecStatus::PreconditionViolated,
        Error::DimensionUnsupported(_) => PspecStatus::Unsupported,
        Error::MissingParam(_) | Error::InvalidConfig(_) | Error::ConfigParse(_) | Error::DomainError(_) => {
            PspecStatus::InvalidArgument
        }
        _ => PspecStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), (PspecStatus, String)>>(f: F) -> PspecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PspecStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PspecStatus::Internal
        }
    }
}

fn core<T>(r: pspec_core::Result<T>) -> Result<T, (PspecStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PspecStatus, String) {
    (PspecStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (PspecStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (PspecStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn domain<'a>(d: *const PspecDomain) -> Result<&'a PspecDomain, (PspecStatus, String)> {
    d.as_ref().ok_or_else(|| null("domain"))
}

fn out<T>(o: *mut T, value: T) -> Result<(), (PspecStatus, String)> {
    if o.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { o.write(value) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pspec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pspec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Rasterizes a built-in shape (`"disk"`, `"square"`, ...) at spacing `h`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out_domain` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_domain_builtin(name: *const c_char, h: f64, out_domain: *mut *mut PspecDomain) -> PspecStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let shape = find_builtin(name)
            .ok_or_else(|| (PspecStatus::InvalidShape, format!("unknown shape `{name}`")))?;
        let inner = core(rasterize_shape(&shape.spec, h))?;
        out(out_domain, Box::into_raw(Box::new(PspecDomain { label: shape.name, inner })))
    })
}

/// Rasterizes a shape given as JSON, e.g. `{"variant":"disk","r":1.0}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out_domain` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_domain_from_json(
    spec_json: *const c_char,
    h: f64,
    out_domain: *mut *mut PspecDomain,
) -> PspecStatus {
    guard(|| {
        let text = read_str(spec_json, "spec_json")?;
        let spec: ShapeSpec =
            serde_json::from_str(text).map_err(|e| (PspecStatus::InvalidShape, e.to_string()))?;
        let inner = core(rasterize_shape(&spec, h))?;
        let label = spec.variant_name().to_string();
        out(out_domain, Box::into_raw(Box::new(PspecDomain { label, inner })))
    })
}

/// Releases a domain. NULL is ignored.
///
/// # Safety
/// `d` must come from a `pspec_domain_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pspec_domain_free(d: *mut PspecDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of cells inside the domain.
///
/// # Safety
/// `d` must be a live domain handle; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_domain_cell_count(d: *const PspecDomain, out_count: *mut usize) -> PspecStatus {
    guard(|| out(out_count, domain(d)?.inner.cell_count()))
}

/// Geometric summary of a planar domain.
///
/// # Safety
/// `d` must be a live domain handle; `out_geometry` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_domain_geometry(d: *const PspecDomain, out_geometry: *mut PspecGeometry) -> PspecStatus {
    guard(|| {
        let g = core(geometry_summary(&domain(d)?.inner))?;
        out(
            out_geometry,
            PspecGeometry {
                area: g.area,
                perimeter: g.perimeter,
                inradius: g.inradius,
                reduced_inradius: g.reduced_inradius,
                circumradius: g.circumradius,
                connectivity: g.connectivity as u32,
                convex: g.convex,
            },
        )
    })
}

/// Solves for the first eigenpair. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `d` must be a live domain handle; `out_eigen` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_eigen_solve(
    d: *const PspecDomain,
    p: f64,
    tol: f64,
    out_eigen: *mut *mut PspecEigen,
) -> PspecStatus {
    guard(|| {
        let d = domain(d)?;
        let mut opts = SolveOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let inner = core(solve_first_eigen(&d.inner, p, &opts))?;
        out(out_eigen, Box::into_raw(Box::new(PspecEigen { inner })))
    })
}

/// Eigenvalue of a solution.
///
/// # Safety
/// `e` must be a live eigen handle; `out_lambda` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_eigen_lambda(e: *const PspecEigen, out_lambda: *mut f64) -> PspecStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("eigen"))?;
        out(out_lambda, e.inner.lambda)
    })
}

/// Copies the eigenfield, one value per grid cell in x-fastest order, into
/// `buf`. `out_len` always receives the required length; a short buffer
/// yields `BufferTooSmall` without copying.
///
/// # Safety
/// `e` must be a live eigen handle; `buf` must hold `capacity` doubles or be
/// NULL when `capacity` is 0; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_eigen_field(
    e: *const PspecEigen,
    buf: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> PspecStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("eigen"))?;
        let v = &e.inner.field.values;
        out(out_len, v.len())?;
        if capacity < v.len() {
            return Err((PspecStatus::BufferTooSmall, format!("field needs {} values", v.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Releases an eigen solution. NULL is ignored.
///
/// # Safety
/// `e` must come from `pspec_eigen_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pspec_eigen_free(e: *mut PspecEigen) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Cheeger constant estimate from the level sets of the eigenfunction at `p_probe`.
///
/// # Safety
/// `d` must be a live domain handle; `out_h` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_cheeger_constant(d: *const PspecDomain, p_probe: f64, out_h: *mut f64) -> PspecStatus {
    guard(|| out(out_h, core(cheeger_constant(&domain(d)?.inner, p_probe))?.h))
}

/// Largest radius whose balls all keep at most `alpha` of their volume outside the domain.
///
/// # Safety
/// `d` must be a live domain handle; `out_radius` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_lieb_radius(d: *const PspecDomain, alpha: f64, out_radius: *mut f64) -> PspecStatus {
    guard(|| out(out_radius, core(lieb_radius(&domain(d)?.inner, alpha))?.radius))
}

/// Capacity inradius at ratio `gamma` for `1 < p < n`.
///
/// # Safety
/// `d` must be a live domain handle; `out_radius` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_capacity_radius(
    d: *const PspecDomain,
    gamma: f64,
    p: f64,
    out_radius: *mut f64,
) -> PspecStatus {
    guard(|| {
        let d = &domain(d)?.inner;
        out(out_radius, core(capacity_radius(d, gamma, p, d.dim()))?.radius)
    })
}

/// Evaluates one bound by id (`"FABER_KRAHN"`, ...). `alpha` and `gamma` are
/// passed as parameters when positive.
///
/// # Safety
/// `d` must be a live domain handle; `id` a NUL-terminated string;
/// `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pspec_evaluate_bound(
    d: *const PspecDomain,
    id: *const c_char,
    p: f64,
    alpha: f64,
    gamma: f64,
    out_result: *mut PspecBoundResult,
) -> PspecStatus {
    guard(|| {
        let d = domain(d)?;
        let id: BoundId = core(read_str(id, "id")?.parse())?;
        let mut params = Params::new();
        if alpha > 0.0 {
            params.insert("alpha".into(), alpha);
        }
        if gamma > 0.0 {
            params.insert("gamma".into(), gamma);
        }
        let r = core(evaluate_labeled(id, &d.label, &d.inner, p, &params))?;
        out(out_result, PspecBoundResult { lhs: r.lhs, rhs: r.rhs, slack: r.slack, satisfied: r.satisfied })
    })
}
