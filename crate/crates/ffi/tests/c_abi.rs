use std::ffi::{CStr, CString};
use std::ptr;

use pspec_ffi::*;

fn last_error() -> String {
    let p = pspec_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str, h: f64) -> *mut PspecDomain {
    let name = CString::new(name).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { pspec_domain_builtin(name.as_ptr(), h, &mut d) }, PspecStatus::Ok);
    assert!(!d.is_null());
    d
}

#[test]
fn square_eigenpair_round_trip() {
    let d = builtin("square", 1.0 / 32.0);
    let mut cells = 0usize;
    assert_eq!(unsafe { pspec_domain_cell_count(d, &mut cells) }, PspecStatus::Ok);
    assert_eq!(cells, 31 * 31);

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { pspec_eigen_solve(d, 2.0, 0.0, &mut e) }, PspecStatus::Ok);
    let mut lambda = 0.0;
    assert_eq!(unsafe { pspec_eigen_lambda(e, &mut lambda) }, PspecStatus::Ok);
    let h = 1.0 / 32.0;
    let exact = 8.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    assert!((lambda - exact).abs() / exact < 1e-5, "{lambda} vs {exact}");

    let mut len = 0usize;
    let st = unsafe { pspec_eigen_field(e, ptr::null_mut(), 0, &mut len) };
    assert_eq!(st, PspecStatus::BufferTooSmall);
    assert!(len >= cells);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { pspec_eigen_field(e, buf.as_mut_ptr(), len, &mut len) }, PspecStatus::Ok);
    assert_eq!(buf.iter().filter(|&&v| v > 0.0).count(), cells);

    unsafe {
        pspec_eigen_free(e);
        pspec_domain_free(d);
    }
}

#[test]
fn geometry_and_bounds() {
    let d = builtin("annulus", 1.0 / 32.0);
    let mut g = PspecGeometry { area: 0.0, perimeter: 0.0, inradius: 0.0, reduced_inradius: 0.0, circumradius: 0.0, connectivity: 0, convex: true };
    assert_eq!(unsafe { pspec_domain_geometry(d, &mut g) }, PspecStatus::Ok);
    assert_eq!(g.connectivity, 2);
    assert!(!g.convex);

    let id = CString::new("OSSERMAN_CROKE_SIMPLE").unwrap();
    let mut r = PspecBoundResult { lhs: 0.0, rhs: 0.0, slack: 0.0, satisfied: false };
    let st = unsafe { pspec_evaluate_bound(d, id.as_ptr(), 2.0, 0.0, 0.0, &mut r) };
    assert_eq!(st, PspecStatus::PreconditionViolated);
    assert!(last_error().contains("connectivity = 2"));

    let id = CString::new("OSSERMAN_CROKE_K").unwrap();
    assert_eq!(unsafe { pspec_evaluate_bound(d, id.as_ptr(), 2.0, 0.0, 0.0, &mut r) }, PspecStatus::Ok);
    assert!(r.satisfied && r.lhs > r.rhs);

    let id = CString::new("NO_SUCH_BOUND").unwrap();
    assert_eq!(unsafe { pspec_evaluate_bound(d, id.as_ptr(), 2.0, 0.0, 0.0, &mut r) }, PspecStatus::InvalidArgument);
    assert!(last_error().contains("NO_SUCH_BOUND"));
    unsafe { pspec_domain_free(d) };
}

#[test]
fn radii_and_cheeger() {
    let d = builtin("disk", 1.0 / 16.0);
    let mut r = 0.0;
    assert_eq!(unsafe { pspec_lieb_radius(d, 0.5, &mut r) }, PspecStatus::Ok);
    assert!((r - 2f64.sqrt()).abs() < 0.1, "{r}");
    let mut c = 0.0;
    assert_eq!(unsafe { pspec_cheeger_constant(d, 1.2, &mut c) }, PspecStatus::Ok);
    assert!(c > 1.9 && c < 2.3, "{c}");
    assert_eq!(unsafe { pspec_capacity_radius(d, 0.5, 2.5, &mut r) }, PspecStatus::InvalidExponent);
    unsafe { pspec_domain_free(d) };
}

#[test]
fn json_shapes_and_errors() {
    let spec = CString::new(r#"{"variant":"rectangle","a":2.0,"b":1.0}"#).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { pspec_domain_from_json(spec.as_ptr(), 0.125, &mut d) }, PspecStatus::Ok);
    let mut cells = 0;
    assert_eq!(unsafe { pspec_domain_cell_count(d, &mut cells) }, PspecStatus::Ok);
    assert_eq!(cells, 15 * 7);
    unsafe { pspec_domain_free(d) };

    let bad = CString::new(r#"{"variant":"disk","r":-1}"#).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { pspec_domain_from_json(bad.as_ptr(), 0.1, &mut d) }, PspecStatus::InvalidShape);
    assert!(d.is_null());

    let name = CString::new("dodecahedron").unwrap();
    assert_eq!(unsafe { pspec_domain_builtin(name.as_ptr(), 0.1, &mut d) }, PspecStatus::InvalidShape);
    assert!(last_error().contains("dodecahedron"));

    assert_eq!(unsafe { pspec_domain_builtin(ptr::null(), 0.1, &mut d) }, PspecStatus::NullPointer);
    let mut cells = 0;
    assert_eq!(unsafe { pspec_domain_cell_count(ptr::null(), &mut cells) }, PspecStatus::NullPointer);

    let sq = builtin("square", 0.1);
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { pspec_eigen_solve(sq, 0.5, 0.0, &mut e) }, PspecStatus::InvalidExponent);
    unsafe {
        pspec_domain_free(sq);
        pspec_domain_free(ptr::null_mut());
        pspec_eigen_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(pspec_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pspec.h")).unwrap();
    for sym in [
        "pspec_last_error_message",
        "pspec_version",
        "pspec_domain_builtin",
        "pspec_domain_from_json",
        "pspec_domain_free",
        "pspec_domain_cell_count",
        "pspec_domain_geometry",
        "pspec_eigen_solve",
        "pspec_eigen_lambda",
        "pspec_eigen_field",
        "pspec_eigen_free",
        "pspec_cheeger_constant",
        "pspec_lieb_radius",
        "pspec_capacity_radius",
        "pspec_evaluate_bound",
        "typedef struct PspecDomain PspecDomain",
        "PSPEC_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
}
