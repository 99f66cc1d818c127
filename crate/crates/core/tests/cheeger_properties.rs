use std::f64::consts::PI;

use pspec_core::cheeger::{
    cheeger_constant, cheeger_lambda_bound, level_set_sweep, DEFAULT_PROBE_EXPONENT,
};
use pspec_core::eigen::{solve_first_eigen, SolveOptions};
use pspec_core::shapes::standard_catalog;
use pspec_core::{rasterize_shape, Error, ScalarField, ShapeSpec};

/// Cheeger constant of an `a x b` rectangle: corners rounded by quarter circles.
fn rectangle_cheeger(a: f64, b: f64) -> f64 {
    (4.0 - PI) / (a + b - ((a - b).powi(2) + PI * a * b).sqrt())
}

fn analytic() -> Vec<(&'static str, ShapeSpec, f64)> {
    vec![
        ("disk", ShapeSpec::Disk { r: 1.0 }, 2.0),
        (
            "square",
            ShapeSpec::Square { a: 1.0 },
            rectangle_cheeger(1.0, 1.0),
        ),
        (
            "rectangle",
            ShapeSpec::Rectangle { a: 2.0, b: 1.0 },
            rectangle_cheeger(2.0, 1.0),
        ),
    ]
}

#[test]
fn rectangle_formula_examples() {
    assert!((rectangle_cheeger(1.0, 1.0) - (2.0 + PI.sqrt())).abs() < 1e-12);
    assert!((rectangle_cheeger(1.0, 1.0) - 3.77245).abs() < 1e-5);
    assert!((rectangle_cheeger(2.0, 2.0) - rectangle_cheeger(1.0, 1.0) / 2.0).abs() < 1e-12);
}

#[test]
fn estimate_brackets_the_true_constant() {
    for (name, spec, exact) in analytic() {
        let d = rasterize_shape(&spec, 1.0 / 64.0).unwrap();
        let est = cheeger_constant(&d, DEFAULT_PROBE_EXPONENT).unwrap();
        assert!(
            est.h >= exact && est.h <= 1.07 * exact,
            "{name}: {} vs {exact}",
            est.h
        );
        assert!(est.cut_area > 0.0 && est.cut_perimeter > 0.0);
    }
}

#[test]
fn eigenvalues_respect_the_cheeger_bound() {
    for (name, spec, exact) in analytic() {
        let d = rasterize_shape(&spec, 1.0 / 32.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let l = solve_first_eigen(&d, p, &SolveOptions::default())
                .unwrap()
                .lambda;
            let bound = cheeger_lambda_bound(exact, p);
            assert!(l >= bound * 0.98, "{name} p={p}: {l} < {bound}");
        }
    }
}

#[test]
fn dilation_scales_inversely() {
    let h = 1.0 / 64.0;
    for spec in [ShapeSpec::Disk { r: 1.0 }, ShapeSpec::Square { a: 1.0 }] {
        let base = cheeger_constant(&rasterize_shape(&spec, h).unwrap(), DEFAULT_PROBE_EXPONENT)
            .unwrap()
            .h;
        for t in [0.5, 2.0] {
            let scaled = cheeger_constant(
                &rasterize_shape(&spec.scaled(t), h).unwrap(),
                DEFAULT_PROBE_EXPONENT,
            )
            .unwrap()
            .h;
            assert!(
                (scaled * t - base).abs() / base <= 0.05,
                "t={t}: {scaled} vs {base}"
            );
        }
    }
}

#[test]
fn simply_connected_shapes_cut_simply() {
    for s in standard_catalog() {
        let d = rasterize_shape(&s.spec, 1.0 / 32.0).unwrap();
        let k = pspec_core::geometry::connectivity(&d).unwrap();
        let est = cheeger_constant(&d, DEFAULT_PROBE_EXPONENT).unwrap();
        if k == 1 {
            assert_eq!(est.connectivity_of_cut, 1, "{}", s.name);
        } else {
            assert!(
                est.connectivity_of_cut <= k,
                "{}: cut {} domain {k}",
                s.name,
                est.connectivity_of_cut
            );
        }
    }
}

#[test]
fn constant_field_sweeps_the_whole_domain() {
    let d = rasterize_shape(&ShapeSpec::Square { a: 1.0 }, 1.0 / 32.0).unwrap();
    let u = ScalarField::from_fn(&d, |_| 1.0);
    let est = level_set_sweep(&d, &u, 64).unwrap();
    let side = 30.0 / 32.0;
    let expected = 4.0 * side / (side * side);
    assert!(
        (est.h - expected).abs() / expected < 0.02,
        "{} vs {expected}",
        est.h
    );
    let zero = ScalarField::zeros(&d);
    assert!(matches!(
        level_set_sweep(&d, &zero, 64),
        Err(Error::ZeroTrialFunction)
    ));
}
