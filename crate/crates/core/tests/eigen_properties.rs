use proptest::prelude::*;
use pspec_core::eigen::{
    rayleigh_quotient, rescale_lambda, solve_first_eigen, EigenResult, SolveOptions,
};
use pspec_core::shapes::standard_catalog;
use pspec_core::{rasterize_shape, GridDomain, ScalarField, ShapeSpec};

fn solve(d: &GridDomain, p: f64) -> EigenResult {
    solve_first_eigen(d, p, &SolveOptions::default()).unwrap()
}

fn small_square() -> GridDomain {
    rasterize_shape(&ShapeSpec::Square { a: 1.0 }, 1.0 / 12.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_trial_fields_sit_above_lambda(
        seed in prop::collection::vec(-1.0f64..1.0, 121),
        p in prop::sample::select(vec![1.5, 2.0, 3.0]),
    ) {
        let d = small_square();
        let eig = solve(&d, p);
        let values = (0..d.len()).map(|c| seed[c % seed.len()] + 0.01).collect();
        let v = ScalarField::from_values(&d, values).unwrap();
        let q = rayleigh_quotient(&d, &v, p).unwrap();
        prop_assert!(q >= eig.lambda * (1.0 - 1e-7), "{q} < {}", eig.lambda);
    }

    #[test]
    fn quotient_is_scale_invariant(c in 1e-3f64..1e3, p in 1.1f64..4.0) {
        let d = small_square();
        let u = ScalarField::from_fn(&d, |x| (1.0 - 4.0 * x[0] * x[0]) * (1.0 - 4.0 * x[1] * x[1]));
        let w = ScalarField::from_fn(&d, |x| c * (1.0 - 4.0 * x[0] * x[0]) * (1.0 - 4.0 * x[1] * x[1]));
        let a = rayleigh_quotient(&d, &u, p).unwrap();
        let b = rayleigh_quotient(&d, &w, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn rescaling_composes(l in 0.1f64..1e3, p in 1.1f64..5.0, s in 0.1f64..10.0, t in 0.1f64..10.0) {
        let once = rescale_lambda(l, p, s * t);
        let twice = rescale_lambda(rescale_lambda(l, p, s), p, t);
        prop_assert!((once - twice).abs() <= 1e-12 * once);
    }
}

#[test]
fn trial_fields_from_other_exponents_sit_above_lambda() {
    let d = rasterize_shape(&ShapeSpec::EllShape { a: 1.0, notch: 0.5 }, 1.0 / 32.0).unwrap();
    let fields: Vec<EigenResult> = [1.5, 2.0, 3.0].iter().map(|&p| solve(&d, p)).collect();
    for eig in &fields {
        for other in &fields {
            let q = rayleigh_quotient(&d, &other.field, eig.p).unwrap();
            assert!(
                q >= eig.lambda * (1.0 - 1e-7),
                "p={} trial from p={}: {q} < {}",
                eig.p,
                other.p,
                eig.lambda
            );
        }
    }
}

#[test]
fn quotient_history_does_not_increase() {
    let d = rasterize_shape(
        &ShapeSpec::Annulus {
            r_in: 0.5,
            r_out: 1.0,
        },
        1.0 / 32.0,
    )
    .unwrap();
    for p in [1.5, 2.0, 3.0] {
        let eig = solve(&d, p);
        let eps = 1e-8 * d.diameter() / d.h();
        let rung: Vec<f64> = eig
            .history
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        assert!(!rung.is_empty());
        for w in rung.windows(2) {
            assert!(
                w[1] <= w[0] + 10.0 * eps * eps + 1e-12 * w[0],
                "p={p}: {} after {}",
                w[1],
                w[0]
            );
        }
    }
}

#[test]
fn ground_state_is_nonnegative() {
    for s in standard_catalog() {
        let d = rasterize_shape(&s.spec, 1.0 / 32.0).unwrap();
        for p in [1.5, 3.0] {
            let u = solve(&d, p).field;
            let floor = -1e-10 * u.max_abs();
            assert!(u.values.iter().all(|&v| v >= floor), "{} p={p}", s.name);
        }
    }
}

#[test]
fn nested_domains_have_ordered_eigenvalues() {
    let h = 1.0 / 32.0;
    let disk = rasterize_shape(&ShapeSpec::Disk { r: 1.0 }, h).unwrap();
    let inner = ["square", "annulus", "disk_one_hole", "disk_two_holes"];
    for p in [1.5, 2.0, 3.0] {
        let outer = solve(&disk, p).lambda;
        for s in standard_catalog()
            .into_iter()
            .filter(|s| inner.contains(&s.name.as_str()))
        {
            let d = rasterize_shape(&s.spec, h).unwrap();
            assert!(d.is_subset_of(&disk), "{}", s.name);
            let l = solve(&d, p).lambda;
            assert!(l >= outer * 0.98, "{} p={p}: {l} < {outer}", s.name);
        }
    }
}

#[test]
fn grid_refinement_is_stable() {
    for s in standard_catalog() {
        let coarse = rasterize_shape(&s.spec, 1.0 / 64.0).unwrap();
        let fine = rasterize_shape(&s.spec, 1.0 / 128.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let a = solve(&coarse, p).lambda;
            let b = solve(&fine, p).lambda;
            assert!((a - b).abs() / b <= 0.05, "{} p={p}: {a} vs {b}", s.name);
        }
    }
}

#[test]
fn rectangle_matches_separation_of_variables() {
    let h = 1.0 / 64.0;
    let d = rasterize_shape(&ShapeSpec::Rectangle { a: 2.0, b: 1.0 }, h).unwrap();
    let l = solve(&d, 2.0).lambda;
    let pi2 = std::f64::consts::PI.powi(2);
    let exact = pi2 / 4.0 + pi2;
    assert!((l - exact).abs() / exact < 0.01, "{l} vs {exact}");
}

#[test]
fn scaled_disk_follows_power_law() {
    let h = 1.0 / 64.0;
    for p in [1.5, 3.0] {
        let unit = solve(&rasterize_shape(&ShapeSpec::Disk { r: 1.0 }, h).unwrap(), p).lambda;
        let half = solve(
            &rasterize_shape(&ShapeSpec::Disk { r: 0.5 }, h / 2.0).unwrap(),
            p,
        )
        .lambda;
        assert!(
            (rescale_lambda(unit, p, 0.5) - half).abs() / half < 1e-4,
            "p={p}"
        );
    }
}
