//! Acceptance checks. Each check prints one PASS/FAIL line; the binary exits
//! nonzero if any check fails.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::time::Instant;

use pspec_core::bounds::{run_suite, BoundId, BoundReport, SuiteConfig, SuiteOutcome};
use pspec_core::capacity::{isocapacity_lower_bound, lieb_radius, p_capacity};
use pspec_core::cheeger::{cheeger_constant, DEFAULT_PROBE_EXPONENT};
use pspec_core::eigen::{solve_first_eigen, SolveOptions};
use pspec_core::geometry::inradius;
use pspec_core::nodal::{
    check_vanishing, glued_antisymmetric_eigenpair, nodal_scaling_check, vanishing_ball_radius,
    GluedPair,
};
use pspec_core::runner::{self, RunConfig};
use pspec_core::shapes::standard_catalog;
use pspec_core::{rasterize_shape, GridDomain, ScalarField, ShapeSpec};

const J01_SQ: f64 = 5.783185962946784;
const J11_SQ: f64 = 14.681970642123893;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn disk() -> ShapeSpec {
    ShapeSpec::Disk { r: 1.0 }
}

fn square() -> ShapeSpec {
    ShapeSpec::Square { a: 1.0 }
}

fn lambda(spec: &ShapeSpec, p: f64, h: f64) -> f64 {
    let d = rasterize_shape(spec, h).unwrap();
    solve_first_eigen(&d, p, &SolveOptions::default())
        .unwrap()
        .lambda
}

fn eigensolver_oracles() -> Outcome {
    let h = 1.0 / 256.0;
    let mut pass = true;
    let mut detail = String::new();
    for (name, spec, exact) in [
        ("disk", disk(), J01_SQ),
        ("square", square(), 2.0 * PI * PI),
    ] {
        let t = Instant::now();
        let l = lambda(&spec, 2.0, h);
        let secs = t.elapsed().as_secs_f64();
        let err = rel(l, exact);
        pass &= err <= 0.01 && secs < 60.0;
        detail += &format!("{name} {l:.5} (err {:.3}%, {secs:.1}s) ", 100.0 * err);
    }
    Outcome { pass, detail }
}

fn scaling_law() -> Outcome {
    let h = 1.0 / 64.0;
    let mut worst: f64 = 0.0;
    for spec in [disk(), square()] {
        for p in [1.5, 2.0, 3.0] {
            let base = lambda(&spec, p, h);
            for t in [0.5, 2.0] {
                let scaled = lambda(&spec.scaled(t), p, h);
                worst = worst.max(rel(scaled * t.powf(p), base));
            }
        }
    }
    Outcome {
        pass: worst <= 0.02,
        detail: format!("worst relative deviation {:.3}% at h = 1/64", 100.0 * worst),
    }
}

fn soundness(outcome: &SuiteOutcome, secs: f64) -> Outcome {
    let violations: Vec<&BoundReport> = outcome.violations().collect();
    let evaluated = outcome.reports.iter().filter(|r| !r.skipped).count();
    let skipped = outcome.reports.len() - evaluated;
    let mut detail = format!(
        "{evaluated} evaluated, {skipped} skipped, {} violated, {} errors, {secs:.0}s",
        violations.len(),
        outcome.errors.len()
    );
    for v in &violations {
        detail += &format!(
            "; {} {} p={} lhs={:.5} rhs={:.5}",
            v.id, v.domain_label, v.p, v.lhs, v.rhs
        );
    }
    for e in &outcome.errors {
        detail += &format!("; error {} p={}: {}", e.domain, e.p, e.message);
    }
    Outcome {
        pass: outcome.all_satisfied() && secs < 1800.0,
        detail,
    }
}

fn cheeger_accuracy() -> Outcome {
    let h = 1.0 / 128.0;
    let hd = cheeger_constant(
        &rasterize_shape(&disk(), h).unwrap(),
        DEFAULT_PROBE_EXPONENT,
    )
    .unwrap()
    .h;
    let hs = cheeger_constant(
        &rasterize_shape(&square(), h).unwrap(),
        DEFAULT_PROBE_EXPONENT,
    )
    .unwrap()
    .h;
    Outcome {
        pass: (2.0..=2.10).contains(&hd) && (3.77..=4.05).contains(&hs),
        detail: format!("disk {hd:.4}, square {hs:.4}"),
    }
}

fn capacity_oracles() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (n, p, h, exact) in [(3usize, 2.0, 0.1, 4.0 * PI), (2, 1.5, 1.0 / 32.0, 2.0 * PI)] {
        let ball = GridDomain::ball(n, 1.0, h).unwrap();
        let c = p_capacity(&ball, p, 8.0).unwrap().value;
        let err = rel(c, exact);
        pass &= err <= 0.05;
        detail += &format!(
            "(n={n}, p={p}) {c:.4} vs {exact:.4} ({:+.2}%); ",
            100.0 * (c - exact) / exact
        );
    }
    let mut worst = f64::INFINITY;
    for s in standard_catalog() {
        let d = rasterize_shape(&s.spec, 1.0 / 32.0).unwrap();
        let c = p_capacity(&d, 1.5, 8.0).unwrap().value;
        let iso = isocapacity_lower_bound(d.volume(), 2, 1.5).unwrap();
        worst = worst.min(c / iso);
    }
    let ball = GridDomain::ball(3, 1.0, 0.1).unwrap();
    let c3 = p_capacity(&ball, 2.0, 8.0).unwrap().value;
    worst = worst.min(c3 / isocapacity_lower_bound(ball.volume(), 3, 2.0).unwrap());
    pass &= worst >= 0.95;
    detail += &format!("min capacity / isocapacity bound {worst:.4}");
    Outcome { pass, detail }
}

fn rows<'a>(
    outcome: &'a SuiteOutcome,
    id: BoundId,
    p: f64,
) -> impl Iterator<Item = &'a BoundReport> {
    outcome
        .reports
        .iter()
        .filter(move |r| r.id == id && r.p == p && !r.skipped)
}

fn radius_proposition(outcome: &SuiteOutcome, h: f64) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for name in ["disk", "square", "annulus"] {
        match rows(outcome, BoundId::LiebVsCapacityRadius, 1.5).find(|r| r.domain_label == name) {
            Some(r) => {
                let ok = r.lhs >= r.rhs;
                pass &= ok;
                detail += &format!("{name} lieb {:.4} vs cap-2h {:.4}; ", r.lhs, r.rhs);
            }
            None => {
                pass = false;
                detail += &format!("{name} missing; ");
            }
        }
    }
    let r = lieb_radius(&rasterize_shape(&disk(), h).unwrap(), 0.5)
        .unwrap()
        .radius;
    pass &= rel(r, SQRT_2) <= 0.03;
    detail += &format!(
        "lieb(disk, 0.5) {r:.4} ({:+.2}%)",
        100.0 * (r - SQRT_2) / SQRT_2
    );
    Outcome { pass, detail }
}

fn mazya_family(outcome: &SuiteOutcome) -> Outcome {
    let members: Vec<f64> = rows(outcome, BoundId::MazyaShubinRatio, 1.5)
        .filter(|r| r.domain_label != "family")
        .map(|r| r.lhs)
        .collect();
    let max = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = members.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max / min;
    Outcome {
        pass: members.len() == standard_catalog().len() && min > 0.0 && spread <= 100.0,
        detail: format!("{} shapes, spread {spread:.4}", members.len()),
    }
}

fn nodal_scaling(pairs: &mut Vec<(String, GluedPair)>) -> Outcome {
    let h = 1.0 / 128.0;
    let mut pass = true;
    let mut detail = String::new();
    for p in [2.0, 3.0] {
        let fit = nodal_scaling_check(&square(), p, &[0.5, 1.0, 2.0], h).unwrap();
        let ok = (fit.slope + 1.0 / p).abs() <= 0.03;
        pass &= ok;
        detail += &format!("square p={p} slope {:.4}; ", fit.slope);
        pairs.push((
            format!("square p={p}"),
            glued_antisymmetric_eigenpair(&square(), p, h).unwrap(),
        ));
    }
    let pair = glued_antisymmetric_eigenpair(&disk(), 2.0, h).unwrap();
    pass &= rel(pair.lambda, J11_SQ) <= 0.02;
    detail += &format!(
        "glued disk {:.4} ({:+.2}%)",
        pair.lambda,
        100.0 * (pair.lambda - J11_SQ) / J11_SQ
    );
    pairs.push(("disk p=2".into(), pair));
    Outcome { pass, detail }
}

fn vanishing(pairs: &[(String, GluedPair)]) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (label, pair) in pairs {
        let ball = lambda(&disk(), pair.p, pair.domain.h());
        let r = vanishing_ball_radius(pair.lambda, pair.p, ball, 1.05);
        let ok = check_vanishing(&pair.domain, &pair.field, r).unwrap();
        pass &= ok;
        detail += &format!("{label} R={r:.3} {ok}; ");
    }
    let d = rasterize_shape(&square(), 1.0 / 64.0).unwrap();
    let u: ScalarField = solve_first_eigen(&d, 2.0, &SolveOptions::default())
        .unwrap()
        .field;
    let control = check_vanishing(&d, &u, inradius(&d) / 2.0).unwrap();
    pass &= !control;
    detail += &format!("ground-state control {control}");
    Outcome { pass, detail }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::from_json_str(
        r#"{"catalog": ["disk", "annulus", "ell_shape", "spiky_disk"], "ps": [1.5, 3.0], "h": 0.0625}"#,
    )
    .unwrap();
    cfg.output_dir = tmp.path().to_path_buf();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let (_, files) = runner::run(&cfg).unwrap();
        let mut named: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|f| {
                (
                    f.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(f).unwrap(),
                )
            })
            .collect();
        named.sort();
        outputs.push(named);
    }
    let identical = outputs[0] == outputs[1];
    Outcome {
        pass: identical && !outputs[0].is_empty(),
        detail: format!("{} files, identical {identical}", outputs[0].len()),
    }
}

fn main() {
    let h = 1.0 / 32.0;
    let cfg = SuiteConfig {
        h,
        ids: BoundId::ALL.to_vec(),
        params: pspec_core::bounds::default_params(),
    };
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((name, o));
    };

    report("eigensolver oracle accuracy", eigensolver_oracles());
    report("scaling law", scaling_law());
    let t = Instant::now();
    let suite = run_suite(&standard_catalog(), &[1.5, 2.0, 3.0], &cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();
    report("inequality soundness sweep", soundness(&suite, secs));
    report("cheeger accuracy", cheeger_accuracy());
    report("capacity oracle", capacity_oracles());
    report("radius proposition", radius_proposition(&suite, h));
    report("capacity-radius family spread", mazya_family(&suite));
    let mut pairs = Vec::new();
    report("nodal scaling", nodal_scaling(&mut pairs));
    report("vanishing ball", vanishing(&pairs));
    report("determinism", determinism());

    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!(
        "{} of {} acceptance checks passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
