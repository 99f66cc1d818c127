//! Inequality engine: both sides of every eigenvalue bound on a (domain, p)
//! pair, with the intermediate quantities that produced them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_radius, lieb_radius, lieb_sigma, RadiusSearchResult};
use crate::cheeger::{
    cheeger_constant, cheeger_lambda_bound, CheegerEstimate, DEFAULT_PROBE_EXPONENT,
};
use crate::eigen::{eigen_limit_case, solve_first_eigen, EigenRecord, LimitCase, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::{geometry_summary, unit_ball_volume, GeometrySummary};
use crate::grid::GridDomain;
use crate::shapes::{rasterize_shape, NamedShape, ShapeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundId {
    DomainMonotonicityUpper,
    FaberKrahn,
    CheegerLower,
    OssermanCrokeSimple,
    OssermanCrokeK,
    MakaiP1,
    LiebLower,
    ConvexLower,
    InftyIdentity,
    MazyaShubinRatio,
    LiebVsCapacityRadius,
    HighPInradius,
}

impl BoundId {
    pub const ALL: [BoundId; 12] = [
        BoundId::DomainMonotonicityUpper,
        BoundId::FaberKrahn,
        BoundId::CheegerLower,
        BoundId::OssermanCrokeSimple,
        BoundId::OssermanCrokeK,
        BoundId::MakaiP1,
        BoundId::LiebLower,
        BoundId::ConvexLower,
        BoundId::InftyIdentity,
        BoundId::MazyaShubinRatio,
        BoundId::LiebVsCapacityRadius,
        BoundId::HighPInradius,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::DomainMonotonicityUpper => "DOMAIN_MONOTONICITY_UPPER",
            BoundId::FaberKrahn => "FABER_KRAHN",
            BoundId::CheegerLower => "CHEEGER_LOWER",
            BoundId::OssermanCrokeSimple => "OSSERMAN_CROKE_SIMPLE",
            BoundId::OssermanCrokeK => "OSSERMAN_CROKE_K",
            BoundId::MakaiP1 => "MAKAI_P1",
            BoundId::LiebLower => "LIEB_LOWER",
            BoundId::ConvexLower => "CONVEX_LOWER",
            BoundId::InftyIdentity => "INFTY_IDENTITY",
            BoundId::MazyaShubinRatio => "MAZYA_SHUBIN_RATIO",
            BoundId::LiebVsCapacityRadius => "LIEB_VS_CAPACITY_RADIUS",
            BoundId::HighPInradius => "HIGH_P_INRADIUS",
        }
    }

    /// Ids whose content is a statement about the whole catalog.
    pub fn is_family(self) -> bool {
        matches!(self, BoundId::MazyaShubinRatio | BoundId::HighPInradius)
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::ConfigParse(format!("unknown bound id `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs >= rhs`
    AtLeast,
    /// `lhs <= rhs`
    AtMost,
    /// `lhs == rhs`
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub value: f64,
    pub module: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: BoundId,
    pub p: f64,
    pub domain_label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub satisfied: bool,
    /// Relative margin, positive when the relation holds strictly.
    pub slack: f64,
    /// Numerical allowance on `slack`.
    pub tolerance: f64,
    pub inputs: BTreeMap<String, Input>,
    pub skipped: bool,
    pub skip_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property_level: Option<String>,
}

pub type Params = BTreeMap<String, f64>;

pub const DEFAULT_TOLERANCE: f64 = 0.02;

/// `(lhs - rhs) / max(|lhs|, |rhs|)`, sign-adjusted so that positive means held.
pub fn relative_slack(lhs: f64, rhs: f64, relation: Relation) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    let raw = if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    };
    match relation {
        Relation::AtLeast => raw,
        Relation::AtMost => -raw,
        Relation::Equal => -raw.abs(),
    }
}

/// Per-(domain, p) quantities consumed by the bounds; computed on demand.
#[derive(Debug, Clone)]
pub struct Quantities {
    pub label: String,
    pub p: f64,
    pub h: f64,
    pub n: usize,
    pub geometry: GeometrySummary,
    pub lambda: Option<f64>,
    pub lambda_ball1: Option<f64>,
    pub cheeger: Option<CheegerEstimate>,
    pub lieb: Option<RadiusSearchResult>,
    pub lieb_matched: Option<RadiusSearchResult>,
    pub capacity_radius: Option<RadiusSearchResult>,
    pub lambda_infinity: Option<f64>,
}

impl Quantities {
    pub fn new(label: &str, d: &GridDomain, p: f64) -> Result<Self> {
        Ok(Quantities {
            label: label.to_string(),
            p,
            h: d.h(),
            n: d.dim(),
            geometry: geometry_summary(d)?,
            lambda: None,
            lambda_ball1: None,
            cheeger: None,
            lieb: None,
            lieb_matched: None,
            capacity_radius: None,
            lambda_infinity: None,
        })
    }
}

fn param(params: &Params, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::MissingParam(key.to_string()))
}

fn ratio_param(params: &Params, key: &str) -> Result<f64> {
    let v = param(params, key)?;
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "{key} must lie in (0, 1), got {v}"
        )));
    }
    Ok(v)
}

fn violated(id: BoundId, reason: impl Into<String>) -> Error {
    Error::PreconditionViolated {
        id: id.to_string(),
        reason: reason.into(),
    }
}

/// Checks the hypotheses of `id` on a domain with the given summary.
pub fn check_preconditions(id: BoundId, g: &GeometrySummary, p: f64, n: usize) -> Result<()> {
    let k = g.connectivity;
    match id {
        BoundId::OssermanCrokeSimple | BoundId::MakaiP1 if k != 1 => {
            Err(violated(id, format!("connectivity = {k}")))
        }
        BoundId::OssermanCrokeK if k < 2 => Err(violated(id, format!("connectivity = {k}"))),
        BoundId::ConvexLower if !g.convex => Err(violated(id, "domain is not convex")),
        BoundId::MazyaShubinRatio | BoundId::LiebVsCapacityRadius if !(p > 1.0 && p < n as f64) => {
            Err(violated(
                id,
                format!("requires 1 < p < n, got p = {p}, n = {n}"),
            ))
        }
        BoundId::HighPInradius if p <= n as f64 => Err(violated(
            id,
            format!("requires p > n, got p = {p}, n = {n}"),
        )),
        _ => Ok(()),
    }
}

fn solve_options() -> SolveOptions {
    SolveOptions {
        tol: 1e-6,
        ..SolveOptions::default()
    }
}

/// `lambda_{1,p}` of the unit disk at spacing `h`.
pub fn unit_ball_lambda(p: f64, h: f64) -> Result<f64> {
    let d = rasterize_shape(&ShapeSpec::Disk { r: 1.0 }, h)?;
    Ok(solve_first_eigen(&d, p, &solve_options())?.lambda)
}

/// Fills in whatever `id` needs and is still missing.
pub fn gather(id: BoundId, d: &GridDomain, q: &mut Quantities, params: &Params) -> Result<()> {
    let p = q.p;
    let needs_lambda = !matches!(
        id,
        BoundId::MakaiP1 | BoundId::InftyIdentity | BoundId::LiebVsCapacityRadius
    );
    if needs_lambda && q.lambda.is_none() {
        q.lambda = Some(solve_first_eigen(d, p, &solve_options())?.lambda);
    }
    let needs_ball = matches!(
        id,
        BoundId::DomainMonotonicityUpper
            | BoundId::FaberKrahn
            | BoundId::LiebLower
            | BoundId::HighPInradius
    );
    if needs_ball && q.lambda_ball1.is_none() {
        q.lambda_ball1 = Some(unit_ball_lambda(p, q.h)?);
    }
    if matches!(id, BoundId::CheegerLower | BoundId::MakaiP1) && q.cheeger.is_none() {
        q.cheeger = Some(cheeger_constant(d, DEFAULT_PROBE_EXPONENT)?);
    }
    if id == BoundId::LiebLower && q.lieb.is_none() {
        q.lieb = Some(lieb_radius(d, ratio_param(params, "alpha")?)?);
    }
    if matches!(
        id,
        BoundId::MazyaShubinRatio | BoundId::LiebVsCapacityRadius
    ) && q.capacity_radius.is_none()
    {
        q.capacity_radius = Some(capacity_radius(d, ratio_param(params, "gamma")?, p, q.n)?);
    }
    if id == BoundId::LiebVsCapacityRadius && q.lieb_matched.is_none() {
        let nf = q.n as f64;
        let alpha = ratio_param(params, "gamma")?.powf(nf / (nf - p));
        q.lieb_matched = Some(lieb_radius(d, alpha)?);
    }
    if id == BoundId::InftyIdentity && q.lambda_infinity.is_none() {
        q.lambda_infinity = Some(eigen_limit_case(d, LimitCase::PInfinity)?);
    }
    Ok(())
}

struct Builder {
    inputs: BTreeMap<String, Input>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            inputs: BTreeMap::new(),
        }
    }

    fn put(&mut self, name: &str, value: f64, module: &str) -> f64 {
        self.inputs.insert(
            name.to_string(),
            Input {
                value,
                module: module.to_string(),
            },
        );
        value
    }
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingParam(what.to_string()))
}

/// Evaluates `id` from already gathered quantities.
pub fn report_from(id: BoundId, q: &Quantities, params: &Params) -> Result<BoundReport> {
    check_preconditions(id, &q.geometry, q.p, q.n)?;
    let tolerance = params
        .get("tolerance")
        .copied()
        .unwrap_or(DEFAULT_TOLERANCE);
    let p = q.p;
    let nf = q.n as f64;
    let g = &q.geometry;
    let mut b = Builder::new();
    let mut property_level = None;
    let (lhs, rhs, relation) = match id {
        BoundId::DomainMonotonicityUpper => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let ball = b.put(
                "lambda_ball1",
                need(q.lambda_ball1, "lambda_ball1")?,
                "eigensolver",
            );
            let rho = b.put("rho", g.inradius, "geometry");
            (rho, (ball / lam).powf(1.0 / p), Relation::AtMost)
        }
        BoundId::FaberKrahn => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let ball = b.put(
                "lambda_ball1",
                need(q.lambda_ball1, "lambda_ball1")?,
                "eigensolver",
            );
            let area = b.put("area", g.area, "geometry");
            let r_star = b.put(
                "schwarz_radius",
                (area / unit_ball_volume(q.n)).powf(1.0 / nf),
                "geometry",
            );
            (lam, ball / r_star.powf(p), Relation::AtLeast)
        }
        BoundId::CheegerLower => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let c = need(q.cheeger, "cheeger")?;
            let h = b.put("h", c.h, "cheeger");
            b.put("k", c.connectivity_of_cut as f64, "cheeger");
            b.put("k_domain", g.connectivity as f64, "geometry");
            (lam, cheeger_lambda_bound(h, p), Relation::AtLeast)
        }
        BoundId::OssermanCrokeSimple => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let rt = b.put("reduced_rho", g.reduced_inradius, "geometry");
            b.put("k", 1.0, "geometry");
            (lam, (1.0 / (p * rt)).powf(p), Relation::AtLeast)
        }
        BoundId::OssermanCrokeK => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let rho = b.put("rho", g.inradius, "geometry");
            let k = b.put("k", g.connectivity as f64, "geometry");
            (
                lam,
                2f64.powf(p / 2.0) / (k.powf(p / 2.0) * p.powf(p) * rho.powf(p)),
                Relation::AtLeast,
            )
        }
        BoundId::MakaiP1 => {
            let c = need(q.cheeger, "cheeger")?;
            let h = b.put("h", c.h, "cheeger");
            b.put("p_probe", DEFAULT_PROBE_EXPONENT, "cheeger");
            let rt = b.put("reduced_rho", g.reduced_inradius, "geometry");
            (h, 1.0 / rt, Relation::AtLeast)
        }
        BoundId::LiebLower => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let ball = b.put(
                "lambda_ball1",
                need(q.lambda_ball1, "lambda_ball1")?,
                "eigensolver",
            );
            let alpha = b.put("alpha", ratio_param(params, "alpha")?, "config");
            let rl = b.put(
                "r_lieb",
                need(q.lieb.as_ref(), "lieb_radius")?.radius,
                "capacity",
            );
            let sigma = b.put("sigma", lieb_sigma(q.n, p, alpha, ball), "capacity");
            (lam, sigma / rl.powf(p), Relation::AtLeast)
        }
        BoundId::ConvexLower => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let rho = b.put("rho", g.inradius, "geometry");
            (lam, (1.0 / (p * rho)).powf(p), Relation::AtLeast)
        }
        BoundId::InftyIdentity => {
            let li = b.put(
                "lambda_infinity",
                need(q.lambda_infinity, "lambda_infinity")?,
                "eigensolver",
            );
            let rho = b.put("rho", g.inradius, "geometry");
            if let Some(lam) = q.lambda {
                b.put("lambda_p_root", lam.powf(1.0 / p), "eigensolver");
            }
            (li, 1.0 / rho, Relation::Equal)
        }
        BoundId::MazyaShubinRatio => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let r = b.put(
                "r_capacity",
                need(q.capacity_radius.as_ref(), "capacity_radius")?.radius,
                "capacity",
            );
            b.put("gamma", ratio_param(params, "gamma")?, "config");
            property_level = Some("family".to_string());
            (lam * r.powf(p), 0.0, Relation::AtLeast)
        }
        BoundId::LiebVsCapacityRadius => {
            let gamma = b.put("gamma", ratio_param(params, "gamma")?, "config");
            b.put("alpha", gamma.powf(nf / (nf - p)), "config");
            let rl = b.put(
                "r_lieb",
                need(q.lieb_matched.as_ref(), "lieb_radius")?.radius,
                "capacity",
            );
            let rc = b.put(
                "r_capacity",
                need(q.capacity_radius.as_ref(), "capacity_radius")?.radius,
                "capacity",
            );
            b.put("h", q.h, "geometry");
            (rl, rc - 2.0 * q.h, Relation::AtLeast)
        }
        BoundId::HighPInradius => {
            let lam = b.put("lambda", need(q.lambda, "lambda")?, "eigensolver");
            let rho = b.put("rho", g.inradius, "geometry");
            let ball = b.put(
                "lambda_ball1",
                need(q.lambda_ball1, "lambda_ball1")?,
                "eigensolver",
            );
            let v = lam * rho.powf(p);
            b.put("running_min", v, "bounds");
            property_level = Some("family".to_string());
            (v, 1e-3 * ball, Relation::AtLeast)
        }
    };
    let slack = relative_slack(lhs, rhs, relation);
    let satisfied = match relation {
        Relation::AtLeast if rhs == 0.0 => lhs > 0.0,
        _ => slack >= -tolerance,
    };
    Ok(BoundReport {
        id,
        p,
        domain_label: q.label.clone(),
        lhs,
        rhs,
        relation,
        satisfied,
        slack,
        tolerance,
        inputs: b.inputs,
        skipped: false,
        skip_reason: None,
        property_level,
    })
}

/// Computes both sides of `id` on one domain.
pub fn evaluate_bound(id: BoundId, d: &GridDomain, p: f64, params: &Params) -> Result<BoundReport> {
    evaluate_labeled(id, "domain", d, p, params)
}

pub fn evaluate_labeled(
    id: BoundId,
    label: &str,
    d: &GridDomain,
    p: f64,
    params: &Params,
) -> Result<BoundReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let mut q = Quantities::new(label, d, p)?;
    check_preconditions(id, &q.geometry, p, q.n)?;
    gather(id, d, &mut q, params)?;
    report_from(id, &q, params)
}

fn skip_report(id: BoundId, label: &str, p: f64, reason: String, tolerance: f64) -> BoundReport {
    BoundReport {
        id,
        p,
        domain_label: label.to_string(),
        lhs: f64::NAN,
        rhs: f64::NAN,
        relation: Relation::AtLeast,
        satisfied: false,
        slack: f64::NAN,
        tolerance,
        inputs: BTreeMap::new(),
        skipped: true,
        skip_reason: Some(reason),
        property_level: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub h: f64,
    pub ids: Vec<BoundId>,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub domain: String,
    pub p: f64,
    pub id: Option<BoundId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub domain: String,
    pub record: EigenRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub reports: Vec<BoundReport>,
    pub errors: Vec<ItemError>,
    pub eigen: Vec<EigenEntry>,
}

impl SuiteOutcome {
    /// True when every non-skipped report holds and nothing failed.
    pub fn all_satisfied(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(|r| r.skipped || r.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(|r| !r.skipped && !r.satisfied)
    }
}

struct Cell {
    label: String,
    p: f64,
    domain: Option<GridDomain>,
    quantities: Option<Quantities>,
    eigen: Option<EigenRecord>,
    errors: Vec<ItemError>,
}

/// Evaluates every requested id on every (shape, p).
///
/// Reports are ordered by shape, then p, then id. Family summaries follow,
/// ordered by id and then p. Skips are reports; per-item failures are
/// collected in `errors` without stopping the suite.
pub fn run_suite(catalog: &[NamedShape], ps: &[f64], config: &SuiteConfig) -> Result<SuiteOutcome> {
    if catalog.is_empty() {
        return Err(Error::InvalidConfig("catalog must be nonempty".into()));
    }
    if ps.is_empty() {
        return Err(Error::InvalidConfig("ps must be nonempty".into()));
    }
    if let Some(&p) = ps.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
        return Err(Error::InvalidExponent(p));
    }
    let h = config.h;
    let params = &config.params;
    let tolerance = params
        .get("tolerance")
        .copied()
        .unwrap_or(DEFAULT_TOLERANCE);
    let mut ids = config.ids.clone();
    ids.sort();
    ids.dedup();

    // unit-ball eigenvalues, one per exponent
    let ball: HashMap<u64, std::result::Result<f64, String>> = ps
        .par_iter()
        .map(|&p| {
            (
                p.to_bits(),
                unit_ball_lambda(p, h).map_err(|e| e.to_string()),
            )
        })
        .collect();

    // Cheeger estimates, one per shape
    let wants_cheeger = ids
        .iter()
        .any(|id| matches!(id, BoundId::CheegerLower | BoundId::MakaiP1));
    let domains: Vec<std::result::Result<GridDomain, String>> = catalog
        .iter()
        .map(|s| rasterize_shape(&s.spec, h).map_err(|e| e.to_string()))
        .collect();
    let cheeger: Vec<Option<std::result::Result<CheegerEstimate, String>>> = domains
        .par_iter()
        .map(|d| match d {
            Ok(d) if wants_cheeger => {
                Some(cheeger_constant(d, DEFAULT_PROBE_EXPONENT).map_err(|e| e.to_string()))
            }
            _ => None,
        })
        .collect();

    let jobs: Vec<(usize, f64)> = (0..catalog.len())
        .flat_map(|s| ps.iter().map(move |&p| (s, p)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(s, p)| {
            let label = catalog[s].name.clone();
            let mut cell = Cell {
                label: label.clone(),
                p,
                domain: None,
                quantities: None,
                eigen: None,
                errors: vec![],
            };
            let err = |id: Option<BoundId>, message: String| ItemError {
                domain: label.clone(),
                p,
                id,
                message,
            };
            let d = match &domains[s] {
                Ok(d) => d.clone(),
                Err(e) => {
                    cell.errors.push(err(None, e.clone()));
                    return cell;
                }
            };
            let mut q = match Quantities::new(&label, &d, p) {
                Ok(q) => q,
                Err(e) => {
                    cell.errors.push(err(None, e.to_string()));
                    return cell;
                }
            };
            match solve_first_eigen(&d, p, &solve_options()) {
                Ok(r) => {
                    q.lambda = Some(r.lambda);
                    cell.eigen = Some(r.record());
                }
                Err(e) => cell.errors.push(err(None, e.to_string())),
            }
            match &ball[&p.to_bits()] {
                Ok(v) => q.lambda_ball1 = Some(*v),
                Err(e) => cell.errors.push(err(None, format!("unit disk: {e}"))),
            }
            match &cheeger[s] {
                Some(Ok(c)) => q.cheeger = Some(*c),
                Some(Err(e)) => cell.errors.push(err(None, format!("cheeger: {e}"))),
                None => {}
            }
            for &id in &ids {
                if check_preconditions(id, &q.geometry, p, q.n).is_err() {
                    continue;
                }
                if let Err(e) = gather(id, &d, &mut q, params) {
                    cell.errors.push(err(Some(id), e.to_string()));
                }
            }
            cell.domain = Some(d);
            cell.quantities = Some(q);
            cell
        })
        .collect();

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let mut eigen = Vec::new();
    for cell in &cells {
        errors.extend(cell.errors.iter().cloned());
        if let Some(rec) = cell.eigen {
            eigen.push(EigenEntry {
                domain: cell.label.clone(),
                record: rec,
            });
        }
        let Some(q) = &cell.quantities else { continue };
        for &id in &ids {
            match report_from(id, q, params) {
                Ok(r) => reports.push(r),
                Err(Error::PreconditionViolated { reason, .. }) => {
                    reports.push(skip_report(id, &cell.label, cell.p, reason, tolerance))
                }
                Err(e) => {
                    let dup = cell.errors.iter().any(|x| x.id == Some(id));
                    if !dup {
                        errors.push(ItemError {
                            domain: cell.label.clone(),
                            p: cell.p,
                            id: Some(id),
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }

    // family summaries and running minima
    for id in ids.iter().copied().filter(|id| id.is_family()) {
        for &p in ps {
            let members: Vec<usize> = reports
                .iter()
                .enumerate()
                .filter(|(_, r)| r.id == id && r.p == p && !r.skipped)
                .map(|(k, _)| k)
                .collect();
            if members.is_empty() {
                continue;
            }
            let values: Vec<f64> = members.iter().map(|&k| reports[k].lhs).collect();
            let mut inputs = BTreeMap::new();
            let mut running = f64::INFINITY;
            for (&k, &v) in members.iter().zip(&values) {
                running = running.min(v);
                if id == BoundId::HighPInradius {
                    reports[k].inputs.insert(
                        "running_min".into(),
                        Input {
                            value: running,
                            module: "bounds".into(),
                        },
                    );
                }
                let label = reports[k].domain_label.clone();
                inputs.insert(
                    format!("value[{label}]"),
                    Input {
                        value: v,
                        module: "bounds".into(),
                    },
                );
            }
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lhs, rhs, relation) = match id {
                BoundId::MazyaShubinRatio => {
                    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
                    (spread, 100.0, Relation::AtMost)
                }
                _ => {
                    let floor = reports[members[0]].rhs;
                    (min, floor, Relation::AtLeast)
                }
            };
            let slack = relative_slack(lhs, rhs, relation);
            reports.push(BoundReport {
                id,
                p,
                domain_label: "family".into(),
                lhs,
                rhs,
                relation,
                satisfied: slack.is_finite() && slack >= 0.0,
                slack,
                tolerance: 0.0,
                inputs,
                skipped: false,
                skip_reason: None,
                property_level: Some("family".into()),
            });
        }
    }
    Ok(SuiteOutcome {
        reports,
        errors,
        eigen,
    })
}

/// Standard suite parameters: `alpha = gamma = 0.5` and the default tolerance.
pub fn default_params() -> Params {
    let mut m = Params::new();
    m.insert("alpha".into(), 0.5);
    m.insert("gamma".into(), 0.5);
    m.insert("tolerance".into(), DEFAULT_TOLERANCE);
    m
}

pub const CSV_HEADER: &str = "id,domain,p,lhs,rhs,satisfied,slack,skipped,skip_reason";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
            let js = serde_json::to_string(&id).unwrap();
            assert_eq!(js, format!("\"{}\"", id.as_str()));
        }
        assert!(matches!(
            "NOPE".parse::<BoundId>(),
            Err(Error::ConfigParse(_))
        ));
    }

    #[test]
    fn slack_orientation() {
        assert!(relative_slack(2.0, 1.0, Relation::AtLeast) > 0.0);
        assert!(relative_slack(1.0, 2.0, Relation::AtMost) > 0.0);
        assert!((relative_slack(2.0, 1.0, Relation::AtLeast) - 0.5).abs() < 1e-15);
        assert!(relative_slack(1.0, 1.1, Relation::Equal) < 0.0);
        assert_eq!(relative_slack(0.0, 0.0, Relation::Equal), 0.0);
    }

    #[test]
    fn preconditions() {
        let d = rasterize_shape(
            &ShapeSpec::Annulus {
                r_in: 0.5,
                r_out: 1.0,
            },
            1.0 / 16.0,
        )
        .unwrap();
        let g = geometry_summary(&d).unwrap();
        assert!(matches!(
            check_preconditions(BoundId::OssermanCrokeSimple, &g, 2.0, 2),
            Err(Error::PreconditionViolated { .. })
        ));
        assert!(check_preconditions(BoundId::OssermanCrokeK, &g, 2.0, 2).is_ok());
        assert!(check_preconditions(BoundId::MazyaShubinRatio, &g, 2.0, 2).is_err());
        assert!(check_preconditions(BoundId::HighPInradius, &g, 3.0, 2).is_ok());
    }

    #[test]
    fn missing_alpha() {
        let d = rasterize_shape(&ShapeSpec::Square { a: 1.0 }, 1.0 / 16.0).unwrap();
        let r = evaluate_bound(BoundId::LiebLower, &d, 2.0, &Params::new());
        assert!(matches!(r, Err(Error::MissingParam(k)) if k == "alpha"));
    }

    #[test]
    fn empty_ps_rejected() {
        let cfg = SuiteConfig {
            h: 0.1,
            ids: BoundId::ALL.to_vec(),
            params: default_params(),
        };
        let cat = crate::shapes::standard_catalog();
        assert!(matches!(
            run_suite(&cat, &[], &cfg),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            run_suite(&[], &[2.0], &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
