//! Configuration, report emission and the catalog listing behind the `pspec` CLI.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{
    run_suite, BoundId, BoundReport, SuiteConfig, SuiteOutcome, DEFAULT_TOLERANCE,
};
use crate::capacity::{capacity_radius, lieb_radius, RadiusSearchResult};
use crate::error::{Error, Result};
use crate::geometry::{connectivity, is_convex};
use crate::nodal::{
    check_vanishing, glued_antisymmetric_eigenpair, nodal_scaling_check, vanishing_ball_radius,
    ScalingFit,
};
use crate::shapes::{
    builtin_catalog, find_builtin, rasterize_shape, standard_catalog, NamedShape, ShapeSpec,
};

/// Significant digits kept in emitted floats.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const DEFAULT_H: f64 = 1.0 / 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalStudy {
    pub shape: String,
    pub p: f64,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityStudy {
    pub shape: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub catalog: Vec<NamedShape>,
    pub ps: Vec<f64>,
    pub h: f64,
    pub bounds: Vec<BoundId>,
    pub gamma: f64,
    pub alpha: f64,
    pub tolerance: f64,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub nodal: Vec<NodalStudy>,
    pub capacity: Vec<CapacityStudy>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            catalog: standard_catalog(),
            ps: vec![1.5, 2.0, 3.0],
            h: DEFAULT_H,
            bounds: BoundId::ALL.to_vec(),
            gamma: 0.5,
            alpha: 0.5,
            tolerance: DEFAULT_TOLERANCE,
            output_dir: PathBuf::from("pspec-out"),
            formats: vec![Format::Json, Format::Csv],
            nodal: vec![],
            capacity: vec![],
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawShape {
    Builtin(String),
    Named { name: String, spec: ShapeSpec },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBounds {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
struct RawNodal {
    shape: String,
    p: f64,
    #[serde(default = "default_scales")]
    scales: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCapacity {
    shape: String,
    p: f64,
}

fn default_scales() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    catalog: Option<Vec<RawShape>>,
    ps: Option<Vec<f64>>,
    h: Option<f64>,
    bounds: Option<RawBounds>,
    gamma: Option<f64>,
    alpha: Option<f64>,
    tolerance: Option<f64>,
    output_dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
    #[serde(default)]
    nodal: Vec<RawNodal>,
    #[serde(default)]
    capacity: Vec<RawCapacity>,
}

fn builtin(name: &str) -> Result<NamedShape> {
    find_builtin(name).ok_or_else(|| {
        let names: Vec<String> = builtin_catalog().into_iter().map(|s| s.name).collect();
        Error::ConfigParse(format!(
            "unknown shape `{name}` (built-ins: {})",
            names.join(", ")
        ))
    })
}

fn parse_bounds(raw: RawBounds) -> Result<Vec<BoundId>> {
    match raw {
        RawBounds::Keyword(k) if k == "all" => Ok(BoundId::ALL.to_vec()),
        RawBounds::Keyword(k) => Ok(vec![k.parse()?]),
        RawBounds::List(v) => v.iter().map(|s| s.parse()).collect(),
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        let mut c = RunConfig::default();
        if let Some(cat) = raw.catalog {
            c.catalog = cat
                .into_iter()
                .map(|s| match s {
                    RawShape::Builtin(name) => builtin(&name),
                    RawShape::Named { name, spec } => Ok(NamedShape::new(name, spec)),
                })
                .collect::<Result<_>>()?;
        }
        if let Some(ps) = raw.ps {
            c.ps = ps;
        }
        if let Some(b) = raw.bounds {
            c.bounds = parse_bounds(b)?;
        }
        c.h = raw.h.unwrap_or(c.h);
        c.gamma = raw.gamma.unwrap_or(c.gamma);
        c.alpha = raw.alpha.unwrap_or(c.alpha);
        c.tolerance = raw.tolerance.unwrap_or(c.tolerance);
        c.output_dir = raw.output_dir.unwrap_or(c.output_dir);
        c.formats = raw.formats.unwrap_or(c.formats);
        c.nodal = raw
            .nodal
            .into_iter()
            .map(|n| NodalStudy {
                shape: n.shape,
                p: n.p,
                scales: n.scales,
            })
            .collect();
        c.capacity = raw
            .capacity
            .into_iter()
            .map(|s| CapacityStudy {
                shape: s.shape,
                p: s.p,
            })
            .collect();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigParse(m));
        if self.catalog.is_empty() {
            return bad("catalog must be nonempty".into());
        }
        if self.ps.is_empty() {
            return bad("ps must be nonempty".into());
        }
        if let Some(p) = self.ps.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
            return bad(format!("exponent {p} must be finite and greater than 1"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        for (key, v) in [("gamma", self.gamma), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{key} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.tolerance >= 0.0) {
            return bad(format!(
                "tolerance must be nonnegative, got {}",
                self.tolerance
            ));
        }
        if self.formats.is_empty() {
            return bad("formats must be nonempty".into());
        }
        for s in &self.catalog {
            s.spec
                .validate()
                .map_err(|e| Error::ConfigParse(format!("{}: {e}", s.name)))?;
        }
        for name in self
            .nodal
            .iter()
            .map(|s| &s.shape)
            .chain(self.capacity.iter().map(|s| &s.shape))
        {
            builtin(name)?;
        }
        Ok(())
    }

    fn suite_config(&self) -> SuiteConfig {
        let mut params = BTreeMap::new();
        params.insert("alpha".to_string(), self.alpha);
        params.insert("gamma".to_string(), self.gamma);
        params.insert("tolerance".to_string(), self.tolerance);
        SuiteConfig {
            h: self.h,
            ids: self.bounds.clone(),
            params,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodalStudyResult {
    pub shape: String,
    pub p: f64,
    pub fit: ScalingFit,
    pub vanishing_radius: f64,
    pub vanishing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityStudyResult {
    pub shape: String,
    pub p: f64,
    pub gamma: f64,
    pub capacity_radius: RadiusSearchResult,
    pub lieb_radius: RadiusSearchResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyError {
    pub study: String,
    pub shape: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub partial: bool,
    pub all_satisfied: bool,
    pub config: RunConfig,
    pub reports: Vec<BoundReport>,
    pub errors: Vec<crate::bounds::ItemError>,
    pub nodal: Vec<NodalStudyResult>,
    pub capacity: Vec<CapacityStudyResult>,
    pub study_errors: Vec<StudyError>,
}

impl RunReport {
    /// 0 when every non-skipped report holds and nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_satisfied && !self.partial {
            0
        } else {
            1
        }
    }
}

/// Nodal scaling fit plus the vanishing-ball check on the unscaled glued pair.
pub fn nodal_study(shape: &str, p: f64, scales: &[f64], h: f64) -> Result<NodalStudyResult> {
    let spec = builtin(shape)?.spec;
    let fit = nodal_scaling_check(&spec, p, scales, h)?;
    let pair = glued_antisymmetric_eigenpair(&spec, p, h)?;
    let ball = crate::bounds::unit_ball_lambda(p, h)?;
    let r = vanishing_ball_radius(pair.lambda, p, ball, 1.05);
    let vanishing = check_vanishing(&pair.domain, &pair.field, r)?;
    Ok(NodalStudyResult {
        shape: shape.to_string(),
        p,
        fit,
        vanishing_radius: r,
        vanishing,
    })
}

/// Capacity radius of a planar shape and the Lieb radius at `alpha = gamma^(n/(n-p))`.
pub fn capacity_study(shape: &str, p: f64, gamma: f64, h: f64) -> Result<CapacityStudyResult> {
    let d = rasterize_shape(&builtin(shape)?.spec, h)?;
    let n = d.dim();
    let cap = capacity_radius(&d, gamma, p, n)?;
    let nf = n as f64;
    let lieb = lieb_radius(&d, gamma.powf(nf / (nf - p)))?;
    Ok(CapacityStudyResult {
        shape: shape.to_string(),
        p,
        gamma,
        capacity_radius: cap,
        lieb_radius: lieb,
    })
}

/// Evaluates the configured suite and studies without touching the filesystem.
pub fn evaluate(config: &RunConfig) -> Result<(RunReport, SuiteOutcome)> {
    config.validate()?;
    let outcome = run_suite(&config.catalog, &config.ps, &config.suite_config())?;
    let mut study_errors = Vec::new();
    let mut nodal = Vec::new();
    for s in &config.nodal {
        match nodal_study(&s.shape, s.p, &s.scales, config.h) {
            Ok(r) => nodal.push(r),
            Err(e) => study_errors.push(StudyError {
                study: "nodal".into(),
                shape: s.shape.clone(),
                message: e.to_string(),
            }),
        }
    }
    let mut capacity = Vec::new();
    for s in &config.capacity {
        match capacity_study(&s.shape, s.p, config.gamma, config.h) {
            Ok(r) => capacity.push(r),
            Err(e) => study_errors.push(StudyError {
                study: "capacity".into(),
                shape: s.shape.clone(),
                message: e.to_string(),
            }),
        }
    }
    let nodal_ok = nodal.iter().all(|n| n.vanishing);
    let partial = !outcome.errors.is_empty() || !study_errors.is_empty();
    let report = RunReport {
        partial,
        all_satisfied: outcome.all_satisfied() && nodal_ok && study_errors.is_empty(),
        config: config.clone(),
        reports: outcome.reports.clone(),
        errors: outcome.errors.clone(),
        nodal,
        capacity,
        study_errors,
    };
    Ok((report, outcome))
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x).to_string()
    } else {
        String::new()
    }
}

/// Report rows as CSV: `id,domain,p,lhs,rhs,satisfied,slack,skipped,skip_reason`.
pub fn reports_csv(reports: &[BoundReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(crate::bounds::CSV_HEADER.split(','))
        .map_err(|e| Error::Io(e.into()))?;
    for r in reports {
        w.write_record([
            r.id.as_str().to_string(),
            r.domain_label.clone(),
            fmt_num(r.p),
            fmt_num(r.lhs),
            fmt_num(r.rhs),
            r.satisfied.to_string(),
            fmt_num(r.slack),
            r.skipped.to_string(),
            r.skip_reason.clone().unwrap_or_default(),
        ])
        .map_err(|e| Error::Io(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn p_tag(p: f64) -> String {
    round_sig(p).to_string()
}

/// Runs the configured suite and writes every report file into `output_dir`.
pub fn run(config: &RunConfig) -> Result<(RunReport, Vec<PathBuf>)> {
    let (report, outcome) = evaluate(config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if config.formats.contains(&Format::Json) {
        let path = dir.join("report.json");
        fs::write(&path, to_canonical_json(&report)?)?;
        written.push(path);
    }
    if config.formats.contains(&Format::Csv) {
        let path = dir.join("report.csv");
        fs::write(&path, reports_csv(&report.reports)?)?;
        written.push(path);
    }
    for e in &outcome.eigen {
        let path = dir.join(format!("eigen_{}_{}.json", e.domain, p_tag(e.record.p)));
        fs::write(&path, to_canonical_json(&e.record)?)?;
        written.push(path);
    }
    Ok((report, written))
}

/// Built-in shapes with parameters, connectivity and convexity, in a fixed order.
pub fn describe_catalog() -> String {
    let mut out = String::new();
    for s in builtin_catalog() {
        let topo = rasterize_shape(&s.spec, 1.0 / 64.0)
            .and_then(|d| Ok((connectivity(&d)?, is_convex(&d)?)));
        match topo {
            Ok((k, convex)) => out.push_str(&format!(
                "{}: connectivity {k}, {}, {}\n",
                s.name,
                if convex { "convex" } else { "nonconvex" },
                s.spec.describe()
            )),
            Err(e) => out.push_str(&format!("{}: {} ({e})\n", s.name, s.spec.describe())),
        }
    }
    out
}

/// Looks up a built-in shape by name.
pub fn shape_by_name(name: &str) -> Result<NamedShape> {
    builtin(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_bound_is_named() {
        let e =
            RunConfig::from_json_str(r#"{"bounds": ["FABER_KRAHN", "NOT_A_BOUND"]}"#).unwrap_err();
        assert!(
            matches!(&e, Error::ConfigParse(m) if m.contains("NOT_A_BOUND")),
            "{e}"
        );
    }

    #[test]
    fn empty_ps_is_parse_error() {
        let e = RunConfig::from_json_str(r#"{"ps": []}"#).unwrap_err();
        assert!(
            matches!(&e, Error::ConfigParse(m) if m == "ps must be nonempty"),
            "{e}"
        );
    }

    #[test]
    fn config_defaults_and_overrides() {
        let c = RunConfig::from_json_str(
            r#"{"catalog": ["disk", {"name": "big", "spec": {"variant": "disk", "r": 2.0}}],
                "ps": [2.0], "bounds": "all", "formats": ["csv"]}"#,
        )
        .unwrap();
        assert_eq!(c.catalog.len(), 2);
        assert_eq!(c.catalog[1].spec, ShapeSpec::Disk { r: 2.0 });
        assert_eq!(c.bounds.len(), 12);
        assert_eq!(c.formats, vec![Format::Csv]);
        assert_eq!(c.h, DEFAULT_H);
        assert!(RunConfig::from_json_str(r#"{"gamma": 1.5}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"catalog": ["nowhere"]}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"colour": 1}"#).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(19.739208802178716), 19.7392088022);
        assert_eq!(round_sig(0.0), 0.0);
        assert!(round_sig(f64::NAN).is_nan());
        let s = to_canonical_json(&vec![2.0f64.sqrt(), f64::NAN]).unwrap();
        assert!(s.contains("1.41421356237") && s.contains("null"), "{s}");
    }

    #[test]
    fn catalog_listing() {
        let text = describe_catalog();
        assert!(text.lines().count() >= 8);
        for name in ["disk", "square", "annulus", "spiky_disk"] {
            assert!(
                text.lines().any(|l| l.starts_with(&format!("{name}:"))),
                "{name}"
            );
        }
        assert!(text.contains("annulus: connectivity 2"));
        assert_eq!(text, describe_catalog());
    }
}
