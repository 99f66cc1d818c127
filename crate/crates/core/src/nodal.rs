//! Sign-changing eigenfields on symmetric domains and their nodal sets.
//!
//! On a domain symmetric under `x_a -> -x_a` the ground state of the half
//! `{x_a > 0}`, extended by odd reflection, is an eigenfield of the whole
//! domain whose nodal set is the axis segment.

use serde::{Deserialize, Serialize};

use crate::contour::{level_contour, total_length, NodalGrid, Segment};
use crate::edt::squared_distance;
use crate::eigen::{rayleigh_quotient, solve_first_eigen, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::distance_to_complement;
use crate::grid::{GridDomain, ScalarField};
use crate::shapes::{rasterize_shape, ShapeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalMeasurement {
    pub length: f64,
    pub lambda: f64,
    pub p: f64,
    pub contour_segments: usize,
}

#[derive(Debug, Clone)]
pub struct GluedPair {
    /// Principal frequency of the half domain.
    pub lambda: f64,
    pub p: f64,
    pub domain: GridDomain,
    pub field: ScalarField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub scale: f64,
    pub lambda: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Least-squares slope of `ln(length)` against `ln(lambda)`.
    pub slope: f64,
    pub points: Vec<ScalingPoint>,
}

/// `(safety * lambda_ball1 / lambda)^(1/p)`.
pub fn vanishing_ball_radius(lambda: f64, p: f64, lambda_ball1: f64, safety: f64) -> f64 {
    (safety * lambda_ball1 / lambda).powf(1.0 / p)
}

/// Cells where `u` vanishes: `|u| < 1e-9 max|u|`, or a sign change across an edge.
fn zero_cells(d: &GridDomain, u: &ScalarField) -> Vec<bool> {
    let tiny = 1e-9 * u.max_abs();
    let v = &u.values;
    let m = d.mask();
    let mut zero: Vec<bool> = (0..d.len()).map(|c| m[c] && v[c].abs() < tiny).collect();
    let s = d.strides();
    let shape = d.shape();
    for c in (0..d.len()).filter(|&c| m[c]) {
        let co = d.coords(c);
        for a in 0..d.dim() {
            if co[a] + 1 < shape[a] {
                let n = c + s[a];
                if m[n] && v[c] * v[n] < 0.0 {
                    zero[c] = true;
                    zero[n] = true;
                }
            }
        }
    }
    zero
}

/// Whether every lattice-centered ball of radius `r` inside the domain meets
/// a zero of `u`.
pub fn check_vanishing(d: &GridDomain, u: &ScalarField, r: f64) -> Result<bool> {
    if u.values.len() != d.len() {
        return Err(Error::InvalidDomain("field does not match the grid".into()));
    }
    if !(r > 2.0 * d.h()) {
        return Err(Error::DomainError(format!(
            "ball radius {r} must exceed 2h = {}",
            2.0 * d.h()
        )));
    }
    let h = d.h();
    let room = distance_to_complement(d);
    let zeros = squared_distance(&zero_cells(d, u), d.shape());
    let mut admissible = false;
    for c in (0..d.len()).filter(|&c| d.mask()[c]) {
        if room[c] - 0.5 * h >= r {
            admissible = true;
            if zeros[c].sqrt() * h > r {
                return Ok(false);
            }
        }
    }
    if !admissible {
        return Err(Error::NoInteriorBall(r));
    }
    Ok(true)
}

/// Solves the half domain with a Dirichlet condition on the symmetry axis
/// and extends the ground state by odd reflection.
pub fn glued_antisymmetric_eigenpair(spec: &ShapeSpec, p: f64, h: f64) -> Result<GluedPair> {
    glued_with(spec, p, h, &SolveOptions::default())
}

pub fn glued_with(spec: &ShapeSpec, p: f64, h: f64, opts: &SolveOptions) -> Result<GluedPair> {
    let axis = spec.symmetry_axis().ok_or(Error::NotSymmetric)?;
    let d = rasterize_shape(spec, h)?;
    let o = d.lattice_origin();
    let abs = |c: usize| o[axis] + d.coords(c)[axis] as i64;
    let half_mask: Vec<bool> = (0..d.len()).map(|c| d.mask()[c] && abs(c) > 0).collect();
    let half = d.with_mask(half_mask)?;
    let eig = solve_first_eigen(&half, p, opts)?;
    let s = d.strides();
    let mut values = eig.field.values.clone();
    for c in (0..d.len()).filter(|&c| d.mask()[c] && abs(c) < 0) {
        let k = d.coords(c)[axis] as i64;
        let mirror = -2 * o[axis] - k;
        if mirror < 0 || mirror >= d.shape()[axis] as i64 {
            return Err(Error::NotSymmetric);
        }
        let m = (c as i64 + (mirror - k) * s[axis] as i64) as usize;
        if !d.mask()[m] {
            return Err(Error::NotSymmetric);
        }
        values[c] = -eig.field.values[m];
    }
    let field = ScalarField::from_values(&d, values)?;
    Ok(GluedPair {
        lambda: eig.lambda,
        p,
        domain: d,
        field,
    })
}

fn zero_contour(d: &GridDomain, u: &ScalarField) -> Result<Vec<Segment>> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let [nx, ny, _] = d.shape();
    let o = d.origin();
    let grid = NodalGrid {
        values: &u.values,
        nx,
        ny,
        h: d.h(),
        origin: [o[0], o[1]],
    };
    Ok(level_contour(grid, 0.0, Some(d.mask())))
}

/// Zero-level contour length of a sign-changing field inside the domain.
pub fn nodal_length(d: &GridDomain, u: &ScalarField, p: f64) -> Result<NodalMeasurement> {
    let m = d.mask();
    let pos = u.values.iter().zip(m).any(|(&v, &b)| b && v > 0.0);
    let neg = u.values.iter().zip(m).any(|(&v, &b)| b && v < 0.0);
    if !(pos && neg) {
        return Err(Error::NoSignChange);
    }
    let segments = zero_contour(d, u)?;
    Ok(NodalMeasurement {
        length: total_length(&segments),
        lambda: rayleigh_quotient(d, u, p)?,
        p,
        contour_segments: segments.len(),
    })
}

/// Zero contour as polyline CSV rows `x,y,segment_id`.
pub fn nodal_polyline_csv(d: &GridDomain, u: &ScalarField) -> Result<String> {
    let mut out = String::from("x,y,segment_id\n");
    for (k, s) in zero_contour(d, u)?.iter().enumerate() {
        for pt in s {
            out.push_str(&format!("{},{},{}\n", pt[0], pt[1], k));
        }
    }
    Ok(out)
}

/// Glued pairs on `t * Omega` at fixed spacing `h`; slope of `ln(length)`
/// against `ln(lambda)`.
pub fn nodal_scaling_check(spec: &ShapeSpec, p: f64, scales: &[f64], h: f64) -> Result<ScalingFit> {
    if scales.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "at least 3 scales are required, got {}",
            scales.len()
        )));
    }
    if scales.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidConfig("scales must be positive".into()));
    }
    let mut points = Vec::with_capacity(scales.len());
    for &t in scales {
        let pair = glued_antisymmetric_eigenpair(&spec.scaled(t), p, h)?;
        let m = nodal_length(&pair.domain, &pair.field, p)?;
        points.push(ScalingPoint {
            scale: t,
            lambda: pair.lambda,
            length: m.length,
        });
    }
    let xs: Vec<f64> = points.iter().map(|q| q.lambda.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|q| q.length.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ScalingFit {
        slope: sxy / sxx,
        points,
    })
}
