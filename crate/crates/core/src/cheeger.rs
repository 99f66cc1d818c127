//! Cheeger constants estimated from superlevel sets of a computed field.
//!
//! For a nonnegative field `u` the sets `D_t = {u^p > t}` are candidate
//! subdomains; the smallest ratio `|dD_t| / |D_t|` over a quantile grid of
//! levels is an upper bound on the Cheeger constant of the domain.

use serde::{Deserialize, Serialize};

use crate::contour::{level_contour, superlevel_area, total_length, NodalGrid};
use crate::eigen::{solve_first_eigen, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::planar_connectivity;
use crate::grid::{GridDomain, ScalarField};

pub const DEFAULT_PROBE_EXPONENT: f64 = 1.2;
pub const DEFAULT_LEVELS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerEstimate {
    pub h: f64,
    pub best_level: f64,
    pub cut_perimeter: f64,
    pub cut_area: f64,
    pub connectivity_of_cut: usize,
}

/// Best ratio over `levels` quantiles of the positive values of `u`.
///
/// Superlevel sets of `u^p` are those of `u`, and so are its quantile levels;
/// `best_level` is reported in units of `u`.
pub fn level_set_sweep(d: &GridDomain, u: &ScalarField, levels: usize) -> Result<CheegerEstimate> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    if levels < 16 {
        return Err(Error::InvalidConfig(format!(
            "at least 16 levels are required, got {levels}"
        )));
    }
    if u.values.len() != d.len() {
        return Err(Error::InvalidDomain("field does not match the grid".into()));
    }
    let g: Vec<f64> = u
        .values
        .iter()
        .zip(d.mask())
        .map(|(&v, &m)| if m && v > 0.0 { v } else { 0.0 })
        .collect();
    let mut positive: Vec<f64> = g.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::ZeroTrialFunction);
    }
    positive.sort_by(f64::total_cmp);
    // closed superlevel sets {u >= q} at each quantile q
    let mut ts: Vec<f64> = (0..levels)
        .map(|k| positive[k * positive.len() / levels] * (1.0 - 1e-12))
        .collect();
    ts.dedup();

    let [nx, ny, _] = d.shape();
    let o = d.origin();
    let grid = NodalGrid {
        values: &g,
        nx,
        ny,
        h: d.h(),
        origin: [o[0], o[1]],
    };
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &t in &ts {
        let area = superlevel_area(grid, t);
        if area <= 0.0 {
            continue;
        }
        let perimeter = total_length(&level_contour(grid, t, None));
        let ratio = perimeter / area;
        if best.map_or(true, |b| ratio < b.0) {
            best = Some((ratio, t, perimeter, area));
        }
    }
    let (h, best_level, cut_perimeter, cut_area) = best.ok_or(Error::EmptySuperlevel)?;
    let cut: Vec<bool> = g.iter().map(|&v| v > best_level).collect();
    Ok(CheegerEstimate {
        h,
        best_level,
        cut_perimeter,
        cut_area,
        connectivity_of_cut: planar_connectivity(&cut, nx, ny),
    })
}

/// Sweeps the ground state at `p_probe`; an upper bound on the true constant.
pub fn cheeger_constant(d: &GridDomain, p_probe: f64) -> Result<CheegerEstimate> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let eig = solve_first_eigen(
        d,
        p_probe,
        &SolveOptions {
            tol: 1e-6,
            ..SolveOptions::default()
        },
    )?;
    level_set_sweep(d, &eig.field, DEFAULT_LEVELS)
}

/// `(h / p)^p`.
pub fn cheeger_lambda_bound(h: f64, p: f64) -> f64 {
    (h / p).powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert!((cheeger_lambda_bound(2.0, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(cheeger_lambda_bound(3.3, 1.0), 3.3);
        assert!((cheeger_lambda_bound(3.7735, 2.0) - 3.5598).abs() < 1e-3);
    }

    #[test]
    fn too_few_levels() {
        let d = GridDomain::ball(2, 1.0, 0.1).unwrap();
        let u = ScalarField::from_fn(&d, |_| 1.0);
        assert!(matches!(
            level_set_sweep(&d, &u, 8),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_field_rejected() {
        let d = GridDomain::ball(2, 1.0, 0.1).unwrap();
        let u = ScalarField::zeros(&d);
        assert!(level_set_sweep(&d, &u, 32).is_err());
    }

    #[test]
    fn cone_field_on_disk() {
        let d = GridDomain::ball(2, 1.0, 1.0 / 128.0).unwrap();
        let u = ScalarField::from_fn(&d, |x| 1.0 - x[0].hypot(x[1]));
        let e = level_set_sweep(&d, &u, 128).unwrap();
        assert!(e.h >= 2.0 && e.h < 2.06, "{e:?}");
        assert_eq!(e.connectivity_of_cut, 1);
        assert!((e.h - e.cut_perimeter / e.cut_area).abs() < 1e-12);
    }
}
