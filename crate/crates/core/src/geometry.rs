//! Purely geometric quantities of a raster domain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::contour::{level_contour, total_length, NodalGrid};
use crate::edt::squared_distance;
use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::shapes::{rasterize_shape, ShapeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub reduced_inradius: f64,
    pub circumradius: f64,
    pub connectivity: usize,
    pub convex: bool,
}

pub fn geometry_summary(d: &GridDomain) -> Result<GeometrySummary> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let area = d.volume();
    let inradius = inradius(d);
    Ok(GeometrySummary {
        area,
        perimeter: perimeter(d)?,
        inradius,
        reduced_inradius: reduced_inradius(inradius, area),
        circumradius: circumradius(d)?,
        connectivity: connectivity(d)?,
        convex: is_convex(d)?,
    })
}

/// `rho / (1 + pi rho^2 / |Omega|)`.
pub fn reduced_inradius(inradius: f64, area: f64) -> f64 {
    inradius / (1.0 + PI * inradius * inradius / area)
}

/// Distance (physical units) from every cell center to the nearest false cell center.
pub fn distance_to_complement(d: &GridDomain) -> Vec<f64> {
    let outside: Vec<bool> = d.mask().iter().map(|&m| !m).collect();
    squared_distance(&outside, d.shape())
        .into_iter()
        .map(|s| s.sqrt() * d.h())
        .collect()
}

/// Largest inscribed radius: max distance to the complement minus `h/2`.
pub fn inradius(d: &GridDomain) -> f64 {
    inscribed_ball(d).1
}

/// Center and radius of the largest inscribed ball (first maximizer in index order).
pub fn inscribed_ball(d: &GridDomain) -> ([f64; 3], f64) {
    let dist = distance_to_complement(d);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &v) in dist.iter().enumerate() {
        if d.mask()[i] && v > best.1 {
            best = (i, v);
        }
    }
    (d.center(best.0), best.1 - 0.5 * d.h())
}

/// Length of the level-1/2 marching-squares contour of the mask indicator.
pub fn perimeter(d: &GridDomain) -> Result<f64> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let ind: Vec<f64> = d
        .mask()
        .iter()
        .map(|&m| if m { 1.0 } else { 0.0 })
        .collect();
    let s = d.shape();
    let o = d.origin();
    let segs = level_contour(
        NodalGrid {
            values: &ind,
            nx: s[0],
            ny: s[1],
            h: d.h(),
            origin: [o[0], o[1]],
        },
        0.5,
        None,
    );
    Ok(total_length(&segs))
}

fn circle_from(a: [f64; 2], b: [f64; 2]) -> ([f64; 2], f64) {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    (c, (a[0] - c[0]).hypot(a[1] - c[1]))
}

fn circle_from3(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> ([f64; 2], f64) {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let det = 2.0 * (bx * cy - by * cx);
    if det.abs() < 1e-300 {
        // collinear: widest pair
        let cands = [circle_from(a, b), circle_from(a, c), circle_from(b, c)];
        return cands
            .into_iter()
            .fold(cands[0], |m, x| if x.1 > m.1 { x } else { m });
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / det;
    let uy = (bx * c2 - cx * b2) / det;
    ([a[0] + ux, a[1] + uy], ux.hypot(uy))
}

fn in_circle(c: ([f64; 2], f64), p: [f64; 2]) -> bool {
    (p[0] - c.0[0]).hypot(p[1] - c.0[1]) <= c.1 * (1.0 + 1e-12) + 1e-12
}

/// Minimum enclosing circle (incremental Welzl) of a point set.
pub fn min_enclosing_circle(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    if points.is_empty() {
        return ([0.0, 0.0], 0.0);
    }
    // deterministic shuffle so the expected running time stays linear
    let mut pts = points.to_vec();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for i in (1..pts.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        pts.swap(i, (state % (i as u64 + 1)) as usize);
    }
    let mut c = (pts[0], 0.0);
    for i in 1..pts.len() {
        if in_circle(c, pts[i]) {
            continue;
        }
        c = (pts[i], 0.0);
        for j in 0..i {
            if in_circle(c, pts[j]) {
                continue;
            }
            c = circle_from(pts[i], pts[j]);
            for k in 0..j {
                if !in_circle(c, pts[k]) {
                    c = circle_from3(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    c
}

/// Minimum enclosing circle radius of true cell centers plus `h/2`.
pub fn circumradius(d: &GridDomain) -> Result<f64> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let pts: Vec<[f64; 2]> = d
        .boundary_cells()
        .into_iter()
        .map(|i| {
            let c = d.center(i);
            [c[0], c[1]]
        })
        .collect();
    Ok(min_enclosing_circle(&pts).1 + 0.5 * d.h())
}

/// Connected components of `cells` (true entries); `diagonal` selects 8-connectivity.
pub fn label_components(cells: &[bool], nx: usize, ny: usize, diagonal: bool) -> (Vec<u32>, usize) {
    let mut label = vec![u32::MAX; cells.len()];
    let mut count = 0usize;
    let mut stack = Vec::new();
    for seed in 0..cells.len() {
        if !cells[seed] || label[seed] != u32::MAX {
            continue;
        }
        label[seed] = count as u32;
        stack.push(seed);
        while let Some(c) = stack.pop() {
            let (i, j) = ((c % nx) as i64, (c / nx) as i64);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if (di == 0 && dj == 0) || (!diagonal && di != 0 && dj != 0) {
                        continue;
                    }
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                        continue;
                    }
                    let n = a as usize + nx * b as usize;
                    if cells[n] && label[n] == u32::MAX {
                        label[n] = count as u32;
                        stack.push(n);
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// `1 +` number of holes of a planar cell set: the number of 8-connected
/// components of its complement inside an array whose border is all false.
pub fn planar_connectivity(cells: &[bool], nx: usize, ny: usize) -> usize {
    let complement: Vec<bool> = cells.iter().map(|&c| !c).collect();
    label_components(&complement, nx, ny, true).1
}

pub fn connectivity(d: &GridDomain) -> Result<usize> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let s = d.shape();
    Ok(planar_connectivity(d.mask(), s[0], s[1]))
}

/// Number of 4-connected components of the domain.
pub fn component_count(d: &GridDomain) -> usize {
    let s = d.shape();
    label_components(d.mask(), s[0], s[1], false).1
}

fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// True when every cell of the rasterized convex hull that is missing from
/// the mask touches the mask (one-cell-layer tolerance).
pub fn is_convex(d: &GridDomain) -> Result<bool> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let pts: Vec<[f64; 2]> = d
        .boundary_cells()
        .into_iter()
        .map(|i| {
            let c = d.center(i);
            [c[0], c[1]]
        })
        .collect();
    let hull = convex_hull(pts);
    if hull.len() < 3 {
        return Ok(true);
    }
    let tol = 1e-9 * d.h();
    let inside_hull = |x: f64, y: f64| {
        (0..hull.len()).all(|k| {
            let a = hull[k];
            let b = hull[(k + 1) % hull.len()];
            (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= -tol
        })
    };
    let s = d.shape();
    for idx in 0..d.len() {
        if d.mask()[idx] {
            continue;
        }
        let c = d.center(idx);
        if !inside_hull(c[0], c[1]) {
            continue;
        }
        let (i, j) = ((idx % s[0]) as i64, (idx / s[0]) as i64);
        let touches = (-1i64..=1).any(|dj| {
            (-1i64..=1).any(|di| {
                let (a, b) = (i + di, j + dj);
                a >= 0
                    && b >= 0
                    && (a as usize) < s[0]
                    && (b as usize) < s[1]
                    && d.mask()[a as usize + s[0] * b as usize]
            })
        });
        if !touches {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `|B_r(center) \ Omega|` by counting lattice cells whose centers lie in the closed ball.
pub fn ball_deficiency(d: &GridDomain, center: [f64; 3], r: f64) -> f64 {
    let h = d.h();
    let dim = d.dim();
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for a in 0..dim {
        lo[a] = ((center[a] - r) / h).ceil() as i64;
        hi[a] = ((center[a] + r) / h).floor() as i64;
    }
    let r2 = r * r * (1.0 + 1e-12);
    let mut count = 0usize;
    for k in lo[2]..=hi[2] {
        let dz = if dim == 3 {
            k as f64 * h - center[2]
        } else {
            0.0
        };
        for j in lo[1]..=hi[1] {
            let dy = j as f64 * h - center[1];
            let rem = r2 - dy * dy - dz * dz;
            if rem < 0.0 {
                continue;
            }
            let w = rem.sqrt();
            let i0 = ((center[0] - w) / h).ceil() as i64;
            let i1 = ((center[0] + w) / h).floor() as i64;
            for i in i0..=i1 {
                if !d.contains_lattice([i, j, k]) {
                    count += 1;
                }
            }
        }
    }
    count as f64 * d.cell_volume()
}

/// Volume of the unit ball in dimension `n` (2 or 3).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => {
            let nf = n as f64;
            PI.powf(nf / 2.0) / gamma_half_int(n + 2)
        }
    }
}

/// Gamma(k/2) for positive integer k.
fn gamma_half_int(k: usize) -> f64 {
    match k {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half_int(k - 2),
    }
}

/// Surface area of the unit sphere `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Equal-area disk at the same spacing, centered at the origin.
pub fn schwarz_symmetrize(d: &GridDomain) -> Result<GridDomain> {
    if d.dim() != 2 {
        return Err(Error::DimensionUnsupported(d.dim()));
    }
    let r = (d.volume() / PI).sqrt();
    rasterize_shape(&ShapeSpec::Disk { r }, d.h())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{builtin_catalog, rasterize_shape, Hole, ShapeSpec};

    const H: f64 = 1.0 / 128.0;

    fn raster(s: ShapeSpec) -> GridDomain {
        rasterize_shape(&s, H).unwrap()
    }

    #[test]
    fn disk_summary() {
        let g = geometry_summary(&raster(ShapeSpec::Disk { r: 1.0 })).unwrap();
        assert!((g.inradius - 1.0).abs() <= 2.0 * H);
        assert!((g.reduced_inradius - 0.5).abs() <= 2.0 * H);
        assert!((g.circumradius - 1.0).abs() <= 2.0 * H);
        assert_eq!(g.connectivity, 1);
        assert!(g.convex);
    }

    #[test]
    fn square_summary() {
        let g = geometry_summary(&raster(ShapeSpec::Square { a: 1.0 })).unwrap();
        assert!((g.inradius - 0.5).abs() <= 2.0 * H);
        // 0.5 / (1 + pi/4)
        assert!((g.reduced_inradius - 0.2800).abs() <= 0.01);
        assert!((g.circumradius - 0.5 * 2f64.sqrt()).abs() <= 2.0 * H);
        assert!(g.convex);
        assert_eq!(g.connectivity, 1);
    }

    #[test]
    fn annulus_summary() {
        let g = geometry_summary(&raster(ShapeSpec::Annulus {
            r_in: 0.5,
            r_out: 1.0,
        }))
        .unwrap();
        assert!((g.inradius - 0.25).abs() <= 2.0 * H);
        assert_eq!(g.connectivity, 2);
        assert!(!g.convex);
    }

    #[test]
    fn holes_and_notches() {
        let two = raster(ShapeSpec::DiskWithHoles {
            r: 1.0,
            holes: vec![
                Hole {
                    center: [-0.45, 0.0],
                    r: 0.2,
                },
                Hole {
                    center: [0.45, 0.0],
                    r: 0.2,
                },
            ],
        });
        assert_eq!(connectivity(&two).unwrap(), 3);
        let ell = raster(ShapeSpec::EllShape { a: 1.0, notch: 0.5 });
        assert!(!is_convex(&ell).unwrap());
        assert_eq!(connectivity(&ell).unwrap(), 1);
    }

    #[test]
    fn reduced_inradius_bracket_on_catalog() {
        for s in builtin_catalog() {
            let g = geometry_summary(&rasterize_shape(&s.spec, 1.0 / 64.0).unwrap()).unwrap();
            assert!(g.inradius / 2.0 < g.reduced_inradius, "{}", s.name);
            assert!(g.reduced_inradius < g.inradius, "{}", s.name);
            assert!(g.inradius <= g.circumradius, "{}", s.name);
            assert!(PI * g.inradius.powi(2) <= g.area, "{}", s.name);
            assert!(g.area <= PI * g.circumradius.powi(2), "{}", s.name);
        }
    }

    #[test]
    fn isoperimetric_sanity_on_catalog() {
        for s in builtin_catalog() {
            let g = geometry_summary(&rasterize_shape(&s.spec, 1.0 / 64.0).unwrap()).unwrap();
            assert!(
                g.perimeter.powi(2) >= 0.95 * 4.0 * PI * g.area,
                "{}",
                s.name
            );
        }
    }

    #[test]
    fn resolution_stability() {
        // the spike width must span several cells before the raster settles
        let h = 1.0 / 128.0;
        for s in builtin_catalog() {
            let a = geometry_summary(&rasterize_shape(&s.spec, h).unwrap()).unwrap();
            let b = geometry_summary(&rasterize_shape(&s.spec, h / 2.0).unwrap()).unwrap();
            for (name, x, y) in [
                ("area", a.area, b.area),
                ("perimeter", a.perimeter, b.perimeter),
                ("inradius", a.inradius, b.inradius),
                ("circumradius", a.circumradius, b.circumradius),
            ] {
                assert!((x - y).abs() < 3.0 * h, "{} {name}: {x} vs {y}", s.name);
            }
        }
    }

    #[test]
    fn deficiency_examples() {
        let d = raster(ShapeSpec::Disk { r: 1.0 });
        assert!(ball_deficiency(&d, [0.0; 3], 0.5) == 0.0);
        let v = ball_deficiency(&d, [0.0; 3], 2.0);
        assert!((v - 3.0 * PI).abs() / (3.0 * PI) < 0.02, "{v}");
        let far = ball_deficiency(&d, [10.0, 0.0, 0.0], 1.0);
        assert!((far - PI).abs() / PI < 0.02);
    }

    #[test]
    fn schwarz_examples() {
        let fine = rasterize_shape(&ShapeSpec::Square { a: 1.0 }, H / 2.0).unwrap();
        let sq = schwarz_symmetrize(&fine).unwrap();
        assert!((sq.volume() - 1.0).abs() < 0.01);
        assert!((inradius(&sq) - 1.0 / PI.sqrt()).abs() < 2.0 * H);
        let ann = schwarz_symmetrize(&raster(ShapeSpec::Annulus {
            r_in: 0.5,
            r_out: 1.0,
        }))
        .unwrap();
        assert!((inradius(&ann) - 0.75f64.sqrt()).abs() < 2.0 * H);
        let disk = raster(ShapeSpec::Disk { r: 1.0 });
        let again = schwarz_symmetrize(&disk).unwrap();
        assert!((again.volume() - disk.volume()).abs() / disk.volume() < 0.005);
    }

    #[test]
    fn monotone_under_inclusion() {
        let small = raster(ShapeSpec::Disk { r: 0.5 });
        let big = raster(ShapeSpec::Square { a: 1.2 });
        assert!(small.is_subset_of(&big));
        assert!(inradius(&small) <= inradius(&big));
        assert!(small.volume() <= big.volume());
    }

    #[test]
    fn summary_rejects_3d() {
        let b = GridDomain::ball(3, 1.0, 0.25).unwrap();
        assert!(matches!(
            geometry_summary(&b),
            Err(Error::DimensionUnsupported(3))
        ));
    }

    #[test]
    fn unit_ball_constants() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
    }
}
