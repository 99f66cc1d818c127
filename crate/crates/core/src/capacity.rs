//! Variational p-capacity of raster sets and the capacity and Lieb radii.
//!
//! The capacity of `F` is the minimum of the discrete p-Dirichlet energy over
//! fields equal to 1 on `F`, computed in a cube of side `box_factor * diam(F)`
//! centred on `F`. Outside the cube the minimizer is replaced by the radial
//! p-harmonic decay `u ~ |x|^(-(n-p)/(p-1))`, whose exterior energy is a
//! boundary term on the cube faces. A plain zero-Dirichlet cube is available
//! as [`FarField::Dirichlet`]; it overestimates the whole-space capacity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::Energy;
use crate::error::{Error, Result};
use crate::geometry::{inscribed_ball, unit_ball_volume, unit_sphere_area};
use crate::grid::GridDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarField {
    Radial,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub box_factor: f64,
    pub far_field: FarField,
    /// Relative energy change below which the minimization stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            box_factor: 8.0,
            far_field: FarField::Radial,
            tol: 1e-7,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub p: f64,
    pub n: usize,
    pub box_factor: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    CapacityGamma,
    LiebAlpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSearchResult {
    pub radius: f64,
    pub center: Vec<f64>,
    pub kind: RadiusKind,
    pub parameter: f64,
}

/// One capacity probe of a radius search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub center_x: f64,
    pub center_y: f64,
    pub r: f64,
    pub cap: f64,
    pub negligible: bool,
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `r^(n-p) omega_n (|n-p|/(p-1))^(p-1)`, `omega_n` the unit-sphere area.
pub fn ball_capacity_exact(r: f64, n: usize, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == n as f64 {
        return Err(Error::ConformalCase(n));
    }
    let nf = n as f64;
    Ok(r.powf(nf - p) * unit_sphere_area(n) * ((nf - p).abs() / (p - 1.0)).powf(p - 1.0))
}

/// `omega_n^(p/n) n^((n-p)/n) ((n-p)/(p-1))^(p-1) |F|^((n-p)/n)`; equality on balls.
pub fn isocapacity_lower_bound(volume: f64, n: usize, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let nf = n as f64;
    if p >= nf {
        return Err(Error::ExponentOutOfRange { p, n });
    }
    if volume < 0.0 {
        return Err(Error::DomainError(format!("negative volume {volume}")));
    }
    let q = (nf - p) / nf;
    Ok(unit_sphere_area(n).powf(p / nf)
        * nf.powf(q)
        * ((nf - p) / (p - 1.0)).powf(p - 1.0)
        * volume.powf(q))
}

/// `F_cap <= gamma * cap_p(B_r)`.
pub fn is_negligible(f_cap: f64, r: f64, n: usize, p: f64, gamma: f64) -> Result<bool> {
    Ok(f_cap <= gamma * ball_capacity_exact(r, n, p)?)
}

/// `lambda(B_1) |B_1|^(-p/n) (alpha^(-1/n) - 1)^p`.
pub fn lieb_sigma(n: usize, p: f64, alpha: f64, lambda_ball1: f64) -> f64 {
    let nf = n as f64;
    lambda_ball1 * unit_ball_volume(n).powf(-p / nf) * (alpha.powf(-1.0 / nf) - 1.0).powf(p)
}

/// `n ln n + n ln ln n + 5n`.
pub fn covering_multiplicity_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::DomainError(format!(
            "covering bound needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(nf * nf.ln() + nf * nf.ln().ln() + 5.0 * nf)
}

/// Capacity with the default radial closure at the given box factor.
pub fn p_capacity(f: &GridDomain, p: f64, box_factor: f64) -> Result<CapacityResult> {
    p_capacity_with(
        f,
        p,
        &CapacityOptions {
            box_factor,
            ..CapacityOptions::default()
        },
    )
}

pub fn p_capacity_with(f: &GridDomain, p: f64, opts: &CapacityOptions) -> Result<CapacityResult> {
    minimize_capacity(f, p, opts, None)
}

/// With `stop_below`, returns as soon as the energy, an upper bound on the
/// discrete minimum, drops to that value.
fn minimize_capacity(
    f: &GridDomain,
    p: f64,
    opts: &CapacityOptions,
    stop_below: Option<f64>,
) -> Result<CapacityResult> {
    check_exponent(p)?;
    if f.cell_count() == 0 {
        return Err(Error::EmptySet);
    }
    if !(opts.box_factor >= 4.0) {
        return Err(Error::InvalidConfig(format!(
            "box_factor must be >= 4, got {}",
            opts.box_factor
        )));
    }
    let n = f.dim();
    let nf = n as f64;
    if opts.far_field == FarField::Radial && p >= nf {
        return Err(Error::ExponentOutOfRange { p, n });
    }
    let h = f.h();
    let fo = f.lattice_origin();

    // lattice bounding box and centre of F
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for c in (0..f.len()).filter(|&c| f.mask()[c]) {
        let co = f.coords(c);
        for a in 0..3 {
            let v = fo[a] + co[a] as i64;
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let mut center = [0.0; 3];
    for a in 0..n {
        center[a] = 0.5 * (lo[a] + hi[a]) as f64 * h;
    }
    let diam = f.diameter().max(h);
    let half = (0.5 * opts.box_factor * diam / h).ceil() as i64;

    let mut start = [0i64; 3];
    let mut shape = [1usize; 3];
    for a in 0..n {
        let mid = (lo[a] + hi[a]).div_euclid(2);
        start[a] = (mid - half - 1).min(lo[a] - 2);
        shape[a] = ((mid + half + 1).max(hi[a] + 2) - start[a] + 1) as usize;
    }
    let origin = [
        start[0] as f64 * h,
        start[1] as f64 * h,
        start[2] as f64 * h,
    ];
    let len: usize = shape.iter().product();
    let strides = [1, shape[0], shape[0] * shape[1]];
    let mut in_f = vec![false; len];
    for c in (0..f.len()).filter(|&c| f.mask()[c]) {
        let co = f.coords(c);
        let mut idx = 0;
        for a in 0..3 {
            idx += (fo[a] + co[a] as i64 - start[a]) as usize * strides[a];
        }
        in_f[idx] = true;
    }
    let coords = |c: usize| {
        [
            c % shape[0],
            (c / shape[0]) % shape[1],
            c / (shape[0] * shape[1]),
        ]
    };
    let on_border = |co: [usize; 3]| (0..n).any(|a| co[a] == 0 || co[a] + 1 == shape[a]);
    let unknown: Vec<bool> = (0..len)
        .map(|c| !in_f[c] && !on_border(coords(c)))
        .collect();
    let bx = GridDomain::new(unknown, shape, n, h, origin)?;

    let beta = (nf - p) / (p - 1.0);
    let position = |c: usize| {
        let co = coords(c);
        let mut x = [0.0; 3];
        for a in 0..n {
            x[a] = origin[a] + co[a] as f64 * h - center[a];
        }
        x
    };
    // initial field: radial decay from the circumscribed radius of F
    let r_f = (0..len)
        .filter(|&c| in_f[c])
        .map(|c| norm(position(c)))
        .fold(0.0f64, f64::max)
        .max(0.5 * h);
    let mut u: Vec<f64> = (0..len)
        .map(|c| {
            if in_f[c] {
                1.0
            } else if bx.mask()[c] {
                let r = norm(position(c)).max(r_f);
                if beta > 0.0 {
                    (r_f / r).powf(beta)
                } else {
                    1.0 - r / (0.5 * opts.box_factor * diam + h)
                }
            } else {
                0.0
            }
        })
        .collect();

    // exterior energy coefficients on the outermost unknown layer
    let mut closure: Vec<(usize, f64)> = Vec::new();
    let energy = match opts.far_field {
        FarField::Dirichlet => Energy::new(&bx),
        FarField::Radial => {
            let kappa = beta.powf(p - 1.0);
            let area = h.powi(n as i32 - 1);
            for c in (0..len).filter(|&c| bx.mask()[c]) {
                let co = coords(c);
                let x = position(c);
                let mut coef = 0.0;
                for a in 0..n {
                    for (side, sign) in [(1usize, -1.0), (shape[a] - 2, 1.0)] {
                        if co[a] == side {
                            let mut xf = x;
                            xf[a] += sign * 0.5 * h;
                            let r = norm(xf);
                            coef += kappa * r.powf(1.0 - p) * (sign * xf[a] / r) * area;
                        }
                    }
                }
                if coef > 0.0 {
                    closure.push((c, coef));
                }
            }
            Energy::open(&bx)
        }
    };
    let closure_value =
        |v: &[f64]| -> f64 { closure.iter().map(|&(c, k)| k * v[c].abs().powf(p)).sum() };
    let eps = if p < 2.0 { 1e-8 * diam / h } else { 0.0 };
    let total = |v: &[f64], e: f64| energy.value(v, p, e) + closure_value(v);

    let mut value = total(&u, 0.0);
    let mut residual = f64::INFINITY;
    let mut trial = vec![0.0; len];
    for it in 1..=opts.max_iter {
        let ev = energy.evaluate(&u, p, eps);
        let current = ev.energy + closure_value(&u);
        let mut g = ev.gradient;
        for &(c, k) in &closure {
            g[c] += p * k * u[c].abs().powf(p - 1.0) * u[c].signum();
        }
        let gmax = ev.grad_sq.iter().fold(0.0f64, |m, &q| m.max(q)).sqrt();
        let mut op = energy.preconditioner(&ev.grad_sq, p, eps.max(1e-3 * gmax));
        for &(c, k) in &closure {
            let uc = u[c].abs().max(1e-3);
            op.add_diag(c, p * (p - 1.0).max(0.5) * k * uc.powf(p - 2.0));
        }
        let mut dir = vec![0.0; len];
        op.solve_pcg(&g, &mut dir, 1e-3, 5_000);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            for c in 0..len {
                trial[c] = u[c] - step * dir[c];
            }
            let t = total(&trial, eps);
            if t < current {
                accepted = Some(t);
                break;
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            return Ok(CapacityResult {
                value,
                p,
                n,
                box_factor: opts.box_factor,
                iterations: it,
                residual: 0.0,
            });
        }
        std::mem::swap(&mut u, &mut trial);
        let new_value = total(&u, 0.0);
        residual = ((value - new_value) / new_value).abs();
        value = new_value;
        if residual < opts.tol || stop_below.is_some_and(|b| value <= b) {
            return Ok(CapacityResult {
                value,
                p,
                n,
                box_factor: opts.box_factor,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
        last: None,
    })
}

fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Lattice centers at stride `2h` covering the bounding box of the domain's cells.
fn candidate_centers(d: &GridDomain) -> Vec<[i64; 3]> {
    let o = d.lattice_origin();
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for c in (0..d.len()).filter(|&c| d.mask()[c]) {
        let co = d.coords(c);
        for a in 0..3 {
            lo[a] = lo[a].min(o[a] + co[a] as i64);
            hi[a] = hi[a].max(o[a] + co[a] as i64);
        }
    }
    let mut out = Vec::new();
    let mut k = lo[2];
    while k <= hi[2] {
        let mut j = lo[1];
        while j <= hi[1] {
            let mut i = lo[0];
            while i <= hi[0] {
                out.push([i, j, k]);
                i += 2;
            }
            j += 2;
        }
        k += 2;
    }
    out
}

/// Counts lattice points of closed balls inside and outside a domain using
/// per-row prefix sums of the mask.
struct BallCounter<'a> {
    d: &'a GridDomain,
    prefix: Vec<u32>,
}

impl<'a> BallCounter<'a> {
    fn new(d: &'a GridDomain) -> Self {
        let nx = d.shape()[0];
        let rows = d.len() / nx;
        let mut prefix = vec![0u32; rows * (nx + 1)];
        for r in 0..rows {
            for i in 0..nx {
                prefix[r * (nx + 1) + i + 1] =
                    prefix[r * (nx + 1) + i] + d.mask()[r * nx + i] as u32;
            }
        }
        BallCounter { d, prefix }
    }

    /// `(points in the ball, points in the ball but not in the domain)`.
    fn count(&self, center: [i64; 3], r: f64) -> (usize, usize) {
        let d = self.d;
        let h = d.h();
        let o = d.lattice_origin();
        let s = d.shape();
        let rr = r / h;
        let r2 = rr * rr * (1.0 + 1e-12);
        let m = rr.floor() as i64;
        let kr = if d.dim() == 3 { m } else { 0 };
        let (mut total, mut outside) = (0usize, 0usize);
        for dk in -kr..=kr {
            for dj in -m..=m {
                let rem = r2 - (dj * dj + dk * dk) as f64;
                if rem < 0.0 {
                    continue;
                }
                let w = rem.sqrt().floor() as i64;
                let row_len = (2 * w + 1) as usize;
                total += row_len;
                let (j, k) = (center[1] + dj - o[1], center[2] + dk - o[2]);
                if j < 0 || k < 0 || j >= s[1] as i64 || k >= s[2] as i64 {
                    outside += row_len;
                    continue;
                }
                let i0 = (center[0] - w - o[0]).clamp(0, s[0] as i64) as usize;
                let i1 = (center[0] + w + 1 - o[0]).clamp(0, s[0] as i64) as usize;
                let row = (j as usize + s[1] * k as usize) * (s[0] + 1);
                let inside = (self.prefix[row + i1] - self.prefix[row + i0]) as usize;
                outside += row_len - inside;
            }
        }
        (total, outside)
    }
}

fn lattice_point(d: &GridDomain, x: [f64; 3]) -> [i64; 3] {
    let h = d.h();
    [
        (x[0] / h).round() as i64,
        (x[1] / h).round() as i64,
        (x[2] / h).round() as i64,
    ]
}

fn physical(d: &GridDomain, c: [i64; 3]) -> Vec<f64> {
    (0..d.dim()).map(|a| c[a] as f64 * d.h()).collect()
}

/// Largest `r` such that some closed ball `B_r` has `|B_r \ Omega| <= alpha |B_r|`.
pub fn lieb_radius(d: &GridDomain, alpha: f64) -> Result<RadiusSearchResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let h = d.h();
    let counter = BallCounter::new(d);
    let centers = candidate_centers(d);
    let (c0, rho) = inscribed_ball(d);
    let fits = |r: f64| -> Option<[i64; 3]> {
        centers.par_iter().copied().find_first(|&c| {
            let (total, outside) = counter.count(c, r);
            outside as f64 <= alpha * total as f64
        })
    };
    let n = d.dim() as f64;
    let mut lo = rho.max(0.0);
    let mut best = lattice_point(d, c0);
    if let Some(c) = fits(lo) {
        best = c;
    }
    let mut hi = (d.volume() / ((1.0 - alpha) * unit_ball_volume(d.dim()))).powf(1.0 / n) + 2.0 * h;
    while fits(hi).is_some() {
        lo = hi;
        hi *= 1.5;
    }
    while hi - lo > 0.5 * h {
        let mid = 0.5 * (lo + hi);
        match fits(mid) {
            Some(c) => {
                lo = mid;
                best = c;
            }
            None => hi = mid,
        }
    }
    Ok(RadiusSearchResult {
        radius: lo,
        center: physical(d, best),
        kind: RadiusKind::LiebAlpha,
        parameter: alpha,
    })
}

/// `B_r(center) \ Omega` as a raster set at the domain's spacing, if nonempty.
fn ball_complement(d: &GridDomain, center: [i64; 3], r: f64) -> Option<GridDomain> {
    let h = d.h();
    let dim = d.dim();
    let m = (r / h).floor() as i64;
    let r2 = (r / h).powi(2) * (1.0 + 1e-12);
    let mut shape = [1usize; 3];
    let mut start = [0i64; 3];
    for a in 0..dim {
        start[a] = center[a] - m - 1;
        shape[a] = (2 * m + 3) as usize;
    }
    let len: usize = shape.iter().product();
    let mut mask = vec![false; len];
    let mut any = false;
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let p = [
                    start[0] + i as i64,
                    start[1] + j as i64,
                    start[2] + k as i64,
                ];
                let mut q = 0i64;
                for a in 0..dim {
                    q += (p[a] - center[a]).pow(2);
                }
                if (q as f64) <= r2 && !d.contains_lattice(p) {
                    mask[i + shape[0] * (j + shape[1] * k)] = true;
                    any = true;
                }
            }
        }
    }
    if !any {
        return None;
    }
    let origin = [
        start[0] as f64 * h,
        start[1] as f64 * h,
        start[2] as f64 * h,
    ];
    GridDomain::new(mask, shape, dim, h, origin).ok()
}

/// Box factor used by the capacity probes of [`capacity_radius`].
pub const PROBE_BOX_FACTOR: f64 = 4.0;

/// Assumed lower ratio of the discrete capacity to the isocapacitary bound,
/// used only to skip probes that cannot be negligible.
pub const PRUNE_CAPACITY_FACTOR: f64 = 0.9;

/// Interior capacity radius: the largest `r` such that `B_r \ Omega` is
/// `(p, gamma)`-negligible for some center, with the probe trace.
///
/// Centers are visited in increasing order of `|B_r \ Omega|`. A center is
/// skipped without a capacity solve when `PRUNE_CAPACITY_FACTOR` times the
/// isocapacitary bound of the outside volume already exceeds `gamma cap(B_r)`.
/// Probes stop early once their energy falls below the threshold.
pub fn capacity_radius_traced(
    d: &GridDomain,
    gamma: f64,
    p: f64,
    n: usize,
) -> Result<(RadiusSearchResult, Vec<TraceRow>)> {
    check_exponent(p)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::DomainError(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    if n != d.dim() {
        return Err(Error::DomainError(format!(
            "dimension {n} does not match the grid ({})",
            d.dim()
        )));
    }
    let nf = n as f64;
    if p >= nf {
        return Err(Error::ExponentOutOfRange { p, n });
    }
    let h = d.h();
    let alpha = gamma.powf(nf / (nf - p));
    let prune = alpha * PRUNE_CAPACITY_FACTOR.powf(-nf / (nf - p));
    let counter = BallCounter::new(d);
    let centers = candidate_centers(d);
    let mut trace = Vec::new();

    let probe = |r: f64, trace: &mut Vec<TraceRow>| -> Result<Option<[i64; 3]>> {
        let mut ranked: Vec<(usize, [i64; 3])> = centers
            .iter()
            .filter_map(|&c| {
                let (total, outside) = counter.count(c, r);
                (outside as f64 <= prune * total as f64).then_some((outside, c))
            })
            .collect();
        ranked.sort();
        let ball = ball_capacity_exact(r, n, p)?;
        for (_, c) in ranked {
            let cap = match ball_complement(d, c, r) {
                None => 0.0,
                Some(f) => {
                    let opts = CapacityOptions {
                        box_factor: PROBE_BOX_FACTOR,
                        tol: 1e-5,
                        ..CapacityOptions::default()
                    };
                    minimize_capacity(&f, p, &opts, Some(gamma * ball))?.value
                }
            };
            let negligible = cap <= gamma * ball;
            trace.push(TraceRow {
                center_x: c[0] as f64 * h,
                center_y: c[1] as f64 * h,
                r,
                cap,
                negligible,
            });
            if negligible {
                return Ok(Some(c));
            }
        }
        Ok(None)
    };

    let (c0, rho) = inscribed_ball(d);
    let mut lo = rho.max(0.0);
    let mut best = lattice_point(d, c0);
    let mut hi =
        (d.volume() / ((1.0 - prune.min(0.99)) * unit_ball_volume(n))).powf(1.0 / nf) + 2.0 * h;
    while probe(hi, &mut trace)?.is_some() {
        lo = hi;
        hi *= 1.5;
    }
    while hi - lo > 0.5 * h {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &mut trace)? {
            Some(c) => {
                lo = mid;
                best = c;
            }
            None => hi = mid,
        }
    }
    let result = RadiusSearchResult {
        radius: lo,
        center: physical(d, best),
        kind: RadiusKind::CapacityGamma,
        parameter: gamma,
    };
    Ok((result, trace))
}

pub fn capacity_radius(d: &GridDomain, gamma: f64, p: f64, n: usize) -> Result<RadiusSearchResult> {
    capacity_radius_traced(d, gamma, p, n).map(|r| r.0)
}

/// CSV rows `center_x,center_y,r,cap,negligible`.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("center_x,center_y,r,cap,negligible\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t.center_x, t.center_y, t.r, t.cap, t.negligible
        ));
    }
    out
}
