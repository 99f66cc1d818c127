//! First Dirichlet eigenpair of the p-Laplacian by direct minimization of the
//! discrete Rayleigh quotient `sum |grad u|^p h^n / sum |u|^p h^n`.
//!
//! Gradients are forward differences with zero ghost values outside the mask,
//! which encodes the Dirichlet condition. The minimization is a descent on the
//! quotient with search directions preconditioned by the weighted Laplacian
//! `D^T W D`, `W = |grad u|^(p-2)` frozen at the current iterate. At `p = 2`
//! the unit step is exactly one inverse power iteration. Other exponents are
//! reached by continuation in `p` starting from the linear ground state.

use serde::{Deserialize, Serialize};

use crate::cheeger;
use crate::edt::squared_distance;
use crate::error::{Error, Result};
use crate::geometry;
use crate::grid::{GridDomain, ScalarField};
use crate::linalg::GridOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Regularization scale: for `p < 2` the gradient modulus is smoothed with
    /// `eps = epsilon_reg * diameter / h`; no smoothing is applied for `p >= 2`.
    pub epsilon_reg: f64,
    /// Relative change of the quotient below which a solve is converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent increment of the warm-start ladder away from `p = 2`.
    pub continuation_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon_reg: 1e-8,
            tol: 1e-7,
            max_iter: 50_000,
            continuation_step: 0.25,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.epsilon_reg >= 0.0) || !(self.continuation_step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "invalid solve options {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub p: f64,
    pub lambda: f64,
    /// Unit discrete p-norm, nonnegative.
    pub field: ScalarField,
    pub iterations: usize,
    pub residual: f64,
    pub h: f64,
    /// Unregularized quotient after every accepted step of the final rung.
    pub history: Vec<f64>,
}

/// JSON form of an [`EigenResult`] without the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub p: f64,
    pub lambda: f64,
    pub h: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl EigenResult {
    pub fn record(&self) -> EigenRecord {
        EigenRecord {
            p: self.p,
            lambda: self.lambda,
            h: self.h,
            iterations: self.iterations,
            residual: self.residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitCase {
    POne,
    PInfinity,
}

/// Forward-difference p-Dirichlet energy on a fixed mask.
pub(crate) struct Energy<'a> {
    d: &'a GridDomain,
    /// Cells whose forward-difference gradient can be nonzero.
    active: Vec<usize>,
    /// Drop every difference touching the outermost array layer.
    open_border: bool,
}

pub(crate) struct Evaluation {
    pub energy: f64,
    pub gradient: Vec<f64>,
    /// Squared gradient modulus per active cell (same order as `active`).
    pub grad_sq: Vec<f64>,
}

impl<'a> Energy<'a> {
    pub fn new(d: &'a GridDomain) -> Self {
        Self::build(d, false)
    }

    /// Energy without the outer Dirichlet wall: the outermost layer of the
    /// array is ignored and the layer inside it has a free boundary.
    pub fn open(d: &'a GridDomain) -> Self {
        Self::build(d, true)
    }

    fn build(d: &'a GridDomain, open_border: bool) -> Self {
        let s = d.strides();
        let shape = d.shape();
        let active = (0..d.len())
            .filter(|&c| {
                if open_border && d.on_border(c) {
                    return false;
                }
                if d.mask()[c] {
                    return true;
                }
                let co = d.coords(c);
                (0..d.dim()).any(|a| co[a] + 1 < shape[a] && d.mask()[c + s[a]])
            })
            .collect();
        Energy {
            d,
            active,
            open_border,
        }
    }

    #[inline]
    fn linked(&self, co: &[usize; 3], a: usize) -> bool {
        let n = self.d.shape()[a];
        if self.open_border {
            co[a] + 2 < n
        } else {
            co[a] + 1 < n
        }
    }

    #[inline]
    fn forward(&self, u: &[f64], c: usize, g: &mut [f64; 3]) -> f64 {
        let d = self.d;
        let s = d.strides();
        let co = d.coords(c);
        let inv_h = 1.0 / d.h();
        let mut q = 0.0;
        for a in 0..d.dim() {
            g[a] = if self.linked(&co, a) {
                (u[c + s[a]] - u[c]) * inv_h
            } else if self.open_border {
                0.0
            } else {
                -u[c] * inv_h
            };
            q += g[a] * g[a];
        }
        q
    }

    /// `sum_c (|G_c|^2 + eps^2)^(p/2) h^n`.
    pub fn value(&self, u: &[f64], p: f64, eps: f64) -> f64 {
        let mut g = [0.0; 3];
        let e2 = eps * eps;
        let sum: f64 = self
            .active
            .iter()
            .map(|&c| {
                let q = self.forward(u, c, &mut g) + e2;
                if p == 2.0 {
                    q
                } else {
                    q.powf(0.5 * p)
                }
            })
            .sum();
        sum * self.d.cell_volume()
    }

    pub fn evaluate(&self, u: &[f64], p: f64, eps: f64) -> Evaluation {
        let d = self.d;
        let s = d.strides();
        let dim = d.dim();
        let inv_h = 1.0 / d.h();
        let e2 = eps * eps;
        let mut gradient = vec![0.0; d.len()];
        let mut grad_sq = Vec::with_capacity(self.active.len());
        let mut energy = 0.0;
        let mut g = [0.0; 3];
        for &c in &self.active {
            let q = self.forward(u, c, &mut g);
            grad_sq.push(q);
            let qe = q + e2;
            let (term, w) = if p == 2.0 {
                (qe, 2.0)
            } else if qe > 0.0 {
                let t = qe.powf(0.5 * p);
                (t, p * t / qe)
            } else {
                (0.0, 0.0)
            };
            energy += term;
            if w == 0.0 {
                continue;
            }
            let co = d.coords(c);
            for a in 0..dim {
                let f = w * g[a] * inv_h;
                if self.linked(&co, a) {
                    gradient[c + s[a]] += f;
                }
                gradient[c] -= f;
            }
        }
        let vol = d.cell_volume();
        for (v, &m) in gradient.iter_mut().zip(d.mask()) {
            *v = if m { *v * vol } else { 0.0 };
        }
        Evaluation {
            energy: energy * vol,
            gradient,
            grad_sq,
        }
    }

    /// Weighted Laplacian `p h^(n-2) sum_c w_c |D_c x|^2` with
    /// `w_c = (|G_c|^2 + floor^2)^((p-2)/2)` on the mask unknowns.
    pub fn preconditioner(&self, grad_sq: &[f64], p: f64, floor: f64) -> GridOperator {
        let d = self.d;
        let shape = d.shape();
        let mut op = GridOperator::new(shape, d.dim(), d.mask().to_vec());
        let scale = p * d.h().powi(d.dim() as i32 - 2);
        let f2 = floor * floor;
        for (k, &c) in self.active.iter().enumerate() {
            let w = if p == 2.0 {
                1.0
            } else {
                (grad_sq[k] + f2).powf(0.5 * (p - 2.0))
            };
            let co = d.coords(c);
            for a in 0..d.dim() {
                if self.linked(&co, a) {
                    op.add_edge(c, a, scale * w);
                } else if !self.open_border {
                    op.add_diag(c, scale * w);
                }
            }
        }
        op
    }
}

fn p_power_sum(u: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        u.iter().map(|v| v * v).sum()
    } else {
        u.iter().map(|v| v.abs().powf(p)).sum()
    }
}

/// Discrete Rayleigh quotient of a trial field.
pub fn rayleigh_quotient(d: &GridDomain, u: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if u.values.len() != d.len() {
        return Err(Error::InvalidDomain("field does not match the grid".into()));
    }
    let masked: Vec<f64> = u
        .values
        .iter()
        .zip(d.mask())
        .map(|(&v, &m)| if m { v } else { 0.0 })
        .collect();
    let den = p_power_sum(&masked, p) * d.cell_volume();
    if den == 0.0 {
        return Err(Error::ZeroTrialFunction);
    }
    Ok(Energy::new(d).value(&masked, p, 0.0) / den)
}

/// `lambda * t^(-p)`: the eigenvalue of the dilated domain `t * Omega`.
pub fn rescale_lambda(lambda: f64, p: f64, t: f64) -> f64 {
    lambda * t.powf(-p)
}

fn normalize(u: &mut [f64], p: f64, vol: f64) {
    let n = (p_power_sum(u, p) * vol).powf(1.0 / p);
    if n > 0.0 {
        for v in u.iter_mut() {
            *v /= n;
        }
    }
}

/// Positive starting field: distance to the complement.
fn initial_field(d: &GridDomain) -> Vec<f64> {
    let outside: Vec<bool> = d.mask().iter().map(|&m| !m).collect();
    squared_distance(&outside, d.shape())
        .into_iter()
        .zip(d.mask())
        .map(|(s, &m)| if m { s.sqrt() } else { 0.0 })
        .collect()
}

fn regularization(d: &GridDomain, p: f64, opts: &SolveOptions) -> f64 {
    if p < 2.0 {
        let b = d.shape();
        let diam = d.h() * (((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) as f64).sqrt());
        opts.epsilon_reg * diam / d.h()
    } else {
        0.0
    }
}

pub(crate) struct RungOutcome {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Minimizes the quotient at a fixed exponent starting from `u`.
pub(crate) fn minimize_quotient(
    d: &GridDomain,
    p: f64,
    mut u: Vec<f64>,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> RungOutcome {
    let energy = Energy::new(d);
    let vol = d.cell_volume();
    normalize(&mut u, p, vol);
    let reg_quotient = |v: &[f64]| energy.value(v, p, eps) / (p_power_sum(v, p) * vol);
    let mut lambda = energy.value(&u, p, 0.0);
    let mut history = vec![lambda];
    let mut residual = f64::INFINITY;
    let mut trial = vec![0.0; u.len()];
    let mut best = vec![0.0; u.len()];
    for it in 1..=max_iter {
        let ev = energy.evaluate(&u, p, eps);
        let current = ev.energy; // u has unit p-norm
        let mut g = ev.gradient;
        // gradient of the quotient at unit norm: grad E - R grad N
        for (c, gv) in g.iter_mut().enumerate() {
            if d.mask()[c] {
                let uc = u[c];
                let dn = if p == 2.0 {
                    2.0 * uc
                } else {
                    p * uc.abs().powf(p - 1.0) * uc.signum()
                };
                *gv -= current * dn * vol;
            }
        }
        let gmax = ev.grad_sq.iter().fold(0.0f64, |m, &q| m.max(q)).sqrt();
        let floor = eps.max(1e-2 * gmax);
        let op = energy.preconditioner(&ev.grad_sq, p, floor);
        let mut dir = vec![0.0; u.len()];
        op.solve_pcg(&g, &mut dir, 1e-4, 2_000);

        let try_step = |s: f64, out: &mut Vec<f64>| -> f64 {
            for c in 0..u.len() {
                out[c] = (u[c] - s * dir[c]).abs();
            }
            normalize(out, p, vol);
            reg_quotient(out)
        };
        let mut step = 1.0;
        let mut best_val = try_step(step, &mut best);
        if best_val < current {
            // expand while it keeps paying off
            for _ in 0..3 {
                let v = try_step(2.0 * step, &mut trial);
                if v < best_val {
                    best_val = v;
                    step *= 2.0;
                    std::mem::swap(&mut best, &mut trial);
                } else {
                    break;
                }
            }
        } else {
            let mut found = false;
            for _ in 0..40 {
                step *= 0.5;
                best_val = try_step(step, &mut best);
                if best_val < current {
                    found = true;
                    break;
                }
            }
            if !found {
                return RungOutcome {
                    u,
                    lambda,
                    iterations: it,
                    residual: 0.0,
                    history,
                    converged: true,
                };
            }
        }
        std::mem::swap(&mut u, &mut best);
        let new_lambda = energy.value(&u, p, 0.0);
        residual = ((lambda - new_lambda) / new_lambda).abs();
        lambda = new_lambda;
        history.push(lambda);
        if residual < tol {
            return RungOutcome {
                u,
                lambda,
                iterations: it,
                residual,
                history,
                converged: true,
            };
        }
    }
    RungOutcome {
        u,
        lambda,
        iterations: max_iter,
        residual,
        history,
        converged: false,
    }
}

/// Exponents visited on the way from 2 to `p`.
pub fn continuation_ladder(p: f64, step: f64) -> Vec<f64> {
    let mut rungs = Vec::new();
    if (p - 2.0).abs() > step {
        let dir = (p - 2.0).signum();
        let mut k = 1;
        loop {
            let q = 2.0 + dir * step * k as f64;
            if (p - q) * dir <= 1e-12 {
                break;
            }
            rungs.push(q);
            k += 1;
        }
    }
    rungs.push(p);
    rungs
}

/// Principal frequency and nonnegative, unit-p-norm ground state.
pub fn solve_first_eigen(d: &GridDomain, p: f64, opts: &SolveOptions) -> Result<EigenResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    opts.validate()?;
    let intermediate_tol = opts.tol.max(1e-5);
    let linear = minimize_quotient(d, 2.0, initial_field(d), 0.0, opts.tol, opts.max_iter);
    if !linear.converged {
        return Err(non_convergence(d, linear));
    }
    let mut outcome = linear;
    if p != 2.0 {
        let rungs = continuation_ladder(p, opts.continuation_step);
        let last = rungs.len() - 1;
        for (k, &q) in rungs.iter().enumerate() {
            let tol = if k == last {
                opts.tol
            } else {
                intermediate_tol
            };
            let eps = regularization(d, q, opts);
            outcome = minimize_quotient(d, q, outcome.u, eps, tol, opts.max_iter);
            if !outcome.converged {
                return Err(non_convergence(d, outcome));
            }
        }
    }
    let field = ScalarField::from_values(d, outcome.u)?;
    Ok(EigenResult {
        p,
        lambda: outcome.lambda,
        field,
        iterations: outcome.iterations,
        residual: outcome.residual,
        h: d.h(),
        history: outcome.history,
    })
}

fn non_convergence(d: &GridDomain, o: RungOutcome) -> Error {
    Error::NonConvergence {
        iterations: o.iterations,
        residual: o.residual,
        last: ScalarField::from_values(d, o.u).ok().map(Box::new),
    }
}

/// `p -> 1`: the Cheeger constant estimate; `p -> infinity`: `1 / rho`.
pub fn eigen_limit_case(d: &GridDomain, which: LimitCase) -> Result<f64> {
    match which {
        LimitCase::POne => {
            if d.dim() != 2 {
                return Err(Error::DimensionUnsupported(d.dim()));
            }
            Ok(cheeger::cheeger_constant(d, cheeger::DEFAULT_PROBE_EXPONENT)?.h)
        }
        LimitCase::PInfinity => Ok(1.0 / geometry::inradius(d)),
    }
}
