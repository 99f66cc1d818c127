//! Weighted graph Laplacians on structured grids and a MIC(0)-preconditioned
//! conjugate gradient solver for them.

/// Symmetric operator `x -> sum_edges w_e (x_a - x_b)^2`-gradient plus a diagonal,
/// restricted to the `unknown` cells (all other cells act as zero Dirichlet data).
#[derive(Debug, Clone)]
pub struct GridOperator {
    strides: [usize; 3],
    dim: usize,
    unknown: Vec<bool>,
    coupling: [Vec<f64>; 3],
    diag: Vec<f64>,
}

pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl GridOperator {
    pub fn new(shape: [usize; 3], dim: usize, unknown: Vec<bool>) -> Self {
        let n = shape.iter().product();
        let coupling = [
            vec![0.0; n],
            if dim >= 2 { vec![0.0; n] } else { Vec::new() },
            if dim == 3 { vec![0.0; n] } else { Vec::new() },
        ];
        GridOperator {
            strides: [1, shape[0], shape[0] * shape[1]],
            dim,
            unknown,
            coupling,
            diag: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn unknown(&self) -> &[bool] {
        &self.unknown
    }

    /// Adds weight `w` to the edge between `c` and `c + stride[axis]`.
    #[inline]
    pub fn add_edge(&mut self, c: usize, axis: usize, w: f64) {
        let n = c + self.strides[axis];
        let (uc, un) = (self.unknown[c], self.unknown[n]);
        if uc {
            self.diag[c] += w;
        }
        if un {
            self.diag[n] += w;
        }
        if uc && un {
            self.coupling[axis][c] += w;
        }
    }

    #[inline]
    pub fn add_diag(&mut self, c: usize, w: f64) {
        if self.unknown[c] {
            self.diag[c] += w;
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yc, &d), &xc) in y.iter_mut().zip(&self.diag).zip(x) {
            *yc = d * xc;
        }
        // couplings vanish on every edge touching a fixed cell
        for a in 0..self.dim {
            let s = self.strides[a];
            let n = self.len();
            if s >= n {
                continue;
            }
            let cp = &self.coupling[a][..n - s];
            for ((yc, &w), &xn) in y[..n - s].iter_mut().zip(cp).zip(&x[s..]) {
                *yc -= w * xn;
            }
            for ((yn, &w), &xc) in y[s..].iter_mut().zip(cp).zip(&x[..n - s]) {
                *yn -= w * xc;
            }
        }
    }

    /// Modified incomplete Cholesky factor in Bridson's formulation.
    /// Returns `1/sqrt(e)` per unknown cell and zero elsewhere.
    pub fn mic0(&self) -> Vec<f64> {
        const TAU: f64 = 0.97;
        const SIGMA: f64 = 0.25;
        let mut precon = vec![0.0; self.len()];
        for c in 0..self.len() {
            if !self.unknown[c] {
                continue;
            }
            let mut e = self.diag[c];
            for a in 0..self.dim {
                let s = self.strides[a];
                if c < s {
                    continue;
                }
                let l = c - s;
                let w = self.coupling[a][l];
                if w == 0.0 {
                    continue;
                }
                let pl = precon[l];
                e -= (w * pl).powi(2);
                let mut others = 0.0;
                for b in 0..self.dim {
                    if b != a {
                        others += self.coupling[b][l];
                    }
                }
                e -= TAU * w * others * pl * pl;
            }
            if e < SIGMA * self.diag[c] {
                e = self.diag[c];
            }
            precon[c] = 1.0 / e.sqrt();
        }
        precon
    }

    fn factor(&self) -> Factor {
        let precon = self.mic0();
        let lower = std::array::from_fn(|a| {
            if a < self.dim {
                self.coupling[a]
                    .iter()
                    .zip(&precon)
                    .map(|(w, p)| w * p)
                    .collect()
            } else {
                Vec::new()
            }
        });
        Factor { precon, lower }
    }

    fn apply_mic0(&self, f: &Factor, r: &[f64], q: &mut [f64], z: &mut [f64]) {
        let n = self.len();
        let dim = self.dim;
        let [s0, s1, s2] = self.strides;
        let [l0, l1, l2] = [&f.lower[0], &f.lower[1], &f.lower[2]];
        let pc = &f.precon;
        for c in 0..n {
            let mut t = r[c];
            if c >= s0 {
                t += l0[c - s0] * q[c - s0];
            }
            if dim >= 2 && c >= s1 {
                t += l1[c - s1] * q[c - s1];
            }
            if dim == 3 && c >= s2 {
                t += l2[c - s2] * q[c - s2];
            }
            q[c] = t * pc[c];
        }
        for c in (0..n).rev() {
            let mut t = q[c];
            if c + s0 < n {
                t += l0[c] * z[c + s0];
            }
            if dim >= 2 && c + s1 < n {
                t += l1[c] * z[c + s1];
            }
            if dim == 3 && c + s2 < n {
                t += l2[c] * z[c + s2];
            }
            z[c] = t * pc[c];
        }
    }

    /// Solves `A x = b` on the unknown cells. `x` holds the initial guess.
    /// Stops when `|r| <= rtol |b|` or after `max_iter` iterations.
    pub fn solve_pcg(&self, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> CgOutcome {
        let n = self.len();
        let f = self.factor();
        let mut r = vec![0.0; n];
        for c in 0..n {
            if !self.unknown[c] {
                x[c] = 0.0;
            }
        }
        self.apply(x, &mut r);
        for c in 0..n {
            r[c] = if self.unknown[c] { b[c] - r[c] } else { 0.0 };
        }
        let bnorm = norm(b, &self.unknown).max(1e-300);
        let mut rnorm = dot(&r, &r).sqrt();
        if rnorm <= rtol * bnorm {
            return CgOutcome {
                iterations: 0,
                relative_residual: rnorm / bnorm,
            };
        }
        let mut q = vec![0.0; n];
        let mut z = vec![0.0; n];
        self.apply_mic0(&f, &r, &mut q, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut it = 0;
        while it < max_iter {
            it += 1;
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            let mut rr = 0.0;
            for (((xc, rc), &pc), &apc) in x.iter_mut().zip(r.iter_mut()).zip(&p).zip(&ap) {
                *xc += alpha * pc;
                *rc -= alpha * apc;
                rr += *rc * *rc;
            }
            rnorm = rr.sqrt();
            if rnorm <= rtol * bnorm {
                break;
            }
            self.apply_mic0(&f, &r, &mut q, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pc, &zc) in p.iter_mut().zip(&z) {
                *pc = zc + beta * *pc;
            }
        }
        CgOutcome {
            iterations: it,
            relative_residual: rnorm / bnorm,
        }
    }
}

struct Factor {
    precon: Vec<f64>,
    /// `coupling[a][c] * precon[c]`, the strictly lower factor entries.
    lower: [Vec<f64>; 3],
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64], mask: &[bool]) -> f64 {
    a.iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(x, _)| x * x)
        .sum::<f64>()
        .sqrt()
}
