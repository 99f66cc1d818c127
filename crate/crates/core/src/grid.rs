//! Raster domains and nodal fields.
//!
//! A [`GridDomain`] is a boolean occupancy array on a uniform lattice with
//! spacing `h`. Cell centers sit at `origin + index * h`. Two-dimensional
//! domains use `shape[2] == 1`; the linear index is `i + nx * (j + ny * k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    mask: Vec<bool>,
    shape: [usize; 3],
    dim: usize,
    h: f64,
    origin: [f64; 3],
}

impl GridDomain {
    /// Validates the one-cell false margin, nonemptiness and `h > 0`.
    pub fn new(
        mask: Vec<bool>,
        shape: [usize; 3],
        dim: usize,
        h: f64,
        origin: [f64; 3],
    ) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::DimensionUnsupported(dim));
        }
        if dim == 2 && shape[2] != 1 {
            return Err(Error::InvalidDomain(
                "2D domain must have shape[2] == 1".into(),
            ));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "spacing must be positive, got {h}"
            )));
        }
        if mask.len() != shape.iter().product::<usize>() {
            return Err(Error::InvalidDomain(
                "mask length does not match shape".into(),
            ));
        }
        let d = GridDomain {
            mask,
            shape,
            dim,
            h,
            origin,
        };
        if !d.mask.iter().any(|&b| b) {
            return Err(Error::InvalidDomain("domain has no interior cell".into()));
        }
        for idx in 0..d.mask.len() {
            if d.mask[idx] && d.on_border(idx) {
                return Err(Error::InvalidDomain(
                    "true cell on the array border (one-cell margin required)".into(),
                ));
            }
        }
        Ok(d)
    }

    /// Builds a domain from an inclusion predicate over cell centers on the
    /// lattice `h * Z^dim`, covering `[lo, hi]` plus a one-cell margin.
    pub fn from_predicate<F>(
        dim: usize,
        h: f64,
        lo: [f64; 3],
        hi: [f64; 3],
        inside: F,
    ) -> Result<Self>
    where
        F: Fn([f64; 3]) -> bool,
    {
        let mut start = [0i64; 3];
        let mut shape = [1usize; 3];
        for a in 0..dim {
            let i0 = (lo[a] / h).floor() as i64 - 1;
            let i1 = (hi[a] / h).ceil() as i64 + 1;
            start[a] = i0;
            shape[a] = (i1 - i0 + 1) as usize;
        }
        let origin = [
            start[0] as f64 * h,
            start[1] as f64 * h,
            if dim == 3 { start[2] as f64 * h } else { 0.0 },
        ];
        let n = shape.iter().product();
        let mut mask = vec![false; n];
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    let x = [
                        origin[0] + i as f64 * h,
                        origin[1] + j as f64 * h,
                        origin[2] + k as f64 * h,
                    ];
                    mask[i + shape[0] * (j + shape[1] * k)] = inside(x);
                }
            }
        }
        GridDomain::new(mask, shape, dim, h, origin)
    }

    /// Closed ball `|x - center| <= r` in dimension 2 or 3, centered on the lattice.
    pub fn ball(dim: usize, r: f64, h: f64) -> Result<Self> {
        let lo = [-r, -r, if dim == 3 { -r } else { 0.0 }];
        let hi = [r, r, if dim == 3 { r } else { 0.0 }];
        GridDomain::from_predicate(dim, h, lo, hi, |x| {
            x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= r * r
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn strides(&self) -> [usize; 3] {
        [1, self.shape[0], self.shape[0] * self.shape[1]]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.shape[0] * (j + self.shape[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let j = (idx / self.shape[0]) % self.shape[1];
        let k = idx / (self.shape[0] * self.shape[1]);
        [i, j, k]
    }

    /// Cell-center position of a linear index.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [
            self.origin[0] + c[0] as f64 * self.h,
            self.origin[1] + c[1] as f64 * self.h,
            self.origin[2] + c[2] as f64 * self.h,
        ]
    }

    /// Integer lattice coordinates (multiples of `h`) of the array origin.
    pub fn lattice_origin(&self) -> [i64; 3] {
        [
            (self.origin[0] / self.h).round() as i64,
            (self.origin[1] / self.h).round() as i64,
            (self.origin[2] / self.h).round() as i64,
        ]
    }

    /// Membership test for an absolute lattice point; false outside the array.
    pub fn contains_lattice(&self, p: [i64; 3]) -> bool {
        let o = self.lattice_origin();
        let mut c = [0usize; 3];
        for a in 0..3 {
            let v = p[a] - o[a];
            if v < 0 || v >= self.shape[a] as i64 {
                return false;
            }
            c[a] = v as usize;
        }
        self.mask[self.index(c[0], c[1], c[2])]
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// `|Omega|` as cell count times `h^n`.
    pub fn volume(&self) -> f64 {
        self.cell_count() as f64 * self.cell_volume()
    }

    pub fn on_border(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.dim).any(|a| c[a] == 0 || c[a] + 1 == self.shape[a])
    }

    /// Linear indices of the 2*dim axis neighbours that exist in the array.
    pub fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(idx);
        let s = self.strides();
        (0..self.dim).flat_map(move |a| {
            let lo = (c[a] > 0).then(|| idx - s[a]);
            let hi = (c[a] + 1 < self.shape[a]).then(|| idx + s[a]);
            lo.into_iter().chain(hi)
        })
    }

    /// Same lattice placement with a different mask.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        GridDomain::new(mask, self.shape, self.dim, self.h, self.origin)
    }

    /// Cellwise inclusion `self ⊆ other`, comparing absolute lattice positions.
    pub fn is_subset_of(&self, other: &GridDomain) -> bool {
        if (self.h - other.h).abs() > 1e-12 * self.h || self.dim != other.dim {
            return false;
        }
        let o = self.lattice_origin();
        (0..self.len()).filter(|&i| self.mask[i]).all(|i| {
            let c = self.coords(i);
            other.contains_lattice([o[0] + c[0] as i64, o[1] + c[1] as i64, o[2] + c[2] as i64])
        })
    }

    /// Indices of true cells with at least one false axis neighbour.
    pub fn boundary_cells(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.mask[i] && self.neighbours(i).any(|j| !self.mask[j]))
            .collect()
    }

    /// Largest cell-center distance between two true cells.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<[f64; 3]> = self
            .boundary_cells()
            .iter()
            .map(|&i| self.center(i))
            .collect();
        let mut best: f64 = 0.0;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                best = best.max(d2);
            }
        }
        best.sqrt()
    }
}

/// Nodal values congruent with a [`GridDomain`]; zero on every false cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub shape: [usize; 3],
    pub h: f64,
}

impl ScalarField {
    pub fn zeros(d: &GridDomain) -> Self {
        ScalarField {
            values: vec![0.0; d.len()],
            shape: d.shape(),
            h: d.h(),
        }
    }

    /// Evaluates `f` at true cell centers; false cells are set to zero.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(d: &GridDomain, f: F) -> Self {
        let values = (0..d.len())
            .map(|i| if d.mask()[i] { f(d.center(i)) } else { 0.0 })
            .collect();
        ScalarField {
            values,
            shape: d.shape(),
            h: d.h(),
        }
    }

    pub fn from_values(d: &GridDomain, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != d.len() {
            return Err(Error::InvalidDomain(
                "field length does not match the grid".into(),
            ));
        }
        for (v, &m) in values.iter_mut().zip(d.mask()) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(ScalarField {
            values,
            shape: d.shape(),
            h: d.h(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `(sum |u|^p h^n)^(1/p)`.
    pub fn p_norm(&self, p: f64, dim: usize) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.h.powi(dim as i32)).powf(1.0 / p)
    }
}

/// Coordinate-wise lattice metadata used when writing fields to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDump {
    pub shape: [usize; 3],
    pub h: f64,
    pub origin: [f64; 3],
    pub values: Vec<f64>,
}

impl FieldDump {
    pub fn new(d: &GridDomain, u: &ScalarField) -> Self {
        FieldDump {
            shape: d.shape(),
            h: d.h(),
            origin: d.origin(),
            values: u.values.clone(),
        }
    }
}
