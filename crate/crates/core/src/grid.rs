//! Uniform cell-centered grids on intervals and rectangles with homogeneous
//! Neumann boundaries.
//!
//! Boundary conditions are imposed by mirror ghost cells: the value beyond a
//! boundary face equals the value of the adjacent interior cell, so every
//! boundary face carries zero flux. All stencils are written as sums of face
//! fluxes, which makes their volume-weighted sums telescope to zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("each axis needs at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("axis length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("expected {expected} values for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field value at cell {0} is not finite")]
    NonFinite(usize),
}

pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    len: [f64; 2],
}

impl Grid {
    pub fn new(n: &[usize], len: &[f64]) -> Result<Self, GridError> {
        let dim = n.len();
        if !(1..=2).contains(&dim) || len.len() != dim {
            return Err(GridError::UnsupportedDimension(dim.max(len.len())));
        }
        let mut grid = Grid {
            dim,
            n: [1, 1],
            len: [1.0, 1.0],
        };
        for axis in 0..dim {
            if n[axis] < MIN_CELLS {
                return Err(GridError::TooFewCells(n[axis]));
            }
            if !(len[axis] > 0.0 && len[axis].is_finite()) {
                return Err(GridError::InvalidLength(len[axis]));
            }
            grid.n[axis] = n[axis];
            grid.len[axis] = len[axis];
        }
        Ok(grid)
    }

    pub fn new_1d(n: usize, len: f64) -> Result<Self, GridError> {
        Self::new(&[n], &[len])
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, GridError> {
        Self::new(&[nx, ny], &[lx, ly])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.len[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// |Ω|
    pub fn measure(&self) -> f64 {
        self.len[..self.dim].iter().product()
    }

    /// Row-major index, `x` varying fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    /// Cell-center coordinates; the second entry is 0 on a 1D grid.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let i = idx % self.n[0];
        let j = idx / self.n[0];
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dim > 1 {
            (j as f64 + 0.5) * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Visits every interior face as `(left cell, right cell, spacing across the face)`.
    pub fn for_each_face(&self, mut f: impl FnMut(usize, usize, f64)) {
        let [nx, ny] = self.n;
        let hx = self.spacing(0);
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx - 1 {
                f(row + i, row + i + 1, hx);
            }
        }
        if self.dim > 1 {
            let hy = self.spacing(1);
            for j in 0..ny - 1 {
                for i in 0..nx {
                    let idx = j * nx + i;
                    f(idx, idx + nx, hy);
                }
            }
        }
    }
}

/// Cell-centered scalar field on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|i| f(grid.center(i))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.cell_count() {
            return Err(GridError::LengthMismatch {
                expected: grid.cell_count(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximum absolute value; infinite if any cell is not finite.
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| {
            if v.is_finite() {
                acc.max(v.abs())
            } else {
                f64::INFINITY
            }
        })
    }

    /// `max |self - c|`
    pub fn linf_dist_to(&self, c: f64) -> f64 {
        self.values
            .iter()
            .fold(0.0_f64, |acc, v| acc.max((v - c).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

/// Second-order Neumann Laplacian.
pub fn laplacian_neumann(f: &Field) -> Field {
    let grid = *f.grid();
    let v = f.values();
    let mut out = vec![0.0; v.len()];
    grid.for_each_face(|a, b, h| {
        let flux = (v[b] - v[a]) * (1.0 / (h * h));
        out[a] += flux;
        out[b] -= flux;
    });
    Field::from_raw(grid, out)
}

/// `∇·(u ∇w)` in conservative face-flux form, with the face value of `u`
/// taken as the arithmetic mean of the two adjacent cells. The chemotactic
/// sensitivity is not applied here.
pub fn chemo_divergence(u: &Field, w: &Field) -> Field {
    assert_eq!(u.grid(), w.grid(), "fields live on different grids");
    let grid = *u.grid();
    let (uv, wv) = (u.values(), w.values());
    let mut out = vec![0.0; uv.len()];
    grid.for_each_face(|a, b, h| {
        let flux = 0.5 * (uv[a] + uv[b]) * ((wv[b] - wv[a]) * (1.0 / (h * h)));
        out[a] += flux;
        out[b] -= flux;
    });
    Field::from_raw(grid, out)
}

/// Midpoint quadrature `Σ f_i |cell|`.
pub fn integrate(f: &Field) -> f64 {
    compensated_sum(f.values()) * f.grid().cell_volume()
}

/// Neumaier summation.
fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for &x in xs {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Discrete Dirichlet energy `∫|∇f|²`: squared face differences weighted by
/// one cell volume per interior face. Equals `-⟨Δf, f⟩` in the cell-measure
/// inner product.
pub fn grad_sq_integral(f: &Field) -> f64 {
    let v = f.values();
    let vol = f.grid().cell_volume();
    let mut acc = 0.0;
    f.grid().for_each_face(|a, b, h| {
        let g = (v[b] - v[a]) / h;
        acc += g * g;
    });
    acc * vol
}

/// Largest face-difference gradient magnitude.
pub fn max_face_gradient(f: &Field) -> f64 {
    let v = f.values();
    let mut m = 0.0_f64;
    f.grid().for_each_face(|a, b, h| {
        m = m.max(((v[b] - v[a]) / h).abs());
    });
    m
}

/// `⟨f, g⟩` in the cell-measure inner product.
pub fn inner(f: &Field, g: &Field) -> f64 {
    assert_eq!(f.grid(), g.grid(), "fields live on different grids");
    f.values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * f.grid().cell_volume()
}
