//! MAC staggered-grid geometry and field containers.
//!
//! Scalars (`phi`, `mu`, `p`) live at cell centers. The x-velocity lives on
//! vertical faces, the y-velocity on horizontal faces. Storage is row-major
//! with the x index running fastest.

use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::{Error, Result};

/// Uniform rectangular grid of `nx * ny` cells covering `[x0, x0+lx] x [y0, y0+ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    lx: f64,
    ly: f64,
    hx: f64,
    hy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 cells, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "extents must be positive and finite, got {lx} x {ly}"
            )));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            nx,
            ny,
            x0,
            y0,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
        })
    }

    /// `n x n` cells on the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 0.0, 0.0, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell-center coordinates of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx,
            self.y0 + (j as f64 + 0.5) * self.hy,
        )
    }

    /// Midpoint of vertical face `(i, j)`, `i in 0..=nx`.
    pub fn u_face(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + i as f64 * self.hx,
            self.y0 + (j as f64 + 0.5) * self.hy,
        )
    }

    /// Midpoint of horizontal face `(i, j)`, `j in 0..=ny`.
    pub fn v_face(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx,
            self.y0 + j as f64 * self.hy,
        )
    }

    /// Grid node `(i, j)`, `i in 0..=nx`, `j in 0..=ny`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + i as f64 * self.hx,
            self.y0 + j as f64 * self.hy,
        )
    }
}

macro_rules! impl_linear {
    ($t:ty) => {
        impl $t {
            pub fn data(&self) -> &[f64] {
                &self.data
            }
            pub fn data_mut(&mut self) -> &mut [f64] {
                &mut self.data
            }
            pub fn into_data(self) -> Vec<f64> {
                self.data
            }
            pub fn len(&self) -> usize {
                self.data.len()
            }
            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }
            /// `self += a * other`
            pub fn axpy(&mut self, a: f64, other: &Self) {
                debug_assert_eq!(self.data.len(), other.data.len());
                for (s, o) in self.data.iter_mut().zip(&other.data) {
                    *s += a * o;
                }
            }
            pub fn scale(&mut self, a: f64) {
                self.data.iter_mut().for_each(|v| *v *= a);
            }
            pub fn scaled(&self, a: f64) -> Self {
                let mut out = self.clone();
                out.scale(a);
                out
            }
            /// Linear combination `a*x + b*y`.
            pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
                let mut out = x.scaled(a);
                out.axpy(b, y);
                out
            }
            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|v| v.is_finite())
            }
            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        }

        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out.axpy(1.0, rhs);
                out
            }
        }

        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out.axpy(-1.0, rhs);
                out
            }
        }

        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                self.scaled(rhs)
            }
        }

        impl AddAssign<&$t> for $t {
            fn add_assign(&mut self, rhs: &$t) {
                self.axpy(1.0, rhs);
            }
        }
    };
}

/// Scalar field sampled at the `nx * ny` cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![value; grid.num_cells()],
        }
    }

    pub fn from_vec(grid: &GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_cells() {
            return Err(Error::ShapeMismatch {
                expected: grid.num_cells(),
                got: data.len(),
            });
        }
        Ok(Self {
            nx: grid.nx,
            ny: grid.ny,
            data,
        })
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                data.push(f(x, y));
            }
        }
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data,
        }
    }

    /// Builds a field from cell indices.
    pub fn from_index_fn(grid: &GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(i, j));
            }
        }
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.nx * j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = i + self.nx * j;
        self.data[k] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    /// Arithmetic mean of the cell values.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Subtracts the arithmetic mean so the field has zero discrete mean.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }
}

impl_linear!(CellField);

/// One velocity component on its staggered faces.
///
/// An x-velocity field has `(nx+1) * ny` entries; a y-velocity field has
/// `nx * (ny+1)`. Entries on boundary normal faces are kept at zero by
/// every operator in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    ni: usize,
    nj: usize,
    data: Vec<f64>,
}

impl FaceField {
    pub fn zeros_u(grid: &GridSpec) -> Self {
        Self {
            ni: grid.nx + 1,
            nj: grid.ny,
            data: vec![0.0; (grid.nx + 1) * grid.ny],
        }
    }

    pub fn zeros_v(grid: &GridSpec) -> Self {
        Self {
            ni: grid.nx,
            nj: grid.ny + 1,
            data: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    pub fn ni(&self) -> usize {
        self.ni
    }
    pub fn nj(&self) -> usize {
        self.nj
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i + self.ni * j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.ni * j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = i + self.ni * j;
        self.data[k] = v;
    }
}

impl_linear!(FaceField);

/// Staggered velocity `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u: FaceField,
    pub v: FaceField,
}

impl VelocityField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            u: FaceField::zeros_u(grid),
            v: FaceField::zeros_v(grid),
        }
    }

    /// Samples `f(x, y) -> (u, v)` at face midpoints. Boundary normal faces
    /// are set to zero regardless of `f`.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut w = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 1..grid.nx {
                let (x, y) = grid.u_face(i, j);
                w.u.set(i, j, f(x, y).0);
            }
        }
        for j in 1..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.v_face(i, j);
                w.v.set(i, j, f(x, y).1);
            }
        }
        w
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.u.ni == grid.nx + 1
            && self.u.nj == grid.ny
            && self.v.ni == grid.nx
            && self.v.nj == grid.ny + 1
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.u.axpy(a, &other.u);
        self.v.axpy(a, &other.v);
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.v.scale(a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            u: self.u.scaled(a),
            v: self.v.scaled(a),
        }
    }

    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        Self {
            u: FaceField::lin_comb(a, &x.u, b, &y.u),
            v: FaceField::lin_comb(a, &x.v, b, &y.v),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }

    /// Largest magnitude found on a boundary normal face.
    pub fn max_abs_boundary_normal(&self) -> f64 {
        let mut m = 0.0_f64;
        let (ni, nj) = (self.u.ni, self.u.nj);
        for j in 0..nj {
            m = m.max(self.u.get(0, j).abs()).max(self.u.get(ni - 1, j).abs());
        }
        let (ni, nj) = (self.v.ni, self.v.nj);
        for i in 0..ni {
            m = m.max(self.v.get(i, 0).abs()).max(self.v.get(i, nj - 1).abs());
        }
        m
    }

    /// Averages each component to cell centers, for visualization.
    pub fn cell_averaged(&self, grid: &GridSpec) -> (CellField, CellField) {
        let uc = CellField::from_index_fn(grid, |i, j| {
            0.5 * (self.u.get(i, j) + self.u.get(i + 1, j))
        });
        let vc = CellField::from_index_fn(grid, |i, j| {
            0.5 * (self.v.get(i, j) + self.v.get(i, j + 1))
        });
        (uc, vc)
    }
}

impl Add for &VelocityField {
    type Output = VelocityField;
    fn add(self, rhs: &VelocityField) -> VelocityField {
        VelocityField::lin_comb(1.0, self, 1.0, rhs)
    }
}

impl Sub for &VelocityField {
    type Output = VelocityField;
    fn sub(self, rhs: &VelocityField) -> VelocityField {
        VelocityField::lin_comb(1.0, self, -1.0, rhs)
    }
}

impl Mul<f64> for &VelocityField {
    type Output = VelocityField;
    fn mul(self, rhs: f64) -> VelocityField {
        self.scaled(rhs)
    }
}

impl AddAssign<&VelocityField> for VelocityField {
    fn add_assign(&mut self, rhs: &VelocityField) {
        self.axpy(1.0, rhs);
    }
}
