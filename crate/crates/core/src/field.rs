//! Grid, permeability tensor and pressure data model.
//!
//! Permeability is cell-registered: cell `(i, j)` covers
//! `[i h, (i+1) h] × [j h, (j+1) h]` with `h = 1/n`. Pressure is
//! node-registered on the `(n+1) × (n+1)` lattice of cell corners, so the
//! Dirichlet faces `x = 0` and `x = 1` carry nodes. Both arrays are stored
//! row-major with `x` (index `i`) as the fast axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of a square grid, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridShape {
    n: usize,
}

impl GridShape {
    pub const MIN_N: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_N {
            return Err(Error::Shape {
                n,
                reason: "grid must have at least 8 cells per side",
            });
        }
        if !n.is_power_of_two() {
            return Err(Error::Shape {
                n,
                reason: "grid size must be a power of two",
            });
        }
        Ok(GridShape { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Pressure lattice points per side.
    #[inline]
    pub fn points(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }
}

impl TryFrom<usize> for GridShape {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        GridShape::new(n)
    }
}

impl From<GridShape> for usize {
    fn from(s: GridShape) -> usize {
        s.n
    }
}

/// Symmetric 2×2 permeability tensor; `a_yx` is `a_xy` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tensor {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Tensor {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Tensor { xx, xy, yy }
    }

    pub const fn isotropic(c: f64) -> Self {
        Tensor::new(c, 0.0, c)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.yy > 0.0 && self.det() > 0.0 && self.det().is_finite()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let r = half_diff.hypot(self.xy);
        (mean - r, mean + r)
    }

    /// Same tensor seen with x and y exchanged.
    pub fn transposed(&self) -> Self {
        Tensor::new(self.yy, self.xy, self.xx)
    }
}

/// Per-cell symmetric tensor permeability on an `n × n` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    shape: GridShape,
    a_xx: Vec<f64>,
    a_xy: Vec<f64>,
    a_yy: Vec<f64>,
}

impl TensorField {
    pub fn new(shape: GridShape, a_xx: Vec<f64>, a_xy: Vec<f64>, a_yy: Vec<f64>) -> Result<Self> {
        let expected = shape.cells();
        for (name, v) in [("a_xx", &a_xx), ("a_xy", &a_xy), ("a_yy", &a_yy)] {
            if v.len() != expected {
                return Err(Error::Length {
                    name,
                    expected,
                    got: v.len(),
                });
            }
        }
        let field = TensorField {
            shape,
            a_xx,
            a_xy,
            a_yy,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn uniform(shape: GridShape, t: Tensor) -> Result<Self> {
        Self::from_fn(shape, |_, _| t)
    }

    /// Builds a field from a per-cell closure `(i, j) -> Tensor`.
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> Tensor) -> Result<Self> {
        let n = shape.n();
        let mut a_xx = Vec::with_capacity(shape.cells());
        let mut a_xy = Vec::with_capacity(shape.cells());
        let mut a_yy = Vec::with_capacity(shape.cells());
        for j in 0..n {
            for i in 0..n {
                let t = f(i, j);
                a_xx.push(t.xx);
                a_xy.push(t.xy);
                a_yy.push(t.yy);
            }
        }
        Self::new(shape, a_xx, a_xy, a_yy)
    }

    /// Checks every cell and reports the first one that is not positive definite.
    pub fn validate(&self) -> Result<()> {
        let n = self.shape.n();
        for k in 0..self.shape.cells() {
            let t = Tensor::new(self.a_xx[k], self.a_xy[k], self.a_yy[k]);
            if !t.is_positive_definite() {
                return Err(Error::NotPositiveDefinite {
                    i: k % n,
                    j: k / n,
                    a_xx: t.xx,
                    a_xy: t.xy,
                    a_yy: t.yy,
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.shape.n()
    }

    #[inline]
    pub fn tensor(&self, i: usize, j: usize) -> Tensor {
        let k = self.shape.cell_index(i, j);
        Tensor::new(self.a_xx[k], self.a_xy[k], self.a_yy[k])
    }

    pub fn a_xx(&self) -> &[f64] {
        &self.a_xx
    }

    pub fn a_xy(&self) -> &[f64] {
        &self.a_xy
    }

    pub fn a_yy(&self) -> &[f64] {
        &self.a_yy
    }

    pub fn has_zero_xy(&self) -> bool {
        self.a_xy.iter().all(|&v| v == 0.0)
    }

    /// Smallest and largest tensor eigenvalue over all cells.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..self.shape.cells() {
            let (l, h) = Tensor::new(self.a_xx[k], self.a_xy[k], self.a_yy[k]).eigenvalues();
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo, hi)
    }

    /// Mirror about `y = 1/2`; `a_xy` changes sign under the reflection.
    pub fn mirrored_y(&self) -> Self {
        let n = self.n();
        let mut out = self.clone();
        for j in 0..n {
            for i in 0..n {
                let src = self.shape.cell_index(i, n - 1 - j);
                let dst = self.shape.cell_index(i, j);
                out.a_xx[dst] = self.a_xx[src];
                out.a_xy[dst] = -self.a_xy[src];
                out.a_yy[dst] = self.a_yy[src];
            }
        }
        out
    }

    /// Exchange the roles of x and y.
    pub fn transposed(&self) -> Self {
        let n = self.n();
        let mut out = self.clone();
        for j in 0..n {
            for i in 0..n {
                let src = self.shape.cell_index(j, i);
                let dst = self.shape.cell_index(i, j);
                out.a_xx[dst] = self.a_yy[src];
                out.a_xy[dst] = self.a_xy[src];
                out.a_yy[dst] = self.a_xx[src];
            }
        }
        out
    }

    /// Copy with `a_xy` zeroed.
    pub fn without_xy(&self) -> Self {
        let mut out = self.clone();
        out.a_xy.iter_mut().for_each(|v| *v = 0.0);
        out
    }
}

/// Nodal pressure on the `(n+1) × (n+1)` corner lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    shape: GridShape,
    phi: Vec<f64>,
}

impl PressureField {
    pub fn new(shape: GridShape, phi: Vec<f64>) -> Result<Self> {
        let expected = shape.points() * shape.points();
        if phi.len() != expected {
            return Err(Error::Length {
                name: "phi",
                expected,
                got: phi.len(),
            });
        }
        Ok(PressureField { shape, phi })
    }

    pub fn from_fn(shape: GridShape, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let p = shape.points();
        let h = shape.h();
        let mut phi = Vec::with_capacity(p * p);
        for j in 0..p {
            for i in 0..p {
                phi.push(f(i as f64 * h, j as f64 * h));
            }
        }
        PressureField { shape, phi }
    }

    #[inline]
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[self.shape.node_index(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    /// Largest deviation of the `x = 0` and `x = 1` node columns from the
    /// given Dirichlet values.
    pub fn boundary_defect(&self, left: f64, right: f64) -> f64 {
        let p = self.shape.points();
        (0..p)
            .map(|j| (self.at(0, j) - left).abs().max((self.at(p - 1, j) - right).abs()))
            .fold(0.0, f64::max)
    }
}
