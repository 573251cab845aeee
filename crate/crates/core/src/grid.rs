//! Uniform vertex-centred grids on a rectangle and scalar fields over them.
//!
//! Nodes sit at `x_i = i·dx`, `y_j = j·dy` for `i < nx`, `j < ny`, so the
//! outermost nodes lie on the boundary. Values are stored row-major: row `j`
//! (fixed `y`) is contiguous, index `j·nx + i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a grid's spacing and extent were specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Edge lengths are given; spacing is `l / (n − 1)`.
    #[default]
    ExactDomain,
    /// Spacing is given; edge lengths are `(n − 1)·d`.
    ExactSpacing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dx: f64,
    dy: f64,
}

impl Grid {
    /// Grid tiling `[0, lx] × [0, ly]` exactly with `nx × ny` nodes.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        check_counts(nx, ny)?;
        if !(lx > 0.0 && lx.is_finite() && ly > 0.0 && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "edge lengths must be positive and finite, got lx={lx}, ly={ly}"
            )));
        }
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            dx: lx / (nx - 1) as f64,
            dy: ly / (ny - 1) as f64,
        })
    }

    /// Grid with prescribed node spacing; the domain is inferred.
    pub fn with_spacing(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        check_counts(nx, ny)?;
        if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive and finite, got dx={dx}, dy={dy}"
            )));
        }
        Ok(Grid {
            nx,
            ny,
            lx: dx * (nx - 1) as f64,
            ly: dy * (ny - 1) as f64,
            dx,
            dy,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    /// Trapezoidal weight of node `(i, j)`: 1 inside, ½ on edges, ¼ at corners.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        edge_weight(i, self.nx) * edge_weight(j, self.ny)
    }
}

fn check_counts(nx: usize, ny: usize) -> Result<()> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidGrid(format!(
            "need at least 3 nodes per axis for the five-point stencil, got {nx}×{ny}"
        )));
    }
    Ok(())
}

#[inline]
fn edge_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// A scalar value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Field { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values for a {}×{} grid, got {}",
                grid.len(),
                grid.nx(),
                grid.ny(),
                values.len()
            )));
        }
        Ok(Field { grid, values })
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

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{}×{} on [{}, {}] vs {}×{} on [{}, {}]",
                self.grid.nx,
                self.grid.ny,
                self.grid.lx,
                self.grid.ly,
                other.grid.nx,
                other.grid.ny,
                other.grid.lx,
                other.grid.ly
            )));
        }
        Ok(())
    }

    /// Trapezoidal approximation of the integral over the domain.
    ///
    /// Summation is sequential in row-major order, so the result is
    /// bit-reproducible for identical inputs.
    pub fn integrate(&self) -> f64 {
        let g = &self.grid;
        let mut sum = 0.0;
        for j in 0..g.ny {
            let wy = edge_weight(j, g.ny);
            let row = &self.values[j * g.nx..(j + 1) * g.nx];
            for (i, &v) in row.iter().enumerate() {
                sum += wy * edge_weight(i, g.nx) * v;
            }
        }
        sum * g.dx * g.dy
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

    /// `max |f − c|` over all nodes.
    pub fn max_abs_deviation(&self, c: f64) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max((v - c).abs()))
    }

    /// First node holding a NaN or infinity, as `(i, j, value)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize, f64)> {
        self.values.iter().position(|v| !v.is_finite()).map(|idx| {
            let (i, j) = self.grid.node(idx);
            (i, j, self.values[idx])
        })
    }
}
