//! Uniform grids, nodal fields and the finite-difference operators the
//! solvers are built on.
//!
//! Nodes of a [`Grid1D`] sit at `a + i * (b - a) / (n - 1)`. A [`Field2D`]
//! stores its values row-major with `index = i1 * n2 + i2`, so `x2` is the
//! fast direction. Differential operators leave boundary nodes at zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        // Pin the last node to `b` exactly so endpoint lookups never drift.
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Same interval with `2n - 1` nodes (spacing halved).
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (self.b - self.a);
        x >= self.a - slack && x <= self.b + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    x1: Grid1D,
    x2: Grid1D,
}

impl Grid2D {
    pub fn new(x1min: f64, x1max: f64, x2min: f64, x2max: f64, n1: usize, n2: usize) -> Result<Self> {
        Ok(Self {
            x1: Grid1D::new(x1min, x1max, n1)?,
            x2: Grid1D::new(x2min, x2max, n2)?,
        })
    }

    pub fn from_axes(x1: Grid1D, x2: Grid1D) -> Self {
        Self { x1, x2 }
    }

    pub fn axis1(&self) -> &Grid1D {
        &self.x1
    }

    pub fn axis2(&self) -> &Grid1D {
        &self.x2
    }

    pub fn n1(&self) -> usize {
        self.x1.n
    }

    pub fn n2(&self) -> usize {
        self.x2.n
    }

    pub fn len(&self) -> usize {
        self.x1.n * self.x2.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h1(&self) -> f64 {
        self.x1.spacing()
    }

    pub fn h2(&self) -> f64 {
        self.x2.spacing()
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.x2.n + i2
    }

    pub fn coords(&self, i1: usize, i2: usize) -> (f64, f64) {
        (self.x1.x(i1), self.x2.x(i2))
    }

    pub fn is_boundary(&self, i1: usize, i2: usize) -> bool {
        i1 == 0 || i2 == 0 || i1 + 1 == self.x1.n || i2 + 1 == self.x2.n
    }

    pub fn refined(&self) -> Self {
        Self {
            x1: self.x1.refined(),
            x2: self.x2.refined(),
        }
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        self.x1.contains(x1) && self.x2.contains(x2)
    }
}

/// Locate the cell containing `x` and the fractional offset inside it.
fn locate(g: &Grid1D, x: f64) -> Option<(usize, f64)> {
    if !g.contains(x) {
        return None;
    }
    let mut s = ((x - g.a) / g.spacing()).clamp(0.0, (g.n - 1) as f64);
    // Snap to a node when rounding leaves us a hair away from it.
    if (s - s.round()).abs() < 1e-9 {
        s = s.round();
    }
    let i = (s.floor() as usize).min(g.n - 2);
    Some((i, s - i as f64))
}

/// Trapezoid weight of node `i` on a 1D grid.
fn trapezoid_weight(g: &Grid1D, i: usize) -> f64 {
    if i == 0 || i + 1 == g.n {
        0.5 * g.spacing()
    } else {
        g.spacing()
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidGrid(format!("non-finite value at node {i}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch);
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
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

    /// Piecewise-linear interpolation; exact at nodes.
    pub fn interp(&self, x: f64) -> Result<f64> {
        let (i, t) = locate(&self.grid, x).ok_or(Error::OutOfDomain(x, 0.0))?;
        Ok((1.0 - t) * self.values[i] + t * self.values[i + 1])
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn l2_norm_scaled(&self) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * v * trapezoid_weight(g, i))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..grid.n1() {
            let x1 = grid.x1.x(i1);
            for i2 in 0..grid.n2() {
                values.push(f(x1, grid.x2.x(i2)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
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
    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.index(i1, i2)]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, v: f64) {
        let k = self.grid.index(i1, i2);
        self.values[k] = v;
    }

    /// Bilinear interpolation; exact on functions of the form `a + b x1 + c x2 + d x1 x2`.
    pub fn sample(&self, x1: f64, x2: f64) -> Result<f64> {
        let (i, s) = locate(&self.grid.x1, x1).ok_or(Error::OutOfDomain(x1, x2))?;
        let (j, t) = locate(&self.grid.x2, x2).ok_or(Error::OutOfDomain(x1, x2))?;
        let f00 = self.get(i, j);
        let f10 = self.get(i + 1, j);
        let f01 = self.get(i, j + 1);
        let f11 = self.get(i + 1, j + 1);
        Ok((1.0 - s) * ((1.0 - t) * f00 + t * f01) + s * ((1.0 - t) * f10 + t * f11))
    }

    /// Sample the odd extension `y(x1, -x2) = -y(x1, x2)` of a field stored
    /// on a half-plane grid with `x2min = 0`.
    pub fn sample_odd(&self, x1: f64, x2: f64) -> Result<f64> {
        if x2 < 0.0 {
            Ok(-self.sample(x1, -x2)?)
        } else {
            self.sample(x1, x2)
        }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn l2_norm_scaled(&self) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i1 in 0..g.n1() {
            let w1 = trapezoid_weight(&g.x1, i1);
            for i2 in 0..g.n2() {
                let v = self.get(i1, i2);
                acc += v * v * w1 * trapezoid_weight(&g.x2, i2);
            }
        }
        acc.sqrt()
    }

    /// Values along the `x2 = x2(i2)` row, indexed by `i1`.
    pub fn row_x1(&self, i2: usize) -> Vec<f64> {
        (0..self.grid.n1()).map(|i1| self.get(i1, i2)).collect()
    }

    /// Maximum absolute difference over the nodes of `coarse` that also
    /// belong to `self`. The grids must share their rectangle and `self`
    /// must be an integer refinement of `coarse` in both directions.
    pub fn max_diff_on_coarse(&self, coarse: &Field2D) -> Result<f64> {
        let (r1, r2) = refinement_ratio(&self.grid, &coarse.grid)?;
        let mut worst: f64 = 0.0;
        for i1 in 0..coarse.grid.n1() {
            for i2 in 0..coarse.grid.n2() {
                let d = self.get(i1 * r1, i2 * r2) - coarse.get(i1, i2);
                worst = worst.max(d.abs());
            }
        }
        Ok(worst)
    }
}

fn refinement_ratio(fine: &Grid2D, coarse: &Grid2D) -> Result<(usize, usize)> {
    let ratio = |f: &Grid1D, c: &Grid1D| -> Result<usize> {
        let same = (f.a - c.a).abs() < 1e-12 && (f.b - c.b).abs() < 1e-12;
        if !same || !(f.n - 1).is_multiple_of(c.n - 1) {
            return Err(Error::GridMismatch);
        }
        Ok((f.n - 1) / (c.n - 1))
    };
    Ok((ratio(&fine.x1, &coarse.x1)?, ratio(&fine.x2, &coarse.x2)?))
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Three-point second difference at interior nodes; zero at both ends.
pub fn second_derivative_1d(f: &Field1D) -> Field1D {
    let n = f.grid.n;
    let inv_h2 = 1.0 / f.grid.spacing().powi(2);
    let v = &f.values;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
    }
    Field1D {
        grid: f.grid,
        values: out,
    }
}

/// Five-point Laplacian at interior nodes; zero on the boundary.
pub fn laplacian_2d(f: &Field2D) -> Field2D {
    let g = f.grid;
    let mut out = vec![0.0; g.len()];
    apply_laplacian(&g, &f.values, &mut out);
    Field2D { grid: g, values: out }
}

/// Raw-slice form of [`laplacian_2d`] used inside the solvers.
pub(crate) fn apply_laplacian(g: &Grid2D, v: &[f64], out: &mut [f64]) {
    let (n1, n2) = (g.n1(), g.n2());
    let c1 = 1.0 / g.h1().powi(2);
    let c2 = 1.0 / g.h2().powi(2);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let k = i1 * n2 + i2;
            out[k] = if g.is_boundary(i1, i2) {
                0.0
            } else {
                c1 * (v[k + n2] - 2.0 * v[k] + v[k - n2]) + c2 * (v[k + 1] - 2.0 * v[k] + v[k - 1])
            };
        }
    }
}
