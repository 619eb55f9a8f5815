//! Uniform 1D discretization of the line and sampled real functions on it.

use crate::error::{Error, Result};

/// Uniform grid on [x_min, x_max] with n_points samples (spacing h = span/(n-1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

/// Fraction of x_max inside which residual norms are evaluated; one-sided
/// boundary stencils and high-order operator composition pollute the edges.
pub const INTERIOR_FRACTION: f64 = 0.8;

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {n_points}"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Symmetric grid [-half_width, half_width].
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Grid::new(-half_width, half_width, n_points)
    }

    /// Default working grid: [-12, 12] with 2401 points (h = 0.01). Every state
    /// used here decays like e^{-x^2/2}, below 1e-30 at |x| = 12, so the
    /// Dirichlet truncation error is negligible at the tolerances in play.
    pub fn default_line() -> Self {
        Grid {
            x_min: -12.0,
            x_max: 12.0,
            n_points: 2401,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Index range of the interior window |x| <= INTERIOR_FRACTION * max|x|.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let cutoff = INTERIOR_FRACTION * self.x_min.abs().max(self.x_max.abs());
        let mut lo = self.n_points;
        let mut hi = 0;
        for i in 0..self.n_points {
            if self.x(i).abs() <= cutoff {
                lo = lo.min(i);
                hi = i + 1;
            }
        }
        lo..hi
    }
}

/// Real function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value vector length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
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

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// x of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<f64> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| self.grid.x(i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise self + c * other.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + c * b)
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            values,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Gradient by the 4th-order 5-point central stencil, falling back to
    /// lower-order one-sided forms on the outermost two points. Used for
    /// pointwise derivative diagnostics (Riccati residuals, potential
    /// assembly), where the extra accuracy matters; the banded operators keep
    /// the 3-point forms.
    pub fn gradient(&self) -> GridFunction {
        let n = self.len();
        let h = self.grid.spacing();
        let v = &self.values;
        let mut g = vec![0.0; n];
        for i in 2..n - 2 {
            g[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        }
        g[0] = (v[1] - v[0]) / h;
        g[1] = (v[2] - v[0]) / (2.0 * h);
        g[n - 2] = (v[n - 1] - v[n - 3]) / (2.0 * h);
        g[n - 1] = (v[n - 1] - v[n - 2]) / h;
        GridFunction {
            grid: self.grid,
            values: g,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interior_max_abs(&self) -> f64 {
        let r = self.grid.interior();
        self.values[r].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal L2 norm restricted to the interior window.
    pub fn interior_norm(&self) -> f64 {
        let r = self.grid.interior();
        let h = self.grid.spacing();
        let vals = &self.values[r];
        let mut s = 0.0;
        for (i, v) in vals.iter().enumerate() {
            let w = if i == 0 || i == vals.len() - 1 { 0.5 } else { 1.0 };
            s += w * v * v;
        }
        (h * s).sqrt()
    }
}

/// Trapezoidal quadrature of f*g over the grid.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let h = f.grid().spacing();
    let n = f.len();
    let mut s = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        s += w * f.values()[i] * g.values()[i];
    }
    Ok(h * s)
}

/// Trapezoidal L2 norm over the full grid.
pub fn norm(f: &GridFunction) -> f64 {
    inner_product(f, f).expect("same grid").sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_basics() {
        let g = Grid::default_line();
        assert_eq!(g.len(), 2401);
        assert_relative_eq!(g.spacing(), 0.01, max_relative = 1e-14);
        assert_eq!(g.x(0), -12.0);
        assert_eq!(g.x(2400), 12.0);
        assert_relative_eq!(g.x(1200), 0.0, epsilon = 1e-13);
        let r = g.interior();
        assert!(g.x(r.start).abs() <= 9.6 + 1e-12);
        assert!(g.x(r.start.saturating_sub(1)).abs() > 9.6);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(1.0, -1.0, 100).is_err());
        assert!(Grid::new(-1.0, 1.0, 2).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 100).is_err());
    }

    #[test]
    fn inner_product_gaussian() {
        // integral of e^{-x^2} over [-12, 12] = sqrt(pi) to 1e-10
        let g = Grid::default_line();
        let f = GridFunction::from_fn(g, |x| (-x * x / 2.0).exp());
        let ip = inner_product(&f, &f).unwrap();
        assert_relative_eq!(ip, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let f = GridFunction::zeros(Grid::default_line());
        let g = GridFunction::zeros(Grid::symmetric(10.0, 2001).unwrap());
        assert!(matches!(
            inner_product(&f, &g),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn gradient_exact_on_cubics() {
        let g = Grid::symmetric(5.0, 501).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x * x - 2.0 * x);
        let df = f.gradient();
        let r = g.interior();
        for i in r {
            assert_relative_eq!(
                df.values()[i],
                3.0 * g.x(i) * g.x(i) - 2.0,
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn gradient_sin_fourth_order() {
        let g = Grid::default_line();
        let f = GridFunction::from_fn(g, |x| x.sin());
        let df = f.gradient();
        for i in g.interior() {
            assert!((df.values()[i] - g.x(i).cos()).abs() < 1e-9);
        }
    }
}
