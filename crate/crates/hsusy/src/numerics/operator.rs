//! Banded matrix representations of differential operators on the grid basis.

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};

/// A (2k+1)-diagonal matrix acting on grid functions. Row-major band storage:
/// entry (row i, column i+d) lives at `bands[i*(2k+1) + (d+k)]` for |d| <= k.
#[derive(Debug, Clone)]
pub struct BandedOperator {
    grid: Grid,
    bandwidth: usize,
    bands: Vec<f64>,
}

/// Which first-order factor to build: A = (d/dx + alpha)/sqrt(2) annihilates,
/// A^dag = (-d/dx + alpha)/sqrt(2) creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderSign {
    Annihilation,
    Creation,
}

impl BandedOperator {
    pub fn zeros(grid: Grid, bandwidth: usize) -> Self {
        let n = grid.len();
        let bw = bandwidth.min(n - 1);
        BandedOperator {
            grid,
            bandwidth: bw,
            bands: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn identity(grid: Grid) -> Self {
        let mut op = BandedOperator::zeros(grid, 0);
        for i in 0..grid.len() {
            op.bands[i] = 1.0;
        }
        op
    }

    pub fn diagonal(f: &GridFunction) -> Self {
        let mut op = BandedOperator::zeros(*f.grid(), 0);
        op.bands.copy_from_slice(f.values());
        op
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn width(&self) -> usize {
        2 * self.bandwidth + 1
    }

    /// Matrix element (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.len();
        if i >= n || j >= n {
            return 0.0;
        }
        let d = j as isize - i as isize;
        if d.unsigned_abs() > self.bandwidth {
            return 0.0;
        }
        self.bands[i * self.width() + (d + self.bandwidth as isize) as usize]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let d = j as isize - i as isize;
        debug_assert!(d.unsigned_abs() <= self.bandwidth);
        let w = self.width();
        self.bands[i * w + (d + self.bandwidth as isize) as usize] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let d = j as isize - i as isize;
        debug_assert!(d.unsigned_abs() <= self.bandwidth);
        let w = self.width();
        self.bands[i * w + (d + self.bandwidth as isize) as usize] += v;
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let k = self.bandwidth as isize;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let row = &self.bands[i * self.width()..(i + 1) * self.width()];
            let mut acc = 0.0;
            for d in -k..=k {
                let j = i as isize + d;
                if j >= 0 && j < n as isize {
                    acc += row[(d + k) as usize] * f.values()[j as usize];
                }
            }
            out[i] = acc;
        }
        GridFunction::new(self.grid, out)
    }

    /// Matrix product self * rhs; bandwidth grows additively (clipped at n-1).
    pub fn multiply(&self, rhs: &BandedOperator) -> Result<BandedOperator> {
        if self.grid != rhs.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let k1 = self.bandwidth as isize;
        let k2 = rhs.bandwidth as isize;
        let mut out = BandedOperator::zeros(self.grid, (self.bandwidth + rhs.bandwidth).min(n - 1));
        for i in 0..n as isize {
            for d1 in -k1..=k1 {
                let l = i + d1;
                if l < 0 || l >= n as isize {
                    continue;
                }
                let a = self.get(i as usize, l as usize);
                if a == 0.0 {
                    continue;
                }
                for d2 in -k2..=k2 {
                    let j = l + d2;
                    if j < 0 || j >= n as isize {
                        continue;
                    }
                    let b = rhs.get(l as usize, j as usize);
                    if b != 0.0 {
                        out.add_to(i as usize, j as usize, a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &BandedOperator) -> Result<BandedOperator> {
        if self.grid != rhs.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let k = self.bandwidth.max(rhs.bandwidth) as isize;
        let mut out = BandedOperator::zeros(self.grid, k as usize);
        for i in 0..n {
            for d in -k..=k {
                let j = i as isize + d;
                if j >= 0 && j < n as isize {
                    let v = self.get(i, j as usize) + rhs.get(i, j as usize);
                    if v != 0.0 {
                        out.set(i, j as usize, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(mut self, c: f64) -> BandedOperator {
        for v in &mut self.bands {
            *v *= c;
        }
        self
    }

    pub fn transpose(&self) -> BandedOperator {
        let n = self.grid.len();
        let k = self.bandwidth as isize;
        let mut out = BandedOperator::zeros(self.grid, self.bandwidth);
        for i in 0..n {
            for d in -k..=k {
                let j = i as isize + d;
                if j >= 0 && j < n as isize {
                    let v = self.get(i, j as usize);
                    if v != 0.0 {
                        out.set(j as usize, i, v);
                    }
                }
            }
        }
        out
    }

    /// max |A[i][j] - A[j][i]| over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.grid.len();
        let k = self.bandwidth as isize;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for d in 1..=k {
                let j = i as isize + d;
                if j < n as isize {
                    m = m.max((self.get(i, j as usize) - self.get(j as usize, i)).abs());
                }
            }
        }
        m
    }

    /// max |self[i][j] - other[j][i]| over rows and columns inside the interior
    /// window (boundary rows carry one-sided stencils and are excluded).
    pub fn interior_adjoint_deviation(&self, other: &BandedOperator) -> f64 {
        let r = self.grid.interior();
        let k = self.bandwidth.max(other.bandwidth) as isize;
        let mut m: f64 = 0.0;
        for i in r.clone() {
            for d in -k..=k {
                let j = i as isize + d;
                if j >= r.start as isize && j < r.end as isize {
                    m = m.max((self.get(i, j as usize) - other.get(j as usize, i)).abs());
                }
            }
        }
        m
    }

    /// Diagonal and symmetrized off-diagonal of a symmetric tridiagonal
    /// operator; errors if the bandwidth exceeds 1 or the matrix is visibly
    /// non-symmetric.
    pub fn tridiagonal_parts(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.bandwidth > 1 {
            return Err(Error::NotTridiagonal(format!(
                "bandwidth {} > 1",
                self.bandwidth
            )));
        }
        let n = self.grid.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        let scale = self.bands.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            diag[i] = self.get(i, i);
            if i + 1 < n {
                let a = self.get(i, i + 1);
                let b = self.get(i + 1, i);
                if (a - b).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::NotTridiagonal(format!(
                        "entries ({i},{}) and ({},{i}) differ: {a} vs {b}",
                        i + 1,
                        i + 1
                    )));
                }
                off[i] = a;
            }
        }
        Ok((diag, off))
    }
}

/// Finite-difference derivative operator.
///
/// Order 1 is the bandwidth-1 central stencil (f_{i+1}-f_{i-1})/2h with 2-point
/// one-sided boundary rows; compositions of first-order factors then grow the
/// bandwidth by exactly one per factor. Order 2 is the central second
/// difference with shifted 3-point boundary rows (bandwidth 2).
pub fn derivative_matrix(grid: Grid, order: usize) -> BandedOperator {
    let n = grid.len();
    let h = grid.spacing();
    match order {
        1 => {
            let mut op = BandedOperator::zeros(grid, 1);
            for i in 1..n - 1 {
                op.set(i, i - 1, -0.5 / h);
                op.set(i, i + 1, 0.5 / h);
            }
            op.set(0, 0, -1.0 / h);
            op.set(0, 1, 1.0 / h);
            op.set(n - 1, n - 2, -1.0 / h);
            op.set(n - 1, n - 1, 1.0 / h);
            op
        }
        2 => {
            let h2 = h * h;
            let mut op = BandedOperator::zeros(grid, 2);
            for i in 1..n - 1 {
                op.set(i, i - 1, 1.0 / h2);
                op.set(i, i, -2.0 / h2);
                op.set(i, i + 1, 1.0 / h2);
            }
            op.set(0, 0, 1.0 / h2);
            op.set(0, 1, -2.0 / h2);
            op.set(0, 2, 1.0 / h2);
            op.set(n - 1, n - 3, 1.0 / h2);
            op.set(n - 1, n - 2, -2.0 / h2);
            op.set(n - 1, n - 1, 1.0 / h2);
            op
        }
        _ => panic!("derivative_matrix supports orders 1 and 2"),
    }
}

/// H = -1/2 d^2/dx^2 + V(x) as a symmetric tridiagonal matrix with Dirichlet
/// (zero ghost point) boundary conditions.
pub fn build_hamiltonian(v: &GridFunction) -> Result<BandedOperator> {
    if let Some(x) = v.first_non_finite() {
        return Err(Error::NonFiniteSamples {
            context: "potential",
            x,
        });
    }
    let grid = *v.grid();
    let n = grid.len();
    let h2 = grid.spacing() * grid.spacing();
    let mut op = BandedOperator::zeros(grid, 1);
    for i in 0..n {
        op.set(i, i, 1.0 / h2 + v.values()[i]);
        if i + 1 < n {
            op.set(i, i + 1, -0.5 / h2);
            op.set(i + 1, i, -0.5 / h2);
        }
    }
    Ok(op)
}

/// First-order ladder factor (1/sqrt(2)) (∓ d/dx + alpha(x)).
pub fn first_order_operator(alpha: &GridFunction, sign: LadderSign) -> Result<BandedOperator> {
    if let Some(x) = alpha.first_non_finite() {
        return Err(Error::NonFiniteSamples {
            context: "superpotential",
            x,
        });
    }
    let s = match sign {
        LadderSign::Annihilation => 1.0,
        LadderSign::Creation => -1.0,
    };
    let d1 = derivative_matrix(*alpha.grid(), 1).scale(s);
    let op = d1.add(&BandedOperator::diagonal(alpha))?;
    Ok(op.scale(1.0 / std::f64::consts::SQRT_2))
}

/// Matrix product ops[0] * ops[1] * ... in the given order.
pub fn compose(ops: &[&BandedOperator]) -> Result<BandedOperator> {
    let (first, rest) = ops.split_first().ok_or(Error::EmptyComposition)?;
    let mut acc = (*first).clone();
    for op in rest {
        acc = acc.multiply(op)?;
    }
    Ok(acc)
}
