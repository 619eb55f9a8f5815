//! Eigenstates of the chain Hamiltonians: oscillator states, their images
//! under the chain of first-order intertwiners, and the missing states each
//! transformation adds at its factorization energy.
//!
//! States are kept in the natural gauge of the intertwining construction
//! (Hermite-convention oscillator states, creation factors applied as-is):
//! the ladder-coefficient checks downstream need the relative signs this
//! produces. The deterministic sign convention for file output lives in
//! [`EigenState::sign_fixed`].

use crate::chain::SuperpotentialTable;
use crate::error::{Error, Result};
use crate::numerics::grid::{norm, Grid, GridFunction};
use crate::numerics::operator::BandedOperator;

/// Largest oscillator index the default grid resolves.
pub const MAX_OSCILLATOR_INDEX: usize = 60;

/// Boundary-to-peak ratio above which a state is considered non-normalizable
/// on the truncated line.
const NORMALIZABLE_BOUNDARY_RATIO: f64 = 1e-8;

/// Where a state came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// n-th oscillator eigenstate
    Oscillator { n: usize },
    /// oscillator state n propagated through the first `level` intertwiners
    Transformed { n: usize, level: usize },
    /// missing state of chain step `index`, propagated up to `level`
    Missing { index: usize, level: usize },
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Oscillator { n } => format!("oscillator_{n}"),
            Provenance::Transformed { n, level } => format!("transformed_{n}_level_{level}"),
            Provenance::Missing { index, level } => format!("missing_{index}_level_{level}"),
        }
    }
}

/// An (approximate) eigenstate of one of the chain Hamiltonians.
#[derive(Debug, Clone)]
pub struct EigenState {
    pub energy: f64,
    /// unit grid norm when normalizable, peak-normalized otherwise
    pub wavefunction: GridFunction,
    pub provenance: Provenance,
    pub normalizable: bool,
    /// |grid norm - 1| of the analytically normalized state, before the final
    /// renormalization (continuum normalization factors are exact only in the
    /// continuum; the gap is a quality metric)
    pub norm_deviation: f64,
}

impl EigenState {
    /// Copy rescaled so the first sample exceeding 1e-6 in magnitude is
    /// positive; used for deterministic file output.
    pub fn sign_fixed(&self) -> EigenState {
        let mut out = self.clone();
        let threshold = 1e-6 * self.wavefunction.max_abs().max(1e-300);
        if let Some(v) = self
            .wavefunction
            .values()
            .iter()
            .find(|v| v.abs() > threshold)
        {
            if *v < 0.0 {
                out.wavefunction = out.wavefunction.scale(-1.0);
            }
        }
        out
    }

    /// Interior sign changes of the wavefunction (Sturm node count), ignoring
    /// samples below a noise floor.
    pub fn node_count(&self) -> usize {
        let f = &self.wavefunction;
        let floor = 1e-9 * f.max_abs();
        let mut count = 0;
        let mut last = 0.0;
        for i in f.grid().interior() {
            let v = f.values()[i];
            if v.abs() <= floor {
                continue;
            }
            if last != 0.0 && v.signum() != last {
                count += 1;
            }
            last = v.signum();
        }
        count
    }
}

/// n-th oscillator eigenfunction via the stable two-term Hermite-function
/// recurrence, unit grid norm, energy n + 1/2.
pub fn oscillator_state(n: usize, grid: &Grid) -> Result<EigenState> {
    if n > MAX_OSCILLATOR_INDEX {
        return Err(Error::OscillatorIndexRange {
            n,
            max: MAX_OSCILLATOR_INDEX,
        });
    }
    let pi4 = std::f64::consts::PI.powf(0.25);
    let mut prev = GridFunction::zeros(*grid);
    let mut cur = GridFunction::from_fn(*grid, |x| (-x * x / 2.0).exp() / pi4);
    for k in 0..n {
        let kf = k as f64;
        // psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}
        let a = (2.0 / (kf + 1.0)).sqrt();
        let b = (kf / (kf + 1.0)).sqrt();
        let mut next = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            next[i] = a * grid.x(i) * cur.values()[i] - b * prev.values()[i];
        }
        prev = cur;
        cur = GridFunction::new(*grid, next)?;
    }
    let nrm = norm(&cur);
    let deviation = (nrm - 1.0).abs();
    Ok(EigenState {
        energy: n as f64 + 0.5,
        wavefunction: cur.scale(1.0 / nrm),
        provenance: Provenance::Oscillator { n },
        normalizable: true,
        norm_deviation: deviation,
    })
}

/// Cumulative integral of f from the left grid edge by the 4th-order
/// interval rule (local cubic through the four nearest samples). The
/// trapezoidal rule's O(h^2) phase error is what limits the orthogonality of
/// the missing states; this keeps it at the level of the other states.
fn cumulative_integral(f: &GridFunction) -> Vec<f64> {
    let h = f.grid().spacing();
    let v = f.values();
    let n = f.len();
    let mut acc = vec![0.0; n];
    acc[1] = h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]);
    for i in 1..n - 2 {
        acc[i + 1] =
            acc[i] + h / 24.0 * (-v[i - 1] + 13.0 * v[i] + 13.0 * v[i + 1] - v[i + 2]);
    }
    acc[n - 1] = acc[n - 2]
        + h / 24.0 * (v[n - 4] - 5.0 * v[n - 3] + 19.0 * v[n - 2] + 9.0 * v[n - 1]);
    acc
}

fn finalize_from_log(
    grid: &Grid,
    log_values: &[f64],
    energy: f64,
    provenance: Provenance,
) -> Result<EigenState> {
    let peak = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = log_values.iter().map(|l| (l - peak).exp()).collect();
    let psi = GridFunction::new(*grid, values)?;
    let boundary = psi.values()[0].abs().max(psi.values()[grid.len() - 1].abs());
    let normalizable = boundary <= NORMALIZABLE_BOUNDARY_RATIO;
    if normalizable {
        let nrm = norm(&psi);
        Ok(EigenState {
            energy,
            wavefunction: psi.scale(1.0 / nrm),
            provenance,
            normalizable: true,
            norm_deviation: 0.0,
        })
    } else {
        Ok(EigenState {
            energy,
            wavefunction: psi, // peak-normalized
            provenance,
            normalizable: false,
            norm_deviation: f64::NAN,
        })
    }
}

/// Missing state of chain step i: proportional to exp(-int_0^x alpha_i(y, e_i) dy),
/// assembled in log space. Non-normalizable results (boundary-dominated, e.g.
/// the deleted-ground-state chain at eps = 1/2) are returned peak-normalized
/// and flagged, not rejected.
pub fn missing_state(table: &SuperpotentialTable, level: usize) -> Result<EigenState> {
    assert!(
        (1..=table.order()).contains(&level),
        "missing-state level {level} outside 1..={}",
        table.order()
    );
    let alpha = table.alpha_diag(level);
    // the constant offset from integrating from the edge instead of 0 is
    // absorbed by normalization
    let log_psi: Vec<f64> = cumulative_integral(alpha).iter().map(|j| -j).collect();
    finalize_from_log(
        table.grid(),
        &log_psi,
        table.config().epsilon(level),
        Provenance::Missing {
            index: level,
            level,
        },
    )
}

/// A_j^dag psi = (-psi' + alpha_j psi)/sqrt(2), applied at the function level
/// with the 4th-order gradient. States built this way stay orthonormal to
/// ~1e-9; the 3-point banded operator form would cap the assembled-basis
/// orthogonality near 2e-6.
fn apply_creation(alpha: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    if alpha.grid() != psi.grid() {
        return Err(Error::GridMismatch);
    }
    let dpsi = psi.gradient();
    let mut vals = vec![0.0; psi.len()];
    for i in 0..psi.len() {
        vals[i] = (-dpsi.values()[i] + alpha.values()[i] * psi.values()[i])
            / std::f64::consts::SQRT_2;
    }
    GridFunction::new(*psi.grid(), vals)
}

/// Oscillator state n propagated through the first `level` intertwiners and
/// divided by the analytic factor prod_j sqrt(E_n - eps_j); level 0 returns
/// the oscillator state unchanged.
pub fn transformed_state(table: &SuperpotentialTable, n: usize, level: usize) -> Result<EigenState> {
    assert!(
        level <= table.order(),
        "level {level} outside 0..={}",
        table.order()
    );
    let base = oscillator_state(n, table.grid())?;
    if level == 0 {
        return Ok(base);
    }
    let energy = base.energy;
    for j in 1..=level {
        if energy - table.config().epsilon(j) < 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "oscillator state n = {n} is annihilated by chain step {j} \
                 (E_n - eps_{j} = {})",
                energy - table.config().epsilon(j)
            )));
        }
    }
    let mut psi = base.wavefunction;
    let mut factor = 1.0;
    for j in 1..=level {
        psi = apply_creation(table.alpha_diag(j), &psi)?;
        factor *= energy - table.config().epsilon(j);
    }
    let analytic = psi.scale(1.0 / factor.sqrt());
    let nrm = norm(&analytic);
    Ok(EigenState {
        energy,
        wavefunction: analytic.scale(1.0 / nrm),
        provenance: Provenance::Transformed { n, level },
        normalizable: true,
        norm_deviation: (nrm - 1.0).abs(),
    })
}

/// Missing state of step j propagated up to chain level i >= j with the
/// operators A_{j+1}^dag ... A_i^dag and the analytic normalization
/// prod sqrt(eps_j - eps_k). Propagating a non-normalizable state keeps the
/// flag and the peak normalization.
pub fn intermediate_missing_state(
    table: &SuperpotentialTable,
    j: usize,
    level: usize,
) -> Result<EigenState> {
    assert!(
        1 <= j && j <= level && level <= table.order(),
        "missing-state indices (j={j}, level={level}) outside 1 <= j <= level <= {}",
        table.order()
    );
    let base = missing_state(table, j)?;
    if level == j {
        return Ok(base);
    }
    let energy = base.energy;
    let was_normalizable = base.normalizable;
    let mut psi = base.wavefunction;
    let mut factor = 1.0;
    for l in j + 1..=level {
        psi = apply_creation(table.alpha_diag(l), &psi)?;
        factor *= energy - table.config().epsilon(l);
    }
    let analytic = psi.scale(1.0 / factor.sqrt());
    let boundary = analytic.values()[0]
        .abs()
        .max(analytic.values()[psi.len() - 1].abs());
    let normalizable = was_normalizable && boundary <= NORMALIZABLE_BOUNDARY_RATIO * analytic.max_abs();
    if normalizable {
        let nrm = norm(&analytic);
        Ok(EigenState {
            energy,
            wavefunction: analytic.scale(1.0 / nrm),
            provenance: Provenance::Missing { index: j, level },
            normalizable: true,
            norm_deviation: (nrm - 1.0).abs(),
        })
    } else {
        let peak = analytic.max_abs();
        Ok(EigenState {
            energy,
            wavefunction: analytic.scale(1.0 / peak),
            provenance: Provenance::Missing { index: j, level },
            normalizable: false,
            norm_deviation: f64::NAN,
        })
    }
}

/// The bound spectrum of the final partner Hamiltonian: the normalizable
/// missing states plus the transformed oscillator states n = 0..n_max, sorted
/// by energy. Non-normalizable missing states are excluded, as are oscillator
/// states annihilated by the chain (E_n = eps_j at the eps_1 = 1/2 boundary:
/// the deleted level).
pub fn spectrum_assemble(table: &SuperpotentialTable, n_max: usize) -> Result<Vec<EigenState>> {
    let m = table.order();
    let mut states = Vec::with_capacity(m + n_max + 1);
    for j in 1..=m {
        let s = intermediate_missing_state(table, j, m)?;
        if s.normalizable {
            states.push(s);
        }
    }
    for n in 0..=n_max {
        let energy = n as f64 + 0.5;
        if (1..=m).any(|j| energy - table.config().epsilon(j) < 1e-9) {
            continue;
        }
        states.push(transformed_state(table, n, m)?);
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(states)
}

/// Interior L2 norm of (H - E) psi — the eigen-residual of a state against a
/// Hamiltonian.
pub fn eigen_residual(state: &EigenState, hamiltonian: &BandedOperator) -> Result<f64> {
    let hpsi = hamiltonian.apply(&state.wavefunction)?;
    let r = hpsi.axpy(-state.energy, &state.wavefunction)?;
    Ok(r.interior_norm())
}
