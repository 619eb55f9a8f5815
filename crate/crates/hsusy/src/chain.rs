//! Superpotential chain construction.
//!
//! Level 1 comes from the closed-form general solution of the oscillator
//! Riccati equation alpha' + alpha^2 = 2(V - eps) at factorization energy eps:
//!
//!   alpha_1(x) = -x + u'(x)/u(x),
//!   u(x) = 1F1((1-2e)/4, 1/2; x^2)
//!        + 2 nu [Gamma((3-2e)/4)/Gamma((1-2e)/4)] x 1F1((3-2e)/4, 3/2; x^2),
//!
//! evaluated in log-magnitude + sign form so only the ratio u'/u is ever
//! materialized. Higher levels are filled by the algebraic two-energy
//! recursion
//!
//!   alpha_i(x, e_k) = -alpha_{i-1}(x, e_{i-1})
//!       - 2 (e_{i-1} - e_k) / [alpha_{i-1}(x, e_{i-1}) - alpha_{i-1}(x, e_k)],
//!
//! applied across a triangular table of target energies. Off-diagonal entries
//! may legitimately carry poles (their transformation functions may have
//! nodes, which cancel downstream); diagonal entries must be pole-free or the
//! chain — and the partner potential V_i = V_{i-1} - alpha_i' — is singular.
//! Admissibility is decided empirically by tracking the sign of the effective
//! transformation function through the recursion, plus an independent RK4
//! integration of the Riccati equation as a cross-check oracle.

use crate::error::{Error, Result};
use crate::numerics::grid::{Grid, GridFunction};
use crate::specfun::{gamma_ratio, SpecfunConfig};

/// Denominator magnitude below which the two-energy recursion is singular at
/// a sample.
pub const CHAIN_DENOMINATOR_GUARD: f64 = 1e-10;

/// Factorization energies must differ by more than this.
pub const ENERGY_DEGENERACY_GUARD: f64 = 1e-12;

/// Relative cancellation in u below which its sign is numerically meaningless
/// and the sample is treated as a node.
const CANCELLATION_FLOOR: f64 = 1e-12;

/// Residual gate every table entry must pass against its level potential.
pub const TABLE_RESIDUAL_GATE: f64 = 1e-5;

/// One (epsilon, nu) pair of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationStep {
    pub epsilon: f64,
    pub nu: f64,
}

/// Ordered list of factorization steps: eps_m < ... < eps_1 <= 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationConfig {
    steps: Vec<FactorizationStep>,
}

impl FactorizationConfig {
    /// Validates the energy ordering. An empty list is the trivial chain
    /// (m = 0), needed for the identity cases of the state and algebra layers.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(e, nu)) in entries.iter().enumerate() {
            if !e.is_finite() || !nu.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "non-finite entry at position {i}"
                )));
            }
        }
        if let Some(&(e1, _)) = entries.first() {
            if e1 > 0.5 {
                return Err(Error::InvalidConfig(format!(
                    "eps_1 = {e1} exceeds the oscillator ground energy 1/2"
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].0 >= w[0].0 - ENERGY_DEGENERACY_GUARD {
                return Err(Error::InvalidConfig(format!(
                    "factorization energies must strictly decrease: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(FactorizationConfig {
            steps: entries
                .into_iter()
                .map(|(epsilon, nu)| FactorizationStep { epsilon, nu })
                .collect(),
        })
    }

    pub fn trivial() -> Self {
        FactorizationConfig { steps: Vec::new() }
    }

    /// Chain order m.
    pub fn order(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[FactorizationStep] {
        &self.steps
    }

    /// 1-based accessors matching the chain level indexing.
    pub fn epsilon(&self, i: usize) -> f64 {
        self.steps[i - 1].epsilon
    }

    pub fn nu(&self, i: usize) -> f64 {
        self.steps[i - 1].nu
    }

    pub fn epsilons(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.epsilon)
    }
}

/// Level-1 superpotential samples together with the sign structure of the
/// underlying transformation function u.
#[derive(Debug, Clone)]
pub struct Alpha1Seed {
    pub alpha: GridFunction,
    /// sign of u per sample: -1/+1, or 0 where u cancelled below working precision
    pub u_sign: Vec<i8>,
    /// x positions where u changes sign or is numerically zero
    pub nodes: Vec<f64>,
}

fn nodes_of_sign_vector(grid: &Grid, sign: &[i8]) -> Vec<f64> {
    let mut nodes = Vec::new();
    for i in 0..sign.len() {
        if sign[i] == 0 {
            nodes.push(grid.x(i));
        } else if i + 1 < sign.len() && sign[i + 1] != 0 && sign[i] * sign[i + 1] < 0 {
            nodes.push(0.5 * (grid.x(i) + grid.x(i + 1)));
        }
    }
    nodes
}

/// Closed-form level-1 superpotential, tolerating nodes in u (the off-diagonal
/// chain entries need noded seeds; their poles cancel in the recursion).
pub fn alpha1_seed(epsilon: f64, nu: f64, grid: &Grid) -> Result<Alpha1Seed> {
    let cfg = SpecfunConfig::default();
    let a = (1.0 - 2.0 * epsilon) / 4.0;
    let c = 2.0 * nu * gamma_ratio(epsilon)?;
    let n = grid.len();
    let mut alpha = vec![0.0; n];
    let mut u_sign = vec![0i8; n];
    for i in 0..n {
        let x = grid.x(i);
        let z = x * x;
        let f1 = cfg.kummer_1f1_log(a, 0.5, z)?;
        let f2 = cfg.kummer_1f1_log(a + 0.5, 1.5, z)?;
        let g1 = cfg.kummer_1f1_dz_log(a, 0.5, z)?;
        let g2 = cfg.kummer_1f1_dz_log(a + 0.5, 1.5, z)?;
        // u = F1 + c x F2;  u' = 2x dF1/dz + c (F2 + 2x^2 dF2/dz)
        let (u, cancel) = f1.add_with_cancellation(&f2.scale(c * x));
        let up = g1
            .scale(2.0 * x)
            .add(&f2.scale(c))
            .add(&g2.scale(2.0 * c * x * x));
        if u.sign == 0.0 || cancel < CANCELLATION_FLOOR {
            u_sign[i] = 0;
            alpha[i] = f64::MAX.sqrt(); // unusable sample, sits on a node
        } else {
            u_sign[i] = u.sign as i8;
            alpha[i] = -x + up.div(&u).value();
        }
    }
    let alpha = GridFunction::new(*grid, alpha)?;
    let nodes = nodes_of_sign_vector(grid, &u_sign);
    Ok(Alpha1Seed {
        alpha,
        u_sign,
        nodes,
    })
}

/// Closed-form level-1 superpotential; errors if u has a node anywhere on the
/// grid (a node in u is a pole in alpha_1 and a singular partner potential).
pub fn alpha1(epsilon: f64, nu: f64, grid: &Grid) -> Result<GridFunction> {
    let seed = alpha1_seed(epsilon, nu, grid)?;
    if let Some(&x) = seed.nodes.first() {
        return Err(Error::SingularSuperpotential { epsilon, nu, x });
    }
    Ok(seed.alpha)
}

/// Max over the interior window of |alpha' + alpha^2 - 2(V - eps)|, the defect
/// of the Riccati equation linking alpha to its base potential.
pub fn riccati_residual(alpha: &GridFunction, v: &GridFunction, epsilon: f64) -> Result<f64> {
    Ok(riccati_residual_detail(alpha, v, epsilon, &[], 0.0)?.0)
}

/// Residual with samples within `mask_radius` of any `excluded` position left
/// out (used to skip unresolvable pole neighborhoods of off-diagonal table
/// entries). Returns (max, argmax x).
fn riccati_residual_detail(
    alpha: &GridFunction,
    v: &GridFunction,
    epsilon: f64,
    excluded: &[f64],
    mask_radius: f64,
) -> Result<(f64, f64)> {
    if alpha.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = alpha.grid();
    let da = alpha.gradient();
    let mut max = 0.0;
    let mut arg = grid.x(0);
    for i in grid.interior() {
        let x = grid.x(i);
        if excluded.iter().any(|&p| (x - p).abs() <= mask_radius) {
            continue;
        }
        let r = (da.values()[i] + alpha.values()[i] * alpha.values()[i]
            - 2.0 * (v.values()[i] - epsilon))
            .abs();
        if r > max {
            max = r;
            arg = x;
        }
    }
    Ok((max, arg))
}

/// One step of the algebraic recursion: the level-i superpotential at the
/// target energy from the level-(i-1) one at its own energy and at the target.
///
/// Errors if the two energies are degenerate or the denominator passes below
/// the guard anywhere on the interior window.
pub fn chain_step(
    alpha_prev_diag: &GridFunction,
    alpha_prev_target: &GridFunction,
    eps_prev: f64,
    eps_target: f64,
) -> Result<GridFunction> {
    if alpha_prev_diag.grid() != alpha_prev_target.grid() {
        return Err(Error::GridMismatch);
    }
    if (eps_prev - eps_target).abs() < ENERGY_DEGENERACY_GUARD {
        return Err(Error::DegenerateEnergies {
            e1: eps_prev,
            e2: eps_target,
        });
    }
    let grid = alpha_prev_diag.grid();
    let interior = grid.interior();
    let mut out = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let ad = alpha_prev_diag.values()[i];
        let at = alpha_prev_target.values()[i];
        let denom = ad - at;
        if interior.contains(&i) && denom.abs() < CHAIN_DENOMINATOR_GUARD {
            return Err(Error::SingularChain {
                level: 0,
                target: 0,
                x: grid.x(i),
                reason: "vanishing denominator in the two-energy recursion",
            });
        }
        out[i] = -ad - 2.0 * (eps_prev - eps_target) / denom;
    }
    GridFunction::new(*grid, out)
}

/// Partner potential V_i = x^2/2 - sum_{j<=i} alpha_j'(x, eps_j).
#[derive(Debug, Clone)]
pub struct PartnerPotential {
    pub level: usize,
    pub values: GridFunction,
    pub config: FactorizationConfig,
}

#[derive(Debug, Clone)]
struct TableEntry {
    alpha: GridFunction,
    /// sign of the effective transformation function (the level-i Wronskian
    /// evaluated with the target energy), with 0 marking numerically-dead samples
    sign: Vec<i8>,
}

/// Per-entry diagnostics from the chain construction.
#[derive(Debug, Clone)]
pub struct EntryDiagnostics {
    pub level: usize,
    pub target: usize,
    /// node positions of the effective transformation function
    pub nodes: Vec<f64>,
    /// samples where the recursion denominator fell below the guard
    pub near_zero_denominators: Vec<f64>,
    /// nodes on a diagonal entry make the chain singular
    pub fatal: bool,
}

/// Report of the admissibility scan.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub entries: Vec<EntryDiagnostics>,
    /// first fatal (level, target, x), if any
    pub first_singularity: Option<(usize, usize, f64)>,
}

struct Construction {
    entries: Vec<Vec<TableEntry>>,
    potentials: Vec<GridFunction>,
    diagnostics: Vec<EntryDiagnostics>,
    first_fatal: Option<(usize, usize, f64)>,
}

/// Shared core of build_table and singularity_scan: fills the triangular table
/// and classifies singular structure, never aborting on it.
fn construct(config: &FactorizationConfig, grid: &Grid) -> Result<Construction> {
    let m = config.order();
    let mut entries: Vec<Vec<TableEntry>> = Vec::with_capacity(m);
    let mut diagnostics = Vec::new();
    let mut first_fatal: Option<(usize, usize, f64)> = None;
    let mut potentials = vec![GridFunction::from_fn(*grid, |x| 0.5 * x * x)];

    // level 1: closed-form seeds at every target energy
    let mut level1 = Vec::with_capacity(m);
    for k in 1..=m {
        let seed = alpha1_seed(config.epsilon(k), config.nu(k), grid)?;
        let fatal = k == 1 && !seed.nodes.is_empty();
        if fatal && first_fatal.is_none() {
            first_fatal = Some((1, 1, seed.nodes[0]));
        }
        diagnostics.push(EntryDiagnostics {
            level: 1,
            target: k,
            nodes: seed.nodes,
            near_zero_denominators: Vec::new(),
            fatal,
        });
        level1.push(TableEntry {
            alpha: seed.alpha,
            sign: seed.u_sign,
        });
    }
    if m > 0 {
        entries.push(level1);
    }

    // higher levels via the two-energy recursion, tracking the Wronskian sign
    // s_{i,k} = sign(delta) * s_{i-1,i-1} * s_{i-1,k}
    for i in 2..=m {
        if first_fatal.is_some() {
            break; // entries past a singular diagonal would be built on garbage
        }
        // the level-(i-1) diagonal is clean here; extend the potential chain
        let v_prev = potentials.last().unwrap();
        let diag_alpha = &entries[i - 2][0].alpha;
        let v_next = v_prev.axpy(-1.0, &diag_alpha.gradient())?;
        potentials.push(v_next);

        let mut level = Vec::with_capacity(m - i + 1);
        for k in i..=m {
            let prev_diag = &entries[i - 2][0];
            let prev_tgt = &entries[i - 2][k - (i - 1)];
            let eps_prev = config.epsilon(i - 1);
            let eps_k = config.epsilon(k);
            let n = grid.len();
            let mut alpha = vec![0.0; n];
            let mut sign = vec![0i8; n];
            let mut near_zero = Vec::new();
            for j in 0..n {
                let ad = prev_diag.alpha.values()[j];
                let at = prev_tgt.alpha.values()[j];
                let delta = ad - at;
                if delta.abs() < CHAIN_DENOMINATOR_GUARD {
                    near_zero.push(grid.x(j));
                    sign[j] = 0;
                    alpha[j] = f64::MAX.sqrt();
                } else {
                    let ds = if delta > 0.0 { 1i8 } else { -1i8 };
                    sign[j] = ds * prev_diag.sign[j] * prev_tgt.sign[j];
                    alpha[j] = -ad - 2.0 * (eps_prev - eps_k) / delta;
                }
            }
            let nodes = nodes_of_sign_vector(grid, &sign);
            let fatal = k == i && !nodes.is_empty();
            if fatal && first_fatal.is_none() {
                first_fatal = Some((i, k, nodes[0]));
            }
            diagnostics.push(EntryDiagnostics {
                level: i,
                target: k,
                nodes,
                near_zero_denominators: near_zero,
                fatal,
            });
            level.push(TableEntry {
                alpha: GridFunction::new(*grid, alpha)?,
                sign,
            });
        }
        entries.push(level);
    }

    // final potential (only meaningful when the whole chain is clean)
    if m > 0 && first_fatal.is_none() {
        let v_prev = potentials.last().unwrap();
        let diag_alpha = &entries[m - 1][0].alpha;
        potentials.push(v_prev.axpy(-1.0, &diag_alpha.gradient())?);
    }

    Ok(Construction {
        entries,
        potentials,
        diagnostics,
        first_fatal,
    })
}

/// Diagnostic sweep over the chain: per-level node locations and near-zero
/// recursion denominators, with the overall admissibility verdict. Never
/// errors on singular structure.
pub fn singularity_scan(config: &FactorizationConfig, grid: &Grid) -> Result<AdmissibilityReport> {
    let c = construct(config, grid)?;
    Ok(AdmissibilityReport {
        admissible: c.first_fatal.is_none(),
        entries: c.diagnostics,
        first_singularity: c.first_fatal,
    })
}

/// Triangular table of superpotentials alpha_i(x, eps_k), 1 <= i <= k <= m,
/// with the partner potentials V_0 .. V_m and validated Riccati residuals.
#[derive(Debug, Clone)]
pub struct SuperpotentialTable {
    grid: Grid,
    config: FactorizationConfig,
    entries: Vec<Vec<TableEntry>>,
    entry_nodes: Vec<Vec<Vec<f64>>>,
    potentials: Vec<PartnerPotential>,
    max_residual: f64,
}

impl SuperpotentialTable {
    /// Builds and validates the full table. Every entry must satisfy the
    /// Riccati equation of its level potential to within the residual gate
    /// (pole neighborhoods of legitimately-noded off-diagonal entries are
    /// excluded from their own residual checks; diagonals are checked whole).
    pub fn build(config: FactorizationConfig, grid: Grid) -> Result<Self> {
        let c = construct(&config, &grid)?;
        if let Some((level, target, x)) = c.first_fatal {
            if level == 1 {
                return Err(Error::SingularSuperpotential {
                    epsilon: config.epsilon(1),
                    nu: config.nu(1),
                    x,
                });
            }
            return Err(Error::SingularChain {
                level,
                target,
                x,
                reason: "node in the effective transformation function",
            });
        }
        let m = config.order();
        for p in &c.potentials {
            if let Some(x) = p.first_non_finite() {
                return Err(Error::NonFiniteSamples {
                    context: "partner potential",
                    x,
                });
            }
        }

        // stencil pollution radius around an unresolved pole: the 5-point
        // residual derivative of 1/(x - x0) is off by ~4 h^4 / d^6 at distance d
        let h = grid.spacing();
        let mask_radius = (4.0 * h.powi(4) / (0.3 * TABLE_RESIDUAL_GATE)).powf(1.0 / 6.0);

        let mut entry_nodes: Vec<Vec<Vec<f64>>> = vec![Vec::new(); m];
        for d in &c.diagnostics {
            entry_nodes[d.level - 1].push(d.nodes.clone());
        }

        let mut max_residual = 0.0_f64;
        for i in 1..=m {
            for k in i..=m {
                let entry = &c.entries[i - 1][k - i];
                let nodes = &entry_nodes[i - 1][k - i];
                let (res, at) = riccati_residual_detail(
                    &entry.alpha,
                    &c.potentials[i - 1],
                    config.epsilon(k),
                    nodes,
                    mask_radius,
                )?;
                if res > TABLE_RESIDUAL_GATE {
                    return Err(Error::SingularChain {
                        level: i,
                        target: k,
                        x: at,
                        reason: "riccati residual above the table gate",
                    });
                }
                max_residual = max_residual.max(res);
            }
        }

        let potentials = c
            .potentials
            .into_iter()
            .enumerate()
            .map(|(level, values)| PartnerPotential {
                level,
                values,
                config: config.clone(),
            })
            .collect();

        Ok(SuperpotentialTable {
            grid,
            config,
            entries: c.entries,
            entry_nodes,
            potentials,
            max_residual,
        })
    }

    /// Trivial table (m = 0): no transformations, V_0 = x^2/2 only.
    pub fn trivial(grid: Grid) -> Self {
        let config = FactorizationConfig::trivial();
        SuperpotentialTable {
            grid,
            config: config.clone(),
            entries: Vec::new(),
            entry_nodes: Vec::new(),
            potentials: vec![PartnerPotential {
                level: 0,
                values: GridFunction::from_fn(grid, |x| 0.5 * x * x),
                config,
            }],
            max_residual: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &FactorizationConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order()
    }

    /// alpha_i(x, eps_k), 1 <= i <= k <= m.
    pub fn alpha(&self, i: usize, k: usize) -> &GridFunction {
        assert!(
            1 <= i && i <= k && k <= self.order(),
            "table index (i={i}, k={k}) outside 1 <= i <= k <= {}",
            self.order()
        );
        &self.entries[i - 1][k - i].alpha
    }

    /// Diagonal entry alpha_i(x, eps_i) — the superpotential actually used in
    /// the operators and potentials.
    pub fn alpha_diag(&self, i: usize) -> &GridFunction {
        self.alpha(i, i)
    }

    /// Partner potential at a chain level, 0 (the oscillator) through m.
    pub fn potential(&self, level: usize) -> &PartnerPotential {
        assert!(
            level <= self.order(),
            "level {level} outside 0..={}",
            self.order()
        );
        &self.potentials[level]
    }

    /// Pole positions of entry (i, k); empty on diagonals by construction.
    pub fn entry_poles(&self, i: usize, k: usize) -> &[f64] {
        &self.entry_nodes[i - 1][k - i]
    }

    /// Largest validated Riccati residual across the table.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }
}

/// Result of integrating the Riccati equation outward from x = 0.
#[derive(Debug, Clone)]
pub struct RiccatiIntegration {
    /// alpha samples; NaN where the integration was aborted
    pub alpha: GridFunction,
    pub valid: Vec<bool>,
    /// first blow-up location, if |alpha| exceeded the cap
    pub pole: Option<f64>,
}

const RICCATI_BLOWUP_CAP: f64 = 1e8;

/// 4-point Lagrange interpolation of grid samples at an off-grid x.
fn interpolate(v: &GridFunction, x: f64) -> f64 {
    let grid = v.grid();
    let h = grid.spacing();
    let n = grid.len();
    let t = (x - grid.x_min()) / h;
    let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        let xa = grid.x(base + a);
        for b in 0..4 {
            if a != b {
                let xb = grid.x(base + b);
                w *= (x - xb) / (xa - xb);
            }
        }
        acc += w * v.values()[base + a];
    }
    acc
}

/// Independent verification path for the superpotentials: RK4 integration of
/// alpha' = 2(V - eps) - alpha^2 from the grid point nearest x = 0 outward in
/// both directions, 10 substeps per grid interval. A direction is abandoned
/// once |alpha| exceeds 1e8 (pole encountered); remaining samples are marked
/// invalid and the blow-up location reported.
pub fn riccati_ode_oracle(v: &GridFunction, epsilon: f64, alpha_at_zero: f64) -> RiccatiIntegration {
    let grid = *v.grid();
    let n = grid.len();
    let h = grid.spacing();
    let i0 = ((0.0 - grid.x_min()) / h).round().clamp(0.0, (n - 1) as f64) as usize;

    let mut alpha = vec![f64::NAN; n];
    let mut valid = vec![false; n];
    let mut pole = None;
    alpha[i0] = alpha_at_zero;
    valid[i0] = true;

    let rhs = |x: f64, a: f64| 2.0 * (interpolate(v, x) - epsilon) - a * a;

    for dir in [1isize, -1isize] {
        let step = h / 10.0 * dir as f64;
        let mut a = alpha_at_zero;
        let mut i = i0 as isize;
        'outer: while (dir > 0 && i < n as isize - 1) || (dir < 0 && i > 0) {
            let mut x = grid.x(i as usize);
            for _ in 0..10 {
                let k1 = rhs(x, a);
                let k2 = rhs(x + 0.5 * step, a + 0.5 * step * k1);
                let k3 = rhs(x + 0.5 * step, a + 0.5 * step * k2);
                let k4 = rhs(x + step, a + step * k3);
                a += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                x += step;
                if a.abs() > RICCATI_BLOWUP_CAP || !a.is_finite() {
                    pole.get_or_insert(x);
                    break 'outer;
                }
            }
            i += dir;
            alpha[i as usize] = a;
            valid[i as usize] = true;
        }
    }

    RiccatiIntegration {
        alpha: GridFunction::new(grid, alpha).expect("length preserved"),
        valid,
        pole,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::tridiagonal_eigensolve;
    use crate::numerics::operator::build_hamiltonian;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::default_line()
    }

    // mpmath reference (50 digits): alpha1 at eps = 0, nu = 0.3
    const ALPHA1_0_03_AT_1: f64 = 0.46239440197275930299;
    const ALPHA1_0_03_AT_0: f64 = 0.2027934720201854187;

    fn admissible_m2() -> FactorizationConfig {
        FactorizationConfig::new(vec![(0.0, 0.3), (-1.2, 1.5)]).unwrap()
    }

    fn admissible_m3() -> FactorizationConfig {
        FactorizationConfig::new(vec![(0.2, 0.4), (-0.85, 1.3), (-1.9, 0.3)]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FactorizationConfig::new(vec![]).unwrap().order() == 0);
        assert!(FactorizationConfig::new(vec![(0.6, 0.0)]).is_err());
        assert!(FactorizationConfig::new(vec![(0.0, 0.0), (0.0, 0.1)]).is_err());
        assert!(FactorizationConfig::new(vec![(-1.0, 0.0), (0.0, 0.0)]).is_err());
        assert!(FactorizationConfig::new(vec![(0.5, 0.9)]).is_ok());
    }

    #[test]
    fn alpha1_shift_branch_is_exactly_x() {
        // eps = -1/2, nu = 0: u = 1F1(1/2,1/2;x^2) = e^{x^2}, alpha = x
        let g = grid();
        let a = alpha1(-0.5, 0.0, &g).unwrap();
        for i in 0..g.len() {
            assert!((a.values()[i] - g.x(i)).abs() < 1e-10, "x = {}", g.x(i));
        }
    }

    #[test]
    fn alpha1_ground_deletion_branch_is_minus_x() {
        // eps = 1/2: a = 0 kills the first 1F1, the gamma ratio kills the second
        let g = grid();
        let a = alpha1(0.5, 0.9, &g).unwrap();
        for i in 0..g.len() {
            assert!((a.values()[i] + g.x(i)).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha1_generic_point_matches_oracle() {
        let g = grid();
        let a = alpha1(0.0, 0.3, &g).unwrap();
        let i1 = ((1.0 + 12.0) / 0.01_f64).round() as usize;
        assert_relative_eq!(a.values()[i1], ALPHA1_0_03_AT_1, max_relative = 1e-10);
        let i0 = g.len() / 2;
        assert_relative_eq!(a.values()[i0], ALPHA1_0_03_AT_0, max_relative = 1e-10);
    }

    #[test]
    fn alpha1_rejects_noded_u() {
        // |nu| >= 1 develops a node in u
        let g = grid();
        assert!(matches!(
            alpha1(0.0, 1.5, &g),
            Err(Error::SingularSuperpotential { .. })
        ));
        assert!(matches!(
            alpha1(0.0, -1.2, &g),
            Err(Error::SingularSuperpotential { .. })
        ));
    }

    #[test]
    fn alpha1_seed_reports_node_location() {
        let g = grid();
        let seed = alpha1_seed(-1.2, 1.5, &g).unwrap();
        assert_eq!(seed.nodes.len(), 1);
        assert!(seed.nodes[0] < 0.0 && seed.nodes[0] > -2.0);
    }

    #[test]
    fn riccati_residual_trivial_branches() {
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let ap = GridFunction::from_fn(g, |x| x);
        let am = GridFunction::from_fn(g, |x| -x);
        assert!(riccati_residual(&ap, &v0, -0.5).unwrap() < 1e-12);
        assert!(riccati_residual(&am, &v0, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn riccati_residual_generic() {
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let a = alpha1(0.0, 0.3, &g).unwrap();
        let r = riccati_residual(&a, &v0, 0.0).unwrap();
        assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn chain_step_degenerate_energy_guard() {
        let g = grid();
        let a = GridFunction::from_fn(g, |x| x);
        assert!(matches!(
            chain_step(&a, &a, -0.5, -0.5),
            Err(Error::DegenerateEnergies { .. })
        ));
    }

    #[test]
    fn chain_step_even_even_shift_pair_is_singular() {
        // both nu = 0 seeds are even, so the denominator vanishes at x = 0
        let g = grid();
        let a1 = alpha1(-0.5, 0.0, &g).unwrap();
        let a2 = alpha1_seed(-1.5, 0.0, &g).unwrap().alpha;
        assert!(matches!(
            chain_step(&a1, &a2, -0.5, -1.5),
            Err(Error::SingularChain { .. })
        ));
    }

    #[test]
    fn chain_step_produces_valid_level2_superpotential() {
        // admissible pair: the target seed carries one node, whose pole in the
        // denominator cancels; the composed alpha_2 is smooth and satisfies the
        // level-1 Riccati equation
        let g = grid();
        let cfg = admissible_m2();
        let a11 = alpha1(cfg.epsilon(1), cfg.nu(1), &g).unwrap();
        let a12 = alpha1_seed(cfg.epsilon(2), cfg.nu(2), &g).unwrap().alpha;
        let a22 = chain_step(&a11, &a12, cfg.epsilon(1), cfg.epsilon(2)).unwrap();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let v1 = v0.axpy(-1.0, &a11.gradient()).unwrap();
        let r = riccati_residual(&a22, &v1, cfg.epsilon(2)).unwrap();
        assert!(r <= 1e-5, "residual {r}");
    }

    #[test]
    fn build_table_shift_m1() {
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(-0.5, 0.0)]).unwrap();
        let t = SuperpotentialTable::build(cfg, g).unwrap();
        assert_eq!(t.order(), 1);
        for i in 0..g.len() {
            assert!((t.alpha_diag(1).values()[i] - g.x(i)).abs() < 1e-10);
        }
        // V_1 = x^2/2 - 1 within 1e-8 interior
        let v1 = t.potential(1);
        for i in g.interior() {
            let x = g.x(i);
            assert!((v1.values.values()[i] - (0.5 * x * x - 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn build_table_ground_deletion_potential() {
        // eps = 1/2: alpha = -x, V_1 = x^2/2 + 1
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(0.5, 0.4)]).unwrap();
        let t = SuperpotentialTable::build(cfg, g).unwrap();
        for i in g.interior() {
            let x = g.x(i);
            assert!((t.potential(1).values.values()[i] - (0.5 * x * x + 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn build_table_rejects_large_nu() {
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(0.0, 1.5)]).unwrap();
        assert!(matches!(
            SuperpotentialTable::build(cfg, g),
            Err(Error::SingularSuperpotential { .. })
        ));
    }

    #[test]
    fn build_table_rejects_nu_zero_shift_chain_m2() {
        // the iterated-shift intuition breaks at m = 2: both even seeds give
        // a vanishing recursion denominator at x = 0
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(-0.5, 0.0), (-1.5, 0.0)]).unwrap();
        assert!(matches!(
            SuperpotentialTable::build(cfg, g),
            Err(Error::SingularChain { .. })
        ));
    }

    #[test]
    fn build_table_rejects_two_nodeless_seeds_m2() {
        // with both seeds nodeless the denominator must cross zero somewhere
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(0.0, 0.3), (-1.0, 0.2)]).unwrap();
        assert!(matches!(
            SuperpotentialTable::build(cfg, g),
            Err(Error::SingularChain { .. })
        ));
    }

    #[test]
    fn build_table_admissible_m2() {
        let g = grid();
        let t = SuperpotentialTable::build(admissible_m2(), g).unwrap();
        assert!(t.max_residual() <= TABLE_RESIDUAL_GATE);
        assert_eq!(t.entry_poles(1, 2).len(), 1);
        assert!(t.entry_poles(2, 2).is_empty());
        // oracle spectrum of V_2: {-1.2, 0, 0.5, 1.5, ...}
        let h = build_hamiltonian(&t.potential(2).values).unwrap();
        let dec = tridiagonal_eigensolve(&h, 4).unwrap();
        let expected = [-1.2, 0.0, 0.5, 1.5];
        for (a, e) in dec.eigenvalues.iter().zip(expected) {
            assert!((a - e).abs() < 1e-3, "{a} vs {e}");
        }
    }

    #[test]
    fn build_table_admissible_m3() {
        let g = grid();
        let t = SuperpotentialTable::build(admissible_m3(), g).unwrap();
        assert!(t.max_residual() <= TABLE_RESIDUAL_GATE);
        let h = build_hamiltonian(&t.potential(3).values).unwrap();
        let dec = tridiagonal_eigensolve(&h, 5).unwrap();
        let expected = [-1.9, -0.85, 0.2, 0.5, 1.5];
        for (a, e) in dec.eigenvalues.iter().zip(expected) {
            assert!((a - e).abs() < 1e-3, "{a} vs {e}");
        }
    }

    #[test]
    fn generic_m1_partner_spectrum() {
        // eps = 0, nu = 0.5: spectrum {0, 0.5, 1.5, 2.5, ...}
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(0.0, 0.5)]).unwrap();
        let t = SuperpotentialTable::build(cfg, g).unwrap();
        let h = build_hamiltonian(&t.potential(1).values).unwrap();
        let dec = tridiagonal_eigensolve(&h, 4).unwrap();
        let expected = [0.0, 0.5, 1.5, 2.5];
        for (a, e) in dec.eigenvalues.iter().zip(expected) {
            assert!((a - e).abs() < 1e-3, "{a} vs {e}");
        }
    }

    #[test]
    fn ode_oracle_reproduces_linear_solution() {
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let r = riccati_ode_oracle(&v0, -0.5, 0.0);
        assert!(r.pole.is_none());
        for i in 0..g.len() {
            assert!(r.valid[i]);
            assert!((r.alpha.values()[i] - g.x(i)).abs() < 1e-9, "x = {}", g.x(i));
        }
    }

    #[test]
    fn ode_oracle_matches_closed_form() {
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let a0 = 2.0 * 0.3 * gamma_ratio(0.0).unwrap();
        let r = riccati_ode_oracle(&v0, 0.0, a0);
        let a = alpha1(0.0, 0.3, &g).unwrap();
        let mut max = 0.0_f64;
        for i in g.interior() {
            max = max.max((r.alpha.values()[i] - a.values()[i]).abs());
        }
        assert!(max < 1e-7, "max deviation {max}");
    }

    #[test]
    fn ode_oracle_detects_pole_for_large_nu() {
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        let a0 = 2.0 * 1.5 * gamma_ratio(0.0).unwrap();
        let r = riccati_ode_oracle(&v0, 0.0, a0);
        assert!(r.pole.is_some());
        assert!(r.valid.iter().any(|v| !v));
    }

    #[test]
    fn scan_verdicts() {
        let g = grid();
        let ok = FactorizationConfig::new(vec![(0.0, 0.5)]).unwrap();
        assert!(singularity_scan(&ok, &g).unwrap().admissible);

        let bad = FactorizationConfig::new(vec![(0.0, -1.2)]).unwrap();
        let rep = singularity_scan(&bad, &g).unwrap();
        assert!(!rep.admissible);
        assert!(rep.first_singularity.is_some());
        assert!(!rep.entries[0].nodes.is_empty());

        let shift = FactorizationConfig::new(vec![(-0.5, 0.0)]).unwrap();
        let rep = singularity_scan(&shift, &g).unwrap();
        assert!(rep.admissible);
        assert!(rep.entries[0].nodes.is_empty());
    }

    #[test]
    fn scan_classifies_benign_offdiagonal_nodes() {
        let g = grid();
        let rep = singularity_scan(&admissible_m2(), &g).unwrap();
        assert!(rep.admissible);
        // entry (1,2) has a node, but it is not fatal
        let e12 = rep
            .entries
            .iter()
            .find(|e| e.level == 1 && e.target == 2)
            .unwrap();
        assert_eq!(e12.nodes.len(), 1);
        assert!(!e12.fatal);
    }

    #[test]
    fn shift_chain_closure_m1() {
        // nu = 0, eps = 1/2 - 1: V_1 = x^2/2 - 1 within 1e-6 interior
        let g = grid();
        let cfg = FactorizationConfig::new(vec![(-0.5, 0.0)]).unwrap();
        let t = SuperpotentialTable::build(cfg, g).unwrap();
        for i in g.interior() {
            let x = g.x(i);
            assert!((t.potential(1).values.values()[i] - (0.5 * x * x - 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn alpha1_stays_bounded_at_window_edge() {
        // |alpha_1(x_boundary)| <= |x_boundary| + 5 for admissible parameters
        let g = grid();
        for &(e, nu) in &[(0.0, 0.9), (-3.0, 0.5), (-1.7, -0.85), (0.4, 0.2)] {
            let a = alpha1(e, nu, &g).unwrap();
            let edge = a.values()[g.len() - 1].abs().max(a.values()[0].abs());
            assert!(edge <= 12.0 + 5.0, "eps={e} nu={nu}: {edge}");
        }
    }

    #[test]
    fn path_independence_closed_form_vs_ode() {
        // two independent evaluation routes agree within 1e-6 interior max-norm
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let g = grid();
        let v0 = GridFunction::from_fn(g, |x| 0.5 * x * x);
        for _ in 0..5 {
            let eps = rng.gen_range(-3.0..0.4);
            let nu = rng.gen_range(-0.9..0.9);
            let a = alpha1(eps, nu, &g).unwrap();
            let a0 = 2.0 * nu * gamma_ratio(eps).unwrap();
            let r = riccati_ode_oracle(&v0, eps, a0);
            let mut max = 0.0_f64;
            for i in g.interior() {
                max = max.max((r.alpha.values()[i] - a.values()[i]).abs());
            }
            assert!(max < 1e-6, "eps={eps} nu={nu}: {max}");
        }
    }
}
