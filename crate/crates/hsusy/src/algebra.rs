//! Ladder operators of the partner Hamiltonians and the algebra they close.
//!
//! The chain intertwiner B† = A_m† … A_1† and its adjoint build the natural
//! ladder pair D = B† a B, D† = B† a† B acting on the spectrum of the final
//! Hamiltonian. Together with H̃ these close a polynomial deformation of the
//! oscillator algebra of order 2m:
//!
//!   [H̃, D] = -D,   [H̃, D†] = D†,   [D, D†] = N(H̃+1) - N(H̃),
//!
//! with the generalized number operator
//!
//!   N(H̃) = D†D = (H̃ - 1/2) prod_i (H̃ - eps_i - 1)(H̃ - eps_i).
//!
//! Everything here verifies those relations as operator actions on states
//! against the factored number polynomial, measures the rescaled (linearized)
//! ladder coefficients sqrt(n) / sqrt(n+1), checks the 2x2 SUSY block algebra
//! with H_ss = prod (H^p - eps_i), and classifies the ladder structure implied
//! by an abstract set of extremal-state energies.

use crate::chain::{FactorizationConfig, SuperpotentialTable};
use crate::error::{Error, Result};
use crate::numerics::grid::{inner_product, norm, GridFunction};
use crate::numerics::operator::{
    build_hamiltonian, first_order_operator, BandedOperator, LadderSign,
};
use crate::states::{EigenState, Provenance};

/// The operator content of a chain: intertwiners, ladder pair, and the two
/// end Hamiltonians.
#[derive(Debug, Clone)]
pub struct LadderOperatorSet {
    pub b_dagger: BandedOperator,
    pub b: BandedOperator,
    pub d: BandedOperator,
    pub d_dagger: BandedOperator,
    pub h_tilde: BandedOperator,
    pub h0: BandedOperator,
    pub config: FactorizationConfig,
}

/// Composes the banded intertwiners and ladder operators from the diagonal
/// superpotentials of a validated table. For m = 0 the set degenerates to the
/// oscillator: D = a, D† = a†, H̃ = H0.
pub fn build_ladder_set(table: &SuperpotentialTable) -> Result<LadderOperatorSet> {
    let grid = *table.grid();
    let x = GridFunction::from_fn(grid, |x| x);
    let a_op = first_order_operator(&x, LadderSign::Annihilation)?;
    let a_dag = first_order_operator(&x, LadderSign::Creation)?;
    let m = table.order();

    // B† = A_m† … A_1† (rightmost factor acts first), B = A_1 … A_m
    let mut b_dagger = BandedOperator::identity(grid);
    let mut b = BandedOperator::identity(grid);
    for j in 1..=m {
        let a_j_dag = first_order_operator(table.alpha_diag(j), LadderSign::Creation)?;
        let a_j = first_order_operator(table.alpha_diag(j), LadderSign::Annihilation)?;
        b_dagger = a_j_dag.multiply(&b_dagger)?;
        b = b.multiply(&a_j)?;
    }

    let d = b_dagger.multiply(&a_op)?.multiply(&b)?;
    let d_dagger = b_dagger.multiply(&a_dag)?.multiply(&b)?;
    let h_tilde = build_hamiltonian(&table.potential(m).values)?;
    let h0 = build_hamiltonian(&table.potential(0).values)?;

    Ok(LadderOperatorSet {
        b_dagger,
        b,
        d,
        d_dagger,
        h_tilde,
        h0,
        config: table.config().clone(),
    })
}

impl LadderOperatorSet {
    pub fn order(&self) -> usize {
        self.config.order()
    }

    /// prod_i (e - eps_i); the empty chain gives 1.
    pub fn intertwiner_factor(&self, e: f64) -> f64 {
        self.config.epsilons().map(|eps| e - eps).product()
    }
}

/// Factored number polynomial N(E) = (E - 1/2) prod_i (E - eps_i - 1)(E - eps_i).
#[derive(Debug, Clone, PartialEq)]
pub struct NumberPolynomial {
    roots: Vec<f64>,
}

impl NumberPolynomial {
    pub fn from_config(config: &FactorizationConfig) -> Self {
        let mut roots = vec![0.5];
        for eps in config.epsilons() {
            roots.push(eps + 1.0);
            roots.push(eps);
        }
        roots.sort_by(f64::total_cmp);
        NumberPolynomial { roots }
    }

    /// Ascending roots: {1/2} together with {eps_i, eps_i + 1}.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Polynomial degree 2m + 1.
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    /// Evaluation in factored form.
    pub fn eval(&self, e: f64) -> f64 {
        self.roots.iter().map(|r| e - r).product()
    }
}

/// max interior norm of (H̃ B† - B† H0) psi over the test states, each
/// normalized by the interior norm of B† psi.
#[derive(Debug, Clone)]
pub struct IntertwiningReport {
    pub max_residual: f64,
    /// (energy, residual) per state
    pub per_state: Vec<(f64, f64)>,
}

pub fn verify_intertwining(
    set: &LadderOperatorSet,
    test_states: &[EigenState],
) -> Result<IntertwiningReport> {
    let mut per_state = Vec::with_capacity(test_states.len());
    let mut max_residual = 0.0_f64;
    for s in test_states {
        let psi = &s.wavefunction;
        let lhs = set.h_tilde.apply(&set.b_dagger.apply(psi)?)?;
        let rhs = set.b_dagger.apply(&set.h0.apply(psi)?)?;
        let scale = set.b_dagger.apply(psi)?.interior_norm().max(1e-12);
        let r = lhs.axpy(-1.0, &rhs)?.interior_norm() / scale;
        per_state.push((s.energy, r));
        max_residual = max_residual.max(r);
    }
    Ok(IntertwiningReport {
        max_residual,
        per_state,
    })
}

/// Commutator residuals of the polynomial algebra on one state.
#[derive(Debug, Clone)]
pub struct AlgebraStateResiduals {
    pub energy: f64,
    /// ||([H,D] + D) psi|| / (1 + ||D psi||)
    pub lowering: f64,
    /// ||([H,D†] - D†) psi|| / (1 + ||D† psi||)
    pub raising: f64,
    /// |<psi,[D,D†]psi> - (N(E+1) - N(E))| / (1 + |N(E+1) - N(E)|)
    pub commutator: f64,
}

#[derive(Debug, Clone)]
pub struct AlgebraReport {
    pub max_lowering: f64,
    pub max_raising: f64,
    pub max_commutator: f64,
    pub per_state: Vec<AlgebraStateResiduals>,
    /// (energy, ||D psi||, ||D† psi||) for every missing state in the input;
    /// both should vanish — the missing states are annihilated from both sides
    pub missing_annihilation: Vec<(f64, f64, f64)>,
}

/// Verifies [H̃,D] = -D, [H̃,D†] = D†, [D,D†] = N(H̃+1) - N(H̃) as actions on
/// the supplied eigenstates of H̃, with the right side of the last relation
/// evaluated through the factored number polynomial.
pub fn verify_polynomial_algebra(
    set: &LadderOperatorSet,
    states: &[EigenState],
) -> Result<AlgebraReport> {
    let poly = NumberPolynomial::from_config(&set.config);
    let mut per_state = Vec::with_capacity(states.len());
    let mut missing_annihilation = Vec::new();
    let (mut max_lowering, mut max_raising, mut max_commutator) = (0.0_f64, 0.0_f64, 0.0_f64);

    for s in states {
        let psi = &s.wavefunction;
        let h_psi = set.h_tilde.apply(psi)?;

        let d_psi = set.d.apply(psi)?;
        let lowering = set
            .h_tilde
            .apply(&d_psi)?
            .axpy(-1.0, &set.d.apply(&h_psi)?)?
            .axpy(1.0, &d_psi)?
            .interior_norm()
            / (1.0 + d_psi.interior_norm());

        let ddag_psi = set.d_dagger.apply(psi)?;
        let raising = set
            .h_tilde
            .apply(&ddag_psi)?
            .axpy(-1.0, &set.d_dagger.apply(&h_psi)?)?
            .axpy(-1.0, &ddag_psi)?
            .interior_norm()
            / (1.0 + ddag_psi.interior_norm());

        let bracket = inner_product(psi, &set.d.apply(&ddag_psi)?)?
            - inner_product(psi, &set.d_dagger.apply(&d_psi)?)?;
        let expected = poly.eval(s.energy + 1.0) - poly.eval(s.energy);
        let commutator = (bracket - expected).abs() / (1.0 + expected.abs());

        if matches!(s.provenance, Provenance::Missing { .. }) {
            missing_annihilation.push((s.energy, d_psi.interior_norm(), ddag_psi.interior_norm()));
        }

        max_lowering = max_lowering.max(lowering);
        max_raising = max_raising.max(raising);
        max_commutator = max_commutator.max(commutator);
        per_state.push(AlgebraStateResiduals {
            energy: s.energy,
            lowering,
            raising,
            commutator,
        });
    }

    Ok(AlgebraReport {
        max_lowering,
        max_raising,
        max_commutator,
        per_state,
        missing_annihilation,
    })
}

/// Number-operator check rows: the D†D bracket and the squared ladder norm
/// against the factored N(E).
#[derive(Debug, Clone)]
pub struct NumberStateCheck {
    pub energy: f64,
    /// <psi, D† D psi>
    pub bracket: f64,
    /// ||D psi||^2
    pub norm_sq: f64,
    pub expected: f64,
    /// |bracket - expected| / (1 + expected)
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct NumberReport {
    pub max_relative: f64,
    pub per_state: Vec<NumberStateCheck>,
}

/// Verifies <psi, D†D psi> = N(E) with N in factored form.
pub fn verify_number_operator(
    set: &LadderOperatorSet,
    states: &[EigenState],
) -> Result<NumberReport> {
    let poly = NumberPolynomial::from_config(&set.config);
    let mut per_state = Vec::with_capacity(states.len());
    let mut max_relative = 0.0_f64;
    for s in states {
        let d_psi = set.d.apply(&s.wavefunction)?;
        let bracket = inner_product(&s.wavefunction, &set.d_dagger.apply(&d_psi)?)?;
        let norm_sq = inner_product(&d_psi, &d_psi)?;
        let expected = poly.eval(s.energy);
        let relative = (bracket - expected).abs() / (1.0 + expected.abs());
        max_relative = max_relative.max(relative);
        per_state.push(NumberStateCheck {
            energy: s.energy,
            bracket,
            norm_sq,
            expected,
            relative,
        });
    }
    Ok(NumberReport {
        max_relative,
        per_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderDirection {
    Lower,
    Raise,
}

/// Measured linearized ladder action on one basis state.
#[derive(Debug, Clone)]
pub struct LadderAction {
    /// <psi_neighbor, D_L psi_n>; the plain interior norm ||D psi_0|| for the
    /// n = 0 lowering case (annihilation has no neighbor to project on)
    pub coefficient: f64,
    pub neighbor: Option<usize>,
    /// |<psi_neighbor, phi>| / ||phi|| of the raw ladder image
    pub overlap: f64,
}

/// Applies D (lower) or D† (raise) to the n-th transformed basis state,
/// verifies the image points along the expected neighbor (overlap >= 0.999),
/// and rescales by the scalar the bracket of the linearized operators takes
/// on that oscillator number eigenvalue: the result measures the sqrt(n) /
/// sqrt(n+1) Heisenberg-Weyl coefficients.
///
/// `basis` must hold the transformed states ordered by oscillator index n.
pub fn linearized_action(
    set: &LadderOperatorSet,
    basis: &[EigenState],
    direction: LadderDirection,
    n: usize,
) -> Result<LadderAction> {
    if n >= basis.len() {
        return Err(Error::BasisIndexRange { index: n });
    }
    let psi = &basis[n].wavefunction;
    let e_of = |k: usize| k as f64 + 0.5;
    match direction {
        LadderDirection::Lower => {
            let phi = set.d.apply(psi)?;
            if n == 0 {
                // D annihilates the extremal state; report the leftover norm
                return Ok(LadderAction {
                    coefficient: phi.interior_norm(),
                    neighbor: None,
                    overlap: f64::NAN,
                });
            }
            let target = &basis[n - 1].wavefunction;
            let overlap = inner_product(target, &phi)?.abs() / norm(&phi);
            if overlap < 0.999 {
                return Err(Error::OverlapFailure {
                    from: n,
                    to: n - 1,
                    overlap,
                });
            }
            let scale =
                (set.intertwiner_factor(e_of(n - 1)) * set.intertwiner_factor(e_of(n))).sqrt();
            Ok(LadderAction {
                coefficient: inner_product(target, &phi)? / scale,
                neighbor: Some(n - 1),
                overlap,
            })
        }
        LadderDirection::Raise => {
            if n + 1 >= basis.len() {
                return Err(Error::BasisIndexRange { index: n + 1 });
            }
            let phi = set.d_dagger.apply(psi)?;
            let target = &basis[n + 1].wavefunction;
            let overlap = inner_product(target, &phi)?.abs() / norm(&phi);
            if overlap < 0.999 {
                return Err(Error::OverlapFailure {
                    from: n,
                    to: n + 1,
                    overlap,
                });
            }
            let scale =
                (set.intertwiner_factor(e_of(n)) * set.intertwiner_factor(e_of(n + 1))).sqrt();
            Ok(LadderAction {
                coefficient: inner_product(target, &phi)? / scale,
                neighbor: Some(n + 1),
                overlap,
            })
        }
    }
}

/// Direct-sum test vector for the 2x2 SUSY block checks: `upper` lives in the
/// space of H̃, `lower` in the space of H0. Component energies are carried
/// along when the components are eigenstates.
#[derive(Debug, Clone)]
pub struct BlockVector {
    pub upper: GridFunction,
    pub lower: GridFunction,
    pub upper_energy: Option<f64>,
    pub lower_energy: Option<f64>,
}

impl BlockVector {
    pub fn from_upper(state: &EigenState) -> Self {
        BlockVector {
            upper: state.wavefunction.clone(),
            lower: GridFunction::zeros(*state.wavefunction.grid()),
            upper_energy: Some(state.energy),
            lower_energy: None,
        }
    }

    pub fn from_lower(state: &EigenState) -> Self {
        BlockVector {
            upper: GridFunction::zeros(*state.wavefunction.grid()),
            lower: state.wavefunction.clone(),
            upper_energy: None,
            lower_energy: Some(state.energy),
        }
    }

    pub fn mixed(upper: &EigenState, lower: &EigenState) -> Self {
        BlockVector {
            upper: upper.wavefunction.clone(),
            lower: lower.wavefunction.clone(),
            upper_energy: Some(upper.energy),
            lower_energy: Some(lower.energy),
        }
    }
}

/// H_ss eigenvalue rows of the SUSY block check.
#[derive(Debug, Clone)]
pub struct HssEigenvalueCheck {
    pub energy: f64,
    /// upper (B†B) or lower (BB†) component
    pub upper_component: bool,
    pub measured: f64,
    /// prod_i (E - eps_i)
    pub expected: f64,
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct SusyBlockReport {
    /// ||{Q1, Q2} v|| / (1 + ||H_ss v||); closes identically at the block level
    pub max_anticommutator: f64,
    /// ||{Q1, Q1} v - H_ss v|| / (1 + ||H_ss v||)
    pub max_closure: f64,
    /// ||H_ss v - prod (H^p - eps_i) v|| / (1 + ||prod v||)
    pub max_hss_vs_product: f64,
    pub eigenvalue_checks: Vec<HssEigenvalueCheck>,
    pub max_eigenvalue_relative: f64,
}

fn block_interior_norm(up: &GridFunction, lo: &GridFunction) -> f64 {
    up.interior_norm().hypot(lo.interior_norm())
}

/// Verifies the Witten algebra on the 2x2 block realization: {Q1,Q2} = 0,
/// {Q1,Q1} = H_ss, and H_ss = prod(H^p − eps_i) applied blockwise, plus the
/// H_ss diagonal matrix elements on eigen-components.
pub fn verify_susy_block(
    set: &LadderOperatorSet,
    blocks: &[BlockVector],
) -> Result<SusyBlockReport> {
    // Q v = (0, B v_up), Q† v = (B† v_lo, 0)
    let q1 = |up: &GridFunction, lo: &GridFunction| -> Result<(GridFunction, GridFunction)> {
        Ok((
            set.b_dagger.apply(lo)?.scale(1.0 / std::f64::consts::SQRT_2),
            set.b.apply(up)?.scale(1.0 / std::f64::consts::SQRT_2),
        ))
    };
    // i Q2 (real form)
    let q2t = |up: &GridFunction, lo: &GridFunction| -> Result<(GridFunction, GridFunction)> {
        Ok((
            set.b_dagger.apply(lo)?.scale(1.0 / std::f64::consts::SQRT_2),
            set.b.apply(up)?.scale(-1.0 / std::f64::consts::SQRT_2),
        ))
    };

    let mut max_anticommutator = 0.0_f64;
    let mut max_closure = 0.0_f64;
    let mut max_hss_vs_product = 0.0_f64;
    let mut eigenvalue_checks = Vec::new();
    let mut max_eigenvalue_relative = 0.0_f64;

    for v in blocks {
        // H_ss v = (B† B v_up, B B† v_lo)
        let hss_up = set.b_dagger.apply(&set.b.apply(&v.upper)?)?;
        let hss_lo = set.b.apply(&set.b_dagger.apply(&v.lower)?)?;
        let hss_scale = 1.0 + block_interior_norm(&hss_up, &hss_lo);

        // {Q1, Q2} = (1/i) [Q1 (iQ2) + (iQ2) Q1]
        let (a_up, a_lo) = q2t(&v.upper, &v.lower)?;
        let (w1_up, w1_lo) = q1(&a_up, &a_lo)?;
        let (b_up, b_lo) = q1(&v.upper, &v.lower)?;
        let (w2_up, w2_lo) = q2t(&b_up, &b_lo)?;
        let anti = block_interior_norm(&w1_up.axpy(1.0, &w2_up)?, &w1_lo.axpy(1.0, &w2_lo)?);
        max_anticommutator = max_anticommutator.max(anti / hss_scale);

        // {Q1, Q1} v = 2 Q1^2 v should equal H_ss v
        let (c_up, c_lo) = q1(&b_up, &b_lo)?;
        let closure = block_interior_norm(
            &c_up.scale(2.0).axpy(-1.0, &hss_up)?,
            &c_lo.scale(2.0).axpy(-1.0, &hss_lo)?,
        );
        max_closure = max_closure.max(closure / hss_scale);

        // prod (H^p - eps_i) v, factor by factor
        let mut p_up = v.upper.clone();
        let mut p_lo = v.lower.clone();
        for eps in set.config.epsilons() {
            p_up = set.h_tilde.apply(&p_up)?.axpy(-eps, &p_up)?;
            p_lo = set.h0.apply(&p_lo)?.axpy(-eps, &p_lo)?;
        }
        let prod_scale = 1.0 + block_interior_norm(&p_up, &p_lo);
        let diff = block_interior_norm(&hss_up.axpy(-1.0, &p_up)?, &hss_lo.axpy(-1.0, &p_lo)?);
        max_hss_vs_product = max_hss_vs_product.max(diff / prod_scale);

        // <v, H_ss v> on eigen-components
        if let Some(e) = v.upper_energy {
            let measured = inner_product(&v.upper, &hss_up)?;
            let expected = set.intertwiner_factor(e);
            let relative = (measured - expected).abs() / (1.0 + expected.abs());
            max_eigenvalue_relative = max_eigenvalue_relative.max(relative);
            eigenvalue_checks.push(HssEigenvalueCheck {
                energy: e,
                upper_component: true,
                measured,
                expected,
                relative,
            });
        }
        if let Some(e) = v.lower_energy {
            let measured = inner_product(&v.lower, &hss_lo)?;
            let expected = set.intertwiner_factor(e);
            let relative = (measured - expected).abs() / (1.0 + expected.abs());
            max_eigenvalue_relative = max_eigenvalue_relative.max(relative);
            eigenvalue_checks.push(HssEigenvalueCheck {
                energy: e,
                upper_component: false,
                measured,
                expected,
                relative,
            });
        }
    }

    Ok(SusyBlockReport {
        max_anticommutator,
        max_closure,
        max_hss_vs_product,
        eigenvalue_checks,
        max_eigenvalue_relative,
    })
}

/// One ladder in a spectrum: a start energy and a length (None = infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub start_energy: f64,
    pub length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderStructure {
    /// sorted by start energy
    pub ladders: Vec<Ladder>,
}

impl LadderStructure {
    /// Same ladder starts (within tol) and identical lengths.
    pub fn matches(&self, other: &LadderStructure, tol: f64) -> bool {
        self.ladders.len() == other.ladders.len()
            && self
                .ladders
                .iter()
                .zip(&other.ladders)
                .all(|(a, b)| (a.start_energy - b.start_energy).abs() <= tol && a.length == b.length)
    }
}

/// Classifies the spectrum generated from the kernel of an annihilation
/// operator whose number polynomial has the given roots: each normalizable
/// root starts a ladder of spacing 1; a ladder is finite with length l when a
/// non-normalizable root sits exactly l >= 1 above its start (the raising
/// chain then terminates).
pub fn analyze_ladder_structure(
    roots: &[f64],
    normalizable: &[bool],
) -> Result<LadderStructure> {
    if roots.len() != normalizable.len() {
        return Err(Error::InvalidConfig(format!(
            "{} roots but {} normalizability flags",
            roots.len(),
            normalizable.len()
        )));
    }
    for (i, &a) in roots.iter().enumerate() {
        for &b in &roots[i + 1..] {
            if (a - b).abs() <= 1e-9 {
                return Err(Error::DuplicateRoot { value: a });
            }
        }
    }
    let mut ladders = Vec::new();
    for (&start, &flag) in roots.iter().zip(normalizable) {
        if !flag {
            continue;
        }
        let mut length: Option<usize> = None;
        for (&other, &other_flag) in roots.iter().zip(normalizable) {
            if other_flag || other <= start {
                continue;
            }
            let gap = other - start;
            let l = gap.round();
            if l >= 1.0 && (gap - l).abs() <= 1e-9 {
                let l = l as usize;
                length = Some(length.map_or(l, |cur| cur.min(l)));
            }
        }
        ladders.push(Ladder {
            start_energy: start,
            length,
        });
    }
    ladders.sort_by(|a, b| a.start_energy.total_cmp(&b.start_energy));
    Ok(LadderStructure { ladders })
}

/// Roots of the number polynomial with their normalizability flags for a
/// chain: 1/2 (the transformed ground state) is normalizable, each eps_i
/// carries its missing state's flag, and each eps_i + 1 is non-normalizable.
pub fn number_roots_with_flags(
    config: &FactorizationConfig,
    missing_normalizable: &[bool],
) -> (Vec<f64>, Vec<bool>) {
    let mut pairs = vec![(0.5, true)];
    for (i, eps) in config.epsilons().enumerate() {
        pairs.push((eps, missing_normalizable[i]));
        pairs.push((eps + 1.0, false));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Ladder structure actually realized by an assembled spectrum: each missing
/// state is a singlet (length-1 ladder), the transformed tower is one
/// infinite ladder from its lowest member.
pub fn ladder_structure_from_spectrum(states: &[EigenState]) -> LadderStructure {
    let mut ladders = Vec::new();
    let mut tower_start: Option<f64> = None;
    for s in states {
        match s.provenance {
            Provenance::Missing { .. } => ladders.push(Ladder {
                start_energy: s.energy,
                length: Some(1),
            }),
            Provenance::Transformed { .. } | Provenance::Oscillator { .. } => {
                tower_start = Some(tower_start.map_or(s.energy, |t: f64| t.min(s.energy)));
            }
        }
    }
    if let Some(start) = tower_start {
        ladders.push(Ladder {
            start_energy: start,
            length: None,
        });
    }
    ladders.sort_by(|a, b| a.start_energy.total_cmp(&b.start_energy));
    LadderStructure { ladders }
}
