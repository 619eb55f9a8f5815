//! Batch front end: read a run configuration, execute chain construction,
//! spectrum assembly and the verification suites, and emit plot-ready CSV
//! tables plus a machine-readable JSON report.
//!
//! Exit-code contract (mirrored by the binary):
//! 0 all requested checks pass, 1 a check failed, 2 inadmissible
//! configuration (singularity report included), 3 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    analyze_ladder_structure, build_ladder_set, ladder_structure_from_spectrum,
    linearized_action, number_roots_with_flags, verify_intertwining,
    verify_number_operator, verify_polynomial_algebra, verify_susy_block, BlockVector,
    LadderDirection,
};
use crate::chain::{
    singularity_scan, FactorizationConfig, SuperpotentialTable, TABLE_RESIDUAL_GATE,
};
use crate::error::{Error, Result};
use crate::numerics::eigen::tridiagonal_eigensolve;
use crate::numerics::grid::Grid;
use crate::numerics::operator::build_hamiltonian;
use crate::states::{missing_state, oscillator_state, spectrum_assemble, transformed_state, EigenState};

/// Grid section of the run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: -12.0,
            x_max: 12.0,
            n_points: 2401,
        }
    }
}

/// One chain step in the run configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationSpec {
    pub epsilon: f64,
    pub nu: f64,
}

/// The verification suites the runner knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Riccati,
    Spectrum,
    Intertwining,
    Algebra,
    Number,
    Linearized,
    SusyBlock,
    LadderStructure,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Riccati,
        CheckKind::Spectrum,
        CheckKind::Intertwining,
        CheckKind::Algebra,
        CheckKind::Number,
        CheckKind::Linearized,
        CheckKind::SusyBlock,
        CheckKind::LadderStructure,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Riccati => "riccati",
            CheckKind::Spectrum => "spectrum",
            CheckKind::Intertwining => "intertwining",
            CheckKind::Algebra => "algebra",
            CheckKind::Number => "number",
            CheckKind::Linearized => "linearized",
            CheckKind::SusyBlock => "susy_block",
            CheckKind::LadderStructure => "ladder_structure",
        }
    }
}

impl std::str::FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check name '{s}'")))
    }
}

fn default_n_max() -> usize {
    6
}

/// Run configuration, deserialized from JSON (`--config`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridSpec,
    pub factorizations: Vec<FactorizationSpec>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// None requests every check
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// overrides keyed by tolerance name
    #[serde(default)]
    pub tolerances: Option<BTreeMap<String, f64>>,
}

impl RunConfig {
    pub fn factorization_config(&self) -> Result<FactorizationConfig> {
        FactorizationConfig::new(
            self.factorizations
                .iter()
                .map(|f| (f.epsilon, f.nu))
                .collect(),
        )
    }

    pub fn grid_object(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)
    }
}

/// Default tolerance table; every acceptance number is auditable from here.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Riccati residual gate for every table entry
    pub riccati_residual: f64,
    /// assembled vs oracle energy gap, per level
    pub spectrum: f64,
    /// intertwining residual on oscillator test states
    pub intertwining: f64,
    /// commutator residuals of the polynomial algebra (relative)
    pub commutator: f64,
    /// ladder-annihilation norms of the missing states
    pub missing_annihilation: f64,
    /// number-operator bracket vs the factored polynomial (relative)
    pub number_relative: f64,
    /// measured linearized coefficients vs sqrt(n), sqrt(n+1)
    pub linearized: f64,
    /// SUSY block anticommutator residual
    pub anticommutator: f64,
    /// H_ss eigenvalue / product-form residual (relative)
    pub hss_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            riccati_residual: TABLE_RESIDUAL_GATE,
            spectrum: 1e-3,
            intertwining: 1e-3,
            commutator: 5e-3,
            missing_annihilation: 1e-3,
            number_relative: 1e-2,
            linearized: 1e-2,
            anticommutator: 1e-3,
            hss_relative: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn with_overrides(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut t = Tolerances::default();
        for (k, &v) in map {
            match k.as_str() {
                "riccati_residual" => t.riccati_residual = v,
                "spectrum" => t.spectrum = v,
                "intertwining" => t.intertwining = v,
                "commutator" => t.commutator = v,
                "missing_annihilation" => t.missing_annihilation = v,
                "number_relative" => t.number_relative = v,
                "linearized" => t.linearized = v,
                "anticommutator" => t.anticommutator = v,
                "hss_relative" => t.hss_relative = v,
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown tolerance name '{k}'"
                    )))
                }
            }
        }
        Ok(t)
    }

    pub fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("riccati_residual".into(), self.riccati_residual),
            ("spectrum".into(), self.spectrum),
            ("intertwining".into(), self.intertwining),
            ("commutator".into(), self.commutator),
            ("missing_annihilation".into(), self.missing_annihilation),
            ("number_relative".into(), self.number_relative),
            ("linearized".into(), self.linearized),
            ("anticommutator".into(), self.anticommutator),
            ("hss_relative".into(), self.hss_relative),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of a single verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub status: CheckStatus,
    pub tolerance: f64,
    pub residuals: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl CheckOutcome {
    fn skipped() -> Self {
        CheckOutcome {
            status: CheckStatus::Skipped,
            tolerance: f64::NAN,
            residuals: BTreeMap::new(),
            note: None,
        }
    }
}

/// Machine-readable run report; the key set is identical for every run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub admissible: bool,
    /// description of the first singularity when inadmissible
    pub singularity: Option<String>,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub wall_times_s: BTreeMap<String, f64>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub exit_code: i32,
}

/// What the subcommands do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// artifacts + checks
    Full,
    /// artifacts only
    BuildOnly,
    /// checks only
    VerifyOnly,
    /// spectrum.csv only
    SpectrumOnly,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::InvalidConfig(format!("io: {e}")))
}

fn empty_checks() -> BTreeMap<String, CheckOutcome> {
    CheckKind::ALL
        .iter()
        .map(|c| (c.name().to_string(), CheckOutcome::skipped()))
        .collect()
}

struct Artifacts {
    table: SuperpotentialTable,
    states: Vec<EigenState>,
    oracle_energies: Vec<f64>,
}

fn build_artifacts(config: &RunConfig, grid: Grid) -> Result<Artifacts> {
    let fc = config.factorization_config()?;
    let table = if fc.order() == 0 {
        SuperpotentialTable::trivial(grid)
    } else {
        SuperpotentialTable::build(fc, grid)?
    };
    let states = spectrum_assemble(&table, config.n_max)?;
    let h = build_hamiltonian(&table.potential(table.order()).values)?;
    let oracle = tridiagonal_eigensolve(&h, states.len())?;
    Ok(Artifacts {
        table,
        states,
        oracle_energies: oracle.eigenvalues,
    })
}

fn write_potential_csv(a: &Artifacts, out: &Path) -> Result<()> {
    let grid = a.table.grid();
    let m = a.table.order();
    let mut s = String::from("x,V0,Vm\n");
    for i in 0..grid.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt17(grid.x(i)),
            fmt17(a.table.potential(0).values.values()[i]),
            fmt17(a.table.potential(m).values.values()[i]),
        );
    }
    write_file(&out.join("potential.csv"), &s)
}

fn write_alphas_csv(a: &Artifacts, out: &Path) -> Result<()> {
    let grid = a.table.grid();
    let m = a.table.order();
    let mut s = String::from("x");
    for i in 1..=m {
        let _ = write!(s, ",alpha_{i}");
    }
    s.push('\n');
    for i in 0..grid.len() {
        let _ = write!(s, "{}", fmt17(grid.x(i)));
        for j in 1..=m {
            let _ = write!(s, ",{}", fmt17(a.table.alpha_diag(j).values()[i]));
        }
        s.push('\n');
    }
    write_file(&out.join("alphas.csv"), &s)
}

fn write_spectrum_csv(a: &Artifacts, out: &Path) -> Result<()> {
    let mut s = String::from("index,energy,provenance,oracle_energy,abs_delta\n");
    for (i, st) in a.states.iter().enumerate() {
        let oracle = a.oracle_energies[i];
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i,
            fmt17(st.energy),
            st.provenance.label(),
            fmt17(oracle),
            fmt17((st.energy - oracle).abs()),
        );
    }
    write_file(&out.join("spectrum.csv"), &s)
}

fn write_states_csv(a: &Artifacts, out: &Path) -> Result<()> {
    let grid = a.table.grid();
    let k = a.states.len().min(8);
    let mut s = String::from("x");
    for i in 0..k {
        let _ = write!(s, ",psi_{i}");
    }
    s.push('\n');
    let fixed: Vec<EigenState> = a.states.iter().take(k).map(|st| st.sign_fixed()).collect();
    for i in 0..grid.len() {
        let _ = write!(s, "{}", fmt17(grid.x(i)));
        for st in &fixed {
            let _ = write!(s, ",{}", fmt17(st.wavefunction.values()[i]));
        }
        s.push('\n');
    }
    write_file(&out.join("states.csv"), &s)
}

fn run_checks(
    a: &Artifacts,
    config: &RunConfig,
    tol: &Tolerances,
    selected: &[CheckKind],
    checks: &mut BTreeMap<String, CheckOutcome>,
    times: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let grid = a.table.grid();
    let m = a.table.order();

    for kind in selected {
        let started = Instant::now();
        let outcome = match kind {
            CheckKind::Riccati => {
                let max = a.table.max_residual();
                CheckOutcome {
                    status: if max <= tol.riccati_residual {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    tolerance: tol.riccati_residual,
                    residuals: BTreeMap::from([("max_table_residual".into(), max)]),
                    note: None,
                }
            }
            CheckKind::Spectrum => {
                let mut max_delta = 0.0_f64;
                for (st, oracle) in a.states.iter().zip(&a.oracle_energies) {
                    max_delta = max_delta.max((st.energy - oracle).abs());
                }
                CheckOutcome {
                    status: if max_delta <= tol.spectrum {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    tolerance: tol.spectrum,
                    residuals: BTreeMap::from([("max_energy_delta".into(), max_delta)]),
                    note: None,
                }
            }
            CheckKind::Intertwining => {
                let set = build_ladder_set(&a.table)?;
                let test: Vec<EigenState> = (0..=5)
                    .map(|n| oscillator_state(n, grid))
                    .collect::<Result<_>>()?;
                let rep = verify_intertwining(&set, &test)?;
                CheckOutcome {
                    status: if rep.max_residual <= tol.intertwining {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    tolerance: tol.intertwining,
                    residuals: BTreeMap::from([("max_residual".into(), rep.max_residual)]),
                    note: None,
                }
            }
            CheckKind::Algebra => {
                let set = build_ladder_set(&a.table)?;
                let lowest: Vec<EigenState> = a.states.iter().take(7).cloned().collect();
                let rep = verify_polynomial_algebra(&set, &lowest)?;
                let missing_max = rep
                    .missing_annihilation
                    .iter()
                    .map(|(_, d, dd)| d.max(*dd))
                    .fold(0.0_f64, f64::max);
                let pass = rep.max_lowering <= tol.commutator
                    && rep.max_raising <= tol.commutator
                    && rep.max_commutator <= tol.commutator
                    && missing_max <= tol.missing_annihilation;
                CheckOutcome {
                    status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
                    tolerance: tol.commutator,
                    residuals: BTreeMap::from([
                        ("max_lowering".into(), rep.max_lowering),
                        ("max_raising".into(), rep.max_raising),
                        ("max_commutator".into(), rep.max_commutator),
                        ("missing_annihilation_max".into(), missing_max),
                    ]),
                    note: None,
                }
            }
            CheckKind::Number => {
                let set = build_ladder_set(&a.table)?;
                let rep = verify_number_operator(&set, &a.states)?;
                CheckOutcome {
                    status: if rep.max_relative <= tol.number_relative {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    tolerance: tol.number_relative,
                    residuals: BTreeMap::from([("max_relative".into(), rep.max_relative)]),
                    note: None,
                }
            }
            CheckKind::Linearized => {
                let set = build_ladder_set(&a.table)?;
                let basis: Vec<EigenState> = (0..=6)
                    .map(|n| transformed_state(&a.table, n, m))
                    .collect::<Result<_>>()?;
                let mut max_dev = 0.0_f64;
                for n in 0..=5usize {
                    let low = linearized_action(&set, &basis, LadderDirection::Lower, n)?;
                    let expected = (n as f64).sqrt();
                    max_dev = max_dev.max((low.coefficient - expected).abs());
                    let up = linearized_action(&set, &basis, LadderDirection::Raise, n)?;
                    let expected = (n as f64 + 1.0).sqrt();
                    max_dev = max_dev.max((up.coefficient - expected).abs());
                }
                CheckOutcome {
                    status: if max_dev <= tol.linearized {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    tolerance: tol.linearized,
                    residuals: BTreeMap::from([("max_coefficient_deviation".into(), max_dev)]),
                    note: None,
                }
            }
            CheckKind::SusyBlock => {
                let set = build_ladder_set(&a.table)?;
                let mut blocks = Vec::new();
                for n in 0..=3usize {
                    blocks.push(BlockVector::from_upper(&transformed_state(
                        &a.table, n, m,
                    )?));
                    blocks.push(BlockVector::from_lower(&oscillator_state(
                        n, grid,
                    )?));
                }
                blocks.push(BlockVector::mixed(
                    &transformed_state(&a.table, 1, m)?,
                    &oscillator_state(2, grid)?,
                ));
                let rep = verify_susy_block(&set, &blocks)?;
                let pass = rep.max_anticommutator <= tol.anticommutator
                    && rep.max_closure <= tol.anticommutator
                    && rep.max_hss_vs_product <= tol.hss_relative
                    && rep.max_eigenvalue_relative <= tol.hss_relative;
                CheckOutcome {
                    status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
                    tolerance: tol.hss_relative,
                    residuals: BTreeMap::from([
                        ("max_anticommutator".into(), rep.max_anticommutator),
                        ("max_closure".into(), rep.max_closure),
                        ("max_hss_vs_product".into(), rep.max_hss_vs_product),
                        ("max_eigenvalue_relative".into(), rep.max_eigenvalue_relative),
                    ]),
                    note: None,
                }
            }
            CheckKind::LadderStructure => {
                let flags: Vec<bool> = (1..=m)
                    .map(|j| missing_state(&a.table, j).map(|s| s.normalizable))
                    .collect::<Result<_>>()?;
                let (roots, root_flags) = number_roots_with_flags(a.table.config(), &flags);
                match analyze_ladder_structure(&roots, &root_flags) {
                    Ok(from_roots) => {
                        let from_spectrum = ladder_structure_from_spectrum(&a.states);
                        let agree = from_roots.matches(&from_spectrum, 1e-9);
                        CheckOutcome {
                            status: if agree { CheckStatus::Pass } else { CheckStatus::Fail },
                            tolerance: 1e-9,
                            residuals: BTreeMap::from([(
                                "ladder_count_delta".into(),
                                (from_roots.ladders.len() as f64
                                    - from_spectrum.ladders.len() as f64)
                                    .abs(),
                            )]),
                            note: None,
                        }
                    }
                    Err(Error::DuplicateRoot { value }) => CheckOutcome {
                        status: CheckStatus::Skipped,
                        tolerance: 1e-9,
                        residuals: BTreeMap::new(),
                        note: Some(format!(
                            "number polynomial has coincident roots at {value}; \
                             the classifier needs distinct roots"
                        )),
                    },
                    Err(e) => return Err(e),
                }
            }
        };
        let _ = config; // config currently only steers which checks run
        times.insert(format!("check_{}", kind.name()), started.elapsed().as_secs_f64());
        checks.insert(kind.name().to_string(), outcome);
    }
    Ok(())
}

/// Executes a run configuration. IO failures surface as errors; admissibility
/// and numerical failures are encoded in the outcome's report and exit code.
pub fn execute(
    config: &RunConfig,
    out_dir: &Path,
    mode: RunMode,
    checks_override: Option<Vec<CheckKind>>,
) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::InvalidConfig(format!("io: {e}")))?;

    let tol = match &config.tolerances {
        Some(map) => Tolerances::with_overrides(map)?,
        None => Tolerances::default(),
    };
    let mut report = Report {
        config: config.clone(),
        tolerances: tol.to_map(),
        admissible: false,
        singularity: None,
        checks: empty_checks(),
        wall_times_s: BTreeMap::new(),
        passed: false,
    };

    let finish = |report: Report, exit_code: i32, out_dir: &Path| -> Result<RunOutcome> {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::InvalidConfig(format!("report serialization: {e}")))?;
        write_file(&out_dir.join("report.json"), &(json + "\n"))?;
        Ok(RunOutcome { report, exit_code })
    };

    // configuration validation
    let fc = match config.factorization_config() {
        Ok(fc) => fc,
        Err(e) => {
            report.singularity = Some(e.to_string());
            return finish(report, 2, out_dir);
        }
    };
    let grid = match config.grid_object() {
        Ok(g) => g,
        Err(e) => {
            report.singularity = Some(e.to_string());
            return finish(report, 2, out_dir);
        }
    };

    // admissibility scan before any construction
    let scan_started = Instant::now();
    let scan = match singularity_scan(&fc, &grid) {
        Ok(s) => s,
        Err(e) => {
            report.singularity = Some(e.to_string());
            return finish(report, e.exit_code(), out_dir);
        }
    };
    report
        .wall_times_s
        .insert("singularity_scan".into(), scan_started.elapsed().as_secs_f64());
    if !scan.admissible {
        let (level, target, x) = scan.first_singularity.expect("inadmissible implies location");
        report.singularity = Some(format!(
            "singular chain entry at level {level}, target energy index {target}, near x = {x}"
        ));
        return finish(report, 2, out_dir);
    }
    report.admissible = true;

    // construction
    let build_started = Instant::now();
    let artifacts = match build_artifacts(config, grid) {
        Ok(a) => a,
        Err(e) => {
            report.singularity = Some(e.to_string());
            return finish(report, e.exit_code(), out_dir);
        }
    };
    report
        .wall_times_s
        .insert("construction".into(), build_started.elapsed().as_secs_f64());

    // artifacts
    if matches!(mode, RunMode::Full | RunMode::BuildOnly | RunMode::SpectrumOnly) {
        let io_started = Instant::now();
        write_spectrum_csv(&artifacts, out_dir)?;
        if !matches!(mode, RunMode::SpectrumOnly) {
            write_potential_csv(&artifacts, out_dir)?;
            write_alphas_csv(&artifacts, out_dir)?;
            write_states_csv(&artifacts, out_dir)?;
        }
        report
            .wall_times_s
            .insert("artifacts".into(), io_started.elapsed().as_secs_f64());
    }

    // checks
    let mut exit_code = 0;
    if matches!(mode, RunMode::Full | RunMode::VerifyOnly) {
        let selected: Vec<CheckKind> = checks_override
            .or_else(|| config.checks.clone())
            .unwrap_or_else(|| CheckKind::ALL.to_vec());
        let checks_started = Instant::now();
        if let Err(e) = run_checks(
            &artifacts,
            config,
            &tol,
            &selected,
            &mut report.checks,
            &mut report.wall_times_s,
        ) {
            report.singularity = Some(e.to_string());
            return finish(report, e.exit_code(), out_dir);
        }
        report
            .wall_times_s
            .insert("checks_total".into(), checks_started.elapsed().as_secs_f64());
        let any_fail = report
            .checks
            .values()
            .any(|c| c.status == CheckStatus::Fail);
        report.passed = !any_fail;
        exit_code = i32::from(any_fail);
    } else {
        report.passed = true;
    }

    finish(report, exit_code, out_dir)
}

/// One sample of the admissibility sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub nu: f64,
    pub admissible: bool,
    pub first_singularity_x: Option<f64>,
}

/// Varies nu over [nu_from, nu_to] at fixed epsilon (first-order chain) and
/// reports the admissibility verdict per sample; writes sweep.csv.
pub fn sweep(
    epsilon: f64,
    nu_from: f64,
    nu_to: f64,
    nu_step: f64,
    grid: Grid,
    out_dir: &Path,
) -> Result<Vec<SweepRow>> {
    if !(nu_step > 0.0 && nu_to >= nu_from) {
        return Err(Error::InvalidConfig(format!(
            "bad sweep range [{nu_from}, {nu_to}] step {nu_step}"
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::InvalidConfig(format!("io: {e}")))?;
    let steps = ((nu_to - nu_from) / nu_step).round() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let nu = nu_from + i as f64 * nu_step;
        let fc = FactorizationConfig::new(vec![(epsilon, nu)])?;
        let scan = singularity_scan(&fc, &grid)?;
        rows.push(SweepRow {
            nu,
            admissible: scan.admissible,
            first_singularity_x: scan.first_singularity.map(|(_, _, x)| x),
        });
    }
    let mut s = String::from("nu,admissible,first_singularity_x\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt17(r.nu),
            r.admissible,
            r.first_singularity_x.map_or(String::new(), fmt17),
        );
    }
    write_file(&out_dir.join("sweep.csv"), &s)?;
    Ok(rows)
}
