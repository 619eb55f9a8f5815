use hsusy::algebra::{build_ladder_set, verify_number_operator, verify_polynomial_algebra};
use hsusy::chain::{FactorizationConfig, SuperpotentialTable};
use hsusy::numerics::Grid;
use hsusy::states::spectrum_assemble;

fn run(entries: Vec<(f64, f64)>, n_points: usize) -> (f64, f64, f64, f64) {
    let g = Grid::symmetric(12.0, n_points).unwrap();
    let t = SuperpotentialTable::build(FactorizationConfig::new(entries).unwrap(), g).unwrap();
    let set = build_ladder_set(&t).unwrap();
    let states = spectrum_assemble(&t, 6).unwrap();
    let lowest: Vec<_> = states.iter().take(7).cloned().collect();
    let rep = verify_polynomial_algebra(&set, &lowest).unwrap();
    let nrep = verify_number_operator(&set, &lowest).unwrap();
    let miss = rep.missing_annihilation.iter().map(|(_, d, dd)| d.max(*dd)).fold(0.0_f64, f64::max);
    (rep.max_lowering.max(rep.max_raising), rep.max_commutator, miss, nrep.max_relative)
}

fn main() {
    for np in [2401usize, 4801, 9601, 16001] {
        let (low, comm, miss, num) = run(vec![(0.0, 0.3), (-1.2, 1.5)], np);
        println!("m=2 n={np}: ladder={low:.2e} comm={comm:.2e} missing={miss:.2e} number={num:.2e}");
    }
    for np in [2401usize, 4801] {
        let (low, comm, miss, num) = run(vec![(0.2, 0.4), (-0.85, 1.3), (-1.9, 0.3)], np);
        println!("m=3 n={np}: ladder={low:.2e} comm={comm:.2e} missing={miss:.2e} number={num:.2e}");
    }
}
