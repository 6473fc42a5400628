mod common;

use nosestretch_core::optimizer::solve_radial_1d;
use nosestretch_core::resistance::PressureModel;

#[test]
fn radial_solution_matches_dp_oracle() {
    let sol = solve_radial_1d(1.0, 1.0, &PressureModel::Newton, 200).unwrap();
    let (dp, flat) = common::radial_dp(1.0, 1.0, |p| 1.0 / (1.0 + p * p), 200, 200, 5.0);
    let rel = (sol.resistance - dp).abs() / dp;
    eprintln!("radial {} dp {} rel {rel:e} flat {} dp flat {flat}", sol.resistance, dp, sol.flat_radius);
    assert!(rel < 5e-3);
    assert!(flat > 0.0 && sol.flat_radius > 0.0);
    assert!((sol.flat_radius - flat).abs() < 0.05);
}

#[test]
fn radial_profile_is_admissible() {
    let sol = solve_radial_1d(1.0, 1.0, &PressureModel::Newton, 400).unwrap();
    assert!(sol.slopes.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    assert!(sol.phi.iter().all(|v| *v >= 0.0 && *v <= 1.0 + 1e-12));
    assert_eq!(sol.phi[0], 0.0);
}
