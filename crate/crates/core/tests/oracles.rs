//! Numerical runs checked against closed-form solutions.

use disperse::harness::{fit_decay, run_contraction, ExperimentConfig, ExperimentKind};
use disperse::observables::{fundamental_field, l1_distance, Observers};
use disperse::solver::{
    geometric_times, initial_data, solve, Boundary, FluxSpec, Grid, InitialData, SolverConfig,
};

#[test]
fn fundamental_support_grows_like_sqrt_t() {
    let grid = Grid::new(vec![2048], vec![1.0 / 512.0], vec![-0.5]).unwrap();
    let seed = InitialData::FundamentalSeed { mass: 1.0, width: 0.02, corner: None };
    let u0 = initial_data(&seed, &grid).unwrap();
    let mut times = vec![0.0];
    times.extend(geometric_times(0.25, 4.0, 12));
    let config =
        SolverConfig::new(FluxSpec::burgers(1), 0.8, 4.0, times.clone(), Boundary::Outflow).unwrap();
    let report = solve(&u0, &config, &Observers::default()).unwrap();

    let widths = &report.support_widths[0];
    let fit = fit_decay(&report.times, widths, (0.25, 4.0)).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.02, "slope {}", fit.slope);
    assert!((fit.prefactor - 2f64.sqrt()).abs() < 0.05, "prefactor {}", fit.prefactor);

    assert!((report.final_field.mass() - 1.0).abs() < 1e-12);
    let exact = fundamental_field(1.0, 4.0, &report.final_field).unwrap();
    assert!(l1_distance(&report.final_field, &exact).unwrap() < 0.02);
    let sup = (2.0_f64 / 4.0).sqrt();
    assert!((report.final_field.max() - sup).abs() < 0.02 * sup);
}

#[test]
fn identical_data_stay_identical() {
    let mut cfg = ExperimentConfig::builtin(ExperimentKind::Contraction);
    cfg.analysis.other = None;
    let out = run_contraction(&cfg).unwrap();
    assert!(out.identical);
    assert!(out.checks.iter().all(|c| c.pass));
}
