//! Property tests for the exponent algebra, the tensors and the monotone scheme.

use proptest::prelude::*;

use disperse::exponents::{burgers_exponents, identity_residuals, monomial_exponents, Exponent};
use disperse::harness::fit_decay;
use disperse::io::{field_from_csv, field_to_csv};
use disperse::solver::{
    cfl_dt, eo_flux, monomial_flux, step, Boundary, Field, FluxSpec, Grid, SolverConfig,
};
use disperse::tensors::{burgers_tensor, monomial_tensor};

/// Rounding slack for order relations after one step.
const ORDER_SLACK: f64 = 1e-13;
/// Rounding slack for sums over a few hundred cells.
const SUM_SLACK: f64 = 1e-12;

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = Exponent> {
    (lo..hi).prop_map(Exponent::Finite)
}

/// `p < q < r`, with `r` sometimes infinite.
fn triple() -> impl Strategy<Value = (Exponent, Exponent, Exponent)> {
    (1.0..6.0f64, 0.01..6.0f64, prop::option::weighted(0.8, 0.01..6.0f64)).prop_map(|(p, dq, dr)| {
        let q = p + dq;
        let r = dr.map_or(Exponent::Infinite, |d| Exponent::Finite(q + d));
        (Exponent::Finite(p), Exponent::Finite(q), r)
    })
}

fn flux_spec() -> impl Strategy<Value = Vec<u32>> {
    prop_oneof![
        Just(vec![1]),
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![1, 2]),
        Just(vec![1, 3]),
        Just(vec![2, 3]),
    ]
}

fn grid_for(n: usize) -> Grid {
    let cells = if n == 1 { vec![64] } else { vec![16, 16] };
    let h = 1.0 / cells[0] as f64;
    Grid::new(cells, vec![h; n], vec![0.0; n]).unwrap()
}

fn config(k: Vec<u32>, boundary: Boundary) -> SolverConfig {
    SolverConfig::new(FluxSpec::new(k).unwrap(), 0.8, 1.0, Vec::new(), boundary).unwrap()
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Outflow), Just(Boundary::Periodic)]
}

/// Flux, boundary and a pair of ordered fields `u <= v` on a small grid.
fn ordered_pair() -> impl Strategy<Value = (Vec<u32>, Boundary, Field, Field)> {
    (flux_spec(), boundary()).prop_flat_map(|(k, b)| {
        let grid = grid_for(k.len());
        let len = grid.len();
        (
            prop::collection::vec(-1.0..1.0f64, len),
            prop::collection::vec(0.0..0.5f64, len),
        )
            .prop_map(move |(u, gap)| {
                let v: Vec<f64> = u.iter().zip(&gap).map(|(a, g)| a + g).collect();
                let u = Field::new(grid.clone(), u).unwrap();
                let v = Field::new(grid.clone(), v).unwrap();
                (k.clone(), b, u, v)
            })
    })
}

fn common_dt(u: &Field, v: &Field, cfg: &SolverConfig) -> f64 {
    cfl_dt(u, cfg, 0.0).min(cfl_dt(v, cfg, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn holder_and_composition_identities((p, q, r) in triple(), n in 1usize..=3) {
        let res = identity_residuals(p, q, r, n).unwrap();
        prop_assert!(res.max() <= 1e-12, "{res:?}");
    }

    #[test]
    fn monomial_exponents_reduce_to_burgers(p in finite(1.0, 8.0), dq in 0.0..8.0f64, n in 1usize..=3) {
        let q = Exponent::Finite(p.value() + dq);
        let k: Vec<u32> = (1..=n as u32).collect();
        let m = monomial_exponents(p, q, &k).unwrap();
        let b = burgers_exponents(p, q, n).unwrap();
        prop_assert!((m.alpha - b.alpha).abs() <= 1e-12 * b.alpha.abs().max(1.0));
        prop_assert!((m.beta - b.beta).abs() <= 1e-12 * b.beta.abs().max(1.0));
        prop_assert!(m.admissible);
    }

    #[test]
    fn decay_exponents_are_in_range((p, q, _) in triple(), n in 1usize..=3) {
        let e = burgers_exponents(p, q, n).unwrap();
        prop_assert!(e.alpha > 0.0 && e.alpha <= 1.0 + 1e-15, "alpha = {}", e.alpha);
        prop_assert!(e.beta >= 0.0, "beta = {}", e.beta);
        let same = burgers_exponents(p, p, n).unwrap();
        prop_assert!((same.alpha - 1.0).abs() <= 1e-15 && same.beta.abs() <= 1e-15);
    }

    #[test]
    fn burgers_tensor_is_spd_with_homogeneous_determinant(
        a in 0.25..4.0f64, p in 1.0..4.0f64, n in 1usize..=3,
    ) {
        let t = burgers_tensor(a, p, n).unwrap();
        prop_assert!(t.spd);
        prop_assert!((t.det - t.scaled_det()).abs() <= 1e-8 * t.scaled_det());
    }

    #[test]
    fn monomial_tensor_is_spd(a in 0.5..2.0f64, p in 1.0..4.0f64, k in flux_spec()) {
        let t = monomial_tensor(a, p, &k).unwrap();
        prop_assert!(t.spd);
        prop_assert!((t.det - t.scaled_det()).abs() <= 1e-8 * t.scaled_det());
    }

    #[test]
    fn eo_flux_is_consistent_and_monotone(
        a in -2.0..2.0f64, b in -2.0..2.0f64, da in 0.0..1.0f64, k in 1u32..=4,
    ) {
        let f = monomial_flux(a, k);
        prop_assert!((eo_flux(a, a, k) - f).abs() <= 1e-14 * f.abs().max(1.0));
        prop_assert!(eo_flux(a + da, b, k) >= eo_flux(a, b, k));
        prop_assert!(eo_flux(a, b + da, k) <= eo_flux(a, b, k));
    }

    #[test]
    fn step_preserves_bounds_order_and_l1((k, b, u, v) in ordered_pair()) {
        let cfg = config(k, b);
        let dt = common_dt(&u, &v, &cfg);
        let su = step(&u, dt, &cfg).unwrap();
        let sv = step(&v, dt, &cfg).unwrap();

        // Outflow extends by constants, so the bounds include the boundary states.
        prop_assert!(su.max() <= u.max() + ORDER_SLACK && su.min() >= u.min() - ORDER_SLACK);
        for (x, y) in su.values().iter().zip(sv.values()) {
            prop_assert!(x <= &(y + ORDER_SLACK));
        }
        if b == Boundary::Periodic {
            let before: f64 = u.values().iter().zip(v.values()).map(|(x, y)| (x - y).abs()).sum();
            let after: f64 = su.values().iter().zip(sv.values()).map(|(x, y)| (x - y).abs()).sum();
            prop_assert!(after <= before + SUM_SLACK, "{after} > {before}");
            prop_assert!((su.mass() - u.mass()).abs() <= SUM_SLACK);
        }
    }

    #[test]
    fn fit_recovers_exact_power_laws(slope in -3.0..0.0f64, c in 0.1..10.0f64) {
        let times: Vec<f64> = (0..12).map(|i| 2f64.powi(i)).collect();
        let values: Vec<f64> = times.iter().map(|t| c * t.powf(slope)).collect();
        let fit = fit_decay(&times, &values, (1.0, 4096.0)).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-12);
        prop_assert!((fit.prefactor - c).abs() <= 1e-10 * c);
    }

    #[test]
    fn snapshot_csv_round_trips(values in prop::collection::vec(-1e3..1e3f64, 48), t in 0.0..100.0f64) {
        let grid = Grid::new(vec![6, 8], vec![0.125, 0.3], vec![-1.0, 2.5]).unwrap();
        let field = Field::new(grid, values).unwrap();
        let (back, t_back) = field_from_csv(&field_to_csv(&field, t)).unwrap();
        prop_assert_eq!(back, field);
        prop_assert_eq!(t_back, t);
    }
}

#[test]
fn steps_are_independent_of_thread_count() {
    let grid = Grid::new(vec![48, 48], vec![1.0 / 48.0; 2], vec![0.0; 2]).unwrap();
    let u = Field::from_fn(grid, |x| (7.0 * x[0]).sin() * (3.0 * x[1]).cos() + 0.2);
    let cfg = config(vec![1, 2], Boundary::Periodic);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut f = u.clone();
            for _ in 0..20 {
                let dt = cfl_dt(&f, &cfg, 0.0);
                f = step(&f, dt, &cfg).unwrap();
            }
            f.into_values()
        })
    };
    let one = run(1);
    let four = run(4);
    assert!(one.iter().zip(&four).all(|(a, b)| a.to_bits() == b.to_bits()));
}
