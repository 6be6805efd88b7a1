use std::path::Path;

use proptest::prelude::*;

use stratiwave::axis::GRAVITY;
use stratiwave::config::Config;
use stratiwave::diagnostics::{monotonicity_check, symmetry_residual_height};
use stratiwave::pipeline::{run_forward, run_recover};
use stratiwave::profiles::{BernoulliFunction, DensityProfile, Polynomial};
use stratiwave::recovery::{pde_residual, recover_series, RecoveryOptions};
use stratiwave::reference::height::{perturbed_seed, HeightField};
use stratiwave::reference::laminar::solve_laminar;
use stratiwave::series::{EvenSeries, Grid, NodalFunction, SeriesRecord};

fn series(coeffs: &[Vec<f64>]) -> EvenSeries {
    let grid = Grid::new(coeffs[0].len(), -1.0, 0.0).unwrap();
    EvenSeries::new(coeffs.iter().map(|v| NodalFunction::new(grid.clone(), v.clone()).unwrap()).collect()).unwrap()
}

fn coeff_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6, 4usize..12).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(-1.0..1.0f64, m), n))
}

/// A small laminar Newton seed on which the diagnostics can be exercised.
fn seed(a: f64) -> HeightField {
    let rho = DensityProfile::homogeneous(1.0);
    let lam = solve_laminar(&rho, &BernoulliFunction::zero(), 1.0, 20.6, GRAVITY).unwrap();
    perturbed_seed(&lam, 16, 8, a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn series_is_even_in_x(c in coeff_strategy(), x in -1.0..1.0f64, t in 0.0..1.0f64) {
        let s = series(&c);
        let y = -t;
        prop_assert_eq!(s.eval(x, y).unwrap(), s.eval(-x, y).unwrap());
        prop_assert_eq!(s.eval_dx(x, y).unwrap(), -s.eval_dx(-x, y).unwrap());
    }

    #[test]
    fn series_record_round_trips(c in coeff_strategy()) {
        let s = series(&c);
        let json = serde_json::to_string(&s.to_record()).unwrap();
        let back = EvenSeries::from_record(&serde_json::from_str::<SeriesRecord>(&json).unwrap()).unwrap();
        for (a, b) in s.coeffs().iter().zip(back.coeffs()) {
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn laminar_data_recovers_x_independent_series(s in -0.3..0.0f64, q in 21.0..30.0f64) {
        let rho = DensityProfile::new(Polynomial::new(vec![1.0, s / 10.0]).unwrap());
        let beta = BernoulliFunction::zero();
        let lam = solve_laminar(&rho, &beta, 1.0, q, GRAVITY).unwrap();
        let axis = lam.axis_data(32, 1.0, 0.0).unwrap();
        let (a0, p0) = stratiwave::axis::solve_axis_streamfunction(&axis, &rho, 32, stratiwave::axis::SUBSTEPS_PER_INTERVAL).unwrap();
        let params = stratiwave::axis::WaveParameters { c: 1.0, d: 1.0, g: GRAVITY, p_atm: 0.0, p0, q_head: q };
        let rec = recover_series(&a0, &rho, &beta, &params, &RecoveryOptions::default()).unwrap();
        for n in 1..rec.series.coeffs().len() {
            prop_assert!(rec.series.coeff(n).sup_norm() <= 1e-8, "a_{} = {}", 2 * n, rec.series.coeff(n).sup_norm());
        }
        prop_assert!(pde_residual(&rec.series, &rho, &beta, GRAVITY, 0.5, 11).normalized <= 1e-8);
    }

    // an even perturbation keeps the mirror residual at zero, an odd one
    // shows up at its own size
    #[test]
    fn symmetry_residual_sees_only_odd_part(eps in 1e-6..1e-3f64, k in 1usize..4) {
        let base = seed(1e-3);
        let bump = |odd: bool| {
            let mut f = base.clone();
            for i in 1..f.np() {
                for j in 0..f.nq() {
                    let arg = k as f64 * f.q(j);
                    f.h[[i, j]] += eps * if odd { arg.sin() } else { arg.cos() };
                }
            }
            f
        };
        prop_assert!(symmetry_residual_height(&bump(false)).unwrap().residual <= 1e-12);
        let odd = symmetry_residual_height(&bump(true)).unwrap().residual;
        prop_assert!(odd >= eps * 0.5 && odd <= eps * 2.0 + 1e-12, "odd residual {odd} for eps {eps}");
    }

    #[test]
    fn diagnostics_leave_field_untouched(a in 1e-4..1e-2f64) {
        let f = seed(a);
        let before = f.h.clone();
        let r1 = symmetry_residual_height(&f).unwrap().residual;
        let m1 = monotonicity_check(&f).pass;
        prop_assert_eq!(&f.h, &before);
        prop_assert_eq!(symmetry_residual_height(&f).unwrap().residual, r1);
        prop_assert_eq!(monotonicity_check(&f).pass, m1);
    }
}

#[test]
fn pipeline_forward_then_recover_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = Config::load(&configs.join("stratified_laminar.json")).unwrap();
    let fwd = run_forward(&cfg, dir.path()).unwrap();
    assert_eq!(fwd.report.exit_code, 0);
    let next = Config::load(&dir.path().join("recover.json")).unwrap();
    let rec = run_recover(&next, &dir.path().join("rec")).unwrap();
    assert_eq!(rec.report.exit_code, 0, "{:?}", rec.report.checks);
    let text = std::fs::read_to_string(dir.path().join("rec/psi_series.json")).unwrap();
    let s = EvenSeries::from_record(&serde_json::from_str(&text).unwrap()).unwrap();
    for n in 1..=s.truncation_order() {
        assert!(s.coeff(n).sup_norm() <= 1e-8);
    }
}
