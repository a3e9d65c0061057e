//! Randomized property tests complementing the fixed oracles in the unit
//! tests and the acceptance gate.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use randinfer::estimators::{Estimator, Population};
use randinfer::martingale::freedman_radius;
use randinfer::qcore::{pinv, DEFAULT_TOL};
use randinfer::swap::{swap_delta, SwapConfig};
use randinfer::util;

const PENROSE_TOL: f64 = 1e-7;

fn small_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-5.0..5.0f64, r * c)
            .prop_map(move |v| DMatrix::from_vec(r, c, v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pinv_satisfies_penrose_conditions(a in small_matrix()) {
        let ap = pinv(&a, DEFAULT_TOL);
        let aapa = &a * &ap * &a;
        let apaap = &ap * &a * &ap;
        prop_assert!((&aapa - &a).norm() <= PENROSE_TOL * (1.0 + a.norm()));
        prop_assert!((&apaap - &ap).norm() <= PENROSE_TOL * (1.0 + ap.norm()));
        let sym1 = &a * &ap;
        let sym2 = &ap * &a;
        prop_assert!((&sym1 - &sym1.transpose()).norm() <= PENROSE_TOL * (1.0 + sym1.norm()));
        prop_assert!((&sym2 - &sym2.transpose()).norm() <= PENROSE_TOL * (1.0 + sym2.norm()));
    }

    #[test]
    fn freedman_radius_is_monotone(
        v in 0.0..10.0f64,
        r in 0.0..10.0f64,
        dv in 0.0..5.0f64,
        dr in 0.0..5.0f64,
        delta in 0.01..0.5f64,
    ) {
        let base = freedman_radius(v, r, delta).unwrap();
        prop_assert!(freedman_radius(v + dv, r, delta).unwrap() >= base);
        prop_assert!(freedman_radius(v, r + dr, delta).unwrap() >= base);
        // Shrinking delta can only widen the radius.
        prop_assert!(freedman_radius(v, r, delta / 2.0).unwrap() >= base);
    }

    #[test]
    fn quantile_stays_within_range(
        mut xs in proptest::collection::vec(-100.0..100.0f64, 1..40),
        q in 0.0..1.0f64,
    ) {
        let v = util::quantile(&xs, q);
        xs.sort_by(f64::total_cmp);
        prop_assert!(v >= xs[0] - 1e-12 && v <= xs[xs.len() - 1] + 1e-12);
    }

    #[test]
    fn swap_delta_matches_direct_recomputation(
        seed_vals in proptest::collection::vec(-3.0..3.0f64, 6 * 3 + 12),
        n1 in 2usize..5,
        pick in (0usize..100, 0usize..100),
    ) {
        let n = 6;
        let p = 3;
        let x = DMatrix::from_vec(n, p, seed_vals[..n * p].to_vec());
        let y1 = DVector::from_vec(seed_vals[n * p..n * p + n].to_vec());
        let y0 = DVector::from_vec(seed_vals[n * p + n..].to_vec());
        let pop = Population::new(x, y1, y0, 0.0, 0).unwrap();
        let treated: Vec<usize> = (0..n1).collect();
        let control: Vec<usize> = (n1..n).collect();
        let i = treated[pick.0 % treated.len()];
        let j = control[pick.1 % control.len()];
        for est in [Estimator::Dim, Estimator::OlsRa] {
            let d = swap_delta(est, &pop, &treated, i, j, &SwapConfig::default()).unwrap();
            let mut swapped: Vec<usize> =
                treated.iter().cloned().filter(|&u| u != i).chain([j]).collect();
            swapped.sort_unstable();
            let direct = est.estimate(&pop, &swapped).unwrap()
                - est.estimate(&pop, &treated).unwrap();
            prop_assert!((d - direct).abs() <= 1e-8 * (1.0 + direct.abs()));
        }
    }
}
