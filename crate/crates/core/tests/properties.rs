use permsmc_core::kernel::{detailed_balance_defect, transition_matrix, KernelContext};
use permsmc_core::oracle::{enumerate_matchings, permanent_exact_enumeration, permanent_exact_ryser};
use permsmc_core::schedule::{build_schedule, default_step_factor};
use permsmc_core::target::{eta_exact, ExactModel};
use permsmc_core::{ln_factorial, parse_matrix, BinaryMatrix, MatchingClass, Provenance, WeightTable};
use proptest::prelude::*;

fn matrix(max_n: usize) -> impl Strategy<Value = BinaryMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n)
            .prop_map(move |bits| BinaryMatrix::from_fn(n, |i, j| bits[i * n + j]).unwrap())
    })
}

/// Row-by-row recursion over unused columns.
fn brute_permanent(a: &BinaryMatrix) -> u64 {
    fn go(a: &BinaryMatrix, row: usize, used: &mut Vec<bool>) -> u64 {
        if row == a.n() {
            return 1;
        }
        let mut total = 0;
        for c in 0..a.n() {
            if a.get(row, c) && !used[c] {
                used[c] = true;
                total += go(a, row + 1, used);
                used[c] = false;
            }
        }
        total
    }
    go(a, 0, &mut vec![false; a.n()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracles_agree(a in matrix(7)) {
        let expected = brute_permanent(&a);
        let ryser = permanent_exact_ryser(&a).unwrap();
        prop_assert_eq!(ryser.to_string(), expected.to_string());
        prop_assert_eq!(permanent_exact_enumeration(&a).unwrap(), ryser);
        prop_assert_eq!(enumerate_matchings(&a, false).unwrap().perfect_count() as u64, expected);
    }

    #[test]
    fn adding_an_edge_never_lowers_the_permanent(a in matrix(6), i in 0usize..6, j in 0usize..6) {
        let n = a.n();
        let mut b = a.clone();
        b.set(i % n, j % n, true);
        prop_assert!(permanent_exact_ryser(&b).unwrap() >= permanent_exact_ryser(&a).unwrap());
    }

    #[test]
    fn matrix_text_round_trips(a in matrix(8)) {
        prop_assert_eq!(parse_matrix(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn schedule_levels(a in matrix(8)) {
        let n = a.n();
        prop_assume!(n > 1 && !a.is_complete());
        let s = build_schedule(&a, default_step_factor(n), None).unwrap();
        let floor = -ln_factorial(n);
        prop_assert_eq!(s.nonedge_log_activity(0), 0.0);
        prop_assert_eq!(s.nonedge_log_activity(s.r()), floor);
        for p in 0..s.r() {
            let step = s.nonedge_log_activity(p + 1) - s.nonedge_log_activity(p);
            prop_assert!(step <= 0.0);
            // a matching has at most n non-edges
            prop_assert!(n as f64 * step >= -0.5 * std::f64::consts::LN_2 - 1e-12);
        }
    }

    #[test]
    fn ideal_eta_is_normalized_with_perfect_mass(a in matrix(4), frac in 0.0f64..=1.0) {
        let n = a.n();
        prop_assume!(n == 1 || !a.is_complete());
        let s = build_schedule(&a, default_step_factor(n), None).unwrap();
        let p = ((s.r() as f64) * frac) as usize;
        let w = ExactModel::new(&s).unwrap().ideal_weights(p);
        let eta = eta_exact(&s, p, &w).unwrap();
        let total: f64 = eta.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let target = 1.0 / (n * n + 1) as f64;
        prop_assert!((eta.class_mass(MatchingClass::Perfect) - target).abs() < 1e-10);
        for u in 0..n {
            for v in 0..n {
                prop_assert!((eta.class_mass(MatchingClass::Hole(u, v)) - target).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn detailed_balance_for_arbitrary_weights(
        a in matrix(3),
        frac in 0.0f64..=1.0,
        raw in proptest::collection::vec(0.05f64..20.0, 9),
        sweeps in 1usize..3,
        lazy in any::<bool>(),
    ) {
        let n = a.n();
        prop_assume!(n == 1 || !a.is_complete());
        // the two-state chain for n = 1 is periodic
        prop_assume!(n > 1 || lazy || sweeps == 1);
        let s = build_schedule(&a, default_step_factor(n), None).unwrap();
        let p = ((s.r() as f64) * frac) as usize;
        let w = WeightTable::new(p, n, raw[..n * n].to_vec(), Provenance::UserSupplied).unwrap();
        let ctx = KernelContext::new(&s, p, &w, sweeps).unwrap().lazy(lazy);
        let tm = transition_matrix(&ctx).unwrap();
        let eta = eta_exact(&s, p, &w).unwrap();
        prop_assert!(tm.max_row_sum_error() < 1e-12);
        prop_assert!(detailed_balance_defect(&tm, &eta.probs) < 1e-12);
        let pi = tm.stationary_distribution().unwrap();
        for (x, y) in pi.iter().zip(&eta.probs) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
