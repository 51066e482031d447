use proptest::prelude::*;

use permatch::assignment::{solve_bruteforce, solve_hungarian, solve_rectangular, verify_birkhoff_optimality, CostMatrix};
use permatch::estimators::{estimate, EstimatorKind};
use permatch::harness::{aggregate, Summary, TrialRecord};
use permatch::io::{parse_features, write_features};
use permatch::metrics::{delta2, loss_01, loss_hamming};
use permatch::model::{generate_instance, FeatureSet, NoiseSpec};
use permatch::permgroup::{ball_cardinality, closed_ball_cardinality};
use permatch::permutation::Permutation;
use permatch::rng::seeded;

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    any::<u64>().prop_map(move |s| Permutation::random(n, &mut seeded(s)))
}

fn square(max: usize) -> impl Strategy<Value = CostMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-50i32..50, n * n)
            .prop_map(move |v| CostMatrix::new(n, n, v.into_iter().map(f64::from).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn hungarian_matches_bruteforce(cost in square(6)) {
        let h = solve_hungarian(&cost).unwrap();
        prop_assert_eq!(h.total_cost, solve_bruteforce(&cost).unwrap().total_cost);
        prop_assert!(verify_birkhoff_optimality(&cost, &h, 20, 3).unwrap());
    }

    #[test]
    fn rectangular_uses_distinct_columns(rows in 1usize..5, extra in 0usize..4, seed in any::<u64>()) {
        let cols = rows + extra;
        let mut rng = seeded(seed);
        use rand::Rng;
        let cost = CostMatrix::from_fn(rows, cols, |_, _| rng.random_range(0..20) as f64).unwrap();
        let sol = solve_rectangular(&cost).unwrap();
        let mut seen = sol.assignment.as_slice().to_vec();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), rows);
        prop_assert_eq!(sol.total_cost, solve_bruteforce(&cost).unwrap().total_cost);
    }

    #[test]
    fn losses_are_ordered_metrics(a in perm(9), b in perm(9), c in perm(9)) {
        let h = loss_hamming(&a, &b).unwrap();
        prop_assert!(h <= f64::from(loss_01(&a, &b).unwrap()));
        prop_assert_eq!(h, loss_hamming(&b, &a).unwrap());
        prop_assert!(h <= loss_hamming(&a, &c).unwrap() + loss_hamming(&c, &b).unwrap() + 1e-12);
        prop_assert_eq!(delta2(&a, &a).unwrap(), 0.0);
        prop_assert!(delta2(&a, &b).unwrap() >= 0.0);
    }

    #[test]
    fn composition_and_inverse(a in perm(7), b in perm(7)) {
        let id = Permutation::identity(7);
        prop_assert_eq!(a.compose(&a.inverse().unwrap()).unwrap(), id.clone());
        let ab = a.compose(&b).unwrap();
        for i in 0..7 {
            prop_assert_eq!(ab.apply(i), a.apply(b.apply(i)));
        }
    }

    #[test]
    fn relabeling_first_set_relabels_estimates(seed in any::<u64>(), relabel in perm(6)) {
        let mut rng = seeded(seed);
        use rand::Rng;
        let data: Vec<f64> = (0..6 * 3).map(|_| rng.random::<f64>() * 4.0).collect();
        let theta = FeatureSet::new(6, 3, data).unwrap();
        let truth = Permutation::random(6, &mut rng);
        let levels: Vec<f64> = (0..6).map(|_| rng.random_range(0.2..1.0)).collect();
        let inst = generate_instance(&theta, &NoiseSpec::heteroscedastic(levels).unwrap(), &truth, seed).unwrap();
        let moved = inst.relabel_first(&relabel).unwrap();
        for kind in [EstimatorKind::Lss, EstimatorKind::Lsns, EstimatorKind::Lsl] {
            let before = estimate(&inst, &kind).unwrap();
            let after = estimate(&moved, &kind).unwrap();
            prop_assert_eq!(after, relabel.inverse().unwrap().compose(&before).unwrap());
        }
    }

    #[test]
    fn open_ball_inside_closed_ball(n in 1usize..8, r in 0.0f64..3.0) {
        let open = ball_cardinality(n, r).unwrap();
        let closed = closed_ball_cardinality(n, r).unwrap();
        prop_assert!(open <= closed);
        prop_assert!(closed_ball_cardinality(n, r + 0.5).unwrap() >= closed);
    }

    #[test]
    fn feature_csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..8)) {
        let f = FeatureSet::from_rows(&rows).unwrap();
        let mut buf = Vec::new();
        write_features(&mut buf, &f, None).unwrap();
        prop_assert_eq!(parse_features(buf.as_slice()).unwrap().features, f);
    }

    #[test]
    fn aggregate_matches_batch_mean(losses in prop::collection::vec((0u8..=1, 0.0f64..=1.0), 1..60)) {
        let records: Vec<TrialRecord> = losses
            .iter()
            .enumerate()
            .map(|(k, &(l01, lh))| TrialRecord {
                sweep_value: 1.5,
                estimator: "lsl".into(),
                seed: k as u64,
                loss_01: l01,
                loss_hamming: lh,
                kappa: 1.0,
                kappa_bar: 1.0,
                wall_time: 0.0,
            })
            .collect();
        let s = aggregate(&records).unwrap();
        let n = losses.len() as f64;
        let mean: f64 = losses.iter().map(|l| l.1).sum::<f64>() / n;
        prop_assert!((s.rows[0].mean_hamming - mean).abs() < 1e-12);
        prop_assert_eq!(s.rows[0].trials, losses.len());
        let back = Summary::from_csv(s.to_csv().as_bytes()).unwrap();
        prop_assert_eq!(back.rows, s.rows);
    }
}
