use calagg::grouping::{knn_groups, membership_counts};
use calagg::synthetic::{overlap_fixture, resolution_fixture};
use calagg::*;
use proptest::prelude::*;

fn dataset_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = Dataset64> {
    (1..=max_n, 1..=max_d, 1usize..6).prop_flat_map(|(n, d, distinct)| {
        (
            prop::collection::vec(0..distinct, n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, d), distinct),
            prop::collection::vec(0.0..=1.0f64, distinct),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(class, points, preds, labels)| {
                let features = class.iter().map(|&c| points[c].clone()).collect();
                let predictions = class.iter().map(|&c| preds[c]).collect();
                Dataset::new(features, labels, predictions).unwrap()
            })
    })
}

fn profile_strategy() -> impl Strategy<Value = ErrorProfile64> {
    prop::collection::vec((-1.0..1.0f64, 0.01..1.0f64), 1..15).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        ErrorProfile::new(
            atoms.iter().map(|a| a.0).collect(),
            atoms.iter().map(|a| a.1 / total).collect(),
            Signedness::Signed,
        )
        .unwrap()
    })
}

fn weighted_mean(p: &ErrorProfile64) -> f64 {
    p.values().iter().zip(p.weights()).map(|(v, w)| v * w).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cvar_interpolates_mean_and_max(p in profile_strategy()) {
        let max = p.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((cvar(&p, 0.0) - weighted_mean(&p)).abs() < 1e-12);
        prop_assert!((cvar(&p, 1.0) - max).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=20 {
            let c = cvar(&p, j as f64 / 20.0);
            prop_assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn quantile_is_left_continuous_inverse(p in profile_strategy(), t in 0.001..1.0f64) {
        let q = quantile(&p, t).unwrap();
        let below: f64 = p.values().iter().zip(p.weights()).filter(|(v, _)| **v < q).map(|(_, w)| w).sum();
        let at_or_below: f64 = p.values().iter().zip(p.weights()).filter(|(v, _)| **v <= q).map(|(_, w)| w).sum();
        prop_assert!(below <= t + 1e-12 && at_or_below >= t - 1e-12);
    }

    #[test]
    fn quadrangle_round_trip(p in profile_strategy(), alpha in 0.05..0.95f64) {
        let dev = Agglomerator::superquantile_dev(alpha);
        let back = Agglomerator::quadrangle_dev(Agglomerator::quadrangle_risk(dev.clone()));
        prop_assert!((back.apply(&p).unwrap() - dev.apply(&p).unwrap()).abs() < 1e-9);
        let risk = Agglomerator::quadrangle_risk(dev.clone()).apply(&p).unwrap();
        prop_assert!((risk - cvar(&p, alpha)).abs() < 1e-9);
    }

    #[test]
    fn brier_decomposes(ds in dataset_strategy(60, 3)) {
        let b = brier(&ds);
        for by in [LevelKey::Inputs, LevelKey::Predictions] {
            let dec = brier_decomposition(&ds, by).unwrap();
            prop_assert!((dec.calibration + dec.refinement - b).abs() <= 1e-10 * b.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn binned_scores_are_ordered_and_consistent(ds in dataset_strategy(60, 2), k in 1usize..10) {
        let scheme = BinningScheme::equal_width(k);
        let e = ece(&ds, &scheme).unwrap().value;
        let m = mce(&ds, &scheme).unwrap().value;
        prop_assert!(m >= e - 1e-15 && e >= 0.0);
        let g = prediction_bins(&ds, &scheme).unwrap();
        prop_assert_eq!(global_score(&ds, &g, Signedness::Absolute, &Agglomerator::Mean).unwrap().value, e);
        prop_assert_eq!(global_score(&ds, &g, Signedness::Absolute, &Agglomerator::Max).unwrap().value, m);
        let uniform = g.with_measure(Measure::Uniform).unwrap();
        prop_assert_eq!(
            global_score(&ds, &uniform, Signedness::Absolute, &Agglomerator::Mean).unwrap().value,
            ace(&ds, &scheme).unwrap().value
        );
        let r = ece(&ds, &scheme).unwrap();
        prop_assert!((r.recompute().unwrap() - r.value).abs() < 1e-9);
    }

    #[test]
    fn ece_ignores_row_order(ds in dataset_strategy(40, 2), k in 1usize..8, rot in 0usize..40) {
        let n = ds.len();
        let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted = Dataset::new(
            order.iter().map(|&i| ds.features(i).to_vec()).collect(),
            order.iter().map(|&i| ds.labels()[i]).collect(),
            order.iter().map(|&i| ds.prediction(i)).collect(),
        ).unwrap();
        let scheme = BinningScheme::equal_frequency(k.min(n));
        let a = ece(&ds, &scheme).unwrap().value;
        let b = ece(&permuted, &scheme).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
        let a = ece(&ds, &BinningScheme::equal_width(k)).unwrap().value;
        let b = ece(&permuted, &BinningScheme::equal_width(k)).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn uniform_distributions_match_group_errors(ds in dataset_strategy(50, 2), picks in prop::collection::vec(any::<bool>(), 50)) {
        // close the pick under input classes so the group is input-complete
        let chosen: Vec<usize> = (0..ds.len())
            .filter(|&i| picks[ds.input_class(i) % picks.len()])
            .collect();
        prop_assume!(!chosen.is_empty());
        let g = Group::new(chosen).unwrap();
        prop_assert!(g.is_input_complete(&ds));
        let q = GroupDistribution::uniform_over(&g).unwrap();
        prop_assert!((generalized_error(&ds, &q).unwrap() - group_error(&ds, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn constructors_are_input_complete(ds in dataset_strategy(40, 2), k in 1usize..6) {
        let k = k.min(ds.len());
        let groupings = vec![
            prediction_bins(&ds, &BinningScheme::equal_width(3)).unwrap(),
            level_sets(&ds, LevelKey::Inputs).unwrap(),
            knn_groups(&ds, k, MetricSpec::default(), Space::Features).unwrap(),
            kernel_distributions(&ds, &KernelSpec::gaussian(0.5)).unwrap(),
        ];
        for g in groupings {
            prop_assert!(g.declared_input_complete() && g.is_input_complete(&ds));
        }
    }

    #[test]
    fn constant_error_profiles(value in -1.0..1.0f64, n in 1usize..10, ws in prop::collection::vec(0.01..1.0f64, 10)) {
        let total: f64 = ws[..n].iter().sum();
        let p = ErrorProfile::new(vec![value; n], ws[..n].iter().map(|w| w / total).collect(), Signedness::Signed).unwrap();
        for fdm in [Agglomerator::StdDev, Agglomerator::RangeDev, Agglomerator::superquantile_dev(0.5)] {
            prop_assert!(fdm.apply(&p).unwrap().abs() < 1e-12);
        }
        for crm in [Agglomerator::Mean, Agglomerator::Max, Agglomerator::cvar(0.4)] {
            prop_assert!((crm.apply(&p).unwrap() - value).abs() < 1e-12);
        }
    }

    #[test]
    fn refining_never_lowers_convex_scores(ds in dataset_strategy(60, 1), coarse in 1usize..4, extra in 1usize..4) {
        let coarse_g = prediction_bins(&ds, &BinningScheme::equal_width(coarse)).unwrap();
        let fine_g = prediction_bins(&ds, &BinningScheme::equal_width(coarse * (extra + 1))).unwrap();
        for agg in [Agglomerator::Mean, Agglomerator::cvar(0.5), Agglomerator::Max] {
            for s in [Signedness::Signed, Signedness::Absolute] {
                let v = check_refinement_monotonicity(&agg, &ds, &fine_g, &coarse_g, s).unwrap();
                prop_assert!(v.holds, "{} {:?}: {:?}", agg, s, v);
            }
        }
    }

    #[test]
    fn resolution_fixture_holds(l1 in prop::collection::vec(any::<bool>(), 1..8), l2 in prop::collection::vec(any::<bool>(), 1..8)) {
        let all_equal = l1.iter().chain(&l2).all(|&y| y == l1[0]);
        prop_assume!(!all_equal);
        let z1 = l1.iter().filter(|&&y| y).count() as f64 / l1.len() as f64;
        let n = (l1.len() + l2.len()) as f64;
        let eps = 0.5 * (z1 * n / l1.len() as f64).min((1.0 - z1) * n / l2.len() as f64);
        let f = resolution_fixture(&l1, &l2, eps).unwrap();
        let union = Group::all(f.dataset.len());
        prop_assert!(group_error(&f.dataset, &union).unwrap().abs() <= 1e-12);
        prop_assert!(group_error(&f.dataset, &f.first).unwrap().abs() > 0.0);
        prop_assert!(group_error(&f.dataset, &f.second).unwrap().abs() > 0.0);
    }
}

#[test]
fn overlap_closed_form_grid() {
    for d in 1..=3 {
        for k in 2..=5 {
            let full = 2 * d * (k - 1) + 1;
            for n in [k + 1, full - 1, full, full + 1, full + 3] {
                if n <= k {
                    continue;
                }
                let features = overlap_fixture(d, k, n).unwrap();
                let ds = Dataset::new(features, vec![false; n], vec![0.5; n]).unwrap();
                let g = knn_groups(&ds, k, MetricSpec::unscaled(Norm::L2), Space::Features).unwrap();
                let counts = membership_counts(&g).unwrap();
                assert_eq!(*counts.iter().max().unwrap(), n.min(full), "d={d} k={k} n={n}");
                assert_eq!(*counts.iter().min().unwrap(), 1, "d={d} k={k} n={n}");
            }
        }
    }
}

#[test]
fn f32_and_f64_agree() {
    let f = vec![vec![0.1], vec![0.5], vec![0.9], vec![0.3]];
    let y = vec![true, false, true, false];
    let p = vec![0.7, 0.4, 0.9, 0.2];
    let d64 = Dataset64::new(f.clone(), y.clone(), p.clone()).unwrap();
    let d32 = Dataset32::new(
        f.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect(),
        y,
        p.iter().map(|&v| v as f32).collect(),
    )
    .unwrap();
    let s = BinningScheme::equal_width(3);
    assert!((ece(&d64, &s).unwrap().value - f64::from(ece(&d32, &s).unwrap().value)).abs() < 1e-6);
}
