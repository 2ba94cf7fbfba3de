use gwofs::classify::mcnemar::mcnemar_from_counts;
use gwofs::classify::roc::roc_binary;
use gwofs::classify::svm::rbf;
use gwofs::classify::{confusion, mcnemar, metrics, train_svm, ConfusionMatrix, Gamma};
use gwofs::dataset::{synth_dataset, LabeledFeatureSet};
use ndarray::Array2;
use proptest::prelude::*;

/// P(score_pos > score_neg) + 0.5 P(tie), by counting pairs.
fn mann_whitney(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &pi) in positive.iter().enumerate() {
        for (j, &pj) in positive.iter().enumerate() {
            if pi && !pj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn auc_matches_pair_counting(
        data in prop::collection::vec((0u8..6, any::<bool>()), 2..20),
    ) {
        let scores: Vec<f64> = data.iter().map(|(s, _)| *s as f64 / 5.0).collect();
        let positive: Vec<bool> = data.iter().map(|(_, p)| *p).collect();
        prop_assume!(positive.iter().any(|&p| p) && positive.iter().any(|&p| !p));
        let curve = roc_binary(&scores, &positive).unwrap();
        prop_assert!((curve.auc - mann_whitney(&scores, &positive)).abs() < 1e-12);
        prop_assert!(curve.points.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr));
        let last = curve.points.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn rbf_gram_is_positive_semidefinite(
        points in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..12),
        weights in prop::collection::vec(-1.0f64..1.0, 12),
        gamma in 0.01f64..5.0,
    ) {
        let n = points.len();
        let mut quad = 0.0;
        for i in 0..n {
            prop_assert_eq!(rbf(&points[i], &points[i], gamma), 1.0);
            for j in 0..n {
                let k = rbf(&points[i], &points[j], gamma);
                prop_assert!(k > 0.0 && k <= 1.0);
                prop_assert_eq!(k, rbf(&points[j], &points[i], gamma));
                quad += weights[i] * weights[j] * k;
            }
        }
        prop_assert!(quad >= -1e-9, "v'Kv = {quad}");
    }

    #[test]
    fn metrics_invariants(counts in prop::collection::vec(prop::collection::vec(0u64..20, 3), 3)) {
        prop_assume!(counts.iter().flatten().sum::<u64>() > 0);
        let m = metrics(&ConfusionMatrix::from_counts(counts.clone()).unwrap()).unwrap();
        let total: u64 = counts.iter().flatten().sum();
        let trace: u64 = (0..3).map(|i| counts[i][i]).sum();
        prop_assert!((m.accuracy - trace as f64 / total as f64).abs() < 1e-15);
        for v in m.precision.iter().chain(&m.recall).chain(&m.f1) {
            prop_assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn mcnemar_is_symmetric(b in 0u64..200, c in 0u64..200) {
        let x = mcnemar_from_counts(b, c);
        let y = mcnemar_from_counts(c, b);
        prop_assert_eq!(x.statistic, y.statistic);
        prop_assert_eq!(x.p_value, y.p_value);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }
}

#[test]
fn confusion_counts_rows_as_truth() {
    let m = confusion(&[0, 0, 1, 1, 1], &[0, 1, 1, 1, 0], 2).unwrap();
    assert_eq!(m.counts, vec![vec![1, 1], vec![1, 2]]);
}

#[test]
fn mcnemar_from_predictions() {
    let truth = [0, 1, 0, 1, 0, 1];
    let a = [0, 1, 0, 1, 1, 0];
    let b = [1, 0, 0, 1, 1, 0];
    let r = mcnemar(&a, &b, &truth).unwrap();
    assert_eq!((r.b, r.c), (2, 0));
}

#[test]
fn svm_learns_separable_three_class_blobs() {
    let set = synth_dataset(90, 2, 0, 3, 8.0, 4).unwrap();
    let model = train_svm(&set, 10.0, Gamma::Scale).unwrap();
    let (pred, scores) = model.predict(set.features().view()).unwrap();
    assert_eq!(pred, set.labels());
    assert_eq!(scores.shape(), &[90, 3]);
}

#[test]
fn svm_decision_is_antisymmetric_under_label_swap() {
    let x = Array2::from_shape_vec((6, 1), vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]).unwrap();
    let a = LabeledFeatureSet::new(x.clone(), vec![0, 0, 0, 1, 1, 1], 2).unwrap();
    let b = LabeledFeatureSet::new(x, vec![1, 1, 1, 0, 0, 0], 2).unwrap();
    let (pa, _) = train_svm(&a, 1.0, Gamma::Fixed(0.5)).unwrap().predict(a.features().view()).unwrap();
    let (pb, _) = train_svm(&b, 1.0, Gamma::Fixed(0.5)).unwrap().predict(b.features().view()).unwrap();
    assert_eq!(pa, a.labels());
    assert_eq!(pb, b.labels());
}
