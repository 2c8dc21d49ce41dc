use gnrisk::calendar::Quarter;
use gnrisk::features::{Category, FeatureMatrix};
use gnrisk::gbdt::{self, best_split, grad_hess, leaf_weight, logistic_loss, TrainParams};
use gnrisk::oracle;
use proptest::prelude::*;

fn matrix(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> FeatureMatrix {
    let d = rows[0].len();
    FeatureMatrix::new(
        Quarter::new(2014, 2).unwrap(),
        (0..d).map(|j| format!("x{j}")).collect(),
        vec![Category::ActiveLoan; d],
        (0..rows.len()).map(|i| format!("C{i:04}")).collect(),
        rows,
        Some(labels),
    )
    .unwrap()
}

/// A node: rows with coarse values (to force ties) and logits/labels for g, h.
fn node() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (2usize..=12, 1usize..=3).prop_flat_map(|(n, d)| {
        (
            proptest::collection::vec(proptest::collection::vec(0i32..6, d), n),
            proptest::collection::vec((-3.0f64..3.0, 0u8..2), n),
        )
            .prop_map(|(cells, gl)| {
                let rows = cells
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| f64::from(v) * 0.5).collect())
                    .collect();
                let (g, h) = gl.into_iter().map(|(z, y)| grad_hess(z, y)).unzip();
                (rows, g, h)
            })
    })
}

fn params() -> impl Strategy<Value = TrainParams> {
    (0.0f64..2.0, 0.0f64..0.3, 0.0f64..0.6).prop_map(|(lambda, gamma, mch)| TrainParams {
        lambda,
        gamma,
        min_child_hessian: mch,
        ..TrainParams::default()
    })
}

fn auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut hits = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        for (j, &yj) in labels.iter().enumerate() {
            if yi == 1 && yj == 0 {
                pairs += 1.0;
                hits += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    hits / pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn best_split_matches_exhaustive_search((rows, g, h) in node(), p in params()) {
        let fast = best_split(&rows, &g, &h, &p);
        let slow = oracle::exhaustive_split(&rows, &g, &h, p.lambda, p.gamma, p.min_child_hessian);
        match (fast, slow) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                prop_assert_eq!(a.feature, b.feature);
                prop_assert_eq!(a.threshold, b.threshold);
                prop_assert!((a.gain - b.gain).abs() < 1e-9);
            }
            (a, b) => prop_assert!(false, "fast {:?} vs exhaustive {:?}", a, b),
        }
    }

    #[test]
    fn leaf_weight_minimises_the_leaf_objective(g in -50.0f64..50.0, h in 0.0f64..50.0, lambda in 0.01f64..5.0) {
        let w = leaf_weight(g, h, lambda);
        let numeric = oracle::golden_section_min(|w| oracle::leaf_objective_exact(g, h + lambda, w), -6000.0, 6000.0, 1e-12);
        prop_assert!((w - numeric).abs() < 1e-8, "{} vs {}", w, numeric);
    }
}

#[test]
fn grad_hess_matches_finite_differences() {
    for i in 0..=100 {
        let z = -5.0 + 0.1 * f64::from(i);
        for y in [0u8, 1] {
            let (g, h) = grad_hess(z, y);
            let dg = oracle::central_difference(|z| logistic_loss(z, y), z, 1e-6);
            let dh = oracle::central_difference(|z| grad_hess(z, y).0, z, 1e-6);
            assert!((g - dg).abs() < 1e-4, "g at {z}");
            assert!((h - dh).abs() < 1e-4, "h at {z}");
            assert!(g > -1.0 && g < 1.0 && h > 0.0 && h <= 0.25);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn training_loss_never_increases(
        rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 4), 10..200),
        seed in any::<u64>(),
    ) {
        let labels: Vec<u8> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| u8::from((r[0] + r[1] * r[2]).sin() + ((seed >> (i % 60)) & 1) as f64 * 0.8 > 0.4))
            .collect();
        let params = TrainParams { rounds: 50, ..TrainParams::default() };
        let (model, losses) = gbdt::train_traced(&matrix(rows, labels), &params).unwrap();
        prop_assert_eq!(losses.len(), model.trees.len() + 1);
        for w in losses.windows(2) {
            prop_assert!(w[1] <= w[0], "loss rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn increasing_transform_keeps_topology_and_predictions(
        rows in proptest::collection::vec(proptest::collection::vec(0.0f64..5.0, 3), 10..80),
    ) {
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] * r[2] > 4.0)).collect();
        let warped: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0].exp(), r[1], r[2]]).collect();
        let params = TrainParams { rounds: 10, ..TrainParams::default() };
        let a = gbdt::train(&matrix(rows.clone(), labels.clone()), &params).unwrap();
        let b = gbdt::train(&matrix(warped.clone(), labels), &params).unwrap();
        prop_assert_eq!(a.trees.len(), b.trees.len());
        for (ta, tb) in a.trees.iter().zip(&b.trees) {
            let (mut fa, mut fb) = (Vec::new(), Vec::new());
            ta.for_each_split(&mut |f| fa.push(f));
            tb.for_each_split(&mut |f| fb.push(f));
            prop_assert_eq!(fa, fb);
            prop_assert_eq!(ta.leaves(), tb.leaves());
        }
        for (r, w) in rows.iter().zip(&warped) {
            prop_assert_eq!(a.predict(r).unwrap(), b.predict(w).unwrap());
        }
    }
}

#[test]
fn separable_fixture_is_ranked_perfectly_within_ten_rounds() {
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![f64::from(i), f64::from((i * 7) % 5)])
        .collect();
    let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + r[1] > 12.0)).collect();
    let m = matrix(rows, labels.clone());
    let params = TrainParams {
        rounds: 10,
        ..TrainParams::default()
    };
    let model = gbdt::train(&m, &params).unwrap();
    let scores = model.predict_matrix(&m).unwrap();
    assert_eq!(auc(&scores, &labels), 1.0);
}

#[test]
fn identical_inputs_give_identical_models() {
    let rows: Vec<Vec<f64>> = (0..150)
        .map(|i| {
            let x = f64::from(i);
            vec![(x * 0.7).sin(), (x * 0.13).cos() * 3.0, x % 7.0]
        })
        .collect();
    let labels: Vec<u8> = rows
        .iter()
        .map(|r| u8::from(r[0] + 0.3 * r[1] > 0.2))
        .collect();
    let m = matrix(rows, labels);
    let a = gbdt::train(&m, &TrainParams::default())
        .unwrap()
        .to_json()
        .unwrap();
    let b = gbdt::train(&m, &TrainParams::default())
        .unwrap()
        .to_json()
        .unwrap();
    assert_eq!(a, b);
}
