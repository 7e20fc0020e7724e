use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semtl::learner::{cv_metric, decide, predict, train_weighted, weighted_error, Instance, LearnerKind, Model, Tag};

fn random_set(rng: &mut ChaCha8Rng) -> (Vec<Instance>, Vec<f64>) {
    let n = rng.gen_range(2..15);
    let dim = rng.gen_range(1..4);
    // few distinct values so that ties and duplicates happen
    let data: Vec<Instance> = (0..n)
        .map(|i| {
            let x = (0..dim).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect();
            Instance::new(x, rng.gen_bool(0.5), format!("l{i}"), Tag::Target)
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    (data, raw.iter().map(|w| w / s).collect())
}

/// Smallest weighted error over every feature, every observed value used as
/// an inclusive cut, the constant stumps and both polarities.
fn brute_force_stump_error(data: &[Instance], p: &[f64]) -> f64 {
    let err = |pred: &dyn Fn(&Instance) -> bool| -> f64 {
        data.iter().zip(p).filter(|(d, _)| pred(d) != d.label).map(|(_, w)| w).sum()
    };
    let mut best = err(&|_| true).min(err(&|_| false));
    for j in 0..data[0].features.len() {
        for cut in data.iter().map(|d| d.features[j]) {
            best = best.min(err(&|d| d.features[j] > cut));
            best = best.min(err(&|d| d.features[j] <= cut));
        }
    }
    best
}

#[test]
fn stump_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let (data, p) = random_set(&mut rng);
        let m = train_weighted(&data, &p, LearnerKind::Stump, 0).unwrap();
        let got = weighted_error(&m, &data, &p);
        let want = brute_force_stump_error(&data, &p);
        assert!((got - want).abs() < 1e-12, "case {case}: {got} vs {want}");
    }
}

#[test]
fn scoring_matches_a_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let dim = rng.gen_range(1..6);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let bias = rng.gen_range(-2.0..2.0);
        let z: f64 = bias + weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
        let want = 1.0 / (1.0 + (-z).exp());
        let got = predict(&Model::Logistic { weights, bias }, &x).unwrap();
        assert!((got - want).abs() < 1e-12, "case {case}");

        let feature = rng.gen_range(0..dim);
        let threshold = rng.gen_range(-3.0..3.0);
        let positive = rng.gen_bool(0.5);
        let s = predict(&Model::Stump { dim, feature, threshold, positive }, &x).unwrap();
        let fires = if positive { x[feature] > threshold } else { x[feature] <= threshold };
        assert_eq!(s, if fires { 1.0 } else { 0.0 }, "case {case}");
        assert_eq!(decide(s), fires);
    }
}

#[test]
fn two_fold_accuracy_by_hand() {
    // negatives at 0 and 2, positives at 1 and 3
    let data: Vec<Instance> = [("n1", 0.0, false), ("n2", 2.0, false), ("p1", 1.0, true), ("p2", 3.0, true)]
        .iter()
        .map(|&(id, x, y)| Instance::new(vec![x], y, id, Tag::Target))
        .collect();
    // seed 0 pairs {n1, p1} and {n2, p2}. Training on {n2, p2} cuts at 2.5 and
    // gets n1 right and p1 wrong; training on {n1, p1} cuts at 0.5 and gets
    // p2 right and n2 wrong. Both folds score 1/2.
    assert_eq!(cv_metric(&data, LearnerKind::Stump, 2, 0).unwrap(), 0.5);
    // seed 1 pairs {n1, p2} and {n2, p1}. The cuts at 1.5 (either polarity)
    // miss both held-out items, so both folds score 0.
    assert_eq!(cv_metric(&data, LearnerKind::Stump, 2, 1).unwrap(), 0.0);
}
