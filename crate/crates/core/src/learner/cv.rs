use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{decide, fit_points, Instance, LearnerKind, Points};
use crate::error::{Error, Result};

/// Stratified fold index per item. Items are ordered by their stable key, each
/// class is shuffled with `seed`, and the concatenated classes are dealt out
/// round robin, so the assignment does not depend on input order.
pub fn stratified_folds(keys: &[String], labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Parameter("cross validation needs at least 2 folds".into()));
    }
    if keys.len() < k {
        return Err(Error::TooFewInstances { needed: k, folds: k, got: keys.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; keys.len()];
    let mut pos = 0;
    for class in [false, true] {
        let mut members: Vec<usize> = (0..keys.len()).filter(|&i| labels[i] == class).collect();
        members.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = pos % k;
            pos += 1;
        }
    }
    Ok(fold)
}

fn accuracy_on(model: &super::Model, test: &[&Instance]) -> f64 {
    let hits = test.iter().filter(|i| decide(model.score(&i.features)) == i.label).count();
    hits as f64 / test.len() as f64
}

fn fit(train: &[&Instance], kind: LearnerKind) -> super::Model {
    let owned: Vec<Instance> = train.iter().map(|i| (*i).clone()).collect();
    let pts = Points::new(&owned);
    let total: f64 = owned.iter().map(|i| i.weight).sum();
    let w: Vec<f64> = owned.iter().map(|i| i.weight / total).collect();
    fit_points(&pts, &pts.weights(&w), kind)
}

/// Mean accuracy over `k` stratified folds.
pub fn cv_metric(instances: &[Instance], kind: LearnerKind, k: usize, seed: u64) -> Result<f64> {
    cv_metric_with_extra(instances, &[], kind, k, seed)
}

/// Like [`cv_metric`], with `extra` added to the training side of every fold.
/// Extra instances are never evaluated.
pub fn cv_metric_with_extra(instances: &[Instance], extra: &[Instance], kind: LearnerKind, k: usize, seed: u64) -> Result<f64> {
    let keys: Vec<String> = instances.iter().map(|i| i.provenance.key()).collect();
    let labels: Vec<bool> = instances.iter().map(|i| i.label).collect();
    let folds = stratified_folds(&keys, &labels, k, seed)?;
    let mut sum = 0.0;
    for f in 0..k {
        let test: Vec<&Instance> = instances.iter().zip(&folds).filter(|(_, &g)| g == f).map(|(i, _)| i).collect();
        let mut train: Vec<&Instance> =
            instances.iter().zip(&folds).filter(|(_, &g)| g != f).map(|(i, _)| i).collect();
        train.extend(extra.iter());
        sum += accuracy_on(&fit(&train, kind), &test);
    }
    Ok(sum / k as f64)
}

/// Predictive quality of a learner trained on `train` plus `extra`.
pub trait QualityMetric: Sync {
    fn score(&self, train: &[Instance], extra: &[Instance], kind: LearnerKind) -> Result<f64>;
}

/// Stratified k-fold cross-validated accuracy.
#[derive(Clone, Copy, Debug)]
pub struct CvAccuracy {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvAccuracy {
    fn default() -> Self {
        CvAccuracy { folds: 5, seed: 0 }
    }
}

impl QualityMetric for CvAccuracy {
    fn score(&self, train: &[Instance], extra: &[Instance], kind: LearnerKind) -> Result<f64> {
        cv_metric_with_extra(train, extra, kind, self.folds, self.seed)
    }
}
