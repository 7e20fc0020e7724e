//! Weighted weak learners: logistic regression and decision stumps.

mod cv;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::reasoner::Entailment;

pub use cv::{cv_metric, cv_metric_with_extra, stratified_folds, CvAccuracy, QualityMetric};

pub const EPOCHS: usize = 500;
pub const STEP: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    #[default]
    Logistic,
    Stump,
}

impl FromStr for LearnerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LearnerKind::Logistic),
            "stump" => Ok(LearnerKind::Stump),
            _ => Err(Error::Parameter(format!("unknown learner `{s}`"))),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearnerKind::Logistic => "logistic",
            LearnerKind::Stump => "stump",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub lso: String,
    pub entailment: Option<Entailment>,
    pub tag: Tag,
}

impl Provenance {
    /// Stable key used for fold assignment.
    pub fn key(&self) -> String {
        match &self.entailment {
            Some(g) => format!("{}|{}", self.lso, g),
            None => self.lso.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub weight: f64,
    pub label: bool,
    pub provenance: Provenance,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: bool, lso: impl Into<String>, tag: Tag) -> Self {
        Instance { features, weight: 1.0, label, provenance: Provenance { lso: lso.into(), entailment: None, tag } }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Logistic { weights: Vec<f64>, bias: f64 },
    /// Predicts 1 when `x[feature] > threshold` (positive polarity) or
    /// `x[feature] <= threshold` (negative polarity). A threshold of −∞ is a
    /// constant and never reads `x`, so a zero-dimensional stump is valid.
    Stump { dim: usize, feature: usize, threshold: f64, positive: bool },
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Logistic { weights, .. } => weights.len(),
            Model::Stump { dim, .. } => *dim,
        }
    }

    /// Score without the dimension check.
    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic { weights, bias } => sigmoid(bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
            Model::Stump { feature, threshold, positive, .. } => {
                let above = *threshold == f64::NEG_INFINITY || x[*feature] > *threshold;
                if above == *positive {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn predict(model: &Model, features: &[f64]) -> Result<f64> {
    if features.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: features.len() });
    }
    Ok(model.score(features))
}

/// Class decision at threshold 0.5; a tie goes to class 0.
pub fn decide(score: f64) -> bool {
    score > 0.5
}

/// Distinct `(features, label)` points with a map from instances to points.
/// Training on points with summed weights is equivalent to training on the instances.
#[derive(Clone, Debug)]
pub struct Points {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub of_instance: Vec<usize>,
}

impl Points {
    pub fn new(instances: &[Instance]) -> Self {
        let mut index: BTreeMap<(Vec<u64>, bool), usize> = BTreeMap::new();
        let mut of_instance = Vec::with_capacity(instances.len());
        let mut x = Vec::new();
        let mut y = Vec::new();
        for inst in instances {
            let key = (inst.features.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), inst.label);
            let n = index.len();
            let id = *index.entry(key).or_insert(n);
            if id == x.len() {
                x.push(inst.features.clone());
                y.push(inst.label);
            }
            of_instance.push(id);
        }
        Points { x, y, of_instance }
    }

    /// Sums instance weights into point weights, in instance order.
    pub fn weights(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.x.len()];
        for (i, &p) in self.of_instance.iter().enumerate() {
            out[p] += w[i];
        }
        out
    }
}

fn check_distribution(n: usize, p: &[f64]) -> Result<()> {
    if p.len() != n {
        return Err(Error::Parameter(format!("distribution has {} entries for {} instances", p.len(), n)));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Parameter("distribution entries must be finite and nonnegative".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 * (n as f64).max(1.0) {
        return Err(Error::Parameter(format!("distribution sums to {s}, not 1")));
    }
    Ok(())
}

/// Trains on `instances` weighted by `distribution`. Logistic regression starts
/// from zero, so `seed` does not influence it; stumps are exact. Both are
/// deterministic.
pub fn train_weighted(instances: &[Instance], distribution: &[f64], kind: LearnerKind, seed: u64) -> Result<Model> {
    let _ = seed;
    if instances.is_empty() {
        return Err(Error::EmptyInstances);
    }
    check_distribution(instances.len(), distribution)?;
    let dim = instances[0].features.len();
    if let Some(bad) = instances.iter().find(|i| i.features.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.features.len() });
    }
    let pts = Points::new(instances);
    Ok(fit_points(&pts, &pts.weights(distribution), kind))
}

/// Fits on distinct points with weights summing to 1.
pub fn fit_points(pts: &Points, w: &[f64], kind: LearnerKind) -> Model {
    match kind {
        LearnerKind::Logistic => fit_logistic(pts, w),
        LearnerKind::Stump => fit_stump(pts, w),
    }
}

fn fit_logistic(pts: &Points, w: &[f64]) -> Model {
    let dim = pts.x.first().map_or(0, |x| x.len());
    let total: f64 = w.iter().sum();
    let norm = if total > 0.0 { total } else { 1.0 };
    // Standardize with weighted moments; constant features are dropped.
    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for (x, &wi) in pts.x.iter().zip(w) {
        for j in 0..dim {
            mean[j] += wi * x[j] / norm;
        }
    }
    for (x, &wi) in pts.x.iter().zip(w) {
        for j in 0..dim {
            sd[j] += wi * (x[j] - mean[j]).powi(2) / norm;
        }
    }
    let scale: Vec<f64> = sd.iter().map(|v| if v.sqrt() > 1e-12 { 1.0 / v.sqrt() } else { 0.0 }).collect();
    let z: Vec<Vec<f64>> =
        pts.x.iter().map(|x| (0..dim).map(|j| (x[j] - mean[j]) * scale[j]).collect()).collect();
    let y: Vec<f64> = pts.y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();

    let mut beta = vec![0.0; dim];
    let mut b = 0.0;
    let mut grad = vec![0.0; dim];
    for _ in 0..EPOCHS {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for ((zi, &yi), &wi) in z.iter().zip(&y).zip(w) {
            if wi == 0.0 {
                continue;
            }
            let s = sigmoid(b + beta.iter().zip(zi).map(|(a, v)| a * v).sum::<f64>());
            let r = wi / norm * (s - yi);
            gb += r;
            for j in 0..dim {
                grad[j] += r * zi[j];
            }
        }
        b -= STEP * gb;
        for j in 0..dim {
            beta[j] -= STEP * grad[j];
        }
    }
    let weights: Vec<f64> = (0..dim).map(|j| beta[j] * scale[j]).collect();
    let bias = b - (0..dim).map(|j| beta[j] * scale[j] * mean[j]).sum::<f64>();
    Model::Logistic { weights, bias }
}

/// Exhaustive weighted-error minimization over features, thresholds at
/// midpoints between distinct values (plus −∞), and both polarities.
/// Ties keep the earliest candidate in that order.
fn fit_stump(pts: &Points, w: &[f64]) -> Model {
    let dim = pts.x.first().map_or(0, |x| x.len());
    let pos_total: f64 = pts.y.iter().zip(w).filter(|(y, _)| **y).map(|(_, w)| w).sum();
    let neg_total: f64 = pts.y.iter().zip(w).filter(|(y, _)| !**y).map(|(_, w)| w).sum();
    // threshold −∞: positive polarity predicts 1 everywhere
    let mut best = (neg_total, 0usize, f64::NEG_INFINITY, true);
    if pos_total < best.0 {
        best = (pos_total, 0, f64::NEG_INFINITY, false);
    }
    let mut order: Vec<usize> = (0..pts.x.len()).collect();
    for j in 0..dim {
        order.sort_by(|&a, &b| pts.x[a][j].total_cmp(&pts.x[b][j]));
        // weights at or below the running threshold
        let (mut pos_le, mut neg_le) = (0.0, 0.0);
        let mut k = 0;
        while k < order.len() {
            let v = pts.x[order[k]][j];
            while k < order.len() && pts.x[order[k]][j] == v {
                let p = order[k];
                if pts.y[p] {
                    pos_le += w[p];
                } else {
                    neg_le += w[p];
                }
                k += 1;
            }
            if k == order.len() {
                break;
            }
            let thr = (v + pts.x[order[k]][j]) / 2.0;
            // positive polarity: ≤ thr → 0, > thr → 1
            let err_pos = pos_le + (neg_total - neg_le);
            let err_neg = neg_le + (pos_total - pos_le);
            if err_pos < best.0 {
                best = (err_pos, j, thr, true);
            }
            if err_neg < best.0 {
                best = (err_neg, j, thr, false);
            }
        }
    }
    Model::Stump { dim, feature: best.1, threshold: best.2, positive: best.3 }
}

/// Weighted 0/1 error of a stump, for tests and diagnostics.
pub fn weighted_error(model: &Model, instances: &[Instance], p: &[f64]) -> f64 {
    instances.iter().zip(p).filter(|(i, _)| decide(model.score(&i.features)) != i.label).map(|(_, w)| w).sum()
}

const MODEL_VERSION: &str = "semtl-model 1";

impl fmt::Display for Model {
    /// One-line text form; floats use the shortest exact representation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Logistic { weights, bias } => {
                write!(f, "logistic {bias}")?;
                for w in weights {
                    write!(f, " {w}")?;
                }
                Ok(())
            }
            Model::Stump { dim, feature, threshold, positive } => {
                write!(f, "stump {dim} {feature} {threshold} {}", if *positive { "+" } else { "-" })
            }
        }
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ModelFormat(format!("bad model line `{s}`"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.first() {
            Some(&"logistic") if toks.len() >= 2 => {
                let bias = num(toks[1])?;
                let weights = toks[2..].iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?;
                Ok(Model::Logistic { weights, bias })
            }
            Some(&"stump") if toks.len() == 5 => {
                let dim = toks[1].parse().map_err(|_| bad())?;
                let feature: usize = toks[2].parse().map_err(|_| bad())?;
                let threshold = num(toks[3])?;
                if feature >= dim && !(feature == 0 && threshold == f64::NEG_INFINITY) {
                    return Err(bad());
                }
                let positive = match toks[4] {
                    "+" => true,
                    "-" => false,
                    _ => return Err(bad()),
                };
                Ok(Model::Stump { dim, feature, threshold, positive })
            }
            _ => Err(bad()),
        }
    }
}

pub fn model_to_text(m: &Model) -> String {
    format!("{MODEL_VERSION}\n{m}\n")
}

pub fn model_from_text(text: &str) -> Result<Model> {
    let mut lines = text.lines();
    if lines.next() != Some(MODEL_VERSION) {
        return Err(Error::ModelFormat("missing or unsupported version header".into()));
    }
    lines.next().ok_or_else(|| Error::ModelFormat("no model line".into()))?.parse()
}

#[cfg(test)]
mod tests {
    #[test]
    fn blind_stump_is_a_constant() {
        let data: Vec<Instance> = (0..5).map(|i| Instance::new(vec![], i < 2, format!("l{i}"), Tag::Target)).collect();
        let m = train_weighted(&data, &[0.2; 5], LearnerKind::Stump, 0).unwrap();
        assert_eq!(m.score(&[]), 0.0);
        assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
    }

    use super::*;

    fn inst(x: Vec<f64>, y: bool) -> Instance {
        Instance::new(x, y, "l", Tag::Target)
    }

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn single_class_gives_a_low_constant() {
        let data: Vec<Instance> = (0..6).map(|i| inst(vec![i as f64, 1.0], false)).collect();
        for kind in [LearnerKind::Logistic, LearnerKind::Stump] {
            let m = train_weighted(&data, &uniform(6), kind, 0).unwrap();
            for x in [-3.0, 0.0, 2.5, 10.0] {
                assert!(predict(&m, &[x, 1.0]).unwrap() <= 0.5);
            }
        }
    }

    #[test]
    fn separable_pair_has_zero_stump_error() {
        let data = vec![inst(vec![0.0], false), inst(vec![1.0], true)];
        let m = train_weighted(&data, &uniform(2), LearnerKind::Stump, 0).unwrap();
        assert_eq!(weighted_error(&m, &data, &uniform(2)), 0.0);
    }

    #[test]
    fn zero_logistic_scores_half() {
        let m = Model::Logistic { weights: vec![0.0; 3], bias: 0.0 };
        assert_eq!(predict(&m, &[1.0, -2.0, 7.0]).unwrap(), 0.5);
        assert!(!decide(0.5));
    }

    #[test]
    fn stump_on_consistency_channel() {
        let m = Model::Stump { dim: 3, feature: 1, threshold: 0.5, positive: true };
        assert_eq!(predict(&m, &[0.2, 1.0, 0.3]).unwrap(), 1.0);
        assert!(matches!(predict(&m, &[0.2, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn logistic_learns_a_separable_set() {
        let data: Vec<Instance> = (0..20).map(|i| inst(vec![i as f64 / 10.0, 5.0], i >= 10)).collect();
        let m = train_weighted(&data, &uniform(20), LearnerKind::Logistic, 0).unwrap();
        let acc = data.iter().filter(|d| decide(m.score(&d.features)) == d.label).count();
        assert_eq!(acc, 20);
    }

    #[test]
    fn duplicate_points_equal_summed_weights() {
        let a = vec![inst(vec![0.0], false), inst(vec![0.0], false), inst(vec![1.0], true)];
        let b = vec![inst(vec![0.0], false), inst(vec![1.0], true)];
        let ma = train_weighted(&a, &[0.25, 0.25, 0.5], LearnerKind::Logistic, 0).unwrap();
        let mb = train_weighted(&b, &[0.5, 0.5], LearnerKind::Logistic, 0).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(train_weighted(&[], &[], LearnerKind::Stump, 0), Err(Error::EmptyInstances)));
        let data = vec![inst(vec![0.0], false)];
        assert!(train_weighted(&data, &[0.5], LearnerKind::Stump, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        for m in [
            Model::Logistic { weights: vec![0.1, -2.5e-7, 3.0], bias: -0.3333333333333333 },
            Model::Stump { dim: 3, feature: 2, threshold: f64::NEG_INFINITY, positive: false },
        ] {
            assert_eq!(model_from_text(&model_to_text(&m)).unwrap(), m);
        }
        assert!(model_from_text("logistic 1 2\n").is_err());
    }
}
