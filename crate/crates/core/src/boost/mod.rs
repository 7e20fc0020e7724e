//! Instance-transfer boosting: the semantic variant over `(t, c, v)`
//! embeddings, the presence-feature baseline, and a target-only loop.

mod bundle;
mod instances;

use std::fmt;
use std::str::FromStr;

use crate::domain::{Eq10, SemanticLearningTask};
use crate::embedding::{build_embedding_matrix, EmbeddingMatrix, EmbeddingOptions, EpsilonMode};
use crate::error::{Error, Result};
use crate::learner::{decide, fit_points, Instance, LearnerKind, Model, Points, QualityMetric, Tag};
use crate::reasoner::{Entailment, EntailmentSet};

pub use bundle::{load_ensemble, save_ensemble, ModelBundle};
pub use instances::{build_training_instances, presence_instances};

/// Floor for the target error, keeps `γ_t` away from 0.
pub const PSI_FLOOR: f64 = 1e-10;
const WEIGHT_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GammaVariant {
    /// `1 / (1 + √(2 ln n / N))`
    #[default]
    Original,
    /// `1 / (1 + √(2 ln(n / N)))`; a negative radicand counts as 0.
    Paper,
}

impl FromStr for GammaVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(GammaVariant::Original),
            "paper" => Ok(GammaVariant::Paper),
            _ => Err(Error::Parameter(format!("unknown gamma variant `{s}`"))),
        }
    }
}

impl fmt::Display for GammaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaVariant::Original => "original",
            GammaVariant::Paper => "paper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Stadab,
    Tradaboost,
    /// The semantic pipeline with the source removed.
    Plain,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Stadab, Algo::Tradaboost, Algo::Plain];
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stadab" => Ok(Algo::Stadab),
            "tradaboost" => Ok(Algo::Tradaboost),
            "plain" => Ok(Algo::Plain),
            _ => Err(Error::Parameter(format!("unknown algorithm `{s}`"))),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Stadab => "stadab",
            Algo::Tradaboost => "tradaboost",
            Algo::Plain => "plain",
        })
    }
}

/// What a weak hypothesis contributes to errors and votes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Output {
    /// The 0/1 decision.
    #[default]
    Label,
    /// The raw score in [0, 1].
    Score,
}

impl Output {
    pub fn apply(self, model: &Model, x: &[f64]) -> f64 {
        let s = model.score(x);
        match self {
            Output::Label => decide(s) as u8 as f64,
            Output::Score => s,
        }
    }
}

impl FromStr for Output {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" => Ok(Output::Label),
            "score" => Ok(Output::Score),
            _ => Err(Error::Parameter(format!("unknown hypothesis output `{s}`"))),
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Output::Label => "label",
            Output::Score => "score",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostConfig {
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub learner: LearnerKind,
    pub seed: u64,
    pub epsilon: EpsilonMode,
    pub gamma: GammaVariant,
    pub eq10: Eq10,
    pub output: Output,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            iterations: 800,
            alpha: 0.5,
            beta: 0.5,
            learner: LearnerKind::Logistic,
            seed: 0,
            epsilon: EpsilonMode::Exact,
            gamma: GammaVariant::Original,
            eq10: Eq10::SymDiff,
            output: Output::Label,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Parameter("iterations must be at least 1".into()));
        }
        crate::embedding::variability_weight(0.0, 0.0, self.alpha, self.beta).map(|_| ())
    }

    pub fn embedding_options(&self) -> EmbeddingOptions {
        EmbeddingOptions {
            alpha: self.alpha,
            beta: self.beta,
            learner: self.learner,
            epsilon: self.epsilon,
            eq10: self.eq10,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub model: Model,
    /// Vote weight `β_t`, equal to `γ_t = ψ_t / (1 − ψ_t)`.
    pub beta: f64,
    /// Target error `ψ_t` (after flooring).
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub hypotheses: Vec<Hypothesis>,
    /// Configured `N`; the voting window is `⌈N/2⌉..=N`.
    pub planned: usize,
    pub early_stopped: bool,
    /// Source discount `γ`.
    pub gamma: f64,
    pub output: Output,
}

impl Ensemble {
    /// 1-based iterations that vote, or `None` when early stopping left the
    /// window empty.
    pub fn voting_range(&self) -> Option<std::ops::RangeInclusive<usize>> {
        let lo = self.planned.div_ceil(2).max(1);
        let hi = self.hypotheses.len().min(self.planned);
        (lo <= hi).then_some(lo..=hi)
    }
}

/// Target instances scale by `γ_t^(−err)`, source instances by `γ^(err)`.
pub fn weight_update(w: f64, gamma: f64, gamma_t: f64, abs_error: f64, tag: Tag) -> f64 {
    match tag {
        Tag::Target => w * gamma_t.powf(-abs_error),
        Tag::Source => w * gamma.powf(abs_error),
    }
}

/// Weighted mean of `|f(x) − y|` over the target-tagged instances.
pub fn error_on_target(f: impl Fn(&[f64]) -> f64, instances: &[Instance], w: &[f64]) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (inst, &wi) in instances.iter().zip(w) {
        if inst.provenance.tag == Tag::Target {
            num += wi * (f(&inst.features) - label(inst)).abs();
            den += wi;
        }
    }
    if den == 0.0 {
        return Err(Error::EmptyTargetTraining);
    }
    Ok(num / den)
}

fn label(i: &Instance) -> f64 {
    if i.label {
        1.0
    } else {
        0.0
    }
}

pub fn source_discount(n_source: usize, iterations: usize, variant: GammaVariant) -> f64 {
    if n_source < 2 {
        return 1.0;
    }
    let (n, big_n) = (n_source as f64, iterations as f64);
    let radicand = match variant {
        GammaVariant::Original => 2.0 * n.ln() / big_n,
        GammaVariant::Paper => 2.0 * (n / big_n).ln(),
    };
    1.0 / (1.0 + radicand.max(0.0).sqrt())
}

/// Current weights, normalized to sum 1 after every update.
#[derive(Clone, Debug)]
pub struct WeightState {
    pub w: Vec<f64>,
    pub t: usize,
}

impl WeightState {
    pub fn uniform(n: usize) -> Self {
        WeightState { w: vec![1.0; n], t: 1 }
    }

    pub fn distribution(&self) -> Vec<f64> {
        let total: f64 = self.w.iter().sum();
        self.w.iter().map(|x| x / total).collect()
    }

    fn renormalize(&mut self) {
        let total: f64 = self.w.iter().sum();
        for x in &mut self.w {
            *x = (*x / total).max(WEIGHT_FLOOR);
        }
    }
}

/// The boosting loop over tagged instances.
pub fn boost(instances: &[Instance], cfg: &BoostConfig) -> Result<Ensemble> {
    if !instances.iter().any(|i| i.provenance.tag == Tag::Target) {
        return Err(Error::EmptyTargetTraining);
    }
    let pts = Points::new(instances);
    let n_source = instances.iter().filter(|i| i.provenance.tag == Tag::Source).count();
    let gamma = source_discount(n_source, cfg.iterations, cfg.gamma);
    let mut state = WeightState::uniform(instances.len());
    let mut hypotheses = Vec::new();
    let mut early_stopped = false;
    while state.t <= cfg.iterations {
        let p = state.distribution();
        let model = fit_points(&pts, &pts.weights(&p), cfg.learner);
        let out: Vec<f64> = pts.x.iter().map(|x| cfg.output.apply(&model, x)).collect();
        let err: Vec<f64> =
            instances.iter().enumerate().map(|(i, inst)| (out[pts.of_instance[i]] - label(inst)).abs()).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, inst) in instances.iter().enumerate() {
            if inst.provenance.tag == Tag::Target {
                num += state.w[i] * err[i];
                den += state.w[i];
            }
        }
        let psi = num / den;
        if psi >= 0.5 {
            early_stopped = true;
            break;
        }
        let psi = psi.max(PSI_FLOOR);
        let gamma_t = psi / (1.0 - psi);
        for (i, inst) in instances.iter().enumerate() {
            state.w[i] = weight_update(state.w[i], gamma, gamma_t, err[i], inst.provenance.tag);
        }
        state.renormalize();
        hypotheses.push(Hypothesis { model, beta: gamma_t, psi });
        state.t += 1;
    }
    Ok(Ensemble { hypotheses, planned: cfg.iterations, early_stopped, gamma, output: cfg.output })
}

/// Plain boosting over target instances only: [`boost`] without the source branch.
pub fn boost_target_only(instances: &[Instance], cfg: &BoostConfig) -> Result<Ensemble> {
    if instances.is_empty() {
        return Err(Error::EmptyTargetTraining);
    }
    let pts = Points::new(instances);
    let mut state = WeightState::uniform(instances.len());
    let mut hypotheses = Vec::new();
    let mut early_stopped = false;
    while state.t <= cfg.iterations {
        let p = state.distribution();
        let model = fit_points(&pts, &pts.weights(&p), cfg.learner);
        let out: Vec<f64> = pts.x.iter().map(|x| cfg.output.apply(&model, x)).collect();
        let err: Vec<f64> =
            instances.iter().enumerate().map(|(i, inst)| (out[pts.of_instance[i]] - label(inst)).abs()).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (w, e) in state.w.iter().zip(&err) {
            num += w * e;
            den += w;
        }
        let psi = num / den;
        if psi >= 0.5 {
            early_stopped = true;
            break;
        }
        let psi = psi.max(PSI_FLOOR);
        let gamma_t = psi / (1.0 - psi);
        for (w, e) in state.w.iter_mut().zip(&err) {
            *w *= gamma_t.powf(-e);
        }
        state.renormalize();
        hypotheses.push(Hypothesis { model, beta: gamma_t, psi });
        state.t += 1;
    }
    Ok(Ensemble { hypotheses, planned: cfg.iterations, early_stopped, gamma: 1.0, output: cfg.output })
}

/// Outcome of an ensemble vote.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vote {
    pub label: bool,
    /// Weighted mean output over the voters minus 1/2.
    pub margin: f64,
    /// The window was empty and every available hypothesis voted.
    pub fallback: bool,
}

/// Log-space weighted vote: 1 iff `Σ −f_t ln β_t ≥ Σ −½ ln β_t` over the window.
pub fn ensemble_vote(ens: &Ensemble, features: &[f64]) -> Vote {
    let (range, fallback) = match ens.voting_range() {
        Some(r) => (r, false),
        None => (1..=ens.hypotheses.len(), true),
    };
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for h in &ens.hypotheses[range.start() - 1..*range.end()] {
        let ln_b = h.beta.ln();
        lhs += -ens.output.apply(&h.model, features) * ln_b;
        rhs += -0.5 * ln_b;
    }
    let margin = if rhs > 0.0 { lhs / (2.0 * rhs) - 0.5 } else { 0.0 };
    Vote { label: rhs > 0.0 && lhs >= rhs, margin, fallback }
}

pub fn ensemble_predict(ens: &Ensemble, features: &[f64]) -> bool {
    ensemble_vote(ens, features).label
}

/// LSO-level decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsoPrediction {
    pub label: bool,
    /// Fraction of per-entailment votes that were 1.
    pub score: f64,
    /// No entailment of the LSO is embedded; predicted 0.
    pub empty: bool,
}

/// Mean of the per-entailment votes over `closure ∩ index`, thresholded at ½ (inclusive).
pub fn predict_lso(ens: &Ensemble, closure: &EntailmentSet, emb: &EmbeddingMatrix) -> LsoPrediction {
    let votes: Vec<bool> =
        closure.iter().filter_map(|g| emb.position(g)).map(|j| ensemble_predict(ens, &emb.features(j))).collect();
    if votes.is_empty() {
        return LsoPrediction { label: false, score: 0.0, empty: true };
    }
    let score = votes.iter().filter(|v| **v).count() as f64 / votes.len() as f64;
    LsoPrediction { label: score >= 0.5, score, empty: false }
}

/// Presence-baseline decision for one LSO.
pub fn predict_lso_presence(ens: &Ensemble, closure: &EntailmentSet, index: &[Entailment]) -> bool {
    let x: Vec<f64> = index.iter().map(|g| if closure.contains(g) { 1.0 } else { 0.0 }).collect();
    ensemble_predict(ens, &x)
}

/// Embedding plus semantic ensemble for the target at `pos`.
pub fn stadab_train(
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    cfg: &BoostConfig,
    metric: &dyn QualityMetric,
) -> Result<(Ensemble, EmbeddingMatrix)> {
    cfg.validate()?;
    let emb = build_embedding_matrix(source, target, pos, &cfg.embedding_options(), metric)?;
    let instances = build_training_instances(source, target, &emb, pos)?;
    Ok((boost(&instances, cfg)?, emb))
}

/// Presence-feature baseline: one instance per LSO over `index`
/// (see [`crate::embedding::embedding_index`]).
pub fn tradaboost_train(
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    cfg: &BoostConfig,
    index: &[Entailment],
) -> Result<Ensemble> {
    cfg.validate()?;
    let instances = presence_instances(source, target, index, pos)?;
    boost(&instances, cfg)
}

/// Runs `train` for every target position concurrently.
pub fn one_vs_rest<T, F>(positions: &[usize], train: F) -> Result<Vec<(usize, T)>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    if positions.is_empty() {
        return Err(Error::Parameter("one-vs-rest needs at least one target".into()));
    }
    positions.par_iter().map(|&p| train(p).map(|t| (p, t))).collect()
}

/// Index of the largest margin; ties go to the lexically smallest name.
pub fn argmax_class(margins: &[(String, f64)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (name, m)) in margins.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bn, bm) = &margins[b];
                if *m > *bm || (*m == *bm && name < bn) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(score: f64) -> Model {
        Model::Logistic { weights: vec![], bias: (score / (1.0 - score)).ln() }
    }

    fn ens(n: usize, scores: &[f64], betas: &[f64]) -> Ensemble {
        let hypotheses = scores.iter().zip(betas).map(|(&s, &b)| Hypothesis { model: constant(s), beta: b, psi: 0.1 }).collect();
        Ensemble { hypotheses, planned: n, early_stopped: false, gamma: 1.0, output: Output::Score }
    }

    #[test]
    fn update_identities() {
        assert_eq!(weight_update(0.3, 0.7, 0.4, 0.0, Tag::Target), 0.3);
        assert_eq!(weight_update(0.3, 0.7, 0.4, 0.0, Tag::Source), 0.3);
        assert!(weight_update(0.3, 0.7, 0.4, 1.0, Tag::Target) > 0.3);
        assert!(weight_update(0.3, 0.7, 0.4, 1.0, Tag::Source) < 0.3);
    }

    #[test]
    fn target_error_extremes() {
        let data = vec![
            Instance::new(vec![], true, "a", Tag::Target),
            Instance::new(vec![], false, "b", Tag::Target),
            Instance::new(vec![], false, "c", Tag::Source),
        ];
        let half = Model::Logistic { weights: vec![], bias: 0.0 };
        let f = |x: &[f64]| Output::Score.apply(&half, x);
        assert_eq!(error_on_target(f, &data, &[0.7, 0.1, 0.2]).unwrap(), 0.5);
        // a 0.5 score decides class 0: only the positive target instance is wrong
        let g = |x: &[f64]| Output::Label.apply(&half, x);
        assert!((error_on_target(g, &data, &[0.7, 0.1, 0.2]).unwrap() - 0.875).abs() < 1e-12);
        let src_only = vec![data[2].clone()];
        assert!(error_on_target(f, &src_only, &[1.0]).is_err());
    }

    #[test]
    fn window_of_eight() {
        let e = ens(8, &[0.9; 8], &[0.5; 8]);
        assert_eq!(e.voting_range(), Some(4..=8));
        let short = ens(8, &[0.9; 2], &[0.5; 2]);
        assert_eq!(short.voting_range(), None);
        assert!(ensemble_vote(&short, &[]).fallback);
    }

    #[test]
    fn unanimous_votes() {
        assert!(ensemble_predict(&ens(4, &[0.99; 4], &[0.3; 4]), &[]));
        assert!(!ensemble_predict(&ens(4, &[0.01; 4], &[0.3; 4]), &[]));
    }

    #[test]
    fn discount_variants() {
        assert!(source_discount(100, 800, GammaVariant::Original) < 1.0);
        assert_eq!(source_discount(100, 800, GammaVariant::Paper), 1.0);
        assert!(source_discount(5000, 800, GammaVariant::Paper) < 1.0);
        assert_eq!(source_discount(0, 800, GammaVariant::Original), 1.0);
    }

    #[test]
    fn argmax_breaks_ties_lexically() {
        let m = vec![("CA B(x)".to_string(), 0.2), ("CA A(x)".to_string(), 0.2), ("CA C(x)".to_string(), 0.1)];
        assert_eq!(argmax_class(&m), Some(1));
    }
}
