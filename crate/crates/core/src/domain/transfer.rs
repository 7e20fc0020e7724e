//! Semantic transferability of source knowledge and its (in)consistency with
//! the target domain.
//!
//! Gains are measured on an LSO-level view: each target training LSO is an
//! instance whose features are the presence of the entailments of `S` in its
//! closure. The reference learner sees no features at all. The transfer
//! learner sees the `S` features and is also trained on every source LSO that
//! entails something in `S`, labeled with the source target at the same
//! position. Target entailments are never used as features.

use std::collections::BTreeSet;

use super::SemanticLearningTask;
use crate::error::{Error, Result};
use crate::learner::{Instance, LearnerKind, QualityMetric, Tag};
use crate::ontology::merge_abox;
use crate::reasoner::{is_consistent, Entailment, EntailmentSet};

#[derive(Clone, Debug, PartialEq)]
pub struct TransferVerdict {
    pub transferable: bool,
    /// `m(f_{T|S}) − m(f_T)`, reported whatever the verdict.
    pub gain: f64,
    /// `S` holds an entailment missing from the target closure.
    pub novel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnowledgeClass {
    ConsistentTransferable,
    InconsistentTransferable,
    NonTransferable,
}

impl std::fmt::Display for KnowledgeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KnowledgeClass::ConsistentTransferable => "consistent-transferable",
            KnowledgeClass::InconsistentTransferable => "inconsistent-transferable",
            KnowledgeClass::NonTransferable => "non-transferable",
        })
    }
}

/// Reusable gain measurement for one (source, target, target position) triple.
/// The reference score does not depend on `S` and is computed once.
pub struct TransferProbe<'a> {
    source: &'a SemanticLearningTask<'a>,
    target: &'a SemanticLearningTask<'a>,
    pos: usize,
    kind: LearnerKind,
    metric: &'a dyn QualityMetric,
    labels: Vec<bool>,
    targets: BTreeSet<Entailment>,
    reference: f64,
}

impl<'a> TransferProbe<'a> {
    pub fn new(
        source: &'a SemanticLearningTask<'a>,
        target: &'a SemanticLearningTask<'a>,
        pos: usize,
        kind: LearnerKind,
        metric: &'a dyn QualityMetric,
    ) -> Result<Self> {
        if target.train.is_empty() {
            return Err(Error::EmptyTargetTraining);
        }
        if pos >= target.domain.targets.len() || (!source.train.is_empty() && pos >= source.domain.targets.len()) {
            return Err(Error::Parameter(format!("no target entailment at position {pos}")));
        }
        let labels = target.labels(pos);
        let blind: Vec<Instance> = target
            .train
            .iter()
            .zip(&labels)
            .map(|(&i, &y)| Instance::new(Vec::new(), y, target.domain.lsos[i].id.clone(), Tag::Target))
            .collect();
        let reference = metric.score(&blind, &[], kind)?;
        let mut targets: BTreeSet<Entailment> = target.domain.targets.iter().cloned().collect();
        targets.extend(source.domain.targets.iter().cloned());
        Ok(TransferProbe { source, target, pos, kind, metric, labels, targets, reference })
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    /// Gain of `s`; 0 when no source LSO entails anything in `s`.
    pub fn gain(&self, s: &EntailmentSet) -> Result<f64> {
        let feats: Vec<&Entailment> = s.iter().filter(|g| !self.targets.contains(g)).collect();
        let presence = |set: &EntailmentSet| feats.iter().map(|g| if set.contains(g) { 1.0 } else { 0.0 }).collect();
        let sd = self.source.domain;
        let extra: Vec<Instance> = self
            .source
            .train
            .iter()
            .filter(|&&j| s.iter().any(|g| sd.closure(j).set.contains(g)))
            .map(|&j| Instance::new(presence(&sd.closure(j).set), sd.truth(j, self.pos), sd.lsos[j].id.clone(), Tag::Source))
            .collect();
        if extra.is_empty() {
            return Ok(0.0);
        }
        let td = self.target.domain;
        let train: Vec<Instance> = self
            .target
            .train
            .iter()
            .zip(&self.labels)
            .map(|(&i, &y)| Instance::new(presence(&td.closure(i).set), y, td.lsos[i].id.clone(), Tag::Target))
            .collect();
        Ok(self.metric.score(&train, &extra, self.kind)? - self.reference)
    }
}

/// Transferable iff the gain exceeds `epsilon` and `S` is new to the target closure.
pub fn assess_transferability(
    s: &EntailmentSet,
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    kind: LearnerKind,
    metric: &dyn QualityMetric,
    epsilon: f64,
) -> Result<TransferVerdict> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if target.train.is_empty() {
        return Err(Error::EmptyTargetTraining);
    }
    if s.is_empty() {
        return Ok(TransferVerdict { transferable: false, gain: 0.0, novel: false });
    }
    let gt = target.closure();
    let novel = !s.is_subset(&gt);
    let probe = TransferProbe::new(source, target, pos, kind, metric)?;
    let gain = probe.gain(s)?;
    Ok(TransferVerdict { transferable: novel && gain > epsilon, gain, novel })
}

/// Splits transferable knowledge by whether it can be added to the union of
/// the target training LSOs without a clash.
pub fn classify_knowledge(
    s: &EntailmentSet,
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    kind: LearnerKind,
    metric: &dyn QualityMetric,
    epsilon: f64,
) -> Result<(KnowledgeClass, TransferVerdict)> {
    let v = assess_transferability(s, source, target, pos, kind, metric, epsilon)?;
    if !v.transferable {
        return Ok((KnowledgeClass::NonTransferable, v));
    }
    let union = target.domain.union_ontology(&target.train);
    let class = if is_consistent(&merge_abox(&union, s.iter())) {
        KnowledgeClass::ConsistentTransferable
    } else {
        KnowledgeClass::InconsistentTransferable
    };
    Ok((class, v))
}
