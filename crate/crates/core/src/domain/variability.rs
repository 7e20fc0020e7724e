use std::collections::BTreeSet;

use super::SemanticLearningTask;
use crate::reasoner::{Entailment, EntailmentSet};

/// How the variant set is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Eq10 {
    /// Entailments in exactly one of the two closures.
    #[default]
    SymDiff,
    /// `g ∈ G_T ∨ g ∉ G_S` over the union, as printed. Overlaps the invariant set.
    Literal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariabilityReport {
    pub variant: EntailmentSet,
    pub invariant: EntailmentSet,
    pub domain_ratio: f64,
    /// Filled by [`task_variability`]; 0 for a plain closure comparison.
    pub target_ratio: f64,
    /// Set when a ratio had an empty denominator and was defined as 0.
    pub degenerate: bool,
}

impl VariabilityReport {
    /// `(vO, vY)`
    pub fn pair(&self) -> (f64, f64) {
        (self.domain_ratio, self.target_ratio)
    }
}

fn split(gs: &BTreeSet<Entailment>, gt: &BTreeSet<Entailment>, mode: Eq10) -> (BTreeSet<Entailment>, BTreeSet<Entailment>) {
    let invariant: BTreeSet<Entailment> = gs.intersection(gt).cloned().collect();
    let variant = match mode {
        Eq10::SymDiff => gs.symmetric_difference(gt).cloned().collect(),
        Eq10::Literal => gs.union(gt).filter(|g| gt.contains(g) || !gs.contains(g)).cloned().collect(),
    };
    (variant, invariant)
}

fn ratio(variant: usize, invariant: usize) -> (f64, bool) {
    let den = variant + invariant;
    if den == 0 {
        (0.0, true)
    } else {
        (variant as f64 / den as f64, false)
    }
}

pub fn domain_variability(gs: &EntailmentSet, gt: &EntailmentSet) -> VariabilityReport {
    domain_variability_with(gs, gt, Eq10::SymDiff)
}

pub fn domain_variability_with(gs: &EntailmentSet, gt: &EntailmentSet, mode: Eq10) -> VariabilityReport {
    let (variant, invariant) = split(&gs.entailments, &gt.entailments, mode);
    let (domain_ratio, degenerate) = ratio(variant.len(), invariant.len());
    VariabilityReport {
        variant: EntailmentSet::new(variant),
        invariant: EntailmentSet::new(invariant),
        domain_ratio,
        target_ratio: 0.0,
        degenerate,
    }
}

/// `(vO, vY)` between two tasks: closure variability of their training LSOs
/// and variability of their target entailment sets.
pub fn task_variability(source: &SemanticLearningTask, target: &SemanticLearningTask, mode: Eq10) -> VariabilityReport {
    let mut r = domain_variability_with(&source.closure(), &target.closure(), mode);
    let ys = source.domain.target_set();
    let yt = target.domain.target_set();
    let (v, i) = split(&ys.entailments, &yt.entailments, mode);
    let (target_ratio, deg) = ratio(v.len(), i.len());
    r.target_ratio = target_ratio;
    r.degenerate |= deg;
    r
}
