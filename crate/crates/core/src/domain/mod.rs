//! Learning sample ontologies, learning domains and tasks, plus the
//! entailment-based variability measures between two tasks.

mod bundle;
mod transfer;
mod variability;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ontology::{Ontology, Signature};
use crate::reasoner::{entailment_closure, entails, Closure, Entailment, EntailmentSet};

pub use bundle::{load_lso_bundle, save_lso_bundle, Split};
pub use transfer::{assess_transferability, classify_knowledge, KnowledgeClass, TransferProbe, TransferVerdict};
pub use variability::{domain_variability, domain_variability_with, task_variability, Eq10, VariabilityReport};

/// One learning sample: the shared TBox plus its own ABox, and free-form annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct Lso {
    pub id: String,
    pub ontology: Ontology,
    pub annotations: BTreeMap<String, String>,
}

impl Lso {
    pub fn new(id: impl Into<String>, ontology: Ontology) -> Self {
        Lso { id: id.into(), ontology, annotations: BTreeMap::new() }
    }
}

pub fn target_truth(lso: &Lso, target: &Entailment) -> Result<bool> {
    entails(&lso.ontology, target)
}

/// LSOs sharing one TBox, with the target entailments whose truth is predicted.
/// Closures are computed once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningDomain {
    pub lsos: Vec<Lso>,
    pub targets: Vec<Entailment>,
    /// Shared TBox, with the signature of the TBox document.
    pub tbox: Ontology,
    pub annotations: BTreeMap<String, String>,
    /// LSOs held out from training.
    pub test_ids: BTreeSet<String>,
    closures: Vec<Closure>,
}

impl LearningDomain {
    /// Validates and normalizes: every LSO must carry exactly the shared TBox,
    /// ids must be unique and targets must be over the domain signature.
    pub fn new(tbox: Ontology, mut lsos: Vec<Lso>, targets: Vec<Entailment>) -> Result<Self> {
        let tbox = tbox.normalized();
        for l in &mut lsos {
            l.ontology = l.ontology.normalized();
        }
        if targets.is_empty() {
            return Err(Error::Manifest("a domain needs at least one target entailment".into()));
        }
        let shared = tbox.canonical_tbox();
        let mut ids = BTreeSet::new();
        for l in &lsos {
            if !ids.insert(l.id.as_str()) {
                return Err(Error::Manifest(format!("duplicate LSO id `{}`", l.id)));
            }
            if l.ontology.canonical_tbox() != shared {
                return Err(Error::TboxMismatch(format!("LSO `{}` has its own TBox", l.id)));
            }
        }
        let mut sig = tbox.signature.clone();
        for l in &lsos {
            sig.extend(&l.ontology.signature);
        }
        for t in &targets {
            check_entailment(t, &sig)?;
        }
        let closures = lsos.par_iter().map(|l| entailment_closure(&l.ontology)).collect();
        Ok(LearningDomain { lsos, targets, tbox, annotations: BTreeMap::new(), test_ids: BTreeSet::new(), closures })
    }

    /// Builds an LSO over the shared TBox from ABox axioms.
    pub fn lso_from_abox(tbox: &Ontology, id: &str, abox: Vec<crate::ontology::Axiom>) -> Lso {
        Lso::new(id, tbox.with_abox(abox))
    }

    pub fn closure(&self, i: usize) -> &Closure {
        &self.closures[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.lsos.iter().position(|l| l.id == id)
    }

    /// Truth of the target at `pos` in LSO `i`, read from the cached closure.
    pub fn truth(&self, i: usize, pos: usize) -> bool {
        self.closures[i].set.contains(&self.targets[pos])
    }

    pub fn signature(&self) -> Signature {
        let mut sig = self.tbox.signature.clone();
        for l in &self.lsos {
            sig.extend(&l.ontology.signature);
        }
        sig
    }

    /// Ontology holding the shared TBox and the union of the ABoxes of `idx`.
    pub fn union_ontology(&self, idx: &[usize]) -> Ontology {
        crate::reasoner::union_ontology(&self.tbox, idx.iter().map(|&i| &self.lsos[i].ontology))
    }

    /// Union of the per-LSO closures over `idx`.
    pub fn union_closure(&self, idx: &[usize]) -> EntailmentSet {
        let mut out = BTreeSet::new();
        for &i in idx {
            out.extend(self.closures[i].set.iter().cloned());
        }
        EntailmentSet::new(out)
    }

    pub fn target_set(&self) -> EntailmentSet {
        EntailmentSet::new(self.targets.iter().cloned())
    }

    pub fn task(&self) -> SemanticLearningTask<'_> {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.lsos.len()).partition(|&i| self.test_ids.contains(&self.lsos[i].id));
        SemanticLearningTask { domain: self, train, test }
    }
}

fn check_entailment(g: &Entailment, sig: &Signature) -> Result<()> {
    let (names, kinds): (Vec<&str>, Vec<&BTreeSet<String>>) = match g {
        Entailment::Concept { concept, individual } => {
            (vec![concept, individual], vec![&sig.concepts, &sig.individuals])
        }
        Entailment::Role { role, from, to } => {
            (vec![role, from, to], vec![&sig.roles, &sig.individuals, &sig.individuals])
        }
    };
    for (n, k) in names.into_iter().zip(kinds) {
        if !k.contains(n) {
            return Err(Error::UnknownName(n.to_string()));
        }
    }
    Ok(())
}

/// Union of the closures of a set of LSOs. All of them must share one TBox.
pub fn closure_of_lso_set(lsos: &[&Lso]) -> Result<EntailmentSet> {
    if let Some(first) = lsos.first() {
        let tbox = first.ontology.canonical_tbox();
        if let Some(l) = lsos.iter().find(|l| l.ontology.canonical_tbox() != tbox) {
            return Err(Error::TboxMismatch(format!("LSO `{}` differs from `{}`", l.id, first.id)));
        }
    }
    let sets: Vec<Closure> = lsos.par_iter().map(|l| entailment_closure(&l.ontology)).collect();
    let mut out = BTreeSet::new();
    for c in sets {
        out.extend(c.set.entailments);
    }
    Ok(EntailmentSet::new(out))
}

/// A domain with a train/test partition of its LSOs (indices into `domain.lsos`).
#[derive(Clone, Debug)]
pub struct SemanticLearningTask<'a> {
    pub domain: &'a LearningDomain,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl<'a> SemanticLearningTask<'a> {
    pub fn with_split(domain: &'a LearningDomain, train: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        let n = domain.lsos.len();
        let tr: BTreeSet<usize> = train.iter().copied().collect();
        if train.iter().chain(&test).any(|&i| i >= n) || test.iter().any(|i| tr.contains(i)) {
            return Err(Error::Parameter("train and test must be disjoint LSO subsets".into()));
        }
        Ok(SemanticLearningTask { domain, train, test })
    }

    pub fn train_ids(&self) -> Vec<&str> {
        self.train.iter().map(|&i| self.domain.lsos[i].id.as_str()).collect()
    }

    pub fn test_ids(&self) -> Vec<&str> {
        self.test.iter().map(|&i| self.domain.lsos[i].id.as_str()).collect()
    }

    /// Entailments of the training LSOs.
    pub fn closure(&self) -> EntailmentSet {
        self.domain.union_closure(&self.train)
    }

    /// Same domain, training restricted to `train`.
    pub fn restricted(&self, train: Vec<usize>) -> Self {
        SemanticLearningTask { domain: self.domain, train, test: Vec::new() }
    }

    pub fn labels(&self, pos: usize) -> Vec<bool> {
        self.train.iter().map(|&i| self.domain.truth(i, pos)).collect()
    }
}
