use crate::domain::SemanticLearningTask;
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::learner::{Instance, Tag};
use crate::reasoner::Entailment;

fn check_pos(source: &SemanticLearningTask, target: &SemanticLearningTask, pos: usize) -> Result<()> {
    if pos >= target.domain.targets.len() || (!source.train.is_empty() && pos >= source.domain.targets.len()) {
        return Err(Error::Parameter(format!("no target entailment at position {pos}")));
    }
    Ok(())
}

/// One instance per (training LSO, embedded entailment of its closure), labeled
/// with the LSO's truth for the target at `pos`.
pub fn build_training_instances(
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    emb: &EmbeddingMatrix,
    pos: usize,
) -> Result<Vec<Instance>> {
    check_pos(source, target, pos)?;
    let mut out = Vec::new();
    for (task, tag) in [(source, Tag::Source), (target, Tag::Target)] {
        let d = task.domain;
        for &i in &task.train {
            let y = d.truth(i, pos);
            for g in d.closure(i).set.iter() {
                if let Some(j) = emb.position(g) {
                    let mut inst = Instance::new(emb.features(j), y, d.lsos[i].id.clone(), tag);
                    inst.provenance.entailment = Some(g.clone());
                    out.push(inst);
                }
            }
        }
    }
    if !out.iter().any(|i| i.provenance.tag == Tag::Target) {
        return Err(Error::EmptyTargetTraining);
    }
    Ok(out)
}

/// One instance per training LSO with presence features over `index`.
pub fn presence_instances(
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    index: &[Entailment],
    pos: usize,
) -> Result<Vec<Instance>> {
    check_pos(source, target, pos)?;
    if target.train.is_empty() {
        return Err(Error::EmptyTargetTraining);
    }
    let mut out = Vec::new();
    for (task, tag) in [(source, Tag::Source), (target, Tag::Target)] {
        let d = task.domain;
        for &i in &task.train {
            let set = &d.closure(i).set;
            let x = index.iter().map(|g| if set.contains(g) { 1.0 } else { 0.0 }).collect();
            out.push(Instance::new(x, d.truth(i, pos), d.lsos[i].id.clone(), tag));
        }
    }
    Ok(out)
}
