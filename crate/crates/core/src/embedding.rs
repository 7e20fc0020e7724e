//! Per-entailment semantic embeddings: transferability `t`, consistency `c`
//! and the task-level variability weight `v`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::domain::{task_variability, Eq10, SemanticLearningTask, TransferProbe};
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, QualityMetric};
use crate::ontology::{merge_abox, Ontology};
use crate::reasoner::{entailment_closure, is_consistent, Entailment, EntailmentSet};

/// `(α·vO + β·vY) / (α + β)`
pub fn variability_weight(v_o: f64, v_y: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha + beta <= 0.0 {
        return Err(Error::Parameter(format!("need alpha, beta in [0, 1] with alpha + beta > 0, got {alpha}, {beta}")));
    }
    Ok((alpha * v_o + beta * v_y) / (alpha + beta))
}

pub fn is_inter_domain(v: f64) -> bool {
    v > 0.5
}

/// Consistency of single entailments against the union of the target training LSOs.
pub struct ConsistencyChecker {
    union: Ontology,
    known: EntailmentSet,
}

impl ConsistencyChecker {
    pub fn new(target: &SemanticLearningTask) -> Result<Self> {
        let union = target.domain.union_ontology(&target.train);
        let closure = entailment_closure(&union);
        if !closure.consistent {
            return Err(Error::InconsistentTarget);
        }
        Ok(ConsistencyChecker { union, known: closure.set })
    }

    pub fn bit(&self, g: &Entailment) -> bool {
        self.known.contains(g) || is_consistent(&merge_abox(&self.union, std::iter::once(g)))
    }
}

/// 1 iff `{g}` can join the target training union without a clash.
pub fn consistency_bit(g: &Entailment, target: &SemanticLearningTask) -> Result<u8> {
    Ok(ConsistencyChecker::new(target)?.bit(g) as u8)
}

/// `max(0, m(f_{T|{g}}) − m(f_T))` for the target at position `pos`.
pub fn estimate_epsilon(
    g: &Entailment,
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    kind: LearnerKind,
    metric: &dyn QualityMetric,
) -> Result<f64> {
    let probe = TransferProbe::new(source, target, pos, kind, metric)?;
    Ok(probe.gain(&EntailmentSet::new([g.clone()]))?.max(0.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EpsilonMode {
    #[default]
    Exact,
    /// Estimate `k` entailments, impute the rest by the mean of their predicate.
    Sampled(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct EmbeddingOptions {
    pub alpha: f64,
    pub beta: f64,
    pub learner: LearnerKind,
    pub epsilon: EpsilonMode,
    pub eq10: Eq10,
    /// Chooses the sample in [`EpsilonMode::Sampled`].
    pub seed: u64,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        EmbeddingOptions {
            alpha: 0.5,
            beta: 0.5,
            learner: LearnerKind::Logistic,
            epsilon: EpsilonMode::Exact,
            eq10: Eq10::SymDiff,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    /// Sorted, target entailments excluded.
    pub index: Vec<Entailment>,
    pub t: Vec<f64>,
    pub c: Vec<u8>,
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub in_source: Vec<bool>,
    pub in_target: Vec<bool>,
}

impl EmbeddingMatrix {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn position(&self, g: &Entailment) -> Option<usize> {
        self.index.binary_search(g).ok()
    }

    /// `(t_j, c_j, v)`
    pub fn features(&self, j: usize) -> Vec<f64> {
        vec![self.t[j], self.c[j] as f64, self.v]
    }

    /// SHA-256 of the index, one entailment per line.
    pub fn index_hash(&self) -> String {
        let mut h = Sha256::new();
        for g in &self.index {
            h.update(g.to_string().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows: Vec<(String, usize)> = self.index.iter().enumerate().map(|(j, g)| (g.to_string(), j)).collect();
        rows.sort();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["entailment", "t", "c", "v", "source_member", "target_member"])?;
        for (text, j) in rows {
            w.write_record([
                text,
                self.t[j].to_string(),
                self.c[j].to_string(),
                self.v.to_string(),
                (self.in_source[j] as u8).to_string(),
                (self.in_target[j] as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`EmbeddingMatrix::write_csv`]. `alpha`/`beta` are not stored there.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != ["entailment", "t", "c", "v", "source_member", "target_member"] {
            return Err(Error::Schema(format!("unexpected embedding header {header:?}")));
        }
        let bad = |what: &str| Error::Schema(format!("bad {what} value"));
        let mut rows = Vec::new();
        let mut v = 0.0;
        for rec in r.records() {
            let rec = rec?;
            let g: Entailment = rec[0].parse().map_err(|_| bad("entailment"))?;
            let t: f64 = rec[1].parse().map_err(|_| bad("t"))?;
            let c: u8 = rec[2].parse().map_err(|_| bad("c"))?;
            v = rec[3].parse().map_err(|_| bad("v"))?;
            rows.push((g, t, c, &rec[4] == "1", &rec[5] == "1"));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(EmbeddingMatrix {
            index: rows.iter().map(|r| r.0.clone()).collect(),
            t: rows.iter().map(|r| r.1).collect(),
            c: rows.iter().map(|r| r.2).collect(),
            v,
            alpha: f64::NAN,
            beta: f64::NAN,
            in_source: rows.iter().map(|r| r.3).collect(),
            in_target: rows.iter().map(|r| r.4).collect(),
        })
    }
}

/// Sorted training entailments of both tasks, minus the target entailments of both domains.
pub fn embedding_index(source: &SemanticLearningTask, target: &SemanticLearningTask) -> Vec<Entailment> {
    let labels = source.domain.target_set().union(&target.domain.target_set());
    source.closure().union(&target.closure()).iter().filter(|g| !labels.contains(g)).cloned().collect()
}

/// Embeds every entailment of the source and target training LSOs, minus the
/// target entailments of both domains. `pos` selects the target whose labels
/// drive transferability.
pub fn build_embedding_matrix(
    source: &SemanticLearningTask,
    target: &SemanticLearningTask,
    pos: usize,
    opts: &EmbeddingOptions,
    metric: &dyn QualityMetric,
) -> Result<EmbeddingMatrix> {
    let (v_o, v_y) = task_variability(source, target, opts.eq10).pair();
    let v = variability_weight(v_o, v_y, opts.alpha, opts.beta)?;
    let gs = source.closure();
    let gt = target.closure();
    let index = embedding_index(source, target);

    let checker = ConsistencyChecker::new(target)?;
    let c: Vec<u8> = index.par_iter().map(|g| checker.bit(g) as u8).collect();

    let probe = TransferProbe::new(source, target, pos, opts.learner, metric)?;
    let estimate = |g: &Entailment| -> Result<f64> { Ok(probe.gain(&EntailmentSet::new([g.clone()]))?.max(0.0)) };
    let t = match opts.epsilon {
        EpsilonMode::Exact => index.par_iter().map(estimate).collect::<Result<Vec<f64>>>()?,
        EpsilonMode::Sampled(k) => {
            let mut order: Vec<usize> = (0..index.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
            order.truncate(k);
            order.sort_unstable();
            let measured: Vec<f64> = order.par_iter().map(|&j| estimate(&index[j])).collect::<Result<_>>()?;
            impute(&index, &order, &measured)
        }
    };
    Ok(EmbeddingMatrix {
        in_source: index.iter().map(|g| gs.contains(g)).collect(),
        in_target: index.iter().map(|g| gt.contains(g)).collect(),
        index,
        t,
        c,
        v,
        alpha: opts.alpha,
        beta: opts.beta,
    })
}

/// Fills unmeasured entries with the mean measured value of the same
/// predicate, or the overall measured mean when the predicate has none.
fn impute(index: &[Entailment], measured_at: &[usize], measured: &[f64]) -> Vec<f64> {
    let mut by_class: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (&j, &val) in measured_at.iter().zip(measured) {
        let e = by_class.entry(index[j].predicate()).or_insert((0.0, 0));
        e.0 += val;
        e.1 += 1;
    }
    let overall = if measured.is_empty() { 0.0 } else { measured.iter().sum::<f64>() / measured.len() as f64 };
    let mut t: Vec<f64> = index
        .iter()
        .map(|g| by_class.get(g.predicate()).map_or(overall, |(s, n)| s / *n as f64))
        .collect();
    for (&j, &val) in measured_at.iter().zip(measured) {
        t[j] = val;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_projections() {
        assert_eq!(variability_weight(2.0 / 3.0, 0.0, 0.5, 0.5).unwrap(), 1.0 / 3.0);
        assert_eq!(variability_weight(0.3, 0.9, 1.0, 0.0).unwrap(), 0.3);
        assert!(variability_weight(0.3, 0.9, 0.0, 0.0).is_err());
        assert!(!is_inter_domain(1.0 / 3.0));
        assert!(is_inter_domain(0.7));
    }

    #[test]
    fn imputation_uses_predicate_means() {
        let index: Vec<Entailment> =
            ["CA A(x)", "CA A(y)", "CA B(x)", "RA r(x,y)"].iter().map(|s| s.parse().unwrap()).collect();
        let t = impute(&index, &[0, 2], &[0.2, 0.4]);
        assert_eq!(t, vec![0.2, 0.2, 0.4, (0.2 + 0.4) / 2.0]);
    }
}
