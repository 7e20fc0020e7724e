//! Cross-validated evaluation of the three algorithms and the CSV/JSON report surface.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boost::{predict_lso, predict_lso_presence, stadab_train, tradaboost_train, Algo, BoostConfig};
use crate::domain::{LearningDomain, SemanticLearningTask};
use crate::embedding::embedding_index;
use crate::error::{Error, Result};
use crate::learner::{stratified_folds, CvAccuracy};

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub boost: BoostConfig,
    /// Folds of the outer evaluation and of the inner quality metric.
    pub cv_folds: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { boost: BoostConfig::default(), cv_folds: 5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    /// Largest number of boosting rounds kept in any fold.
    pub iterations_run: usize,
    pub early_stopped: bool,
    /// Test LSOs with no embedded entailment, predicted 0.
    pub empty_lsos: usize,
    pub fold_accuracy: Vec<f64>,
}

/// Stratified k-fold accuracy over the target training LSOs for the target
/// at `pos`. Each fold rebuilds the embedding from the source and the fold's
/// training part only. `Plain` runs the semantic pipeline with no source LSOs.
pub fn cv_evaluate(source: &LearningDomain, target: &LearningDomain, pos: usize, algo: Algo, opts: &EvalOptions) -> Result<EvalResult> {
    opts.boost.validate()?;
    let base = target.task();
    let keys: Vec<String> = base.train.iter().map(|&i| target.lsos[i].id.clone()).collect();
    let labels = base.labels(pos);
    let folds = stratified_folds(&keys, &labels, opts.cv_folds, opts.boost.seed)?;
    let full_source = source.task();
    let src = if algo == Algo::Plain { full_source.restricted(Vec::new()) } else { full_source };
    let metric = CvAccuracy { folds: opts.cv_folds, seed: opts.boost.seed };

    let mut out = EvalResult { accuracy: 0.0, iterations_run: 0, early_stopped: false, empty_lsos: 0, fold_accuracy: Vec::new() };
    for f in 0..opts.cv_folds {
        let pick = |inside: bool| -> Vec<usize> {
            base.train.iter().zip(&folds).filter(|(_, &g)| (g == f) == inside).map(|(&i, _)| i).collect()
        };
        let (test, train) = (pick(true), pick(false));
        let tgt = SemanticLearningTask::with_split(target, train, test.clone())?;
        let mut hits = 0;
        let ens = match algo {
            Algo::Stadab | Algo::Plain => {
                let (ens, emb) = stadab_train(&src, &tgt, pos, &opts.boost, &metric)?;
                for &i in &test {
                    let p = predict_lso(&ens, &target.closure(i).set, &emb);
                    out.empty_lsos += p.empty as usize;
                    hits += (p.label == target.truth(i, pos)) as usize;
                }
                ens
            }
            Algo::Tradaboost => {
                let index = embedding_index(&src, &tgt);
                let ens = tradaboost_train(&src, &tgt, pos, &opts.boost, &index)?;
                for &i in &test {
                    hits += (predict_lso_presence(&ens, &target.closure(i).set, &index) == target.truth(i, pos)) as usize;
                }
                ens
            }
        };
        out.iterations_run = out.iterations_run.max(ens.hypotheses.len());
        out.early_stopped |= ens.early_stopped;
        out.fold_accuracy.push(hits as f64 / test.len() as f64);
    }
    out.accuracy = out.fold_accuracy.iter().sum::<f64>() / opts.cv_folds as f64;
    Ok(out)
}

/// One row of a run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algo: String,
    pub case_id: String,
    pub consistency_ratio: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub n_iterations_run: usize,
    pub early_stopped: bool,
    /// 0 unless timing was requested, so reports stay reproducible.
    pub wall_time_ms: u64,
}

pub const REPORT_HEADER: [&str; 8] =
    ["algo", "case_id", "consistency_ratio", "seed", "accuracy", "n_iterations_run", "early_stopped", "wall_time_ms"];

/// Evaluates and wraps the result as a report row.
#[allow(clippy::too_many_arguments)]
pub fn run_case(
    source: &LearningDomain,
    target: &LearningDomain,
    pos: usize,
    algo: Algo,
    opts: &EvalOptions,
    case_id: &str,
    consistency_ratio: f64,
    timing: bool,
) -> Result<RunRow> {
    let start = Instant::now();
    let r = cv_evaluate(source, target, pos, algo, opts)?;
    Ok(RunRow {
        algo: algo.to_string(),
        case_id: case_id.to_string(),
        consistency_ratio,
        seed: opts.boost.seed,
        accuracy: r.accuracy,
        n_iterations_run: r.iterations_run,
        early_stopped: r.early_stopped,
        wall_time_ms: if timing { start.elapsed().as_millis() as u64 } else { 0 },
    })
}

pub fn write_report<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(REPORT_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(Error::Schema(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: RunRow = rec.map_err(|e| Error::Schema(e.to_string()))?;
        if !(0.0..=1.0).contains(&row.accuracy) {
            return Err(Error::Schema(format!("accuracy {} outside [0, 1]", row.accuracy)));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stats {
    pub fn of(xs: &[f64]) -> Stats {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Stats { n, mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioBucket {
    pub consistency_ratio: f64,
    pub count: usize,
    pub algos: BTreeMap<String, Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub a: String,
    pub b: String,
    /// `(mean_a − mean_b) / mean_b · 100` over all rows.
    pub delta_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub ratios: Vec<RatioBucket>,
    pub overall: BTreeMap<String, Stats>,
    pub deltas: Vec<Delta>,
}

fn by_algo<'a>(rows: impl Iterator<Item = &'a RunRow>) -> BTreeMap<String, Stats> {
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        acc.entry(r.algo.clone()).or_default().push(r.accuracy);
    }
    acc.into_iter().map(|(k, v)| (k, Stats::of(&v))).collect()
}

pub fn aggregate(rows: &[RunRow]) -> Result<Aggregate> {
    if rows.is_empty() {
        return Err(Error::Schema("no report rows".into()));
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.consistency_ratio).collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let buckets = ratios
        .iter()
        .map(|&q| {
            let members: Vec<&RunRow> = rows.iter().filter(|r| r.consistency_ratio == q).collect();
            RatioBucket { consistency_ratio: q, count: members.len(), algos: by_algo(members.into_iter()) }
        })
        .collect();
    let overall = by_algo(rows.iter());
    let names: Vec<&String> = overall.keys().collect();
    let mut deltas = Vec::new();
    for a in &names {
        for b in &names {
            if a != b {
                let (ma, mb) = (overall[*a].mean, overall[*b].mean);
                deltas.push(Delta { a: (*a).clone(), b: (*b).clone(), delta_pct: (ma - mb) / mb * 100.0 });
            }
        }
    }
    Ok(Aggregate { ratios: buckets, overall, deltas })
}
