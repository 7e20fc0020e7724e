use std::fs;
use std::path::Path;

use super::{Algo, Ensemble, Hypothesis};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, Model};
use crate::reasoner::Entailment;

const HEADER: &str = "semtl-ensemble 1";

/// A trained ensemble for one target, stored next to the embedding it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub algo: Algo,
    pub target: Entailment,
    pub learner: LearnerKind,
    pub ensemble: Ensemble,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

fn render(b: &ModelBundle, index_hash: &str) -> String {
    let e = &b.ensemble;
    let mut s = format!(
        "{HEADER}\nalgo {}\ntarget {}\nlearner {}\noutput {}\nindex-sha256 {index_hash}\nplanned {}\nearly-stopped {}\ngamma {}\nhypotheses {}\n",
        b.algo,
        b.target,
        b.learner,
        e.output,
        e.planned,
        e.early_stopped,
        e.gamma,
        e.hypotheses.len()
    );
    for h in &e.hypotheses {
        s.push_str(&format!("{} {} {}\n", h.psi, h.beta, h.model));
    }
    s
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines.next().ok_or_else(|| bad(format!("missing `{key}`")))?;
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected `{key}`, found `{line}`")))
}

fn parse<T: std::str::FromStr>(text: &str, key: &str) -> Result<T> {
    text.parse().map_err(|_| bad(format!("bad {key} `{text}`")))
}

fn read(text: &str) -> Result<(ModelBundle, String)> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad("missing header"));
    }
    let algo = parse(field(&mut lines, "algo")?, "algo")?;
    let target = parse(field(&mut lines, "target")?, "target")?;
    let learner = parse(field(&mut lines, "learner")?, "learner")?;
    let output = parse(field(&mut lines, "output")?, "output")?;
    let hash = field(&mut lines, "index-sha256")?.to_string();
    let planned = parse(field(&mut lines, "planned")?, "planned")?;
    let early_stopped = parse(field(&mut lines, "early-stopped")?, "early-stopped")?;
    let gamma = parse(field(&mut lines, "gamma")?, "gamma")?;
    let n: usize = parse(field(&mut lines, "hypotheses")?, "hypotheses")?;
    let mut hypotheses = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated hypothesis list"))?;
        let mut parts = line.splitn(3, ' ');
        let psi = parse(parts.next().unwrap_or(""), "psi")?;
        let beta = parse(parts.next().unwrap_or(""), "beta")?;
        let model: Model = parse(parts.next().unwrap_or(""), "model")?;
        hypotheses.push(Hypothesis { model, beta, psi });
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(bad("trailing content"));
    }
    let ensemble = Ensemble { hypotheses, planned, early_stopped, gamma, output };
    Ok((ModelBundle { algo, target, learner, ensemble }, hash))
}

/// Writes `ensemble.txt` and `embedding.csv` into `dir`.
pub fn save_ensemble(bundle: &ModelBundle, emb: &EmbeddingMatrix, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("ensemble.txt"), render(bundle, &emb.index_hash()))?;
    emb.write_csv(fs::File::create(dir.join("embedding.csv"))?)
}

/// Loads a bundle and refuses it when the stored embedding index does not
/// hash to the recorded value.
pub fn load_ensemble(dir: &Path) -> Result<(ModelBundle, EmbeddingMatrix)> {
    let open = |name: &str| {
        let p = dir.join(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::MissingFile(p))
        }
    };
    let (bundle, hash) = read(&fs::read_to_string(open("ensemble.txt")?)?)?;
    let emb = EmbeddingMatrix::read_csv(fs::File::open(open("embedding.csv")?)?)?;
    if emb.index_hash() != hash {
        return Err(bad("embedding index does not match the trained model"));
    }
    Ok((bundle, emb))
}
