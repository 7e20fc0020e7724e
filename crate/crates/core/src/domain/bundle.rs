//! On-disk LSO bundles: a directory holding `manifest.json`, a shared TBox
//! document and one ABox document per LSO.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LearningDomain, Lso};
use crate::error::{Error, Result};
use crate::ontology::{parse_ontology, parse_ontology_with, serialize_ontology, Ontology, Signature};
use crate::reasoner::Entailment;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    annotations: BTreeMap<String, String>,
    tbox: String,
    lsos: Vec<LsoEntry>,
    targets: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LsoEntry {
    id: String,
    abox: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    annotations: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "is_train")]
    split: Split,
}

fn is_train(s: &Split) -> bool {
    *s == Split::Train
}

fn read(dir: &Path, file: &str) -> Result<String> {
    let p = dir.join(file);
    if !p.is_file() {
        return Err(Error::MissingFile(p));
    }
    Ok(fs::read_to_string(p)?)
}

pub fn load_lso_bundle(dir: impl AsRef<Path>) -> Result<LearningDomain> {
    let dir = dir.as_ref();
    let text = read(dir, "manifest.json")?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    let tbox = parse_ontology(&read(dir, &m.tbox)?)?;
    if !tbox.abox.is_empty() {
        return Err(Error::Manifest(format!("`{}` must hold TBox axioms only", m.tbox)));
    }
    let mut lsos = Vec::with_capacity(m.lsos.len());
    let mut test_ids = std::collections::BTreeSet::new();
    for e in m.lsos {
        let own = parse_ontology_with(&read(dir, &e.abox)?, &tbox.signature)?;
        // An LSO document with TBox axioms of its own is checked against the shared TBox.
        let ontology = if own.tbox.is_empty() {
            let mut o = tbox.with_abox(own.abox);
            o.signature.extend(&own.signature);
            o
        } else {
            own
        };
        if e.split == Split::Test {
            test_ids.insert(e.id.clone());
        }
        lsos.push(Lso { id: e.id, ontology, annotations: e.annotations });
    }
    let targets = m
        .targets
        .iter()
        .map(|t| t.parse::<Entailment>().map_err(|_| Error::Manifest(format!("bad target `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut d = LearningDomain::new(tbox, lsos, targets)?;
    d.annotations = m.annotations;
    d.test_ids = test_ids;
    Ok(d)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') && !id.starts_with('.')
}

/// Writes `d` as a bundle into `dir` (created if needed). Output is canonical,
/// so saving the same domain twice gives identical files.
pub fn save_lso_bundle(d: &LearningDomain, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let tbox_file = "shared.onto".to_string();
    fs::write(dir.join(&tbox_file), serialize_ontology(&d.tbox))?;
    let mut entries = Vec::with_capacity(d.lsos.len());
    for l in &d.lsos {
        if !valid_id(&l.id) || l.id == "shared" || l.id == "manifest" {
            return Err(Error::Parameter(format!("LSO id `{}` is not usable as a file name", l.id)));
        }
        let mut extra = Signature::default();
        for n in &l.ontology.signature.concepts {
            if !d.tbox.signature.concepts.contains(n) {
                extra.concepts.insert(n.clone());
            }
        }
        for n in &l.ontology.signature.roles {
            if !d.tbox.signature.roles.contains(n) {
                extra.roles.insert(n.clone());
            }
        }
        for n in &l.ontology.signature.individuals {
            if !d.tbox.signature.individuals.contains(n) {
                extra.individuals.insert(n.clone());
            }
        }
        let own = Ontology { signature: extra, tbox: Vec::new(), abox: l.ontology.abox.clone() };
        let file = format!("{}.onto", l.id);
        fs::write(dir.join(&file), serialize_ontology(&own))?;
        let split = if d.test_ids.contains(&l.id) { Split::Test } else { Split::Train };
        entries.push(LsoEntry { id: l.id.clone(), abox: file, annotations: l.annotations.clone(), split });
    }
    let m = Manifest {
        annotations: d.annotations.clone(),
        tbox: tbox_file,
        lsos: entries,
        targets: d.targets.iter().map(|t| t.to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}
