//! Saturation-based EL++ reasoning: atomic ABox entailment closure,
//! entailment queries and consistency checking.

mod normalize;
mod saturate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use normalize::{normalize, Basic, NormalizedTBox};
pub use saturate::Saturation;

use crate::error::{Error, Result};
use crate::ontology::{parse_ontology, Axiom, ConceptExpr, Ontology};

/// An atomic concept or role assertion over named symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entailment {
    Concept { concept: String, individual: String },
    Role { role: String, from: String, to: String },
}

impl Entailment {
    pub fn concept(concept: impl Into<String>, individual: impl Into<String>) -> Self {
        Entailment::Concept { concept: concept.into(), individual: individual.into() }
    }

    pub fn role(role: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Entailment::Role { role: role.into(), from: from.into(), to: to.into() }
    }

    pub fn to_axiom(&self) -> Axiom {
        match self {
            Entailment::Concept { concept, individual } => {
                Axiom::ConceptAssertion { concept: ConceptExpr::Atomic(concept.clone()), individual: individual.clone() }
            }
            Entailment::Role { role, from, to } => {
                Axiom::RoleAssertion { role: role.clone(), from: from.clone(), to: to.clone() }
            }
        }
    }

    /// Concept or role name; the "class" used for grouping entailments.
    pub fn predicate(&self) -> &str {
        match self {
            Entailment::Concept { concept, .. } => concept,
            Entailment::Role { role, .. } => role,
        }
    }

    fn check_names(&self, o: &Ontology) -> Result<()> {
        let sig = &o.signature;
        let missing = match self {
            Entailment::Concept { concept, individual } => {
                [(!sig.concepts.contains(concept)).then_some(concept), (!sig.individuals.contains(individual)).then_some(individual)]
                    .into_iter()
                    .flatten()
                    .next()
            }
            Entailment::Role { role, from, to } => [
                (!sig.roles.contains(role)).then_some(role),
                (!sig.individuals.contains(from)).then_some(from),
                (!sig.individuals.contains(to)).then_some(to),
            ]
            .into_iter()
            .flatten()
            .next(),
        };
        match missing {
            Some(n) => Err(Error::UnknownName(n.clone())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entailment::Concept { concept, individual } => write!(f, "CA {concept}({individual})"),
            Entailment::Role { role, from, to } => write!(f, "RA {role}({from},{to})"),
        }
    }
}

impl FromStr for Entailment {
    type Err = Error;

    /// Accepts `CA C(a)` or `RA r(a,b)` with atomic names only.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Syntax { line: 1, msg: format!("not an atomic entailment: `{s}`") };
        let s = s.trim();
        let (kind, rest) = s.split_once(' ').ok_or_else(bad)?;
        let rest = rest.trim();
        let open = rest.find('(').ok_or_else(bad)?;
        let name = rest[..open].trim();
        let args = rest[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let valid = |n: &str| crate::ontology::is_valid_name(n);
        if !valid(name) || !args.iter().all(|a| valid(a)) {
            return Err(bad());
        }
        match (kind, args.as_slice()) {
            ("CA", [a]) => Ok(Entailment::concept(name, *a)),
            ("RA", [a, b]) => Ok(Entailment::role(name, *a, *b)),
            _ => Err(bad()),
        }
    }
}

/// Duplicate-free, sorted set of entailments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntailmentSet {
    pub entailments: BTreeSet<Entailment>,
    pub origin: Option<String>,
}

impl EntailmentSet {
    pub fn new(entailments: impl IntoIterator<Item = Entailment>) -> Self {
        EntailmentSet { entailments: entailments.into_iter().collect(), origin: None }
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn len(&self) -> usize {
        self.entailments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entailments.is_empty()
    }

    pub fn contains(&self, g: &Entailment) -> bool {
        self.entailments.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entailment> {
        self.entailments.iter()
    }

    pub fn union(&self, other: &EntailmentSet) -> EntailmentSet {
        EntailmentSet::new(self.entailments.union(&other.entailments).cloned())
    }

    pub fn intersection(&self, other: &EntailmentSet) -> EntailmentSet {
        EntailmentSet::new(self.entailments.intersection(&other.entailments).cloned())
    }

    pub fn is_subset(&self, other: &EntailmentSet) -> bool {
        self.entailments.is_subset(&other.entailments)
    }
}

impl FromIterator<Entailment> for EntailmentSet {
    fn from_iter<I: IntoIterator<Item = Entailment>>(iter: I) -> Self {
        EntailmentSet::new(iter)
    }
}

/// Closure plus the consistency flag. An inconsistent ontology entails every
/// assertion over its signature, and `set` reflects that.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub set: EntailmentSet,
    pub consistent: bool,
}

impl Closure {
    /// `closure` CLI emission: one entailment per line, sorted, then a consistency footer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in self.set.iter() {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out.push_str(&format!("# consistent: {}\n", self.consistent));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut consistent = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(v) = line.strip_prefix("# consistent:") {
                consistent = Some(match v.trim() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(Error::Syntax { line: i + 1, msg: "bad consistency footer".into() }),
                });
            } else if !line.is_empty() && !line.starts_with('#') {
                set.insert(line.parse::<Entailment>().map_err(|_| Error::Syntax {
                    line: i + 1,
                    msg: format!("not an entailment: `{line}`"),
                })?);
            }
        }
        let consistent =
            consistent.ok_or_else(|| Error::Syntax { line: text.lines().count(), msg: "missing consistency footer".into() })?;
        Ok(Closure { set: EntailmentSet { entailments: set, origin: None }, consistent })
    }
}

fn everything(o: &Ontology) -> BTreeSet<Entailment> {
    let sig = &o.signature;
    let mut out = BTreeSet::new();
    for a in &sig.individuals {
        for c in &sig.concepts {
            out.insert(Entailment::concept(c, a));
        }
        for r in &sig.roles {
            for b in &sig.individuals {
                out.insert(Entailment::role(r, a, b));
            }
        }
    }
    out
}

/// All atomic assertions entailed by `o` over its signature.
pub fn entailment_closure(o: &Ontology) -> Closure {
    let sat = Saturation::run(o);
    closure_from(o, &sat)
}

fn closure_from(o: &Ontology, sat: &Saturation) -> Closure {
    if !sat.is_consistent() {
        return Closure { set: EntailmentSet::new(everything(o)), consistent: false };
    }
    let mut out = BTreeSet::new();
    for a in &o.signature.individuals {
        for c in sat.concepts_of(a) {
            if o.signature.concepts.contains(&c) {
                out.insert(Entailment::concept(c, a.clone()));
            }
        }
        for (r, b) in sat.roles_of(a) {
            if o.signature.individuals.contains(&b) {
                out.insert(Entailment::role(r, a.clone(), b));
            }
        }
    }
    Closure { set: EntailmentSet::new(out), consistent: true }
}

pub fn entails(o: &Ontology, g: &Entailment) -> Result<bool> {
    g.check_names(o)?;
    let sat = Saturation::run(o);
    if !sat.is_consistent() {
        return Ok(true);
    }
    Ok(match g {
        Entailment::Concept { concept, individual } => sat.has_concept(concept, individual),
        Entailment::Role { role, from, to } => sat.has_role(role, from, to),
    })
}

pub fn is_consistent(o: &Ontology) -> bool {
    Saturation::run(o).is_consistent()
}

/// Union of the ABoxes of ontologies sharing `tbox_owner`'s TBox.
pub fn union_ontology<'a>(tbox_owner: &Ontology, parts: impl IntoIterator<Item = &'a Ontology>) -> Ontology {
    let mut out = Ontology { signature: tbox_owner.signature.clone(), tbox: tbox_owner.tbox.clone(), abox: Vec::new() };
    for p in parts {
        out.signature.extend(&p.signature);
        out.abox.extend(p.abox.iter().cloned());
    }
    out.abox.sort();
    out.abox.dedup();
    out
}

/// Parses a document and returns its closure; convenience for tools and tests.
pub fn closure_of_text(text: &str) -> Result<Closure> {
    Ok(entailment_closure(&parse_ontology(text)?))
}
