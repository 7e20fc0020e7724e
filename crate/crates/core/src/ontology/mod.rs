//! EL++ ontologies: signature, concept expressions, TBox and ABox axioms,
//! plus the line-oriented `.onto` text format.

mod parse;
mod write;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse_ontology, parse_ontology_with};
pub use write::serialize_ontology;

use crate::reasoner::Entailment;

/// Words that cannot be used as names because the grammar gives them meaning.
pub const RESERVED: &[&str] = &[
    "Top", "Bottom", "And", "Some", "One", "Concept", "Role", "Individual", "GCI", "RI", "CA", "RA", "EQ", "NEQ",
    "SubClassOf", "SubRoleOf",
];

/// Prefix of names minted by TBox normalization. User names may not start with it.
pub const FRESH_PREFIX: &str = "_gen";

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty() && self.individuals.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.concepts.contains(name) || self.roles.contains(name) || self.individuals.contains(name)
    }

    pub fn extend(&mut self, other: &Signature) {
        self.concepts.extend(other.concepts.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
        self.individuals.extend(other.individuals.iter().cloned());
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptExpr {
    Top,
    Bottom,
    Atomic(String),
    /// Always flattened, sorted and duplicate-free with at least two members.
    And(Vec<ConceptExpr>),
    Some(String, Box<ConceptExpr>),
    Nominal(String),
}

impl ConceptExpr {
    pub fn atomic(name: impl Into<String>) -> Self {
        ConceptExpr::Atomic(name.into())
    }

    pub fn some(role: impl Into<String>, filler: ConceptExpr) -> Self {
        ConceptExpr::Some(role.into(), Box::new(filler))
    }

    /// Builds a conjunction in canonical form. Nested conjunctions are
    /// flattened; a single remaining member is returned unwrapped.
    pub fn and(parts: impl IntoIterator<Item = ConceptExpr>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                ConceptExpr::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => ConceptExpr::Top,
            1 => flat.pop().unwrap(),
            _ => ConceptExpr::And(flat),
        }
    }

    /// Re-establishes the canonical form everywhere in the expression.
    pub fn normalized(&self) -> Self {
        match self {
            ConceptExpr::And(parts) => ConceptExpr::and(parts.iter().map(|p| p.normalized())),
            ConceptExpr::Some(r, f) => ConceptExpr::some(r.clone(), f.normalized()),
            other => other.clone(),
        }
    }

    pub fn visit_names(&self, out: &mut Signature) {
        match self {
            ConceptExpr::Top | ConceptExpr::Bottom => {}
            ConceptExpr::Atomic(a) => {
                out.concepts.insert(a.clone());
            }
            ConceptExpr::And(parts) => parts.iter().for_each(|p| p.visit_names(out)),
            ConceptExpr::Some(r, f) => {
                out.roles.insert(r.clone());
                f.visit_names(out);
            }
            ConceptExpr::Nominal(a) => {
                out.individuals.insert(a.clone());
            }
        }
    }

    /// All subexpressions, including `self`.
    pub fn subexpressions(&self) -> Vec<&ConceptExpr> {
        let mut out = vec![self];
        match self {
            ConceptExpr::And(parts) => parts.iter().for_each(|p| out.extend(p.subexpressions())),
            ConceptExpr::Some(_, f) => out.extend(f.subexpressions()),
            _ => {}
        }
        out
    }
}

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Top => write!(f, "Top"),
            ConceptExpr::Bottom => write!(f, "Bottom"),
            ConceptExpr::Atomic(a) => write!(f, "{a}"),
            ConceptExpr::And(parts) => {
                write!(f, "And(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            ConceptExpr::Some(r, c) => write!(f, "Some({r} {c})"),
            ConceptExpr::Nominal(a) => write!(f, "One({a})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Gci { sub: ConceptExpr, sup: ConceptExpr },
    Ri { sub: String, sup: String },
    ConceptAssertion { concept: ConceptExpr, individual: String },
    RoleAssertion { role: String, from: String, to: String },
    Equality(String, String),
    Inequality(String, String),
}

impl Axiom {
    pub fn gci(sub: ConceptExpr, sup: ConceptExpr) -> Self {
        Axiom::Gci { sub: sub.normalized(), sup: sup.normalized() }
    }

    pub fn is_tbox(&self) -> bool {
        matches!(self, Axiom::Gci { .. } | Axiom::Ri { .. })
    }

    pub fn visit_names(&self, out: &mut Signature) {
        match self {
            Axiom::Gci { sub, sup } => {
                sub.visit_names(out);
                sup.visit_names(out);
            }
            Axiom::Ri { sub, sup } => {
                out.roles.insert(sub.clone());
                out.roles.insert(sup.clone());
            }
            Axiom::ConceptAssertion { concept, individual } => {
                concept.visit_names(out);
                out.individuals.insert(individual.clone());
            }
            Axiom::RoleAssertion { role, from, to } => {
                out.roles.insert(role.clone());
                out.individuals.insert(from.clone());
                out.individuals.insert(to.clone());
            }
            Axiom::Equality(a, b) | Axiom::Inequality(a, b) => {
                out.individuals.insert(a.clone());
                out.individuals.insert(b.clone());
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Gci { sub, sup } => write!(f, "GCI {sub} SubClassOf {sup}"),
            Axiom::Ri { sub, sup } => write!(f, "RI {sub} SubRoleOf {sup}"),
            Axiom::ConceptAssertion { concept, individual } => write!(f, "CA {concept}({individual})"),
            Axiom::RoleAssertion { role, from, to } => write!(f, "RA {role}({from},{to})"),
            Axiom::Equality(a, b) => write!(f, "EQ {a} = {b}"),
            Axiom::Inequality(a, b) => write!(f, "NEQ {a} != {b}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    pub signature: Signature,
    pub tbox: Vec<Axiom>,
    pub abox: Vec<Axiom>,
}

impl Ontology {
    /// Builds an ontology whose signature is the declared one widened by every
    /// name the axioms use. Axioms are routed to their partition.
    pub fn new(declared: Signature, axioms: impl IntoIterator<Item = Axiom>) -> Self {
        let mut o = Ontology { signature: declared, ..Default::default() };
        for ax in axioms {
            o.push(ax);
        }
        o
    }

    pub fn push(&mut self, ax: Axiom) {
        ax.visit_names(&mut self.signature);
        if ax.is_tbox() {
            self.tbox.push(ax);
        } else {
            self.abox.push(ax);
        }
    }

    /// Sorted, duplicate-free axiom lists with canonical concept expressions.
    pub fn normalized(&self) -> Self {
        let norm = |axs: &[Axiom]| {
            let mut v: Vec<Axiom> = axs
                .iter()
                .map(|ax| match ax {
                    Axiom::Gci { sub, sup } => Axiom::gci(sub.clone(), sup.clone()),
                    Axiom::ConceptAssertion { concept, individual } => {
                        Axiom::ConceptAssertion { concept: concept.normalized(), individual: individual.clone() }
                    }
                    other => other.clone(),
                })
                .collect();
            v.sort();
            v.dedup();
            v
        };
        Ontology { signature: self.signature.clone(), tbox: norm(&self.tbox), abox: norm(&self.abox) }
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.tbox.iter().chain(self.abox.iter())
    }

    /// Same TBox as `self`, ABox replaced.
    pub fn with_abox(&self, abox: Vec<Axiom>) -> Self {
        let mut o = Ontology { signature: self.signature.clone(), tbox: self.tbox.clone(), abox: Vec::new() };
        for ax in abox {
            o.push(ax);
        }
        o
    }

    /// TBox axioms in canonical order, used to compare TBoxes structurally.
    pub fn canonical_tbox(&self) -> Vec<Axiom> {
        self.normalized().tbox
    }
}

/// The declared signature. Construction through [`Ontology::new`] / [`Ontology::push`]
/// guarantees every name used by an axiom is included.
pub fn signature_of(o: &Ontology) -> &Signature {
    &o.signature
}

/// Materializes each entailment as an ABox assertion. Names missing from the
/// signature are added; the TBox is untouched.
pub fn merge_abox<'a>(base: &Ontology, extra: impl IntoIterator<Item = &'a Entailment>) -> Ontology {
    let mut out = base.clone();
    for g in extra {
        let ax = g.to_axiom();
        if !out.abox.contains(&ax) {
            out.push(ax);
        }
    }
    out
}
