//! Rewriting of EL++ axioms into the four normal forms the saturation rules
//! work on. Compound subexpressions are replaced by fresh `_gen<n>` names.

use std::fmt;

use crate::ontology::{Axiom, ConceptExpr, FRESH_PREFIX};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basic {
    Top,
    Bottom,
    Named(String),
    Fresh(usize),
    Nominal(String),
}

impl fmt::Display for Basic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basic::Top => write!(f, "Top"),
            Basic::Bottom => write!(f, "Bottom"),
            Basic::Named(n) => write!(f, "{n}"),
            Basic::Fresh(i) => write!(f, "{FRESH_PREFIX}{i}"),
            Basic::Nominal(a) => write!(f, "One({a})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalizedTBox {
    /// `A ⊑ B`
    pub simple: Vec<(Basic, Basic)>,
    /// `A1 ⊓ A2 ⊑ B`
    pub conjunctive: Vec<(Basic, Basic, Basic)>,
    /// `A ⊑ ∃r.B`
    pub exist_intro: Vec<(Basic, String, Basic)>,
    /// `∃r.A ⊑ B`
    pub exist_elim: Vec<(String, Basic, Basic)>,
    /// `r ⊑ s`
    pub role_hierarchy: Vec<(String, String)>,
    /// Asserted `a ≠ b` pairs, checked against derived equalities.
    pub inequalities: Vec<(String, String)>,
    pub fresh_count: usize,
}

impl NormalizedTBox {
    pub fn rule_count(&self) -> usize {
        self.simple.len() + self.conjunctive.len() + self.exist_intro.len() + self.exist_elim.len() + self.role_hierarchy.len()
    }

    fn fresh(&mut self) -> Basic {
        let b = Basic::Fresh(self.fresh_count);
        self.fresh_count += 1;
        b
    }

    fn basic_of(c: &ConceptExpr) -> Option<Basic> {
        match c {
            ConceptExpr::Top => Some(Basic::Top),
            ConceptExpr::Bottom => Some(Basic::Bottom),
            ConceptExpr::Atomic(a) => Some(Basic::Named(a.clone())),
            ConceptExpr::Nominal(a) => Some(Basic::Nominal(a.clone())),
            _ => None,
        }
    }

    /// A basic concept `B` with `C ⊑ B` established by emitted rules.
    /// `None` means `C` is equivalent to `⊥`, making any inclusion with it on the left vacuous.
    fn lhs_basic(&mut self, c: &ConceptExpr) -> Option<Basic> {
        if let Some(b) = Self::basic_of(c) {
            return if b == Basic::Bottom { None } else { Some(b) };
        }
        match c {
            ConceptExpr::And(parts) => {
                let mut names = Vec::with_capacity(parts.len());
                for p in parts {
                    match self.lhs_basic(p)? {
                        Basic::Top => {}
                        b => names.push(b),
                    }
                }
                let mut iter = names.into_iter();
                let mut acc = match iter.next() {
                    Some(b) => b,
                    None => return Some(Basic::Top),
                };
                for b in iter {
                    let x = self.fresh();
                    self.conjunctive.push((acc, b, x.clone()));
                    acc = x;
                }
                Some(acc)
            }
            ConceptExpr::Some(r, filler) => {
                let f = self.lhs_basic(filler)?;
                let x = self.fresh();
                self.exist_elim.push((r.clone(), f, x.clone()));
                Some(x)
            }
            _ => unreachable!(),
        }
    }

    /// A basic concept `B` with `B ⊑ C` established by emitted rules.
    fn rhs_basic(&mut self, c: &ConceptExpr) -> Basic {
        if let Some(b) = Self::basic_of(c) {
            return b;
        }
        let x = self.fresh();
        self.include(x.clone(), c);
        x
    }

    /// Emits rules for `lhs ⊑ sup` where `lhs` is already basic.
    fn include(&mut self, lhs: Basic, sup: &ConceptExpr) {
        match sup {
            ConceptExpr::Top => {}
            ConceptExpr::And(parts) => {
                for p in parts {
                    self.include(lhs.clone(), p);
                }
            }
            ConceptExpr::Some(r, filler) => {
                let f = self.rhs_basic(filler);
                self.exist_intro.push((lhs, r.clone(), f));
            }
            other => {
                let b = Self::basic_of(other).unwrap();
                if b != lhs {
                    self.simple.push((lhs, b));
                }
            }
        }
    }

    fn add_gci(&mut self, sub: &ConceptExpr, sup: &ConceptExpr) {
        // A two-operand conjunction over basic concepts into a single basic
        // concept maps onto the conjunctive form directly.
        if let (ConceptExpr::And(parts), Some(target)) = (sub, Self::basic_of(sup)) {
            if parts.len() == 2 {
                if let (Some(a), Some(b)) = (Self::basic_of(&parts[0]), Self::basic_of(&parts[1])) {
                    if a != Basic::Bottom && b != Basic::Bottom && target != Basic::Top {
                        self.conjunctive.push((a, b, target));
                        return;
                    }
                }
            }
        }
        if let Some(lhs) = self.lhs_basic(sub) {
            self.include(lhs, sup);
        }
    }

    /// Adds one axiom. ABox axioms are internalized through nominals:
    /// `C(a)` becomes `{a} ⊑ C`, `r(a,b)` becomes `{a} ⊑ ∃r.{b}`.
    pub fn add_axiom(&mut self, ax: &Axiom) {
        match ax {
            Axiom::Gci { sub, sup } => self.add_gci(sub, sup),
            Axiom::Ri { sub, sup } => {
                if sub != sup {
                    self.role_hierarchy.push((sub.clone(), sup.clone()))
                }
            }
            Axiom::ConceptAssertion { concept, individual } => self.include(Basic::Nominal(individual.clone()), concept),
            Axiom::RoleAssertion { role, from, to } => {
                self.exist_intro.push((Basic::Nominal(from.clone()), role.clone(), Basic::Nominal(to.clone())))
            }
            Axiom::Equality(a, b) => {
                if a != b {
                    self.simple.push((Basic::Nominal(a.clone()), Basic::Nominal(b.clone())));
                    self.simple.push((Basic::Nominal(b.clone()), Basic::Nominal(a.clone())));
                }
            }
            Axiom::Inequality(a, b) => self.inequalities.push((a.clone(), b.clone())),
        }
    }
}

/// Normalizes a list of TBox axioms. ABox axioms in the list are internalized as well.
pub fn normalize<'a>(axioms: impl IntoIterator<Item = &'a Axiom>) -> NormalizedTBox {
    let mut n = NormalizedTBox::default();
    for ax in axioms {
        n.add_axiom(ax);
    }
    n
}
