//! Naive reference reasoner. Works on concept expressions as written (no
//! normalization, no fresh names, no indexes) and re-scans every rule until
//! nothing changes. Slow, and deliberately shares no code with the library.

use std::collections::{BTreeMap, BTreeSet};

use semtl::ontology::{Axiom, ConceptExpr, Ontology};
use semtl::reasoner::Entailment;

pub struct OracleResult {
    pub consistent: bool,
    pub closure: BTreeSet<Entailment>,
}

struct State {
    contexts: Vec<ConceptExpr>,
    index: BTreeMap<ConceptExpr, usize>,
    subs: Vec<BTreeSet<ConceptExpr>>,
    links: BTreeSet<(usize, String, usize)>,
}

impl State {
    fn ctx(&mut self, c: &ConceptExpr) -> usize {
        if let Some(&i) = self.index.get(c) {
            return i;
        }
        let i = self.contexts.len();
        self.contexts.push(c.clone());
        self.index.insert(c.clone(), i);
        let mut s = BTreeSet::new();
        s.insert(c.clone());
        s.insert(ConceptExpr::Top);
        self.subs.push(s);
        i
    }
}

fn supers(role: &str, ris: &[(String, String)]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(role.to_string());
    loop {
        let before = out.len();
        for (r, s) in ris {
            if out.contains(r) {
                out.insert(s.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

pub fn reason(o: &Ontology) -> OracleResult {
    let mut gcis = Vec::new();
    let mut ris = Vec::new();
    let mut universe: BTreeSet<ConceptExpr> = BTreeSet::new();
    for ax in o.tbox.iter().chain(o.abox.iter()) {
        match ax {
            Axiom::Gci { sub, sup } => {
                gcis.push((sub.clone(), sup.clone()));
                universe.extend(sub.subexpressions().into_iter().cloned());
                universe.extend(sup.subexpressions().into_iter().cloned());
            }
            Axiom::Ri { sub, sup } => ris.push((sub.clone(), sup.clone())),
            Axiom::ConceptAssertion { concept, .. } => universe.extend(concept.subexpressions().into_iter().cloned()),
            _ => {}
        }
    }

    let mut st = State { contexts: Vec::new(), index: BTreeMap::new(), subs: Vec::new(), links: BTreeSet::new() };
    let top = st.ctx(&ConceptExpr::Top);
    let mut roots = vec![top];
    for a in &o.signature.individuals {
        roots.push(st.ctx(&ConceptExpr::Nominal(a.clone())));
    }
    let nominal = |a: &str| ConceptExpr::Nominal(a.to_string());

    // ABox facts
    let mut inequalities = Vec::new();
    for ax in &o.abox {
        match ax {
            Axiom::ConceptAssertion { concept, individual } => {
                let i = st.ctx(&nominal(individual));
                st.subs[i].insert(concept.clone());
            }
            Axiom::RoleAssertion { role, from, to } => {
                let i = st.ctx(&nominal(from));
                st.subs[i].insert(ConceptExpr::some(role.clone(), nominal(to)));
            }
            Axiom::Equality(a, b) => {
                let i = st.ctx(&nominal(a));
                let j = st.ctx(&nominal(b));
                st.subs[i].insert(nominal(b));
                st.subs[j].insert(nominal(a));
            }
            Axiom::Inequality(a, b) => inequalities.push((a.clone(), b.clone())),
            _ => {}
        }
    }

    loop {
        let mut changed = false;
        let mut x = 0;
        while x < st.contexts.len() {
            let mut add: Vec<ConceptExpr> = Vec::new();
            let current = st.subs[x].clone();
            for (sub, sup) in &gcis {
                if current.contains(sub) {
                    add.push(sup.clone());
                }
            }
            let mut new_links = Vec::new();
            for e in &current {
                match e {
                    ConceptExpr::And(parts) => add.extend(parts.iter().cloned()),
                    ConceptExpr::Some(r, f) => new_links.push((r.clone(), (**f).clone())),
                    _ => {}
                }
            }
            for (r, f) in new_links {
                let y = st.ctx(&f);
                for s in supers(&r, &ris) {
                    if st.links.insert((x, s, y)) {
                        changed = true;
                    }
                }
            }
            for e in &universe {
                match e {
                    ConceptExpr::And(parts) => {
                        if parts.iter().all(|p| current.contains(p)) {
                            add.push(e.clone());
                        }
                    }
                    ConceptExpr::Some(s, f) => {
                        let hit = st.links.iter().any(|(a, r, y)| *a == x && r == s && st.subs[*y].contains(f));
                        if hit {
                            add.push(e.clone());
                        }
                    }
                    _ => {}
                }
            }
            if st.links.iter().any(|(a, _, y)| *a == x && st.subs[*y].contains(&ConceptExpr::Bottom)) {
                add.push(ConceptExpr::Bottom);
            }
            for e in add {
                if st.subs[x].insert(e) {
                    changed = true;
                }
            }
            x += 1;
        }

        // nominal rule
        let mut reach = vec![false; st.contexts.len()];
        let mut stack = roots.clone();
        for &r in &roots {
            reach[r] = true;
        }
        while let Some(c) = stack.pop() {
            for (a, _, y) in &st.links {
                if *a == c && !reach[*y] {
                    reach[*y] = true;
                    stack.push(*y);
                }
            }
        }
        for c in 0..st.contexts.len() {
            for d in 0..st.contexts.len() {
                if c == d || !reach[d] {
                    continue;
                }
                let shared = st.subs[c]
                    .iter()
                    .any(|e| matches!(e, ConceptExpr::Nominal(_)) && st.subs[d].contains(e));
                if shared {
                    let extra: Vec<ConceptExpr> = st.subs[d].difference(&st.subs[c]).cloned().collect();
                    if !extra.is_empty() {
                        st.subs[c].extend(extra);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut consistent = !roots.iter().any(|&r| st.subs[r].contains(&ConceptExpr::Bottom));
    for (a, b) in &inequalities {
        let i = st.index[&nominal(a)];
        if a == b || st.subs[i].contains(&nominal(b)) {
            consistent = false;
        }
    }

    let sig = &o.signature;
    let mut closure = BTreeSet::new();
    for a in &sig.individuals {
        let i = st.index[&nominal(a)];
        for c in &sig.concepts {
            if !consistent || st.subs[i].contains(&ConceptExpr::Atomic(c.clone())) {
                closure.insert(Entailment::concept(c.clone(), a.clone()));
            }
        }
        for r in &sig.roles {
            for b in &sig.individuals {
                let hit = st.links.iter().any(|(x, s, y)| *x == i && s == r && st.subs[*y].contains(&nominal(b)));
                if !consistent || hit {
                    closure.insert(Entailment::role(r.clone(), a.clone(), b.clone()));
                }
            }
        }
    }
    OracleResult { consistent, closure }
}
