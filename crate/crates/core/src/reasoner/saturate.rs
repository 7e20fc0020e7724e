//! Worklist saturation over normalized axioms.
//!
//! Every basic concept that becomes the filler of a derived existential, every
//! nominal of the signature and `⊤` own a context `X` with a subsumer set
//! `S(X)`. Role edges `X -r-> Y` link contexts. Rules fire from the worklist
//! through per-concept indexes, so each derived fact is processed once.

use std::collections::{HashMap, HashSet, VecDeque};

use super::normalize::{normalize, Basic, NormalizedTBox};
use crate::ontology::Ontology;

type Id = u32;

const TOP: Id = 0;
const BOTTOM: Id = 1;

#[derive(Default)]
struct Interner {
    ids: HashMap<Basic, Id>,
    names: Vec<Basic>,
}

impl Interner {
    fn id(&mut self, b: &Basic) -> Id {
        if let Some(&i) = self.ids.get(b) {
            return i;
        }
        let i = self.names.len() as Id;
        self.ids.insert(b.clone(), i);
        self.names.push(b.clone());
        i
    }
}

enum Item {
    Add(Id, Id),
    Link(Id, Id, Id),
}

/// Saturated state of one ontology.
pub struct Saturation {
    concepts: Interner,
    roles: HashMap<String, Id>,
    active: Vec<bool>,
    subsumers: Vec<HashSet<Id>>,
    members: Vec<Vec<Id>>,
    succ: Vec<Vec<(Id, Id)>>,
    pred: Vec<Vec<(Id, Id)>>,
    edges: HashSet<(Id, Id, Id)>,
    told: Vec<Vec<Id>>,
    conj: Vec<Vec<(Id, Id)>>,
    intro: Vec<Vec<(Id, Id)>>,
    elim: HashMap<(Id, Id), Vec<Id>>,
    role_supers: Vec<Vec<Id>>,
    inequalities: Vec<(Id, Id)>,
    roots: Vec<Id>,
    queue: VecDeque<Item>,
}

impl Saturation {
    pub fn run(o: &Ontology) -> Self {
        let norm = normalize(o.axioms());
        let mut sat = Self::index(o, &norm);
        sat.saturate();
        sat
    }

    fn index(o: &Ontology, norm: &NormalizedTBox) -> Self {
        let mut concepts = Interner::default();
        concepts.id(&Basic::Top);
        concepts.id(&Basic::Bottom);
        let mut roles: HashMap<String, Id> = HashMap::new();
        let role_id = |r: &str, roles: &mut HashMap<String, Id>| {
            let n = roles.len() as Id;
            *roles.entry(r.to_string()).or_insert(n)
        };
        for r in &o.signature.roles {
            role_id(r, &mut roles);
        }
        let mut roots = vec![TOP];
        for a in &o.signature.individuals {
            roots.push(concepts.id(&Basic::Nominal(a.clone())));
        }
        for c in &o.signature.concepts {
            concepts.id(&Basic::Named(c.clone()));
        }

        let simple: Vec<(Id, Id)> = norm.simple.iter().map(|(a, b)| (concepts.id(a), concepts.id(b))).collect();
        let conj: Vec<(Id, Id, Id)> =
            norm.conjunctive.iter().map(|(a, b, c)| (concepts.id(a), concepts.id(b), concepts.id(c))).collect();
        let intro: Vec<(Id, Id, Id)> = norm
            .exist_intro
            .iter()
            .map(|(a, r, b)| (concepts.id(a), role_id(r, &mut roles), concepts.id(b)))
            .collect();
        let elim: Vec<(Id, Id, Id)> = norm
            .exist_elim
            .iter()
            .map(|(r, a, b)| (role_id(r, &mut roles), concepts.id(a), concepts.id(b)))
            .collect();
        let hier: Vec<(Id, Id)> =
            norm.role_hierarchy.iter().map(|(r, s)| (role_id(r, &mut roles), role_id(s, &mut roles))).collect();
        let inequalities = norm
            .inequalities
            .iter()
            .map(|(a, b)| (concepts.id(&Basic::Nominal(a.clone())), concepts.id(&Basic::Nominal(b.clone()))))
            .collect();

        let n = concepts.names.len();
        let nr = roles.len();
        let mut sat = Saturation {
            concepts,
            roles,
            active: vec![false; n],
            subsumers: vec![HashSet::new(); n],
            members: vec![Vec::new(); n],
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
            edges: HashSet::new(),
            told: vec![Vec::new(); n],
            conj: vec![Vec::new(); n],
            intro: vec![Vec::new(); n],
            elim: HashMap::new(),
            role_supers: vec![Vec::new(); nr],
            inequalities,
            roots,
            queue: VecDeque::new(),
        };
        for (a, b) in simple {
            sat.told[a as usize].push(b);
        }
        for (a, b, c) in conj {
            sat.conj[a as usize].push((b, c));
            if a != b {
                sat.conj[b as usize].push((a, c));
            }
        }
        for (a, r, b) in intro {
            sat.intro[a as usize].push((r, b));
        }
        for (r, a, b) in elim {
            sat.elim.entry((r, a)).or_default().push(b);
        }
        // reflexive-transitive closure of the role hierarchy
        let mut direct = vec![Vec::new(); nr];
        for (r, s) in hier {
            direct[r as usize].push(s);
        }
        for r in 0..nr {
            let mut seen = vec![false; nr];
            let mut stack = vec![r as Id];
            seen[r] = true;
            while let Some(x) = stack.pop() {
                sat.role_supers[r].push(x);
                for &y in &direct[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        sat
    }

    fn activate(&mut self, x: Id) {
        if !self.active[x as usize] {
            self.active[x as usize] = true;
            self.queue.push_back(Item::Add(x, x));
            self.queue.push_back(Item::Add(x, TOP));
        }
    }

    fn saturate(&mut self) {
        for r in self.roots.clone() {
            self.activate(r);
        }
        loop {
            while let Some(item) = self.queue.pop_front() {
                match item {
                    Item::Add(x, a) => self.add(x, a),
                    Item::Link(x, r, y) => self.link(x, r, y),
                }
            }
            if !self.nominal_merge() {
                break;
            }
        }
    }

    fn add(&mut self, x: Id, a: Id) {
        if !self.subsumers[x as usize].insert(a) {
            return;
        }
        self.members[x as usize].push(a);
        let ai = a as usize;
        for &b in &self.told[ai] {
            self.queue.push_back(Item::Add(x, b));
        }
        for &(other, b) in &self.conj[ai] {
            if self.subsumers[x as usize].contains(&other) {
                self.queue.push_back(Item::Add(x, b));
            }
        }
        for &(r, b) in &self.intro[ai] {
            self.queue.push_back(Item::Link(x, r, b));
        }
        for &(r, p) in &self.pred[x as usize] {
            if a == BOTTOM {
                self.queue.push_back(Item::Add(p, BOTTOM));
            }
            if let Some(bs) = self.elim.get(&(r, a)) {
                for &b in bs {
                    self.queue.push_back(Item::Add(p, b));
                }
            }
        }
    }

    fn link(&mut self, x: Id, r: Id, y: Id) {
        self.activate(y);
        for i in 0..self.role_supers[r as usize].len() {
            let s = self.role_supers[r as usize][i];
            if !self.edges.insert((x, s, y)) {
                continue;
            }
            self.succ[x as usize].push((s, y));
            self.pred[y as usize].push((s, x));
            for &a in &self.members[y as usize] {
                if a == BOTTOM {
                    self.queue.push_back(Item::Add(x, BOTTOM));
                }
                if let Some(bs) = self.elim.get(&(s, a)) {
                    for &b in bs {
                        self.queue.push_back(Item::Add(x, b));
                    }
                }
            }
        }
    }

    /// Nominal rule: when `{a}` subsumes both `C` and `D` and `D` is reachable
    /// from a root, `S(D)` flows into `S(C)`. Returns whether anything was queued.
    fn nominal_merge(&mut self) -> bool {
        let n = self.active.len();
        let mut reach = vec![false; n];
        let mut stack: Vec<Id> = self.roots.clone();
        for &r in &stack {
            reach[r as usize] = true;
        }
        while let Some(x) = stack.pop() {
            for &(_, y) in &self.succ[x as usize] {
                if !reach[y as usize] {
                    reach[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        let mut by_nominal: HashMap<Id, Vec<Id>> = HashMap::new();
        for x in 0..n {
            if !self.active[x] {
                continue;
            }
            for &a in &self.members[x] {
                if matches!(self.concepts.names[a as usize], Basic::Nominal(_)) {
                    by_nominal.entry(a).or_default().push(x as Id);
                }
            }
        }
        let mut queued = false;
        let mut groups: Vec<_> = by_nominal.into_iter().collect();
        groups.sort_unstable_by_key(|(k, _)| *k);
        for (_, ctxs) in groups {
            for &d in &ctxs {
                if !reach[d as usize] {
                    continue;
                }
                for &c in &ctxs {
                    if c == d {
                        continue;
                    }
                    for &a in &self.members[d as usize] {
                        if !self.subsumers[c as usize].contains(&a) {
                            self.queue.push_back(Item::Add(c, a));
                            queued = true;
                        }
                    }
                }
            }
        }
        queued
    }

    fn nominal(&self, a: &str) -> Option<Id> {
        self.concepts.ids.get(&Basic::Nominal(a.to_string())).copied()
    }

    pub fn is_consistent(&self) -> bool {
        if self.roots.iter().any(|&r| self.subsumers[r as usize].contains(&BOTTOM)) {
            return false;
        }
        !self.inequalities.iter().any(|&(a, b)| {
            a == b || self.subsumers[a as usize].contains(&b) || self.subsumers[b as usize].contains(&a)
        })
    }

    pub fn has_concept(&self, concept: &str, individual: &str) -> bool {
        let (Some(x), Some(&c)) = (self.nominal(individual), self.concepts.ids.get(&Basic::Named(concept.to_string())))
        else {
            return false;
        };
        self.subsumers[x as usize].contains(&c)
    }

    pub fn has_role(&self, role: &str, from: &str, to: &str) -> bool {
        let (Some(x), Some(y), Some(&r)) = (self.nominal(from), self.nominal(to), self.roles.get(role)) else {
            return false;
        };
        self.succ[x as usize].iter().any(|&(s, z)| s == r && self.subsumers[z as usize].contains(&y))
    }

    /// Named concepts subsuming `{a}`.
    pub fn concepts_of(&self, individual: &str) -> Vec<String> {
        let Some(x) = self.nominal(individual) else { return Vec::new() };
        let mut out: Vec<String> = self.members[x as usize]
            .iter()
            .filter_map(|&c| match &self.concepts.names[c as usize] {
                Basic::Named(n) => Some(n.clone()),
                _ => None,
            })
            .collect();
        out.sort();
        out
    }

    /// `(role, target individual)` pairs entailed from `{a}`.
    pub fn roles_of(&self, individual: &str) -> Vec<(String, String)> {
        let Some(x) = self.nominal(individual) else { return Vec::new() };
        let role_names: HashMap<Id, &String> = self.roles.iter().map(|(k, &v)| (v, k)).collect();
        let mut out = Vec::new();
        for &(s, z) in &self.succ[x as usize] {
            for &m in &self.members[z as usize] {
                if let Basic::Nominal(b) = &self.concepts.names[m as usize] {
                    out.push((role_names[&s].clone(), b.clone()));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}
