//! Seeded random EL++ ontologies for differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semtl::ontology::{Axiom, ConceptExpr, Ontology, Signature};

pub struct Bounds {
    pub concepts: usize,
    pub roles: usize,
    pub individuals: usize,
    pub axioms: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { concepts: 12, roles: 4, individuals: 8, axioms: 25 }
    }
}

fn expr(rng: &mut ChaCha8Rng, cs: &[String], rs: &[String], is: &[String], depth: usize) -> ConceptExpr {
    let roll = rng.gen_range(0..100);
    if depth == 0 || roll < 50 {
        return match roll % 20 {
            0 => ConceptExpr::Top,
            1 if !is.is_empty() => ConceptExpr::Nominal(is.choose(rng).unwrap().clone()),
            _ => ConceptExpr::Atomic(cs.choose(rng).unwrap().clone()),
        };
    }
    if roll < 75 {
        let n = rng.gen_range(2..=3);
        ConceptExpr::and((0..n).map(|_| expr(rng, cs, rs, is, depth - 1)))
    } else {
        ConceptExpr::some(rs.choose(rng).unwrap().clone(), expr(rng, cs, rs, is, depth - 1))
    }
}

pub fn ontology(seed: u64, b: &Bounds) -> Ontology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = rng.gen_range(2..=b.concepts);
    let nr = rng.gen_range(1..=b.roles);
    let ni = rng.gen_range(1..=b.individuals);
    let cs: Vec<String> = (0..nc).map(|i| format!("C{i}")).collect();
    let rs: Vec<String> = (0..nr).map(|i| format!("r{i}")).collect();
    let is: Vec<String> = (0..ni).map(|i| format!("a{i}")).collect();
    let mut sig = Signature::default();
    sig.concepts.extend(cs.iter().cloned());
    sig.roles.extend(rs.iter().cloned());
    sig.individuals.extend(is.iter().cloned());

    let n = rng.gen_range(1..=b.axioms);
    let mut axioms = Vec::with_capacity(n);
    for _ in 0..n {
        let ax = match rng.gen_range(0..100) {
            0..=39 => Axiom::gci(expr(&mut rng, &cs, &rs, &is, 2), expr(&mut rng, &cs, &rs, &is, 2)),
            40..=43 => {
                let a = ConceptExpr::Atomic(cs.choose(&mut rng).unwrap().clone());
                let c = ConceptExpr::Atomic(cs.choose(&mut rng).unwrap().clone());
                Axiom::gci(ConceptExpr::and([a, c]), ConceptExpr::Bottom)
            }
            44..=51 => Axiom::Ri { sub: rs.choose(&mut rng).unwrap().clone(), sup: rs.choose(&mut rng).unwrap().clone() },
            52..=73 => Axiom::ConceptAssertion {
                concept: expr(&mut rng, &cs, &rs, &is, 1),
                individual: is.choose(&mut rng).unwrap().clone(),
            },
            74..=93 => Axiom::RoleAssertion {
                role: rs.choose(&mut rng).unwrap().clone(),
                from: is.choose(&mut rng).unwrap().clone(),
                to: is.choose(&mut rng).unwrap().clone(),
            },
            94..=96 => Axiom::Equality(is.choose(&mut rng).unwrap().clone(), is.choose(&mut rng).unwrap().clone()),
            _ => Axiom::Inequality(is.choose(&mut rng).unwrap().clone(), is.choose(&mut rng).unwrap().clone()),
        };
        axioms.push(ax);
    }
    Ontology::new(sig, axioms)
}
