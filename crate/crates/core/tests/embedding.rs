mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semtl::domain::{closure_of_lso_set, domain_variability, task_variability, Eq10, LearningDomain, TransferProbe};
use semtl::embedding::{build_embedding_matrix, consistency_bit, estimate_epsilon, EmbeddingOptions};
use semtl::learner::{CvAccuracy, LearnerKind};
use semtl::ontology::{merge_abox, Axiom, ConceptExpr};
use semtl::reasoner::{Entailment, EntailmentSet};
use semtl::synth::{generate_domain_pair, SynthConfig};

fn g(s: &str) -> Entailment {
    s.parse().unwrap()
}

#[test]
fn uk_ie_embedding_channels() {
    let (s, t) = common::uk_ie();
    let (st, tt) = (s.task(), t.task());
    let emb = build_embedding_matrix(&st, &tt, 1, &EmbeddingOptions::default(), &CvAccuracy::default()).unwrap();
    assert_eq!(emb.v, 1.0 / 3.0);
    assert!(emb.t.iter().all(|&x| x >= 0.0));

    let (gs, gt) = (st.closure(), tt.closure());
    let union = t.union_ontology(&tt.train);
    for (j, e) in emb.index.iter().enumerate() {
        assert!(!t.targets.contains(e) && !s.targets.contains(e));
        assert_eq!(emb.in_source[j], gs.contains(e), "{e}");
        assert_eq!(emb.in_target[j], gt.contains(e), "{e}");
        let consistent = common::oracle::reason(&merge_abox(&union, [e])).consistent;
        assert_eq!(emb.c[j], consistent as u8, "{e}");
    }
    // every non-target entailment of either side is embedded
    let expected = gs.union(&gt).iter().filter(|e| !t.targets.contains(e)).count();
    assert_eq!(emb.index.len(), expected);
}

#[test]
fn uk_ie_consistency_bits() {
    let (_, t) = common::uk_ie();
    assert_eq!(consistency_bit(&g("CA Disrupted(r4)"), &t.task()).unwrap(), 1);
    assert_eq!(consistency_bit(&g("CA Cleared(r0)"), &t.task()).unwrap(), 0);
}

fn rename_expr(e: &ConceptExpr) -> ConceptExpr {
    match e {
        ConceptExpr::Nominal(a) => ConceptExpr::Nominal(format!("z{a}")),
        ConceptExpr::And(p) => ConceptExpr::and(p.iter().map(rename_expr)),
        ConceptExpr::Some(r, f) => ConceptExpr::some(r.clone(), rename_expr(f)),
        other => other.clone(),
    }
}

fn rename(ax: &Axiom) -> Axiom {
    let z = |a: &String| format!("z{a}");
    match ax {
        Axiom::ConceptAssertion { concept, individual } => {
            Axiom::ConceptAssertion { concept: rename_expr(concept), individual: z(individual) }
        }
        Axiom::RoleAssertion { role, from, to } => Axiom::RoleAssertion { role: role.clone(), from: z(from), to: z(to) },
        Axiom::Equality(a, b) => Axiom::Equality(z(a), z(b)),
        Axiom::Inequality(a, b) => Axiom::Inequality(z(a), z(b)),
        other => other.clone(),
    }
}

fn has_nominal(e: &ConceptExpr) -> bool {
    match e {
        ConceptExpr::Nominal(_) => true,
        ConceptExpr::And(p) => p.iter().any(has_nominal),
        ConceptExpr::Some(_, f) => has_nominal(f),
        _ => false,
    }
}

#[test]
fn disjoint_aboxes_close_independently() {
    let bounds = common::random::Bounds::default();
    let mut checked_union = 0;
    for seed in 0..60 {
        let o = common::random::ontology(seed, &bounds);
        let tbox = o.with_abox(Vec::new());
        let other: Vec<Axiom> = o.abox.iter().map(rename).collect();
        let a = LearningDomain::lso_from_abox(&tbox, "a", o.abox.clone());
        let b = LearningDomain::lso_from_abox(&tbox, "b", other.clone());
        let got = closure_of_lso_set(&[&a, &b]).unwrap();
        let mut want = common::oracle::reason(&a.ontology).closure;
        want.extend(common::oracle::reason(&b.ontology).closure);
        assert_eq!(got.entailments, want, "seed {seed}");

        // with no nominals in the TBox and no clash, the union ontology agrees too
        let nominal_free = o.tbox.iter().all(|ax| match ax {
            Axiom::Gci { sub, sup } => !has_nominal(sub) && !has_nominal(sup),
            _ => true,
        });
        let mut both = o.abox.clone();
        both.extend(other);
        let joint = common::oracle::reason(&tbox.with_abox(both));
        if nominal_free && joint.consistent {
            assert_eq!(joint.closure, want, "seed {seed}");
            checked_union += 1;
        }
    }
    assert!(checked_union > 5, "only {checked_union} union checks ran");
}

fn random_set(rng: &mut ChaCha8Rng) -> EntailmentSet {
    let n = rng.gen_range(0..12);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                Entailment::concept(format!("C{}", rng.gen_range(0..5)), format!("a{}", rng.gen_range(0..4)))
            } else {
                Entailment::role("r", format!("a{}", rng.gen_range(0..4)), format!("a{}", rng.gen_range(0..4)))
            }
        })
        .collect()
}

#[test]
fn variability_partitions_the_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let (gs, gt) = (random_set(&mut rng), random_set(&mut rng));
        let r = domain_variability(&gs, &gt);
        assert_eq!(r.variant.union(&r.invariant), gs.union(&gt), "case {case}");
        assert!(r.variant.intersection(&r.invariant).is_empty(), "case {case}");
        assert!((0.0..=1.0).contains(&r.domain_ratio), "case {case}");
        // the literal variant set overlaps the invariant one but stays a ratio
        let lit = semtl::domain::domain_variability_with(&gs, &gt, Eq10::Literal);
        assert!((0.0..=1.0).contains(&lit.domain_ratio), "case {case}");
        assert_eq!(domain_variability(&gs, &gs).domain_ratio, 0.0);
    }
}

#[test]
fn disjoint_target_sets_have_full_task_variability() {
    for seed in 0..3 {
        let cfg = SynthConfig { seed, target_variability: (0.4, 1.0), ..SynthConfig::default() };
        let p = generate_domain_pair(&cfg).unwrap();
        let (_, vy) = task_variability(&p.source.task(), &p.target.task(), Eq10::SymDiff).pair();
        assert_eq!(vy, 1.0);
    }
}

#[test]
fn planted_signal_gains_on_most_seeds() {
    let metric = CvAccuracy::default();
    let mut positive = 0;
    for seed in 0..10 {
        let p = generate_domain_pair(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let (st, tt) = (p.source.task(), p.target.task());
        let pos = p.target.targets.len() - 1;
        let planted: EntailmentSet = p.planted.iter().filter(|(_, c)| *c).map(|(e, _)| e.clone()).collect();
        let probe = TransferProbe::new(&st, &tt, pos, LearnerKind::Logistic, &metric).unwrap();
        if probe.gain(&planted).unwrap() > 0.0 {
            positive += 1;
        }
    }
    assert!(positive >= 9, "gain > 0 in {positive}/10 seeds");
}

#[test]
fn epsilon_separates_signal_from_noise() {
    let metric = CvAccuracy::default();
    let (mut signal, mut noise) = (0, 0);
    for seed in 0..10 {
        let p = generate_domain_pair(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let (st, tt) = (p.source.task(), p.target.task());
        let pos = p.target.targets.len() - 1;
        let sig = &p.planted.iter().find(|(_, c)| *c).unwrap().0;
        if estimate_epsilon(sig, &st, &tt, pos, LearnerKind::Logistic, &metric).unwrap() > 0.0 {
            signal += 1;
        }
        if estimate_epsilon(&g("CA Bg0(b0)"), &st, &tt, pos, LearnerKind::Logistic, &metric).unwrap() == 0.0 {
            noise += 1;
        }
    }
    assert!(signal > 5, "signal ε > 0 in {signal}/10 seeds");
    assert!(noise > 5, "noise ε = 0 in {noise}/10 seeds");
}
