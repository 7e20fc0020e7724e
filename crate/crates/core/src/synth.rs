//! Seeded generator of source/target domain pairs with planted signal and a
//! knob for how much of the transferable source knowledge clashes with the
//! target.
//!
//! Every LSO describes one observation `obs` whose class is the target. Signal
//! slot `j` is a concept assertion on individual `e{j}` that a class is likely
//! to carry. Consistent slots use the same assertion on both sides. The other
//! slots plant `Src{j}(e{j})` in the source while the target sees the disjoint
//! `Tgt{j}(e{j})` as label-free noise. Shared background concepts are
//! label-free too, while each side's own concepts mark the default class 0.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{save_lso_bundle, task_variability, Eq10, LearningDomain, Lso};
use crate::error::{Error, Result};
use crate::ontology::{Axiom, ConceptExpr, Ontology, Signature};
use crate::reasoner::Entailment;

const VARIABILITY_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Background concepts used on both sides.
    pub n_concepts_shared: usize,
    /// Background concepts used on one side only (per side).
    pub n_concepts_per_side: usize,
    pub n_lsos_source: usize,
    pub n_lsos_target: usize,
    /// Requested `(vO, vY)`.
    pub target_variability: (f64, f64),
    pub consistency_ratio: f64,
    /// Probability that an LSO of a slot's class carries the slot; other classes carry it with `1 − s`.
    pub signal_strength: f64,
    /// Probability that the asserted class is replaced by another one.
    pub noise_rate: f64,
    pub n_classes: usize,
    pub n_signal: usize,
    /// Probability of each label-free background assertion.
    pub background_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_concepts_shared: 6,
            n_concepts_per_side: 3,
            n_lsos_source: 60,
            n_lsos_target: 30,
            target_variability: (0.4, 0.0),
            consistency_ratio: 0.8,
            signal_strength: 0.8,
            noise_rate: 0.1,
            n_classes: 2,
            n_signal: 10,
            background_rate: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_concepts_shared", self.n_concepts_shared),
            ("n_concepts_per_side", self.n_concepts_per_side),
            ("n_lsos_source", self.n_lsos_source),
            ("n_lsos_target", self.n_lsos_target),
            ("n_signal", self.n_signal),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be at least 1")));
            }
        }
        if !(2..=6).contains(&self.n_classes) {
            return Err(Error::Parameter(format!("n_classes must lie in 2..=6, got {}", self.n_classes)));
        }
        let ratios = [
            ("vO", self.target_variability.0),
            ("vY", self.target_variability.1),
            ("consistency_ratio", self.consistency_ratio),
            ("signal_strength", self.signal_strength),
            ("noise_rate", self.noise_rate),
            ("background_rate", self.background_rate),
        ];
        for (name, v) in ratios {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Number of signal slots that stay consistent with the target.
    pub fn consistent_slots(&self) -> usize {
        (self.consistency_ratio * self.n_signal as f64).round() as usize
    }
}

/// A generated pair plus the source signal entailments, each marked with
/// whether it was planted consistent.
#[derive(Clone, Debug)]
pub struct SynthPair {
    pub source: LearningDomain,
    pub target: LearningDomain,
    pub planted: Vec<(Entailment, bool)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Source,
    Target,
}

fn ca(concept: &str, individual: &str) -> Axiom {
    Axiom::ConceptAssertion { concept: ConceptExpr::atomic(concept), individual: individual.to_string() }
}

/// Number of renamed source targets whose target-set variability is closest to `vy`.
fn renamed_targets(k: usize, vy: f64) -> Result<usize> {
    let best = (0..=k)
        .min_by(|&a, &b| {
            let d = |m: usize| (2.0 * m as f64 / (k + m) as f64 - vy).abs();
            d(a).total_cmp(&d(b))
        })
        .unwrap_or(0);
    let got = 2.0 * best as f64 / (k + best) as f64;
    if (got - vy).abs() > VARIABILITY_TOLERANCE {
        return Err(Error::Infeasible(format!("vY = {vy} is not reachable with {k} classes (closest {got:.3})")));
    }
    Ok(best)
}

struct Layout {
    k: usize,
    n_consistent: usize,
    renamed: usize,
}

impl Layout {
    fn slot_class(&self, j: usize) -> usize {
        1 + j % (self.k - 1)
    }

    fn signal(&self, side: Side, j: usize) -> Option<String> {
        if j < self.n_consistent {
            Some(format!("Sig{j}"))
        } else if side == Side::Source {
            Some(format!("Src{j}"))
        } else {
            None
        }
    }

    fn class_name(&self, side: Side, c: usize) -> String {
        if side == Side::Source && c < self.renamed {
            format!("SClass{c}")
        } else {
            format!("Class{c}")
        }
    }

    fn targets(&self, side: Side) -> Vec<Entailment> {
        (0..self.k).map(|c| Entailment::concept(self.class_name(side, c), "obs")).collect()
    }
}

/// Label-free assertions of one side.
fn background(cfg: &SynthConfig, layout: &Layout, side: Side) -> Vec<Axiom> {
    let mut pool: Vec<Axiom> = (0..cfg.n_concepts_shared).map(|i| ca(&format!("Bg{i}"), &format!("b{i}"))).collect();
    if side == Side::Target {
        pool.extend((layout.n_consistent..cfg.n_signal).map(|j| ca(&format!("Tgt{j}"), &format!("e{j}"))));
    }
    pool
}

/// Side-only assertions that mark class 0.
fn markers(cfg: &SynthConfig, side: Side) -> Vec<Axiom> {
    let (prefix, ind) = if side == Side::Source { ("SBg", "sb") } else { ("TBg", "tb") };
    (0..cfg.n_concepts_per_side).map(|i| ca(&format!("{prefix}{i}"), &format!("{ind}{i}"))).collect()
}

fn generate_aboxes(cfg: &SynthConfig, layout: &Layout, side: Side, rng: &mut ChaCha8Rng) -> Vec<Vec<Axiom>> {
    let n = if side == Side::Source { cfg.n_lsos_source } else { cfg.n_lsos_target };
    let (pool, marks) = (background(cfg, layout, side), markers(cfg, side));
    let s = cfg.signal_strength;
    (0..n)
        .map(|_| {
            let class = rng.gen_range(0..layout.k);
            let mut abox = Vec::new();
            for j in 0..cfg.n_signal {
                let p = if layout.slot_class(j) == class { s } else { 1.0 - s };
                let hit = rng.gen::<f64>() < p;
                if let (true, Some(name)) = (hit, layout.signal(side, j)) {
                    abox.push(ca(&name, &format!("e{j}")));
                }
            }
            let p = if class == 0 { s } else { 1.0 - s };
            for m in &marks {
                if rng.gen::<f64>() < p {
                    abox.push(m.clone());
                }
            }
            for b in &pool {
                if rng.gen::<f64>() < cfg.background_rate {
                    abox.push(b.clone());
                }
            }
            let mut asserted = class;
            if rng.gen::<f64>() < cfg.noise_rate {
                asserted = (class + rng.gen_range(1..layout.k)) % layout.k;
            }
            abox.push(ca(&layout.class_name(side, asserted), "obs"));
            abox
        })
        .collect()
}

fn build(tbox: &Ontology, prefix: &str, aboxes: &[Vec<Axiom>], targets: Vec<Entailment>, side: &str, seed: u64) -> Result<LearningDomain> {
    let lsos: Vec<Lso> = aboxes
        .iter()
        .enumerate()
        .map(|(i, a)| LearningDomain::lso_from_abox(tbox, &format!("{prefix}{i:03}"), a.clone()))
        .collect();
    let mut d = LearningDomain::new(tbox.clone(), lsos, targets)?;
    d.annotations.insert("generator".into(), "synth".into());
    d.annotations.insert("side".into(), side.into());
    d.annotations.insert("seed".into(), seed.to_string());
    Ok(d)
}

/// Extra assertions, in LSO-order, that move `vO` to `want`: fresh concepts on
/// one side raise it, fresh concepts on both sides lower it.
fn padding(variant: usize, invariant: usize, want: f64, cap: usize) -> Result<(usize, usize)> {
    let (v, i) = (variant as f64, invariant as f64);
    let x = want.clamp(0.05, 0.95);
    let current = if v + i == 0.0 { 0.0 } else { v / (v + i) };
    let (one_sided, shared) = if current < x {
        (((x * (i + v) - v) / (1.0 - x)).round().max(0.0) as usize, 0)
    } else {
        (0, (v / x - i - v).round().max(0.0) as usize)
    };
    if one_sided.max(shared) > cap {
        return Err(Error::Infeasible(format!(
            "vO = {want} needs more than {cap} padding assertions ({variant} variant, {invariant} invariant)"
        )));
    }
    Ok((one_sided, shared))
}

/// Deterministic under `cfg.seed`.
pub fn generate_domain_pair(cfg: &SynthConfig) -> Result<SynthPair> {
    cfg.validate()?;
    let layout = Layout { k: cfg.n_classes, n_consistent: cfg.consistent_slots(), renamed: renamed_targets(cfg.n_classes, cfg.target_variability.1)? };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut tbox = Ontology::new(Signature::default(), []);
    for j in layout.n_consistent..cfg.n_signal {
        let clash = ConceptExpr::and([ConceptExpr::atomic(format!("Src{j}")), ConceptExpr::atomic(format!("Tgt{j}"))]);
        tbox.push(Axiom::gci(clash, ConceptExpr::Bottom));
    }
    let mut src = generate_aboxes(cfg, &layout, Side::Source, &mut rng);
    let mut tgt = generate_aboxes(cfg, &layout, Side::Target, &mut rng);
    // every clashing slot must be visible in the target union
    for j in layout.n_consistent..cfg.n_signal {
        let ax = ca(&format!("Tgt{j}"), &format!("e{j}"));
        if !tgt.iter().any(|a| a.contains(&ax)) {
            let n = tgt.len();
            tgt[j % n].push(ax);
        }
    }

    let targets_s = layout.targets(Side::Source);
    let targets_t = layout.targets(Side::Target);
    let source = build(&tbox, "s", &src, targets_s.clone(), "source", cfg.seed)?;
    let target = build(&tbox, "t", &tgt, targets_t.clone(), "target", cfg.seed)?;
    let r = task_variability(&source.task(), &target.task(), Eq10::SymDiff);
    let cap = 10 * (cfg.n_lsos_source + cfg.n_lsos_target);
    let (one_sided, shared) = padding(r.variant.len(), r.invariant.len(), cfg.target_variability.0, cap)?;
    let (source, target) = if one_sided + shared == 0 {
        (source, target)
    } else {
        let (ns, nt) = (src.len(), tgt.len());
        for i in 0..one_sided {
            if i % 2 == 0 {
                src[i % ns].push(ca(&format!("PadS{i}"), &format!("p{i}")));
            } else {
                tgt[i % nt].push(ca(&format!("PadT{i}"), &format!("p{i}")));
            }
        }
        for i in 0..shared {
            src[i % ns].push(ca(&format!("Pad{i}"), &format!("q{i}")));
            tgt[i % nt].push(ca(&format!("Pad{i}"), &format!("q{i}")));
        }
        (build(&tbox, "s", &src, targets_s, "source", cfg.seed)?, build(&tbox, "t", &tgt, targets_t, "target", cfg.seed)?)
    };

    let (vo, vy) = task_variability(&source.task(), &target.task(), Eq10::SymDiff).pair();
    let (wo, wy) = cfg.target_variability;
    if (vo - wo).abs() > VARIABILITY_TOLERANCE || (vy - wy).abs() > VARIABILITY_TOLERANCE {
        return Err(Error::Infeasible(format!("reached variability ({vo:.3}, {vy:.3}), wanted ({wo}, {wy})")));
    }
    let gs = source.task().closure();
    let planted = (0..cfg.n_signal)
        .filter_map(|j| layout.signal(Side::Source, j).map(|n| (Entailment::concept(n, format!("e{j}")), j < layout.n_consistent)))
        .filter(|(g, _)| gs.contains(g))
        .collect();
    Ok(SynthPair { source, target, planted })
}

/// One `(ratio, seed)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCell {
    pub case_id: String,
    pub consistency_ratio: f64,
    pub seed: u64,
    /// Bundle directories, relative to the sweep directory.
    pub source: PathBuf,
    pub target: PathBuf,
}

/// Contents of `sweep.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub template: SynthConfig,
    pub cells: Vec<SweepCell>,
}

pub fn case_id(ratio: f64, seed: u64) -> String {
    format!("r{ratio:.2}-s{seed}")
}

/// The cell grid, ratios outermost.
pub fn plan_sweep(template: &SynthConfig, ratios: &[f64], seeds: &[u64]) -> Result<SweepManifest> {
    template.validate()?;
    if ratios.is_empty() || seeds.is_empty() {
        return Err(Error::Parameter("a sweep needs at least one ratio and one seed".into()));
    }
    let mut cells = Vec::new();
    for &ratio in ratios {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::Parameter(format!("consistency ratio {ratio} outside [0, 1]")));
        }
        for &seed in seeds {
            let id = case_id(ratio, seed);
            let dir = PathBuf::from("cells").join(&id);
            cells.push(SweepCell { source: dir.join("source"), target: dir.join("target"), case_id: id, consistency_ratio: ratio, seed });
        }
    }
    let mut ids: Vec<&str> = cells.iter().map(|c| c.case_id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("duplicate sweep cell (ratios or seeds repeat)".into()));
    }
    Ok(SweepManifest { template: template.clone(), cells })
}

impl SweepManifest {
    pub fn config_for(&self, cell: &SweepCell) -> SynthConfig {
        SynthConfig { seed: cell.seed, consistency_ratio: cell.consistency_ratio, ..self.template.clone() }
    }
}

/// Generates every cell into `dir` and writes `sweep.json`.
pub fn sweep(template: &SynthConfig, ratios: &[f64], seeds: &[u64], dir: &Path) -> Result<SweepManifest> {
    let manifest = plan_sweep(template, ratios, seeds)?;
    manifest.cells.par_iter().try_for_each(|cell| -> Result<()> {
        let pair = generate_domain_pair(&manifest.config_for(cell))?;
        save_lso_bundle(&pair.source, dir.join(&cell.source))?;
        save_lso_bundle(&pair.target, dir.join(&cell.target))
    })?;
    fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub fn load_sweep(dir: &Path) -> Result<SweepManifest> {
    let p = dir.join("sweep.json");
    if !p.exists() {
        return Err(Error::MissingFile(p));
    }
    serde_json::from_str(&fs::read_to_string(&p)?).map_err(|e| Error::Manifest(e.to_string()))
}
