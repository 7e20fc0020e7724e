use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use semtl::boost::{
    load_ensemble, predict_lso, predict_lso_presence, save_ensemble, stadab_train, tradaboost_train, Algo, BoostConfig,
    GammaVariant, ModelBundle, Output,
};
use semtl::domain::{load_lso_bundle, save_lso_bundle, task_variability, Eq10, LearningDomain};
use semtl::embedding::{build_embedding_matrix, variability_weight, EpsilonMode};
use semtl::experiment::{aggregate, read_report, run_case, write_report, EvalOptions, RunRow};
use semtl::learner::{CvAccuracy, LearnerKind};
use semtl::ontology::parse_ontology;
use semtl::reasoner::{entailment_closure, Entailment};
use semtl::synth::{generate_domain_pair, load_sweep, sweep, SynthConfig};
use semtl::{Error, Result};

#[derive(Parser)]
#[command(name = "semtl", version, about = "Semantic transfer learning over EL++ ontologies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Entailment closure of one ontology file
    Reason {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variability between a source and a target bundle
    Variability {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Eq10Arg::Symdiff)]
        eq10: Eq10Arg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semantic embedding CSV for one target
    Embed {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model bundle and report its cross-validated accuracy
    Train {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, value_enum, default_value_t = AlgoArg::Stadab)]
        algo: AlgoArg,
        /// Model bundle directory
        #[arg(long)]
        out: PathBuf,
        /// Report CSV (default: stdout)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long = "case-id")]
        case_id: Option<String>,
        /// Consistency ratio for the report row (default: read from a sibling synth.json, else 0)
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        timing: bool,
    },
    /// Predict target LSOs with a trained bundle
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Predict every LSO instead of the test split
        #[arg(long)]
        all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one synthetic source/target pair
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a ratio x seed grid and evaluate every cell
    Sweep {
        #[command(flatten)]
        synth: SynthArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// `start:end:step` or a comma list
        #[arg(long)]
        ratios: String,
        /// Number of seeds, counted from --seed
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = AlgoSel::All)]
        algo: AlgoSel,
        #[arg(long)]
        out: PathBuf,
        /// Report CSV (default: <out>/report.csv)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
    /// Aggregate run reports into JSON
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Target entailment to predict (default: the last one of the target bundle)
    #[arg(long = "target-entailment")]
    target_entailment: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 800)]
    iters: usize,
    #[arg(long = "cv-folds", default_value_t = 5)]
    cv_folds: usize,
    /// Estimate transferability for this many entailments and impute the rest
    #[arg(long = "epsilon-sample")]
    epsilon_sample: Option<usize>,
    #[arg(long = "gamma-variant", value_enum, default_value_t = GammaArg::Original)]
    gamma_variant: GammaArg,
    #[arg(long, value_enum, default_value_t = Eq10Arg::Symdiff)]
    eq10: Eq10Arg,
    #[arg(long, value_enum, default_value_t = LearnerArg::Logistic)]
    learner: LearnerArg,
    #[arg(long, value_enum, default_value_t = OutputArg::Label)]
    output: OutputArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON generator config; when given, the other generator flags are ignored
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    signal: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long = "n-source", default_value_t = 60)]
    n_source: usize,
    #[arg(long = "n-target", default_value_t = 30)]
    n_target: usize,
    #[arg(long, default_value_t = 0.4)]
    vo: f64,
    #[arg(long, default_value_t = 0.0)]
    vy: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Eq10Arg {
    Symdiff,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    Original,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Logistic,
    Stump,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Label,
    Score,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Stadab,
    Tradaboost,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoSel {
    All,
    Stadab,
    Tradaboost,
    Plain,
}

impl From<Eq10Arg> for Eq10 {
    fn from(a: Eq10Arg) -> Self {
        match a {
            Eq10Arg::Symdiff => Eq10::SymDiff,
            Eq10Arg::Literal => Eq10::Literal,
        }
    }
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Stadab => Algo::Stadab,
            AlgoArg::Tradaboost => Algo::Tradaboost,
            AlgoArg::Plain => Algo::Plain,
        }
    }
}

impl AlgoSel {
    fn algos(self) -> Vec<Algo> {
        match self {
            AlgoSel::All => Algo::ALL.to_vec(),
            AlgoSel::Stadab => vec![Algo::Stadab],
            AlgoSel::Tradaboost => vec![Algo::Tradaboost],
            AlgoSel::Plain => vec![Algo::Plain],
        }
    }
}

impl TrainArgs {
    fn options(&self) -> EvalOptions {
        let boost = BoostConfig {
            iterations: self.iters,
            alpha: self.alpha,
            beta: self.beta,
            learner: match self.learner {
                LearnerArg::Logistic => LearnerKind::Logistic,
                LearnerArg::Stump => LearnerKind::Stump,
            },
            seed: self.seed,
            epsilon: self.epsilon_sample.map_or(EpsilonMode::Exact, EpsilonMode::Sampled),
            gamma: match self.gamma_variant {
                GammaArg::Original => GammaVariant::Original,
                GammaArg::Paper => GammaVariant::Paper,
            },
            eq10: self.eq10.into(),
            output: match self.output {
                OutputArg::Label => Output::Label,
                OutputArg::Score => Output::Score,
            },
        };
        EvalOptions { boost, cv_folds: self.cv_folds }
    }
}

impl SynthArgs {
    fn template(&self) -> Result<SynthConfig> {
        if let Some(p) = &self.config {
            let text = read_file(p)?;
            return serde_json::from_str(&text).map_err(|e| Error::Parameter(format!("{}: {e}", p.display())));
        }
        Ok(SynthConfig {
            signal_strength: self.signal,
            noise_rate: self.noise,
            n_classes: self.classes,
            n_lsos_source: self.n_source,
            n_lsos_target: self.n_target,
            target_variability: (self.vo, self.vy),
            ..SynthConfig::default()
        })
    }
}

fn read_file(p: &Path) -> Result<String> {
    if !p.exists() {
        return Err(Error::MissingFile(p.to_path_buf()));
    }
    Ok(fs::read_to_string(p)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn synth_ratio(target: &Path) -> Option<f64> {
    let text = fs::read_to_string(target.parent()?.join("synth.json")).ok()?;
    serde_json::from_str::<SynthConfig>(&text).ok().map(|c| c.consistency_ratio)
}

fn load_pair(p: &Pair) -> Result<(LearningDomain, LearningDomain, usize)> {
    let source = load_lso_bundle(&p.source)?;
    let target = load_lso_bundle(&p.target)?;
    let pos = match &p.target_entailment {
        None => target.targets.len() - 1,
        Some(text) => {
            let g: Entailment = text.parse()?;
            target.targets.iter().position(|t| *t == g).ok_or_else(|| Error::UnknownName(text.clone()))?
        }
    };
    Ok((source, target, pos))
}

/// `start:end:step` (inclusive) or `a,b,c`. Values are rounded to 1e-9 so that
/// grid points compare exactly.
fn parse_ratios(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("bad ratio list `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let round = |x: f64| (x * 1e9).round() / 1e9;
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (a, b, h) = (num(start)?, num(end)?, num(step)?);
            if h <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| round(a + i as f64 * h)).collect())
        }
        [_] => text.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(s).map(round)).collect(),
        _ => Err(bad()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Reason { ontology, out } => {
            let o = parse_ontology(&read_file(&ontology)?)?;
            emit(&out, &entailment_closure(&o).to_text())
        }
        Cmd::Variability { pair, alpha, beta, eq10, out } => {
            let (s, t, _) = load_pair(&pair)?;
            let r = task_variability(&s.task(), &t.task(), eq10.into());
            let (vo, vy) = r.pair();
            let v = variability_weight(vo, vy, alpha, beta)?;
            let doc = json!({
                "vO": vo,
                "vY": vy,
                "v": v,
                "inter_domain": semtl::embedding::is_inter_domain(v),
                "variant": r.variant.len(),
                "invariant": r.invariant.len(),
                "degenerate": r.degenerate,
            });
            emit(&out, &(serde_json::to_string_pretty(&doc)? + "\n"))
        }
        Cmd::Embed { pair, train, out } => {
            let (s, t, pos) = load_pair(&pair)?;
            let opts = train.options();
            let metric = CvAccuracy { folds: opts.cv_folds, seed: opts.boost.seed };
            let emb = build_embedding_matrix(&s.task(), &t.task(), pos, &opts.boost.embedding_options(), &metric)?;
            let mut buf = Vec::new();
            emb.write_csv(&mut buf)?;
            emit(&out, &String::from_utf8_lossy(&buf))
        }
        Cmd::Train { pair, train, algo, out, report, case_id, ratio, timing } => {
            let (s, t, pos) = load_pair(&pair)?;
            let opts = train.options();
            let algo: Algo = algo.into();
            let metric = CvAccuracy { folds: opts.cv_folds, seed: opts.boost.seed };
            let full = s.task();
            let src = if algo == Algo::Plain { full.restricted(Vec::new()) } else { full };
            let tgt = t.task();
            let (ensemble, emb) = match algo {
                Algo::Stadab | Algo::Plain => stadab_train(&src, &tgt, pos, &opts.boost, &metric)?,
                Algo::Tradaboost => {
                    let emb = build_embedding_matrix(&src, &tgt, pos, &opts.boost.embedding_options(), &metric)?;
                    (tradaboost_train(&src, &tgt, pos, &opts.boost, &emb.index)?, emb)
                }
            };
            let bundle = ModelBundle { algo, target: t.targets[pos].clone(), learner: opts.boost.learner, ensemble };
            save_ensemble(&bundle, &emb, &out)?;
            let case = case_id.unwrap_or_else(|| {
                pair.target.parent().and_then(Path::file_name).map_or("case".into(), |n| n.to_string_lossy().into_owned())
            });
            let ratio = ratio.unwrap_or_else(|| synth_ratio(&pair.target).unwrap_or(0.0));
            let row = run_case(&s, &t, pos, algo, &opts, &case, ratio, timing)?;
            let mut buf = Vec::new();
            write_report(&[row], &mut buf)?;
            emit(&report, &String::from_utf8_lossy(&buf))
        }
        Cmd::Eval { model, target, all, out } => {
            let (bundle, emb) = load_ensemble(&model)?;
            let t = load_lso_bundle(&target)?;
            let pos = t
                .targets
                .iter()
                .position(|g| *g == bundle.target)
                .ok_or_else(|| Error::UnknownName(bundle.target.to_string()))?;
            let task = t.task();
            let ids = if all || task.test.is_empty() { (0..t.lsos.len()).collect() } else { task.test.clone() };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["lso", "truth", "prediction"])?;
            let mut hits = 0;
            for &i in &ids {
                let set = &t.closure(i).set;
                let pred = match bundle.algo {
                    Algo::Tradaboost => predict_lso_presence(&bundle.ensemble, set, &emb.index),
                    _ => predict_lso(&bundle.ensemble, set, &emb).label,
                };
                let truth = t.truth(i, pos);
                hits += (pred == truth) as usize;
                w.write_record([t.lsos[i].id.as_str(), if truth { "1" } else { "0" }, if pred { "1" } else { "0" }])?;
            }
            let text = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("csv is utf-8");
            eprintln!("accuracy {:.4} over {} LSOs", hits as f64 / ids.len().max(1) as f64, ids.len());
            emit(&out, &text)
        }
        Cmd::Synth { synth, ratio, seed, out } => {
            let cfg = SynthConfig { seed, consistency_ratio: ratio, ..synth.template()? };
            let pair = generate_domain_pair(&cfg)?;
            save_lso_bundle(&pair.source, out.join("source"))?;
            save_lso_bundle(&pair.target, out.join("target"))?;
            fs::write(out.join("synth.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
            Ok(())
        }
        Cmd::Sweep { synth, train, ratios, seeds, algo, out, report, timing } => {
            let ratios = parse_ratios(&ratios)?;
            let seed_list: Vec<u64> = (0..seeds).map(|i| train.seed + i).collect();
            sweep(&synth.template()?, &ratios, &seed_list, &out)?;
            let manifest = load_sweep(&out)?;
            let base = train.options();
            let jobs: Vec<(usize, Algo)> =
                (0..manifest.cells.len()).flat_map(|c| algo.algos().into_iter().map(move |a| (c, a))).collect();
            let rows = jobs
                .par_iter()
                .map(|&(c, a)| -> Result<RunRow> {
                    let cell = &manifest.cells[c];
                    let s = load_lso_bundle(out.join(&cell.source))?;
                    let t = load_lso_bundle(out.join(&cell.target))?;
                    let mut opts = base;
                    opts.boost.seed = cell.seed;
                    run_case(&s, &t, t.targets.len() - 1, a, &opts, &cell.case_id, cell.consistency_ratio, timing)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_report(&rows, &mut buf)?;
            emit(&Some(report.unwrap_or_else(|| out.join("report.csv"))), &String::from_utf8_lossy(&buf))
        }
        Cmd::Report { csv, out } => {
            let mut rows = Vec::new();
            for p in &csv {
                rows.extend(read_report(fs::File::open(p).map_err(|_| Error::MissingFile(p.clone()))?)?);
            }
            emit(&out, &(serde_json::to_string_pretty(&aggregate(&rows)?)? + "\n"))
        }
    }
}

fn init_pool() -> Result<()> {
    if let Ok(v) = std::env::var("SEMTL_WORKERS") {
        let n: usize = v.parse().map_err(|_| Error::Parameter(format!("SEMTL_WORKERS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Parameter("SEMTL_WORKERS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Parameter(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match init_pool().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_domain() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_grid() {
        let r = parse_ratios("0.1:1.0:0.1").unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[2], 0.3);
        assert_eq!(r[9], 1.0);
        assert_eq!(parse_ratios("0.8").unwrap(), vec![0.8]);
        assert_eq!(parse_ratios("0.2,0.4").unwrap(), vec![0.2, 0.4]);
        assert!(parse_ratios("1:0:0.1").is_err());
        assert!(parse_ratios("").unwrap().is_empty());
    }
}
