mod report;
mod run_config;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use framecrf::crf::Hyper;
use framecrf::error::Result;
use framecrf::eval::{self, Cascade, QuestionMap, PRF};
use framecrf::experiments::{self, CompositionSpec};
use framecrf::pipeline::{self, ModelRegistry};
use framecrf::synth;
use framecrf::{Corpus, Error, FeatureConfig, FeatureFamily, FrameLexicon};
use serde::Deserialize;
use serde_json::json;

use run_config::{sidecar_for, to_pretty_json, RunConfig};

/// Fallback model directory for `predict` when `--models` is not given.
const MODEL_DIR_ENV: &str = "FRAMECRF_MODEL_DIR";

#[derive(Parser)]
#[command(name = "framecrf", version, about = "Frame-semantic tagging with per-lexical-unit CRFs")]
struct Cli {
    /// Worker threads for parallel sections (0 or omitted: all cores).
    /// Results are identical for any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus against a frame lexicon.
    Validate(ValidateArgs),
    /// Train one model per lexical unit and save them to a directory.
    Train(TrainArgs),
    /// Tag a corpus with saved models.
    Predict(PredictArgs),
    /// Score predictions against gold annotations at all four levels.
    Evaluate(EvaluateArgs),
    /// Build a document-level cross-validation plan.
    Folds(FoldsArgs),
    /// Run the feature-ablation experiment over a fold plan.
    Ablate(AblateArgs),
    /// Run training-composition experiments from a JSON spec.
    Compose(ComposeArgs),
    /// Generate a synthetic annotated corpus.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CascadeArg {
    Strict,
    Lenient,
}

impl From<CascadeArg> for Cascade {
    fn from(c: CascadeArg) -> Cascade {
        match c {
            CascadeArg::Strict => Cascade::Strict,
            CascadeArg::Lenient => Cascade::Lenient,
        }
    }
}

impl CascadeArg {
    fn name(self) -> &'static str {
        match self {
            CascadeArg::Strict => "strict",
            CascadeArg::Lenient => "lenient",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct FeatureFlags {
    /// Comma-separated feature families
    /// (lemma,parent_lemma,pos,lin_dist,dep_path).
    #[arg(long, default_value = "lemma,parent_lemma,pos,lin_dist,dep_path")]
    features: String,
    #[command(flatten)]
    extraction: ExtractionFlags,
}

/// Extraction knobs shared by every feature family. `ablate` takes only
/// these: the family list there is fixed by the experiment itself.
#[derive(Args)]
struct ExtractionFlags {
    /// Comma-separated window offsets around each position.
    #[arg(long, default_value = "-1,0,1", allow_hyphen_values = true)]
    window: String,
    /// Linear-distance clip radius, or "none" to keep raw distances.
    #[arg(long, default_value = "10")]
    clip_distance: String,
    /// Dependency-path edges kept nearest the target.
    #[arg(long, default_value_t = 2)]
    max_path_len: usize,
}

impl FeatureFlags {
    fn to_config(&self) -> Result<FeatureConfig> {
        let families = self
            .features
            .split(',')
            .map(|name| {
                let name = name.trim();
                FeatureFamily::ALL
                    .into_iter()
                    .find(|f| f.as_str() == name)
                    .ok_or_else(|| Error::Config(format!("unknown feature family '{name}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut config = self.extraction.to_config()?;
        config.families = families;
        config.validate()?;
        Ok(config)
    }
}

impl ExtractionFlags {
    fn to_config(&self) -> Result<FeatureConfig> {
        let window = self
            .window
            .split(',')
            .map(|o| {
                o.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::Config(format!("bad window offset '{o}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let clip = self.clip_distance.trim();
        let clip_distance = if clip.eq_ignore_ascii_case("none") {
            None
        } else {
            Some(
                clip.parse::<u32>()
                    .map_err(|_| Error::Config(format!("bad clip distance '{clip}'")))?,
            )
        };
        let config = FeatureConfig {
            window,
            clip_distance,
            max_path_len: self.max_path_len,
            ..FeatureConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct HyperFlags {
    /// L2 regularization strength.
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    /// Optimizer iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Convergence threshold on the gradient infinity norm.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Seed recorded with the run (training itself is deterministic).
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl HyperFlags {
    fn to_hyper(&self) -> Hyper {
        Hyper { l2: self.l2, max_iter: self.max_iter, tol: self.tol, seed: self.seed }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Directory receiving the model files, the lexicon copy, and the run
    /// config.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Args)]
struct PredictArgs {
    /// Model directory from `train`; defaults to $FRAMECRF_MODEL_DIR.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    /// Output corpus (JSON lines) with predicted annotations.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Frame-element question map (TSV); bundled default if omitted.
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    #[arg(long, value_enum, default_value_t = CascadeArg::Strict)]
    cascade: CascadeArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FoldsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output path for the fold-plan JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    extraction: ExtractionFlags,
    #[arg(long, value_enum, default_value_t = CascadeArg::Strict)]
    cascade: CascadeArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    /// JSON experiment spec; see `compose --help` for the schema.
    #[arg(long, long_help = COMPOSE_SPEC_HELP)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

const COMPOSE_SPEC_HELP: &str = "JSON experiment spec with fields:
  corpus, lexicon  input paths
  test_source      source held out for testing
  runs             [{\"parts\": [{\"source\": S, \"fraction\": F}, ...], \"seed\": N}, ...]
  lu_filter        restrict to lexical units attested in every source (default false)
  repeats          resampling repeats per run (default 3)
  l2, max_iter, tol, cascade, features   optional overrides";

#[derive(Args)]
struct SynthArgs {
    /// Number of sentences to generate (at least 10).
    #[arg(long, default_value_t = 1000)]
    sentences: usize,
    #[arg(long, default_value_t = synth::DEFAULT_SEED)]
    seed: u64,
    /// Directory receiving corpus.jsonl, lexicon.json, and questions.tsv.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Exits 2 on usage errors, 0 for --help/--version.
        Err(e) => e.exit(),
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("failed to size the worker pool: {e}")))?;
    }
    match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Folds(a) => cmd_folds(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Compose(a) => cmd_compose(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<()> {
    let corpus = Corpus::parse_corpus(&a.corpus)?;
    let lexicon = FrameLexicon::parse_lexicon(&a.lexicon)?;
    corpus.validate_with_lexicon(&lexicon)?;
    println!(
        "ok: {} documents, {} sentences, {} frame instances, {} lexical units",
        corpus.documents.len(),
        corpus.sentence_count(),
        corpus.instance_count(),
        lexicon.lus().count()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let corpus = Corpus::parse_corpus(&a.corpus)?;
    let lexicon = FrameLexicon::parse_lexicon(&a.lexicon)?;
    corpus.validate_with_lexicon(&lexicon)?;
    let config = a.features.to_config()?;
    let hyper = a.hyper.to_hyper();
    let registry = pipeline::train_all(&corpus, &lexicon, &config, &hyper)?;
    registry.save(&a.out_dir)?;
    lexicon.write_to_path(a.out_dir.join("lexicon.json"))?;
    let mut rc = RunConfig::new("train");
    rc.flag("l2", hyper.l2)
        .flag("max_iter", hyper.max_iter)
        .flag("tol", hyper.tol)
        .flag("seed", hyper.seed)
        .flag("features", &config)
        .flag("out_dir", a.out_dir.display().to_string());
    rc.input("corpus", &a.corpus)?;
    rc.input("lexicon", &a.lexicon)?;
    rc.write(&a.out_dir.join("run_config.json"))?;
    println!(
        "trained {} models ({} lexical units without training data) -> {}",
        registry.len(),
        registry.skipped_lus().len(),
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let models_dir = match a.models {
        Some(dir) => dir,
        None => std::env::var_os(MODEL_DIR_ENV).map(PathBuf::from).ok_or_else(|| {
            Error::Config(format!("--models not given and {MODEL_DIR_ENV} is unset"))
        })?,
    };
    let registry = ModelRegistry::load(&models_dir)?;
    let lexicon = FrameLexicon::parse_lexicon(models_dir.join("lexicon.json"))?;
    registry.check_lexicon(&lexicon)?;
    let corpus = Corpus::parse_corpus(&a.corpus)?;
    let diag = pipeline::predict_corpus_to_path(&corpus, &registry, &lexicon, &a.out)?;
    let mut rc = RunConfig::new("predict");
    rc.flag("models", models_dir.display().to_string())
        .flag("out", a.out.display().to_string());
    rc.input("corpus", &a.corpus)?;
    rc.input("registry", &models_dir.join("registry.json"))?;
    rc.input("lexicon", &models_dir.join("lexicon.json"))?;
    rc.write(&sidecar_for(&a.out))?;
    println!(
        "wrote {} ({} sentences; dropped_roles={} repaired_orphans={} skipped_occurrences={})",
        a.out.display(),
        corpus.sentence_count(),
        diag.dropped_roles,
        diag.repaired_orphans,
        diag.skipped_occurrences
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let gold = Corpus::parse_corpus(&a.gold)?;
    let pred = Corpus::parse_corpus(&a.pred)?;
    let lexicon = FrameLexicon::parse_lexicon(&a.lexicon)?;
    gold.validate_with_lexicon(&lexicon)?;
    let cascade: Cascade = a.cascade.into();
    let report = eval::evaluate_levels(&gold, &pred, &lexicon, cascade)?;
    let by_target: BTreeMap<String, PRF> =
        eval::breakdown_by_target_type(&gold, &pred, &lexicon, cascade)?
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
    let n_bins = 10.min(gold.sentence_count());
    let by_length = eval::breakdown_by_sentence_length(&gold, &pred, &lexicon, cascade, n_bins)?;
    let qmap = match &a.questions {
        Some(path) => QuestionMap::from_path(path)?,
        None => QuestionMap::bundled_default(),
    };
    let by_question = eval::group_by_question(&gold, &pred, &lexicon, cascade, &qmap)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let rendered = match a.report {
        ReportFormat::Text => {
            report::render_eval(a.cascade.name(), &report, &by_target, &by_length, &by_question)
        }
        ReportFormat::Json => to_pretty_json(&json!({
            "cascade": a.cascade.name(),
            "levels": report.levels,
            "warnings": report.warnings,
            "role_selection_by_target_type": by_target,
            "role_selection_by_length": by_length,
            "role_selection_by_question": by_question,
        }))?,
    };
    if let Some(out) = &a.out {
        std::fs::write(out, &rendered).map_err(|e| Error::io(out, e))?;
        let mut rc = RunConfig::new("evaluate");
        rc.flag("cascade", a.cascade.name()).flag("out", out.display().to_string());
        rc.input("gold", &a.gold)?;
        rc.input("pred", &a.pred)?;
        rc.input("lexicon", &a.lexicon)?;
        if let Some(q) = &a.questions {
            rc.input("questions", q)?;
        }
        rc.write(&sidecar_for(out))?;
    } else {
        print!("{rendered}");
    }
    Ok(())
}

fn cmd_folds(a: FoldsArgs) -> Result<()> {
    let corpus = Corpus::parse_corpus(&a.corpus)?;
    let plan = experiments::make_folds(&corpus, a.k, a.seed)?;
    let text = to_pretty_json(&plan)?;
    std::fs::write(&a.out, text).map_err(|e| Error::io(&a.out, e))?;
    let mut rc = RunConfig::new("folds");
    rc.flag("k", a.k).flag("seed", a.seed).flag("out", a.out.display().to_string());
    rc.input("corpus", &a.corpus)?;
    rc.write(&sidecar_for(&a.out))?;
    println!(
        "wrote {} ({} documents into {} folds, balance {:.6})",
        a.out.display(),
        plan.assignment.len(),
        plan.k,
        plan.balance_score
    );
    Ok(())
}

fn cmd_ablate(a: AblateArgs) -> Result<()> {
    let corpus = Corpus::parse_corpus(&a.corpus)?;
    let lexicon = FrameLexicon::parse_lexicon(&a.lexicon)?;
    corpus.validate_with_lexicon(&lexicon)?;
    let config = a.extraction.to_config()?;
    let hyper = a.hyper.to_hyper();
    let plan = experiments::make_folds(&corpus, a.k, hyper.seed)?;
    let rows =
        experiments::run_ablation(&corpus, &lexicon, &plan, &config, &hyper, a.cascade.into())?;
    let rendered = match a.report {
        ReportFormat::Text => report::render_ablation(&rows),
        ReportFormat::Json => to_pretty_json(&rows)?,
    };
    if let Some(out) = &a.out {
        std::fs::write(out, &rendered).map_err(|e| Error::io(out, e))?;
        let mut rc = RunConfig::new("ablate");
        rc.flag("k", a.k)
            .flag("seed", hyper.seed)
            .flag("l2", hyper.l2)
            .flag("max_iter", hyper.max_iter)
            .flag("tol", hyper.tol)
            .flag("cascade", a.cascade.name())
            .flag("features", &config)
            .flag("out", out.display().to_string());
        rc.input("corpus", &a.corpus)?;
        rc.input("lexicon", &a.lexicon)?;
        rc.write(&sidecar_for(out))?;
    } else {
        print!("{rendered}");
    }
    Ok(())
}

fn default_repeats() -> usize {
    3
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeFile {
    corpus: PathBuf,
    lexicon: PathBuf,
    test_source: String,
    runs: Vec<CompositionSpec>,
    #[serde(default)]
    lu_filter: bool,
    #[serde(default = "default_repeats")]
    repeats: usize,
    #[serde(default)]
    l2: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    cascade: Option<Cascade>,
    #[serde(default)]
    features: Option<FeatureConfig>,
}

fn cmd_compose(a: ComposeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let file: ComposeFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("bad compose spec {}: {e}", a.spec.display())))?;
    let corpus = Corpus::parse_corpus(&file.corpus)?;
    let lexicon = FrameLexicon::parse_lexicon(&file.lexicon)?;
    corpus.validate_with_lexicon(&lexicon)?;
    let mut hyper = Hyper::default();
    if let Some(l2) = file.l2 {
        hyper.l2 = l2;
    }
    if let Some(max_iter) = file.max_iter {
        hyper.max_iter = max_iter;
    }
    if let Some(tol) = file.tol {
        hyper.tol = tol;
    }
    let config = file.features.clone().unwrap_or_default();
    let cascade = file.cascade.unwrap_or(Cascade::Strict);
    let rows = experiments::run_composition(
        &corpus,
        &lexicon,
        &file.runs,
        &file.test_source,
        file.lu_filter,
        file.repeats,
        &config,
        &hyper,
        cascade,
    )?;
    let rendered = match a.report {
        ReportFormat::Text => report::render_composition(&rows),
        ReportFormat::Json => to_pretty_json(&rows)?,
    };
    if let Some(out) = &a.out {
        std::fs::write(out, &rendered).map_err(|e| Error::io(out, e))?;
        let mut rc = RunConfig::new("compose");
        rc.flag("out", out.display().to_string());
        rc.input("spec", &a.spec)?;
        rc.input("corpus", &file.corpus)?;
        rc.input("lexicon", &file.lexicon)?;
        rc.write(&sidecar_for(out))?;
    } else {
        print!("{rendered}");
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let paths = synth::write_to_dir(a.sentences, a.seed, &a.out)?;
    let mut rc = RunConfig::new("synth");
    rc.flag("sentences", a.sentences)
        .flag("seed", a.seed)
        .flag("out", a.out.display().to_string());
    rc.write(&a.out.join("run_config.json"))?;
    println!(
        "wrote {}, {}, {}",
        paths.corpus.display(),
        paths.lexicon.display(),
        paths.questions.display()
    );
    Ok(())
}
