use std::fmt;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use econ_events::annotate::dates::NumericDateOrder;
use econ_events::annotate::{AnnotatedSentence, Annotator};
use econ_events::config::PipelineConfig;
use econ_events::corpus::{corpus_predicate_frequencies, load_corpus, Document};
use econ_events::entities::{merge_records, EntityRepository};
use econ_events::evaluation::{evaluate, load_truth, EvalReport, GroundTruthEvent, MatchMode};
use econ_events::events::{regroup, CandidateQuintuple, EventCandidates};
use econ_events::jsonl;
use econ_events::learning::{label_instances, train_on_instances, ForestModel};
use econ_events::ontology::{build_from_files, Ontology, OntologySources};
use econ_events::pipeline::{counts, extract_events, loo_cv, rethreshold, select_all, LooReport, LooSettings};
use econ_events::selection::{Method, SelectionResult};
use econ_kb::DataDir;
use serde::Serialize;

use crate::manifest::Manifest;
use crate::{
    AnnotateArgs, AnnotationFlags, Cli, Command, DateOrderArg, EntitiesCommand, EvaluateArgs, ExtractArgs, LoocvArgs,
    OntologyArgs, OntologyCommand, SelectArgs, ServeArgs, TrainArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(anyhow!("{msg}"))
}

trait DataContext<T> {
    fn data(self, what: impl fmt::Display) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> DataContext<T> for std::result::Result<T, E> {
    fn data(self, what: impl fmt::Display) -> Result<T> {
        self.map_err(|e| CliError::Data(e.into().context(what.to_string())))
    }
}

/// Configuration file contents plus the directory its relative paths are
/// resolved against.
struct Ctx {
    config: PipelineConfig,
    base: PathBuf,
}

impl Ctx {
    fn load(path: Option<&Path>) -> Result<Ctx> {
        let Some(path) = path else {
            return Ok(Ctx {
                config: PipelineConfig::default(),
                base: PathBuf::new(),
            });
        };
        let text = fs::read_to_string(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        config
            .validate()
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        Ok(Ctx {
            config,
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    /// A flag's path, else the configured one; the file must exist.
    fn input(&self, flag: Option<&PathBuf>, configured: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
        let path = match (flag, configured) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => self.base.join(p),
            (None, None) => return Err(usage(format!("no {what} given: pass --{what} or set paths.{what}"))),
        };
        require(path, what)
    }

    fn optional(&self, flag: Option<&PathBuf>, configured: Option<&PathBuf>, what: &str) -> Result<Option<PathBuf>> {
        match (flag, configured) {
            (None, None) => Ok(None),
            _ => self.input(flag, configured, what).map(Some),
        }
    }

    fn with_flags(&self, flags: &AnnotationFlags) -> PipelineConfig {
        let mut c = self.config.clone();
        c.noun_predicates |= flags.noun_predicates;
        c.enforce_roles |= flags.enforce_roles;
        c.require_description |= flags.require_description;
        if let Some(order) = flags.date_order {
            c.date_order = match order {
                DateOrderArg::MonthFirst => NumericDateOrder::MonthFirst,
                DateOrderArg::DayFirst => NumericDateOrder::DayFirst,
            };
        }
        c
    }

    fn checked(&self, mut c: PipelineConfig, gamma: Option<f64>, seed: Option<u64>) -> Result<PipelineConfig> {
        if let Some(g) = gamma {
            c.gamma = g;
        }
        if let Some(s) = seed {
            c.seed = s;
        }
        c.validate().map_err(usage)?;
        Ok(c)
    }

    fn ontology(&self, args: &OntologyArgs) -> Result<(Ontology, PathBuf)> {
        let path = self.input(args.ontology.as_ref(), self.config.paths.ontology.as_ref(), "ontology")?;
        let nouns = self.optional(args.nouns.as_ref(), self.config.paths.nouns.as_ref(), "nouns")?;
        let ontology = Ontology::load(&path, nouns.as_deref()).data(format!("loading ontology {}", path.display()))?;
        Ok((ontology, path))
    }
}

fn require(path: PathBuf, what: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Data(anyhow!(
            "missing {what}: {} does not exist",
            path.display()
        )))
    }
}

fn read_candidates(path: &Path) -> Result<Vec<EventCandidates>> {
    let path = require(path.to_path_buf(), "candidates")?;
    let flat: Vec<CandidateQuintuple> =
        jsonl::read_all(&path).data(format!("reading candidates {}", path.display()))?;
    Ok(regroup(flat))
}

fn read_truth(ctx: &Ctx, flag: Option<&PathBuf>) -> Result<(Vec<GroundTruthEvent>, PathBuf)> {
    let path = ctx.input(flag, ctx.config.paths.truth.as_ref(), "truth")?;
    let truths = load_truth(&path).data(format!("reading truth {}", path.display()))?;
    Ok((truths, path))
}

fn write_lines<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<usize> {
    jsonl::write_all(path, items).data(format!("writing {}", path.display()))
}

fn finish(manifest: Manifest, output: &Path) -> Result<()> {
    let path = manifest.write(output).map_err(CliError::Data)?;
    log::info!("wrote {} and {}", output.display(), path.display());
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ontology(cmd) => ontology(&ctx, cmd),
        Command::Entities(cmd) => entities(&ctx, cmd),
        Command::Annotate(args) => annotate(&ctx, args),
        Command::Extract(args) => extract(&ctx, args),
        Command::Select(args) => select(&ctx, args),
        Command::Train(args) => train(&ctx, args),
        Command::Importance(args) => {
            let path = ctx.input(args.model.as_ref(), ctx.config.paths.model.as_ref(), "model")?;
            let model = ForestModel::load(&path).data("loading model")?;
            let mut out = String::new();
            for (name, value) in model.gini_importance().features {
                out.push_str(&format!("{name}\t{value:.6}\n"));
            }
            print!("{out}");
            Ok(())
        }
        Command::Evaluate(args) => evaluate_cmd(&ctx, args),
        Command::Loocv(args) => loocv(&ctx, args),
        Command::Serve(args) => serve(&ctx, args),
        Command::Stats(args) => {
            let events = read_candidates(&args.candidates)?;
            println!("{}", serde_json::to_string(&counts(&events)).expect("counts serialize"));
            Ok(())
        }
    }
}

fn ontology(ctx: &Ctx, cmd: OntologyCommand) -> Result<()> {
    match cmd {
        OntologyCommand::Build {
            seeds,
            lexres,
            overlay,
            output,
        } => {
            let seeds = require(seeds, "seeds")?;
            let lexres = require(lexres, "lexres")?;
            let overlay = overlay.map(|o| require(o, "overlay")).transpose()?;
            let outcome = build_from_files(&OntologySources {
                seeds: &seeds,
                lexical_resource: &lexres,
                overlay: overlay.as_deref(),
                nouns: None,
            })
            .data("building ontology")?;
            for d in &outcome.diagnostics {
                log::warn!("{d}");
            }
            outcome
                .ontology
                .save(&output)
                .data(format!("writing {}", output.display()))?;
            let mut m = Manifest::new("ontology build", &serde_json::Value::Null)
                .input("seeds", &seeds)
                .input("lexres", &lexres)
                .count("predicates", outcome.ontology.len())
                .count("classes", outcome.ontology.predicate_classes().len())
                .count("diagnostics", outcome.diagnostics.len());
            if let Some(o) = &overlay {
                m = m.input("overlay", o);
            }
            finish(m, &output)
        }
        OntologyCommand::ExportTriples {
            ontology,
            selections,
            output,
        } => {
            let (onto, onto_path) = ctx.ontology(&ontology)?;
            let selections = require(selections, "selections")?;
            let results: Vec<SelectionResult> = jsonl::read_all(&selections).data("reading selections")?;
            let mut text = String::new();
            let mut exported = 0;
            for r in &results {
                let Some(c) = &r.chosen else { continue };
                let label = if onto.contains(&c.predicate_label) {
                    c.predicate_label.as_str()
                } else {
                    onto.noun_to_verb(&c.predicate_label).unwrap_or(&c.predicate_label)
                };
                let triples = onto
                    .export_event_triples(&c.subject_id, label, &c.object_id, &r.event_key.id())
                    .data(format!("event {}", r.event_key))?;
                for t in triples {
                    text.push_str(&format!("{t}\n"));
                }
                exported += 1;
            }
            fs::write(&output, text).data(format!("writing {}", output.display()))?;
            let m = Manifest::new("ontology export-triples", &serde_json::Value::Null)
                .input("ontology", &onto_path)
                .input("selections", &selections)
                .count("events", exported)
                .count("triples", exported * 3);
            finish(m, &output)
        }
    }
}

fn entities(ctx: &Ctx, cmd: EntitiesCommand) -> Result<()> {
    match cmd {
        EntitiesCommand::Build { source, output } => {
            let mut raw = Vec::new();
            let mut m = Manifest::new("entities build", &serde_json::Value::Null);
            for (i, s) in source.into_iter().enumerate() {
                let s = require(s, "source")?;
                raw.extend(EntityRepository::load_source(&s).data(format!("reading {}", s.display()))?);
                m = m.input(&format!("source{i}"), &s);
            }
            let repo = merge_records(&raw);
            repo.save(&output).data(format!("writing {}", output.display()))?;
            finish(m.count("entries", raw.len()).count("entities", repo.len()), &output)
        }
        EntitiesCommand::Lookup {
            entities,
            require_description,
            text,
        } => {
            let path = ctx.input(entities.as_ref(), ctx.config.paths.entities.as_ref(), "entities")?;
            let repo = EntityRepository::load(&path).data("loading entities")?;
            let hit = repo.resolve_mention(&text, require_description || ctx.config.require_description);
            println!("{}", serde_json::to_string(&hit).expect("entity serializes"));
            Ok(())
        }
    }
}

struct Annotated {
    documents: usize,
    corpus_diagnostics: usize,
    sentences: Vec<AnnotatedSentence>,
    diagnostics: usize,
}

fn annotate_docs(
    docs: &[Document],
    ontology: &Ontology,
    repo: &EntityRepository,
    config: &PipelineConfig,
) -> (Vec<AnnotatedSentence>, usize) {
    let stats = corpus_predicate_frequencies(docs, ontology);
    let annotator = Annotator {
        ontology,
        repository: repo,
        stats: &stats,
        config: config.annotator(),
    };
    let out = annotator.annotate_corpus(docs);
    for d in &out.diagnostics {
        log::debug!("{d}");
    }
    (out.sentences, out.diagnostics.len())
}

struct AnnotationInputs {
    corpus: PathBuf,
    ontology: Ontology,
    ontology_path: PathBuf,
    entities: PathBuf,
}

fn annotation_inputs(
    ctx: &Ctx,
    corpus: Option<&PathBuf>,
    ontology: &OntologyArgs,
    entities: Option<&PathBuf>,
) -> Result<AnnotationInputs> {
    let corpus = ctx.input(corpus, ctx.config.paths.corpus.as_ref(), "corpus")?;
    let (ontology, ontology_path) = ctx.ontology(ontology)?;
    let entities = ctx.input(entities, ctx.config.paths.entities.as_ref(), "entities")?;
    Ok(AnnotationInputs {
        corpus,
        ontology,
        ontology_path,
        entities,
    })
}

fn run_annotation(inputs: &AnnotationInputs, config: &PipelineConfig) -> Result<Annotated> {
    let repo =
        EntityRepository::load(&inputs.entities).data(format!("loading entities {}", inputs.entities.display()))?;
    let loaded = load_corpus(&inputs.corpus).data(format!("reading corpus {}", inputs.corpus.display()))?;
    let (sentences, diagnostics) = annotate_docs(&loaded.documents, &inputs.ontology, &repo, config);
    Ok(Annotated {
        documents: loaded.documents.len(),
        corpus_diagnostics: loaded.diagnostics.len(),
        sentences,
        diagnostics,
    })
}

fn annotate(ctx: &Ctx, args: AnnotateArgs) -> Result<()> {
    let config = ctx.checked(ctx.with_flags(&args.flags), None, None)?;
    let inputs = annotation_inputs(ctx, args.corpus.as_ref(), &args.ontology, args.entities.as_ref())?;
    let out = run_annotation(&inputs, &config)?;
    write_lines(&args.output, &out.sentences)?;
    let m = Manifest::new("annotate", &config)
        .input("corpus", &inputs.corpus)
        .input("ontology", &inputs.ontology_path)
        .input("entities", &inputs.entities)
        .count("documents", out.documents)
        .count("rejected_documents", out.corpus_diagnostics)
        .count("annotated_sentences", out.sentences.len())
        .count("diagnostics", out.diagnostics);
    finish(m, &args.output)
}

fn extract(ctx: &Ctx, args: ExtractArgs) -> Result<()> {
    let annotated_path = require(args.annotated, "annotated")?;
    let annotated: Vec<AnnotatedSentence> =
        jsonl::read_all(&annotated_path).data(format!("reading {}", annotated_path.display()))?;
    let (ontology, ontology_path) = ctx.ontology(&args.ontology)?;
    let events = extract_events(&annotated, &ontology).data("grouping events")?;
    write_lines(&args.output, events.iter().flat_map(|e| &e.candidates))?;
    let c = counts(&events);
    let m = Manifest::new("extract", &ctx.config)
        .input("annotated", &annotated_path)
        .input("ontology", &ontology_path)
        .count("annotated_sentences", annotated.len())
        .count("events", c.events)
        .count("quintuples", c.quintuples);
    finish(m, &args.output)
}

fn select(ctx: &Ctx, args: SelectArgs) -> Result<()> {
    let config = ctx.checked(ctx.config.clone(), args.gamma, None)?;
    let method = Method::from(args.method);
    let model = if method == Method::Supervised {
        let flag = args.model.as_ref();
        if flag.is_none() && config.paths.model.is_none() {
            return Err(usage("select --method supervised needs --model"));
        }
        let path = ctx.input(flag, config.paths.model.as_ref(), "model")?;
        Some((ForestModel::load(&path).data("loading model")?, path))
    } else {
        None
    };
    let events = read_candidates(&args.candidates)?;
    let results = select_all(&events, method, model.as_ref().map(|(m, _)| m), config.gamma).data("selecting")?;
    write_lines(&args.output, &results)?;
    let mut m = Manifest::new("select", &config)
        .input("candidates", &args.candidates)
        .count("events", events.len())
        .count("returned", results.iter().filter(|r| r.chosen.is_some()).count());
    if let Some((_, path)) = &model {
        m = m.input("model", path);
    }
    m.config["method"] = serde_json::Value::from(method.name());
    finish(m, &args.output)
}

fn train(ctx: &Ctx, args: TrainArgs) -> Result<()> {
    let config = ctx.checked(ctx.config.clone(), None, args.seed)?;
    let events = read_candidates(&args.candidates)?;
    let (truths, truth_path) = read_truth(ctx, args.truth.as_ref())?;
    let (ontology, ontology_path) = ctx.ontology(&args.ontology)?;
    let instances = label_instances(&events, &truths, &ontology).data("labeling candidates")?;
    let model = train_on_instances(&instances, config.forest, config.seed).data("training")?;
    model
        .save(&args.output)
        .data(format!("writing {}", args.output.display()))?;
    let m = Manifest::new("train", &config)
        .input("candidates", &args.candidates)
        .input("truth", &truth_path)
        .input("ontology", &ontology_path)
        .count("instances", instances.len())
        .count("positives", instances.iter().filter(|i| i.label >= 0.5).count())
        .count("trees", model.trees.len());
    finish(m, &args.output)
}

fn report_table(title: &str, rows: &[(String, EvalReport)]) -> String {
    let mut out = format!(
        "{title}\n{:<12} {:>6} {:>6} {:>6} {:>5} {:>5} {:>5}\n",
        "method", "P", "R", "F1", "tp", "fp", "fn"
    );
    for (name, r) in rows {
        out.push_str(&format!(
            "{:<12} {:>6.3} {:>6.3} {:>6.3} {:>5} {:>5} {:>5}\n",
            name, r.precision, r.recall, r.f1, r.tp, r.fp, r.fn_
        ));
    }
    out
}

fn evaluate_cmd(ctx: &Ctx, args: EvaluateArgs) -> Result<()> {
    let selections = require(args.selections, "selections")?;
    let results: Vec<SelectionResult> = jsonl::read_all(&selections).data("reading selections")?;
    let (truths, truth_path) = read_truth(ctx, args.truth.as_ref())?;
    let (ontology, ontology_path) = ctx.ontology(&args.ontology)?;
    let mode = MatchMode::from(args.mode);
    let report = evaluate(&results, &truths, mode, &ontology).data("evaluating")?;
    let method = results.first().map_or("-", |r| r.method.name());
    print!(
        "{}",
        report_table(&format!("{mode:?}"), &[(method.to_string(), report)])
    );
    if let Some(out) = args.output {
        write_json(&out, &report)?;
        let m = Manifest::new("evaluate", &ctx.config)
            .input("selections", &selections)
            .input("truth", &truth_path)
            .input("ontology", &ontology_path)
            .count("selections", results.len())
            .count("truths", truths.len());
        finish(m, &out)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).data(format!("writing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct SweepPoint {
    gamma: f64,
    returned: usize,
    report: EvalReport,
}

#[derive(Debug, Serialize)]
struct LoocvOutput {
    events: usize,
    quintuples: usize,
    runs: Vec<LooReport>,
    sweep: Vec<SweepPoint>,
}

fn loocv(ctx: &Ctx, args: LoocvArgs) -> Result<()> {
    let config = ctx.checked(ctx.with_flags(&args.flags), args.gamma, args.seed)?;
    if let Some(g) = args.sweep.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(usage(format!("sweep threshold {g} is outside [0, 1]")));
    }
    let inputs = annotation_inputs(ctx, args.corpus.as_ref(), &args.ontology, args.entities.as_ref())?;
    let (truths, truth_path) = read_truth(ctx, args.truth.as_ref())?;
    let annotated = run_annotation(&inputs, &config)?;
    let events = extract_events(&annotated.sentences, &inputs.ontology).data("grouping events")?;
    let modes = match args.mode {
        Some(m) => vec![MatchMode::from(m)],
        None => vec![MatchMode::Events, MatchMode::Strict, MatchMode::Relaxed],
    };
    let c = counts(&events);
    let mut stdout = String::new();
    stdout.push_str(&format!("#events {}  #quintuples {}\n", c.events, c.quintuples));
    let mut runs = Vec::new();
    for mode in modes {
        let settings = LooSettings {
            mode,
            gamma: config.gamma,
            seed: config.seed,
            forest: config.forest,
        };
        let report = loo_cv(&events, &truths, &inputs.ontology, settings).data("cross-validation")?;
        let rows: Vec<(String, EvalReport)> = report
            .aggregate
            .iter()
            .map(|(m, r)| (m.name().to_string(), *r))
            .collect();
        stdout.push_str(&report_table(&format!("\n{mode:?} (gamma {})", config.gamma), &rows));
        runs.push(report);
    }
    let mut sweep = Vec::new();
    if !args.sweep.is_empty() {
        let base = runs.last().expect("at least one mode");
        stdout.push_str(&format!(
            "\nthreshold sweep ({:?})\n{:>6} {:>8} {:>6} {:>6} {:>6}\n",
            base.mode, "gamma", "returned", "P", "R", "F1"
        ));
        for &gamma in &args.sweep {
            let (report, returned) = rethreshold(base, &truths, &inputs.ontology, gamma).data("re-thresholding")?;
            stdout.push_str(&format!(
                "{:>6.2} {:>8} {:>6.3} {:>6.3} {:>6.3}\n",
                gamma, returned, report.precision, report.recall, report.f1
            ));
            sweep.push(SweepPoint {
                gamma,
                returned,
                report,
            });
        }
    }
    print!("{stdout}");
    std::io::stdout().flush().ok();
    if let Some(out) = args.output {
        write_json(
            &out,
            &LoocvOutput {
                events: c.events,
                quintuples: c.quintuples,
                runs,
                sweep,
            },
        )?;
        let m = Manifest::new("loocv", &config)
            .input("corpus", &inputs.corpus)
            .input("ontology", &inputs.ontology_path)
            .input("entities", &inputs.entities)
            .input("truth", &truth_path)
            .count("documents", annotated.documents)
            .count("events", c.events)
            .count("quintuples", c.quintuples)
            .count("truths", truths.len());
        finish(m, &out)?;
    }
    Ok(())
}

fn serve(ctx: &Ctx, args: ServeArgs) -> Result<()> {
    let config = ctx.checked(ctx.config.clone(), args.gamma, None)?;
    let data = DataDir::new(require(args.data, "data directory")?);
    let kb = data
        .open(config.gamma)
        .data(format!("loading {}", data.root.display()))?;
    let runtime = tokio::runtime::Runtime::new().data("starting runtime")?;
    let addr = SocketAddr::new(args.host, args.port);
    eprintln!("serving {} on http://{addr}", data.root.display());
    runtime
        .block_on(econ_kb::http::serve(kb, addr))
        .data(format!("serving on {addr}"))
}
