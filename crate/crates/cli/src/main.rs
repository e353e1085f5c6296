//! `econ`: runs one pipeline stage per invocation. Stages talk through
//! line-delimited files and each writes `<output>.manifest.json` beside its
//! output.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 when
//! input data is missing or invalid.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use econ_events::evaluation::MatchMode;
use econ_events::selection::Method;

#[derive(Debug, Parser)]
#[command(name = "econ", version, about = "Economic event extraction from news text")]
pub struct Cli {
    /// TOML run configuration; explicit flags take precedence over it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Ontology(OntologyCommand),
    #[command(subcommand)]
    Entities(EntitiesCommand),
    /// Annotate corpus sentences with values, dates, predicates and participants
    Annotate(AnnotateArgs),
    /// Group annotated sentences into events and enumerate their candidates
    Extract(ExtractArgs),
    /// Pick one candidate per event
    Select(SelectArgs),
    /// Train the candidate ranker on labeled events
    Train(TrainArgs),
    /// Print normalized Gini importance per feature
    Importance(ImportanceArgs),
    /// Score selections against ground truth
    Evaluate(EvaluateArgs),
    /// Leave-one-company-out cross-validation from a raw corpus
    Loocv(LoocvArgs),
    /// Serve the curation API over a data directory
    Serve(ServeArgs),
    /// Event and quintuple counts of a candidates file
    Stats(StatsArgs),
}

#[derive(Debug, Subcommand)]
pub enum OntologyCommand {
    /// Build the predicate hierarchy from seeds, a lexical resource and an overlay
    Build {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        lexres: PathBuf,
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write participates/isClassified/inflow-or-outflow triples for selected events
    ExportTriples {
        #[command(flatten)]
        ontology: OntologyArgs,
        #[arg(long)]
        selections: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EntitiesCommand {
    /// Merge entity source files into one repository
    Build {
        #[arg(long, required = true)]
        source: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Resolve a mention to its most common entity
    Lookup {
        #[arg(long)]
        entities: Option<PathBuf>,
        #[arg(long)]
        require_description: bool,
        text: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OntologyArgs {
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// noun-to-verb lexicon
    #[arg(long)]
    pub nouns: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DateOrderArg {
    MonthFirst,
    DayFirst,
}

#[derive(Debug, Clone, Args)]
pub struct AnnotationFlags {
    #[arg(long)]
    pub noun_predicates: bool,
    #[arg(long)]
    pub enforce_roles: bool,
    #[arg(long)]
    pub require_description: bool,
    /// reading of ambiguous numeric dates such as 03/04/2005
    #[arg(long, value_enum)]
    pub date_order: Option<DateOrderArg>,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub ontology: OntologyArgs,
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[command(flatten)]
    pub flags: AnnotationFlags,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub annotated: PathBuf,
    #[command(flatten)]
    pub ontology: OntologyArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Earliest,
    Latest,
    Frequent,
    Supervised,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Earliest => Method::Earliest,
            MethodArg::Latest => Method::Latest,
            MethodArg::Frequent => Method::Frequent,
            MethodArg::Supervised => Method::Supervised,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Events,
    Strict,
    Relaxed,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Events => MatchMode::Events,
            ModeArg::Strict => MatchMode::Strict,
            ModeArg::Relaxed => MatchMode::Relaxed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// minimum ranker score for a supervised pick
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub ontology: OntologyArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub selections: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub ontology: OntologyArgs,
    #[arg(long, value_enum, default_value = "relaxed")]
    pub mode: ModeArg,
    /// also write the report as JSON
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LoocvArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub ontology: OntologyArgs,
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[command(flatten)]
    pub flags: AnnotationFlags,
    /// evaluate one mode only; all three by default
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// extra thresholds to re-score supervised picks at, comma separated
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub candidates: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
