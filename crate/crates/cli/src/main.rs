//! `annoforge`: build a QA collection corpus from a Wikipedia dump, serve the
//! annotation platform, and measure the resulting dataset.
//!
//! Exit status is 0 on success, 1 when an input fails validation or a
//! command fails, 2 on a usage error. Every flag can also be set through an
//! `ANNOFORGE_*` environment variable.

use std::collections::BTreeMap;
use std::net::ToSocketAddrs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use annoforge_core::annotation::{
    Assessment, ContributorStatus, LogMailer, PasswordHasher, Platform, PlatformSettings, Role, Store,
};
use annoforge_core::config::KeyValueConfig;
use annoforge_core::corpus::DumpOptions;
use annoforge_core::curate::CurationRules;
use annoforge_core::metrics::{dataset_report, evaluate_predictions, parse_conllu, Stopwords};
use annoforge_core::pipeline::{self, meta_path, PROVENANCE_FILE};
use annoforge_core::provenance::Provenance;
use annoforge_core::rank::RankConfig;
use annoforge_core::squad::{export_squad, import_squad, merge_datasets, Dataset};

const ENV_PREFIX: &str = "ANNOFORGE_";

#[derive(Parser)]
#[command(name = "annoforge", version, about = "Corpus pipeline, annotation service and dataset metrics")]
struct Cli {
    /// Worker threads for per-article parallel work (default: all cores).
    #[arg(long, global = true, env = "ANNOFORGE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a pages-articles dump into an article extract and a link graph.
    Ingest(IngestArgs),
    /// PageRank the link graph and keep the top-k titles.
    Rank(RankArgs),
    /// Apply the curation rules to ranked articles and write the corpus skeleton.
    Curate(CurateArgs),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
    /// Validate or merge SQuAD-format datasets.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Dataset quality measurements and prediction scoring.
    Metrics {
        #[command(subcommand)]
        command: MetricsCommand,
    },
    /// Account administration against a store file.
    Admin {
        #[command(subcommand)]
        command: AdminCommand,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// Dump file, plain XML or bzip2.
    #[arg(long, env = "ANNOFORGE_DUMP")]
    dump: PathBuf,
    /// Output directory for articles.jsonl, graph.tsv and provenance.json.
    #[arg(long, env = "ANNOFORGE_EXTRACT")]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// Edge list written by `ingest`.
    #[arg(long, env = "ANNOFORGE_GRAPH")]
    graph: PathBuf,
    #[arg(long, env = "ANNOFORGE_K", default_value_t = 25_000)]
    k: usize,
    #[arg(long, env = "ANNOFORGE_DAMPING", default_value_t = 0.85)]
    damping: f64,
    #[arg(long, env = "ANNOFORGE_EPSILON", default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long, env = "ANNOFORGE_MAX_ITERATIONS", default_value_t = 1000)]
    max_iterations: usize,
    /// Output TSV, `title<TAB>score` by descending score.
    #[arg(long, env = "ANNOFORGE_SCORES")]
    out: PathBuf,
}

#[derive(Args)]
struct CurateArgs {
    #[arg(long, env = "ANNOFORGE_SCORES")]
    scores: PathBuf,
    /// Directory written by `ingest`.
    #[arg(long, env = "ANNOFORGE_EXTRACT")]
    dump_extract: PathBuf,
    /// CSV with `title,category` columns.
    #[arg(long, env = "ANNOFORGE_MAPPING")]
    mapping: PathBuf,
    /// `key = value` rules file; built-in defaults when omitted.
    #[arg(long, env = "ANNOFORGE_RULES")]
    rules: Option<PathBuf>,
    /// Only the first k ranked titles are considered.
    #[arg(long, env = "ANNOFORGE_K", default_value_t = 25_000)]
    k: usize,
    #[arg(long, env = "ANNOFORGE_CORPUS")]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// `key = value` file with a `[service]` section; flags take precedence.
    #[arg(long, env = "ANNOFORGE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "ANNOFORGE_BIND")]
    bind: Option<String>,
    /// Snapshot file of the platform state; in-memory when unset.
    #[arg(long, env = "ANNOFORGE_STORE")]
    store: Option<PathBuf>,
    /// Only `log` is built in: verification and reset links go to the log.
    #[arg(long, env = "ANNOFORGE_MAILER")]
    mailer: Option<String>,
    /// Base URL used in mailed links.
    #[arg(long, env = "ANNOFORGE_BASE_URL")]
    base_url: Option<String>,
    #[arg(long, env = "ANNOFORGE_SESSION_TTL_HOURS")]
    session_ttl_hours: Option<i64>,
    #[arg(long, env = "ANNOFORGE_LEASE_TTL_MINUTES")]
    lease_ttl_minutes: Option<i64>,
    /// Onboarding assessment JSON; a built-in one when unset.
    #[arg(long, env = "ANNOFORGE_ASSESSMENT")]
    assessment: Option<PathBuf>,
    /// Restrict paragraph annotation to certified contributors.
    #[arg(long, env = "ANNOFORGE_CERTIFIED_ONLY")]
    certified_only: Option<bool>,
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Check structure and every sample; lists violations by code.
    Validate { file: PathBuf },
    /// Concatenate datasets into OUT, prefixing qa ids per source.
    Merge {
        /// Shuffle article order with this seed.
        #[arg(long, env = "ANNOFORGE_SEED")]
        seed: Option<u64>,
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Lexical variation and syntactic divergence histograms.
    Report {
        #[arg(long, env = "ANNOFORGE_DATASET")]
        dataset: PathBuf,
        /// CoNLL-U parses with `# qa_id` and `# role` comments.
        #[arg(long, env = "ANNOFORGE_PARSES")]
        parses: Option<PathBuf>,
        /// One stopword per line; the built-in French list when unset.
        #[arg(long, env = "ANNOFORGE_STOPWORDS")]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the histograms as CSV.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Exact match and F1 of predictions (`{qa_id: answer}`) against gold answers.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Write full per-question scores here; the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AdminCommand {
    /// Create a verified account directly in the store.
    CreateUser {
        #[arg(long, env = "ANNOFORGE_STORE")]
        store: PathBuf,
        #[arg(long)]
        email: String,
        #[arg(long, env = "ANNOFORGE_ADMIN_PASSWORD", hide_env_values = true)]
        password: String,
        /// regular, admin or super-admin.
        #[arg(long, default_value = "super-admin")]
        role: Role,
        /// open or certified.
        #[arg(long, default_value = "certified")]
        status: ContributorStatus,
    },
}

/// A command that ran but found its input invalid.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("cannot size the worker pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<Invalid>().is_some() {
                eprintln!("invalid: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Rank(a) => rank(a),
        Command::Curate(a) => curate(a),
        Command::Serve(a) => serve(a),
        Command::Dataset { command: DatasetCommand::Validate { file } } => validate(&file),
        Command::Dataset { command: DatasetCommand::Merge { seed, out, inputs } } => merge(seed, &out, &inputs),
        Command::Metrics { command: MetricsCommand::Report { dataset, parses, stopwords, out, plot } } => {
            report(&dataset, parses.as_deref(), stopwords.as_deref(), &out, plot.as_deref())
        }
        Command::Metrics { command: MetricsCommand::Eval { gold, pred, out } } => eval(&gold, &pred, out.as_deref()),
        Command::Admin { command: AdminCommand::CreateUser { store, email, password, role, status } } => {
            create_user(&store, &email, &password, role, status)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Provenance carried by an upstream artifact, or a fresh record without a
/// dump when there is none.
fn inherited_provenance(path: &Path) -> Provenance {
    let found = std::fs::read(path).ok().and_then(|b| serde_json::from_slice::<serde_json::Value>(&b).ok());
    let value = found.map(|v| v.get("provenance").cloned().unwrap_or(v));
    match value.and_then(|v| serde_json::from_value(v).ok()) {
        Some(p) => p,
        None => {
            log::warn!("no provenance found at {}; recording none", path.display());
            Provenance::new(None, None)
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let (dataset, report) = import_squad(&read(path)?).with_context(|| format!("{}", path.display()))?;
    if !report.structural.is_empty() {
        return Err(Invalid(format!("{}: {} structural issue(s)", path.display(), report.structural.len())).into());
    }
    for s in &report.invalid_samples {
        log::warn!("{}: sample {} fails {:?}", path.display(), s.qa_id, s.violations);
    }
    Ok(dataset)
}

fn ingest(a: IngestArgs) -> Result<()> {
    let provenance = Provenance::for_dump(&a.dump).with_context(|| format!("cannot read {}", a.dump.display()))?;
    let summary = pipeline::ingest(&a.dump, &a.out, DumpOptions { accept_compressed: true }, &provenance)?;
    print_json(&summary)
}

fn rank(a: RankArgs) -> Result<()> {
    let config = RankConfig { damping: a.damping, epsilon: a.epsilon, max_iterations: a.max_iterations, k: a.k };
    let provenance = inherited_provenance(&meta_path(&a.graph));
    let summary = pipeline::rank_graph(&a.graph, &config, &a.out, &provenance)?;
    print_json(&summary)
}

fn load_rules(path: Option<&Path>) -> Result<CurationRules> {
    let mut cfg = match path {
        Some(p) => KeyValueConfig::load(p).with_context(|| format!("rules file {}", p.display()))?,
        None => KeyValueConfig::default(),
    };
    cfg.apply_env(ENV_PREFIX, std::env::vars());
    Ok(CurationRules::from_config(&cfg)?)
}

fn curate(a: CurateArgs) -> Result<()> {
    let rules = load_rules(a.rules.as_deref())?;
    let mapping = pipeline::read_mapping(&a.mapping)?;
    let provenance = inherited_provenance(&a.dump_extract.join(PROVENANCE_FILE));
    let report = pipeline::curate_corpus(&a.scores, &a.dump_extract, &mapping, &rules, a.k, &a.out, &provenance)?;
    eprint!("{}", report.category_table());
    print_json(&report)
}

struct ServeConfig {
    bind: String,
    store: Option<PathBuf>,
    base_url: String,
    settings: PlatformSettings,
    assessment: Option<PathBuf>,
}

fn serve_config(a: ServeArgs) -> Result<ServeConfig> {
    let mut file = match &a.config {
        Some(p) => KeyValueConfig::load(p).with_context(|| format!("config file {}", p.display()))?,
        None => KeyValueConfig::default(),
    };
    file.apply_env(ENV_PREFIX, std::env::vars());
    let mailer = a.mailer.or_else(|| file.get("service.mailer").map(String::from)).unwrap_or_else(|| "log".into());
    if mailer != "log" {
        bail!("unsupported mailer `{mailer}`; only `log` is built in");
    }
    let mut settings = PlatformSettings::default();
    if let Some(h) = a.session_ttl_hours.or(file.parse_value("service.session_ttl_hours")?) {
        settings.session_ttl = chrono_hours(h)?;
    }
    if let Some(m) = a.lease_ttl_minutes.or(file.parse_value("service.lease_ttl_minutes")?) {
        settings.lease_ttl = chrono_minutes(m)?;
    }
    if let Some(c) = a.certified_only.or(file.parse_value("service.certified_only")?) {
        settings.allow_open_annotation = !c;
    }
    let bind = a.bind.or_else(|| file.get("service.bind").map(String::from)).unwrap_or_else(|| "127.0.0.1:8080".into());
    Ok(ServeConfig {
        base_url: a
            .base_url
            .or_else(|| file.get("service.base_url").map(String::from))
            .unwrap_or_else(|| format!("http://{bind}")),
        bind,
        store: a.store.or_else(|| file.get("service.store").map(PathBuf::from)),
        settings,
        assessment: a.assessment.or_else(|| file.get("service.assessment").map(PathBuf::from)),
    })
}

fn chrono_hours(h: i64) -> Result<chrono::Duration> {
    if h <= 0 {
        bail!("session TTL must be positive");
    }
    Ok(chrono::Duration::hours(h))
}

fn chrono_minutes(m: i64) -> Result<chrono::Duration> {
    if m <= 0 {
        bail!("lease TTL must be positive");
    }
    Ok(chrono::Duration::minutes(m))
}

fn serve(a: ServeArgs) -> Result<()> {
    let cfg = serve_config(a)?;
    let store = match &cfg.store {
        Some(p) => Store::open(p)?,
        None => {
            log::warn!("no store configured; state is kept in memory only");
            Store::in_memory()
        }
    };
    let mut platform =
        Platform::new(store, cfg.settings).with_mailer(Arc::new(LogMailer { base_url: cfg.base_url.clone() }));
    if let Some(p) = &cfg.assessment {
        platform = platform.with_assessment(Assessment::load(p)?);
    }
    let addr = cfg
        .bind
        .to_socket_addrs()
        .with_context(|| format!("bind address `{}`", cfg.bind))?
        .next()
        .with_context(|| format!("bind address `{}` resolves to nothing", cfg.bind))?;
    let state = annoforge_service::AppState::new(Arc::new(platform));
    tokio::runtime::Runtime::new()?.block_on(annoforge_service::serve(addr, state))?;
    Ok(())
}

fn validate(file: &Path) -> Result<()> {
    let (dataset, report) = match import_squad(&read(file)?) {
        Ok(r) => r,
        Err(e) => return Err(Invalid(format!("{}: {e}", file.display())).into()),
    };
    for issue in &report.structural {
        println!("STRUCTURE\t{}\t{}", issue.path, issue.message);
    }
    for sample in &report.invalid_samples {
        for v in &sample.violations {
            println!("{}\t{}", v.code(), sample.qa_id);
        }
    }
    println!(
        "{} articles, {} paragraphs, {} questions, {} structural issue(s), {} invalid sample(s)",
        dataset.data.len(),
        dataset.paragraph_count(),
        dataset.qa_count(),
        report.structural.len(),
        report.invalid_samples.len()
    );
    if report.is_clean() {
        Ok(())
    } else {
        Err(Invalid(format!("{} failed validation", file.display())).into())
    }
}

fn merge(seed: Option<u64>, out: &Path, inputs: &[PathBuf]) -> Result<()> {
    let parts = inputs.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>>>()?;
    let (merged, _warnings) = merge_datasets(&parts, seed);
    write(out, &export_squad(&merged)?)?;
    log::info!("merged {} datasets: {} questions", parts.len(), merged.qa_count());
    Ok(())
}

fn report(dataset: &Path, parses: Option<&Path>, stopwords: Option<&Path>, out: &Path, plot: Option<&Path>) -> Result<()> {
    let dataset = load_dataset(dataset)?;
    let parses = match parses {
        Some(p) => parse_conllu(&String::from_utf8(read(p)?)?)?,
        None => BTreeMap::new(),
    };
    let stopwords = match stopwords {
        Some(p) => Stopwords::parse(&String::from_utf8(read(p)?)?),
        None => Stopwords::french(),
    };
    let report = dataset_report(&dataset, &parses, &stopwords);
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write(out, &bytes)?;
    if let Some(p) = plot {
        write(p, report.to_csv().as_bytes())?;
    }
    log::info!(
        "{} samples: lexical {} evaluated, divergence {} evaluated",
        report.sample_count,
        report.lexical_variation.evaluated,
        report.syntactic_divergence.evaluated
    );
    Ok(())
}

fn eval(gold: &Path, pred: &Path, out: Option<&Path>) -> Result<()> {
    let gold = load_dataset(gold)?;
    let predictions: BTreeMap<String, String> = serde_json::from_slice(&read(pred)?)
        .map_err(|e| Invalid(format!("{}: predictions must map qa ids to strings: {e}", pred.display())))?;
    let scores = evaluate_predictions(&gold, &predictions);
    if let Some(p) = out {
        write(p, &serde_json::to_vec_pretty(&scores)?)?;
    }
    print_json(&serde_json::json!({
        "exact_match": scores.exact_match,
        "f1": scores.f1,
        "total": scores.total,
        "missing": scores.missing.len(),
        "unknown": scores.unknown.len(),
    }))
}

fn create_user(store: &Path, email: &str, password: &str, role: Role, status: ContributorStatus) -> Result<()> {
    if password.chars().count() < 8 {
        return Err(Invalid("password needs at least 8 characters".into()).into());
    }
    let platform = Platform::new(Store::open(store)?, PlatformSettings::default());
    let hash = PasswordHasher::default().hash(password);
    let profile = platform.provision_user(email, hash, role, status)?;
    print_json(&profile)
}
