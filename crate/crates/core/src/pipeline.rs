//! File-based pipeline stages: dump → extract + link graph → scores → corpus.
//!
//! Layout written by [`ingest`] in its output directory:
//!
//! ```text
//! articles.jsonl        one namespace-0, non-redirect RawArticle per line
//! graph.tsv             link graph edge list
//! provenance.json       dump name, checksum, tool version, timestamp
//! ```
//!
//! TSV outputs get a `<file>.meta.json` sidecar carrying provenance; the
//! corpus embeds it under the `provenance` key.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{open_dump, CorpusError, DumpOptions, GraphBuilder, LinkGraph, RawArticle};
use crate::curate::{curate, curated_to_dataset, CategoryMapping, CurateError, CurationReport, CurationRules};
use crate::provenance::Provenance;
use crate::rank::{pagerank, top_k, write_scores_tsv, RankConfig, RankError};
use crate::squad::{export_squad, SquadError};

pub const ARTICLES_FILE: &str = "articles.jsonl";
pub const GRAPH_FILE: &str = "graph.tsv";
pub const PROVENANCE_FILE: &str = "provenance.json";
pub const SCORES_FILE: &str = "scores.tsv";
pub const CORPUS_FILE: &str = "corpus.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Curate(#[from] CurateError),
    #[error(transparent)]
    Squad(#[from] SquadError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> PipelineError + '_ {
    move |source| PipelineError::Json { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(json_err(path))?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(io_err(path))
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar<T> {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub details: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub pages: usize,
    pub articles: usize,
    pub redirects: usize,
    pub other_namespaces: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub warnings: Vec<String>,
}

/// Stream the dump once, writing the article extract and the link graph.
pub fn ingest(
    dump: &Path,
    out_dir: &Path,
    options: DumpOptions,
    provenance: &Provenance,
) -> Result<IngestSummary, PipelineError> {
    let articles_path = out_dir.join(ARTICLES_FILE);
    let mut articles_out = create(&articles_path)?;
    let mut builder = GraphBuilder::new();
    let mut summary = IngestSummary {
        pages: 0,
        articles: 0,
        redirects: 0,
        other_namespaces: 0,
        graph_nodes: 0,
        graph_edges: 0,
        warnings: Vec::new(),
    };
    for page in open_dump(dump, options)? {
        let page = page?;
        summary.pages += 1;
        builder.add_article(&page);
        if page.namespace != 0 {
            summary.other_namespaces += 1;
        } else if page.is_redirect() {
            summary.redirects += 1;
        } else {
            summary.articles += 1;
            serde_json::to_writer(&mut articles_out, &page).map_err(json_err(&articles_path))?;
            articles_out.write_all(b"\n").map_err(io_err(&articles_path))?;
        }
    }
    articles_out.flush().map_err(io_err(&articles_path))?;

    let (graph, warnings) = builder.finish();
    summary.graph_nodes = graph.node_count();
    summary.graph_edges = graph.edge_count();
    summary.warnings = warnings;
    let graph_path = out_dir.join(GRAPH_FILE);
    graph.write_edge_list(create(&graph_path)?)?;
    write_json(&meta_path(&graph_path), &Sidecar { provenance: provenance.clone(), details: &summary })?;
    write_json(&out_dir.join(PROVENANCE_FILE), provenance)?;
    log::info!(
        "ingested {} pages: {} articles, {} redirects, graph {} nodes / {} edges",
        summary.pages,
        summary.articles,
        summary.redirects,
        summary.graph_nodes,
        summary.graph_edges
    );
    Ok(summary)
}

pub fn read_graph(path: &Path) -> Result<LinkGraph, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(LinkGraph::read_edge_list(BufReader::new(file))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub config: RankConfig,
    pub iterations_run: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub selected: usize,
}

/// PageRank the graph and write the top `config.k` titles as TSV.
pub fn rank_graph(
    graph_path: &Path,
    config: &RankConfig,
    out: &Path,
    provenance: &Provenance,
) -> Result<RankSummary, PipelineError> {
    config.validate()?;
    let graph = read_graph(graph_path)?;
    let scores = pagerank(&graph, config)?;
    if !scores.converged {
        log::warn!("PageRank stopped at {} iterations without converging", scores.iterations_run);
    }
    let ranked = top_k(&scores, &graph, config.k);
    write_scores_tsv(&ranked, create(out)?).map_err(io_err(out))?;
    let summary = RankSummary {
        config: *config,
        iterations_run: scores.iterations_run,
        final_residual: scores.final_residual,
        converged: scores.converged,
        selected: ranked.len(),
    };
    write_json(&meta_path(out), &Sidecar { provenance: provenance.clone(), details: &summary })?;
    Ok(summary)
}

pub fn read_extract(dir: &Path) -> Result<HashMap<String, RawArticle>, PipelineError> {
    let path = dir.join(ARTICLES_FILE);
    let file = File::open(&path).map_err(io_err(&path))?;
    let mut articles = HashMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(&path))?;
        if line.is_empty() {
            continue;
        }
        let a: RawArticle = serde_json::from_str(&line).map_err(json_err(&path))?;
        articles.insert(a.title.clone(), a);
    }
    Ok(articles)
}

pub fn read_mapping(path: &Path) -> Result<CategoryMapping, PipelineError> {
    Ok(CategoryMapping::from_csv(File::open(path).map_err(io_err(path))?)?)
}

/// Curate the ranked titles of `scores` and write the corpus skeleton. The
/// curation report goes to `<out>.meta.json`.
pub fn curate_corpus(
    scores: &Path,
    extract_dir: &Path,
    mapping: &CategoryMapping,
    rules: &CurationRules,
    k: usize,
    out: &Path,
    provenance: &Provenance,
) -> Result<CurationReport, PipelineError> {
    let ranked = crate::rank::read_ranked_titles(BufReader::new(File::open(scores).map_err(io_err(scores))?))
        .map_err(io_err(scores))?;
    let articles = read_extract(extract_dir)?;
    let (kept, report) = curate(&ranked, &articles, rules, mapping, k);
    for title in &report.unmapped {
        log::warn!("unmapped article `{title}` excluded");
    }
    let dataset = curated_to_dataset(&kept, Some(provenance.clone()));
    let bytes = export_squad(&dataset)?;
    let mut w = create(out)?;
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(io_err(out))?;
    write_json(&meta_path(out), &Sidecar { provenance: provenance.clone(), details: &report })?;
    Ok(report)
}

/// Inputs of a full run.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub dump_path: PathBuf,
    pub workdir: PathBuf,
    pub mapping_path: PathBuf,
    pub rules: CurationRules,
    pub rank: RankConfig,
    pub dump_options: DumpOptions,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub ingest: IngestSummary,
    pub rank: RankSummary,
    pub curation: CurationReport,
    pub corpus_path: PathBuf,
}

/// Ingest, rank and curate into `workdir`, ending with `corpus.json`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary, PipelineError> {
    let extract = cfg.workdir.join("extract");
    let ingest_summary = ingest(&cfg.dump_path, &extract, cfg.dump_options, &cfg.provenance)?;
    let scores = cfg.workdir.join(SCORES_FILE);
    let rank_summary = rank_graph(&extract.join(GRAPH_FILE), &cfg.rank, &scores, &cfg.provenance)?;
    let mapping = read_mapping(&cfg.mapping_path)?;
    let corpus_path = cfg.workdir.join(CORPUS_FILE);
    let curation =
        curate_corpus(&scores, &extract, &mapping, &cfg.rules, cfg.rank.k, &corpus_path, &cfg.provenance)?;
    Ok(PipelineSummary { ingest: ingest_summary, rank: rank_summary, curation, corpus_path })
}
