//! Dump ingestion: pages, sections, internal links and the link graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub mod dump;
pub mod graph;
pub mod wikitext;

pub use dump::{open_dump, parse_dump, DumpOptions, DumpReader};
pub use graph::{build_link_graph, GraphBuilder, LinkGraph};
pub use wikitext::{extract_internal_links, normalize_title, split_sections, Links, SectionNode};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: usize, message: String },
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A page as read from the dump, before curation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub title: String,
    pub namespace: i64,
    pub wikitext: String,
    /// Category names without their namespace prefix.
    pub categories: BTreeSet<String>,
    pub outlinks: Vec<String>,
    pub redirect_target: Option<String>,
}

impl RawArticle {
    pub fn sections(&self) -> SectionNode {
        split_sections(&self.wikitext)
    }

    pub fn is_redirect(&self) -> bool {
        self.redirect_target.is_some()
    }
}
