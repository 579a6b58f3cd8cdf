//! Turning ranked raw articles into an annotation-ready corpus.
//!
//! Stages, applied in this order to each ranked title: top-k restriction,
//! article eligibility, section filtering, paragraph segmentation, the
//! minimum paragraph count, and category assignment.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::category::Category;
use crate::config::{ConfigError, KeyValueConfig};
use crate::corpus::wikitext::{prose_blocks, render_plain};
use crate::corpus::{RawArticle, SectionNode};
use crate::provenance::Provenance;
use crate::squad::{ArticleEntry, Dataset, ParagraphEntry};
use crate::text::{char_len, collapse_whitespace};

#[derive(Debug, thiserror::Error)]
pub enum CurateError {
    #[error("invalid curation rules: {0}")]
    InvalidRules(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("category mapping line {line}: {message}")]
    Mapping { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Case-insensitive, whitespace-normalized comparison key.
fn match_key(s: &str) -> String {
    collapse_whitespace(s).to_lowercase()
}

/// A category name, or a prefix when written with a trailing `*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryPattern {
    key: String,
    prefix: bool,
}

impl CategoryPattern {
    pub fn parse(pattern: &str) -> Self {
        match pattern.trim().strip_suffix('*') {
            Some(p) => CategoryPattern { key: match_key(p), prefix: true },
            None => CategoryPattern { key: match_key(pattern), prefix: false },
        }
    }

    pub fn matches(&self, category: &str) -> bool {
        let c = match_key(category);
        if self.prefix {
            c.starts_with(&self.key)
        } else {
            c == self.key
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurationRules {
    discard_section_titles: BTreeSet<String>,
    reject_if_section_present: BTreeSet<String>,
    draft_categories: Vec<CategoryPattern>,
    disambiguation_categories: Vec<CategoryPattern>,
    pub min_paragraph_chars: usize,
    pub max_paragraph_chars: usize,
    pub min_paragraphs: usize,
}

impl Default for CurationRules {
    fn default() -> Self {
        CurationRules {
            discard_section_titles: [
                "Voir aussi",
                "Articles connexes",
                "Articles connexe",
                "Liens externes",
                "Notes et références",
            ]
            .iter()
            .map(|t| match_key(t))
            .collect(),
            reject_if_section_present: [match_key("Événements")].into(),
            draft_categories: vec![CategoryPattern::parse("Wikipédia:ébauche*")],
            disambiguation_categories: vec![CategoryPattern::parse("Homonymie")],
            min_paragraph_chars: 500,
            max_paragraph_chars: 1000,
            min_paragraphs: 5,
        }
    }
}

impl CurationRules {
    /// Defaults overridden by keys of a rules file:
    ///
    /// ```text
    /// [paragraphs]
    /// min_chars = 500
    /// max_chars = 1000
    /// min_count = 5
    /// [sections]
    /// discard = Voir aussi | Articles connexes | Liens externes | Notes et références
    /// reject_if_present = Événements
    /// [categories]
    /// draft = Wikipédia:ébauche*
    /// disambiguation = Homonymie
    /// ```
    pub fn from_config(cfg: &KeyValueConfig) -> Result<Self, CurateError> {
        let mut rules = CurationRules::default();
        if let Some(v) = cfg.parse_value("paragraphs.min_chars")? {
            rules.min_paragraph_chars = v;
        }
        if let Some(v) = cfg.parse_value("paragraphs.max_chars")? {
            rules.max_paragraph_chars = v;
        }
        if let Some(v) = cfg.parse_value("paragraphs.min_count")? {
            rules.min_paragraphs = v;
        }
        if let Some(list) = cfg.list("sections.discard") {
            rules.discard_section_titles = list.iter().map(|t| match_key(t)).collect();
        }
        if let Some(list) = cfg.list("sections.reject_if_present") {
            rules.reject_if_section_present = list.iter().map(|t| match_key(t)).collect();
        }
        if let Some(list) = cfg.list("categories.draft") {
            rules.draft_categories = list.iter().map(|p| CategoryPattern::parse(p)).collect();
        }
        if let Some(list) = cfg.list("categories.disambiguation") {
            rules.disambiguation_categories = list.iter().map(|p| CategoryPattern::parse(p)).collect();
        }
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<(), CurateError> {
        if self.min_paragraph_chars == 0 || self.min_paragraph_chars >= self.max_paragraph_chars {
            return Err(CurateError::InvalidRules(format!(
                "paragraph bounds must satisfy 0 < min < max (got {} and {})",
                self.min_paragraph_chars, self.max_paragraph_chars
            )));
        }
        if self.min_paragraphs == 0 {
            return Err(CurateError::InvalidRules("min_paragraphs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn discards_section(&self, heading: &str) -> bool {
        self.discard_section_titles.contains(&match_key(heading))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DropReason {
    /// Ranked title absent from the extracted articles.
    NotFound,
    EventsSection,
    Draft,
    Disambig,
    TooFewParagraphs,
    Unmapped,
}

impl DropReason {
    pub fn code(&self) -> &'static str {
        match self {
            DropReason::NotFound => "NOT_FOUND",
            DropReason::EventsSection => "EVENTS_SECTION",
            DropReason::Draft => "DRAFT",
            DropReason::Disambig => "DISAMBIG",
            DropReason::TooFewParagraphs => "TOO_FEW_PARAGRAPHS",
            DropReason::Unmapped => "UNMAPPED",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eligibility {
    Eligible,
    Ineligible(DropReason),
}

/// Article-level rejection: a section listed in `reject_if_section_present`
/// (the year pages), a draft category, or a disambiguation category.
pub fn article_eligible(article: &RawArticle, sections: &SectionNode, rules: &CurationRules) -> Eligibility {
    let mut has_events = false;
    sections.walk(&mut |n| {
        if n.level > 1 && rules.reject_if_section_present.contains(&match_key(&n.heading)) {
            has_events = true;
        }
    });
    if has_events {
        return Eligibility::Ineligible(DropReason::EventsSection);
    }
    let any = |patterns: &[CategoryPattern]| {
        article.categories.iter().any(|c| patterns.iter().any(|p| p.matches(c)))
    };
    if any(&rules.draft_categories) {
        return Eligibility::Ineligible(DropReason::Draft);
    }
    if any(&rules.disambiguation_categories) {
        return Eligibility::Ineligible(DropReason::Disambig);
    }
    Eligibility::Eligible
}

/// Remove every subtree whose heading is a discarded title.
pub fn filter_sections(root: &SectionNode, rules: &CurationRules) -> SectionNode {
    SectionNode {
        heading: root.heading.clone(),
        level: root.level,
        body: root.body.clone(),
        children: root
            .children
            .iter()
            .filter(|c| !rules.discards_section(&c.heading))
            .map(|c| filter_sections(c, rules))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub article_title: String,
    pub index: usize,
    pub text: String,
}

/// Stable identifier derived from the paragraph's title, position and text.
pub fn paragraph_id(article_title: &str, index: usize, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(article_title.as_bytes());
    h.update([0]);
    h.update(index.to_string().as_bytes());
    h.update([0]);
    h.update(text.as_bytes());
    hex::encode(&h.finalize()[..8])
}

/// Rendered prose blocks of the tree in document order, keeping those whose
/// length lies within the configured bounds (inclusive).
pub fn segment_paragraphs(article_title: &str, sections: &SectionNode, rules: &CurationRules) -> Vec<Paragraph> {
    let mut blocks = Vec::new();
    sections.walk(&mut |n| blocks.extend(prose_blocks(&render_plain(&n.body))));
    blocks
        .into_iter()
        .filter(|b| (rules.min_paragraph_chars..=rules.max_paragraph_chars).contains(&char_len(b)))
        .enumerate()
        .map(|(index, text)| Paragraph {
            id: paragraph_id(article_title, index, &text),
            article_title: article_title.to_string(),
            index,
            text,
        })
        .collect()
}

/// Manual title → category labels, loaded from a `title,category` CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMapping {
    entries: HashMap<String, Category>,
}

impl CategoryMapping {
    pub fn from_csv<R: Read>(input: R) -> Result<Self, CurateError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "title" || &headers[1] != "category" {
            return Err(CurateError::Mapping { line: 1, message: "header must be `title,category`".into() });
        }
        let mut entries = HashMap::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let (title, category) = (&record[0], &record[1]);
            let category = category
                .parse::<Category>()
                .map_err(|e| CurateError::Mapping { line, message: e.to_string() })?;
            entries.insert(title.to_string(), category);
        }
        Ok(CategoryMapping { entries })
    }

    pub fn insert(&mut self, title: impl Into<String>, category: Category) {
        self.entries.insert(title.into(), category);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn assign_category(title: &str, mapping: &CategoryMapping) -> Option<Category> {
    mapping.entries.get(title).copied()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedArticle {
    pub title: String,
    pub category: Category,
    pub paragraphs: Vec<Paragraph>,
}

impl CuratedArticle {
    /// A raw article whose body is exactly the kept paragraphs.
    pub fn to_raw(&self) -> RawArticle {
        RawArticle {
            title: self.title.clone(),
            namespace: 0,
            wikitext: self.paragraphs.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join("\n\n"),
            categories: BTreeSet::new(),
            outlinks: Vec::new(),
            redirect_target: None,
        }
    }
}

/// Counts per drop reason and per category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationReport {
    pub input_articles: usize,
    pub kept: usize,
    pub dropped: BTreeMap<DropReason, usize>,
    pub per_category: BTreeMap<Category, usize>,
    pub unmapped: Vec<String>,
}

impl Default for CurationReport {
    fn default() -> Self {
        CurationReport {
            input_articles: 0,
            kept: 0,
            dropped: BTreeMap::new(),
            per_category: Category::ALL.iter().map(|&c| (c, 0)).collect(),
            unmapped: Vec::new(),
        }
    }
}

impl CurationReport {
    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }

    pub fn dropped(&self, reason: DropReason) -> usize {
        self.dropped.get(&reason).copied().unwrap_or(0)
    }

    /// Category distribution as a header row, a count row and a total.
    pub fn category_table(&self) -> String {
        let mut header: Vec<String> = Category::ALL.iter().map(|c| c.to_string()).collect();
        header.push("Total".into());
        let mut counts: Vec<String> = Category::ALL.iter().map(|c| self.per_category[c].to_string()).collect();
        counts.push(self.kept.to_string());
        format!("{}\n{}\n", header.join("\t"), counts.join("\t"))
    }
}

fn curate_one(
    title: &str,
    article: Option<&RawArticle>,
    rules: &CurationRules,
    mapping: &CategoryMapping,
) -> Result<CuratedArticle, DropReason> {
    let article = article.ok_or(DropReason::NotFound)?;
    let sections = article.sections();
    if let Eligibility::Ineligible(reason) = article_eligible(article, &sections, rules) {
        return Err(reason);
    }
    let filtered = filter_sections(&sections, rules);
    let paragraphs = segment_paragraphs(&article.title, &filtered, rules);
    if paragraphs.len() < rules.min_paragraphs {
        return Err(DropReason::TooFewParagraphs);
    }
    let category = assign_category(title, mapping).ok_or(DropReason::Unmapped)?;
    Ok(CuratedArticle { title: article.title.clone(), category, paragraphs })
}

/// Curate the first `k` ranked titles. Output keeps ranked order.
pub fn curate(
    ranked_titles: &[String],
    articles: &HashMap<String, RawArticle>,
    rules: &CurationRules,
    mapping: &CategoryMapping,
    k: usize,
) -> (Vec<CuratedArticle>, CurationReport) {
    let selected = &ranked_titles[..k.min(ranked_titles.len())];
    let outcomes: Vec<Result<CuratedArticle, DropReason>> = selected
        .par_iter()
        .map(|title| curate_one(title, articles.get(title), rules, mapping))
        .collect();

    let mut report = CurationReport { input_articles: selected.len(), ..Default::default() };
    let mut kept = Vec::new();
    for (title, outcome) in selected.iter().zip(outcomes) {
        match outcome {
            Ok(article) => {
                *report.per_category.entry(article.category).or_default() += 1;
                kept.push(article);
            }
            Err(reason) => {
                if reason == DropReason::Unmapped {
                    report.unmapped.push(title.clone());
                }
                *report.dropped.entry(reason).or_default() += 1;
            }
        }
    }
    report.kept = kept.len();
    (kept, report)
}

/// The annotation-ready skeleton: one SQuAD article per curated article,
/// contexts filled, no questions yet.
pub fn curated_to_dataset(articles: &[CuratedArticle], provenance: Option<Provenance>) -> Dataset {
    Dataset {
        provenance,
        ..Dataset::new(
            articles
                .iter()
                .map(|a| ArticleEntry {
                    title: a.title.clone(),
                    category: Some(a.category),
                    paragraphs: a
                        .paragraphs
                        .iter()
                        .map(|p| ParagraphEntry { context: p.text.clone(), qas: Vec::new() })
                        .collect(),
                })
                .collect(),
        )
    }
}
