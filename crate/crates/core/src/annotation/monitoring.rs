//! Per-article progress of the collection effort.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::QuestionStatus;
use super::store::State;
use crate::category::Category;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitoringRow {
    pub article_title: String,
    pub category: Option<Category>,
    pub paragraphs_total: usize,
    pub paragraphs_annotated: usize,
    pub questions_total: usize,
    pub questions_complete: usize,
    pub flags: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTotals {
    pub category: Option<Category>,
    pub articles: usize,
    pub paragraphs_total: usize,
    pub paragraphs_annotated: usize,
    pub questions_total: usize,
    pub questions_complete: usize,
    pub flags: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitoringPage {
    pub rows: Vec<MonitoringRow>,
    /// Totals over every row matching the filter, not just this page.
    pub totals: Vec<CategoryTotals>,
    pub next_offset: Option<usize>,
}

/// One row per article, ordered by title.
pub fn monitoring_rows(s: &State, category: Option<Category>) -> Vec<MonitoringRow> {
    let mut rows: Vec<MonitoringRow> = s
        .articles
        .iter()
        .filter(|a| category.is_none() || a.category == category)
        .map(|a| {
            let mut row = MonitoringRow {
                article_title: a.title.clone(),
                category: a.category,
                paragraphs_total: a.paragraphs.len(),
                paragraphs_annotated: 0,
                questions_total: 0,
                questions_complete: 0,
                flags: 0,
            };
            for batch in a.paragraphs.iter().filter_map(|p| s.batches.get(&p.id)) {
                row.paragraphs_annotated += 1;
                for q in batch.question_ids.iter().map(|id| &s.questions[id]) {
                    row.questions_total += 1;
                    row.questions_complete += usize::from(q.state == QuestionStatus::Complete);
                    row.flags += q.flags.len();
                }
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| a.article_title.cmp(&b.article_title));
    rows
}

/// Sums per category, in category order; uncategorized articles come first.
pub fn category_totals(rows: &[MonitoringRow]) -> Vec<CategoryTotals> {
    let mut by: BTreeMap<Option<Category>, CategoryTotals> = BTreeMap::new();
    for r in rows {
        let t = by.entry(r.category).or_insert_with(|| CategoryTotals { category: r.category, ..Default::default() });
        t.articles += 1;
        t.paragraphs_total += r.paragraphs_total;
        t.paragraphs_annotated += r.paragraphs_annotated;
        t.questions_total += r.questions_total;
        t.questions_complete += r.questions_complete;
        t.flags += r.flags;
    }
    by.into_values().collect()
}
