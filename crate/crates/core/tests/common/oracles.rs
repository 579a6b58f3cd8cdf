//! Independent reference computations and random inputs.

use annoforge_core::corpus::LinkGraph;
use annoforge_core::squad::{AnswerEntry, ArticleEntry, Dataset, ParagraphEntry, QaEntry};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

/// Random graph on 1..=`max_n` nodes; self-loops, duplicate links and
/// dangling nodes all occur.
pub fn random_graph(rng: &mut impl Rng, max_n: usize) -> LinkGraph {
    let n = rng.gen_range(1..=max_n);
    let density = rng.gen_range(0.0..0.6);
    let titles = (0..n).map(|i| format!("N{i}")).collect();
    let edges = (0..n)
        .map(|_| (0..n as u32).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    LinkGraph::from_parts(titles, edges).unwrap()
}

/// PageRank as the solution of `(I - d M) x = (1 - d) / n`, where `M` is the
/// column-stochastic link matrix with dangling columns spread uniformly.
pub fn dense_pagerank(graph: &LinkGraph, d: f64) -> Vec<f64> {
    let n = graph.node_count();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for u in 0..n {
        let out = graph.out_edges(u as u32);
        if out.is_empty() {
            for v in 0..n {
                m[(v, u)] = 1.0 / n as f64;
            }
        } else {
            for &v in out {
                m[(v as usize, u)] += 1.0 / out.len() as f64;
            }
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - m * d;
    let b = DVector::<f64>::from_element(n, (1.0 - d) / n as f64);
    a.lu().solve(&b).expect("I - dM is nonsingular for d < 1").iter().copied().collect()
}

const WORDS: &[&str] = &[
    "Paris", "est", "la", "capitale", "l'île", "Cité", "fièvre", "jaune", "1802", "Saint-Domingue", "😀", "œuvre",
    "«", "»", "Moscou", ",", ".", "naïve",
];

fn context() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..40).prop_map(|w| w.join(" "))
}

/// Random valid dataset: answers are character spans of their context and
/// ids and titles are unique.
pub fn dataset() -> impl Strategy<Value = Dataset> {
    let paragraph = context().prop_flat_map(|ctx| {
        let n = ctx.chars().count();
        let span = (0..n).prop_flat_map(move |s| (Just(s), 1..=(n - s).min(30)));
        let qa = ("[A-Za-zéè ?']{1,60}", prop::collection::vec(span, 1..4));
        (Just(ctx), prop::collection::vec(qa, 0..4))
    });
    let article = (prop::option::of(prop::sample::select(&annoforge_core::category::Category::ALL[..])), prop::collection::vec(paragraph, 1..4));
    prop::collection::vec(article, 0..5).prop_map(|articles| {
        let mut next_id = 0;
        let data = articles
            .into_iter()
            .enumerate()
            .map(|(ai, (category, paragraphs))| ArticleEntry {
                title: format!("Article {ai}"),
                category,
                paragraphs: paragraphs
                    .into_iter()
                    .map(|(ctx, qas)| {
                        let chars: Vec<char> = ctx.chars().collect();
                        let qas = qas
                            .into_iter()
                            .map(|(question, spans)| {
                                next_id += 1;
                                QaEntry {
                                    id: format!("q{next_id}"),
                                    question,
                                    answers: spans
                                        .into_iter()
                                        .map(|(s, len)| AnswerEntry {
                                            text: chars[s..s + len].iter().collect(),
                                            answer_start: s,
                                        })
                                        .collect(),
                                }
                            })
                            .collect();
                        ParagraphEntry { context: ctx, qas }
                    })
                    .collect(),
            })
            .collect();
        Dataset::new(data)
    })
}
