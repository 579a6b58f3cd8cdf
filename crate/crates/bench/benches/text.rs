use std::collections::BTreeMap;

use annoforge_core::metrics::{edit_distance, evaluate_predictions, token_f1};
use annoforge_core::squad::{AnswerEntry, ArticleEntry, Dataset, ParagraphEntry, QaEntry};
use annoforge_core::text::word_spans;
use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};

const PARAGRAPH: &str = "Le général Leclerc meurt de la fièvre jaune en 1802 à Saint-Domingue. L’expédition, \
    décidée par Bonaparte, devait rétablir l'autorité de la France sur l'île ; elle se solde par un désastre \
    et conduit à l'indépendance d'Haïti deux ans plus tard.";

fn words(c: &mut Criterion) {
    let text = PARAGRAPH.repeat(4);
    let mut group = c.benchmark_group("text");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.bench_function("word_spans", |b| b.iter(|| word_spans(black_box(&text))));
    group.finish();
}

fn scoring(c: &mut Criterion) {
    c.bench_function("token_f1", |b| {
        b.iter(|| token_f1(black_box("la fièvre jaune en 1802"), black_box("de la fièvre jaune")))
    });
    let qas: Vec<QaEntry> = (0..1000)
        .map(|i| QaEntry {
            id: format!("q{i}"),
            question: "De quoi meurt Leclerc ?".into(),
            answers: vec![AnswerEntry { text: "la fièvre jaune".into(), answer_start: 30 }],
        })
        .collect();
    let gold = Dataset::new(vec![ArticleEntry {
        title: "Leclerc".into(),
        category: None,
        paragraphs: vec![ParagraphEntry { context: PARAGRAPH.into(), qas }],
    }]);
    let preds: BTreeMap<String, String> = (0..1000).map(|i| (format!("q{i}"), "fièvre jaune en 1802".into())).collect();
    c.bench_function("evaluate_1000", |b| b.iter(|| evaluate_predictions(&gold, &preds)));

    let a: Vec<u8> = (0..40).map(|i| (i * 7 % 11) as u8).collect();
    let z: Vec<u8> = (0..40).map(|i| (i * 5 % 13) as u8).collect();
    c.bench_function("edit_distance_40", |b| b.iter(|| edit_distance(black_box(&a), black_box(&z))));
}

criterion_group!(benches, words, scoring);
criterion_main!(benches);
