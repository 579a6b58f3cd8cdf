mod common;

use std::collections::BTreeMap;

use annoforge_core::category::Category;
use annoforge_core::metrics::*;
use annoforge_core::squad::{AnswerEntry, ArticleEntry, Dataset, ParagraphEntry, QaEntry};
use common::metrics_fixture::*;
use proptest::prelude::*;

#[test]
fn fixture_samples_match_hand_computed_values() {
    let (ds, parses) = fixture();
    let sw = Stopwords::french();
    let report = dataset_report(&ds, &parses, &sw);
    assert_eq!(report.sample_count, 10);
    for (id, (shared, total), bin, div) in expected() {
        let (_, p, qa) = ds.qas().find(|(_, _, q)| q.id == id).unwrap();
        let a = &qa.answers[0];
        let (sentence, _) = answer_sentence(&p.context, a.answer_start, a.text.chars().count()).unwrap();
        assert_eq!(content_overlap(&qa.question, &sentence, &sw), (shared, total), "{id}");
        assert_eq!(variation_bin(shared, total, LEXICAL_BINS), bin, "{id}");
        let sample = report.samples.iter().find(|s| s.qa_id == id).unwrap();
        let lv = sample.lexical_variation.unwrap();
        assert!((lv - (total - shared) as f64 / total as f64).abs() < 1e-12, "{id}: {lv}");
        match div {
            Ok(d) => assert_eq!(sample.syntactic_divergence, Some(d), "{id}"),
            Err(reason) => {
                assert_eq!(sample.syntactic_divergence, None, "{id}");
                assert_eq!(sample.divergence_skip, Some(reason), "{id}");
            }
        }
    }
}

#[test]
fn fixture_paths_are_the_hand_drawn_ones() {
    let (_, parses) = fixture();
    let sw = Stopwords::french();
    let pair = &parses["coupe-4"];
    let (q, s) = (pair.question.as_ref().unwrap(), pair.sentence.as_ref().unwrap());
    // "la France" in "La coupe est remportée par la France."
    let d = syntactic_divergence(q, s, annoforge_core::text::CharSpan::new(27, 36), &sw).unwrap();
    assert_eq!(d.question_path, [PathStep::up("det"), PathStep::up("nsubj"), PathStep::down("obl")]);
    assert_eq!(d.sentence_path, [PathStep::up("nsubj:pass"), PathStep::down("obl:agent")]);
    assert_eq!(d.distance, 3);
}

#[test]
fn fixture_histograms_have_exact_counts() {
    let (ds, parses) = fixture();
    let report = dataset_report(&ds, &parses, &Stopwords::french());
    let lex: Vec<usize> = report.lexical_variation.bins.iter().map(|b| b.count).collect();
    assert_eq!(lex, [3, 0, 0, 2, 0, 2, 1, 1, 0, 1]);
    assert!(report.lexical_variation.skipped.is_empty());
    let div: Vec<(usize, usize)> = report.syntactic_divergence.counts.iter().map(|v| (v.value, v.count)).collect();
    assert_eq!(div, [(0, 0), (1, 2), (2, 4), (3, 1)]);
    let skipped = &report.syntactic_divergence.skipped;
    assert_eq!(skipped.len(), 3);
    assert!(skipped.values().all(|&c| c == 1));

    let history = &report.per_category["History"];
    assert_eq!((history.sample_count, history.divergence_counts.clone()), (3, vec![0, 2, 1, 0]));
    let sport = &report.per_category["Sport"];
    assert_eq!((sport.sample_count, sport.divergence_skipped), (4, 2));
    assert_eq!(sport.lexical_bins, [1, 0, 0, 0, 0, 2, 0, 1, 0, 0]);
}

#[test]
fn per_category_breakdown_sums_to_totals() {
    let (ds, parses) = fixture();
    let report = dataset_report(&ds, &parses, &Stopwords::french());
    let n: usize = report.per_category.values().map(|c| c.sample_count).sum();
    assert_eq!(n, report.sample_count);
    for (i, bin) in report.lexical_variation.bins.iter().enumerate() {
        assert_eq!(report.per_category.values().map(|c| c.lexical_bins[i]).sum::<usize>(), bin.count);
    }
    for v in &report.syntactic_divergence.counts {
        assert_eq!(report.per_category.values().map(|c| c.divergence_counts[v.value]).sum::<usize>(), v.count);
    }
}

#[test]
fn mismatched_sentence_parse_is_skipped() {
    let (ds, mut parses) = fixture();
    let pair = parses.get_mut("leclerc-1").unwrap();
    pair.sentence.as_mut().unwrap().text.push_str(" Fin.");
    let report = dataset_report(&ds, &parses, &Stopwords::french());
    let s = report.samples.iter().find(|s| s.qa_id == "leclerc-1").unwrap();
    assert_eq!(s.divergence_skip, Some(SkipReason::ParseMismatch));
}

#[test]
fn report_csv_lists_every_bin() {
    let (ds, parses) = fixture();
    let csv = dataset_report(&ds, &parses, &Stopwords::french()).to_csv();
    assert_eq!(csv.lines().count(), 1 + LEXICAL_BINS + 4);
    assert!(csv.contains("lexical_variation,0,0.0,0.1,3\n"));
    assert!(csv.contains("syntactic_divergence,2,2,2,4\n"));
}

#[test]
fn answer_sentence_examples() {
    let ctx = "Le général Leclerc meurt de la fièvre jaune.";
    assert_eq!(answer_sentence(ctx, 28, 15).unwrap().0, ctx);
    let two = "Paris est une ville. Lyon est une autre ville.";
    assert_eq!(answer_sentence(two, 21, 4).unwrap().0, "Lyon est une autre ville.");
    assert!(answer_sentence(two, 44, 5).is_err());
}

#[test]
fn lexical_variation_examples() {
    let sw = Stopwords::french();
    assert_eq!(lexical_variation("Où vit Paul ?", "Paul vit à Lyon.", &sw), 0.0);
    assert_eq!(lexical_variation("Quel fleuve ?", "Paul vit à Lyon.", &sw), 1.0);
    let q = "Combien de Polonais vivent sur Terre?";
    let s = "La majorité des Polonais habite en Pologne.";
    assert_eq!(content_overlap(q, s, &sw), (1, 3));
    assert!((lexical_variation(q, s, &sw) - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(lexical_variation("Où est-il ?", "Rien.", &sw), 0.0);
}

/// Plain recursive Levenshtein, exponential but obviously correct.
fn naive_distance(a: &[PathStep], b: &[PathStep]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = naive_distance(ra, rb) + usize::from(x != y);
            sub.min(naive_distance(ra, b) + 1).min(naive_distance(a, rb) + 1)
        }
    }
}

fn path() -> impl Strategy<Value = Vec<PathStep>> {
    let step = (prop::sample::select(vec!["nsubj", "obj", "obl", "det", "nmod", "root"]), any::<bool>())
        .prop_map(|(l, up)| if up { PathStep::up(l) } else { PathStep::down(l) });
    prop::collection::vec(step, 0..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn edit_distance_matches_brute_force(a in path(), b in path(), c in path()) {
        prop_assert_eq!(edit_distance(&a, &a), 0);
        let ab = edit_distance(&a, &b);
        prop_assert_eq!(ab, naive_distance(&a, &b));
        prop_assert_eq!(ab, edit_distance(&b, &a));
        prop_assert!(ab <= edit_distance(&a, &c) + edit_distance(&c, &b));
    }
}

#[test]
fn edit_distance_documented_cases() {
    let empty: [PathStep; 0] = [];
    let two = [PathStep::up("nsubj"), PathStep::down("obl")];
    assert_eq!(edit_distance(&empty, &two), 2);
    let a = [PathStep::up("nsubj"), PathStep::down("root")];
    let b = [PathStep::up("nsubj"), PathStep::down("obl"), PathStep::down("nmod")];
    assert_eq!(edit_distance(&a, &b), 2);
}

#[test]
fn normalization_examples() {
    assert_eq!(normalize_text_fr("La fièvre jaune."), "fièvre jaune");
    assert_eq!(normalize_text_fr("l'île"), "île");
    assert_eq!(normalize_text_fr("Un score d'1-1"), "score 1-1");
}

#[test]
fn f1_partial_overlap_cases() {
    let cases: [(&str, &str, f64); 12] = [
        ("fièvre jaune", "la fièvre jaune", 1.0),
        ("la fièvre", "la fièvre jaune", 2.0 / 3.0),
        ("en 1802 à Saint-Domingue", "1802", 0.4),
        ("deux millions d'habitants", "deux millions", 0.8),
        ("Paris", "Lyon", 0.0),
        ("le chat chat", "chat", 2.0 / 3.0),
        ("chat chien", "chien chat oiseau", 0.8),
        ("Un score d'1-1", "1-1", 2.0 / 3.0),
        ("a b c d", "c d e f g h", 0.4),
        ("L'île de Ré", "île", 2.0 / 3.0),
        ("Napoléon Bonaparte, empereur.", "l'empereur Napoléon", 0.8),
        ("x y z", "x", 0.5),
    ];
    for (pred, gold, f1) in cases {
        assert!((token_f1(pred, gold) - f1).abs() < 1e-9, "{pred} / {gold}: {}", token_f1(pred, gold));
    }
}

fn qa(id: &str, answers: &[&str], context: &str) -> QaEntry {
    QaEntry {
        id: id.into(),
        question: "Quoi ?".into(),
        answers: answers
            .iter()
            .map(|a| {
                let byte = context.find(a).unwrap();
                AnswerEntry { text: a.to_string(), answer_start: context[..byte].chars().count() }
            })
            .collect(),
    }
}

#[test]
fn evaluator_scores_examples() {
    let ctx = "Le général Leclerc meurt de la fièvre jaune en 1802.";
    let ds = Dataset::new(vec![ArticleEntry {
        title: "Leclerc".into(),
        category: None,
        paragraphs: vec![ParagraphEntry {
            context: ctx.into(),
            qas: vec![qa("a", &["la fièvre jaune"], ctx), qa("b", &["1802", "en 1802"], ctx), qa("c", &["Leclerc"], ctx)],
        }],
    }]);
    let preds: BTreeMap<String, String> =
        [("a", "fièvre jaune"), ("b", "1802 à"), ("z", "x")].into_iter().map(|(k, v)| (k.into(), v.into())).collect();
    let s = evaluate_predictions(&ds, &preds);
    assert_eq!(s.total, 3);
    assert_eq!(s.missing, ["c"]);
    assert_eq!(s.unknown, ["z"]);
    assert_eq!(s.per_question[0].exact_match, 100.0);
    assert_eq!(s.per_question[0].f1, 100.0);
    // "1802 à" vs "1802": P = 1/2, R = 1; vs "en 1802": P = 1/2, R = 1/2.
    assert!((s.per_question[1].f1 - 200.0 / 3.0).abs() < 1e-9);
    assert!((s.exact_match - 100.0 / 3.0).abs() < 1e-9);
    assert!((s.f1 - (100.0 + 200.0 / 3.0) / 3.0).abs() < 1e-9);

    let disjoint: BTreeMap<String, String> = [("a".to_string(), "Napoléon".to_string())].into();
    let s = evaluate_predictions(&ds, &disjoint);
    assert_eq!((s.per_question[0].exact_match, s.per_question[0].f1), (0.0, 0.0));
}

const VOCAB: &[&str] = &["Paris", "la", "fièvre", "jaune", "1802", "l'île", "de", "Saint-Domingue", "roi", "Lyon", "un"];

fn random_dataset() -> impl Strategy<Value = Dataset> {
    let context = prop::collection::vec(prop::sample::select(VOCAB), 1..20).prop_map(|w| w.join(" "));
    let para = context.prop_flat_map(|ctx| {
        let words: Vec<(usize, usize)> = annoforge_core::text::word_spans(&ctx).iter().map(|s| (s.start, s.end)).collect();
        let n = words.len();
        let span = (0..n, 0..n).prop_map(move |(i, j)| (words[i.min(j)].0, words[i.max(j)].1));
        (Just(ctx), prop::collection::vec(prop::collection::vec(span, 1..4), 1..4))
    });
    prop::collection::vec(para, 1..4).prop_map(|paras| {
        let mut k = 0;
        let paragraphs = paras
            .into_iter()
            .map(|(ctx, qas)| {
                let qas = qas
                    .into_iter()
                    .map(|spans| {
                        k += 1;
                        QaEntry {
                            id: format!("q{k}"),
                            question: "Quoi ?".into(),
                            answers: spans
                                .into_iter()
                                .map(|(s, e)| AnswerEntry {
                                    text: ctx.chars().skip(s).take(e - s).collect(),
                                    answer_start: s,
                                })
                                .collect(),
                        }
                    })
                    .collect();
                ParagraphEntry { context: ctx, qas }
            })
            .collect();
        Dataset::new(vec![ArticleEntry { title: "T".into(), category: Some(Category::Arts), paragraphs }])
    })
}

proptest! {
    #[test]
    fn gold_as_predictions_scores_full_marks(ds in random_dataset()) {
        let preds: BTreeMap<String, String> = ds.qas().map(|(_, _, q)| (q.id.clone(), q.answers[0].text.clone())).collect();
        let s = evaluate_predictions(&ds, &preds);
        prop_assert_eq!((s.exact_match, s.f1), (100.0, 100.0));
    }

    #[test]
    fn extra_gold_answer_never_lowers_a_score(
        pred in prop::collection::vec(prop::sample::select(VOCAB), 0..5),
        golds in prop::collection::vec(prop::collection::vec(prop::sample::select(VOCAB), 1..5), 1..4),
        extra in prop::collection::vec(prop::sample::select(VOCAB), 1..5),
    ) {
        let pred = pred.join(" ");
        let mut texts: Vec<String> = golds.iter().map(|g| g.join(" ")).collect();
        let build = |texts: &[String]| {
            let ctx = texts.join(" ");
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            Dataset::new(vec![ArticleEntry {
                title: "T".into(),
                category: None,
                paragraphs: vec![ParagraphEntry { qas: vec![qa("q", &refs, &ctx)], context: ctx }],
            }])
        };
        let preds: BTreeMap<String, String> = [("q".to_string(), pred)].into();
        let before = evaluate_predictions(&build(&texts), &preds);
        texts.push(extra.join(" "));
        let after = evaluate_predictions(&build(&texts), &preds);
        prop_assert!(after.exact_match >= before.exact_match);
        prop_assert!(after.f1 >= before.f1);
    }
}

#[test]
fn assessment_sample_is_frozen_for_seed_7() {
    let (ds, _) = fixture();
    let (samples, warnings) = sample_for_assessment(&ds, 7);
    assert!(warnings.is_empty());
    let golden: Vec<AssessmentSample> =
        serde_json::from_str(&std::fs::read_to_string(data("assessment_seed7.json")).unwrap()).unwrap();
    assert_eq!(samples, golden);
    assert_eq!(sample_for_assessment(&ds, 7).0, samples);
}

#[test]
fn one_triplet_per_article_over_191_articles() {
    let ctx = "Paris est la capitale de la France.";
    let articles: Vec<ArticleEntry> = (0..191)
        .map(|i| ArticleEntry {
            title: format!("Article {i}"),
            category: Some(Category::ALL[i % 7]),
            paragraphs: vec![ParagraphEntry {
                context: ctx.into(),
                qas: (0..1 + i % 4).map(|k| qa(&format!("a{i}-q{k}"), &["Paris"], ctx)).collect(),
            }],
        })
        .collect();
    let mut ds = Dataset::new(articles);
    ds.data.push(ArticleEntry { title: "Vide".into(), category: None, paragraphs: vec![] });
    let (samples, warnings) = sample_for_assessment(&ds, 3);
    assert_eq!(samples.len(), 191);
    assert_eq!(warnings.len(), 1);
    assert!(samples.iter().all(|s| s.qa_id.starts_with(&format!("a{}-", &s.article_title[8..]))));
}

proptest! {
    #[test]
    fn report_bins_and_skips_conserve_question_count(ds in random_dataset(), drop in any::<bool>()) {
        let (fixture_ds, parses) = fixture();
        let mut ds = ds;
        if !drop {
            ds.data.extend(fixture_ds.data);
        }
        let r = dataset_report(&ds, &parses, &Stopwords::french());
        let n = ds.qa_count();
        prop_assert_eq!(r.sample_count, n);
        let lex = r.lexical_variation.evaluated + r.lexical_variation.skipped.values().sum::<usize>();
        let div = r.syntactic_divergence.evaluated + r.syntactic_divergence.skipped.values().sum::<usize>();
        prop_assert_eq!((lex, div), (n, n));
        prop_assert_eq!(r.lexical_variation.bins.iter().map(|b| b.count).sum::<usize>(), r.lexical_variation.evaluated);
    }
}
