mod common;

use std::collections::{BTreeSet, HashMap};

use annoforge_core::category::Category;
use annoforge_core::corpus::RawArticle;
use annoforge_core::curate::*;
use annoforge_core::text::char_len;
use common::curation_fixture::*;

#[test]
fn twelve_article_fixture_keeps_and_drops_exactly() {
    let f = fixture();
    assert_eq!(f.ranked.len(), 12);
    let (kept, report) = curate(&f.ranked, &f.articles, &CurationRules::default(), &f.mapping, 100);

    let titles: Vec<&str> = kept.iter().map(|a| a.title.as_str()).collect();
    assert_eq!(titles, ["Rouen", "Nantes", "Reims", "Bornes", "Dijon"]);
    assert_eq!(report.input_articles, 12);
    assert_eq!(report.kept, 5);
    use DropReason::*;
    let dropped: Vec<(DropReason, usize)> = report.dropped.iter().map(|(r, c)| (*r, *c)).collect();
    assert_eq!(
        dropped,
        [(NotFound, 1), (EventsSection, 1), (Draft, 1), (Disambig, 1), (TooFewParagraphs, 2), (Unmapped, 1)]
    );
    assert_eq!(report.unmapped, ["Sans catégorie"]);
    assert_eq!(report.input_articles, report.kept + report.dropped_total());
    assert_eq!(report.per_category[&Category::Arts], 2);
    assert_eq!(report.per_category[&Category::History], 1);
    assert_eq!(report.per_category[&Category::Sport], 1);
    assert_eq!(report.per_category[&Category::Sciences], 1);
    assert_eq!(report.per_category[&Category::Geography], 0);
    assert!(report.category_table().ends_with("2\t0\t1\t0\t1\t0\t1\t5\n"), "{}", report.category_table());
}

#[test]
fn discarded_sections_leave_exactly_the_body_paragraphs() {
    let f = fixture();
    let (kept, _) = curate(&f.ranked, &f.articles, &CurationRules::default(), &f.mapping, 100);
    for a in kept.iter().filter(|a| a.title != "Bornes") {
        assert_eq!(a.paragraphs.len(), 5, "{}", a.title);
        let expected = good(&a.title.to_lowercase(), 5);
        let got: Vec<&str> = a.paragraphs.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(got, expected.iter().map(String::as_str).collect::<Vec<_>>(), "{}", a.title);
    }
}

#[test]
fn paragraph_bounds_are_inclusive() {
    let f = fixture();
    let (kept, _) = curate(&f.ranked, &f.articles, &CurationRules::default(), &f.mapping, 100);
    let bornes = kept.iter().find(|a| a.title == "Bornes").unwrap();
    let lens: Vec<usize> = bornes.paragraphs.iter().map(|p| char_len(&p.text)).collect();
    assert_eq!(lens, [500, 1000, 640, 820, 510]);
    let idx: Vec<usize> = bornes.paragraphs.iter().map(|p| p.index).collect();
    assert_eq!(idx, [0, 1, 2, 3, 4]);
    for p in &bornes.paragraphs {
        assert_eq!(p.id, paragraph_id("Bornes", p.index, &p.text));
    }
}

#[test]
fn every_kept_article_satisfies_the_output_invariants() {
    let f = fixture();
    let rules = CurationRules::default();
    let (kept, _) = curate(&f.ranked, &f.articles, &rules, &f.mapping, 100);
    let ids: BTreeSet<&str> = kept.iter().flat_map(|a| a.paragraphs.iter().map(|p| p.id.as_str())).collect();
    assert_eq!(ids.len(), kept.iter().map(|a| a.paragraphs.len()).sum::<usize>());
    for a in &kept {
        assert!(a.paragraphs.len() >= rules.min_paragraphs);
        for (i, p) in a.paragraphs.iter().enumerate() {
            assert_eq!(p.index, i);
            assert!((500..=1000).contains(&char_len(&p.text)));
            assert!(!p.text.contains("=="));
        }
    }
}

#[test]
fn top_k_restriction_applies_first() {
    let f = fixture();
    let (kept, report) = curate(&f.ranked, &f.articles, &CurationRules::default(), &f.mapping, 3);
    assert_eq!(report.input_articles, 3);
    assert_eq!(kept.iter().map(|a| a.title.as_str()).collect::<Vec<_>>(), ["Rouen", "Nantes"]);
    assert_eq!(report.dropped(DropReason::TooFewParagraphs), 1);
}

#[test]
fn curation_is_idempotent() {
    let f = fixture();
    let rules = CurationRules::default();
    let (first, _) = curate(&f.ranked, &f.articles, &rules, &f.mapping, 100);
    let again: HashMap<String, RawArticle> = first.iter().map(|a| (a.title.clone(), a.to_raw())).collect();
    let titles: Vec<String> = first.iter().map(|a| a.title.clone()).collect();
    let (second, report) = curate(&titles, &again, &rules, &f.mapping, 100);
    assert_eq!(second, first);
    assert_eq!(report.dropped_total(), 0);
}

#[test]
fn empty_input_gives_empty_report() {
    let (kept, report) =
        curate(&[], &HashMap::new(), &CurationRules::default(), &CategoryMapping::default(), 25_000);
    assert!(kept.is_empty());
    assert_eq!((report.input_articles, report.kept, report.dropped_total()), (0, 0, 0));
}

#[test]
fn mapping_csv_covers_each_category() {
    let csv = "title,category\nA,Arts\nB,Geography\nC,History\nD,Religion\nE,Sciences\nF,SocietyMisc\nG,Sport\n";
    let m = CategoryMapping::from_csv(csv.as_bytes()).unwrap();
    for (t, c) in ["A", "B", "C", "D", "E", "F", "G"].iter().zip(Category::ALL) {
        assert_eq!(assign_category(t, &m), Some(c));
    }
    assert_eq!(assign_category("Z", &m), None);
    assert!(CategoryMapping::from_csv("titre,categorie\nA,Arts\n".as_bytes()).is_err());
}
