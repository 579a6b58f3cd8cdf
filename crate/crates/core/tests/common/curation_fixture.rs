//! Twelve ranked titles (eleven articles plus one missing) that exercise
//! every curation rule once.

use std::collections::HashMap;

use annoforge_core::category::Category;
use annoforge_core::corpus::{extract_internal_links, RawArticle};
use annoforge_core::curate::CategoryMapping;
use annoforge_core::text::char_len;

pub const WORDS: &[&str] = &[
    "la", "ville", "est", "située", "sur", "les", "rives", "du", "fleuve", "et", "compte", "plusieurs", "monuments",
    "anciens", "dont", "une", "cathédrale", "gothique", "célèbre", "pour", "ses", "vitraux",
];

/// Plain prose of exactly `n` characters, opened by `tag` so blocks differ.
pub fn block(tag: &str, n: usize) -> String {
    let mut s = tag.to_string();
    let mut i = tag.len();
    while char_len(&s) < n {
        s.push(' ');
        s.push_str(WORDS[i % WORDS.len()]);
        i += 7;
    }
    let mut s: String = s.chars().take(n).collect();
    if s.ends_with(' ') {
        s.pop();
        s.push('e');
    }
    assert_eq!(char_len(&s), n);
    s
}

pub fn good(tag: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| block(&format!("{tag}{i}"), 600 + 37 * i)).collect()
}

pub fn article(title: &str, wikitext: String) -> RawArticle {
    let links = extract_internal_links(&wikitext);
    RawArticle {
        title: title.into(),
        namespace: 0,
        wikitext,
        categories: links.categories,
        outlinks: links.outlinks,
        redirect_target: None,
    }
}

pub fn body(paragraphs: &[String]) -> String {
    paragraphs.join("\n\n")
}

pub struct Fixture {
    pub ranked: Vec<String>,
    pub articles: HashMap<String, RawArticle>,
    pub mapping: CategoryMapping,
}

pub fn fixture() -> Fixture {
    let mut list = Vec::new();
    list.push(article("Rouen", format!("{}\n== Voir aussi ==\n{}", body(&good("rouen", 5)), block("rouenva", 700))));
    list.push(article(
        "Lille",
        format!("{}\n== Articles connexes ==\n{}", body(&good("lille", 4)), block("lilleac", 700)),
    ));
    list.push(article(
        "Nantes",
        format!(
            "{}\n== Liens externes ==\nliste\n=== Sites officiels ===\n{}",
            body(&good("nantes", 5)),
            block("nanteslx", 700)
        ),
    ));
    list.push(article(
        "Reims",
        format!("{}\n==  notes et références  ==\n{}", body(&good("reims", 5)), block("reimsnr", 700)),
    ));
    list.push(article("1802", format!("{}\n== Événements ==\n{}", body(&good("annee", 5)), block("annee-ev", 700))));
    list.push(article(
        "Brest",
        format!("{}\n[[Catégorie:Wikipédia:ébauche géographie]]", body(&good("brest", 5))),
    ));
    list.push(article("Mercure", format!("{}\n[[Catégorie:Homonymie]]", body(&good("mercure", 5)))));
    list.push(article(
        "Bornes",
        body(&[
            block("b499", 499),
            block("b500", 500),
            block("b1000", 1000),
            block("b1001", 1001),
            block("bx", 640),
            block("by", 820),
            block("bz", 510),
        ]),
    ));
    list.push(article("Quatre", body(&good("quatre", 4))));
    list.push(article("Sans catégorie", body(&good("sanscat", 5))));
    list.push(article(
        "Dijon",
        format!("{}\n== Articles connexe ==\n{}", body(&good("dijon", 5)), block("dijonac", 700)),
    ));

    let mut ranked: Vec<String> = list.iter().map(|a| a.title.clone()).collect();
    ranked.insert(5, "Absent".into());
    let mut mapping = CategoryMapping::default();
    for (t, c) in [
        ("Rouen", Category::Arts),
        ("Lille", Category::Geography),
        ("Nantes", Category::Arts),
        ("Reims", Category::History),
        ("1802", Category::History),
        ("Brest", Category::Geography),
        ("Mercure", Category::Sciences),
        ("Bornes", Category::Sport),
        ("Quatre", Category::Religion),
        ("Dijon", Category::Sciences),
        ("Absent", Category::Arts),
    ] {
        mapping.insert(t, c);
    }
    let articles = list.into_iter().map(|a| (a.title.clone(), a)).collect();
    Fixture { ranked, articles, mapping }
}
