//! Synthetic inputs shared by the benchmarks.

use annoforge_core::corpus::LinkGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random directed graph with about `avg_degree` out-links per node; one in
/// ten nodes is dangling.
pub fn random_graph(n: usize, avg_degree: usize, seed: u64) -> LinkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let titles = (0..n).map(|i| format!("Article {i:07}")).collect();
    let edges = (0..n)
        .map(|_| {
            if rng.gen_ratio(1, 10) {
                return Vec::new();
            }
            let d = rng.gen_range(1..=2 * avg_degree);
            (0..d).map(|_| rng.gen_range(0..n as u32)).collect()
        })
        .collect();
    LinkGraph::from_parts(titles, edges).expect("ids in range")
}

/// A pages-articles dump of `pages` pages, each with a few sections of
/// linked French prose.
pub fn synthetic_dump(pages: usize, seed: u64) -> String {
    const WORDS: &[&str] = &[
        "la", "ville", "est", "située", "sur", "les", "rives", "du", "fleuve", "et", "compte", "plusieurs",
        "monuments", "anciens", "dont", "une", "cathédrale", "gothique", "l'église", "célèbre",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xml = String::from("<mediawiki>\n");
    for i in 0..pages {
        let mut text = String::new();
        for s in 0..4 {
            text.push_str(&format!("== Section {s} ==\n"));
            for _ in 0..120 {
                if rng.gen_ratio(1, 15) {
                    text.push_str(&format!("[[Page {}|lien]] ", rng.gen_range(0..pages)));
                } else {
                    text.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
                    text.push(' ');
                }
            }
            text.push_str("\n\n");
        }
        text.push_str("[[Catégorie:Test]]");
        xml.push_str(&format!(
            "<page><title>Page {i}</title><ns>0</ns><revision><text xml:space=\"preserve\">{}</text></revision></page>\n",
            text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
        ));
    }
    xml.push_str("</mediawiki>\n");
    xml
}
