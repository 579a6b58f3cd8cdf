//! Ten questions over three short contexts with hand-written parses, and the
//! values computed for them by hand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use annoforge_core::metrics::{parse_conllu, ParsePair, SkipReason};
use annoforge_core::squad::{import_squad, Dataset};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/metrics").join(name)
}

pub fn fixture() -> (Dataset, BTreeMap<String, ParsePair>) {
    let (ds, report) = import_squad(&std::fs::read(data("dataset.json")).unwrap()).unwrap();
    assert!(report.is_clean(), "{report:?}");
    let parses = parse_conllu(&std::fs::read_to_string(data("parses.conllu")).unwrap()).unwrap();
    (ds, parses)
}

/// Hand-computed per question: (shared, |C(q)|), lexical bin, divergence or skip.
pub fn expected() -> Vec<(&'static str, (usize, usize), usize, Result<usize, SkipReason>)> {
    vec![
        ("leclerc-1", (3, 3), 0, Ok(1)),
        ("leclerc-2", (2, 2), 0, Ok(1)),
        ("leclerc-3", (2, 3), 3, Ok(2)),
        ("seine-1", (2, 3), 3, Ok(2)),
        ("seine-2", (0, 3), 9, Err(SkipReason::NoAnchor)),
        ("seine-3", (1, 3), 6, Ok(2)),
        ("coupe-1", (1, 2), 5, Ok(2)),
        ("coupe-2", (3, 3), 0, Err(SkipReason::MissingParse)),
        ("coupe-3", (2, 4), 5, Err(SkipReason::NoWhWord)),
        ("coupe-4", (1, 4), 7, Ok(3)),
    ]
}
