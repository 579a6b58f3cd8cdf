use std::path::{Path, PathBuf};

use annoforge_core::config::KeyValueConfig;
use annoforge_core::corpus::DumpOptions;
use annoforge_core::curate::{CurationRules, DropReason};
use annoforge_core::pipeline::*;
use annoforge_core::provenance::{sha256_file, Provenance};
use annoforge_core::rank::RankConfig;
use annoforge_core::squad::import_squad;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/pipeline").join(name)
}

fn frozen_provenance(dump: &Path) -> Provenance {
    Provenance {
        dump_file: Some("mini_dump_fr.xml".into()),
        dump_sha256: Some(sha256_file(dump).unwrap()),
        tool_version: "annoforge 0.1.0".into(),
        timestamp: "2020-01-01T00:00:00Z".into(),
    }
}

fn config(workdir: &Path) -> PipelineConfig {
    let dump = data("mini_dump_fr.xml");
    PipelineConfig {
        provenance: frozen_provenance(&dump),
        dump_path: dump,
        workdir: workdir.to_path_buf(),
        mapping_path: data("mapping.csv"),
        rules: CurationRules::from_config(&KeyValueConfig::load(data("rules.conf")).unwrap()).unwrap(),
        rank: RankConfig { k: 16, ..RankConfig::default() },
        dump_options: DumpOptions { accept_compressed: true },
    }
}

#[test]
fn mini_dump_reproduces_the_golden_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_pipeline(&config(dir.path())).unwrap();
    let got = std::fs::read(&summary.corpus_path).unwrap();
    let golden = std::fs::read(data("corpus.golden.json")).unwrap();
    assert!(got == golden, "corpus differs from golden:\n{}", String::from_utf8_lossy(&got));
}

#[test]
fn mini_dump_keeps_three_articles() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_pipeline(&config(dir.path())).unwrap();
    assert_eq!(summary.ingest.pages, 20);
    assert_eq!((summary.ingest.articles, summary.ingest.redirects, summary.ingest.other_namespaces), (16, 2, 2));
    assert_eq!(summary.ingest.graph_nodes, 16);
    assert!(summary.rank.converged);
    assert_eq!(summary.rank.selected, 16);

    let report = &summary.curation;
    assert_eq!(report.kept, 3);
    assert_eq!(report.input_articles, report.kept + report.dropped_total());
    assert_eq!(report.dropped(DropReason::EventsSection), 1);
    assert_eq!(report.dropped(DropReason::Draft), 1);
    assert_eq!(report.dropped(DropReason::Disambig), 1);
    assert_eq!(report.dropped(DropReason::TooFewParagraphs), 10);

    let (ds, issues) = import_squad(&std::fs::read(&summary.corpus_path).unwrap()).unwrap();
    assert!(issues.is_clean());
    let mut titles: Vec<&str> = ds.data.iter().map(|a| a.title.as_str()).collect();
    titles.sort_unstable();
    assert_eq!(titles, ["Paris", "Seine", "Victor Hugo"]);
    for a in &ds.data {
        assert_eq!(a.paragraphs.len(), 5, "{}", a.title);
        for p in &a.paragraphs {
            assert!(!p.context.contains("[[") && !p.context.contains("'''") && !p.context.contains("<ref"));
        }
    }
    assert_eq!(ds.provenance.as_ref().unwrap().dump_sha256, Some(sha256_file(data("mini_dump_fr.xml")).unwrap()));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&config(a.path())).unwrap();
    run_pipeline(&config(b.path())).unwrap();
    for file in ["extract/articles.jsonl", "extract/graph.tsv", "extract/graph.tsv.meta.json", "scores.tsv", "corpus.json"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn every_output_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    run_pipeline(&cfg).unwrap();
    for meta in ["extract/graph.tsv.meta.json", "scores.tsv.meta.json", "corpus.json.meta.json", "extract/provenance.json"] {
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join(meta)).unwrap()).unwrap();
        let p = v.get("provenance").unwrap_or(&v);
        assert_eq!(p["dump_sha256"], cfg.provenance.dump_sha256.clone().unwrap().as_str(), "{meta}");
    }
}

#[test]
fn compressed_dump_gives_the_same_corpus() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let bz = dir.path().join("mini_dump_fr.xml.bz2");
    let mut enc = bzip2::write::BzEncoder::new(std::fs::File::create(&bz).unwrap(), bzip2::Compression::best());
    enc.write_all(&std::fs::read(data("mini_dump_fr.xml")).unwrap()).unwrap();
    enc.finish().unwrap();
    let mut cfg = config(&dir.path().join("run"));
    cfg.dump_path = bz;
    let summary = run_pipeline(&cfg).unwrap();
    assert_eq!(std::fs::read(summary.corpus_path).unwrap(), std::fs::read(data("corpus.golden.json")).unwrap());
}
