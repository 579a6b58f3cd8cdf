use annoforge_bench::{random_graph, synthetic_dump};
use annoforge_core::corpus::{parse_dump, GraphBuilder};
use annoforge_core::rank::{pagerank, RankConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn pagerank_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("pagerank");
    group.sample_size(10);
    for n in [10_000, 100_000] {
        let graph = random_graph(n, 20, 1);
        group.throughput(Throughput::Elements(graph.edge_count() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &graph, |b, g| {
            b.iter(|| pagerank(g, &RankConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn dump_bench(c: &mut Criterion) {
    let xml = synthetic_dump(500, 2);
    let mut group = c.benchmark_group("dump");
    group.throughput(Throughput::Bytes(xml.len() as u64));
    group.bench_function("parse_and_link", |b| {
        b.iter(|| {
            let mut builder = GraphBuilder::new();
            for page in parse_dump(xml.as_bytes()) {
                builder.add_article(&page.unwrap());
            }
            builder.finish()
        })
    });
    group.finish();
}

criterion_group!(benches, pagerank_bench, dump_bench);
criterion_main!(benches);
