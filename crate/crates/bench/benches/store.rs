use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use examd_bench::store_bytes;
use examd_core::report::export_results_csv;
use examd_core::store::{replay, Record};

fn bench_replay(c: &mut Criterion) {
    let mut group = c.benchmark_group("replay");
    for n in [100, 10_000] {
        let bytes = store_bytes(n);
        group.throughput(Throughput::Bytes(bytes.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &bytes, |b, bytes| {
            b.iter(|| replay(black_box(bytes)).unwrap())
        });
    }
    group.finish();
}

fn bench_export(c: &mut Criterion) {
    let (records, _) = replay(&store_bytes(1000)).unwrap();
    let results: Vec<_> = records
        .into_iter()
        .filter_map(|r| match r {
            Record::Result(r) => Some(r),
            _ => None,
        })
        .collect();
    c.bench_function("export_results_csv/1000", |b| {
        b.iter(|| export_results_csv(black_box(&results)).unwrap())
    });
}

criterion_group!(store, bench_replay, bench_export);
criterion_main!(store);
