use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use examd_bench::{bank, half_right};
use examd_core::{assemble_exam, score, skill_profile, validate_bank, ExamBlueprint};

fn bench_assembly(c: &mut Criterion) {
    let bp = ExamBlueprint::default();
    let mut group = c.benchmark_group("assemble_exam");
    for per_category in [10, 100, 1000] {
        let bank = bank(per_category);
        group.bench_with_input(
            BenchmarkId::from_parameter(per_category),
            &bank,
            |b, bank| {
                let mut seed = 0u64;
                b.iter(|| {
                    seed += 1;
                    assemble_exam(black_box(bank), &bp, seed).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn bench_validate(c: &mut Criterion) {
    let bp = ExamBlueprint::default();
    let bank = bank(1000);
    c.bench_function("validate_bank/1000", |b| {
        b.iter(|| validate_bank(black_box(&bank), &bp))
    });
}

fn bench_scoring(c: &mut Criterion) {
    let bp = ExamBlueprint::default();
    let form = assemble_exam(&bank(10), &bp, 7).unwrap();
    let sheet = half_right(&form);
    c.bench_function("score/50", |b| {
        b.iter(|| score(black_box(&form), black_box(&sheet), &bp, 1800).unwrap())
    });
    let report = score(&form, &sheet, &bp, 1800).unwrap();
    c.bench_function("skill_profile", |b| {
        b.iter(|| skill_profile(black_box(&report)))
    });
}

criterion_group!(exam, bench_assembly, bench_validate, bench_scoring);
criterion_main!(exam);
