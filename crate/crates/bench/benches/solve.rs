use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use csat_bench::{chains, dags};
use csat_core::{brute_force, build_tables, solve, CircuitClass, DecisionPolicy};

fn bench_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_tables");
    for circuit in chains(&[100, 1_000, 10_000]) {
        group.throughput(Throughput::Elements(circuit.m() as u64));
        group.bench_with_input(
            BenchmarkId::from_parameter(circuit.m()),
            &circuit,
            |b, c| b.iter(|| build_tables(c)),
        );
    }
    group.finish();
}

fn bench_solve_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_chain");
    for circuit in chains(&[100, 1_000, 10_000]) {
        group.throughput(Throughput::Elements(circuit.m() as u64));
        group.bench_with_input(
            BenchmarkId::from_parameter(circuit.m()),
            &circuit,
            |b, c| b.iter(|| solve(c, &DecisionPolicy::Deterministic, true)),
        );
    }
    group.finish();
}

fn bench_solve_dag(c: &mut Criterion) {
    let circuits = dags(CircuitClass::General, 10, 40, 64);
    c.bench_function("solve_general_n10_m40_x64", |b| {
        b.iter(|| {
            for circuit in &circuits {
                solve(circuit, &DecisionPolicy::Deterministic, true);
            }
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let circuits = dags(CircuitClass::General, 16, 40, 4);
    c.bench_function("brute_force_n16_x4", |b| {
        b.iter(|| {
            for circuit in &circuits {
                brute_force(circuit).unwrap();
            }
        })
    });
}

criterion_group!(
    benches,
    bench_build,
    bench_solve_chain,
    bench_solve_dag,
    bench_oracle
);
criterion_main!(benches);
