use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qvbench_core::compile::{compile_to_device, decompose_su4, CompileRequest};
use qvbench_core::qvgen::{generate_qv_circuit, sample_haar_su4, QvSpec};
use qvbench_core::rng::{stream, Domain};
use qvbench_core::sim::{ideal_distribution, sample_outcomes, NoiseModel, ShotKey};
use qvbench_core::topology::{builtin_profile, subset_count};
use qvbench_core::GateKind;

fn generation(c: &mut Criterion) {
    let mut rng = stream(0, Domain::Circuit, 0);
    c.bench_function("haar su4", |b| b.iter(|| sample_haar_su4(&mut rng)));
    let u = sample_haar_su4(&mut rng);
    for target in [GateKind::Cx, GateKind::Rxx, GateKind::Xy] {
        c.bench_with_input(BenchmarkId::new("decompose su4", target), &target, |b, &t| {
            b.iter(|| decompose_su4(&u, t).unwrap())
        });
    }
    c.bench_function("generate m=8", |b| {
        let spec = QvSpec::square(8, 1);
        let mut i = 0;
        b.iter(|| {
            i += 1;
            generate_qv_circuit(&spec, i)
        })
    });
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("ideal distribution");
    for m in [4, 8, 12] {
        let circuit = generate_qv_circuit(&QvSpec::square(m, 2), 0);
        group.bench_with_input(BenchmarkId::from_parameter(m), &circuit, |b, c| {
            b.iter(|| ideal_distribution(c).unwrap())
        });
    }
    group.finish();

    let circuit = generate_qv_circuit(&QvSpec::square(5, 3), 0);
    let noise = NoiseModel::new(0.99, 0.9997, 0.98).unwrap();
    c.bench_function("100 noisy shots m=5", |b| {
        b.iter(|| sample_outcomes(&circuit, 100, &noise, ShotKey { base_seed: 0, circuit_index: 0 }).unwrap())
    });
}

fn device(c: &mut Criterion) {
    let washington = builtin_profile("washington-like").unwrap();
    c.bench_function("connected 4-subsets of 127q", |b| b.iter(|| subset_count(&washington.graph, 4)));

    let guadalupe = builtin_profile("guadalupe-like").unwrap();
    let circuit = generate_qv_circuit(&QvSpec::square(5, 4), 0);
    c.bench_function("compile m=5 heavy-hex", |b| {
        b.iter(|| compile_to_device(&CompileRequest::new(&circuit, &guadalupe).subset(vec![1, 2, 3, 4, 5])).unwrap())
    });
}

criterion_group!(benches, generation, simulation, device);
criterion_main!(benches);
