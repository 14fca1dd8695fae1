use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pauliflow::experiments::{mc_estimate, PreparedPoint};
use pauliflow::library::get_gate;
use pauliflow::noise::{NoiseGenerator, NoiseMode, NoiseSpec};
use pauliflow::propagator::{Propagator, Units};
use pauliflow::schedule::{build_schedule, PulseSpec};
use pauliflow_bench::cnot_config;

fn evolve(c: &mut Criterion) {
    let gate = get_gate("cnot1", None).unwrap();
    let pulse = PulseSpec {
        gap: 5.0,
        gate_time: 10.0,
        ..PulseSpec::default()
    };
    let trace = build_schedule(gate.sequence.stages().len(), &pulse).unwrap();
    let fast = Propagator::new(&gate.sequence, Units::Cycles).unwrap();
    let dense = Propagator::new(&gate.sequence, Units::Cycles).unwrap().dense_only();
    let mut g = c.benchmark_group("evolve_cnot1_4096");
    g.bench_function("fast", |b| b.iter(|| fast.evolve(&trace).unwrap()));
    g.bench_function("dense", |b| b.iter(|| dense.evolve(&trace).unwrap()));
    g.finish();
}

fn noise(c: &mut Criterion) {
    let mut g = c.benchmark_group("filtered_noise");
    for n in [4096usize, 16384] {
        let spec = NoiseSpec {
            mode: NoiseMode::Filtered,
            sigma: 0.15,
            bandwidth: 0.4,
            ..NoiseSpec::default()
        };
        let gen = NoiseGenerator::new(&spec, n, 10.0 / (n - 1) as f64).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &gen, |b, gen| {
            let mut run = 0;
            b.iter(|| {
                run += 1;
                gen.multipliers(4, run)
            })
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let config = cnot_config(NoiseMode::Dc, 4096);
    let point = PreparedPoint::new(&config).unwrap();
    c.bench_function("single_noisy_run", |b| b.iter(|| point.run(3).unwrap()));
    let mut g = c.benchmark_group("mc_estimate");
    g.sample_size(10);
    g.bench_function("dc_16_runs", |b| b.iter(|| mc_estimate(&config).unwrap()));
    g.finish();
}

criterion_group!(benches, evolve, noise, monte_carlo);
criterion_main!(benches);
