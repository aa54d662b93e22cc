use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gnss_twin::exec::{self, Execution};
use gnss_twin::pipeline::{build_scenario, Scenario, TRUTH_INTERVAL};
use gnss_twin::receiver::{acquire, AcquisitionParams};
use gnss_twin::scenario::ScenarioConfig;
use num_complex::Complex32;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn static_scenario(duration: f64) -> Scenario {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut cfg = ScenarioConfig::load(&dir.join("static.toml")).expect("static scenario");
    cfg.scenario.duration = duration;
    build_scenario(&cfg, &dir).expect("scenario builds")
}

fn synthesis(c: &mut Criterion) {
    let sc = static_scenario(1.0);
    let len = (0.1 * sc.timing.fs) as usize;
    let mut group = c.benchmark_group("synthesis_100ms");
    group.sample_size(10);
    group.throughput(Throughput::Elements(len as u64));
    for (name, mode) in MODES {
        let gen = sc.generator().unwrap().with_execution(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| gen.render(0, len).unwrap()));
    }
    group.finish();
}

fn truth(c: &mut Criterion) {
    let sc = static_scenario(10.0);
    let mut group = c.benchmark_group("truth_products_10s");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sc.truth_products(TRUTH_INTERVAL, mode).unwrap())
        });
    }
    group.finish();
}

fn acquisition(c: &mut Criterion) {
    let sc = static_scenario(1.0);
    let params = AcquisitionParams::default();
    let need = params.samples_needed(sc.timing.fs);
    let block: Vec<Complex32> = sc
        .generator()
        .unwrap()
        .render(0, need)
        .unwrap()
        .iter()
        .map(|s| Complex32::new(s.re as f32, s.im as f32))
        .collect();
    let prns: Vec<u8> = (1..=32).collect();
    let mut group = c.benchmark_group("acquisition_32_prns");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec::map(mode, &prns, |&prn| acquire(&block, sc.timing.fs, sc.timing.f_if, prn, &params)))
        });
    }
    group.finish();
}

criterion_group!(benches, synthesis, truth, acquisition);
criterion_main!(benches);
