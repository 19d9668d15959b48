use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use rarelink::adaptive::{simulate_ranges, PointSource, ProposalParams, SampleOptions};
use rarelink::channel::{sigma2_from_snr, ScaleParams};
use rarelink::exec::{Exec, DEFAULT_BLOCK};
use rarelink::harness::{link_scenario, run_cell, ExperimentConfig, Method};
use rarelink::lowdisc::SequenceKind;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn qam_config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "modulation = qam\norder = 16\nsnr = 12\nwords_per_pack = 5000\npacks = 4\nseed = 3\n{extra}"
    ))
    .unwrap()
}

fn bench_simulate(c: &mut Criterion) {
    let cfg = qam_config("method = is-scale");
    let scenario = link_scenario(&cfg).unwrap();
    let sigma2 = sigma2_from_snr(12.0);
    let proposal = ProposalParams::Scale(ScaleParams::new(3.0, 0.1).unwrap());
    let n: u64 = 1 << 16;
    let ranges = [0..n];

    let mut group = c.benchmark_group("simulate_ranges");
    group.throughput(Throughput::Elements(n));
    for kind in [SequenceKind::PseudoRandom, SequenceKind::Sobol] {
        let source = PointSource::new(kind, 7);
        for (name, exec) in EXECS {
            let opts = SampleOptions { exec, block: DEFAULT_BLOCK, keep_samples: false };
            group.bench_with_input(BenchmarkId::new(name, format!("{kind:?}")), &opts, |b, opts| {
                b.iter(|| {
                    black_box(
                        simulate_ranges(&scenario, &proposal, sigma2, &ranges, 0, source, *opts).unwrap(),
                    )
                })
            });
        }
    }
    group.finish();
}

fn bench_cells(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_cell");
    group.sample_size(10);
    for method in [Method::QmcSobol, Method::IsScale] {
        for (name, exec) in EXECS {
            let mut cfg = qam_config(&format!("method = {method}"));
            cfg.exec = exec;
            group.bench_with_input(BenchmarkId::new(name, method.as_str()), &cfg, |b, cfg| {
                b.iter(|| black_box(run_cell(cfg, 12.0, method).unwrap().row))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_cells);
criterion_main!(benches);
