use std::hint::black_box;

use banditbench::diagnostics::{wasserstein_1d, EmpiricalSample};
use banditbench::posterior::conjugate_gaussian_posterior;
use banditbench::rng::stream_rng;
use banditbench::samplers::{run_langevin, SamplerConfig, SamplerKind};
use banditbench_benches::{bench_arm, bench_state};
use criterion::{criterion_group, criterion_main, Criterion};

fn langevin_rounds(c: &mut Criterion) {
    let arm = bench_arm();
    let mut group = c.benchmark_group("langevin_round");
    for n in [100usize, 1000] {
        let state = bench_state(&arm, n, 1);
        for (label, kind) in [("ula", SamplerKind::Ula), ("sgld", SamplerKind::Sgld)] {
            let cfg = SamplerConfig::practical(kind, 1.0);
            group.bench_function(format!("{label}_practical_n{n}"), |b| {
                let mut rng = stream_rng(&[2, n as u64]);
                b.iter(|| {
                    run_langevin(black_box(&state), &arm.family, &arm.prior, &cfg, &mut rng)
                        .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn conjugate_update(c: &mut Criterion) {
    let arm = bench_arm();
    let state = bench_state(&arm, 1000, 3);
    c.bench_function("conjugate_posterior_n1000", |b| {
        b.iter(|| conjugate_gaussian_posterior(0.0, 1.0, 1.0, black_box(state.data())).unwrap())
    });
}

fn wasserstein(c: &mut Criterion) {
    let arm = bench_arm();
    let mut rng = stream_rng(&[4]);
    let m = 20_000usize;
    let mut a = EmpiricalSample::new((0..m).map(|_| arm.truth.draw_reward(&mut rng)).collect());
    let mut b_sample =
        EmpiricalSample::new((0..m).map(|_| arm.truth.draw_reward(&mut rng)).collect());
    a.sort();
    b_sample.sort();
    c.bench_function("wasserstein_1d_20k_p2", |bch| {
        bch.iter(|| wasserstein_1d(black_box(&a), black_box(&b_sample), 2).unwrap())
    });
}

criterion_group!(benches, langevin_rounds, conjugate_update, wasserstein);
criterion_main!(benches);
