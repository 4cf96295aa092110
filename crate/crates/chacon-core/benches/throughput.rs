//! Criterion suite over the enumeration-heavy paths. Build with the default
//! `parallel` feature to measure the rayon path (a one-thread pool runs
//! beside it for comparison); build with `--no-default-features` to measure
//! the plain sequential fallback under the same benchmark names.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chacon_core::analysis::{check_fourier_bound, convolution_decay_report};
use chacon_core::towers::{full_level, height, psi_lift, weak_limit_error};
use chacon_core::triadic::pi_exact;
use chacon_core::weaklimits::audit_alpha_weak_mixing;
use chacon_core::Budgets;

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

/// Run `f` both in the ambient configuration and pinned to one thread, so a
/// single `cargo bench` run shows the speedup next to its serial baseline.
fn bench_both<F: Fn() + Sync>(c: &mut Criterion, group: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new(mode(), "ambient"), &(), |b, ()| b.iter(&f));
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        g.bench_with_input(
            BenchmarkId::new("one-thread-pool", "pinned"),
            &(),
            |b, ()| b.iter(|| pool.install(&f)),
        );
    }
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let budgets = Budgets::default();
    bench_both(c, "oracle/m=728", move || {
        pi_exact(728, &budgets).unwrap();
    });
    bench_both(c, "oracle/m=2186", move || {
        pi_exact(2186, &budgets).unwrap();
    });
}

fn bench_fourier(c: &mut Criterion) {
    bench_both(c, "fourier-check/m=120,grid=256", || {
        assert!(check_fourier_bound(120, 256).pass());
    });
}

fn bench_decay(c: &mut Criterion) {
    let budgets = Budgets::default();
    bench_both(c, "decay/M=5,R=5", move || {
        convolution_decay_report(5, 5, &budgets).unwrap();
    });
}

fn bench_tower_defect(c: &mut Criterion) {
    let budgets = Budgets::default();
    let a = psi_lift(&full_level(2, 0), 6);
    assert_eq!(height(6), 1093);
    bench_both(c, "weak-limit-error/n=6,m=2,u=1", move || {
        weak_limit_error(6, 2, 1, &a, &a, &budgets).unwrap();
    });
}

fn bench_audit(c: &mut Criterion) {
    bench_both(c, "audit/r=4,m=6", || {
        assert!(audit_alpha_weak_mixing(4, 6).pass);
    });
}

criterion_group!(
    benches,
    bench_oracle,
    bench_fourier,
    bench_decay,
    bench_tower_defect,
    bench_audit
);
criterion_main!(benches);
