use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpor_bench::scenes;
use lpor_core::{por_select_forwarder, select_best_forwarder, select_candidates, RadioParams};

fn selection(c: &mut Criterion) {
    let rp = RadioParams::default();
    let none = BTreeSet::new();
    let mut group = c.benchmark_group("select");
    for n in [10, 50, 160] {
        let set = scenes(n as u64, 64, n, rp.range_m);
        group.bench_with_input(BenchmarkId::new("lpor_forwarder", n), &set, |b, set| {
            b.iter(|| {
                for s in set {
                    black_box(select_best_forwarder(s.cur, &s.neighbors, s.dest, s.dest_pos, &rp, &none));
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("por_forwarder", n), &set, |b, set| {
            b.iter(|| {
                for s in set {
                    black_box(por_select_forwarder(s.cur, &s.neighbors, s.dest, s.dest_pos, &none));
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("candidates", n), &set, |b, set| {
            b.iter(|| {
                for s in set {
                    if let Some(f) = select_best_forwarder(s.cur, &s.neighbors, s.dest, s.dest_pos, &rp, &none) {
                        let fwd = *s.neighbors.iter().find(|x| x.id == f).unwrap();
                        black_box(select_candidates(s.cur, fwd, &s.neighbors, s.dest_pos, &rp));
                    }
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, selection);
criterion_main!(benches);
