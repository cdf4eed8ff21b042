use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chainpursuit::{sketch_signal, update, Mode};
use chainpursuit_bench::fixture;

/// Full-signal sketching through both matrix backends. The seeded backend
/// pays for batched polynomial evaluation; the explicit one for table reads.
fn sketch_backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("sketch_d65536_m16");
    group.sample_size(20);
    for mode in [Mode::Explicit, Mode::Seeded] {
        let fx = fixture(65536, 16, mode);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &fx,
            |b, fx| b.iter(|| sketch_signal(&fx.signal, &fx.matrix).unwrap()),
        );
    }
    group.finish();
}

/// Streaming single-position updates against an existing sketch.
fn streaming_updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("update_d65536_m16");
    for mode in [Mode::Explicit, Mode::Seeded] {
        let fx = fixture(65536, 16, mode);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &fx,
            |b, fx| {
                let mut sketch = fx.sketch.clone();
                let mut position = 1usize;
                b.iter(|| {
                    position = (position * 48271) % 65536;
                    update(&mut sketch, &fx.matrix, position, 1.0).unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, sketch_backends, streaming_updates);
criterion_main!(benches);
