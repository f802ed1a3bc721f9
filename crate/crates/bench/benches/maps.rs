use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use sublab::cones::complement_recursion;
use sublab::exact::step;
use sublab::matrices::inverse_product;
use sublab::orbit::{absorption_experiment, iterate, AbsorptionConfig, IterateOptions};
use sublab::sample::{stream_rng, Base, Region, Sampler};
use sublab::{MapParams, OrderedPoint, Shuffle, Q};

fn single_step(c: &mut Criterion) {
    let p = MapParams::new(2, 3).unwrap();
    let sampler = Sampler::new(64, Base::Simplex).unwrap();
    let x = sampler.draw(&mut stream_rng(1, 0), p, Region::Lambda).unwrap();
    let xq: OrderedPoint<Q> = sampler.to_rational(&x);
    c.bench_function("step_i128_2_3", |b| b.iter(|| step(black_box(&x), p).unwrap()));
    c.bench_function("step_rational_2_3", |b| b.iter(|| step(black_box(&xq), p).unwrap()));
}

fn orbit_to_limit(c: &mut Criterion) {
    let p = MapParams::new(1, 2).unwrap();
    let sampler = Sampler::new(64, Base::Simplex).unwrap();
    let x = sampler.draw(&mut stream_rng(2, 0), p, Region::D).unwrap();
    let opts = IterateOptions::default();
    c.bench_function("iterate_d_sample_1_2", |b| b.iter(|| iterate(black_box(&x), p, &opts).unwrap()));
}

fn matrix_products(c: &mut Criterion) {
    let p = MapParams::new(2, 2).unwrap();
    let all = Shuffle::all(p);
    let word: Vec<Shuffle> = (0..50).map(|k| all[(7 * k + 3) % all.len()].clone()).collect();
    c.bench_function("inverse_product_len50_2_2", |b| b.iter(|| inverse_product(black_box(&word), p).unwrap()));
}

fn cones(c: &mut Criterion) {
    c.bench_function("complement_recursion_depth6", |b| b.iter(|| complement_recursion(black_box(6)).unwrap()));
}

fn absorption(c: &mut Criterion) {
    let p = MapParams::new(2, 3).unwrap();
    let mut g = c.benchmark_group("absorption");
    g.sample_size(10);
    g.bench_function("absorb_1000_2_3", |b| {
        b.iter_batched(
            || AbsorptionConfig::new(p, 1_000, 100_000, 9),
            |cfg| absorption_experiment(&cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, single_step, orbit_to_limit, matrix_products, cones, absorption);
criterion_main!(benches);
