use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use newform_bench::{group, psi};
use newform_core::bessel::bessel_function;
use newform_core::cosets::{verify_coset_partition, MackeyEngine, Truncation};
use newform_core::field::FieldDescriptor;
use newform_core::minimax::Stratum;
use newform_core::newform::{k_sigma, DepthZeroRep};
use newform_core::{character_table, GroupContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("character_table");
    g.sample_size(10);
    for (n, q) in [(2usize, 3u64), (2, 5), (3, 2)] {
        let ctx = GroupContext::from_order(n, q).unwrap();
        g.bench_function(format!("GL{n}(F{q})"), |b| b.iter(|| character_table(&ctx, 0).unwrap()));
    }
    g.finish();
}

fn bessel(c: &mut Criterion) {
    let (ctx, t) = group(3, 2);
    let row = t.cuspidal_rows()[0];
    let psi = psi(&ctx);
    c.bench_function("bessel GL3(F2)", |b| b.iter(|| bessel_function(&ctx, &t, row, psi).unwrap()));
}

fn oldforms(c: &mut Criterion) {
    let (ctx, t) = group(2, 3);
    let row = t.cuspidal_rows()[0];
    let mut g = c.benchmark_group("oldform_dimension");
    g.sample_size(10);
    g.bench_function("GL2(F3) m=5", |b| {
        b.iter(|| MackeyEngine::new(&ctx, &t, row).unwrap().oldform_dimension(5, &Truncation::for_level(5)).unwrap())
    });
    g.finish();
}

fn cosets(c: &mut Criterion) {
    let f = Arc::new(FieldDescriptor::from_order(2).unwrap());
    let mut g = c.benchmark_group("coset_partition");
    g.sample_size(10);
    g.bench_function("n=3 q=2 m=4", |b| b.iter(|| verify_coset_partition(f.clone(), 3, 4).unwrap()));
    g.finish();
}

fn coefficients(c: &mut Criterion) {
    let (ctx, t) = group(2, 3);
    let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[0], psi(&ctx), 2).unwrap();
    let ks = k_sigma(2);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    c.bench_function("matrix_coeff_formula GL2(F3)", |b| {
        b.iter_batched(
            || rep.sample_pattern(&ks, &mut rng).unwrap(),
            |x| rep.matrix_coeff_formula(&x).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("matrix_coeff_direct GL2(F3)", |b| {
        b.iter_batched(
            || rep.sample_pattern(&ks, &mut rng).unwrap(),
            |x| rep.matrix_coeff_direct(&x).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn minimax(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let st = Stratum::random(Arc::new(FieldDescriptor::from_order(2).unwrap()), 3, 1, &mut rng).unwrap();
    let mut g = c.benchmark_group("minimax");
    g.sample_size(10);
    g.bench_function("intersections n=3 m=1 q=2 x200", |b| b.iter(|| st.check_intersections(200, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, tables, bessel, oldforms, cosets, coefficients, minimax);
criterion_main!(benches);
