//! Benchmarks for the hot kernels: symbolic continuants, exact linear
//! algebra, the periodicity criterion, higher twists, and quiver chains.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use contwist::bilinear::{mutation_matrix_product, periodicity_criterion, InstanceGen};
use contwist::continuants::{chebyshev_u, euler_poly, fibonacci_poly};
use contwist::functorcat::{higher_twist, Complex, FunctorGen, FunctorMatrix, Variant};
use contwist::quiverk0::sod_chain_an;
use contwist::scalars::{rat_int, Mat};
use contwist::Field;

fn bench_continuants(c: &mut Criterion) {
    c.bench_function("euler_poly N=14", |b| {
        b.iter(|| euler_poly(black_box(14)))
    });
    c.bench_function("fibonacci_poly(40) at q=-1 vs U_40", |b| {
        b.iter(|| {
            let p = fibonacci_poly(black_box(40)).at_q(&rat_int(-1));
            assert!(p == chebyshev_u(40));
        })
    });
}

fn bench_linear_algebra(c: &mut Criterion) {
    let mut gen = InstanceGen::new(7, Field::quadratic(2));
    let m: Mat = gen.matrix(8, 8);
    c.bench_function("Mat::rank 8x8 over Q(sqrt2)", |b| {
        b.iter(|| black_box(&m).rank())
    });
    let s = gen.space(6);
    let inv = s.gram().clone();
    c.bench_function("Mat::inverse 6x6 Gram", |b| {
        b.iter(|| black_box(&inv).inverse().unwrap())
    });
}

fn bench_bilinear(c: &mut Criterion) {
    let mut gen = InstanceGen::new(3, Field::Rationals);
    let a = gen.space(3);
    let t = gen.space(3);
    let f = gen.operator(&a, &t);
    c.bench_function("periodicity_criterion N=6 dim 3", |b| {
        b.iter(|| periodicity_criterion(black_box(&f), 6))
    });
    let space = gen.space(4);
    let sub = gen.nondegenerate_subspace(&space, 2);
    c.bench_function("mutation_matrix_product N=5", |b| {
        b.iter(|| mutation_matrix_product(black_box(&sub), 5))
    });
}

fn bench_functors(c: &mut Criterion) {
    let mut gen = FunctorGen::new(21);
    let complex = gen.random_complex(2, -1, 1);
    let f = FunctorMatrix::from_complex(complex);
    c.bench_function("higher_twist E_6 small complex", |b| {
        b.iter(|| higher_twist(black_box(&f), 6, Variant::Homological).unwrap())
    });
    let id = FunctorMatrix::from_complex(Complex::point());
    c.bench_function("higher_twist E^5(Id)", |b| {
        b.iter(|| higher_twist(black_box(&id), 5, Variant::Cohomological).unwrap())
    });
}

fn bench_quivers(c: &mut Criterion) {
    c.bench_function("sod_chain_an n=6", |b| {
        b.iter(|| sod_chain_an(black_box(6)).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_continuants,
    bench_linear_algebra,
    bench_bilinear,
    bench_functors,
    bench_quivers
);
criterion_main!(kernels);
