use std::hint::black_box;

use cantorsum_core::sweep::{region_map, Axis, SweepParam};
use cantorsum_core::transversality::dphi_dlambda;
use cantorsum_core::{
    convolution_density, equilibrium_weights, minkowski_sum, moran_dimension, pushforward_histogram, CantorFamily,
    CoefficientFn, Ifs, ParamInterval, SymbolPath, DEFAULT_CYLINDER_CAP,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn sums(c: &mut Criterion) {
    let cover = Ifs::middle_alpha(0.3)
        .unwrap()
        .generation_cover(8, DEFAULT_CYLINDER_CAP)
        .unwrap();
    c.bench_function("minkowski_sum 256x256", |b| {
        b.iter(|| minkowski_sum(black_box(&cover), black_box(&cover)).unwrap())
    });
}

fn dimensions(c: &mut Criterion) {
    let ratios = [0.31, 0.12, 0.2, 0.05];
    c.bench_function("moran_dimension 4 maps", |b| {
        b.iter(|| moran_dimension(black_box(&ratios)).unwrap())
    });
}

fn derivative(c: &mut Criterion) {
    let fam = CantorFamily::homogeneous_two_map(
        ParamInterval::new(0.05, 0.1).unwrap(),
        CoefficientFn::linear(0.5, -1.0),
        1.0,
    )
    .unwrap();
    let head = vec![1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0];
    let mut a = head.clone();
    a.extend([0, 1, 1]);
    let mut t = head;
    t.extend([1, 0, 1]);
    let omega = SymbolPath::new(2, a, vec![0, 1, 1]).unwrap();
    let tau = SymbolPath::new(2, t, vec![1, 0]).unwrap();
    c.bench_function("dphi_dlambda wedge 12", |b| {
        b.iter(|| dphi_dlambda(&fam, black_box(&omega), black_box(&tau), black_box(0.07)).unwrap())
    });
}

fn convolution(c: &mut Criterion) {
    let ifs = Ifs::middle_alpha(0.45).unwrap();
    let w = equilibrium_weights(&ifs.ratios()).unwrap();
    let bw = 2f64.powi(-10);
    let depth = (bw.ln() / 0.45f64.ln()).ceil() as usize;
    let h = pushforward_histogram(&ifs, &w, depth, bw, DEFAULT_CYLINDER_CAP).unwrap();
    c.bench_function("convolution_density 1024 bins", |b| {
        b.iter(|| convolution_density(black_box(&h), black_box(&h)).unwrap())
    });
}

fn regions(c: &mut Criterion) {
    let a = Axis::new(SweepParam::A, 0.01, 0.49, 100);
    let b = Axis {
        name: SweepParam::B,
        ..a
    };
    c.bench_function("region_map 100x100", |bn| {
        bn.iter(|| region_map(black_box(&a), black_box(&b)).unwrap())
    });
}

criterion_group!(kernels, sums, dimensions, derivative, convolution, regions);
criterion_main!(kernels);
