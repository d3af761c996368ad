use std::hint::black_box;

use cgwitness::binning::BinGrid;
use cgwitness::ingest::VariablePair;
use cgwitness::model::{
    bin_mass_oracle, sample_joint_counts, GaussianTwoPhotonState, SamplingPlan,
};
use cgwitness::spheroidal::{characteristic_value, coarse_bound, coarse_bound_cached};
use cgwitness::sweep::run_sweep;
use cgwitness::witnesses::{coarse_entropic_witness, coarse_variance_witness, GlobalMarginal};
use cgwitness::{
    DiscreteDistribution, ErrorModel, GlobalVariable, JitterMode, MarginalSpec, OpticalGeometry,
    Pairing, SweepConfig,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bound(c: &mut Criterion) {
    let mut g = c.benchmark_group("coarse_bound");
    for gamma in [1.0, 14.0, 60.0] {
        g.bench_with_input(BenchmarkId::new("direct", gamma), &gamma, |b, &x| {
            b.iter(|| coarse_bound(black_box(x)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cached", gamma), &gamma, |b, &x| {
            b.iter(|| coarse_bound_cached(black_box(x)).unwrap())
        });
    }
    g.finish();
    c.bench_function("characteristic_value/c=12.5", |b| {
        b.iter(|| characteristic_value(black_box(12.5)).unwrap())
    });
}

fn marginal(variable: GlobalVariable, width: f64, std: f64) -> GlobalMarginal {
    let oracle = bin_mass_oracle(MarginalSpec {
        variable,
        mean: 0.0,
        std,
    });
    let grid = BinGrid::covering(width, 12.0 * std).unwrap();
    let masses = grid
        .indices()
        .map(|j| oracle(grid.lower_edge(j), grid.upper_edge(j)))
        .collect();
    GlobalMarginal::new(
        variable,
        DiscreteDistribution::from_weights(grid, masses).unwrap(),
    )
}

fn witnesses(c: &mut Criterion) {
    let r = marginal(Pairing::PlusMinus.position_variable(), 0.05, 0.5);
    let s = marginal(Pairing::PlusMinus.momentum_variable(), 0.05, 0.5);
    c.bench_function("coarse_variance_witness", |b| {
        b.iter(|| coarse_variance_witness(black_box(&r), black_box(&s)).unwrap())
    });
    c.bench_function("coarse_entropic_witness", |b| {
        b.iter(|| coarse_entropic_witness(black_box(&r), black_box(&s)).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let geom = OpticalGeometry::reference();
    let state = GaussianTwoPhotonState::new(15.7, 3.93).unwrap();
    let x = sample_joint_counts(
        &state,
        &geom,
        VariablePair::Position,
        &SamplingPlan::new(1e6, 1),
    )
    .unwrap();
    let p = sample_joint_counts(
        &state,
        &geom,
        VariablePair::Momentum,
        &SamplingPlan::new(1e6, 2),
    )
    .unwrap();
    let values_only = SweepConfig::default();
    let with_errors = SweepConfig {
        n_values: vec![1, 5, 9],
        m_values: vec![1, 5, 9],
        errors: Some(ErrorModel {
            replicates: 100,
            jitter: JitterMode::PerBin,
            ..ErrorModel::new(3)
        }),
        ..SweepConfig::default()
    };
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("default_grid", |b| {
        b.iter(|| run_sweep(&x, &p, &values_only).unwrap())
    });
    g.bench_function("3x3_100_replicates", |b| {
        b.iter(|| run_sweep(&x, &p, &with_errors).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bound, witnesses, sweep);
criterion_main!(benches);
