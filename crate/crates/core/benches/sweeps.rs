//! Serial against rayon evaluation of the sweeps that dominate run time.
//! Build with `--no-default-features` to compare against the fallback
//! compiled without rayon.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use els_core::continuum::{grid_phase_sweep, GridConfig};
use els_core::{build_h0, build_ribbon, trial_state_l0, EvolutionPlan, Execution, Manifold, Propagator, RibbonSpec};

const STRATEGIES: [Execution; 2] = [Execution::Serial, Execution::Parallel];

fn phase_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("phase_sweep");
    let lat = build_ribbon(RibbonSpec::new(4, 5.0)).unwrap();
    let prop = Propagator::new(&build_h0(&lat, 2.75e-3).unwrap()).unwrap();
    let plan = EvolutionPlan::new(1000.0, 2001).unwrap();
    let phis: Vec<f64> = (0..64).map(|k| 2.0 * PI * k as f64 / 64.0).collect();
    for exec in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| {
                exec.map(&phis, |&phi| prop.avg_central_population(&lat, &trial_state_l0(4, phi).unwrap(), &plan).unwrap())
            })
        });
    }
    group.finish();
}

fn size_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("size_sweep");
    group.sample_size(10);
    let sizes: Vec<usize> = (1..=24).collect();
    let plan = EvolutionPlan::new(1000.0, 501).unwrap();
    for exec in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| {
                exec.map(&sizes, |&n| {
                    let lat = build_ribbon(RibbonSpec::new(n, 5.0)).unwrap();
                    let prop = Propagator::new(&build_h0(&lat, 2.75e-3).unwrap()).unwrap();
                    prop.avg_central_population(&lat, &trial_state_l0(n, 0.5 * PI).unwrap(), &plan).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn grid_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_sweep");
    group.sample_size(10);
    let lat = build_ribbon(RibbonSpec::new(1, 5.0)).unwrap();
    let pos: Vec<[f64; 2]> = lat.sites().iter().map(|s| s.position).collect();
    let config = GridConfig::enclosing_with(&pos, 6.0, 128, 0.01).unwrap();
    let plan = EvolutionPlan::new(10.0, 11).unwrap();
    let phis = [0.0, 0.5 * PI, PI];
    group.bench_function("two_field_superposition", |b| {
        b.iter(|| grid_phase_sweep(&lat, Manifold::L0, 0.0, &phis, &plan, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, phase_sweep, size_sweep, grid_sweep);
criterion_main!(benches);
