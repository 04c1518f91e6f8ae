use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gauge_moduli::fields::{residual, Configuration, System};
use gauge_moduli::kahler::Family;
use gauge_moduli::mesh_dec::build_surface;
use gauge_moduli::moment::adjoint::operator_script_l;
use gauge_moduli::par::set_force_sequential;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn config(genus: usize, refinement: usize) -> Configuration {
    let mesh = Arc::new(build_surface(genus, refinement).unwrap());
    Configuration::random(mesh, &mut ChaCha8Rng::seed_from_u64(1), 0.3, 0.5)
}

fn paths(c: &mut Criterion, group: &str, param: usize, mut f: impl FnMut()) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    for (name, seq) in [("parallel", false), ("sequential", true)] {
        set_force_sequential(seq);
        g.bench_function(BenchmarkId::new(name, param), |b| b.iter(&mut f));
    }
    set_force_sequential(false);
    g.finish();
}

fn residuals(c: &mut Criterion) {
    for r in [2, 4] {
        let x = config(1, r);
        paths(c, "coupled_residual", x.n_faces(), || {
            residual(System::CoupledHarmonic, &x, 0.1, -1.0).unwrap();
        });
    }
}

fn adjoint_operator(c: &mut Criterion) {
    let x = config(2, 0);
    paths(c, "script_l_assembly", x.n_faces(), || {
        operator_script_l(Family::J, &x, 0.1, -1.0, 3000).unwrap();
    });
}

criterion_group!(benches, residuals, adjoint_operator);
criterion_main!(benches);
