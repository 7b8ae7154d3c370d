use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use detproc::dpp::sample_dpp;
use detproc::fock::{second_quantization, FockSpace, HeatSemigroup};
use detproc::kernels::{fermi_kernel, space_time_kernel};
use detproc::orthopoly::{difference_operator, FamilySpec, Lattice, SiteWindow};
use detproc::schur::{transition_matrix, PartitionSpace};
use detproc::SymmetricOperator;
use std::hint::black_box;

fn charlier(m: usize) -> SymmetricOperator {
    let w = SiteWindow::new(Lattice::NonNegative, 0.0, (m - 1) as f64).unwrap();
    difference_operator(&FamilySpec::Charlier { mu: 2.0 }, &w).unwrap().affine(-1.0, -2.0)
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("fermi_kernel");
    for m in [20, 80, 200] {
        let h = charlier(m);
        g.bench_with_input(BenchmarkId::from_parameter(m), &h, |b, h| b.iter(|| fermi_kernel(black_box(h), 2.0)));
    }
    g.finish();
    let r = space_time_kernel(&charlier(80), 2.0).unwrap();
    c.bench_function("space_time_eval", |b| b.iter(|| r.value(black_box(10), -0.3, black_box(12), 0.6)));
}

fn sampling(c: &mut Criterion) {
    let k = fermi_kernel(&charlier(60), 2.0).unwrap();
    c.bench_function("sample_dpp_60", |b| b.iter(|| sample_dpp(black_box(&k), 1, 10)));
}

fn fock(c: &mut Criterion) {
    let h = charlier(8);
    let space = FockSpace::new(h.sites().to_vec()).unwrap();
    let l = second_quantization(&space, &h).unwrap();
    c.bench_function("heat_semigroup_8", |b| b.iter(|| HeatSemigroup::new(black_box(&l))));
}

fn schur(c: &mut Criterion) {
    let space = PartitionSpace::new(10);
    c.bench_function("transition_matrix_10", |b| b.iter(|| transition_matrix(black_box(&space), 1.0, 0.25)));
}

criterion_group!(benches, kernels, sampling, fock, schur);
criterion_main!(benches);
