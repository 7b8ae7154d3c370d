use detproc::fock::*;
use detproc::kernels::{dynamical_correlation, fermi_kernel, space_time_kernel, SpaceTimePoint};
use detproc::linalg::{determinant, eig_sym, Matrix, SymmetricOperator};
use detproc::orthopoly::{difference_operator, registry, FamilySpec, Lattice, SiteWindow};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_h(m: usize, rng: &mut ChaCha8Rng) -> SymmetricOperator {
    let mut a = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = rng.random::<f64>() * 2.0 - 1.0;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    SymmetricOperator::from_matrix(a).unwrap()
}

fn charlier_h(m: usize) -> SymmetricOperator {
    let f = FamilySpec::Charlier { mu: 2.0 };
    let w = SiteWindow::new(Lattice::NonNegative, 0.0, (m - 1) as f64).unwrap();
    difference_operator(&f, &w).unwrap().affine(-1.0, -2.5)
}

#[test]
fn car_relations() {
    for m in 1..=6 {
        let space = FockSpace::with_sites(m).unwrap();
        let car = car_operators(&space);
        let id = Matrix::identity(space.dim());
        for x in 0..m {
            for y in 0..m {
                let aa = car.annihilation[x].anticommutator(&car.annihilation[y]);
                assert_eq!(aa.max_abs(), 0.0);
                let ca = car.creation[x].anticommutator(&car.annihilation[y]);
                let want = if x == y { id.clone() } else { Matrix::zeros(space.dim(), space.dim()) };
                assert_eq!(ca.max_abs_diff(&want), 0.0);
            }
            let rho = &car.number[x].matrix;
            assert!(rho.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }
}

#[test]
fn smeared_car_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let space = FockSpace::with_sites(4).unwrap();
    let car = car_operators(&space);
    let h: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
    let k: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
    let ip: f64 = h.iter().zip(&k).map(|(a, b)| a * b).sum();
    let anti = car.create(&h).anticommutator(&car.annihilate(&k));
    assert!(anti.max_abs_diff(&Matrix::identity(16).scale(ip)) < 1e-12);
}

#[test]
fn second_quantization_examples() {
    let space = FockSpace::with_sites(3).unwrap();
    let h = SymmetricOperator::from_matrix(Matrix::from_diag(&[0.5, -1.0, 2.0])).unwrap();
    let l = second_quantization(&space, &h).unwrap();
    for s in 0..8 {
        let want: f64 = (0..3).filter(|x| s & (1 << x) != 0).map(|x| h.get(x, x)).sum();
        assert_eq!(l.matrix[(s, s)], want);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = random_h(4, &mut rng);
    let space = FockSpace::with_sites(4).unwrap();
    let l = second_quantization(&space, &h).unwrap();
    let one: Vec<usize> = (0..4).map(|x| 1 << x).collect();
    assert_eq!(l.matrix.select(&one, &one).max_abs_diff(h.matrix()), 0.0);
    assert_eq!(l.matrix[(0, 0)], 0.0);
    let ev = eig_sym(&h).unwrap().eigenvalues;
    let mut sums: Vec<f64> = (0..16usize)
        .map(|s| (0..4).filter(|x| s & (1 << x) != 0).map(|x| ev[x]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    let got = detproc::linalg::eig_sym(&SymmetricOperator::from_matrix(l.matrix.clone()).unwrap())
        .unwrap()
        .eigenvalues;
    for (a, b) in sums.iter().zip(&got) {
        assert!((a - b).abs() < 1e-9);
    }
    let wrong = FockSpace::with_sites(3).unwrap();
    assert!(second_quantization(&wrong, &h).is_err());
}

#[test]
fn gibbs_two_point_function_is_the_fermi_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_h(4, &mut rng);
    let beta = 1.7;
    let space = FockSpace::with_sites(4).unwrap();
    let car = car_operators(&space);
    let l = second_quantization(&space, &h).unwrap();
    let k = fermi_kernel(&h, beta).unwrap();
    assert!((gibbs_expectation(&l, beta, &FockOperator::identity(&space)).unwrap() - 1.0).abs() < 1e-14);
    for x in 0..4 {
        for y in 0..4 {
            let op = car.creation[x].mul(&car.annihilation[y]);
            let v = gibbs_expectation(&l, beta, &op).unwrap();
            assert!((v - k.get(x, y)).abs() < 1e-10);
        }
    }
}

#[test]
fn schwinger_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_h(3, &mut rng);
    let space = FockSpace::with_sites(3).unwrap();
    let l = second_quantization(&space, &h).unwrap();
    let car = car_operators(&space);
    let beta = 2.0;
    let id = FockOperator::identity(&space);
    let s = schwinger(&l, beta, &[id.clone(), id.clone(), id], &[-0.5, 0.1, 0.9]).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    let a = car.number[1].clone();
    let g = gibbs_expectation(&l, beta, &a).unwrap();
    for t in [-1.0, 0.0, 0.4] {
        assert!((schwinger(&l, beta, std::slice::from_ref(&a), &[t]).unwrap() - g).abs() < 1e-12);
    }
    let r = space_time_kernel(&h, beta).unwrap();
    let (t, s) = (-0.6, 0.3);
    let two = schwinger(&l, beta, &[car.number[0].clone(), car.number[2].clone()], &[t, s]).unwrap();
    let det = dynamical_correlation(&r, &[SpaceTimePoint::new(0, t), SpaceTimePoint::new(2, s)]).unwrap();
    assert!((two - det).abs() < 1e-10);
    assert!(schwinger(&l, beta, &[car.number[0].clone(), car.number[1].clone()], &[0.3, 0.1]).is_err());
}

#[test]
fn trace_equals_determinant_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..60 {
        let m = 2 + case % 5;
        let h = random_h(m, &mut rng);
        let beta = if case % 2 == 0 { 0.5 } else { 2.0 };
        let space = FockSpace::with_sites(m).unwrap();
        let car = car_operators(&space);
        let sg = HeatSemigroup::new(&second_quantization(&space, &h).unwrap()).unwrap();
        let r = space_time_kernel(&h, beta).unwrap();
        let n = 1 + case % 4;
        let mut times: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * beta).collect();
        times.sort_by(f64::total_cmp);
        let sites: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
        let ops: Vec<FockOperator> = sites.iter().map(|&x| car.number[x].clone()).collect();
        let tr = schwinger_with(&sg, beta, &ops, &times).unwrap();
        let pts: Vec<SpaceTimePoint> = sites.iter().zip(&times).map(|(&x, &t)| SpaceTimePoint::new(x, t)).collect();
        let det = dynamical_correlation(&r, &pts).unwrap();
        assert!((tr - det).abs() < 1e-9, "case {case}: {tr} vs {det}");
    }
}

#[test]
fn block_determinant_for_mixed_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..6 {
        let m = 3 + case % 3;
        let n = 1 + case % 3;
        let h = random_h(m, &mut rng);
        let beta = 1.5;
        let space = FockSpace::with_sites(m).unwrap();
        let car = car_operators(&space);
        let sg = HeatSemigroup::new(&second_quantization(&space, &h).unwrap()).unwrap();
        let vecs = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..n).map(|_| (0..m).map(|_| rng.random::<f64>() - 0.5).collect()).collect()
        };
        let hs = vecs(&mut rng);
        let ks = vecs(&mut rng);
        let mut times: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * beta).collect();
        times.sort_by(f64::total_cmp);
        let ops: Vec<FockOperator> = (0..n).map(|i| car.create(&hs[i]).mul(&car.annihilate(&ks[i]))).collect();
        let lhs = schwinger_with(&sg, beta, &ops, &times).unwrap();
        let b = Matrix::from_fn(n, n, |i, j| {
            if i <= j {
                schwinger_with(&sg, beta, &[car.create(&hs[i]), car.annihilate(&ks[j])], &[times[i], times[j]]).unwrap()
            } else {
                -schwinger_with(&sg, beta, &[car.annihilate(&ks[j]), car.create(&hs[i])], &[times[j], times[i]]).unwrap()
            }
        });
        assert!((lhs - determinant(&b)).abs() < 1e-9, "case {case}");
    }
}

#[test]
fn certificates() {
    let grid = [0.1, 0.5, 1.0, 2.0];
    for (f, w) in registry() {
        let d = difference_operator(&f, &w).unwrap();
        let rep = positivity_certificate(&d.affine(-1.0, 0.0), 2.0, &grid).unwrap();
        assert!(rep.pass, "{}", f.name());
    }
    let h = SymmetricOperator::from_matrix(Matrix::from_diag(&[0.3, -2.0, 1.0, 4.0])).unwrap();
    assert!(positivity_certificate(&h, 2.0, &grid).unwrap().pass);
    let chain = charlier_h(5);
    let mut flipped = chain.matrix().clone();
    flipped[(2, 3)] = -flipped[(2, 3)];
    flipped[(3, 2)] = -flipped[(3, 2)];
    let flipped = SymmetricOperator::new(flipped, chain.sites().to_vec()).unwrap();
    let a = positivity_certificate(&chain, 2.0, &grid).unwrap();
    let b = positivity_certificate(&flipped, 2.0, &grid).unwrap();
    assert!(a.pass && b.pass);
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert!((ra.min_minor_value - rb.min_minor_value).abs() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let frustrated = SymmetricOperator::from_matrix(Matrix::from_rows(&[
        vec![0.0, 1.0, 1.0],
        vec![1.0, 0.0, 1.0],
        vec![1.0, 1.0, 0.0],
    ]))
    .unwrap();
    let _ = random_h(2, &mut rng);
    let rep = positivity_certificate(&frustrated, 2.0, &grid).unwrap();
    assert!(!rep.pass);
    assert!(matches!(path_law(&frustrated, 2.0, &[0.0]), Err(detproc::Error::Validity(_))));
}

#[test]
fn single_time_law_is_the_static_process() {
    let h = charlier_h(3);
    let beta = 2.0;
    let law = path_law(&h, beta, &[0.0]).unwrap();
    let k = fermi_kernel(&h, beta).unwrap();
    let paths = law.enumerate().unwrap();
    let total: f64 = paths.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for x in 0..3 {
        let rho: f64 = paths.iter().filter(|(p, _)| p[0] & (1 << x) != 0).map(|(_, p)| p).sum();
        assert!((rho - k.get(x, x)).abs() < 1e-10);
    }
    assert!((law.normalizer() / law.z - 1.0).abs() < 1e-10);
}

#[test]
fn path_law_matches_determinants() {
    let h = charlier_h(3);
    let beta = 2.0;
    let grid = [-0.6, 0.1, 0.8];
    let law = path_law(&h, beta, &grid).unwrap();
    let r = space_time_kernel(&h, beta).unwrap();
    let paths = law.enumerate().unwrap();
    assert!((paths.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
    for (x, y) in [(0, 1), (2, 2), (1, 0)] {
        let p: f64 = paths
            .iter()
            .filter(|(w, _)| w[0] & (1 << x) != 0 && w[2] & (1 << y) != 0)
            .map(|(_, p)| p)
            .sum();
        let d = dynamical_correlation(&r, &[SpaceTimePoint::new(x, grid[0]), SpaceTimePoint::new(y, grid[2])]).unwrap();
        assert!((p - d).abs() < 1e-10);
    }
}

#[test]
fn time_reversal_symmetry() {
    let h = charlier_h(4);
    let law = path_law(&h, 2.0, &[-0.5, 0.5]).unwrap();
    for (p, v) in law.enumerate().unwrap() {
        assert!((law.probability(&[p[1], p[0]]) - v).abs() < 1e-12);
    }
}

#[test]
fn two_sided_markov_factorization() {
    let h = charlier_h(3);
    let law = path_law(&h, 2.0, &[-0.7, -0.1, 0.6]).unwrap();
    let paths = law.enumerate().unwrap();
    let dim = 8;
    let mut joint = vec![0.0; dim * dim * dim];
    for (p, v) in &paths {
        joint[(p[0] * dim + p[1]) * dim + p[2]] += v;
    }
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for c in 0..dim {
            let ends: f64 = (0..dim).map(|b| joint[(a * dim + b) * dim + c]).sum();
            if ends <= 0.0 {
                continue;
            }
            let bridge = law.transfers()[0].matmul(&law.transfers()[1]);
            for b in 0..dim {
                let cond = joint[(a * dim + b) * dim + c] / ends;
                let want = law.transfers()[0][(a, b)] * law.transfers()[1][(b, c)] / bridge[(a, c)];
                worst = worst.max((cond - want).abs());
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn stationarity_under_grid_shift() {
    let h = charlier_h(3);
    let beta = 2.0;
    let a = path_law(&h, beta, &[-0.7, -0.1, 0.6]).unwrap();
    let b = path_law(&h, beta, &[-0.4, 0.2, 0.9]).unwrap();
    // shifting by 0.5 pushes 0.6 past β/2, so it wraps to −0.9 and leads
    let c = path_law(&h, beta, &[-0.9, -0.2, 0.4]).unwrap();
    for (p, v) in a.enumerate().unwrap() {
        assert!((b.probability(&p) - v).abs() < 1e-10);
        assert!((c.probability(&[p[2], p[0], p[1]]) - v).abs() < 1e-10);
    }
}

#[test]
fn sampler_is_deterministic_and_unbiased() {
    let h = charlier_h(3);
    let law = path_law(&h, 2.0, &[-0.3, 0.4]).unwrap();
    let a = sample_trajectory(&law, 42, 1000);
    let b = sample_trajectory(&law, 42, 1000);
    assert_eq!(a, b);
    let draws = 100_000;
    let samples = sample_trajectory(&law, 7, draws);
    let mut counts = vec![0usize; 64];
    for s in &samples {
        counts[s[0] * 8 + s[1]] += 1;
    }
    for (p, v) in law.enumerate().unwrap() {
        let f = counts[p[0] * 8 + p[1]] as f64 / draws as f64;
        let sigma = (v * (1.0 - v) / draws as f64).sqrt();
        assert!((f - v).abs() <= 4.0 * sigma + 1e-12, "{p:?}: {f} vs {v}");
    }
    let k = fermi_kernel(&h, 2.0).unwrap();
    for x in 0..3 {
        let f = samples.iter().filter(|s| s[1] & (1 << x) != 0).count() as f64 / draws as f64;
        let v = k.get(x, x);
        assert!((f - v).abs() <= 4.0 * (v * (1.0 - v) / draws as f64).sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn car_relations_hold_on_random_windows(m in 1usize..=8, x in 0usize..8, y in 0usize..8) {
        let (x, y) = (x % m, y % m);
        let space = FockSpace::with_sites(m).unwrap();
        let car = car_operators(&space);
        let ca = car.creation[x].anticommutator(&car.annihilation[y]);
        let want = if x == y { Matrix::identity(space.dim()) } else { Matrix::zeros(space.dim(), space.dim()) };
        prop_assert!(ca.max_abs_diff(&want) <= 1e-12);
        prop_assert!(car.creation[x].anticommutator(&car.creation[y]).max_abs() <= 1e-12);
    }
}
