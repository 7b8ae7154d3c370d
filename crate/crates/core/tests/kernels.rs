use detproc::kernels::*;
use detproc::linalg::{Matrix, SymmetricOperator};
use detproc::orthopoly::*;
use proptest::prelude::*;

fn diag(d: &[f64]) -> SymmetricOperator {
    SymmetricOperator::from_matrix(Matrix::from_diag(d)).unwrap()
}

fn random_symmetric(n: usize, entries: &[f64]) -> SymmetricOperator {
    let mut m = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            m[(i, j)] = entries[k % entries.len()];
            m[(j, i)] = m[(i, j)];
            k += 1;
        }
    }
    SymmetricOperator::from_matrix(m).unwrap()
}

#[test]
fn fermi_kernel_examples() {
    let k = fermi_kernel(&diag(&[-1.0, 1.0]), 3f64.ln()).unwrap();
    assert!((k.get(0, 0) - 0.75).abs() < 1e-15);
    assert!((k.get(1, 1) - 0.25).abs() < 1e-15);
    let h = random_symmetric(5, &[0.3, -1.2, 0.8, 2.0, -0.4, 0.1, 0.9]);
    let minus = SymmetricOperator::from_matrix(h.matrix().scale(-1.0)).unwrap();
    let t = fermi_kernel(&h, 1.7).unwrap().values.trace() + fermi_kernel(&minus, 1.7).unwrap().values.trace();
    assert!((t - 5.0).abs() < 1e-12);
}

#[test]
fn projection_examples() {
    let k = negative_projection(&diag(&[-2.0, -1.0, 3.0])).unwrap();
    assert!(k.values.max_abs_diff(&Matrix::from_diag(&[1.0, 1.0, 0.0])) < 1e-15);
    let k = negative_projection(&diag(&[1.0, 2.0])).unwrap();
    assert_eq!(k.values.max_abs(), 0.0);
}

#[test]
fn fermi_approaches_projection_at_the_gap_rate() {
    let h = random_symmetric(6, &[0.3, -1.2, 0.8, 2.0, -0.4, 0.1, 0.9, 1.7]);
    let dec = detproc::linalg::eig_sym(&h).unwrap();
    let gap = dec.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let p = negative_projection(&h).unwrap();
    for beta in [5.0 / gap, 8.0 / gap, 12.0 / gap] {
        let k = fermi_kernel(&h, beta).unwrap();
        assert!(k.values.max_abs_diff(&p.values) <= (-beta * gap).exp());
    }
}

#[test]
fn cd_kernel_examples() {
    let w = SiteWindow::new(Lattice::NonNegative, 0.0, 30.0).unwrap();
    let t = polynomial_table(&FamilySpec::Charlier { mu: 1.5 }, &w, 1).unwrap();
    let k = cd_kernel(&t).unwrap();
    assert!((k.get(0, 0) - (-1.5f64).exp()).abs() < 1e-13);
    let t = polynomial_table(&FamilySpec::Krawtchouk { m: 4, p: 0.5 }, &SiteWindow::full(4), 5).unwrap();
    assert!(cd_kernel(&t).unwrap().values.max_abs_diff(&Matrix::identity(5)) < 1e-10);
    for (f, _) in registry() {
        let w = SiteWindow::auto(&f).unwrap();
        let t = polynomial_table(&f, &w, 3).unwrap();
        let k = cd_kernel(&t).unwrap();
        assert!(k.idempotence_residual() <= 1e-8, "{}", f.name());
        assert!((k.values.trace() - 3.0).abs() <= 3e-6);
    }
}

#[test]
fn hermite_integral_kernel_examples() {
    let full = integral_kernel(&FamilySpec::Hermite, Interval::Full, 12, f64::INFINITY).unwrap();
    assert!(full.values.max_abs_diff(&Matrix::identity(12)) < 1e-10);
    let half = integral_kernel(&FamilySpec::Hermite, Interval::Above(0.0), 12, f64::INFINITY).unwrap();
    assert!((half.get(0, 0) - 0.5).abs() < 1e-12);
    half.check_spectrum(1e-6).unwrap();
}

#[test]
fn jacobi_integral_kernel_is_complete_on_the_support() {
    let f = FamilySpec::Jacobi { a: -0.5, b: 0.5 };
    let k = integral_kernel(&f, Interval::Full, 10, f64::INFINITY).unwrap();
    assert!(k.values.max_abs_diff(&Matrix::identity(10)) < 1e-9);
    let a = integral_kernel(&f, Interval::Below(0.2), 10, f64::INFINITY).unwrap();
    let b = integral_kernel(&f, Interval::Above(0.2), 10, f64::INFINITY).unwrap();
    assert!(a.values.add(&b.values).max_abs_diff(&Matrix::identity(10)) < 1e-9);
}

#[test]
fn laguerre_interval_matches_thermal_dual() {
    let r = 2.0;
    let lag = FamilySpec::Laguerre { c: 1.0 };
    let sharp = integral_kernel(&lag, Interval::Between(0.0, r), 10, f64::INFINITY).unwrap();
    let mut last = f64::INFINITY;
    for (beta, dim) in [(5.0, 60), (10.0, 120), (20.0, 240), (40.0, 480)] {
        let h = jacobi_operator(&lag, dim).unwrap().affine(1.0, -r);
        let k = fermi_kernel(&h, beta).unwrap();
        let err = (0..10)
            .flat_map(|i| (0..10).map(move |j| (i, j)))
            .map(|(i, j)| (k.get(i, j) - sharp.get(i, j)).abs())
            .fold(0.0, f64::max);
        assert!(err < last, "beta {beta}: {err} vs {last}");
        last = err;
    }
    assert!(last < 1e-3, "{last}");
    // s(T−r)s carries the same kernel up to the sign gauge
    let h = jacobi_operator(&lag, 120).unwrap().affine(1.0, -r);
    let flipped = fermi_kernel(&sign_flip(&h), 10.0).unwrap();
    let k = fermi_kernel(&h, 10.0).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((flipped.get(i, j) - s * k.get(i, j)).abs() < 1e-12);
        }
    }
    let smooth = integral_kernel(&lag, Interval::Below(r), 10, 5.0).unwrap();
    let h = jacobi_operator(&lag, 240).unwrap().affine(1.0, -r);
    let k = fermi_kernel(&h, 5.0).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            assert!((smooth.get(i, j) - k.get(i, j)).abs() < 1e-5);
        }
    }
}

#[test]
fn space_time_examples() {
    let h = diag(&[-1.0, 1.0]);
    let r = space_time_kernel(&h, f64::INFINITY).unwrap();
    for u in [0.0, 0.3, 2.0] {
        assert!((r.eval(0, 0.0, 0, u).unwrap() - (-u).exp()).abs() < 1e-15);
    }
    let r = space_time_kernel(&h, 3f64.ln()).unwrap();
    assert!((r.eval(1, 3f64.ln(), 1, 0.0).unwrap() + 0.25).abs() < 1e-15);
    assert!(matches!(r.eval(0, 0.0, 0, 2.0), Err(detproc::Error::Domain(_))));
}

#[test]
fn equal_time_and_single_point_cases() {
    let h = random_symmetric(5, &[0.3, -1.2, 0.8, 2.0, -0.4, 0.1, 0.9]);
    let beta = 1.3;
    let r = space_time_kernel(&h, beta).unwrap();
    let k = fermi_kernel(&h, beta).unwrap();
    let pts: Vec<SpaceTimePoint> = [0, 2, 3].iter().map(|&x| SpaceTimePoint::new(x, 0.2)).collect();
    let lhs = dynamical_correlation(&r, &pts).unwrap();
    assert!((lhs - k.correlation(&[0, 2, 3])).abs() <= 1e-12);
    let one = dynamical_correlation(&r, &[SpaceTimePoint::new(4, -0.3)]).unwrap();
    assert!((one - k.get(4, 4)).abs() <= 1e-12);
    let dup = [SpaceTimePoint::new(1, 0.1), SpaceTimePoint::new(1, 0.1)];
    assert_eq!(dynamical_correlation(&r, &dup).unwrap(), 0.0);
    let unsorted = [SpaceTimePoint::new(1, 0.3), SpaceTimePoint::new(2, 0.1)];
    assert!(matches!(dynamical_correlation(&r, &unsorted), Err(detproc::Error::Precondition(_))));
}

#[test]
fn zero_temperature_limit_rate() {
    let base = detproc::linalg::eig_sym(&random_symmetric(5, &[1.9, -0.3, 0.4, -1.6, 0.2, 0.5, 2.4])).unwrap();
    let v = &base.eigenvectors;
    let lam = [-3.0, -1.5, 1.6, 2.2, 4.0];
    let h = SymmetricOperator::from_matrix(Matrix::from_fn(5, 5, |i, j| {
        let s: f64 = (0..5).map(|k| v[(i, k)] * lam[k] * v[(j, k)]).sum();
        s
    }))
    .unwrap();
    let h = SymmetricOperator::from_matrix(Matrix::from_fn(5, 5, |i, j| 0.5 * (h.get(i, j) + h.get(j, i)))).unwrap();
    let rinf = space_time_kernel(&h, f64::INFINITY).unwrap();
    let dec = detproc::linalg::eig_sym(&h).unwrap();
    let gap = dec.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let grid = [-0.5, 0.0, 0.5];
    let err = |beta: f64| {
        let rb = space_time_kernel(&h, beta).unwrap();
        let mut e: f64 = 0.0;
        for x in 0..5 {
            for y in 0..5 {
                for &t in &grid {
                    for &s in &grid {
                        e = e.max((rb.value(x, t, y, s) - rinf.value(x, t, y, s)).abs());
                    }
                }
            }
        }
        e
    };
    let betas = [2.0, 4.0, 8.0, 16.0];
    for w in betas.windows(2) {
        let ratio = err(w[1]) / err(w[0]);
        assert!(ratio <= 1.1 * (-gap * (w[1] - w[0])).exp(), "{ratio}");
    }
}

#[test]
fn op_ensemble_eigen_sum_matches_spectral_route() {
    let f = FamilySpec::Krawtchouk { m: 8, p: 0.3 };
    let w = SiteWindow::full(8);
    let t = polynomial_table(&f, &w, 9).unwrap();
    let mu = 3.5;
    let beta = 1.5;
    let d = difference_operator(&f, &w).unwrap();
    let h = d.affine(-1.0, -mu);
    let spectral = space_time_kernel(&h, beta).unwrap();
    let eigen = op_space_time_kernel(&t, mu, beta).unwrap();
    for (t0, s0) in [(-0.5, 0.3), (0.4, -0.2), (0.0, 0.0)] {
        for x in 0..9 {
            for y in 0..9 {
                let a = spectral.value(x, t0, y, s0);
                let b = eigen.value(x, t0, y, s0);
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }
    let f = FamilySpec::Charlier { mu: 2.0 };
    let w = SiteWindow::new(Lattice::NonNegative, 0.0, 80.0).unwrap();
    let t = polynomial_table(&f, &w, 40).unwrap();
    let h = difference_operator(&f, &w).unwrap().affine(-1.0, -mu);
    let spectral = space_time_kernel(&h, beta).unwrap();
    let eigen = op_space_time_kernel(&t, mu, beta).unwrap();
    for (t0, s0) in [(-0.3, 0.3), (0.3, -0.2)] {
        for x in 0..20 {
            for y in 0..20 {
                let a = spectral.value(x, t0, y, s0);
                let b = eigen.value(x, t0, y, s0);
                assert!((a - b).abs() < 1e-9, "{x} {y}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn zero_temperature_op_kernel_is_a_conjugate() {
    // determinants agree although the entries differ by a gauge
    let f = FamilySpec::Krawtchouk { m: 6, p: 0.4 };
    let w = SiteWindow::full(6);
    let t = polynomial_table(&f, &w, 7).unwrap();
    let n_levels = 3.0;
    let eig = op_space_time_kernel(&t, n_levels - 0.5, f64::INFINITY).unwrap();
    let d = difference_operator(&f, &w).unwrap();
    let spec = space_time_kernel(&d.affine(-1.0, -(n_levels - 0.5)), f64::INFINITY).unwrap();
    let pts = [SpaceTimePoint::new(1, -0.4), SpaceTimePoint::new(3, 0.1), SpaceTimePoint::new(2, 0.6)];
    let a = dynamical_correlation(&eig, &pts).unwrap();
    let b = dynamical_correlation(&spec, &pts).unwrap();
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn ladder_kernels_converge() {
    for regime in LimitRegime::ALL {
        let mut last = f64::INFINITY;
        for k in 0..LADDER_RUNGS {
            let rung = regime.rung(k).unwrap();
            let a = fermi_kernel(&rung.scaled.affine(-1.0, 0.0), 1.0).unwrap();
            let b = fermi_kernel(&rung.target.affine(-1.0, 0.0), 1.0).unwrap();
            let (lo, hi) = central_third(LADDER_WINDOW);
            let mut e: f64 = 0.0;
            for i in lo..hi {
                for j in lo..hi {
                    e = e.max((a.get(i, j) - b.get(i, j)).abs());
                }
            }
            assert!(e < last, "{} rung {k}: {e} vs {last}", regime.name());
            last = e;
        }
    }
}

proptest! {
    #[test]
    fn time_reflection_symmetry(entries in prop::collection::vec(-2.0f64..2.0, 10), t in -0.5f64..0.5, s in -0.5f64..0.5, beta in 1.0f64..3.0) {
        let h = random_symmetric(4, &entries);
        let r = space_time_kernel(&h, beta).unwrap();
        let (t, s) = if t <= s { (t, s) } else { (s, t) };
        for x in 0..4 {
            for y in 0..4 {
                let a = r.value(x, t, y, s);
                let b = r.value(y, -s, x, -t);
                prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn fermi_kernel_spectrum_in_unit_interval(entries in prop::collection::vec(-5.0f64..5.0, 15), beta in 0.1f64..50.0) {
        let h = random_symmetric(5, &entries);
        let k = fermi_kernel(&h, beta).unwrap();
        prop_assert!(k.check_spectrum(1e-8).is_ok());
    }
}
