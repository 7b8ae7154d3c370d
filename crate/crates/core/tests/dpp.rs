use detproc::dpp::*;
use detproc::kernels::{cd_kernel, fermi_kernel, CorrelationKernel, KernelKind};
use detproc::linalg::{Matrix, SymmetricOperator};
use detproc::orthopoly::*;

fn kernel(m: Matrix, kind: KernelKind) -> CorrelationKernel {
    let n = m.rows();
    CorrelationKernel::new(m, (0..n).map(|x| x as f64).collect(), kind).unwrap()
}

#[test]
fn trivial_kernels() {
    let zero = kernel(Matrix::zeros(4, 4), KernelKind::Custom);
    assert!(sample_dpp(&zero, 1, 50).unwrap().iter().all(|c| c.count() == 0));
    let one = kernel(Matrix::identity(4), KernelKind::Projection);
    assert!(sample_dpp(&one, 1, 50).unwrap().iter().all(|c| c.count() == 4));
    let bad = kernel(Matrix::identity(3).scale(1.1), KernelKind::Custom);
    assert!(sample_dpp(&bad, 1, 1).is_err());
}

#[test]
fn projection_samples_have_fixed_size() {
    let f = FamilySpec::Charlier { mu: 3.0 };
    let w = SiteWindow::auto(&f).unwrap();
    let t = polynomial_table(&f, &w, 4).unwrap();
    let k = cd_kernel(&t).unwrap();
    let s = sample_dpp(&k, 3, 500).unwrap();
    assert!(s.iter().all(|c| c.count() == 4));
    assert_eq!(sample_dpp(&k, 3, 20).unwrap(), s[..20].to_vec());
    for pts in [vec![2usize], vec![1, 4], vec![3, 3]] {
        let est = estimate_correlations(&s, &pts).unwrap();
        let want = k.correlation(&pts);
        assert!((est.value - want).abs() <= 4.0 * est.stderr + 1e-12, "{pts:?}");
    }
}

#[test]
fn estimator_edge_cases() {
    let one = kernel(Matrix::identity(3), KernelKind::Projection);
    let s = sample_dpp(&one, 9, 10).unwrap();
    let e = estimate_correlations(&s, &[]).unwrap();
    assert_eq!((e.value, e.stderr), (1.0, 0.0));
    assert_eq!(estimate_correlations(&s, &[0, 2]).unwrap().value, 1.0);
    assert_eq!(estimate_correlations(&s, &[1, 1]).unwrap().value, 0.0);
}

#[test]
fn diagonal_l_ensemble_is_independent() {
    let l = [0.5, 2.0, 0.1];
    let op = SymmetricOperator::from_matrix(Matrix::from_diag(&l)).unwrap();
    let law = l_ensemble_law(&op).unwrap();
    for (mask, p) in law.iter().enumerate() {
        let mut want = 1.0;
        for (x, lx) in l.iter().enumerate() {
            want *= if mask & (1 << x) != 0 { lx / (1.0 + lx) } else { 1.0 / (1.0 + lx) };
        }
        assert!((p - want).abs() < 1e-14);
    }
    for (x, lx) in l.iter().enumerate() {
        assert!((enumerate_correlations(&law, &[x]).unwrap() - lx / (1.0 + lx)).abs() < 1e-14);
    }
}

#[test]
fn l_ensemble_is_the_fermi_process() {
    let h = SymmetricOperator::tridiagonal(&[0.3, -0.5, 0.8, 0.1], &[-0.4, -0.7, -0.2], (0..4).map(|x| x as f64).collect())
        .unwrap();
    let beta = 1.2;
    let l = detproc::linalg::apply_spectral_function(
        &detproc::linalg::eig_sym(&h).unwrap(),
        &detproc::linalg::SpectralFunction::Exp(-beta),
        h.sites(),
    )
    .unwrap();
    let law = l_ensemble_law(&l).unwrap();
    assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let k = fermi_kernel(&h, beta).unwrap();
    for x in 0..4 {
        for y in 0..4 {
            let e = enumerate_correlations(&law, &[x, y]).unwrap();
            assert!((e - k.correlation(&[x, y])).abs() < 1e-12);
            assert!(e <= enumerate_correlations(&law, &[x]).unwrap() + 1e-15);
        }
    }
}

#[test]
fn op_ensembles_match_cd_determinants() {
    for (f, _) in registry() {
        let w = SiteWindow::auto(&f).unwrap();
        let w = if w.len() > 40 { SiteWindow::new(w.lattice, w.lo, w.lo + 39.0).unwrap() } else { w };
        let n = 3;
        let e = OpEnsemble::new(&f, &w, n).unwrap();
        let law = e.law();
        assert!((law.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
        let k = cd_kernel(&polynomial_table(&f, &w, n).unwrap()).unwrap();
        let len = w.len().min(12);
        for x in 0..len {
            let r1 = subset_correlation(&law, &[x]);
            assert!((r1 - k.get(x, x)).abs() < 1e-8, "{} x={x}", f.name());
            for y in 0..x {
                let r2 = subset_correlation(&law, &[y, x]);
                assert!((r2 - k.correlation(&[y, x])).abs() < 1e-8, "{}", f.name());
                assert!(r2 <= k.get(x, x) * k.get(y, y) + 1e-12);
            }
        }
    }
}

#[test]
fn op_ensemble_probability_contract() {
    let f = FamilySpec::Krawtchouk { m: 4, p: 0.5 };
    let e = OpEnsemble::new(&f, &SiteWindow::full(4), 2).unwrap();
    let ens = Ensemble::Op(&e);
    let wrong = Configuration::new(5, vec![1]).unwrap();
    assert_eq!(ensemble_probability(&ens, &wrong).unwrap(), 0.0);
    let law = e.law();
    let k = cd_kernel(&polynomial_table(&f, &SiteWindow::full(4), 2).unwrap()).unwrap();
    for x in 0..5 {
        for y in 0..x {
            assert!((subset_correlation(&law, &[y, x]) - k.correlation(&[y, x])).abs() < 1e-10);
        }
    }
    let big = SiteWindow::new(Lattice::NonNegative, 0.0, 400.0).unwrap();
    assert!(matches!(
        OpEnsemble::new(&FamilySpec::Charlier { mu: 1.0 }, &big, 4),
        Err(detproc::Error::Size(_))
    ));
}

#[test]
fn sampler_matches_exact_law_on_small_windows() {
    let h = SymmetricOperator::tridiagonal(&[0.2, -0.4, 0.6, -0.1], &[-0.5, -0.3, -0.8], (0..4).map(|x| x as f64).collect())
        .unwrap();
    let k = fermi_kernel(&h, 1.0).unwrap();
    let l = detproc::linalg::apply_spectral_function(
        &detproc::linalg::eig_sym(&h).unwrap(),
        &detproc::linalg::SpectralFunction::Exp(-1.0),
        h.sites(),
    )
    .unwrap();
    let law = l_ensemble_law(&l).unwrap();
    let draws = 100_000;
    let samples = sample_dpp(&k, 2024, draws).unwrap();
    let mut counts = [0.0; 16];
    for s in &samples {
        counts[s.mask().unwrap()] += 1.0;
    }
    // Pearson statistic on 15 degrees of freedom; 1e-4 tail is about 44.3
    let chi2: f64 = counts
        .iter()
        .zip(&law)
        .map(|(c, p)| (c - p * draws as f64).powi(2) / (p * draws as f64))
        .sum();
    assert!(chi2 < 44.3, "{chi2}");
}
