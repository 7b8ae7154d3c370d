use std::collections::HashSet;

use detproc::dpp::{l_ensemble_law, sample_dpp, Configuration, OpEnsemble};
use detproc::fock::{
    bitstring, car_operators, path_law, positivity_certificate, sample_trajectory, schwinger_with,
    second_quantization, FockOperator, FockSpace, HeatSemigroup,
};
use detproc::kernels::{
    cd_kernel, dynamical_correlation, fermi_kernel, negative_projection, space_time_kernel, CorrelationKernel,
    SpaceTimePoint,
};
use detproc::linalg::{apply_spectral_function, eig_sym, Matrix, SpectralFunction, SymmetricOperator};
use detproc::orthopoly::{difference_operator, polynomial_table, SiteWindow};
use detproc::schur::{
    cylindric_path_law, maya_configuration, sample_cylindric, semigroup_residual, transition_matrix,
    PartitionSpace,
};
use detproc::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{list, num, Csv};

const VERIFY_TOLERANCE: f64 = 1e-9;

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment {
        Experiment::Kernel => kernel(cfg),
        Experiment::Ensemble => ensemble(cfg),
        Experiment::Sample => sample(cfg),
        Experiment::Dynamics => dynamics(cfg),
        Experiment::Verify => verify(cfg),
        Experiment::Limits => limits(cfg),
        Experiment::Cylindric => cylindric(cfg),
    }
}

/// H = −(D + μ) on the configured window.
fn hamiltonian(cfg: &ExperimentConfig) -> Result<(SiteWindow, SymmetricOperator)> {
    let window = cfg.site_window()?;
    let d = difference_operator(cfg.family.as_ref().expect("family checked"), &window)?;
    Ok((window, d.affine(-1.0, -cfg.mu)))
}

fn static_kernel(h: &SymmetricOperator, beta: f64) -> Result<CorrelationKernel> {
    if beta.is_infinite() {
        negative_projection(h)
    } else {
        fermi_kernel(h, beta)
    }
}

fn site_indices(cfg: &ExperimentConfig, window: &SiteWindow) -> Result<Vec<usize>> {
    match &cfg.sites {
        None => Ok((0..window.len()).collect()),
        Some(s) => s
            .iter()
            .map(|&x| window.index_of(x).ok_or_else(|| Error::Config(format!("sites entry {x} is not in the window"))))
            .collect(),
    }
}

fn write_kernel(cfg: &ExperimentConfig, k: &CorrelationKernel) -> Result<()> {
    let mut csv = Csv::create(&cfg.out_dir, "kernel.csv", "x,y,value")?;
    for i in 0..k.dim() {
        for j in 0..k.dim() {
            csv.row(&[num(k.sites[i]), num(k.sites[j]), num(k.get(i, j))])?;
        }
    }
    csv.finish()
}

fn kernel(cfg: &ExperimentConfig) -> Result<()> {
    let (window, h) = hamiltonian(cfg)?;
    let beta = cfg.beta.expect("beta checked");
    write_kernel(cfg, &static_kernel(&h, beta)?)?;
    if let Some(times) = &cfg.times {
        let r = space_time_kernel(&h, beta)?;
        let idx = site_indices(cfg, &window)?;
        let sites = window.sites();
        let mut csv = Csv::create(&cfg.out_dir, "spacetime.csv", "x,t,y,s,value")?;
        for &x in &idx {
            for &t in times {
                for &y in &idx {
                    for &s in times {
                        csv.row(&[num(sites[x]), num(t), num(sites[y]), num(s), num(r.eval(x, t, y, s)?)])?;
                    }
                }
            }
        }
        csv.finish()?;
    }
    Ok(())
}

fn ensemble(cfg: &ExperimentConfig) -> Result<()> {
    let family = cfg.family.as_ref().expect("family checked");
    let window = cfg.site_window()?;
    let mut csv = Csv::create(&cfg.out_dir, "probabilities.csv", "bitstring,probability")?;
    if let Some(n) = cfg.n {
        let e = OpEnsemble::new(family, &window, n)?;
        for (subset, p) in e.law() {
            csv.row(&[Configuration::new(window.len(), subset)?.bitstring(), num(p)])?;
        }
        csv.finish()?;
        write_kernel(cfg, &cd_kernel(&polynomial_table(family, &window, n)?)?)
    } else {
        let beta = cfg.beta.expect("beta checked");
        if beta.is_infinite() {
            return Err(Error::Config("ensemble with beta \"inf\" needs N".into()));
        }
        let (_, h) = hamiltonian(cfg)?;
        let l = apply_spectral_function(&eig_sym(&h)?, &SpectralFunction::Exp(-beta), h.sites())?;
        for (mask, p) in l_ensemble_law(&l)?.iter().enumerate() {
            csv.row(&[Configuration::from_mask(window.len(), mask).bitstring(), num(*p)])?;
        }
        csv.finish()?;
        write_kernel(cfg, &fermi_kernel(&h, beta)?)
    }
}

fn sample(cfg: &ExperimentConfig) -> Result<()> {
    let family = cfg.family.as_ref().expect("family checked");
    let k = match cfg.n {
        Some(n) => cd_kernel(&polynomial_table(family, &cfg.site_window()?, n)?)?,
        None => {
            let (_, h) = hamiltonian(cfg)?;
            static_kernel(&h, cfg.beta.expect("beta checked"))?
        }
    };
    let mut csv = Csv::create(&cfg.out_dir, "samples.csv", "sample_id,bitstring")?;
    for (i, c) in sample_dpp(&k, cfg.seed, cfg.samples)?.iter().enumerate() {
        csv.row(&[i.to_string(), c.bitstring()])?;
    }
    csv.finish()
}

fn number_ops(car: &[FockOperator], sites: &[usize]) -> Vec<FockOperator> {
    sites.iter().map(|&x| car[x].clone()).collect()
}

fn dynamics(cfg: &ExperimentConfig) -> Result<()> {
    let (window, h) = hamiltonian(cfg)?;
    let beta = cfg.beta.expect("beta checked");
    let grid = cfg.times.as_ref().expect("times checked");
    if grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("times must be strictly increasing for dynamics".into()));
    }
    let space = FockSpace::new(h.sites().to_vec())?;

    let mut gaps: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(beta - (grid[grid.len() - 1] - grid[0]));
    gaps.retain(|&g| g > 0.0);
    let cert = positivity_certificate(&h, beta, &gaps)?;
    let mut csv = Csv::create(&cfg.out_dir, "certificate.csv", "t,min_minor_order,min_minor_value,pass")?;
    for r in &cert.rows {
        csv.row(&[num(r.t), r.min_minor_order.to_string(), num(r.min_minor_value), r.pass.to_string()])?;
    }
    csv.finish()?;

    let r = space_time_kernel(&h, beta)?;
    let sg = HeatSemigroup::new(&second_quantization(&space, &h)?)?;
    let car = car_operators(&space);
    let idx = site_indices(cfg, &window)?;
    let sites = window.sites();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    let mut csv = Csv::create(&cfg.out_dir, "verify.csv", "case_id,n,sites,times,det_value,trace_value,abs_err")?;
    for case in 0..cfg.cases.unwrap_or(12) {
        let n = 1 + case % 3;
        let mut pts: Vec<SpaceTimePoint> = (0..n)
            .map(|_| SpaceTimePoint::new(idx[rng.random_range(0..idx.len())], grid[rng.random_range(0..grid.len())]))
            .collect();
        pts.sort_by(|a, b| a.time.total_cmp(&b.time));
        let xs: Vec<usize> = pts.iter().map(|p| p.site).collect();
        let ts: Vec<f64> = pts.iter().map(|p| p.time).collect();
        let det = dynamical_correlation(&r, &pts)?;
        let tr = schwinger_with(&sg, beta, &number_ops(&car.number, &xs), &ts)?;
        worst = worst.max((det - tr).abs());
        let xv: Vec<f64> = xs.iter().map(|&x| sites[x]).collect();
        csv.row(&[case.to_string(), n.to_string(), list(&xv), list(&ts), num(det), num(tr), num((det - tr).abs())])?;
    }
    csv.finish()?;

    if !cert.pass {
        let bad = cert.rows.iter().find(|r| !r.pass).expect("failing row");
        return Err(Error::Validity(format!(
            "positivity certificate failed at t = {}: minor of order {} is {}",
            bad.t, bad.min_minor_order, bad.min_minor_value
        )));
    }
    let law = path_law(&h, beta, grid)?;
    let mut csv = Csv::create(&cfg.out_dir, "trajectory.csv", "draw_id,step,time,bitstring")?;
    for (d, path) in sample_trajectory(&law, cfg.seed, cfg.samples).iter().enumerate() {
        for (k, &state) in path.iter().enumerate() {
            csv.row(&[d.to_string(), k.to_string(), num(grid[k]), bitstring(state, space.modes())])?;
        }
    }
    csv.finish()?;
    check_verification(worst)
}

fn check_verification(worst: f64) -> Result<()> {
    if worst > VERIFY_TOLERANCE {
        return Err(Error::Numerical {
            message: format!("trace and determinant disagree beyond {VERIFY_TOLERANCE:e}"),
            residual: worst,
        });
    }
    Ok(())
}

fn random_symmetric(m: usize, rng: &mut ChaCha8Rng) -> Result<SymmetricOperator> {
    let mut a = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = rng.random::<f64>() * 2.0 - 1.0;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    SymmetricOperator::from_matrix(a)
}

struct Case {
    h: SymmetricOperator,
    beta: f64,
    sites: Vec<usize>,
    times: Vec<f64>,
}

/// (det, trace) for number operators at the given space-time points.
fn evaluate(c: &Case) -> Result<(f64, f64)> {
    let space = FockSpace::with_sites(c.h.dim())?;
    let car = car_operators(&space);
    let sg = HeatSemigroup::new(&second_quantization(&space, &c.h)?)?;
    let pts: Vec<SpaceTimePoint> = c.sites.iter().zip(&c.times).map(|(&x, &t)| SpaceTimePoint::new(x, t)).collect();
    let det = dynamical_correlation(&space_time_kernel(&c.h, c.beta)?, &pts)?;
    let tr = schwinger_with(&sg, c.beta, &number_ops(&car.number, &c.sites), &c.times)?;
    Ok((det, tr))
}

fn verify(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.beta.is_some_and(f64::is_infinite) {
        return Err(Error::Config("verify needs a finite beta".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<Case> = (0..cfg.cases.unwrap_or(200))
        .map(|case| {
            let m = rng.random_range(1..=6);
            let beta = cfg.beta.unwrap_or(if case % 2 == 0 { 0.5 } else { 2.0 });
            let n = rng.random_range(1..=4);
            let h = random_symmetric(m, &mut rng)?;
            let mut times: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * beta).collect();
            times.sort_by(f64::total_cmp);
            let sites = (0..n).map(|_| rng.random_range(0..m)).collect();
            Ok(Case { h, beta, sites, times })
        })
        .collect::<Result<_>>()?;
    let chunk = cases.len().div_ceil(cfg.threads);
    let results: Vec<Result<(f64, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(evaluate).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut worst = 0.0f64;
    let mut csv = Csv::create(&cfg.out_dir, "verify.csv", "case_id,n,sites,times,det_value,trace_value,abs_err")?;
    for (i, (c, r)) in cases.iter().zip(results).enumerate() {
        let (det, tr) = r?;
        worst = worst.max((det - tr).abs());
        let xv: Vec<f64> = c.sites.iter().map(|&x| x as f64).collect();
        csv.row(&[i.to_string(), c.sites.len().to_string(), list(&xv), list(&c.times), num(det), num(tr), num((det - tr).abs())])?;
    }
    csv.finish()?;
    check_verification(worst)
}

fn limits(cfg: &ExperimentConfig) -> Result<()> {
    let mut csv = Csv::create(&cfg.out_dir, "limits.csv", "regime,ladder_k,scale_param,sup_entry_error")?;
    for regime in &cfg.regimes {
        for k in 0..cfg.rungs {
            let rung = regime.rung(k)?;
            csv.row(&[regime.name().to_string(), k.to_string(), num(rung.scale_param), num(rung.central_distance())])?;
        }
    }
    csv.finish()
}

fn cylindric(cfg: &ExperimentConfig) -> Result<()> {
    let space = PartitionSpace::new(cfg.n_max);
    let beta = cfg.beta.unwrap_or(1.0);
    let grid = cfg.times.clone().unwrap_or_else(|| vec![0.0, 0.25, 0.5]);
    let law = cylindric_path_law(&space, cfg.theta, beta, &grid)?;

    let mut gaps: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(beta - (grid[grid.len() - 1] - grid[0]));
    let mut seen = HashSet::new();
    gaps.retain(|g| *g > 0.0 && seen.insert(g.to_bits()));

    let parts = space.partitions();
    let mut csv = Csv::create(&cfg.out_dir, "cylindric.csv", "lambda,mu,t,entry")?;
    for &t in &gaps {
        let m = transition_matrix(&space, cfg.theta, t)?;
        for (i, l) in parts.iter().enumerate() {
            for (j, u) in parts.iter().enumerate() {
                csv.row(&[l.to_string(), u.to_string(), num(t), num(m.get(i, j))])?;
            }
        }
    }
    csv.finish()?;

    let mut csv = Csv::create(&cfg.out_dir, "semigroup.csv", "t,s,residual,bound")?;
    for &t in &gaps {
        let r = semigroup_residual(&space, cfg.theta, t, t, cfg.margin)?;
        csv.row(&[num(t), num(t), num(r.residual), num(r.bound)])?;
    }
    csv.finish()?;

    let half = cfg.n_max as f64 + 0.5;
    let mut csv = Csv::create(&cfg.out_dir, "trajectory.csv", "draw_id,step,time,bitstring")?;
    for (d, path) in sample_cylindric(&law, cfg.seed, cfg.samples).iter().enumerate() {
        for (k, &i) in path.iter().enumerate() {
            let maya = maya_configuration(space.get(i), -half, half - 1.0)?;
            csv.row(&[d.to_string(), k.to_string(), num(grid[k]), maya.bitstring()])?;
        }
    }
    csv.finish()
}
