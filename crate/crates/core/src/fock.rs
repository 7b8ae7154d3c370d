//! Fermionic Fock space on a finite window: CAR matrices, second
//! quantization, Gibbs traces, positivity certificates and exact path laws.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::CyclicChain;
use crate::error::{Error, Result};
use crate::linalg::{determinant, eig_sym_matrix, Matrix, SpectralDecomposition, SymmetricOperator};

pub const MAX_SITES: usize = 14;

/// Occupation bitmasks over m sites in integer order; bit x is site x.
#[derive(Clone, Debug, PartialEq)]
pub struct FockSpace {
    sites: Vec<f64>,
}

impl FockSpace {
    pub fn new(sites: Vec<f64>) -> Result<Self> {
        if sites.len() > MAX_SITES {
            return Err(Error::Size(format!(
                "fock space on {} sites exceeds the cap of {MAX_SITES}",
                sites.len()
            )));
        }
        if sites.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Precondition("fock sites must be strictly increasing".into()));
        }
        Ok(FockSpace { sites })
    }

    pub fn with_sites(m: usize) -> Result<Self> {
        Self::new((0..m).map(|x| x as f64).collect())
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn modes(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }
}

/// (−1)^{#occupied sites below x}
fn jw_sign(state: usize, x: usize) -> f64 {
    if (state & ((1 << x) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug)]
pub struct FockOperator {
    pub space: FockSpace,
    pub matrix: Matrix,
}

impl FockOperator {
    pub fn identity(space: &FockSpace) -> Self {
        FockOperator {
            space: space.clone(),
            matrix: Matrix::identity(space.dim()),
        }
    }

    pub fn mul(&self, other: &FockOperator) -> FockOperator {
        FockOperator {
            space: self.space.clone(),
            matrix: self.matrix.matmul(&other.matrix),
        }
    }

    /// AB + BA
    pub fn anticommutator(&self, other: &FockOperator) -> Matrix {
        self.matrix.matmul(&other.matrix).add(&other.matrix.matmul(&self.matrix))
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator {
            space: self.space.clone(),
            matrix: self.matrix.transpose(),
        }
    }
}

/// a*_x, a_x and ρ_x for every site.
#[derive(Clone, Debug)]
pub struct CarOperators {
    pub creation: Vec<FockOperator>,
    pub annihilation: Vec<FockOperator>,
    pub number: Vec<FockOperator>,
}

impl CarOperators {
    /// a*(h) = Σ h_x a*_x
    pub fn create(&self, h: &[f64]) -> FockOperator {
        combine(&self.creation, h)
    }

    /// a(k) = Σ k_x a_x
    pub fn annihilate(&self, k: &[f64]) -> FockOperator {
        combine(&self.annihilation, k)
    }
}

fn combine(ops: &[FockOperator], c: &[f64]) -> FockOperator {
    let mut m = Matrix::zeros(ops[0].matrix.rows(), ops[0].matrix.cols());
    for (op, &w) in ops.iter().zip(c) {
        if w != 0.0 {
            m = m.add(&op.matrix.scale(w));
        }
    }
    FockOperator {
        space: ops[0].space.clone(),
        matrix: m,
    }
}

pub fn car_operators(space: &FockSpace) -> CarOperators {
    let dim = space.dim();
    let mut creation = Vec::with_capacity(space.modes());
    let mut number = Vec::with_capacity(space.modes());
    for x in 0..space.modes() {
        let bit = 1 << x;
        let mut c = Matrix::zeros(dim, dim);
        let mut n = Matrix::zeros(dim, dim);
        for s in 0..dim {
            if s & bit == 0 {
                c[(s | bit, s)] = jw_sign(s, x);
            } else {
                n[(s, s)] = 1.0;
            }
        }
        creation.push(FockOperator { space: space.clone(), matrix: c });
        number.push(FockOperator { space: space.clone(), matrix: n });
    }
    let annihilation = creation.iter().map(FockOperator::adjoint).collect();
    CarOperators {
        creation,
        annihilation,
        number,
    }
}

/// L = Σ_{x,y} H(x,y) a*_x a_y.
pub fn second_quantization(space: &FockSpace, h: &SymmetricOperator) -> Result<FockOperator> {
    if h.sites() != space.sites() {
        return Err(Error::Precondition("operator window differs from the fock window".into()));
    }
    let m = space.modes();
    let dim = space.dim();
    let mut l = Matrix::zeros(dim, dim);
    for s in 0..dim {
        for y in 0..m {
            if s & (1 << y) == 0 {
                continue;
            }
            let s1 = s & !(1 << y);
            let sign_y = jw_sign(s, y);
            for x in 0..m {
                let hxy = h.get(x, y);
                if hxy == 0.0 || s1 & (1 << x) != 0 {
                    continue;
                }
                l[(s1 | (1 << x), s)] += hxy * sign_y * jw_sign(s1, x);
            }
        }
    }
    Ok(FockOperator {
        space: space.clone(),
        matrix: l,
    })
}

/// Spectral data of L, shifted by its smallest eigenvalue. L is diagonalized
/// per connected block of its sparsity pattern (particle-number sectors for
/// second-quantized operators).
#[derive(Clone, Debug)]
pub struct HeatSemigroup {
    dim: usize,
    blocks: Vec<(Vec<usize>, SpectralDecomposition)>,
    eigenvalues: Vec<f64>,
    shift: f64,
}

fn sparsity_blocks(a: &Matrix) -> Vec<Vec<usize>> {
    let n = a.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if a[(i, j)] != 0.0 || a[(j, i)] != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

impl HeatSemigroup {
    pub fn new(l: &FockOperator) -> Result<Self> {
        let blocks = sparsity_blocks(&l.matrix)
            .into_iter()
            .map(|idx| {
                let sub = l.matrix.select(&idx, &idx);
                eig_sym_matrix(&sub).map(|dec| (idx, dec))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut eigenvalues: Vec<f64> = blocks.iter().flat_map(|(_, d)| d.eigenvalues.iter().copied()).collect();
        eigenvalues.sort_by(f64::total_cmp);
        let shift = eigenvalues[0];
        Ok(HeatSemigroup { dim: l.matrix.rows(), blocks, eigenvalues, shift })
    }

    /// e^{−t(L − λ_min)}
    pub fn heat(&self, t: f64) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for (idx, dec) in &self.blocks {
            let b = dec.reconstruct(|l| (-t * (l - self.shift)).exp());
            for (bi, &i) in idx.iter().enumerate() {
                for (bj, &j) in idx.iter().enumerate() {
                    out[(i, j)] = b[(bi, bj)];
                }
            }
        }
        out
    }

    /// Tr e^{−β(L − λ_min)}
    pub fn partition(&self, beta: f64) -> f64 {
        self.eigenvalues.iter().map(|l| (-beta * (l - self.shift)).exp()).sum()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Tr(e^{−βL} A) / Tr(e^{−βL}).
pub fn gibbs_expectation(l: &FockOperator, beta: f64, a: &FockOperator) -> Result<f64> {
    let sg = HeatSemigroup::new(l)?;
    Ok(trace_product(&sg.heat(beta), &a.matrix) / sg.partition(beta))
}

/// Imaginary-time ordered trace
/// Tr(e^{−(t₁+β/2)L} A₁ e^{−(t₂−t₁)L} ⋯ A_n e^{−(β/2−t_n)L}) / Tr(e^{−βL}).
pub fn schwinger(l: &FockOperator, beta: f64, ops: &[FockOperator], times: &[f64]) -> Result<f64> {
    let sg = HeatSemigroup::new(l)?;
    schwinger_with(&sg, beta, ops, times)
}

pub fn schwinger_with(sg: &HeatSemigroup, beta: f64, ops: &[FockOperator], times: &[f64]) -> Result<f64> {
    if ops.is_empty() || ops.len() != times.len() {
        return Err(Error::Precondition("need one time per operator and at least one operator".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("times must be nondecreasing".into()));
    }
    let half = beta / 2.0;
    let tol = 1e-12 * beta.max(1.0);
    if times[0] < -half - tol || times[times.len() - 1] > half + tol {
        return Err(Error::Domain(format!("times must lie in [-{half}, {half}]")));
    }
    let mut cache: HashMap<u64, Matrix> = HashMap::new();
    let mut heat = |t: f64| -> Matrix {
        let t = t.max(0.0);
        cache.entry(t.to_bits()).or_insert_with(|| sg.heat(t)).clone()
    };
    let mut acc = heat(times[0] + half);
    for (i, op) in ops.iter().enumerate() {
        acc = acc.matmul(&op.matrix);
        let next = if i + 1 < times.len() { times[i + 1] } else { half };
        let gap = next - times[i];
        if gap > 0.0 {
            acc = acc.matmul(&heat(gap));
        }
    }
    Ok(acc.trace() / sg.partition(beta))
}

/// Diagonal ±1 gauge making every off-diagonal entry of H nonpositive, if
/// one exists.
pub fn sign_gauge(h: &SymmetricOperator) -> Option<Vec<f64>> {
    let n = h.dim();
    let mut sign = vec![0.0; n];
    for start in 0..n {
        if sign[start] != 0.0 {
            continue;
        }
        sign[start] = 1.0;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let v = h.get(i, j);
                if i == j || v == 0.0 {
                    continue;
                }
                let want = if v > 0.0 { -sign[i] } else { sign[i] };
                if sign[j] == 0.0 {
                    sign[j] = want;
                    stack.push(j);
                } else if sign[j] != want {
                    return None;
                }
            }
        }
    }
    Some(sign)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateRow {
    pub t: f64,
    pub min_minor_order: usize,
    pub min_minor_value: f64,
    pub pass: bool,
    /// Row and column indices of the smallest minor.
    pub witness: (Vec<usize>, Vec<usize>),
    /// Smallest entry of the gauged Fock heat kernel e^{−tL}.
    pub fock_min_entry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub rows: Vec<CertificateRow>,
    pub gauge: Option<Vec<f64>>,
    pub pass: bool,
}

pub const MINOR_TOLERANCE: f64 = -1e-10;
pub const TRANSFER_TOLERANCE: f64 = -1e-12;
const MAX_MINOR_ORDER: usize = 5;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Karlin–McGregor scan: all ordered minors of e^{−tH} up to order
/// min(m, 5), after the sign gauge, plus the Fock transfer entries.
pub fn positivity_certificate(h: &SymmetricOperator, beta: f64, grid: &[f64]) -> Result<CertificateReport> {
    if grid.iter().any(|&t| !(t > 0.0 && t <= beta)) {
        return Err(Error::Precondition(format!("certificate times must lie in (0, {beta}]")));
    }
    let gauge = sign_gauge(h);
    let hg = match &gauge {
        Some(s) => h.conjugate_signs(s),
        None => h.clone(),
    };
    let m = hg.dim();
    let dec = eig_sym_matrix(hg.matrix())?;
    let fock = if m <= MAX_SITES {
        let space = FockSpace::new(hg.sites().to_vec())?;
        Some(HeatSemigroup::new(&second_quantization(&space, &hg)?)?)
    } else {
        None
    };
    let orders: Vec<Vec<Vec<usize>>> = (1..=m.min(MAX_MINOR_ORDER)).map(|k| subsets(m, k)).collect();
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let p = dec.reconstruct(|l| (-t * l).exp());
        let mut best = (f64::INFINITY, 0usize, (vec![], vec![]));
        for (k, sets) in orders.iter().enumerate() {
            for r in sets {
                for c in sets {
                    let v = determinant(&p.select(r, c));
                    if v < best.0 {
                        best = (v, k + 1, (r.clone(), c.clone()));
                    }
                }
            }
        }
        let fock_min_entry = match &fock {
            Some(sg) => {
                let kern = sg.heat(t);
                let scale = kern.max_abs();
                kern.as_slice().iter().fold(f64::INFINITY, |a, &b| a.min(b)) / scale
            }
            None => f64::NAN,
        };
        let pass = best.0 >= MINOR_TOLERANCE && !(fock_min_entry < TRANSFER_TOLERANCE);
        rows.push(CertificateRow {
            t,
            min_minor_order: best.1,
            min_minor_value: best.0,
            pass,
            witness: best.2,
            fock_min_entry,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CertificateReport { rows, gauge, pass })
}

/// Stationary periodic law of full configurations on a time grid.
#[derive(Clone, Debug)]
pub struct PathLaw {
    pub space: FockSpace,
    pub beta: f64,
    pub grid: Vec<f64>,
    /// Tr e^{−β(L − λ_min)}
    pub z: f64,
    chain: CyclicChain,
}

pub fn path_law(h: &SymmetricOperator, beta: f64, grid: &[f64]) -> Result<PathLaw> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Precondition(format!("beta must be positive and finite, got {beta}")));
    }
    if grid.is_empty() {
        return Err(Error::Precondition("grid must contain at least one time".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("grid times must be strictly increasing".into()));
    }
    let half = beta / 2.0;
    if grid[0] < -half || grid[grid.len() - 1] > half {
        return Err(Error::Domain(format!("grid must lie in [-{half}, {half}]")));
    }
    let space = FockSpace::new(h.sites().to_vec())?;
    let mut gaps: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(beta - (grid[grid.len() - 1] - grid[0]));
    let cert_grid: Vec<f64> = gaps.iter().copied().filter(|&g| g > 0.0).collect();
    let cert = positivity_certificate(h, beta, &cert_grid)?;
    if !cert.pass {
        let bad = cert.rows.iter().find(|r| !r.pass).expect("failing row");
        return Err(Error::Validity(format!(
            "stochastic positivity not certified at gap {}: minor {} of order {}, transfer entry {}",
            bad.t, bad.min_minor_value, bad.min_minor_order, bad.fock_min_entry
        )));
    }
    let hg = match &cert.gauge {
        Some(s) => h.conjugate_signs(s),
        None => h.clone(),
    };
    let l = second_quantization(&space, &hg)?;
    let sg = HeatSemigroup::new(&l)?;
    let mut cache: HashMap<u64, Matrix> = HashMap::new();
    let mut transfers = Vec::with_capacity(gaps.len());
    for &g in &gaps {
        let t = cache
            .entry(g.to_bits())
            .or_insert_with(|| {
                let mut k = sg.heat(g);
                let scale = k.max_abs();
                for i in 0..k.rows() {
                    for j in 0..k.cols() {
                        if k[(i, j)] < 0.0 && k[(i, j)] >= TRANSFER_TOLERANCE * scale {
                            k[(i, j)] = 0.0;
                        }
                    }
                }
                k
            })
            .clone();
        transfers.push(t);
    }
    Ok(PathLaw { space, beta, grid: grid.to_vec(), z: sg.partition(beta), chain: CyclicChain::new(transfers)? })
}

/// A trajectory is one bitmask per grid time.
pub type Trajectory = Vec<usize>;

impl PathLaw {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// transfers()[i] carries t_i to t_{i+1}; the last one wraps around.
    pub fn transfers(&self) -> &[Matrix] {
        &self.chain.transfers
    }

    /// Trace of the clamped cyclic product, used as the normalizer.
    pub fn normalizer(&self) -> f64 {
        self.chain.normalizer
    }

    pub fn probability(&self, path: &[usize]) -> f64 {
        self.chain.probability(path)
    }

    /// Exact one-time marginal at grid index 0.
    pub fn first_marginal(&self) -> &[f64] {
        self.chain.first_marginal()
    }

    /// Exact one-time marginal at grid index k.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        self.chain.marginal(k)
    }

    /// Every path with its probability; only for small spaces.
    pub fn enumerate(&self) -> Result<Vec<(Trajectory, f64)>> {
        self.chain.enumerate()
    }
}

/// Independent draws from the path law, reproducible per seed.
pub fn sample_trajectory(law: &PathLaw, seed: u64, count: usize) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| law.chain.draw(&mut rng)).collect()
}

/// Window-ordered 0/1 string for a bitmask.
pub fn bitstring(state: usize, modes: usize) -> String {
    (0..modes).map(|x| if state & (1 << x) != 0 { '1' } else { '0' }).collect()
}
