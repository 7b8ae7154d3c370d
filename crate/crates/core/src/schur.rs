//! Truncated cylindric Plancherel process: partitions, skew Schur functions
//! at the exponential specialization, the transition semigroup T^θ_t,
//! vertex-operator identities and periodic path laws.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::CyclicChain;
use crate::dpp::Configuration;
use crate::error::{Error, Result};
use crate::linalg::{determinant, Matrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!("partition parts {parts:?} are not weakly decreasing")));
        }
        if parts.contains(&0) {
            return Err(Error::Precondition("partition has an interior zero part".into()));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// μ ⊆ λ as Young diagrams.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.length() <= self.length() && mu.parts.iter().zip(&self.parts).all(|(m, l)| m <= l)
    }

    /// All partitions of n, ascending lexicographic.
    pub fn of_size(n: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            for k in 1..=n.min(max) {
                cur.push(k);
                rec(n - k, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

/// Parts joined by '+'; the empty partition is the empty string.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join("+"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Partition::empty());
        }
        let parts = s
            .split('+')
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Precondition(format!("bad partition part {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions with |λ| ≤ n_max, ordered by (size, lex).
#[derive(Clone, Debug)]
pub struct PartitionSpace {
    n_max: usize,
    partitions: Vec<Partition>,
    index: HashMap<Partition, usize>,
}

impl PartitionSpace {
    pub fn new(n_max: usize) -> Self {
        let partitions: Vec<Partition> = (0..=n_max).flat_map(Partition::of_size).collect();
        let index = partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        PartitionSpace { n_max, partitions, index }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn get(&self, i: usize) -> &Partition {
        &self.partitions[i]
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Indices of partitions with |λ| ≤ n_max − margin.
    pub fn protected(&self, margin: usize) -> Vec<usize> {
        let cap = self.n_max.saturating_sub(margin);
        (0..self.len()).filter(|&i| self.partitions[i].size() <= cap).collect()
    }
}

/// s_{λ/μ}(ex_γ) by Jacobi–Trudi with h_k = γ^k/k!.
pub fn skew_schur_ex(lambda: &Partition, mu: &Partition, gamma: f64) -> f64 {
    if !lambda.contains(mu) {
        return 0.0;
    }
    let n = lambda.size() - mu.size();
    if n == 0 {
        return 1.0;
    }
    if gamma == 0.0 {
        return 0.0;
    }
    // γ^n factors out of the determinant since every term has total degree n
    let l = lambda.length();
    let inv_fact = |k: i64| if k < 0 { 0.0 } else { (-crate::special::ln_gamma(k as f64 + 1.0)).exp() };
    let a = Matrix::from_fn(l, l, |i, j| {
        inv_fact(lambda.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64)
    });
    gamma.powi(n as i32) * determinant(&a)
}

/// S[λ, κ] = s_{λ/κ}(ex_γ) over the space.
fn skew_table(space: &PartitionSpace, gamma: f64) -> Matrix {
    let p = space.partitions();
    Matrix::from_fn(p.len(), p.len(), |i, j| skew_schur_ex(&p[i], &p[j], gamma))
}

/// Truncated T^θ_t with entries ⟨T v_μ, v_λ⟩.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub theta: f64,
    pub t: f64,
    pub entries: Matrix,
    /// √(Σ_{|ν|>N_max} T[λ,ν]²) per row λ.
    pub row_tail: Vec<f64>,
    /// Largest row tail.
    pub tail_bound: f64,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, lambda: usize, mu: usize) -> f64 {
        self.entries[(lambda, mu)]
    }
}

fn transition_entries(space: &PartitionSpace, theta: f64, t: f64) -> Matrix {
    let decay = (-t).exp();
    let gamma = theta * (1.0 - decay);
    let s = skew_table(space, gamma);
    let c = (theta * theta * (decay - 1.0)).exp();
    let energy: Vec<f64> = space.partitions().iter().map(|k| (-t * k.size() as f64).exp()).collect();
    let n = space.len();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in 0..=j.min(i) {
                let (a, b) = (s[(i, k)], s[(j, k)]);
                if a != 0.0 && b != 0.0 {
                    acc += energy[k] * a * b;
                }
            }
            out[(i, j)] = c * acc;
            out[(j, i)] = c * acc;
        }
    }
    out
}

pub fn transition_matrix(space: &PartitionSpace, theta: f64, t: f64) -> Result<TransitionMatrix> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Precondition(format!("theta must be nonnegative, got {theta}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("t must be nonnegative, got {t}")));
    }
    let entries = transition_entries(space, theta, t);
    // Σ_ν T_t[λ,ν]² over all partitions equals T_{2t}[λ,λ]
    let doubled = transition_entries(space, theta, 2.0 * t);
    let n = space.len();
    let row_tail: Vec<f64> = (0..n)
        .map(|i| {
            let kept: f64 = (0..n).map(|j| entries[(i, j)].powi(2)).sum();
            (doubled[(i, i)] - kept).max(0.0).sqrt()
        })
        .collect();
    let tail_bound = row_tail.iter().cloned().fold(0.0, f64::max);
    Ok(TransitionMatrix { theta, t, entries, row_tail, tail_bound })
}

#[derive(Clone, Debug)]
pub struct SemigroupReport {
    pub residual: f64,
    /// Cauchy–Schwarz bound on the truncation error over the protected block.
    pub bound: f64,
    pub protected: usize,
}

/// ‖T_t T_s − T_{t+s}‖_max on partitions with |λ| ≤ N_max − margin.
pub fn semigroup_residual(space: &PartitionSpace, theta: f64, t: f64, s: f64, margin: usize) -> Result<SemigroupReport> {
    let a = transition_matrix(space, theta, t)?;
    let b = transition_matrix(space, theta, s)?;
    let c = transition_matrix(space, theta, t + s)?;
    let prod = a.entries.matmul(&b.entries);
    let rows = space.protected(margin);
    let mut residual = 0.0f64;
    let mut bound = 0.0f64;
    for &i in &rows {
        for &j in &rows {
            residual = residual.max((prod[(i, j)] - c.entries[(i, j)]).abs());
            bound = bound.max(a.row_tail[i] * b.row_tail[j]);
        }
    }
    Ok(SemigroupReport { residual, bound, protected: rows.len() })
}

#[derive(Clone, Debug)]
pub struct VertexReport {
    /// e^{γγ'}
    pub z: f64,
    pub commutation_residual: f64,
    pub energy_plus_residual: f64,
    pub energy_minus_residual: f64,
    pub protected: usize,
}

/// Γ₊(ex_γ) as a matrix: column λ holds s_{λ/μ} in row μ.
pub fn gamma_plus(space: &PartitionSpace, gamma: f64) -> Matrix {
    skew_table(space, gamma).transpose()
}

/// Γ₋(ex_γ) as a matrix: column μ holds s_{λ/μ} in row λ.
pub fn gamma_minus(space: &PartitionSpace, gamma: f64) -> Matrix {
    skew_table(space, gamma)
}

/// Residuals of Γ₊(γ)Γ₋(γ') = e^{γγ'} Γ₋(γ')Γ₊(γ) on the protected block, and
/// of Γ₊(γ)u^H = u^H Γ₊(uγ), Γ₋(γ')u^H = u^H Γ₋(γ'/u).
pub fn vertex_identity_check(
    space: &PartitionSpace,
    gamma: f64,
    gamma_prime: f64,
    u: f64,
    margin: usize,
) -> Result<VertexReport> {
    if !(gamma >= 0.0 && gamma_prime >= 0.0) {
        return Err(Error::Precondition("vertex parameters must be nonnegative".into()));
    }
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Precondition(format!("energy parameter u must be positive, got {u}")));
    }
    let gp = gamma_plus(space, gamma);
    let gm = gamma_minus(space, gamma_prime);
    if gp.max_abs() > 1e6 || gm.max_abs() > 1e6 {
        return Err(Error::Precondition("truncated vertex operators exceed norm 1e6".into()));
    }
    let z = (gamma * gamma_prime).exp();
    let lhs = gp.matmul(&gm);
    let rhs = gm.matmul(&gp).scale(z);
    let rows = space.protected(margin);
    let mut commutation_residual = 0.0f64;
    for &i in &rows {
        for &j in &rows {
            commutation_residual = commutation_residual.max((lhs[(i, j)] - rhs[(i, j)]).abs());
        }
    }
    let energy = Matrix::from_diag(&space.partitions().iter().map(|p| u.powi(p.size() as i32)).collect::<Vec<_>>());
    let energy_plus_residual = gp.matmul(&energy).max_abs_diff(&energy.matmul(&gamma_plus(space, u * gamma)));
    let energy_minus_residual =
        gm.matmul(&energy).max_abs_diff(&energy.matmul(&gamma_minus(space, gamma_prime / u)));
    Ok(VertexReport { z, commutation_residual, energy_plus_residual, energy_minus_residual, protected: rows.len() })
}

/// Occupation of the half-integer window lo, lo+1, …, hi by 𝔖(λ) = {λ_i − i + ½}.
/// Index k of the configuration is the site lo + k.
pub fn maya_configuration(lambda: &Partition, lo: f64, hi: f64) -> Result<Configuration> {
    if (lo - 0.5).fract() != 0.0 || (hi - 0.5).fract() != 0.0 || lo > hi {
        return Err(Error::Precondition(format!("maya window [{lo}, {hi}] must have half-integer ends")));
    }
    let need_lo = -(lambda.length() as f64) - 0.5;
    let need_hi = lambda.part(0) as f64 - 0.5;
    if lo > need_lo || hi < need_hi {
        return Err(Error::Precondition(format!(
            "maya window [{lo}, {hi}] must cover [{need_lo}, {need_hi}]"
        )));
    }
    let len = (hi - lo) as usize + 1;
    let occupied = (0..len)
        .filter(|&k| {
            let x = lo + k as f64;
            // i = λ_i − x + ½ must be a row index, counting rows past ℓ(λ) as zero parts
            let pos = (0..).map(|i: usize| lambda.part(i) as f64 - (i + 1) as f64 + 0.5);
            pos.take_while(|&y| y >= x).any(|y| y == x)
        })
        .collect();
    Configuration::new(len, occupied)
}

/// Periodic law of partition paths on a time grid in [0, β].
#[derive(Clone, Debug)]
pub struct CylindricLaw {
    pub theta: f64,
    pub beta: f64,
    pub grid: Vec<f64>,
    /// Tr of the truncated T^θ_β.
    pub trace: f64,
    space: PartitionSpace,
    chain: CyclicChain,
}

pub fn cylindric_path_law(space: &PartitionSpace, theta: f64, beta: f64, grid: &[f64]) -> Result<CylindricLaw> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Precondition(format!("beta must be positive and finite, got {beta}")));
    }
    if grid.is_empty() {
        return Err(Error::Precondition("grid must contain at least one time".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Precondition("grid times must be nondecreasing".into()));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > beta {
        return Err(Error::Precondition(format!("grid must lie in [0, {beta}]")));
    }
    let mut gaps: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(beta - (grid[grid.len() - 1] - grid[0]));
    let mut cache: HashMap<u64, Matrix> = HashMap::new();
    let mut transfers = Vec::with_capacity(gaps.len());
    for &g in &gaps {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(g.to_bits()) {
            e.insert(transition_matrix(space, theta, g)?.entries);
        }
        transfers.push(cache[&g.to_bits()].clone());
    }
    let trace = transition_matrix(space, theta, beta)?.entries.trace();
    if !(trace > f64::MIN_POSITIVE) {
        return Err(Error::numerical(
            "trace of the truncated transfer underflowed; use a larger n_max or a smaller beta",
            trace,
        ));
    }
    let chain = CyclicChain::new(transfers).map_err(|_| {
        Error::numerical("cyclic normalizer underflowed; use a larger n_max or a smaller beta", 0.0)
    })?;
    Ok(CylindricLaw { theta, beta, grid: grid.to_vec(), trace, space: space.clone(), chain })
}

impl CylindricLaw {
    pub fn space(&self) -> &PartitionSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn transfers(&self) -> &[Matrix] {
        &self.chain.transfers
    }

    pub fn normalizer(&self) -> f64 {
        self.chain.normalizer
    }

    /// Path given as indices into the partition space.
    pub fn probability(&self, path: &[usize]) -> f64 {
        self.chain.probability(path)
    }

    /// One-time marginal at grid index k.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        self.chain.marginal(k)
    }

    pub fn enumerate(&self) -> Result<Vec<(Vec<usize>, f64)>> {
        self.chain.enumerate()
    }
}

/// Independent path draws, reproducible per seed.
pub fn sample_cylindric(law: &CylindricLaw, seed: u64, count: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| law.chain.draw(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..=10).map(|n| Partition::of_size(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert_eq!(PartitionSpace::new(12).len(), 1 + 1 + 2 + 3 + 5 + 7 + 11 + 15 + 22 + 30 + 42 + 56 + 77);
    }

    #[test]
    fn display_round_trip() {
        let p = Partition::new(vec![3, 1, 1]).unwrap();
        assert_eq!(p.to_string(), "3+1+1");
        assert_eq!("3+1+1".parse::<Partition>().unwrap(), p);
        assert_eq!(Partition::empty().to_string(), "");
        assert!(Partition::new(vec![1, 2]).is_err());
    }
}
