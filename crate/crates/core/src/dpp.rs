//! Static determinantal point processes: spectral sampling, ensemble laws
//! and correlation estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::CorrelationKernel;
use crate::linalg::{determinant, eig_sym_matrix, Matrix, SymmetricOperator};
use crate::orthopoly::{FamilySpec, SiteWindow};

/// Occupied window indices, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub len: usize,
    pub occupied: Vec<usize>,
}

impl Configuration {
    pub fn new(len: usize, mut occupied: Vec<usize>) -> Result<Self> {
        occupied.sort_unstable();
        occupied.dedup();
        if occupied.last().is_some_and(|&i| i >= len) {
            return Err(Error::Precondition("occupied index outside the window".into()));
        }
        Ok(Configuration { len, occupied })
    }

    pub fn from_mask(len: usize, mask: usize) -> Self {
        Configuration {
            len,
            occupied: (0..len).filter(|i| mask & (1 << i) != 0).collect(),
        }
    }

    pub fn mask(&self) -> Option<usize> {
        if self.len > usize::BITS as usize {
            return None;
        }
        Some(self.occupied.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn count(&self) -> usize {
        self.occupied.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.occupied.binary_search(&i).is_ok()
    }

    pub fn bitstring(&self) -> String {
        let mut s = vec![b'0'; self.len];
        for &i in &self.occupied {
            s[i] = b'1';
        }
        String::from_utf8(s).expect("ascii")
    }
}

const CLAMP: f64 = 1e-8;

/// Spectral sampler: keep each eigenvector with probability equal to its
/// eigenvalue, then place points one at a time from the induced projection.
pub fn sample_dpp(kernel: &CorrelationKernel, seed: u64, count: usize) -> Result<Vec<Configuration>> {
    let n = kernel.dim();
    let dec = eig_sym_matrix(&kernel.values)?;
    let mut probs = Vec::with_capacity(n);
    for &l in &dec.eigenvalues {
        if !(-CLAMP..=1.0 + CLAMP).contains(&l) {
            return Err(Error::Validity(format!("kernel eigenvalue {l} outside [0, 1]")));
        }
        probs.push(if l <= CLAMP {
            0.0
        } else if l >= 1.0 - CLAMP {
            1.0
        } else {
            l
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let chosen: Vec<usize> = (0..n)
            .filter(|&k| probs[k] == 1.0 || (probs[k] > 0.0 && rng.random::<f64>() < probs[k]))
            .collect();
        let mut cols: Vec<Vec<f64>> = chosen.iter().map(|&k| dec.eigenvectors.column(k)).collect();
        let mut occupied = Vec::with_capacity(cols.len());
        while !cols.is_empty() {
            let k = cols.len() as f64;
            let weights: Vec<f64> = (0..n)
                .map(|i| cols.iter().map(|c| c[i] * c[i]).sum::<f64>() / k)
                .collect();
            let i = pick(&weights, &mut rng);
            occupied.push(i);
            // pivot on the column with the largest entry at i, project the
            // rest onto the complement of δ_i, and re-orthonormalize
            let j = (0..cols.len())
                .max_by(|&a, &b| cols[a][i].abs().total_cmp(&cols[b][i].abs()))
                .expect("nonempty");
            let pivot = cols.swap_remove(j);
            for c in cols.iter_mut() {
                let f = c[i] / pivot[i];
                for (v, p) in c.iter_mut().zip(&pivot) {
                    *v -= f * p;
                }
                c[i] = 0.0;
            }
            for a in 0..cols.len() {
                for b in 0..a {
                    let d: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                    let (head, tail) = cols.split_at_mut(a);
                    for (v, w) in tail[0].iter_mut().zip(&head[b]) {
                        *v -= d * w;
                    }
                }
                let norm = cols[a].iter().map(|v| v * v).sum::<f64>().sqrt();
                for v in cols[a].iter_mut() {
                    *v /= norm;
                }
            }
        }
        out.push(Configuration::new(n, occupied)?);
    }
    Ok(out)
}

fn pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub const MAX_SUBSETS: f64 = 1e7;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Law Π_{i<j}(x_i − x_j)² Π w(x_i) / Z on N-point subsets of a window.
#[derive(Clone, Debug)]
pub struct OpEnsemble {
    pub family: FamilySpec,
    pub window: SiteWindow,
    pub n: usize,
    ln_w: Vec<f64>,
    abscissa: Vec<f64>,
    ln_z: f64,
}

impl OpEnsemble {
    pub fn new(family: &FamilySpec, window: &SiteWindow, n: usize) -> Result<Self> {
        family.validate()?;
        let len = window.len();
        let subsets = binomial(len, n);
        if subsets > MAX_SUBSETS {
            return Err(Error::Size(format!(
                "binomial({len}, {n}) = {subsets:e} subsets exceeds {MAX_SUBSETS:e}"
            )));
        }
        if n == 0 || n > len {
            return Err(Error::Precondition(format!("need 1 <= N <= {len}, got {n}")));
        }
        let sites = window.sites();
        let ln_w = sites.iter().map(|&x| family.ln_weight(x)).collect::<Result<Vec<_>>>()?;
        let abscissa = sites.iter().map(|&x| family.abscissa(x)).collect();
        let mut e = OpEnsemble {
            family: *family,
            window: window.clone(),
            n,
            ln_w,
            abscissa,
            ln_z: 0.0,
        };
        let mut terms = Vec::with_capacity(subsets as usize);
        for_each_subset(len, n, |s| terms.push(e.ln_unnormalized(s)));
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        e.ln_z = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
        Ok(e)
    }

    fn ln_unnormalized(&self, s: &[usize]) -> f64 {
        let mut v: f64 = s.iter().map(|&i| self.ln_w[i]).sum();
        for a in 0..s.len() {
            for b in 0..a {
                v += 2.0 * (self.abscissa[s[a]] - self.abscissa[s[b]]).abs().ln();
            }
        }
        v
    }

    pub fn probability(&self, omega: &Configuration) -> f64 {
        if omega.count() != self.n || omega.len != self.window.len() {
            return 0.0;
        }
        (self.ln_unnormalized(&omega.occupied) - self.ln_z).exp()
    }

    /// Every N-subset with its probability.
    pub fn law(&self) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        for_each_subset(self.window.len(), self.n, |s| {
            out.push((s.to_vec(), (self.ln_unnormalized(s) - self.ln_z).exp()))
        });
        out
    }
}

pub enum Ensemble<'a> {
    L(&'a SymmetricOperator),
    Op(&'a OpEnsemble),
}

/// ℙ(ω) for an L-ensemble, det L_ω / det(1+L), or an OP ensemble.
pub fn ensemble_probability(ensemble: &Ensemble, omega: &Configuration) -> Result<f64> {
    match ensemble {
        Ensemble::L(l) => {
            if omega.len != l.dim() {
                return Err(Error::Precondition("configuration window differs from L".into()));
            }
            let z = determinant(&l.matrix().add(&Matrix::identity(l.dim())));
            if !(z > 0.0) {
                return Err(Error::Validity(format!("det(1+L) = {z} is not positive")));
            }
            let idx = &omega.occupied;
            Ok(determinant(&l.matrix().select(idx, idx)) / z)
        }
        Ensemble::Op(e) => Ok(e.probability(omega)),
    }
}

/// Full law of an L-ensemble over all 2^m configurations.
pub fn l_ensemble_law(l: &SymmetricOperator) -> Result<Vec<f64>> {
    let m = l.dim();
    if m > crate::fock::MAX_SITES {
        return Err(Error::Size(format!("2^{m} configurations are too many")));
    }
    let e = Ensemble::L(l);
    (0..1usize << m)
        .map(|mask| ensemble_probability(&e, &Configuration::from_mask(m, mask)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

fn has_repeats(points: &[usize]) -> bool {
    points.iter().enumerate().any(|(k, a)| points[..k].contains(a))
}

/// Empirical frequency of joint occupation with a binomial standard error.
pub fn estimate_correlations(samples: &[Configuration], points: &[usize]) -> Result<CorrelationEstimate> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples to estimate from".into()));
    }
    let n = samples.len();
    if has_repeats(points) {
        return Ok(CorrelationEstimate { value: 0.0, stderr: 0.0, n_samples: n });
    }
    let hits = samples
        .iter()
        .filter(|s| points.iter().all(|&p| s.contains(p)))
        .count();
    let p = hits as f64 / n as f64;
    Ok(CorrelationEstimate {
        value: p.clamp(0.0, 1.0),
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        n_samples: n,
    })
}

/// Σ of an explicit law over 2^m configurations containing all points.
pub fn enumerate_correlations(prob: &[f64], points: &[usize]) -> Result<f64> {
    let m = prob.len().trailing_zeros() as usize;
    if !prob.len().is_power_of_two() {
        return Err(Error::Precondition("law length must be a power of two".into()));
    }
    if m > crate::fock::MAX_SITES {
        return Err(Error::Size(format!("2^{m} configurations are too many")));
    }
    if points.iter().any(|&p| p >= m) {
        return Err(Error::Precondition("point outside the window".into()));
    }
    if has_repeats(points) {
        return Ok(0.0);
    }
    let need = points.iter().fold(0usize, |a, &p| a | (1 << p));
    Ok(prob
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask & need == need)
        .map(|(_, p)| p)
        .sum())
}

/// Correlation of an N-point law given as explicit subsets.
pub fn subset_correlation(law: &[(Vec<usize>, f64)], points: &[usize]) -> f64 {
    if has_repeats(points) {
        return 0.0;
    }
    law.iter()
        .filter(|(s, _)| points.iter().all(|p| s.binary_search(p).is_ok()))
        .map(|(_, p)| p)
        .sum()
}
