//! Cyclic transfer chains: probability of a closed path is the product of
//! transfer entries divided by the trace of the cyclic product.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Debug)]
pub(crate) struct CyclicChain {
    /// transfers[i] carries state i to state i+1; the last one wraps around.
    pub transfers: Vec<Matrix>,
    pub normalizer: f64,
    // prefix[k] = A_0 ⋯ A_{k−1}, suffix[k] = A_k ⋯ A_{n−1}
    prefix: Vec<Matrix>,
    suffix: Vec<Matrix>,
    first_marginal: Vec<f64>,
}

impl CyclicChain {
    pub fn new(transfers: Vec<Matrix>) -> Result<Self> {
        let n = transfers.len();
        let dim = transfers[0].rows();
        let mut suffix = vec![Matrix::identity(dim); n + 1];
        for j in (0..n).rev() {
            suffix[j] = transfers[j].matmul(&suffix[j + 1]);
        }
        let mut prefix = vec![Matrix::identity(dim); n];
        for j in 1..n {
            prefix[j] = prefix[j - 1].matmul(&transfers[j - 1]);
        }
        let diag = suffix[0].diagonal();
        let normalizer: f64 = diag.iter().sum();
        if !(normalizer > 0.0) || !normalizer.is_finite() {
            return Err(Error::numerical("path law normalizer is not positive", normalizer));
        }
        let first_marginal = diag.iter().map(|d| d.max(0.0) / normalizer).collect();
        Ok(CyclicChain { transfers, normalizer, prefix, suffix, first_marginal })
    }

    pub fn dim(&self) -> usize {
        self.transfers[0].rows()
    }

    pub fn probability(&self, path: &[usize]) -> f64 {
        assert_eq!(path.len(), self.transfers.len(), "path length differs from the grid");
        let n = path.len();
        let mut p = 1.0;
        for i in 0..n {
            p *= self.transfers[i][(path[i], path[(i + 1) % n])];
        }
        p / self.normalizer
    }

    pub fn first_marginal(&self) -> &[f64] {
        &self.first_marginal
    }

    /// One-time marginal at position k.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        if k == 0 {
            return self.first_marginal.clone();
        }
        let (s, p) = (&self.suffix[k], &self.prefix[k]);
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| s[(i, j)] * p[(j, i)]).sum::<f64>().max(0.0) / self.normalizer)
            .collect()
    }

    pub fn enumerate(&self) -> Result<Vec<(Vec<usize>, f64)>> {
        let dim = self.dim();
        let n = self.transfers.len();
        let total = (dim as f64).powi(n as i32);
        if total > 1e7 {
            return Err(Error::Size(format!("{total} paths are too many to enumerate")));
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut path = vec![0usize; n];
        loop {
            out.push((path.clone(), self.probability(&path)));
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                path[k] += 1;
                if path[k] < dim {
                    break;
                }
                path[k] = 0;
            }
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let n = self.transfers.len();
        let dim = self.dim();
        let first = WeightedIndex::new(&self.first_marginal)
            .expect("marginal has positive mass")
            .sample(rng);
        let mut path = Vec::with_capacity(n);
        path.push(first);
        for k in 1..n {
            let prev = path[k - 1];
            let w: Vec<f64> = (0..dim)
                .map(|s| (self.transfers[k - 1][(prev, s)] * self.suffix[k][(s, first)]).max(0.0))
                .collect();
            path.push(WeightedIndex::new(&w).expect("conditional has positive mass").sample(rng));
        }
        path
    }
}
