//! Dense real linear algebra: symmetric eigendecomposition, functional
//! calculus, LU determinants and Parlett-Reid Pfaffians.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Submatrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Real symmetric truncation of an operator on an ordered site window.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricOperator {
    matrix: Matrix,
    sites: Vec<f64>,
}

impl SymmetricOperator {
    pub fn new(matrix: Matrix, sites: Vec<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Precondition("operator matrix must be square".into()));
        }
        if matrix.rows() == 0 {
            return Err(Error::Precondition("operator dimension must be positive".into()));
        }
        if sites.len() != matrix.rows() {
            return Err(Error::Precondition(format!(
                "{} site labels for dimension {}",
                sites.len(),
                matrix.rows()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::Precondition("operator has non-finite entries".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("site labels must be strictly increasing".into()));
        }
        let asym = matrix.asymmetry();
        if asym > 1e-12 * (1.0 + matrix.max_abs()) {
            return Err(Error::Precondition(format!("matrix not symmetric (asymmetry {asym:e})")));
        }
        Ok(SymmetricOperator { matrix, sites })
    }

    /// Operator on sites 0..n-1.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        let n = matrix.rows();
        Self::new(matrix, (0..n).map(|i| i as f64).collect())
    }

    pub fn tridiagonal(diag: &[f64], off: &[f64], sites: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if off.len() + 1 != n {
            return Err(Error::Precondition("off-diagonal length must be dim-1".into()));
        }
        let mut m = Matrix::from_diag(diag);
        for (i, &a) in off.iter().enumerate() {
            m[(i, i + 1)] = a;
            m[(i + 1, i)] = a;
        }
        Self::new(m, sites)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// a·self + b·I on the same window.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let mut m = self.matrix.scale(a);
        for i in 0..self.dim() {
            m[(i, i)] += b;
        }
        SymmetricOperator {
            matrix: m,
            sites: self.sites.clone(),
        }
    }

    /// Conjugation by a diagonal sign matrix.
    pub fn conjugate_signs(&self, signs: &[f64]) -> Self {
        let m = Matrix::from_fn(self.dim(), self.dim(), |i, j| {
            signs[i] * signs[j] * self.matrix[(i, j)]
        });
        SymmetricOperator {
            matrix: m,
            sites: self.sites.clone(),
        }
    }

    /// Restriction to a contiguous index range.
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Self> {
        let idx: Vec<usize> = (lo..hi).collect();
        Self::new(self.matrix.select(&idx, &idx), self.sites[lo..hi].to_vec())
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// ‖VᵀV − I‖_max.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        v.transpose().matmul(v).max_abs_diff(&Matrix::identity(self.dim()))
    }

    /// ‖V diag(λ) Vᵀ − A‖_max.
    pub fn reconstruction_residual(&self, a: &Matrix) -> f64 {
        self.reconstruct(|l| l).max_abs_diff(a)
    }

    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Eigenvalues with |λ| ≤ 1e-10·(1+max|λ|).
    pub fn near_zero(&self) -> Vec<f64> {
        let tol = 1e-10 * (1.0 + self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs())));
        self.eigenvalues.iter().copied().filter(|l| l.abs() <= tol).collect()
    }
}

const MAX_QL_ITERATIONS: usize = 60;

/// Householder tridiagonalization followed by implicit QL.
pub fn eig_sym(a: &SymmetricOperator) -> Result<SpectralDecomposition> {
    eig_sym_matrix(a.matrix())
}

pub(crate) fn eig_sym_matrix(a: &Matrix) -> Result<SpectralDecomposition> {
    let n = a.rows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    // symmetrize exactly so the output depends only on the lower triangle
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if j <= i { a[(i, j)] } else { a[(j, i)] }).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    // columns of v become rows of vt for cache-friendly rotations
    let mut vt: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    tql2(&mut vt, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let vec = &vt[k];
        let mut big = 0;
        for i in 1..n {
            if vec[i].abs() > vec[big].abs() {
                big = i;
            }
        }
        let sign = if vec[big] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, col)] = sign * vec[i];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// `vt[k]` holds eigenvector column k.
fn tql2(vt: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::numerical(
                        format!("QL iteration did not converge at index {l}"),
                        e[l].abs(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut(i + 1);
                    let col_i = &mut lo[i];
                    let col_next = &mut hi[0];
                    for k in 0..n {
                        let hk = col_next[k];
                        col_next[k] = s * col_i[k] + c * hk;
                        col_i[k] = c * col_i[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Closed registry of scalar functions applied to a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralFunction {
    /// e^{cλ}
    Exp(f64),
    /// 1/(1+e^{βλ})
    Fermi(f64),
    /// 1 for λ < 0, strictly; near-zero eigenvalues are excluded.
    NegativeIndicator,
    /// f(λ − shift)
    Shifted(f64, Box<SpectralFunction>),
}

impl SpectralFunction {
    /// Build from a textual tag; parameters are consumed in order.
    pub fn from_tag(tag: &str, params: &[f64]) -> Result<Self> {
        let need = |k: usize| -> Result<()> {
            if params.len() < k {
                Err(Error::Config(format!("function '{tag}' needs {k} parameter(s)")))
            } else {
                Ok(())
            }
        };
        match tag {
            "exp" => {
                need(1)?;
                Ok(SpectralFunction::Exp(params[0]))
            }
            "fermi" => {
                need(1)?;
                Ok(SpectralFunction::Fermi(params[0]))
            }
            "indicator" | "negative_indicator" => Ok(SpectralFunction::NegativeIndicator),
            t if t.starts_with("shifted_") => {
                need(1)?;
                let inner = Self::from_tag(&t["shifted_".len()..], &params[1..])?;
                Ok(SpectralFunction::Shifted(params[0], Box::new(inner)))
            }
            other => Err(Error::Config(format!(
                "unknown spectral function '{other}' (expected exp, fermi, indicator, shifted_*)"
            ))),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            SpectralFunction::Exp(c) => (c * lambda).exp(),
            SpectralFunction::Fermi(beta) => fermi(*beta, lambda),
            SpectralFunction::NegativeIndicator => {
                if lambda < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SpectralFunction::Shifted(shift, inner) => inner.eval(lambda - shift),
        }
    }

    fn is_indicator(&self) -> bool {
        match self {
            SpectralFunction::NegativeIndicator => true,
            SpectralFunction::Shifted(_, inner) => inner.is_indicator(),
            _ => false,
        }
    }
}

/// 1/(1+e^{βλ}), branch-stable and clamped to [0,1].
pub fn fermi(beta: f64, lambda: f64) -> f64 {
    let x = beta * lambda;
    let v = if x >= 0.0 {
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp())
    };
    v.clamp(0.0, 1.0)
}

/// V f(diag λ) Vᵀ. For indicator functions, eigenvalues within
/// 1e-10·(1+max|λ|) of zero count as non-negative.
pub fn apply_spectral_function(
    dec: &SpectralDecomposition,
    f: &SpectralFunction,
    sites: &[f64],
) -> Result<SymmetricOperator> {
    let m = if f.is_indicator() {
        let scale = 1.0 + dec.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let tol = 1e-10 * scale;
        dec.reconstruct(|l| {
            let shifted = match f {
                SpectralFunction::Shifted(s, _) => l - s,
                _ => l,
            };
            if shifted.abs() <= tol {
                0.0
            } else {
                f.eval(l)
            }
        })
    } else {
        dec.reconstruct(|l| f.eval(l))
    };
    SymmetricOperator::new(m, sites.to_vec())
}

/// Determinant by LU with partial pivoting; the empty matrix gives 1.
pub fn determinant(a: &Matrix) -> f64 {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[(i, k)].abs() > m[(p, k)].abs() {
                p = i;
            }
        }
        if m[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = m[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let factor = m[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k + 1..n {
                m[(i, j)] -= factor * m[(k, j)];
            }
        }
    }
    det
}

/// Skew-symmetric matrix with an exactly zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewSymmetricMatrix {
    matrix: Matrix,
}

impl SkewSymmetricMatrix {
    pub fn new(mut matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Precondition("skew matrix must be square".into()));
        }
        let n = matrix.rows();
        for i in 0..n {
            for j in 0..i {
                if (matrix[(i, j)] + matrix[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Precondition(format!("entry ({i},{j}) breaks skew symmetry")));
                }
            }
            matrix[(i, i)] = 0.0;
        }
        Ok(SkewSymmetricMatrix { matrix })
    }

    /// Builds A from its strict upper triangle.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = upper(i, j);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        SkewSymmetricMatrix { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

/// Pfaffian by Parlett-Reid tridiagonalization with partial pivoting.
pub fn pfaffian(a: &SkewSymmetricMatrix) -> Result<f64> {
    let n = a.dim();
    if n % 2 == 1 {
        return Err(Error::Precondition(format!("Pfaffian needs even dimension, got {n}")));
    }
    let mut m = a.matrix.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        for i in k + 2..n {
            if m[(i, k)].abs() > m[(kp, k)].abs() {
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                m.data.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                m.data.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        if m[(k + 1, k)] == 0.0 {
            return Ok(0.0);
        }
        let akk1 = m[(k, k + 1)];
        pf *= akk1;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[(k, j)] / akk1).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    Ok(pf)
}

/// Interleaves B into the 2n×2n skew matrix with zero (1,1) and (2,2)
/// blocks, whose Pfaffian equals det B.
pub fn interleave_block_skew(b: &Matrix) -> SkewSymmetricMatrix {
    assert!(b.is_square());
    let n = b.rows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(2 * i, 2 * j + 1)] = b[(i, j)];
            m[(2 * j + 1, 2 * i)] = -b[(i, j)];
        }
    }
    SkewSymmetricMatrix { matrix: m }
}
