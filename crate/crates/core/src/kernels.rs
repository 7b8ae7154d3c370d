//! Static and space-time correlation kernels.

use crate::error::{Error, Result};
use crate::linalg::{
    apply_spectral_function, determinant, eig_sym, eig_sym_matrix, Matrix, SpectralDecomposition,
    SpectralFunction, SymmetricOperator,
};
use crate::orthopoly::{jacobi_operator, ln_continuous_mass, recurrence_coefficients, FamilySpec, PolynomialTable};

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    Fermi { beta: f64 },
    Projection,
    ChristoffelDarboux { family: String, n: usize },
    Integral { family: String },
    Custom,
}

/// Dense symmetric kernel K(x,y) indexed by window sites.
#[derive(Clone, Debug)]
pub struct CorrelationKernel {
    pub sites: Vec<f64>,
    pub values: Matrix,
    pub kind: KernelKind,
}

impl CorrelationKernel {
    pub fn new(values: Matrix, sites: Vec<f64>, kind: KernelKind) -> Result<Self> {
        if !values.is_square() || values.rows() != sites.len() {
            return Err(Error::Precondition("kernel shape does not match its sites".into()));
        }
        if !values.is_finite() {
            return Err(Error::Validity("kernel has non-finite entries".into()));
        }
        let asym = values.asymmetry();
        if asym > 1e-10 {
            return Err(Error::Validity(format!("kernel asymmetry {asym:e} exceeds 1e-10")));
        }
        Ok(CorrelationKernel { sites, values, kind })
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn index_of(&self, site: f64) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    /// det[K(x_i, x_j)] over window indices; repeated indices give 0.
    pub fn correlation(&self, idx: &[usize]) -> f64 {
        if has_repeats(idx) {
            return 0.0;
        }
        determinant(&self.values.select(idx, idx))
    }

    /// ‖K² − K‖_max.
    pub fn idempotence_residual(&self) -> f64 {
        self.values.matmul(&self.values).max_abs_diff(&self.values)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_sym_matrix(&self.values)?.eigenvalues)
    }

    /// Checks that the spectrum lies in [−tol, 1+tol].
    pub fn check_spectrum(&self, tol: f64) -> Result<()> {
        let ev = self.eigenvalues()?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -tol || hi > 1.0 + tol {
            return Err(Error::Validity(format!("kernel spectrum [{lo}, {hi}] leaves [0, 1]")));
        }
        Ok(())
    }
}

fn has_repeats(idx: &[usize]) -> bool {
    idx.iter().enumerate().any(|(k, a)| idx[..k].contains(a))
}

/// e^{−βH}(1+e^{−βH})^{−1}.
pub fn fermi_kernel(h: &SymmetricOperator, beta: f64) -> Result<CorrelationKernel> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Precondition(format!("beta must be positive and finite, got {beta}")));
    }
    let dec = eig_sym(h)?;
    let k = apply_spectral_function(&dec, &SpectralFunction::Fermi(beta), h.sites())?;
    CorrelationKernel::new(k.matrix().clone(), h.sites().to_vec(), KernelKind::Fermi { beta })
}

fn gap_check(dec: &SpectralDecomposition) -> Result<()> {
    let bad = dec.near_zero();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Gap(bad))
    }
}

/// Spectral projection onto {H < 0}.
pub fn negative_projection(h: &SymmetricOperator) -> Result<CorrelationKernel> {
    let dec = eig_sym(h)?;
    gap_check(&dec)?;
    let k = apply_spectral_function(&dec, &SpectralFunction::NegativeIndicator, h.sites())?;
    CorrelationKernel::new(k.matrix().clone(), h.sites().to_vec(), KernelKind::Projection)
}

/// Σ_{n<N} p_n(x) p_n(y).
pub fn cd_kernel(table: &PolynomialTable) -> Result<CorrelationKernel> {
    let p = &table.values;
    let k = p.transpose().matmul(p);
    let k = Matrix::from_fn(k.rows(), k.cols(), |i, j| 0.5 * (k[(i, j)] + k[(j, i)]));
    CorrelationKernel::new(
        k,
        table.window.sites(),
        KernelKind::ChristoffelDarboux {
            family: table.family.name().to_string(),
            n: table.count(),
        },
    )
}

/// Region of the spectral variable u.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    Full,
    /// (r, ∞) ∩ support
    Above(f64),
    /// (−∞, r) ∩ support
    Below(f64),
    Between(f64, f64),
}

struct Support {
    lo: f64,
    hi: f64,
    /// exponent of (u − lo) and (hi − u) in the weight
    e_lo: f64,
    e_hi: f64,
}

fn support(family: &FamilySpec) -> Result<Support> {
    match *family {
        FamilySpec::Hermite => Ok(Support { lo: f64::NEG_INFINITY, hi: f64::INFINITY, e_lo: 0.0, e_hi: 0.0 }),
        FamilySpec::Laguerre { c } => Ok(Support { lo: 0.0, hi: f64::INFINITY, e_lo: c - 1.0, e_hi: 0.0 }),
        FamilySpec::Jacobi { a, b } => Ok(Support { lo: -1.0, hi: 1.0, e_lo: b, e_hi: a }),
        _ => Err(Error::Precondition(format!("{} is not a continuous family", family.name()))),
    }
}

// ln of the weight with the endpoint powers removed.
fn ln_smooth_weight(family: &FamilySpec, u: f64) -> f64 {
    match family {
        FamilySpec::Hermite => -u * u,
        FamilySpec::Laguerre { .. } => -u,
        _ => 0.0,
    }
}

fn gauss_rule(order: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let fam = FamilySpec::Jacobi { a, b };
    let dec = eig_sym(&jacobi_operator(&fam, order)?)?;
    let mass = ln_continuous_mass(&fam)?.exp();
    let w = (0..order).map(|k| mass * dec.eigenvectors[(0, k)].powi(2)).collect();
    Ok((dec.eigenvalues, w))
}

const MIN_ORDER: usize = 16;
const MAX_ORDER: usize = 256;

/// Nodes and weights.
type GaussRule = (Vec<f64>, Vec<f64>);

/// K(x,y) = ∫_I p_x(u) p_y(u) w(u) du on x, y ∈ 0..dim−1. With finite β the
/// indicator of a half-line (r, ∞) or (−∞, r) is replaced by its logistic
/// smoothing at inverse temperature β.
pub fn integral_kernel(
    family: &FamilySpec,
    interval: Interval,
    dim: usize,
    beta: f64,
) -> Result<CorrelationKernel> {
    family.validate()?;
    let sup = support(family)?;
    if dim == 0 {
        return Err(Error::Precondition("integral kernel needs dim >= 1".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("beta must be positive, got {beta}")));
    }
    let (b_coef, a_coef) = recurrence_coefficients(family, dim.max(2))?;
    let ln_mass = ln_continuous_mass(family)?;

    let (mut lo, mut hi, cut, smooth): (f64, f64, Option<f64>, Option<(f64, f64)>) = if beta.is_infinite() {
        let (l, h) = match interval {
            Interval::Full => (sup.lo, sup.hi),
            Interval::Above(r) => (r, sup.hi),
            Interval::Below(r) => (sup.lo, r),
            Interval::Between(l, h) => (l, h),
        };
        if !(l < h) || l < sup.lo || h > sup.hi {
            return Err(Error::Precondition(format!("interval ({l}, {h}) not inside the support")));
        }
        (l, h, None, None)
    } else {
        match interval {
            Interval::Full => (sup.lo, sup.hi, None, None),
            Interval::Above(r) => (sup.lo, sup.hi, Some(r), Some((r, -1.0))),
            Interval::Below(r) => (sup.lo, sup.hi, Some(r), Some((r, 1.0))),
            Interval::Between(..) => {
                return Err(Error::Precondition(
                    "finite beta needs a half-line or the full support".into(),
                ))
            }
        }
    };

    // truncate infinite ends past the turning point of the highest function
    let n = dim as f64;
    match family {
        FamilySpec::Hermite => {
            let l = (2.0 * n + 1.0).sqrt() + 12.0;
            lo = lo.max(-l);
            hi = hi.min(l);
        }
        FamilySpec::Laguerre { c } => {
            hi = hi.min(4.0 * n + 2.0 * c + 40.0 + 8.0 * n.sqrt());
        }
        _ => {}
    }
    if !(lo < hi) {
        return CorrelationKernel::new(
            Matrix::zeros(dim, dim),
            (0..dim).map(|x| x as f64).collect(),
            KernelKind::Integral { family: family.name().to_string() },
        );
    }

    let mut breaks = vec![lo];
    if let Some(c) = cut {
        if c > lo && c < hi {
            breaks.push(c);
        }
    }
    breaks.push(hi);
    let panels_per_unit = match family {
        FamilySpec::Hermite => (2.0 * n + 1.0).sqrt() / 2.0,
        FamilySpec::Laguerre { .. } => 0.5,
        _ => n / 2.0,
    };

    let integrate = |order: usize| -> Result<Matrix> {
        let mut k = Matrix::zeros(dim, dim);
        let mut psi = vec![0.0; dim];
        let mut rules: Vec<((f64, f64), GaussRule)> = Vec::new();
        for seg in breaks.windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let count = ((s1 - s0) * panels_per_unit).ceil().max(2.0) as usize;
            let h = (s1 - s0) / count as f64;
            for p in 0..count {
                let p0 = s0 + p as f64 * h;
                let p1 = if p + 1 == count { s1 } else { p0 + h };
                let el = if p == 0 && s0 == sup.lo { sup.e_lo } else { 0.0 };
                let er = if p + 1 == count && s1 == sup.hi { sup.e_hi } else { 0.0 };
                if !rules.iter().any(|(key, _)| *key == (er, el)) {
                    rules.push(((er, el), gauss_rule(order, er, el)?));
                }
                let (_, (nodes, weights)) = &rules.iter().find(|(key, _)| *key == (er, el)).expect("cached rule");
                let half = 0.5 * (p1 - p0);
                let jac_ln = (el + er + 1.0) * half.ln();
                for (&v, &wq) in nodes.iter().zip(weights.iter()) {
                    let u = p0 + half * (1.0 + v);
                    let mut lw = ln_smooth_weight(family, u) - ln_mass + jac_ln;
                    if el == 0.0 && sup.e_lo != 0.0 && sup.lo.is_finite() {
                        lw += sup.e_lo * (u - sup.lo).ln();
                    }
                    if er == 0.0 && sup.e_hi != 0.0 && sup.hi.is_finite() {
                        lw += sup.e_hi * (sup.hi - u).ln();
                    }
                    let mut scale = wq * lw.exp();
                    if let Some((r, sign)) = smooth {
                        scale *= crate::linalg::fermi(beta, sign * (u - r));
                    }
                    if scale == 0.0 {
                        continue;
                    }
                    // orthonormal values scaled by √(quadrature weight)
                    psi[0] = scale.sqrt();
                    if dim > 1 {
                        psi[1] = (u - b_coef[0]) * psi[0] / a_coef[0];
                    }
                    for x in 1..dim.saturating_sub(1) {
                        psi[x + 1] = ((u - b_coef[x]) * psi[x] - a_coef[x - 1] * psi[x - 1]) / a_coef[x];
                    }
                    for i in 0..dim {
                        for j in 0..=i {
                            k[(i, j)] += psi[i] * psi[j];
                        }
                    }
                }
            }
        }
        for i in 0..dim {
            for j in 0..i {
                k[(j, i)] = k[(i, j)];
            }
        }
        Ok(k)
    };

    let mut order = MIN_ORDER;
    let mut prev = integrate(order)?;
    loop {
        let next_order = order * 2;
        if next_order > MAX_ORDER {
            return Err(Error::numerical(
                format!("quadrature did not settle by order {MAX_ORDER}"),
                f64::NAN,
            ));
        }
        let next = integrate(next_order)?;
        let change = next.max_abs_diff(&prev);
        if change < 1e-10 {
            return CorrelationKernel::new(
                next,
                (0..dim).map(|x| x as f64).collect(),
                KernelKind::Integral { family: family.name().to_string() },
            );
        }
        prev = next;
        order = next_order;
    }
}

/// (x, t) with x a window index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub site: usize,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(site: usize, time: f64) -> Self {
        SpaceTimePoint { site, time }
    }
}

/// Spectral factor of R for one eigenvalue; u = s − t.
pub fn branch_factor(lambda: f64, beta: f64, u: f64) -> f64 {
    if u >= 0.0 {
        if beta.is_infinite() {
            return if lambda < 0.0 { (u * lambda).exp() } else { 0.0 };
        }
        if lambda >= 0.0 {
            ((u - beta) * lambda).exp() / (1.0 + (-beta * lambda).exp())
        } else {
            (u * lambda).exp() / (1.0 + (beta * lambda).exp())
        }
    } else {
        let v = -u;
        if beta.is_infinite() {
            return if lambda > 0.0 { -(-v * lambda).exp() } else { 0.0 };
        }
        if lambda > 0.0 {
            -(-v * lambda).exp() / (1.0 + (-beta * lambda).exp())
        } else {
            -((beta - v) * lambda).exp() / (1.0 + (beta * lambda).exp())
        }
    }
}

/// R_{H,β}(x,t; y,s) through the eigenbasis of H; β may be infinite.
#[derive(Clone, Debug)]
pub struct SpaceTimeKernel {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: Matrix,
    pub sites: Vec<f64>,
    pub beta: f64,
}

pub fn space_time_kernel(h: &SymmetricOperator, beta: f64) -> Result<SpaceTimeKernel> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("beta must be positive or infinite, got {beta}")));
    }
    let dec = eig_sym(h)?;
    if beta.is_infinite() {
        gap_check(&dec)?;
    }
    Ok(SpaceTimeKernel {
        eigenvalues: dec.eigenvalues,
        eigenvectors: dec.eigenvectors,
        sites: h.sites().to_vec(),
        beta,
    })
}

impl SpaceTimeKernel {
    /// Builds from explicit modes: λ_n and φ_n stored as columns.
    pub fn from_modes(eigenvalues: Vec<f64>, eigenvectors: Matrix, sites: Vec<f64>, beta: f64) -> Result<Self> {
        if eigenvectors.cols() != eigenvalues.len() || eigenvectors.rows() != sites.len() {
            return Err(Error::Precondition("mode data has inconsistent shape".into()));
        }
        Ok(SpaceTimeKernel { eigenvalues, eigenvectors, sites, beta })
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn in_domain(&self, t: f64) -> bool {
        self.beta.is_infinite() || t.abs() <= self.beta / 2.0 + 1e-12 * self.beta
    }

    /// Evaluation without domain checks.
    pub fn value(&self, x: usize, t: f64, y: usize, s: f64) -> f64 {
        let v = &self.eigenvectors;
        let u = s - t;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| v[(x, k)] * v[(y, k)] * branch_factor(l, self.beta, u))
            .sum()
    }

    pub fn eval(&self, x: usize, t: f64, y: usize, s: f64) -> Result<f64> {
        if x >= self.dim() || y >= self.dim() {
            return Err(Error::Precondition("site index outside the window".into()));
        }
        if (t - s).abs() > self.beta {
            return Err(Error::Domain(format!("|t - s| = {} exceeds beta", (t - s).abs())));
        }
        Ok(self.value(x, t, y, s))
    }

    /// Equal-time kernel.
    pub fn static_kernel(&self) -> Result<CorrelationKernel> {
        let n = self.dim();
        let m = Matrix::from_fn(n, n, |i, j| self.value(i, 0.0, j, 0.0));
        let m = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        let kind = if self.beta.is_infinite() {
            KernelKind::Projection
        } else {
            KernelKind::Fermi { beta: self.beta }
        };
        CorrelationKernel::new(m, self.sites.clone(), kind)
    }

    /// The n×n matrix R(x_i,t_i; x_j,t_j).
    pub fn matrix(&self, points: &[SpaceTimePoint]) -> Matrix {
        let n = points.len();
        Matrix::from_fn(n, n, |i, j| {
            let (p, q) = (points[i], points[j]);
            self.value(p.site, p.time, q.site, q.time)
        })
    }
}

/// det[R(x_i,t_i; x_j,t_j)] for time-ordered points.
pub fn dynamical_correlation(kernel: &SpaceTimeKernel, points: &[SpaceTimePoint]) -> Result<f64> {
    for w in points.windows(2) {
        if w[1].time < w[0].time {
            return Err(Error::Precondition("points must be sorted by time".into()));
        }
    }
    for p in points {
        if p.site >= kernel.dim() {
            return Err(Error::Precondition(format!("site index {} outside the window", p.site)));
        }
        if !p.time.is_finite() || !kernel.in_domain(p.time) {
            return Err(Error::Domain(format!("time {} outside [-beta/2, beta/2]", p.time)));
        }
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q.site == p.site && q.time == p.time) {
            return Ok(0.0);
        }
    }
    Ok(determinant(&kernel.matrix(points)))
}

/// Space-time kernel of an orthogonal polynomial ensemble from the
/// polynomial table and the eigenvalue law m_n, with H = −(D + μ).
pub fn op_space_time_kernel(table: &PolynomialTable, mu: f64, beta: f64) -> Result<SpaceTimeKernel> {
    let count = table.count();
    let mut eig = Vec::with_capacity(count);
    for n in 0..count {
        let m = table
            .family
            .eigenvalue(n)
            .ok_or_else(|| Error::Precondition(format!("{} has no eigenvalue law", table.family.name())))?;
        eig.push(-(m + mu));
    }
    if beta.is_infinite() && eig.iter().any(|l| l.abs() < 1e-10) {
        return Err(Error::Gap(eig.iter().copied().filter(|l| l.abs() < 1e-10).collect()));
    }
    SpaceTimeKernel::from_modes(eig, table.values.transpose(), table.window.sites(), beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_factor_examples() {
        assert!((branch_factor(1.0, 3f64.ln(), -3f64.ln()) + 0.25).abs() < 1e-15);
        assert!((branch_factor(-1.0, f64::INFINITY, 0.7) - (-0.7f64).exp()).abs() < 1e-15);
        assert_eq!(branch_factor(1.0, f64::INFINITY, 0.7), 0.0);
        assert!(branch_factor(1e4, 2.0, 1.0).is_finite());
        assert!(branch_factor(-1e4, 2.0, -1.0).is_finite());
    }

    #[test]
    fn zero_hamiltonian_gives_half_identity() {
        let h = SymmetricOperator::from_matrix(Matrix::zeros(3, 3)).unwrap();
        let k = fermi_kernel(&h, 1.3).unwrap();
        assert!(k.values.max_abs_diff(&Matrix::identity(3).scale(0.5)) < 1e-15);
    }

    #[test]
    fn gap_is_enforced() {
        let h = SymmetricOperator::from_matrix(Matrix::from_diag(&[-1.0, 0.0])).unwrap();
        assert!(matches!(negative_projection(&h), Err(Error::Gap(_))));
        assert!(matches!(space_time_kernel(&h, f64::INFINITY), Err(Error::Gap(_))));
    }
}
