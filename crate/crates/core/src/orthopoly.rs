//! Weights, recurrences, difference and Jacobi operators, and limit ladders
//! for the classical orthogonal polynomial families.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricOperator};
use crate::special::{ln_abs_gamma_complex, ln_gamma, ln_gamma_signed, ln_poch_signed};

/// A parameter pair (z, z') with (z+k)(z'+k) > 0 for every integer k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamPair {
    /// z = re + i·im, z' = conj(z).
    Principal { re: f64, im: f64 },
    /// Real z, z' strictly inside the same unit interval (k, k+1).
    Complementary(f64, f64),
}

impl ParamPair {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ParamPair::Principal { re, im } => {
                if !re.is_finite() || !im.is_finite() || im == 0.0 {
                    return Err(Error::Validity("principal pair needs a non-real z".into()));
                }
            }
            ParamPair::Complementary(z, zp) => {
                let same_cell = z.floor() == zp.floor() && z != z.floor() && zp != zp.floor();
                if !same_cell {
                    return Err(Error::Validity(format!(
                        "complementary pair ({z}, {zp}) must lie strictly inside one interval (k, k+1)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// (z+k)(z'+k)
    pub fn product(&self, k: f64) -> f64 {
        match *self {
            ParamPair::Principal { re, im } => (re + k) * (re + k) + im * im,
            ParamPair::Complementary(z, zp) => (z + k) * (zp + k),
        }
    }

    /// z + z'
    pub fn sum(&self) -> f64 {
        match *self {
            ParamPair::Principal { re, .. } => 2.0 * re,
            ParamPair::Complementary(z, zp) => z + zp,
        }
    }

    /// ln|Γ(s·z + shift)Γ(s·z' + shift)| and its sign, s = ±1.
    fn ln_gamma_product(&self, s: f64, shift: f64) -> (f64, f64) {
        match *self {
            ParamPair::Principal { re, im } => {
                let v = ln_abs_gamma_complex(Complex64::new(s * re + shift, s * im));
                (2.0 * v, 1.0)
            }
            ParamPair::Complementary(z, zp) => {
                let (a, sa) = ln_gamma_signed(s * z + shift);
                let (b, sb) = ln_gamma_signed(s * zp + shift);
                (a + b, sa * sb)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilySpec {
    Meixner { c: f64, xi: f64 },
    Charlier { mu: f64 },
    Krawtchouk { m: usize, p: f64 },
    Hahn { m: usize, a: f64, b: f64 },
    Racah { m: usize, alpha: f64, beta: f64, gamma: f64, delta: f64 },
    Hermite,
    Laguerre { c: f64 },
    Jacobi { a: f64, b: f64 },
    AskeyLesky { u: ParamPair, w: ParamPair },
    DiscreteHypergeometric { z: ParamPair, xi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    NonNegative,
    Integers,
    HalfIntegers,
    Finite(usize),
}

impl Lattice {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Lattice::NonNegative => x >= 0.0 && x == x.floor(),
            Lattice::Integers => x == x.floor(),
            Lattice::HalfIntegers => (x - 0.5) == (x - 0.5).floor(),
            Lattice::Finite(m) => x >= 0.0 && x <= m as f64 && x == x.floor(),
        }
    }
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Meixner { .. } => "meixner",
            FamilySpec::Charlier { .. } => "charlier",
            FamilySpec::Krawtchouk { .. } => "krawtchouk",
            FamilySpec::Hahn { .. } => "hahn",
            FamilySpec::Racah { .. } => "racah",
            FamilySpec::Hermite => "hermite",
            FamilySpec::Laguerre { .. } => "laguerre",
            FamilySpec::Jacobi { .. } => "jacobi",
            FamilySpec::AskeyLesky { .. } => "askey_lesky",
            FamilySpec::DiscreteHypergeometric { .. } => "discrete_hypergeometric",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validity(msg));
        match *self {
            FamilySpec::Meixner { c, xi } => {
                if !(c > 0.0) || !(xi > 0.0 && xi < 1.0) {
                    return bad(format!("meixner needs c > 0 and 0 < xi < 1 (c={c}, xi={xi})"));
                }
            }
            FamilySpec::Charlier { mu } => {
                if !(mu > 0.0) {
                    return bad(format!("charlier needs mu > 0 (mu={mu})"));
                }
            }
            FamilySpec::Krawtchouk { m, p } => {
                if m == 0 || !(p > 0.0 && p < 1.0) {
                    return bad(format!("krawtchouk needs M >= 1 and 0 < p < 1 (M={m}, p={p})"));
                }
            }
            FamilySpec::Hahn { m, a, b } => {
                if m == 0 || !(a > -1.0) || !(b > -1.0) {
                    return bad(format!("hahn needs M >= 1, a > -1, b > -1 (M={m}, a={a}, b={b})"));
                }
            }
            FamilySpec::Racah { m, alpha, beta, gamma, delta } => {
                let mf = m as f64;
                let tied = near_integer(alpha + 1.0 + mf)
                    && (alpha + 1.0 + mf).abs() < 1e-12
                    || (beta + delta + 1.0 + mf).abs() < 1e-12
                    || (gamma + 1.0 + mf).abs() < 1e-12;
                if m == 0 || !tied {
                    return bad(format!(
                        "racah needs alpha+1=-M or beta+delta+1=-M or gamma+1=-M (M={m})"
                    ));
                }
                let gd = gamma + delta;
                if near_integer(gd) && (gd.round() == 0.0 || gd.round() == -1.0) {
                    return bad("racah needs gamma+delta outside {0, -1}".into());
                }
            }
            FamilySpec::Hermite => {}
            FamilySpec::Laguerre { c } => {
                if !(c > 0.0) {
                    return bad(format!("laguerre needs c > 0 (c={c})"));
                }
            }
            FamilySpec::Jacobi { a, b } => {
                if !(a > -1.0) || !(b > -1.0) {
                    return bad(format!("jacobi needs a > -1 and b > -1 (a={a}, b={b})"));
                }
            }
            FamilySpec::AskeyLesky { u, w } => {
                u.validate()?;
                w.validate()?;
            }
            FamilySpec::DiscreteHypergeometric { z, xi } => {
                z.validate()?;
                if !(xi > 0.0 && xi < 1.0) {
                    return bad(format!("discrete hypergeometric needs 0 < xi < 1 (xi={xi})"));
                }
            }
        }
        Ok(())
    }

    pub fn is_continuous(&self) -> bool {
        matches!(
            self,
            FamilySpec::Hermite | FamilySpec::Laguerre { .. } | FamilySpec::Jacobi { .. }
        )
    }

    /// Families whose weight is a classical orthogonal polynomial weight on a lattice.
    pub fn has_discrete_weight(&self) -> bool {
        !self.is_continuous() && !matches!(self, FamilySpec::DiscreteHypergeometric { .. })
    }

    /// Lattice for discrete families.
    pub fn lattice(&self) -> Option<Lattice> {
        match *self {
            FamilySpec::Meixner { .. } | FamilySpec::Charlier { .. } => Some(Lattice::NonNegative),
            FamilySpec::Krawtchouk { m, .. }
            | FamilySpec::Hahn { m, .. }
            | FamilySpec::Racah { m, .. } => Some(Lattice::Finite(m)),
            FamilySpec::AskeyLesky { .. } => Some(Lattice::Integers),
            FamilySpec::DiscreteHypergeometric { .. } => Some(Lattice::HalfIntegers),
            _ => None,
        }
    }

    /// Left rate μ_x = σ(x).
    pub fn sigma(&self, x: f64) -> f64 {
        match *self {
            FamilySpec::Meixner { .. } | FamilySpec::Charlier { .. } => x,
            FamilySpec::Krawtchouk { p, .. } => (1.0 - p) * x,
            FamilySpec::Hahn { m, b, .. } => x * (m as f64 + b + 1.0 - x),
            FamilySpec::Racah { alpha, beta, gamma, delta, .. } => {
                let gd = gamma + delta;
                x * (x + delta) * (beta - gamma - x) * (x - alpha + gd)
                    / ((2.0 * x + gd + 1.0) * (2.0 * x + gd))
            }
            FamilySpec::AskeyLesky { w, .. } => w.product(x),
            _ => f64::NAN,
        }
    }

    /// Right rate λ_x = σ(x) + τ(x).
    pub fn lambda_rate(&self, x: f64) -> f64 {
        match *self {
            FamilySpec::Meixner { c, xi } => xi * (x + c),
            FamilySpec::Charlier { mu } => mu,
            FamilySpec::Krawtchouk { m, p } => p * (m as f64 - x),
            FamilySpec::Hahn { m, a, .. } => (x + a + 1.0) * (m as f64 - x),
            FamilySpec::Racah { alpha, beta, gamma, delta, .. } => {
                let gd = gamma + delta;
                (-alpha - 1.0 - x) * (x + gamma + 1.0) * (x + gd + 1.0) * (x + beta + delta + 1.0)
                    / ((2.0 * x + gd + 1.0) * (2.0 * x + gd + 2.0))
            }
            FamilySpec::AskeyLesky { u, .. } => u.product(-x),
            _ => f64::NAN,
        }
    }

    /// τ(x) = λ_x − μ_x.
    pub fn tau(&self, x: f64) -> f64 {
        self.lambda_rate(x) - self.sigma(x)
    }

    /// Eigenvalue m_n of the difference operator, where it is known.
    pub fn eigenvalue(&self, n: usize) -> Option<f64> {
        let n = n as f64;
        match *self {
            FamilySpec::Meixner { xi, .. } => Some(-(1.0 - xi) * n),
            FamilySpec::Charlier { .. } | FamilySpec::Krawtchouk { .. } => Some(-n),
            FamilySpec::Hahn { a, b, .. } => Some(-n * (n + a + b + 1.0)),
            FamilySpec::Racah { alpha, beta, .. } => Some(-n * (n + alpha + beta + 1.0)),
            _ => None,
        }
    }

    /// Variable in which the polynomials are polynomials: x, or
    /// x(x+γ+δ+1) for Racah.
    pub fn abscissa(&self, x: f64) -> f64 {
        match *self {
            FamilySpec::Racah { gamma, delta, .. } => x * (x + gamma + delta + 1.0),
            _ => x,
        }
    }

    /// ln w(x) for discrete families, or the density for continuous ones.
    pub fn ln_weight(&self, x: f64) -> Result<f64> {
        if let Some(lat) = self.lattice() {
            if !lat.contains(x) {
                return Err(Error::Precondition(format!("site {x} outside the {} lattice", self.name())));
            }
        }
        let lw = match *self {
            FamilySpec::Meixner { c, xi } => {
                let (lp, _) = ln_poch_signed(c, x as u64);
                lp + x * xi.ln() - c * (1.0 - xi).ln() - ln_gamma(x + 1.0)
            }
            FamilySpec::Charlier { mu } => -mu + x * mu.ln() - ln_gamma(x + 1.0),
            FamilySpec::Krawtchouk { m, p } => {
                let mf = m as f64;
                ln_gamma(mf + 1.0) - ln_gamma(x + 1.0) - ln_gamma(mf - x + 1.0)
                    + x * p.ln()
                    + (mf - x) * (1.0 - p).ln()
            }
            FamilySpec::Hahn { m, a, b } => {
                let mf = m as f64;
                ln_gamma(a + x + 1.0) - ln_gamma(x + 1.0) - ln_gamma(a + 1.0)
                    + ln_gamma(mf + b - x + 1.0)
                    - ln_gamma(mf - x + 1.0)
                    - ln_gamma(b + 1.0)
            }
            FamilySpec::Racah { alpha, beta, gamma, delta, .. } => {
                let n = x as u64;
                let gd = gamma + delta;
                let num = [gd + 1.0, (gd + 3.0) / 2.0, alpha + 1.0, beta + delta + 1.0, gamma + 1.0];
                let den = [(gd + 1.0) / 2.0, gd - alpha + 1.0, gamma - beta + 1.0, delta + 1.0];
                let mut lv = -ln_gamma(x + 1.0);
                let mut sign = 1.0;
                for a in num {
                    let (v, s) = ln_poch_signed(a, n);
                    lv += v;
                    sign *= s;
                }
                for a in den {
                    let (v, s) = ln_poch_signed(a, n);
                    lv -= v;
                    sign *= s;
                }
                if sign <= 0.0 || !lv.is_finite() {
                    return Err(Error::Validity(format!("racah weight not positive at x={x}")));
                }
                lv
            }
            FamilySpec::AskeyLesky { u, w } => {
                let (a, sa) = u.ln_gamma_product(1.0, 1.0 - x);
                let (b, sb) = w.ln_gamma_product(1.0, x + 1.0);
                if sa * sb <= 0.0 {
                    return Err(Error::Validity(format!("askey-lesky weight not positive at x={x}")));
                }
                -(a + b)
            }
            FamilySpec::Hermite => -x * x,
            FamilySpec::Laguerre { c } => {
                if x < 0.0 {
                    return Err(Error::Precondition(format!("{x} outside [0, inf)")));
                }
                (c - 1.0) * x.ln() - x
            }
            FamilySpec::Jacobi { a, b } => {
                if !(-1.0..=1.0).contains(&x) {
                    return Err(Error::Precondition(format!("{x} outside [-1, 1]")));
                }
                a * (1.0 - x).ln() + b * (1.0 + x).ln()
            }
            FamilySpec::DiscreteHypergeometric { .. } => {
                return Err(Error::Precondition(
                    "the discrete hypergeometric operator has no polynomial weight".into(),
                ))
            }
        };
        Ok(lw)
    }

    /// Closed-form ln Σ_lattice w when known.
    fn ln_total_mass(&self) -> Option<f64> {
        match *self {
            FamilySpec::Charlier { .. } => Some(0.0),
            FamilySpec::Meixner { c, xi } => Some(-2.0 * c * (1.0 - xi).ln()),
            _ => None,
        }
    }
}

/// w(x), evaluated in log space.
pub fn weight(family: &FamilySpec, x: f64) -> Result<f64> {
    family.validate()?;
    Ok(family.ln_weight(x)?.exp())
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Contiguous window of lattice sites lo, lo+1, ..., hi.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteWindow {
    pub lattice: Lattice,
    pub lo: f64,
    pub hi: f64,
}

const WINDOW_CAP: usize = 10_000;

impl SiteWindow {
    pub fn new(lattice: Lattice, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Precondition(format!("window [{lo}, {hi}] is empty")));
        }
        if !lattice.contains(lo) || !lattice.contains(hi) {
            return Err(Error::Precondition(format!("window [{lo}, {hi}] not in lattice {lattice:?}")));
        }
        if hi - lo + 1.0 > 1e7 {
            return Err(Error::Size(format!("window [{lo}, {hi}] too large")));
        }
        Ok(SiteWindow { lattice, lo, hi })
    }

    /// Whole of {0..M}.
    pub fn full(m: usize) -> Self {
        SiteWindow {
            lattice: Lattice::Finite(m),
            lo: 0.0,
            hi: m as f64,
        }
    }

    pub fn for_family(family: &FamilySpec, lo: f64, hi: f64) -> Result<Self> {
        let lat = family
            .lattice()
            .ok_or_else(|| Error::Precondition(format!("{} is not a discrete family", family.name())))?;
        Self::new(lat, lo, hi)
    }

    /// Grows the window until it captures mass ≥ 1 − 1e-12, up to 10⁴ sites.
    pub fn auto(family: &FamilySpec) -> Result<Self> {
        family.validate()?;
        match family.lattice() {
            Some(Lattice::Finite(m)) => Ok(Self::full(m)),
            Some(Lattice::NonNegative) => {
                let mut hi = 8.0;
                loop {
                    let w = SiteWindow::new(Lattice::NonNegative, 0.0, hi)?;
                    if captured_mass(family, &w)? >= 1.0 - 1e-12 {
                        return Ok(w);
                    }
                    if w.len() >= WINDOW_CAP {
                        return Ok(w);
                    }
                    hi = (hi * 1.25).ceil().min(WINDOW_CAP as f64 - 1.0);
                }
            }
            Some(Lattice::Integers) => {
                let mut half = 8.0;
                loop {
                    let w = SiteWindow::new(Lattice::Integers, -half, half)?;
                    if captured_mass(family, &w)? >= 1.0 - 1e-12 || w.len() >= WINDOW_CAP {
                        return Ok(w);
                    }
                    half = (half * 1.25).ceil().min((WINDOW_CAP / 2) as f64 - 1.0);
                }
            }
            _ => Err(Error::Precondition(format!("no automatic window for {}", family.name()))),
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.lo + i as f64).collect()
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        if x < self.lo || x > self.hi || !self.lattice.contains(x) {
            return None;
        }
        Some((x - self.lo).round() as usize)
    }
}

/// Σ_window w / Σ_lattice w.
pub fn captured_mass(family: &FamilySpec, window: &SiteWindow) -> Result<f64> {
    let lw: Vec<f64> = window
        .sites()
        .iter()
        .map(|&x| family.ln_weight(x))
        .collect::<Result<_>>()?;
    let inside = log_sum_exp(&lw);
    let total = match (family.ln_total_mass(), family.lattice()) {
        (Some(t), _) => t,
        (None, Some(Lattice::Finite(m))) => {
            let all: Vec<f64> = (0..=m)
                .map(|x| family.ln_weight(x as f64))
                .collect::<Result<_>>()?;
            log_sum_exp(&all)
        }
        (None, Some(Lattice::Integers)) => ln_mass_on_integers(family, window)?,
        _ => return Err(Error::Precondition(format!("no mass for {}", family.name()))),
    };
    Ok((inside - total).exp().min(1.0))
}

fn ln_mass_on_integers(family: &FamilySpec, window: &SiteWindow) -> Result<f64> {
    let mut terms: Vec<f64> = window
        .sites()
        .iter()
        .map(|&x| family.ln_weight(x))
        .collect::<Result<_>>()?;
    let mut running = log_sum_exp(&terms);
    let (mut left, mut right) = (window.lo - 1.0, window.hi + 1.0);
    let mut quiet = 0;
    for _ in 0..100_000 {
        let a = family.ln_weight(left)?;
        let b = family.ln_weight(right)?;
        terms.push(a);
        terms.push(b);
        left -= 1.0;
        right += 1.0;
        if a.max(b) < running - 45.0 {
            quiet += 1;
            if quiet > 64 {
                break;
            }
        } else {
            quiet = 0;
            running = log_sum_exp(&terms);
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Normalized p_n(x) = p̃_n(x) w(x)^{1/2} / ‖p̃_n‖ on a window.
#[derive(Clone, Debug)]
pub struct PolynomialTable {
    pub family: FamilySpec,
    pub window: SiteWindow,
    /// Row n holds p_n on the window sites.
    pub values: Matrix,
    pub captured_mass: f64,
    /// Recurrence coefficients (b_n, a_n) in the abscissa variable.
    pub recurrence: Vec<(f64, f64)>,
}

impl PolynomialTable {
    pub fn count(&self) -> usize {
        self.values.rows()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        self.values.row(n)
    }

    pub fn gram(&self) -> Matrix {
        self.values.matmul(&self.values.transpose())
    }

    pub fn gram_tolerance(&self) -> f64 {
        1e-8_f64.max(3.0 * (1.0 - self.captured_mass))
    }
}

/// Stieltjes procedure on the window with full reorthogonalization.
pub fn polynomial_table(family: &FamilySpec, window: &SiteWindow, n: usize) -> Result<PolynomialTable> {
    family.validate()?;
    if !family.has_discrete_weight() {
        return Err(Error::Precondition(format!(
            "polynomial tables need a discrete weight; {} has none",
            family.name()
        )));
    }
    if Some(window.lattice) != family.lattice() {
        return Err(Error::Precondition("window lattice does not match the family".into()));
    }
    let len = window.len();
    if n == 0 || n > len {
        return Err(Error::Precondition(format!("need 1 <= N <= {len}, got {n}")));
    }
    let mass = captured_mass(family, window)?;
    if !matches!(window.lattice, Lattice::Finite(_)) && mass < 0.999 {
        return Err(Error::WindowTooSmall { mass });
    }
    let sites = window.sites();
    let lw: Vec<f64> = sites.iter().map(|&x| family.ln_weight(x)).collect::<Result<_>>()?;
    let lmax = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut q0: Vec<f64> = lw.iter().map(|v| (0.5 * (v - lmax)).exp()).collect();
    normalize(&mut q0);
    let xs: Vec<f64> = sites.iter().map(|&x| family.abscissa(x)).collect();
    let scale = xs.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);

    let mut rows: Vec<Vec<f64>> = vec![q0];
    let mut rec = Vec::with_capacity(n);
    let mut a_prev = 0.0;
    while rows.len() < n {
        let k = rows.len() - 1;
        let q = &rows[k];
        let mut v: Vec<f64> = q.iter().zip(&xs).map(|(qi, xi)| qi * xi).collect();
        if k > 0 {
            for (vi, pi) in v.iter_mut().zip(&rows[k - 1]) {
                *vi -= a_prev * pi;
            }
        }
        let b = dot(&v, q);
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= b * qi;
        }
        for _ in 0..2 {
            for r in &rows {
                let c = dot(&v, r);
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= c * ri;
                }
            }
        }
        let a = dot(&v, &v).sqrt();
        if !(a > 1e-13 * scale) {
            return Err(Error::numerical(
                format!("recurrence norm collapsed at degree {}", k + 1),
                a,
            ));
        }
        for vi in v.iter_mut() {
            *vi /= a;
        }
        rec.push((b, a));
        a_prev = a;
        rows.push(v);
    }
    let values = Matrix::from_rows(&rows);
    Ok(PolynomialTable {
        family: *family,
        window: window.clone(),
        values,
        captured_mass: mass,
        recurrence: rec,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// Tridiagonal symmetrization of the difference operator, Dirichlet at the
/// window edges.
pub fn difference_operator(family: &FamilySpec, window: &SiteWindow) -> Result<SymmetricOperator> {
    family.validate()?;
    if Some(window.lattice) != family.lattice() {
        return Err(Error::Precondition(format!(
            "window lattice {:?} does not match {}",
            window.lattice,
            family.name()
        )));
    }
    if let Lattice::Finite(m) = window.lattice {
        if window.lo != 0.0 || window.hi != m as f64 {
            return Err(Error::Precondition(format!("{} needs the full window 0..{m}", family.name())));
        }
    }
    let sites = window.sites();
    if let FamilySpec::DiscreteHypergeometric { z, xi } = *family {
        let scale = 1.0 / (1.0 - xi);
        let diag: Vec<f64> = sites
            .iter()
            .map(|&x| -scale * (x + xi * (z.sum() + x)))
            .collect();
        let mut off = Vec::with_capacity(sites.len().saturating_sub(1));
        for &x in &sites[..sites.len() - 1] {
            let prod = z.product(x + 0.5);
            if !(prod > 0.0) {
                return Err(Error::Validity(format!("coupling at site {x} is not positive")));
            }
            off.push(scale * (xi * prod).sqrt());
        }
        return SymmetricOperator::tridiagonal(&diag, &off, sites);
    }
    if family.is_continuous() {
        return Err(Error::Precondition(format!("{} has no difference operator", family.name())));
    }
    rate_operator(family, &sites, None)
}

// Birth-death symmetrization on the given sites. Sites beyond `cap.0` get
// the constant `cap.1` and no coupling.
fn rate_operator(family: &FamilySpec, sites: &[f64], cap: Option<(f64, f64)>) -> Result<SymmetricOperator> {
    let inside = |x: f64| cap.is_none_or(|(m, _)| x <= m);
    let diag: Vec<f64> = sites
        .iter()
        .map(|&x| {
            if inside(x) {
                -(family.sigma(x) + family.lambda_rate(x))
            } else {
                cap.unwrap().1
            }
        })
        .collect();
    let mut off = Vec::with_capacity(sites.len().saturating_sub(1));
    for &x in &sites[..sites.len() - 1] {
        if !inside(x + 1.0) {
            off.push(0.0);
            continue;
        }
        let mu_next = family.sigma(x + 1.0);
        let lam = family.lambda_rate(x);
        if !(mu_next > 0.0 && lam > 0.0) {
            return Err(Error::Validity(format!(
                "rates not positive between sites {x} and {} (mu={mu_next}, lambda={lam})",
                x + 1.0
            )));
        }
        off.push((mu_next * lam).sqrt());
    }
    SymmetricOperator::tridiagonal(&diag, &off, sites.to_vec())
}

/// Jacobi matrix of the orthonormal polynomials on sites 0..dim−1.
pub fn jacobi_operator(family: &FamilySpec, dim: usize) -> Result<SymmetricOperator> {
    family.validate()?;
    if dim < 2 {
        return Err(Error::Precondition("jacobi operator needs dim >= 2".into()));
    }
    let (diag, off) = recurrence_coefficients(family, dim)?;
    SymmetricOperator::tridiagonal(&diag, &off[..dim - 1], (0..dim).map(|x| x as f64).collect())
}

/// (b_0..b_{n−1}, a_0..a_{n−1}) for the continuous families.
pub fn recurrence_coefficients(family: &FamilySpec, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for x in 0..n {
        let xf = x as f64;
        match *family {
            FamilySpec::Hermite => {
                b.push(0.0);
                a.push(((xf + 1.0) / 2.0).sqrt());
            }
            FamilySpec::Laguerre { c } => {
                b.push(2.0 * xf + c);
                a.push(((xf + 1.0) * (xf + c)).sqrt());
            }
            FamilySpec::Jacobi { a: ja, b: jb } => {
                let s = ja + jb;
                if x == 0 {
                    b.push((jb - ja) / (s + 2.0));
                    a.push(2.0 / (s + 2.0) * ((ja + 1.0) * (jb + 1.0) / (s + 3.0)).sqrt());
                } else {
                    let t = 2.0 * xf + s;
                    b.push((jb * jb - ja * ja) / (t * (t + 2.0)));
                    let num = (xf + 1.0) * (xf + ja + 1.0) * (xf + jb + 1.0) * (xf + s + 1.0);
                    a.push(2.0 / (t + 2.0) * (num / ((t + 1.0) * (t + 3.0))).sqrt());
                }
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "{} is not a continuous family",
                    family.name()
                )))
            }
        }
    }
    Ok((b, a))
}

/// Total mass ∫ w of a continuous weight.
pub fn ln_continuous_mass(family: &FamilySpec) -> Result<f64> {
    match *family {
        FamilySpec::Hermite => Ok(0.5 * std::f64::consts::PI.ln()),
        FamilySpec::Laguerre { c } => Ok(ln_gamma(c)),
        FamilySpec::Jacobi { a, b } => Ok((a + b + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0)),
        _ => Err(Error::Precondition(format!("{} is not a continuous family", family.name()))),
    }
}

/// Conjugation by s = diag((−1)^x).
pub fn sign_flip(op: &SymmetricOperator) -> SymmetricOperator {
    let signs: Vec<f64> = (0..op.dim()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    op.conjugate_signs(&signs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitRegime {
    CharlierDHermite,
    MeixnerDHermite,
    MeixnerDLaguerre,
    KrawtchoukDHermite,
    HahnDLaguerre,
    RacahDJacobi,
}

pub const LADDER_WINDOW: usize = 60;
pub const LADDER_GROWTH: f64 = 4.0;
pub const LADDER_RUNGS: usize = 6;

/// One rung of a limit ladder.
#[derive(Clone, Debug)]
pub struct LimitRung {
    pub regime: LimitRegime,
    pub k: usize,
    pub scale_param: f64,
    pub scaled: SymmetricOperator,
    pub target: SymmetricOperator,
}

impl LimitRung {
    /// Sup-entry distance on the central third of the window.
    pub fn central_distance(&self) -> f64 {
        let (lo, hi) = central_third(self.scaled.dim());
        let mut worst: f64 = 0.0;
        for i in lo..hi {
            for j in lo..hi {
                worst = worst.max((self.scaled.get(i, j) - self.target.get(i, j)).abs());
            }
        }
        worst
    }
}

pub fn central_third(n: usize) -> (usize, usize) {
    (n / 3, n - n / 3)
}

impl LimitRegime {
    pub const ALL: [LimitRegime; 6] = [
        LimitRegime::CharlierDHermite,
        LimitRegime::MeixnerDHermite,
        LimitRegime::MeixnerDLaguerre,
        LimitRegime::KrawtchoukDHermite,
        LimitRegime::HahnDLaguerre,
        LimitRegime::RacahDJacobi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LimitRegime::CharlierDHermite => "charlier_dhermite",
            LimitRegime::MeixnerDHermite => "meixner_dhermite",
            LimitRegime::MeixnerDLaguerre => "meixner_dlaguerre",
            LimitRegime::KrawtchoukDHermite => "krawtchouk_dhermite",
            LimitRegime::HahnDLaguerre => "hahn_dlaguerre",
            LimitRegime::RacahDJacobi => "racah_djacobi",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.name() == name)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|r| r.name()).collect();
                Error::Config(format!("unknown regime '{name}' (expected one of {})", names.join(", ")))
            })
    }

    /// Target operator T − r, or −s(T−r)s for the Laguerre limits.
    pub fn target(&self) -> Result<SymmetricOperator> {
        let n = LADDER_WINDOW;
        match *self {
            LimitRegime::CharlierDHermite
            | LimitRegime::MeixnerDHermite
            | LimitRegime::KrawtchoukDHermite => Ok(jacobi_operator(&FamilySpec::Hermite, n)?.affine(1.0, -HERMITE_R)),
            LimitRegime::MeixnerDLaguerre => {
                let t = jacobi_operator(&FamilySpec::Laguerre { c: MEIXNER_C }, n)?;
                Ok(sign_flip(&t.affine(-1.0, LAGUERRE_R)))
            }
            LimitRegime::HahnDLaguerre => {
                let t = jacobi_operator(&FamilySpec::Laguerre { c: HAHN_A + 1.0 }, n)?;
                Ok(sign_flip(&t.affine(-1.0, LAGUERRE_R)))
            }
            LimitRegime::RacahDJacobi => {
                let t = jacobi_operator(&FamilySpec::Jacobi { a: JACOBI_A, b: JACOBI_B }, n)?;
                Ok(t.affine(1.0, -JACOBI_R))
            }
        }
    }

    /// Rung k of the ladder, parameters growing by a factor 4 per rung.
    pub fn rung(&self, k: usize) -> Result<LimitRung> {
        let sites: Vec<f64> = (0..LADDER_WINDOW).map(|x| x as f64).collect();
        let g = LADDER_GROWTH.powi(k as i32);
        let (scale_param, scaled) = match *self {
            LimitRegime::CharlierDHermite => {
                let n = 8.0 * g;
                let mu = n + (2.0 * n).sqrt() * HERMITE_R;
                let d = rate_operator(&FamilySpec::Charlier { mu }, &sites, None)?;
                (n, d.affine(1.0 / (2.0 * n).sqrt(), n / (2.0 * n).sqrt()))
            }
            LimitRegime::MeixnerDHermite => {
                let n = 8.0 * g;
                let xi = 0.5;
                let r2 = std::f64::consts::SQRT_2 * HERMITE_R;
                let sqrt_l = (r2 + (r2 * r2 + 4.0 * (1.0 - xi) * n).sqrt()) / 2.0;
                let c = sqrt_l * sqrt_l / xi;
                let d = rate_operator(&FamilySpec::Meixner { c, xi }, &sites, None)?;
                let s = 1.0 / (2.0 * xi * c).sqrt();
                (n, d.affine(s, s * (1.0 - xi) * n))
            }
            LimitRegime::MeixnerDLaguerre => {
                let n = 8.0 * g;
                let xi = 1.0 - LAGUERRE_R / n;
                let d = rate_operator(&FamilySpec::Meixner { c: MEIXNER_C, xi }, &sites, None)?;
                (n, d.affine(1.0, (1.0 - xi) * n))
            }
            LimitRegime::KrawtchoukDHermite => {
                let n = 8.0 * g;
                let r2 = std::f64::consts::SQRT_2 * HERMITE_R;
                let sqrt_l = (r2 + (r2 * r2 + 4.0 * n).sqrt()) / 2.0;
                let l = sqrt_l * sqrt_l;
                let m = (l * l).ceil() as usize;
                let p = l / m as f64;
                let family = FamilySpec::Krawtchouk { m, p };
                let d = rate_operator(&family, &sites, Some((m as f64, -n - 1.0)))?;
                let s = 1.0 / (2.0 * p * m as f64).sqrt();
                (n, d.affine(s, s * n))
            }
            LimitRegime::HahnDLaguerre => {
                let n = 16.0 * g;
                let m = (n * n / LAGUERRE_R).round() as usize;
                let (a, b) = (HAHN_A, HAHN_B);
                let family = FamilySpec::Hahn { m, a, b };
                let shift = n * (n + a + b + 1.0);
                let d = rate_operator(&family, &sites, Some((m as f64, -shift - 1.0)))?;
                let s = 1.0 / m as f64;
                (n, d.affine(s, s * shift))
            }
            LimitRegime::RacahDJacobi => {
                let m = 64.0 * g;
                let n = m * ((1.0 - JACOBI_R) / 2.0).sqrt();
                let (a, b) = (JACOBI_A, JACOBI_B);
                let family = FamilySpec::Racah {
                    m: m as usize,
                    alpha: -m - 1.0,
                    beta: m + a + 1.0,
                    gamma: a,
                    delta: b,
                };
                let shift = n * (n + a + 1.0);
                let d = rate_operator(&family, &sites, Some((m, -shift - 1.0)))?;
                let s = 2.0 / (m * m);
                (m, d.affine(s, s * shift))
            }
        };
        Ok(LimitRung {
            regime: *self,
            k,
            scale_param,
            scaled,
            target: self.target()?,
        })
    }
}

pub const HERMITE_R: f64 = 0.5;
pub const LAGUERRE_R: f64 = 2.0;
pub const MEIXNER_C: f64 = 1.5;
pub const HAHN_A: f64 = 0.5;
pub const HAHN_B: f64 = 1.0;
pub const JACOBI_A: f64 = 0.5;
pub const JACOBI_B: f64 = 1.5;
pub const JACOBI_R: f64 = 0.5;

/// Small windows used for certificates and exhaustive checks.
pub fn registry() -> Vec<(FamilySpec, SiteWindow)> {
    let m = 6;
    vec![
        (
            FamilySpec::Meixner { c: 1.5, xi: 0.4 },
            SiteWindow::new(Lattice::NonNegative, 0.0, 7.0).expect("static window"),
        ),
        (
            FamilySpec::Charlier { mu: 2.0 },
            SiteWindow::new(Lattice::NonNegative, 0.0, 7.0).expect("static window"),
        ),
        (FamilySpec::Krawtchouk { m, p: 0.4 }, SiteWindow::full(m)),
        (FamilySpec::Hahn { m, a: 0.5, b: 1.0 }, SiteWindow::full(m)),
        (
            FamilySpec::Racah {
                m,
                alpha: -(m as f64) - 1.0,
                beta: m as f64 + 1.5,
                gamma: 0.5,
                delta: 1.0,
            },
            SiteWindow::full(m),
        ),
    ]
}
