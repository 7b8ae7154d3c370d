//! Log-gamma helpers shared by the weight and quadrature code.

use num_complex::Complex64;
use std::f64::consts::PI;

/// (ln|Γ(x)|, sign Γ(x)); poles give (+∞, 0).
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    let (v, s) = libm::lgamma_r(x);
    (v, s as f64)
}

pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).0
}

/// (ln|(a)_n|, sign (a)_n); a zero factor gives (−∞, 0).
pub fn ln_poch_signed(a: f64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    if a <= 0.0 && a == a.floor() {
        let m = (-a) as u64;
        if n > m {
            return (f64::NEG_INFINITY, 0.0);
        }
        // (−m)(−m+1)⋯(−m+n−1) = (−1)^n m!/(m−n)!
        let v = ln_gamma(m as f64 + 1.0) - ln_gamma((m - n) as f64 + 1.0);
        let s = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        return (v, s);
    }
    let (ga, sa) = ln_gamma_signed(a);
    let (gb, sb) = ln_gamma_signed(a + n as f64);
    (gb - ga, sa * sb)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln|Γ(z)| for complex z off the poles.
pub fn ln_abs_gamma_complex(z: Complex64) -> f64 {
    if z.re < 0.5 {
        // reflection Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return PI.ln() - s.norm().ln() - ln_abs_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let ln = 0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln();
    ln.re
}
