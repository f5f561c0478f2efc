//! Complex Gamma function, Lanczos approximation (g = 7, 9 terms).

use std::f64::consts::PI;

use num_complex::Complex64;

const G: f64 = 7.0;
const COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` on the principal branch for `Re z >= 1/2`; reflected below.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEFFS[0], 0.0);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return PI / (s * gamma(1.0 - z));
    }
    ln_gamma(z).exp()
}

pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn factorials_and_half() {
        let mut fact = 1.0;
        for n in 1..25 {
            assert!(rel(gamma_real(n as f64), fact) < 1e-12, "Gamma({n})");
            fact *= n as f64;
        }
        assert!(rel(gamma_real(0.5), PI.sqrt()) < 1e-13);
        assert!(rel(gamma_real(1.5), PI.sqrt() / 2.0) < 1e-13);
        assert!(rel(gamma_real(-0.5), -2.0 * PI.sqrt()) < 1e-12);
    }

    #[test]
    fn modulus_on_vertical_lines() {
        for t in [0.1, 1.0, 3.0, 10.0, 25.0, 40.0] {
            let g = gamma(Complex64::new(0.5, t)).norm_sqr();
            assert!(rel(g, PI / (PI * t).cosh()) < 1e-10, "|Gamma(1/2+it)|^2 at {t}");
            let g = gamma(Complex64::new(1.0, t)).norm_sqr();
            assert!(rel(g, PI * t / (PI * t).sinh()) < 1e-10, "|Gamma(1+it)|^2 at {t}");
        }
    }

    #[test]
    fn recurrence_and_conjugation() {
        for re in [0.5, 1.0, 2.5, 7.0, 15.0, 29.0] {
            for im in [-30.0, -3.0, 0.0, 0.7, 12.0] {
                let z = Complex64::new(re, im);
                let lhs = gamma(z + 1.0);
                let rhs = z * gamma(z);
                assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "z = {z}");
                assert!((gamma(z.conj()) - gamma(z).conj()).norm() <= 1e-12 * gamma(z).norm());
            }
        }
    }
}
