//! Mellin cutoff kernels: closed forms, vertical-line quadrature, and the
//! series-side weighting every counting routine goes through.
//!
//! Convention: a kernel with Mellin transform `K(s)` turns a Dirichlet series
//! `D(s) = sum a(n) n^-s` into `sum a(n) w(n, X) = (1/2 pi i) int D(s) K(s) X^s ds`.

pub mod gamma;
mod quad;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::arith::CoefficientTable;
use crate::error::{invalid, Error, Result};
use crate::sum::KahanSum;

pub use quad::adaptive_simpson;

/// Weights below this are treated as absent when checking table coverage.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `1/(s(s+1)...(s+k))`, weight `(1 - n/X)^k / k!`.
    Cesaro { k: u32 },
    /// `Gamma(s)`, weight `exp(-n/X)`.
    Exponential,
    /// `exp(pi s^2 / Y^2) / Y`, weight `exp(-Y^2 log^2(X/n) / 4 pi) / 2 pi`.
    Concentrating { y: f64 },
    /// Mellin transform of the bump `phi_Y`, weight `phi_Y(n/X)`.
    Compact { y: f64 },
}

impl KernelKind {
    fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Cesaro { k } if k < 1 => Err(invalid("Cesaro order must be >= 1")),
            KernelKind::Concentrating { y } if !(y > 0.0 && y.is_finite()) => {
                Err(invalid(format!("concentrating kernel needs Y > 0, got {y}")))
            }
            KernelKind::Compact { y } if !(y >= 2.0 && y.is_finite()) => {
                Err(invalid(format!("compact kernel needs Y >= 2, got {y}")))
            }
            _ => Ok(()),
        }
    }

    /// Weight attached to the n-th coefficient at scale `x`.
    pub fn weight(&self, n: f64, x: f64) -> f64 {
        match *self {
            KernelKind::Cesaro { k } => {
                let r = 1.0 - n / x;
                if r <= 0.0 {
                    0.0
                } else {
                    r.powi(k as i32) / factorial(k)
                }
            }
            KernelKind::Exponential => (-n / x).exp(),
            KernelKind::Concentrating { y } => concentrating_closed(x / n, y),
            KernelKind::Compact { y } => compact_phi(y, n / x),
        }
    }

    /// Smallest table length N such that every weight with index > N is
    /// below [`WEIGHT_FLOOR`].
    pub fn coverage_needed(&self, x: f64) -> usize {
        let n = match *self {
            KernelKind::Cesaro { .. } => x.floor(),
            KernelKind::Exponential => (x * (1.0 / WEIGHT_FLOOR).ln()).floor(),
            KernelKind::Concentrating { y } => {
                let width = (4.0 * PI * (1.0 / (2.0 * PI * WEIGHT_FLOOR)).ln()).sqrt() / y;
                (x * width.exp()).floor()
            }
            KernelKind::Compact { y } => (x * (1.0 + 1.0 / y)).floor(),
        };
        if n >= usize::MAX as f64 {
            usize::MAX
        } else {
            n.max(0.0) as usize
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Cesaro { k } => write!(f, "cesaro:{k}"),
            KernelKind::Exponential => write!(f, "exp"),
            KernelKind::Concentrating { y } => write!(f, "conc:{y}"),
            KernelKind::Compact { y } => write!(f, "compact:{y}"),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// `exp`, `cesaro:k`, `conc:Y`, `compact:Y`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b.trim())),
            None => (s, None),
        };
        let num = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| invalid(format!("kernel `{name}` needs a {what} parameter")))?
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad kernel parameter in `{s}`")))
        };
        let kind = match name {
            "exp" | "exponential" if arg.is_none() => KernelKind::Exponential,
            "cesaro" => {
                let k = arg
                    .ok_or_else(|| invalid("kernel `cesaro` needs an order"))?
                    .parse::<u32>()
                    .map_err(|_| invalid(format!("bad Cesaro order in `{s}`")))?;
                KernelKind::Cesaro { k }
            }
            "conc" | "concentrating" => KernelKind::Concentrating { y: num("Y")? },
            "compact" => KernelKind::Compact { y: num("Y")? },
            _ => return Err(invalid(format!("unknown kernel `{s}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Trapezoidal rule on the segment `Re s = sigma`, `|Im s| <= t_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub sigma: f64,
    pub t_max: f64,
    pub steps: usize,
}

impl Quadrature {
    pub fn new(sigma: f64, t_max: f64, steps: usize) -> Result<Self> {
        if !sigma.is_finite() || !(t_max > 0.0 && t_max.is_finite()) || steps == 0 {
            return Err(invalid(format!(
                "bad quadrature (sigma={sigma}, T={t_max}, steps={steps})"
            )));
        }
        Ok(Self { sigma, t_max, steps })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.t_max / self.steps as f64
    }

    /// Defaults tuned so the truncation and discretisation errors of each
    /// kernel sit well below the verification tolerances.
    pub fn default_for(kind: &KernelKind) -> Self {
        match *kind {
            KernelKind::Cesaro { .. } => Self { sigma: 1.0, t_max: 1e5, steps: 1_000_000 },
            KernelKind::Exponential => Self { sigma: 1.0, t_max: 40.0, steps: 1600 },
            KernelKind::Concentrating { y } => Self { sigma: 2.0, t_max: 10.0 * y, steps: 4000 },
            KernelKind::Compact { .. } => Self { sigma: 1.0, t_max: 200.0, steps: 20_000 },
        }
    }

    /// `(1/2 pi) int_{-T}^{T} f(sigma + i t) dt`.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        let h = self.step();
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for j in 0..=self.steps {
            let t = -self.t_max + j as f64 * h;
            let w = if j == 0 || j == self.steps { 0.5 } else { 1.0 };
            let v = f(Complex64::new(self.sigma, t)) * w;
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value()) * (h / (2.0 * PI))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub quadrature: Quadrature,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, quadrature: Quadrature) -> Result<Self> {
        kind.validate()?;
        let min_sigma = match kind {
            KernelKind::Concentrating { .. } => f64::NEG_INFINITY,
            _ => 0.0,
        };
        if quadrature.sigma <= min_sigma {
            return Err(invalid(format!(
                "abscissa {} must exceed {min_sigma} for kernel {kind}",
                quadrature.sigma
            )));
        }
        Ok(Self { kind, quadrature })
    }

    pub fn with_defaults(kind: KernelKind) -> Result<Self> {
        Self::new(kind, Quadrature::default_for(&kind))
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn cesaro_closed(y: f64, k: u32) -> f64 {
    if y < 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / y).powi(k as i32) / factorial(k)
    }
}

fn cesaro_integrand(y: f64, k: u32) -> impl Fn(Complex64) -> Complex64 {
    let ln_y = y.ln();
    move |s| {
        let mut den = s;
        for j in 1..=k {
            den *= s + j as f64;
        }
        (s * ln_y).exp() / den
    }
}

pub fn cesaro_contour(y: f64, k: u32, q: &Quadrature) -> Result<f64> {
    if q.sigma <= 0.0 {
        return Err(invalid("Cesaro contour needs sigma > 0"));
    }
    if k < 1 || !(y > 0.0) {
        return Err(invalid("Cesaro contour needs k >= 1 and Y > 0"));
    }
    Ok(q.integrate(cesaro_integrand(y, k)).re)
}

/// Bound on the part of the line integral beyond `|Im s| = T`.
///
/// Uses the cruder `|integrand| <= Y^sigma / t^(k+1)` everywhere, and one
/// integration by parts against the oscillation `Y^{it}` when `Y != 1`.
pub fn cesaro_tail_bound(y: f64, k: u32, q: &Quadrature) -> f64 {
    let scale = y.powf(q.sigma);
    let t = q.t_max;
    let plain = scale / (PI * k as f64 * t.powi(k as i32));
    let ln_y = y.ln().abs();
    if ln_y > 0.0 {
        plain.min(2.0 * scale / (PI * ln_y * t.powi(k as i32 + 1)))
    } else {
        plain
    }
}

pub fn concentrating_closed(x: f64, y: f64) -> f64 {
    let l = x.ln();
    (-(y * y * l * l) / (4.0 * PI)).exp() / (2.0 * PI)
}

pub fn concentrating_contour(x: f64, y: f64, q: &Quadrature) -> f64 {
    let ln_x = x.ln();
    let a = PI / (y * y);
    q.integrate(|s| (a * s * s + s * ln_x).exp() / y).re
}

/// Gaussian tail of the concentrating integrand beyond `|Im s| = T`.
pub fn concentrating_tail_bound(x: f64, y: f64, q: &Quadrature) -> f64 {
    let (s, t) = (q.sigma, q.t_max);
    let a = PI / (y * y);
    x.powf(s) * (a * (s * s - t * t)).exp() * y / (2.0 * PI * PI * t)
}

/// `e^{-x}` recovered from `x^{-s} Gamma(s)` on a vertical line.
pub fn exp_contour(x: f64, q: &Quadrature) -> Result<f64> {
    if q.sigma <= 0.0 {
        return Err(invalid("exponential contour needs sigma > 0"));
    }
    if !(x > 0.0) {
        return Err(invalid("exponential contour needs x > 0"));
    }
    let ln_x = x.ln();
    Ok(q.integrate(|s| (gamma::ln_gamma(s) - s * ln_x).exp()).re)
}

/// Stirling envelope for the tail of `x^{-s} Gamma(s)`, valid for `T >= 1`.
pub fn exp_tail_bound(x: f64, q: &Quadrature) -> f64 {
    let (s, t) = (q.sigma, q.t_max);
    let a = (s - 0.5).max(0.0);
    let decay = PI / 2.0;
    // int_T^inf t^a e^{-decay t} dt <= T^a e^{-decay T} / (decay - a/T)
    let rate = (decay - a / t).max(1e-3);
    let tail = (s * s + t * t).sqrt().powf(a) * (-decay * t).exp() / rate;
    x.powf(-s) * (2.0 * PI).sqrt() * (1.0 / (6.0 * t)).exp() * tail / PI
}

fn smooth_step_half(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `g(t)/(g(t)+g(1-t))`: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity between.
pub fn smooth_step(t: f64) -> f64 {
    let a = smooth_step_half(t);
    let b = smooth_step_half(1.0 - t);
    a / (a + b)
}

/// The bump: 1 on `x <= 1`, 0 on `x >= 1 + 1/Y`.
pub fn compact_phi(y: f64, x: f64) -> f64 {
    smooth_step(y * (1.0 + 1.0 / y - x))
}

/// Mellin transform `int_0^inf t^{s-1} phi_Y(t) dt`.
///
/// The flat part contributes `1/s`; the transition band is integrated
/// adaptively to absolute accuracy `tol`.
pub fn compact_mellin(y: f64, s: Complex64, tol: f64) -> Result<Complex64> {
    if y < 2.0 {
        return Err(invalid(format!("compact kernel needs Y >= 2, got {y}")));
    }
    if s.re <= 0.0 {
        return Err(invalid(format!("compact Mellin transform needs Re s > 0, got {s}")));
    }
    let sm1 = s - 1.0;
    let band = adaptive_simpson(
        |t| (sm1 * t.ln()).exp() * compact_phi(y, t),
        1.0,
        1.0 + 1.0 / y,
        tol,
    );
    Ok(1.0 / s + band)
}

/// `sum_{n >= 1} a(n) n^{-shift} w(n, X)` on the coefficient side.
///
/// Errors when a weight at least [`WEIGHT_FLOOR`] would fall beyond the table.
pub fn apply_kernel(
    coeffs: &CoefficientTable,
    shift: f64,
    kernel: &KernelSpec,
    x: f64,
) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("kernel scale X must be positive, got {x}")));
    }
    let needed = kernel.kind.coverage_needed(x);
    if needed > coeffs.len() {
        return Err(Error::TableTooShort {
            label: coeffs.label().to_string(),
            needed: needed as u64,
            available: coeffs.len() as u64,
        });
    }
    Ok(weighted_sum(coeffs, shift, &kernel.kind, x, needed))
}

/// Same weighting, summed over whatever the table holds. For nonnegative
/// coefficients this is a lower bound on the full kernel sum.
pub fn apply_kernel_truncated(
    coeffs: &CoefficientTable,
    shift: f64,
    kernel: &KernelSpec,
    x: f64,
) -> f64 {
    let upto = kernel.kind.coverage_needed(x).min(coeffs.len());
    weighted_sum(coeffs, shift, &kernel.kind, x, upto)
}

fn weighted_sum(coeffs: &CoefficientTable, shift: f64, kind: &KernelKind, x: f64, upto: usize) -> f64 {
    let mut acc = KahanSum::new();
    for (n, &a) in coeffs.values().iter().enumerate().take(upto + 1).skip(1) {
        if a == 0 {
            continue;
        }
        let nf = n as f64;
        let w = kind.weight(nf, x);
        if w == 0.0 {
            continue;
        }
        let scale = if shift == 0.0 { 1.0 } else { nf.powf(-shift) };
        acc.add(a as f64 * scale * w);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::r_d_table;
    use proptest::prelude::*;

    #[test]
    fn cesaro_closed_examples() {
        assert_eq!(cesaro_closed(2.0, 1), 0.5);
        assert_eq!(cesaro_closed(0.5, 3), 0.0);
        assert_eq!(cesaro_closed(1.0, 2), 0.0);
        assert!((cesaro_closed(2.0, 3) - 1.0 / 48.0).abs() < 1e-16);
    }

    #[test]
    fn cesaro_contour_examples() {
        let q = Quadrature::new(2.0, 200.0, 100_000).unwrap();
        assert!((cesaro_contour(2.0, 3, &q).unwrap() - 1.0 / 48.0).abs() < 1e-6);
        let q = Quadrature::default_for(&KernelKind::Cesaro { k: 1 });
        assert!(cesaro_contour(0.5, 2, &q).unwrap().abs() < 1e-6);
        assert!((cesaro_contour(10.0, 1, &q).unwrap() - 0.9).abs() < 1e-6);
        assert!(cesaro_contour(2.0, 1, &Quadrature { sigma: 0.0, ..q }).is_err());
    }

    #[test]
    fn cesaro_error_within_tail_budget() {
        let q = Quadrature::new(1.0, 2000.0, 20_000).unwrap();
        for y in [0.5, 1.5, 2.0, 10.0] {
            for k in 1..=3 {
                let err = (cesaro_contour(y, k, &q).unwrap() - cesaro_closed(y, k)).abs();
                let budget = cesaro_tail_bound(y, k, &q) + 1e-12;
                assert!(err <= budget, "Y={y} k={k}: err {err:e} > {budget:e}");
            }
        }
    }

    #[test]
    fn concentrating_examples() {
        assert!((concentrating_closed(1.0, 7.0) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let e = std::f64::consts::E;
        let want = (-1.0 / PI).exp() / (2.0 * PI);
        assert!((concentrating_closed(e, 2.0) - want).abs() < 1e-15);
        assert!((concentrating_closed(1.0 / e, 2.0) - want).abs() < 1e-15);

        let q = Quadrature::new(2.0, 20.0, 4000).unwrap();
        assert!((concentrating_contour(1.0, 1.0, &q) - 1.0 / (2.0 * PI)).abs() < 1e-8);
        let q = Quadrature::default_for(&KernelKind::Concentrating { y: 4.0 });
        assert!((concentrating_contour(3.0, 4.0, &q) - concentrating_closed(3.0, 4.0)).abs() < 1e-8);
        let q0 = Quadrature { sigma: 0.0, ..q };
        assert!((concentrating_contour(3.0, 4.0, &q) - concentrating_contour(3.0, 4.0, &q0)).abs() < 1e-8);
        assert!(concentrating_tail_bound(3.0, 4.0, &q) < 1e-30);
    }

    #[test]
    fn exp_contour_examples() {
        let q = Quadrature::default_for(&KernelKind::Exponential);
        for x in [0.1, 1.0, 5.0, 20.0, 50.0] {
            let got = exp_contour(x, &q).unwrap();
            assert!((got - (-x).exp()).abs() < 1e-6, "x={x}: {got}");
        }
        assert!(exp_tail_bound(0.1, &q) < 1e-20);
        assert!(exp_contour(1.0, &Quadrature { sigma: -1.0, ..q }).is_err());
    }

    #[test]
    fn bump_examples() {
        let y = 10.0;
        assert_eq!(compact_phi(y, 0.5), 1.0);
        assert_eq!(compact_phi(y, 1.0), 1.0);
        assert_eq!(compact_phi(y, 1.0 + 2.0 / y), 0.0);
        assert!((compact_phi(y, 1.0 + 0.5 / y) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bump_monotone_and_symmetric(y in 2.0f64..1e3, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let x0 = 1.0 + lo / y;
            let x1 = 1.0 + hi / y;
            prop_assert!(compact_phi(y, x0) >= compact_phi(y, x1));
            let mirror = 2.0 + 1.0 / y - x0;
            prop_assert!((compact_phi(y, x0) + compact_phi(y, mirror) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mellin_examples() {
        let one = Complex64::new(1.0, 0.0);
        let p = compact_mellin(100.0, one, 1e-13).unwrap();
        assert!((p - 1.0).norm() < 0.02);
        let mut prev = f64::INFINITY;
        for y in [4.0, 16.0, 64.0, 256.0, 1024.0] {
            let d = (compact_mellin(y, Complex64::new(2.0, 0.0), 1e-13).unwrap() - 0.5).norm();
            assert!(d < prev, "trend toward 1/2 at Y={y}");
            prev = d;
        }
        assert!(compact_mellin(10.0, Complex64::new(0.0, 1.0), 1e-12).is_err());
        assert!(compact_mellin(1.5, one, 1e-12).is_err());
    }

    #[test]
    fn mellin_close_to_pole_term() {
        for y in [4.0, 20.0, 100.0] {
            for (re, im) in [(0.5, 0.0), (1.0, 1.0), (0.3, y / 3.0), (y / 4.0, y / 4.0)] {
                let s = Complex64::new(re, im);
                if s.norm() > y / 2.0 {
                    continue;
                }
                let d = (compact_mellin(y, s, 1e-13).unwrap() - 1.0 / s).norm();
                assert!(d <= 2.0 / y, "Y={y} s={s}: {d}");
            }
        }
    }

    #[test]
    fn parse_kernels() {
        assert_eq!("exp".parse::<KernelKind>().unwrap(), KernelKind::Exponential);
        assert_eq!("cesaro:2".parse::<KernelKind>().unwrap(), KernelKind::Cesaro { k: 2 });
        assert_eq!("conc:4.5".parse::<KernelKind>().unwrap(), KernelKind::Concentrating { y: 4.5 });
        assert_eq!("compact:10".parse::<KernelKind>().unwrap(), KernelKind::Compact { y: 10.0 });
        for bad in ["cesaro:0", "compact:1", "conc:-1", "gauss", "cesaro", "exp:3"] {
            assert!(bad.parse::<KernelKind>().is_err(), "{bad}");
        }
        let k = KernelKind::Compact { y: 3.0 };
        assert_eq!(k.to_string().parse::<KernelKind>().unwrap(), k);
    }

    #[test]
    fn spec_rejects_bad_abscissa() {
        let q = Quadrature::new(0.0, 10.0, 100).unwrap();
        assert!(KernelSpec::new(KernelKind::Exponential, q).is_err());
        assert!(KernelSpec::new(KernelKind::Concentrating { y: 1.0 }, Quadrature { sigma: -3.0, ..q }).is_ok());
    }

    #[test]
    fn apply_examples() {
        let r2 = r_d_table(2, 4000).unwrap();
        let k = KernelSpec::with_defaults(KernelKind::Exponential).unwrap();
        let got = apply_kernel(&r2, 0.0, &k, 100.0).unwrap();
        let mut want = 0.0;
        for n in 1..=3000 {
            want += r2.at(n).unwrap() as f64 * (-(n as f64) / 100.0).exp();
        }
        assert!((got - want).abs() < 1e-9 * want);

        let ones = CoefficientTable::new("ones", vec![1; 11]).unwrap();
        let k = KernelSpec::with_defaults(KernelKind::Cesaro { k: 1 }).unwrap();
        assert!((apply_kernel(&ones, 0.0, &k, 10.0).unwrap() - 4.5).abs() < 1e-12);
        assert!(matches!(
            apply_kernel(&ones, 0.0, &k, 11.0),
            Err(Error::TableTooShort { needed: 11, available: 10, .. })
        ));
    }

    #[test]
    fn compact_sits_between_sharp_and_band() {
        let r2 = r_d_table(2, 2000).unwrap();
        let x = 1000.0;
        let y = 20.0;
        let k = KernelSpec::with_defaults(KernelKind::Compact { y }).unwrap();
        let smooth = apply_kernel(&r2, 0.0, &k, x).unwrap();
        let sharp: i128 = (1..=1000).map(|n| r2.at(n).unwrap()).sum();
        let band: i128 = (1001..=1050).map(|n| r2.at(n).unwrap()).sum();
        assert!(smooth >= sharp as f64 - 1e-9);
        assert!(smooth <= (sharp + band) as f64 + 1e-9);
    }
}
