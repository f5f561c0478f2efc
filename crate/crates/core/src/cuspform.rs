//! Ramanujan's tau, partial sums of cusp-form coefficients, their smoothed
//! second moment with its Rankin–Selberg constant, and sign-change scans.

use std::f64::consts::PI;

use crate::arith::{divisor_counts, CoefficientTable};
use crate::error::{invalid, Error, Result};
use crate::kernels::gamma::gamma_real;
use crate::sum::KahanSum;

/// Largest table the tau engine will build; keeps every intermediate far
/// inside `i128`.
pub const TAU_MAX: usize = 1_000_000;

pub const DELTA_LABEL: &str = "delta";

fn overflow(label: &str, index: usize) -> Error {
    Error::Overflow {
        label: label.to_string(),
        index,
    }
}

/// `tau(0..=N)` (with `tau(0) = 0`) from `q * E(q)^8`, where
/// `E(q) = prod (1 - q^n)^3 = sum_{m >= 0} (-1)^m (2m + 1) q^{m(m+1)/2}`.
pub fn tau_table(n_max: usize) -> Result<CoefficientTable> {
    if n_max == 0 || n_max > TAU_MAX {
        return Err(invalid(format!("tau table size must be in 1..={TAU_MAX}, got {n_max}")));
    }
    let deg = n_max - 1; // q-degree needed in E^8
    let sparse: Vec<(usize, i128)> = (0usize..)
        .map(|m| (m * (m + 1) / 2, if m % 2 == 0 { 2 * m as i128 + 1 } else { -(2 * m as i128 + 1) }))
        .take_while(|&(e, _)| e <= deg)
        .collect();

    let mut power = vec![0i128; deg + 1];
    for &(e, c) in &sparse {
        power[e] = c;
    }
    for _ in 1..8 {
        let mut next = vec![0i128; deg + 1];
        for (j, &v) in power.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for &(e, c) in &sparse {
                let t = j + e;
                if t > deg {
                    break;
                }
                let prod = v.checked_mul(c).ok_or_else(|| overflow("tau", t + 1))?;
                next[t] = next[t].checked_add(prod).ok_or_else(|| overflow("tau", t + 1))?;
            }
        }
        power = next;
    }
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(0);
    values.extend_from_slice(&power);
    CoefficientTable::new(DELTA_LABEL, values)
}

/// Coefficients `a(1..=N)` of a holomorphic cusp form of integral weight.
#[derive(Clone, Debug)]
pub struct CuspFormSeries {
    weight: u32,
    coeffs: CoefficientTable,
}

impl CuspFormSeries {
    /// Validates normalisation (for Delta) and the Deligne bound
    /// `|a(n)| <= d(n) n^{(k-1)/2}` at every tabulated index.
    pub fn new(weight: u32, coeffs: CoefficientTable) -> Result<Self> {
        if weight == 0 {
            return Err(invalid("cusp form weight must be positive"));
        }
        if coeffs.label() == DELTA_LABEL {
            if weight != 12 {
                return Err(invalid("delta has weight 12"));
            }
            if coeffs.get(1) != Some(1) {
                return Err(invalid("delta table must start with tau(1) = 1"));
            }
        }
        let (d, _) = divisor_counts(coeffs.len())?;
        let half = (weight as f64 - 1.0) / 2.0;
        for n in 1..=coeffs.len() {
            let a = coeffs.values()[n] as f64;
            let bound = d.values()[n] as f64 * (n as f64).powf(half) * (1.0 + 1e-9);
            if a.abs() > bound {
                return Err(invalid(format!(
                    "coefficient {n} of `{}` violates the Deligne bound ({a:e} > {bound:e})",
                    coeffs.label()
                )));
            }
        }
        Ok(Self { weight, coeffs })
    }

    pub fn delta(n_max: usize) -> Result<Self> {
        Self::new(12, tau_table(n_max)?)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn coeffs(&self) -> &CoefficientTable {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        self.coeffs.label()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.len() == 0
    }
}

/// `S^nu(n) = sum_{m <= n} a(m) / m^nu` for `0 <= n <= N`.
#[derive(Clone, Debug)]
pub struct PartialSumSeries {
    pub label: String,
    pub weight: u32,
    pub nu: f64,
    pub values: Vec<f64>,
    /// Exact integer sums, present when `nu == 0`.
    pub exact: Option<Vec<i128>>,
}

impl PartialSumSeries {
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn partial_sums(f: &CuspFormSeries, nu: f64) -> Result<PartialSumSeries> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must be a nonnegative real, got {nu}")));
    }
    let a = f.coeffs.values();
    let (values, exact) = if nu == 0.0 {
        let exact = f.coeffs.prefix_sums()?;
        (exact.iter().map(|&s| s as f64).collect(), Some(exact))
    } else {
        let mut acc = KahanSum::new();
        let mut values = Vec::with_capacity(a.len());
        values.push(0.0);
        for (n, &c) in a.iter().enumerate().skip(1) {
            acc.add(c as f64 / (n as f64).powf(nu));
            values.push(acc.value());
        }
        (values, None)
    };
    Ok(PartialSumSeries {
        label: f.label().to_string(),
        weight: f.weight,
        nu,
        values,
        exact,
    })
}

/// `sum_{n <= 40X} S(n)^2 / n^{k-1} e^{-n/X}`.
pub fn smoothed_second_moment(f: &CuspFormSeries, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("X must be positive, got {x}")));
    }
    let upto = (40.0 * x).floor() as u64;
    f.coeffs.require(upto)?;
    let s = f.coeffs.prefix_sums()?;
    let shift = f.weight as f64 - 1.0;
    let mut acc = KahanSum::new();
    for (n, &sn) in s.iter().enumerate().take(upto as usize + 1).skip(1) {
        let v = sn as f64;
        let nf = n as f64;
        acc.add(v * v * (-(shift * nf.ln()) - nf / x).exp());
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankinConstant {
    pub value: f64,
    /// Rigorous bound on the omitted terms, from `a(n)^2 <= d(n)^2 n^{k-1}`.
    pub tail_bound: f64,
    /// Heuristic size of the omitted terms, assuming the normalised squares
    /// keep their observed mean.
    pub tail_estimate: f64,
}

/// Leading constant `Gamma(3/2)/(4 pi^2) * sum_n a(n)^2 / n^{k+1/2}` of the
/// smoothed second moment, truncated at `n <= N`.
pub fn rankin_constant(f: &CuspFormSeries, n_max: usize) -> Result<RankinConstant> {
    if n_max == 0 {
        return Err(invalid("Rankin constant needs N >= 1"));
    }
    f.coeffs.require(n_max as u64)?;
    let k = f.weight as f64;
    let prefactor = gamma_real(1.5) / (4.0 * PI * PI);
    let mut series = KahanSum::new();
    let mut mean = KahanSum::new();
    for n in (1..=n_max).rev() {
        let a = f.coeffs.values()[n] as f64;
        let ln_n = (n as f64).ln();
        // a^2 / n^{k+1/2} = lambda^2 / n^{3/2} with lambda = a / n^{(k-1)/2}
        let lambda = a * (-(k - 1.0) / 2.0 * ln_n).exp();
        series.add(lambda * lambda * (-1.5 * ln_n).exp());
        mean.add(lambda * lambda);
    }
    let mean = mean.value() / n_max as f64;
    let nf = n_max as f64;
    Ok(RankinConstant {
        value: prefactor * series.value(),
        tail_bound: prefactor * divisor_square_tail(nf),
        tail_estimate: prefactor * 2.0 * mean / nf.sqrt(),
    })
}

/// Upper bound for `sum_{n > N} d(n)^2 n^{-3/2}`.
///
/// `d(n)^2 <= d_4(n)` and `sum_{n <= x} d_4(n)/n <= (1 + ln x)^4`; partial
/// summation against `t^{-1/2}` gives `(1/2) int_N^inf (1 + ln t)^4 t^{-3/2} dt`,
/// evaluated in closed form with `u = 1 + ln t`.
pub fn divisor_square_tail(n: f64) -> f64 {
    let u0 = 1.0 + n.ln();
    // int_{u0}^inf u^4 e^{-(u-1)/2} du = e^{(1-u0)/2} sum_j 4!/(4-j)! u0^{4-j} 2^{j+1}
    let mut poly = 0.0;
    let mut falling = 1.0;
    for j in 0..=4 {
        poly += falling * u0.powi(4 - j) * 2f64.powi(j + 1);
        falling *= (4 - j) as f64;
    }
    0.5 * ((1.0 - u0) / 2.0).exp() * poly
}

/// Indices `n` in `[X, X + X^r]` where `S^nu` changes sign between `n` and
/// the next nonzero value in the window. Zeros are bridged, not counted.
pub fn sign_changes(s: &PartialSumSeries, x: u64, r: f64) -> Result<Vec<u64>> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("window exponent must lie in (0, 1], got {r}")));
    }
    if x == 0 {
        return Err(invalid("window start must be positive"));
    }
    let end = (x as f64 + (x as f64).powf(r)).floor() as u64;
    if end as usize > s.len() {
        return Err(Error::TableTooShort {
            label: format!("partial sums of {}", s.label),
            needed: end,
            available: s.len() as u64,
        });
    }
    let mut out = Vec::new();
    let mut last: Option<(u64, f64)> = None;
    for n in x..=end {
        let v = s.values[n as usize];
        if v == 0.0 {
            continue;
        }
        if let Some((m, prev)) = last {
            if prev * v < 0.0 {
                out.push(m);
            }
        }
        last = Some((n, v));
    }
    Ok(out)
}

/// `sum_{n <= X} S(n)^2 / X^{k + 1/2}`.
pub fn classical_average_ratio(f: &CuspFormSeries, x: u64) -> Result<f64> {
    if x == 0 {
        return Err(invalid("X must be positive"));
    }
    f.coeffs.require(x)?;
    let s = f.coeffs.prefix_sums()?;
    let acc: KahanSum = s[1..=x as usize].iter().map(|&v| (v as f64) * (v as f64)).collect();
    Ok(acc.value() / (x as f64).powf(f.weight as f64 + 0.5))
}

/// Half-width `X^{2/3} (log X)^{1/6}` of the short-interval window.
pub fn short_interval_width(x: u64) -> f64 {
    let xf = x as f64;
    xf.powf(2.0 / 3.0) * xf.ln().powf(1.0 / 6.0)
}

/// `(1/H) sum_{|n - X| < H} S(n)^2` with `H = X^{2/3} (log X)^{1/6}`.
pub fn short_interval_average(f: &CuspFormSeries, x: u64) -> Result<f64> {
    if x < 2 {
        return Err(invalid("short-interval average needs X >= 2"));
    }
    let h = short_interval_width(x);
    let xf = x as f64;
    // integers with |n - X| < H
    let lo = (xf - h).floor() as i64 + 1;
    let hi = (xf + h).ceil() as i64 - 1;
    let lo = lo.max(1) as u64;
    let hi = hi as u64;
    f.coeffs.require(hi)?;
    let s = f.coeffs.prefix_sums()?;
    let acc: KahanSum = s[lo as usize..=hi as usize]
        .iter()
        .map(|&v| (v as f64) * (v as f64))
        .collect();
    Ok(acc.value() / h)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coefficients of `q * prod_{n <= N} (1 - q^n)^24`, expanded factor by factor.
    fn tau_by_product(n_max: usize) -> Vec<i128> {
        let mut poly = vec![0i128; n_max];
        poly[0] = 1;
        for n in 1..n_max {
            for _ in 0..24 {
                for j in (n..n_max).rev() {
                    poly[j] -= poly[j - n];
                }
            }
        }
        let mut out = vec![0];
        out.extend(poly);
        out
    }

    #[test]
    fn first_values() {
        let t = tau_table(6).unwrap();
        assert_eq!(&t.values()[1..], &[1, -24, 252, -1472, 4830, -6048]);
        assert_eq!(t.values()[6], t.values()[2] * t.values()[3]);
    }

    #[test]
    fn matches_product_expansion() {
        let t = tau_table(50).unwrap();
        assert_eq!(t.values(), &tau_by_product(50)[..]);
    }

    #[test]
    fn hecke_relations() {
        let t = tau_table(10_000).unwrap();
        let tau = |n: usize| t.values()[n];
        for m in 1..=100usize {
            for n in 1..=100usize {
                if crate::arith::gcd(m as u64, n as u64) == 1 {
                    assert_eq!(tau(m * n), tau(m) * tau(n), "tau({m}*{n})");
                }
            }
        }
        for j in 1..=12u32 {
            let p = |e: u32| tau(1usize << e);
            assert_eq!(p(j + 1), tau(2) * p(j) - (1 << 11) * p(j - 1), "2^{}", j + 1);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(tau_table(0).is_err());
        assert!(tau_table(TAU_MAX + 1).is_err());
    }

    #[test]
    fn series_validation() {
        assert!(CuspFormSeries::delta(2000).is_ok());
        let bad = CoefficientTable::new(DELTA_LABEL, vec![0, 2, -24]).unwrap();
        assert!(CuspFormSeries::new(12, bad).is_err());
        let huge = CoefficientTable::new("f", vec![0, 1, 1 << 40]).unwrap();
        assert!(CuspFormSeries::new(12, huge).is_err());
    }

    #[test]
    fn partial_sum_examples() {
        let f = CuspFormSeries::delta(100).unwrap();
        let s = partial_sums(&f, 0.0).unwrap();
        assert_eq!(s.exact.as_ref().unwrap()[3], 229);
        assert_eq!(s.values[1], 1.0);
        let s = partial_sums(&f, 5.5).unwrap();
        assert!((s.values[2] - (1.0 - 24.0 / 2f64.powf(5.5))).abs() < 1e-15);
        for n in 1..=100 {
            let diff = s.values[n] - s.values[n - 1];
            let want = f.coeffs().values()[n] as f64 / (n as f64).powf(5.5);
            assert!((diff - want).abs() <= 1e-12 * want.abs().max(s.values[n].abs()));
        }
        assert!(partial_sums(&f, -1.0).is_err());
    }

    #[test]
    fn second_moment_growth() {
        let f = CuspFormSeries::delta(40 * 512).unwrap();
        let a = smoothed_second_moment(&f, 256.0).unwrap();
        let b = smoothed_second_moment(&f, 512.0).unwrap();
        assert!(((b / a).log2() - 1.5).abs() < 0.1);
        assert!(smoothed_second_moment(&f, 1e-3).unwrap().abs() < 1e-300);
        assert!(matches!(smoothed_second_moment(&f, 1024.0), Err(Error::TableTooShort { .. })));
    }

    #[test]
    fn rankin_single_term_and_tail() {
        let f = CuspFormSeries::delta(1000).unwrap();
        let c = rankin_constant(&f, 1).unwrap();
        assert!((c.value - gamma_real(1.5) / (4.0 * PI * PI)).abs() < 1e-16);
        let mut prev = f64::INFINITY;
        for n in [1.0, 10.0, 1e3, 1e5, 1e7, 1e12] {
            let t = divisor_square_tail(n);
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn divisor_square_tail_dominates_partial_tail() {
        let (d, _) = divisor_counts(200_000).unwrap();
        for n0 in [10usize, 1000, 50_000] {
            let partial: f64 = (n0 + 1..=200_000)
                .map(|n| (d.values()[n] as f64).powi(2) * (n as f64).powf(-1.5))
                .sum();
            assert!(partial <= divisor_square_tail(n0 as f64));
        }
    }

    #[test]
    fn sign_change_scans() {
        let f = CuspFormSeries::delta(2000).unwrap();
        let s = partial_sums(&f, 0.0).unwrap();
        assert!(!sign_changes(&s, 10, 1.0).unwrap().is_empty());
        let s = partial_sums(&f, 5.5 + 1.0 / 6.0 - 0.01).unwrap();
        assert!(!sign_changes(&s, 1000, 1.0).unwrap().is_empty());
        assert!(sign_changes(&s, 1500, 1.0).is_err());

        let flat = PartialSumSeries {
            label: "flat".into(),
            weight: 12,
            nu: 0.0,
            values: vec![0.0, 1.0, 0.0, 2.0, 3.0, 0.5, 0.0, 1.0, 4.0, 5.0],
            exact: None,
        };
        assert!(sign_changes(&flat, 4, 1.0).unwrap().is_empty());
        let bridged = PartialSumSeries {
            values: vec![0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 2.0],
            ..flat
        };
        assert_eq!(sign_changes(&bridged, 3, 1.0).unwrap(), vec![3, 5]);
    }

    #[test]
    fn classical_ratio() {
        let f = CuspFormSeries::delta(1 << 12).unwrap();
        assert_eq!(classical_average_ratio(&f, 1).unwrap(), 1.0);
        let a = classical_average_ratio(&f, 1 << 10).unwrap();
        let b = classical_average_ratio(&f, 1 << 12).unwrap();
        assert!((a / b - 1.0).abs() < 0.25, "{a} vs {b}");
    }

    #[test]
    fn short_interval_of_zero_series() {
        let zero = CoefficientTable::new("zero", vec![0; 2000]).unwrap();
        let f = CuspFormSeries::new(12, zero).unwrap();
        assert_eq!(short_interval_average(&f, 1000).unwrap(), 0.0);
    }
}
