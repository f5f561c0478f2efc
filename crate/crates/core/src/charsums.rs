//! Gauss sums and the finite Dirichlet polynomials attached to Fourier
//! coefficients of weight-`k` Eisenstein series on `Gamma_0(4)`.
//!
//! Every character sum is first accumulated as integer multiplicities of
//! `m`-th roots of unity ([`RootSum`]) and converted to a floating complex
//! number once at the end.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::arith::{
    epsilon, factorize, kronecker, truncated_l, valuation, CharacterSpec, QuarterTurn,
};
use crate::error::{invalid, Result};
use crate::sum::ComplexKahanSum;

/// A weight `k` stored as `2k`, so both integral and half-integral weights are
/// exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight {
    twice: i64,
}

impl Weight {
    pub fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub fn integral(k: i64) -> Self {
        Self { twice: 2 * k }
    }

    /// `k = half_odd / 2`, e.g. `Weight::half(3)` is `3/2`.
    pub fn half(half_odd: i64) -> Self {
        Self { twice: half_odd }
    }

    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn is_half_integral(self) -> bool {
        self.twice.rem_euclid(2) == 1
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// The integer `k` when the weight is integral.
    pub fn as_integer(self) -> Option<i64> {
        (!self.is_half_integral()).then_some(self.twice / 2)
    }

    /// `(-1)^{k + 1/2}` for half-integral `k`.
    fn sign_plus_half(self) -> i64 {
        if ((self.twice + 1) / 2).rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integral() {
            write!(f, "{}/2", self.twice)
        } else {
            write!(f, "{}", self.twice / 2)
        }
    }
}

impl std::str::FromStr for Weight {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| invalid(format!("bad weight `{s}`")))?;
            match den.trim() {
                "1" => Ok(Weight::integral(num)),
                "2" => Ok(Weight::from_twice(num)),
                _ => Err(invalid(format!("weight denominator must be 1 or 2 in `{s}`"))),
            }
        } else if let Ok(k) = s.parse::<i64>() {
            Ok(Weight::integral(k))
        } else {
            let x: f64 = s.parse().map_err(|_| invalid(format!("bad weight `{s}`")))?;
            let twice = (2.0 * x).round();
            if (2.0 * x - twice).abs() > 1e-12 {
                return Err(invalid(format!("`{s}` is not a half-integer")));
            }
            Ok(Weight::from_twice(twice as i64))
        }
    }
}

/// A formal sum `sum_j c_j e(j/m)` with integer multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    modulus: u64,
    counts: Vec<i64>,
}

impl RootSum {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus > 0);
        Self {
            modulus,
            counts: vec![0; modulus as usize],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Adds `mult * e(exponent / m)`.
    #[inline]
    pub fn add(&mut self, exponent: i128, mult: i64) {
        let j = exponent.rem_euclid(self.modulus as i128) as usize;
        self.counts[j] += mult;
    }

    /// Adds `mult * i^q * e(exponent / m)`; requires `4 | m`.
    #[inline]
    pub fn add_turned(&mut self, exponent: i128, turn: QuarterTurn, mult: i64) {
        debug_assert!(self.modulus % 4 == 0);
        let shift = turn.exponent() as i128 * (self.modulus / 4) as i128;
        self.add(exponent + shift, mult);
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.modulus as f64;
        let mut acc = ComplexKahanSum::new();
        for (j, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                acc.add(unit(j as f64 / m) * c as f64);
            }
        }
        acc.value()
    }
}

/// `e(x) = exp(2 pi i x)`, with `x` reduced to `[-1/2, 1/2)` first.
fn unit(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` with the reduction done in integers.
fn unit_frac(num: i128, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i128) as f64 / den as f64;
    unit(r)
}

/// A Gauss sum together with its exact root-of-unity expansion.
#[derive(Clone, Debug)]
pub struct GaussSumRecord {
    pub h: i64,
    pub modulus: u64,
    pub weight: Weight,
    pub exact: RootSum,
    pub value: Complex64,
}

impl GaussSumRecord {
    fn from_exact(h: i64, modulus: u64, weight: Weight, exact: RootSum) -> Self {
        let value = exact.to_complex();
        Self {
            h,
            modulus,
            weight,
            exact,
            value,
        }
    }
}

/// Values of the Jacobi symbol `(top/d)` for `0 <= d < len`, evaluated
/// through reciprocity against a table modulo the odd part of `top`.
/// Entries at even `d` are 0.
fn jacobi_row(top: u64, len: u64) -> Vec<i8> {
    let v = top.trailing_zeros();
    let odd = top >> v;
    let base: Vec<i8> = (0..odd).map(|r| kronecker(r as i64, odd as i64) as i8).collect();
    (0..len)
        .map(|d| {
            if d % 2 == 0 {
                return 0;
            }
            let two = if v % 2 == 1 && (d % 8 == 3 || d % 8 == 5) {
                -1
            } else {
                1
            };
            let flip = if odd % 4 == 3 && d % 4 == 3 { -1 } else { 1 };
            two * flip * base[(d % odd) as usize]
        })
        .collect()
}

/// `g_h(c) = sum_{d mod c} eps_d^{2k} (c/d) e(hd/c)` for half-integral `k`;
/// for integral `k` the sum `sum_{d mod c} (-4/d)^k e(hd/c)`.
pub fn gauss_sum_g_record(h: i64, c4: u64, k: Weight) -> Result<GaussSumRecord> {
    if c4 == 0 || c4 % 4 != 0 {
        return Err(invalid(format!("g_h(c) needs 4 | c, got c = {c4}")));
    }
    let mut acc = RootSum::new(c4);
    let h = h as i128;
    if k.is_half_integral() {
        let row = jacobi_row(c4, c4);
        for d in (1..c4).step_by(2) {
            let chi = row[d as usize];
            if chi == 0 {
                continue;
            }
            let turn = epsilon(d as i64)?.pow(k.twice());
            acc.add_turned(h * d as i128, turn, chi as i64);
        }
    } else {
        let kk = k.twice() / 2;
        for d in (1..c4).step_by(2) {
            let chi = if d % 4 == 3 && kk % 2 == 1 { -1 } else { 1 };
            acc.add(h * d as i128, chi);
        }
    }
    Ok(GaussSumRecord::from_exact(h as i64, c4, k, acc))
}

pub fn gauss_sum_g(h: i64, c4: u64, k: Weight) -> Result<Complex64> {
    Ok(gauss_sum_g_record(h, c4, k)?.value)
}

/// `H_h(c) = eps_c sum_{d mod c} (d/c) e(hd/c)` for odd `c`, with `H_h(1) = 1`.
pub fn h_sum_record(h: i64, c: u64) -> Result<GaussSumRecord> {
    if c % 2 == 0 {
        return Err(invalid(format!("H_h(c) needs odd c, got {c}")));
    }
    let weight = Weight::half(1);
    if c == 1 {
        let mut exact = RootSum::new(1);
        exact.add(0, 1);
        return Ok(GaussSumRecord::from_exact(h, 1, weight, exact));
    }
    // Work modulo 4c so the outer eps_c is an exact quarter turn.
    let m = 4 * c;
    let eps = epsilon(c as i64)?;
    let mut acc = RootSum::new(m);
    for d in 1..c {
        let chi = kronecker(d as i64, c as i64);
        if chi != 0 {
            acc.add_turned(4 * h as i128 * d as i128, eps, chi as i64);
        }
    }
    Ok(GaussSumRecord::from_exact(h, c, weight, acc))
}

pub fn h_sum(h: i64, c: u64) -> Result<Complex64> {
    Ok(h_sum_record(h, c)?.value)
}

/// `sum_{d_2 mod 2^alpha} eps_{d_2}^{2k} (2^alpha/d_2) e(h d_2 / 2^alpha)` for
/// half-integral `k`.
pub fn d2_sum(h: i64, alpha: u32, k: Weight) -> Result<Complex64> {
    if alpha < 2 {
        return Err(invalid(format!("d2 sum needs alpha >= 2, got {alpha}")));
    }
    if alpha > 40 {
        return Err(invalid(format!("alpha = {alpha} is too large to enumerate")));
    }
    if !k.is_half_integral() {
        return Err(invalid("the eps-twisted d2 sum is defined for half-integral k"));
    }
    let m = 1u64 << alpha;
    let mut acc = RootSum::new(m);
    for d2 in (1..m).step_by(2) {
        let chi = if alpha % 2 == 1 && (d2 % 8 == 3 || d2 % 8 == 5) {
            -1
        } else {
            1
        };
        let turn = epsilon(d2 as i64)?.pow(k.twice());
        acc.add_turned(h as i128 * d2 as i128, turn, chi);
    }
    Ok(acc.to_complex())
}

/// The bracketed 2-adic factor of the two-piece decomposition of `g_h(4c)`,
/// before simplification:
/// `sum_{d_2} eps_{d_2 c'}^{2k} (-1)^{((c'-1)/2)((d_2 c'-1)/2)} eps_{c'}^{-1}
/// (2^alpha/d_2) e(h d_2/2^alpha)`.
fn two_adic_piece(h: i64, alpha: u32, c_odd: u64, k: Weight) -> Result<Complex64> {
    let m = 1u64 << alpha;
    let eps_inv = epsilon(c_odd as i64)?.inverse();
    let mut acc = RootSum::new(m);
    for d2 in (1..m).step_by(2) {
        let prod = (d2 as u128 * c_odd as u128 % 4) as u64;
        let recip = if (c_odd % 4 == 3) && (prod == 3) { -1 } else { 1 };
        let chi = if alpha % 2 == 1 && (d2 % 8 == 3 || d2 % 8 == 5) {
            -1
        } else {
            1
        };
        let turn = epsilon(prod as i64)?.pow(k.twice()).mul(eps_inv);
        acc.add_turned(h as i128 * d2 as i128, turn, recip * chi);
    }
    Ok(acc.to_complex())
}

/// `g_h(4c)` via the product of its 2-adic piece and `H_h(c')`, where
/// `4c = 2^alpha c'` with `c'` odd.
pub fn gauss_sum_two_piece(h: i64, c4: u64, k: Weight) -> Result<Complex64> {
    if c4 == 0 || c4 % 4 != 0 {
        return Err(invalid(format!("g_h(c) needs 4 | c, got c = {c4}")));
    }
    if !k.is_half_integral() {
        return Err(invalid("the two-piece form is stated for half-integral k"));
    }
    let alpha = c4.trailing_zeros();
    let c_odd = c4 >> alpha;
    Ok(two_adic_piece(h, alpha, c_odd, k)? * h_sum(h, c_odd)?)
}

/// `chi_k(n) = ((-1)^{k+1/2} / n)`.
pub fn chi_k(k: Weight, n: u64) -> i32 {
    kronecker(k.sign_plus_half(), n as i64)
}

/// Same two-piece product after the 2-adic factor has been rewritten as
/// `chi_k(c') * d2_sum(h, alpha, k)`.
pub fn gauss_sum_simplified(h: i64, c4: u64, k: Weight) -> Result<Complex64> {
    if c4 == 0 || c4 % 4 != 0 {
        return Err(invalid(format!("g_h(c) needs 4 | c, got c = {c4}")));
    }
    let alpha = c4.trailing_zeros();
    let c_odd = c4 >> alpha;
    Ok(d2_sum(h, alpha, k)? * h_sum(h, c_odd)? * chi_k(k, c_odd) as f64)
}

/// `D_inf^k(h, w) = sum_{c | h} c (4c)^{-2w} (e^{pi i h/2c} + (-1)^k e^{3 pi i h/2c})`.
pub fn eisenstein_d_full(h: i64, w: Complex64, k: i64) -> Result<Complex64> {
    if h == 0 {
        return Err(invalid("D_inf^k(h, w) needs h != 0"));
    }
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let habs = h.unsigned_abs();
    let mut acc = ComplexKahanSum::new();
    for c in (1..=habs).filter(|c| habs % c == 0) {
        let m = 4 * c;
        let phases = unit_frac(h as i128, m) + unit_frac(3 * h as i128, m) * sign;
        let scale = c as f64 * (-2.0 * w * (m as f64).ln()).exp();
        acc.add(phases * scale);
    }
    Ok(acc.value())
}

/// `|sum_{d mod 4c} (-4/d)^k e(hd/4c) - [c | h] c (e(h/4c) + (-1)^k e(3h/4c))|`.
pub fn reduction_check(h: i64, c: u64, k: i64) -> Result<f64> {
    if c == 0 || k < 1 {
        return Err(invalid("reduction check needs c >= 1 and k >= 1"));
    }
    let m = 4 * c;
    let mut direct = RootSum::new(m);
    for d in (1..m).step_by(2) {
        let chi = if k % 2 == 1 && d % 4 == 3 { -1 } else { 1 };
        direct.add(h as i128 * d as i128, chi);
    }
    let mut closed = RootSum::new(m);
    if h.unsigned_abs() % c == 0 {
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        closed.add(h as i128, c as i64);
        closed.add(3 * h as i128, sign * c as i64);
    }
    Ok((direct.to_complex() - closed.to_complex()).norm())
}

/// `widetilde D_inf^k(h, w)`: the 2-adic polynomial
/// `sum_{2 <= alpha <= v_2(h)+3} 2^{-2 alpha w} d2_sum(h, alpha, k)` times,
/// for each odd `p | h`, `sum_{0 <= j <= v_p(h)+1} chi_k(p^j) H_h(p^j) p^{-2jw}`.
pub fn dtilde_half(h: u64, w: Complex64, k: Weight) -> Result<Complex64> {
    dtilde_half_extended(h, w, k, 0)
}

/// [`dtilde_half`] with every truncation index pushed `extra` steps further.
pub fn dtilde_half_extended(h: u64, w: Complex64, k: Weight, extra: u32) -> Result<Complex64> {
    if h == 0 {
        return Err(invalid("widetilde D needs h >= 1"));
    }
    if !k.is_half_integral() {
        return Err(invalid("widetilde D is defined for half-integral k"));
    }
    let hi = h as i64;
    let v2 = valuation(h, 2);
    let mut two_adic = ComplexKahanSum::new();
    for alpha in 2..=v2 + 3 + extra {
        let scale = (-2.0 * w * alpha as f64 * std::f64::consts::LN_2).exp();
        two_adic.add(d2_sum(hi, alpha, k)? * scale);
    }
    let mut total = two_adic.value();
    for (p, e) in factorize(h) {
        if p == 2 {
            continue;
        }
        let mut local = ComplexKahanSum::new();
        let mut pj = 1u64;
        for j in 0..=e + 1 + extra {
            if j > 0 {
                pj = pj
                    .checked_mul(p)
                    .ok_or_else(|| invalid("local factor modulus overflow"))?;
            }
            let chi = chi_k(k, pj);
            if chi == 0 {
                continue;
            }
            let scale = (-2.0 * w * j as f64 * (p as f64).ln()).exp();
            local.add(h_sum(hi, pj)? * (chi as f64) * scale);
        }
        total *= local.value();
    }
    Ok(total)
}

/// `chi_{k,h} = (h (-1)^{k-1/2} / .)` with the factor at 2 removed.
pub fn chi_kh(k: Weight, h: u64) -> CharacterSpec {
    // (-1)^{k-1/2} = -(-1)^{k+1/2}.
    CharacterSpec::kronecker(-k.sign_plus_half() * h as i64).without_primes([2])
}

/// Both sides of the Gauss-sum Dirichlet series factorisation at truncation
/// `N`, with the admissible gap between them.
#[derive(Clone, Copy, Debug)]
pub struct FactorizationCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub tail_bound: f64,
}

impl FactorizationCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.tail_bound
    }
}

/// Compares `sum_{c <= N} g_h(4c) (4c)^{-2w}` against
/// `L^{(2)}(2w - 1/2, chi_{k,h}) / zeta^{(2h)}(4w - 1) * widetilde D(h, w)`
/// with both series truncated at `N`.
pub fn factorization_check(h: u64, w: Complex64, k: Weight, n_max: u64) -> Result<FactorizationCheck> {
    if !(w.re > 1.0) {
        return Err(invalid(format!(
            "factorization check needs Re(w) > 1 for the trivial tail bound, got {}",
            w.re
        )));
    }
    if h == 0 || n_max == 0 {
        return Err(invalid("factorization check needs h >= 1 and N >= 1"));
    }
    if !k.is_half_integral() {
        return Err(invalid("factorization check is for half-integral k"));
    }
    let mut lhs = ComplexKahanSum::new();
    for c in (1..=n_max).rev() {
        let m = 4 * c;
        let g = gauss_sum_g(h as i64, m, k)?;
        lhs.add(g * (-2.0 * w * (m as f64).ln()).exp());
    }
    let lhs = lhs.value();

    let l = truncated_l(2.0 * w - 0.5, &chi_kh(k, h), n_max)?;
    let zeta_removed: Vec<u64> = std::iter::once(2)
        .chain(factorize(h).into_iter().map(|(p, _)| p))
        .collect();
    let z = truncated_l(
        4.0 * w - 1.0,
        &CharacterSpec::principal().without_primes(zeta_removed),
        n_max,
    )?;
    let dt = dtilde_half(h, w, k)?;
    let rhs = l.value / z.value * dt;

    // |g_h(4c)| <= 2c, so the left tail is at most 2 4^{-2s} N^{2-2s}/(2s-2).
    let s = w.re;
    let lhs_tail = 2.0 * 4f64.powf(-2.0 * s) * (n_max as f64).powf(2.0 - 2.0 * s) / (2.0 * s - 2.0);
    // |L/Z - L_N/Z_N| <= T_L + |L_N| T_Z since Z, Z_N >= 1 - T_Z there.
    let z_floor = (z.value.norm() - z.tail_bound).max(f64::MIN_POSITIVE);
    let rhs_tail = dt.norm() * (l.tail_bound + l.value.norm() * z.tail_bound / z_floor) / z_floor;
    Ok(FactorizationCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        tail_bound: lhs_tail + rhs_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    /// Plain complex-double summation of g_h(c), no exact phase bookkeeping.
    fn g_naive(h: i64, c4: u64, k: Weight) -> Complex64 {
        (1..c4)
            .step_by(2)
            .map(|d| {
                let chi = kronecker(c4 as i64, d as i64) as f64;
                let eps = epsilon(d as i64).unwrap().pow(k.twice()).to_complex();
                eps * chi * (2.0 * PI * I * (h as f64 * d as f64 / c4 as f64)).exp()
            })
            .sum()
    }

    #[test]
    fn weight_parsing() {
        assert_eq!("1/2".parse::<Weight>().unwrap(), Weight::half(1));
        assert_eq!("3/2".parse::<Weight>().unwrap(), Weight::half(3));
        assert_eq!("2".parse::<Weight>().unwrap(), Weight::integral(2));
        assert_eq!("1.5".parse::<Weight>().unwrap(), Weight::half(3));
        assert!("1/3".parse::<Weight>().is_err());
        assert!("0.3".parse::<Weight>().is_err());
        assert_eq!(Weight::half(5).to_string(), "5/2");
    }

    #[test]
    fn jacobi_row_matches_kronecker() {
        for top in [4u64, 8, 12, 20, 36, 44, 96, 100, 180] {
            let row = jacobi_row(top, top);
            for d in 0..top {
                let expect = if d % 2 == 0 { 0 } else { kronecker(top as i64, d as i64) };
                assert_eq!(row[d as usize] as i32, expect, "({top}/{d})");
            }
        }
    }

    #[test]
    fn g_small_values() {
        let k = Weight::half(1);
        let g = gauss_sum_g(1, 4, k).unwrap();
        assert!(close(g, Complex64::new(1.0, 1.0), 1e-12));
        let g0 = gauss_sum_g(0, 4, k).unwrap();
        assert!(close(g0, Complex64::new(1.0, 1.0), 1e-12));
        assert!(close(g, gauss_sum_two_piece(1, 4, k).unwrap(), 1e-12));
        assert!(gauss_sum_g(1, 6, k).is_err());
    }

    #[test]
    fn g_matches_naive_summation_and_triangle_bound() {
        for k in [Weight::half(1), Weight::half(3), Weight::integral(1), Weight::integral(2)] {
            for c4 in (4..=120).step_by(4) {
                for h in [-3i64, 1, 2, 5, 12] {
                    let g = gauss_sum_g(h, c4, k).unwrap();
                    assert!(g.norm() <= c4 as f64);
                    if k.is_half_integral() {
                        assert!(close(g, g_naive(h, c4, k), 1e-9), "h={h} c={c4} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn h_examples() {
        assert!(close(h_sum(1, 3).unwrap(), Complex64::new(-(3f64.sqrt()), 0.0), 1e-12));
        assert!(h_sum(1, 9).unwrap().norm() < 1e-12);
        assert_eq!(h_sum(1, 1).unwrap(), Complex64::new(1.0, 0.0));
        assert!(h_sum(1, 4).is_err());
    }

    #[test]
    fn d2_examples() {
        for k in [Weight::half(1), Weight::half(3)] {
            assert!(d2_sum(1, 5, k).unwrap().norm() < 1e-12);
            assert!(d2_sum(3, 4, k).unwrap().norm() < 1e-12);
        }
        assert!(d2_sum(4, 7, Weight::half(1)).unwrap().norm() < 1e-12);
        let direct = d2_sum(1, 2, Weight::half(1)).unwrap();
        assert!(close(direct, Complex64::new(1.0, 1.0), 1e-12));
        assert!(d2_sum(1, 1, Weight::half(1)).is_err());
    }

    #[test]
    fn full_weight_d() {
        let w = Complex64::new(1.0, 0.0);
        assert!(eisenstein_d_full(1, w, 2).unwrap().norm() < 1e-15);
        assert!(close(eisenstein_d_full(1, w, 1).unwrap(), I / 8.0, 1e-15));
        // h = 2, c in {1, 2}.
        let by_hand = (1.0 / 16.0) * (Complex64::new(-1.0, 0.0) - Complex64::new(-1.0, 0.0))
            + (2.0 / 64.0) * (I + I);
        assert!(close(eisenstein_d_full(2, w, 1).unwrap(), by_hand, 1e-15));
        assert!(eisenstein_d_full(0, w, 1).is_err());
    }

    #[test]
    fn d_full_matches_direct_character_sums() {
        // D(h, w) = sum_c (4c)^{-2w} sum_{d mod 4c} (-4/d)^k e(hd/4c), finite in c.
        let w = Complex64::new(1.3, 0.2);
        for h in [1i64, 2, 6, 12, -4] {
            for k in 1..=2 {
                let mut direct = Complex64::new(0.0, 0.0);
                for c in 1..=h.unsigned_abs() * 3 {
                    let g = gauss_sum_g(h, 4 * c, Weight::integral(k)).unwrap();
                    direct += g * (-2.0 * w * ((4 * c) as f64).ln()).exp();
                }
                assert!(close(direct, eisenstein_d_full(h, w, k).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn reduction_examples() {
        assert!(reduction_check(3, 2, 1).unwrap() < 1e-9);
        assert!(reduction_check(4, 2, 2).unwrap() < 1e-9);
        assert!(reduction_check(1, 1, 1).unwrap() < 1e-9);
    }

    #[test]
    fn simplified_two_adic_factor() {
        for k in [Weight::half(1), Weight::half(3), Weight::half(5)] {
            for c in 1..=30u64 {
                for h in 1..=10i64 {
                    let a = gauss_sum_g(h, 4 * c, k).unwrap();
                    let b = gauss_sum_simplified(h, 4 * c, k).unwrap();
                    assert!(close(a, b, 1e-9), "h={h} c={c} k={k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn dtilde_examples() {
        let w = Complex64::new(2.0, 0.0);
        let k = Weight::half(1);
        let only_two_adic: Complex64 = (2..=3)
            .map(|a| d2_sum(1, a, k).unwrap() * 2f64.powf(-4.0 * a as f64))
            .sum();
        assert!(close(dtilde_half(1, w, k).unwrap(), only_two_adic, 1e-15));
        for h in [1u64, 2, 9, 12, 18, 27, 50] {
            let a = dtilde_half(h, w, k).unwrap();
            let b = dtilde_half_extended(h, w, k, 2).unwrap();
            assert!(close(a, b, 1e-12), "h={h}");
        }
    }

    #[test]
    fn factorization_rejects_outside_region() {
        let k = Weight::half(1);
        assert!(factorization_check(1, Complex64::new(0.9, 0.0), k, 100).is_err());
        assert!(factorization_check(1, Complex64::new(2.0, 0.0), Weight::integral(1), 100).is_err());
    }

    #[test]
    fn factorization_examples() {
        let cases = [
            (1u64, Weight::half(1), 2.0, 2000u64),
            (4, Weight::half(1), 2.0, 2000),
            (1, Weight::half(3), 1.75, 5000),
        ];
        for (h, k, w, n) in cases {
            let r = factorization_check(h, Complex64::new(w, 0.0), k, n).unwrap();
            assert!(r.holds(), "h={h} k={k} w={w}: residual {} > {}", r.residual, r.tail_bound);
            assert!(r.tail_bound < 1e-3);
        }
    }

}
