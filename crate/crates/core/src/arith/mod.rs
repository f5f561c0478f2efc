//! Exact integer and character arithmetic: coefficient tables, sums of
//! squares, divisor functions, Kronecker symbols and truncated Dirichlet
//! series.

pub mod cache;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sum::ComplexKahanSum;

/// An exact integer sequence `a(0..=N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    label: String,
    values: Vec<i128>,
}

impl CoefficientTable {
    /// Wraps `values` (indexed from 0). At least one entry is required.
    pub fn new(label: impl Into<String>, values: Vec<i128>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("coefficient table needs at least the index-0 entry"));
        }
        Ok(Self {
            label: label.into(),
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest tabulated index `N`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    /// Always false; a table holds at least `a(0)`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[i128] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<i128> {
        self.values.get(n).copied()
    }

    /// Fails with [`Error::TableTooShort`] unless `n <= N`.
    pub fn require(&self, n: u64) -> Result<()> {
        if n > self.len() as u64 {
            Err(Error::TableTooShort {
                label: self.label.clone(),
                needed: n,
                available: self.len() as u64,
            })
        } else {
            Ok(())
        }
    }

    /// `a(n)`, or a coverage error when `n` is past the end.
    pub fn at(&self, n: u64) -> Result<i128> {
        self.require(n)?;
        Ok(self.values[n as usize])
    }

    /// Inclusive prefix sums `sum_{j <= n} a(j)`.
    pub fn prefix_sums(&self) -> Result<Vec<i128>> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0i128;
        for (n, &v) in self.values.iter().enumerate() {
            acc = acc.checked_add(v).ok_or_else(|| Error::Overflow {
                label: format!("prefix({})", self.label),
                index: n,
            })?;
            out.push(acc);
        }
        Ok(out)
    }
}

/// A power of `i`, the exact values taken by `epsilon_d` and its powers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuarterTurn(u8);

impl QuarterTurn {
    pub const ONE: QuarterTurn = QuarterTurn(0);
    pub const I: QuarterTurn = QuarterTurn(1);

    pub fn from_exponent(e: i64) -> Self {
        QuarterTurn(e.rem_euclid(4) as u8)
    }

    /// Exponent `e` in `i^e`, in `0..4`.
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn pow(self, k: i64) -> Self {
        Self::from_exponent(self.0 as i64 * k)
    }

    pub fn inverse(self) -> Self {
        Self::from_exponent(-(self.0 as i64))
    }

    pub fn mul(self, other: Self) -> Self {
        Self::from_exponent(self.0 as i64 + other.0 as i64)
    }

    /// Exact `(re, im)` pair with entries in `{-1, 0, 1}`.
    pub fn parts(self) -> (i8, i8) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let (re, im) = self.parts();
        Complex64::new(re as f64, im as f64)
    }
}

/// `epsilon_d`: 1 when `d = 1 mod 4`, `i` when `d = 3 mod 4`.
pub fn epsilon(d: i64) -> Result<QuarterTurn> {
    match d.rem_euclid(4) {
        1 => Ok(QuarterTurn::ONE),
        3 => Ok(QuarterTurn::I),
        _ => Err(invalid(format!("epsilon_d needs odd d, got {d}"))),
    }
}

const TWO_TABLE: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// The Kronecker symbol `(a/n)`, extending the Jacobi symbol to every integer
/// bottom argument.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let mut a = a as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while b % 2 == 0 {
        v += 1;
        b /= 2;
    }
    let mut k = if v % 2 == 0 {
        1
    } else {
        TWO_TABLE[(a & 7) as usize]
    };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // b is odd and positive from here on.
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        let mut v = 0;
        while a % 2 == 0 {
            v += 1;
            a /= 2;
        }
        if v % 2 == 1 {
            k *= TWO_TABLE[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CharacterKind {
    /// `n -> (top/n)`.
    Kronecker { top: i64 },
    /// `n -> 1`.
    Principal,
}

/// A real Dirichlet character with a finite set of Euler factors deleted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSpec {
    pub kind: CharacterKind,
    pub removed_primes: Vec<u64>,
}

impl CharacterSpec {
    pub fn principal() -> Self {
        Self {
            kind: CharacterKind::Principal,
            removed_primes: Vec::new(),
        }
    }

    pub fn kronecker(top: i64) -> Self {
        Self {
            kind: CharacterKind::Kronecker { top },
            removed_primes: Vec::new(),
        }
    }

    /// Also deletes the Euler factors at `primes`.
    pub fn without_primes(mut self, primes: impl IntoIterator<Item = u64>) -> Self {
        self.removed_primes.extend(primes);
        self.removed_primes.sort_unstable();
        self.removed_primes.dedup();
        self
    }

    pub fn eval(&self, n: u64) -> i32 {
        if self.removed_primes.iter().any(|&p| n % p == 0) {
            return 0;
        }
        match self.kind {
            CharacterKind::Principal => 1,
            CharacterKind::Kronecker { top } => kronecker(top, n as i64),
        }
    }
}

fn checked_push(label: &str, dst: &mut i128, add: i128, index: usize) -> Result<()> {
    *dst = dst.checked_add(add).ok_or_else(|| Error::Overflow {
        label: label.to_string(),
        index,
    })?;
    Ok(())
}

/// `r_d(n)` for `0 <= n <= N` by `d`-fold convolution of the squares indicator.
pub fn r_d_table(d: u32, n_max: usize) -> Result<CoefficientTable> {
    if d == 0 {
        return Err(invalid("r_d needs d >= 1"));
    }
    let label = format!("r_{d}");
    let squares: Vec<usize> = (1..)
        .map(|m: usize| m * m)
        .take_while(|&sq| sq <= n_max)
        .collect();

    let mut cur = vec![0i128; n_max + 1];
    cur[0] = 1;
    for &sq in &squares {
        cur[sq] = 2;
    }
    for _ in 1..d {
        let mut next = vec![0i128; n_max + 1];
        for (j, &v) in cur.iter().enumerate() {
            if v == 0 {
                continue;
            }
            checked_push(&label, &mut next[j], v, j)?;
            let twice = v.checked_mul(2).ok_or_else(|| Error::Overflow {
                label: label.clone(),
                index: j,
            })?;
            for &sq in &squares {
                let t = j + sq;
                if t > n_max {
                    break;
                }
                checked_push(&label, &mut next[t], twice, t)?;
            }
        }
        cur = next;
    }
    CoefficientTable::new(label, cur)
}

/// Counts `x in Z^d` with `|x|^2 = n` by direct nested enumeration. This is
/// the independent reference for [`r_d_table`].
pub fn r_d_bruteforce(d: u32, n: u64) -> Result<u64> {
    if d == 0 || d > 8 || n > 10_000 {
        return Err(Error::GuardExceeded(format!(
            "r_d brute force limited to 1 <= d <= 8 and n <= 10^4 (got d={d}, n={n})"
        )));
    }
    // Nonnegative coordinates with a factor 2 per nonzero one; the last
    // coordinate is solved for rather than looped over.
    fn count(dims: u32, remaining: u64) -> u64 {
        if dims == 1 {
            return match remaining {
                0 => 1,
                m if is_square(m) => 2,
                _ => 0,
            };
        }
        let bound = isqrt(remaining);
        (0..=bound)
            .map(|x| {
                let c = count(dims - 1, remaining - x * x);
                if x == 0 { c } else { 2 * c }
            })
            .sum()
    }
    Ok(count(d, n))
}

/// Tables of `d(n)` and `d_o(n)` (positive odd divisors) for `1 <= n <= N`.
/// Index 0 holds 0 in both.
pub fn divisor_counts(n_max: usize) -> Result<(CoefficientTable, CoefficientTable)> {
    let mut d = vec![0i128; n_max + 1];
    for i in 1..=n_max {
        for j in (i..=n_max).step_by(i) {
            d[j] += 1;
        }
    }
    let mut d_odd = vec![0i128; n_max + 1];
    for n in 1..=n_max {
        d_odd[n] = d[n >> n.trailing_zeros()];
    }
    Ok((
        CoefficientTable::new("d", d)?,
        CoefficientTable::new("d_odd", d_odd)?,
    ))
}

/// A truncated Dirichlet series with its tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedL {
    pub value: Complex64,
    /// Upper bound for `sum_{n > N} n^{-Re s}`.
    pub tail_bound: f64,
}

/// `sum_{n <= N} chi(n) n^{-s}` for `Re s > 1`.
pub fn truncated_l(s: Complex64, chi: &CharacterSpec, n_max: u64) -> Result<TruncatedL> {
    if !(s.re > 1.0) {
        return Err(invalid(format!(
            "truncated L-series needs Re(s) > 1, got {}",
            s.re
        )));
    }
    if n_max == 0 {
        return Err(invalid("truncated L-series needs N >= 1"));
    }
    let mut acc = ComplexKahanSum::new();
    // Smallest terms first.
    for n in (1..=n_max).rev() {
        let c = chi.eval(n);
        if c == 0 {
            continue;
        }
        let term = (-s * (n as f64).ln()).exp();
        acc.add(term * c as f64);
    }
    Ok(TruncatedL {
        value: acc.value(),
        tail_bound: (n_max as f64).powf(1.0 - s.re) / (s.re - 1.0),
    })
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Prime factorisation by trial division, as `(p, e)` pairs in increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Exponent of `p` in `n` (`n != 0`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
