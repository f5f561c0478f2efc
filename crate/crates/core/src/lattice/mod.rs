//! Exact lattice counts: balls, Hardy's identity for the circle, the
//! one-sheeted hyperboloids `x_1^2 + ... + x_{d-1}^2 = x_d^2 + h`, and the
//! divisor-sum identities carried by `X^2 + Y^2 = Z^2 + 1`.

mod bessel;

use std::f64::consts::PI;

use crate::arith::{factorize, isqrt, r_d_table, CoefficientTable};
use crate::error::{invalid, Error, Result};
use crate::kernels::gamma::gamma_real;
use crate::sum::KahanSum;

pub use bessel::bessel_j1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountKind {
    Sharp,
    SmoothedExp,
    Concentrated,
    CompactCutoff,
    Cesaro,
    /// Mean or moment of a discrepancy rather than a count.
    Moment,
    /// Read from an external file; no shape invariants assumed.
    Imported,
}

impl CountKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CountKind::Sharp => "sharp",
            CountKind::SmoothedExp => "smoothed-exp",
            CountKind::Concentrated => "concentrated",
            CountKind::CompactCutoff => "compact-cutoff",
            CountKind::Cesaro => "cesaro",
            CountKind::Moment => "moment",
            CountKind::Imported => "imported",
        }
    }
}

/// A count evaluated along a grid of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSeries {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Exact integers behind `values` for sharp counts.
    pub exact: Option<Vec<i128>>,
    pub kind: CountKind,
    pub target: String,
}

impl CountSeries {
    pub fn sharp(grid: Vec<f64>, exact: Vec<i128>, target: impl Into<String>) -> Result<Self> {
        let s = Self {
            values: exact.iter().map(|&v| v as f64).collect(),
            exact: Some(exact),
            grid,
            kind: CountKind::Sharp,
            target: target.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn real(grid: Vec<f64>, values: Vec<f64>, kind: CountKind, target: impl Into<String>) -> Result<Self> {
        let s = Self {
            grid,
            values,
            exact: None,
            kind,
            target: target.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.values.len() {
            return Err(invalid("count series grid and values differ in length"));
        }
        if self.grid.iter().any(|&x| !(x > 0.0)) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("count series grid must be positive and strictly ascending"));
        }
        match self.kind {
            CountKind::Sharp => {
                let exact = self.exact.as_ref().ok_or_else(|| invalid("sharp counts must be exact"))?;
                if exact.iter().any(|&v| v < 0) || exact.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("sharp counts must be nonnegative and nondecreasing"));
                }
            }
            CountKind::SmoothedExp => {
                if self.values.iter().any(|&v| !(v > 0.0)) || self.values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("smoothed counts must be positive and increasing"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Volume of the `d`-ball of radius `r`.
pub fn ball_volume(d: u32, r: f64) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) * r.powi(d as i32) / gamma_real(h + 1.0)
}

/// Prefix sums of `r_d`, i.e. `S_d(n)` for integer `n <= N`.
#[derive(Clone, Debug)]
pub struct BallCounts {
    d: u32,
    prefix: Vec<i128>,
}

impl BallCounts {
    pub fn new(d: u32, n_max: usize) -> Result<Self> {
        Self::from_table(d, &r_d_table(d, n_max)?)
    }

    pub fn from_table(d: u32, r: &CoefficientTable) -> Result<Self> {
        Ok(Self {
            d,
            prefix: r.prefix_sums()?,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `#{x in Z^d : |x|^2 <= R}`.
    pub fn count(&self, r: f64) -> Result<i128> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(format!("radius squared must be nonnegative, got {r}")));
        }
        let n = r.floor() as u64;
        if n as usize > self.len() {
            return Err(Error::TableTooShort {
                label: format!("r_{}", self.d),
                needed: n,
                available: self.len() as u64,
            });
        }
        Ok(self.prefix[n as usize])
    }

    /// `S_d(R) - Vol B_d(sqrt R)`.
    pub fn discrepancy(&self, r: f64) -> Result<f64> {
        Ok(self.count(r)? as f64 - ball_volume(self.d, r.sqrt()))
    }
}

pub fn count_ball(d: u32, r: f64) -> Result<i128> {
    BallCounts::new(d, r.max(0.0).floor() as usize)?.count(r)
}

pub fn discrepancy(d: u32, r: f64) -> Result<f64> {
    BallCounts::new(d, r.max(0.0).floor() as usize)?.discrepancy(r)
}

/// `int_0^X (S_2(r) - pi r)^2 dr`, exactly piecewise: on `[n, n+1)` the count
/// is constant, so each piece is `(b - a)(u^2 + uv + v^2)/3` with `u, v` the
/// discrepancy at the piece endpoints.
pub fn mean_square_p2(circle: &BallCounts, x: f64) -> Result<f64> {
    if circle.dimension() != 2 {
        return Err(invalid("mean square of the circle discrepancy needs the d = 2 counts"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("X must be nonnegative, got {x}")));
    }
    circle.count(x)?;
    let mut acc = KahanSum::new();
    let full = x.floor() as usize;
    for n in 0..=full {
        let a = n as f64;
        let b = if n == full { x } else { a + 1.0 };
        if b <= a {
            continue;
        }
        let c = circle.prefix[n] as f64;
        let u = c - PI * a;
        let v = c - PI * b;
        acc.add((b - a) * (u * u + u * v + v * v) / 3.0);
    }
    Ok(acc.value())
}

/// Truncated Hardy series `sqrt(R) sum_{n <= M} r_2(n) n^{-1/2} J_1(2 pi sqrt(nR))`.
///
/// Only non-integer `R` is accepted: at integers the series converges to
/// the count with the boundary shell weighted by one half.
pub fn hardy_identity(r2: &CoefficientTable, r: f64, m: u64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("R must be positive, got {r}")));
    }
    if r.fract() == 0.0 {
        return Err(invalid(format!("Hardy's identity is evaluated at non-integer R only, got {r}")));
    }
    r2.require(m)?;
    let mut acc = KahanSum::new();
    for (n, &c) in r2.values().iter().enumerate().take(m as usize + 1).skip(1) {
        if c == 0 {
            continue;
        }
        let nf = n as f64;
        acc.add(c as f64 / nf.sqrt() * bessel_j1(2.0 * PI * (nf * r).sqrt()));
    }
    Ok(r.sqrt() * acc.value())
}

/// Counts on `x_1^2 + ... + x_{d-1}^2 = x_d^2 + h`, sliced by `m = x_d`.
#[derive(Clone, Debug)]
pub struct Hyperboloid {
    d: u32,
    h: u64,
    /// `r_{d-1}`
    slices: CoefficientTable,
}

impl Hyperboloid {
    /// Builds `r_{d-1}` far enough to answer queries with `||x||^2 <= r_max`.
    pub fn new(d: u32, h: u64, r_max: f64) -> Result<Self> {
        if d < 3 {
            return Err(invalid(format!("hyperboloid needs d >= 3, got {d}")));
        }
        if h == 0 {
            return Err(invalid("hyperboloid shift h must be positive"));
        }
        let m = Self::m_bound(h, r_max);
        let need = m * m + h;
        Self::from_table(d, h, r_d_table(d - 1, need as usize)?)
    }

    /// `slices` must be the `r_{d-1}` table.
    pub fn from_table(d: u32, h: u64, slices: CoefficientTable) -> Result<Self> {
        if d < 3 || h == 0 {
            return Err(invalid("hyperboloid needs d >= 3 and h >= 1"));
        }
        let want = format!("r_{}", d - 1);
        if slices.label() != want {
            return Err(invalid(format!("expected table `{want}`, got `{}`", slices.label())));
        }
        Ok(Self { d, h, slices })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn shift(&self) -> u64 {
        self.h
    }

    /// Largest `m >= 0` with `2m^2 + h <= R` (0 when none).
    fn m_bound(h: u64, r: f64) -> u64 {
        let room = (r - h as f64) / 2.0;
        if room < 0.0 {
            return 0;
        }
        let mut m = isqrt(room.floor() as u64);
        while 2 * (m + 1) * (m + 1) + h <= r.floor() as u64 {
            m += 1;
        }
        m
    }

    fn slice(&self, m: u64) -> Result<i128> {
        self.slices.at(m * m + self.h)
    }

    /// `#{x : ||x||^2 <= R}` on the hyperboloid, i.e.
    /// `sum_{m in Z, 2m^2 + h <= R} r_{d-1}(m^2 + h)`.
    pub fn count(&self, r: f64) -> Result<i128> {
        if !(r.is_finite()) || r < self.h as f64 {
            return Ok(0);
        }
        let top = Self::m_bound(self.h, r);
        let mut total = self.slice(0)?;
        for m in 1..=top {
            total += 2 * self.slice(m)?;
        }
        Ok(total)
    }

    /// `sum_m r_{d-1}(m^2 + h) e^{-(2m^2 + h)/X}` over `2m^2 <= 40X`.
    pub fn smoothed(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("X must be positive, got {x}")));
        }
        let top = isqrt((20.0 * x).floor() as u64);
        let mut acc = KahanSum::new();
        for m in (0..=top).rev() {
            let mult = if m == 0 { 1.0 } else { 2.0 };
            let n = (2 * m * m + self.h) as f64;
            acc.add(mult * self.slice(m)? as f64 * (-n / x).exp());
        }
        Ok(acc.value())
    }

    /// Shell table: entry `n` counts points with `||x||^2 = n`, for `n <= N`.
    pub fn shell_table(&self, n_max: u64) -> Result<CoefficientTable> {
        let mut values = vec![0i128; n_max as usize + 1];
        let mut m = 0u64;
        while 2 * m * m + self.h <= n_max {
            let mult = if m == 0 { 1 } else { 2 };
            values[(2 * m * m + self.h) as usize] += mult * self.slice(m)?;
            m += 1;
        }
        CoefficientTable::new(format!("hyp_{}_{}", self.d, self.h), values)
    }

    /// Window sum over `|2m^2 + h - X| < X^{1 - lambda}` and its
    /// normalisation by `X^{k - lambda}`, `k = (d-2)/2`.
    pub fn short_interval(&self, x: f64) -> Result<ShortInterval> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("X must be positive, got {x}")));
        }
        let k = (self.d as f64 - 2.0) / 2.0;
        let lambda = short_interval_saving(k);
        let width = x.powf(1.0 - lambda);
        let mut sum = 0i128;
        let hf = self.h as f64;
        let top = if x + width < hf { 0 } else { isqrt(((x + width - hf) / 2.0).ceil() as u64) + 1 };
        for m in 0..=top {
            let n = (2 * m * m + self.h) as f64;
            if (n - x).abs() < width {
                let mult = if m == 0 { 1 } else { 2 };
                sum += mult * self.slice(m)?;
            }
        }
        Ok(ShortInterval {
            sum,
            width,
            lambda,
            normalized: sum as f64 / x.powf(k - lambda),
        })
    }
}

/// `lambda(k) = 1 / (6 + 19/k)`.
pub fn short_interval_saving(k: f64) -> f64 {
    1.0 / (6.0 + 19.0 / k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortInterval {
    pub sum: i128,
    pub width: f64,
    pub lambda: f64,
    pub normalized: f64,
}

pub fn hyperboloid_count(d: u32, h: u64, r: f64) -> Result<i128> {
    Hyperboloid::new(d, h, r)?.count(r)
}

/// Direct enumeration of the box `||x||^2 <= R`, testing the defining
/// equation point by point. Guarded to `R^{d/2} <= 10^9`-ish boxes.
pub fn hyperboloid_bruteforce(d: u32, h: u64, r: f64) -> Result<i128> {
    if d < 3 {
        return Err(invalid(format!("hyperboloid needs d >= 3, got {d}")));
    }
    let limit = match d {
        3 => 1000.0,
        4 => 400.0,
        5 => 200.0,
        6 => 60.0,
        _ => 30.0,
    };
    if r > limit {
        return Err(Error::GuardExceeded(format!(
            "brute-force hyperboloid count limited to R <= {limit} in dimension {d}"
        )));
    }
    if r < 0.0 {
        return Ok(0);
    }
    let bound = isqrt(r.floor() as u64) as i64;
    let rr = r.floor() as i64;
    let mut coords = vec![0i64; d as usize];
    let mut count = 0i128;
    fn walk(coords: &mut [i64], idx: usize, norm: i64, bound: i64, rr: i64, h: i64, count: &mut i128) {
        if idx == coords.len() {
            let last = coords[coords.len() - 1];
            let lhs: i64 = coords[..coords.len() - 1].iter().map(|c| c * c).sum();
            if lhs == last * last + h {
                *count += 1;
            }
            return;
        }
        for c in -bound..=bound {
            let nn = norm + c * c;
            if nn > rr {
                continue;
            }
            coords[idx] = c;
            walk(coords, idx + 1, nn, bound, rr, h, count);
        }
    }
    walk(&mut coords, 0, 0, bound, rr, h as i64, &mut count);
    Ok(count)
}

/// Number of odd positive divisors, by factorisation.
fn odd_divisors(n: u64) -> i128 {
    factorize(n)
        .into_iter()
        .filter(|&(p, _)| p != 2)
        .map(|(_, e)| e as i128 + 1)
        .product()
}

fn divisors(n: u64) -> i128 {
    factorize(n).into_iter().map(|(_, e)| e as i128 + 1).product()
}

/// `#{(X, Y) in Z^2 : X^2 + Y^2 = n}` by scanning `X`.
fn two_square_reps(n: u64) -> i128 {
    let top = isqrt(n);
    let mut c = 0;
    for x in 0..=top {
        let rest = n - x * x;
        let y = isqrt(rest);
        if y * y == rest {
            c += match (x == 0, y == 0) {
                (true, true) => 1,
                (true, false) | (false, true) => 2,
                (false, false) => 4,
            };
        }
    }
    c
}

/// Points on `X^2 + Y^2 = (scale Z)^2 + 1` with `1 <= Z <= R`.
fn positive_z_count(scale: u64, r: u64) -> i128 {
    (1..=r).map(|z| two_square_reps((scale * z).pow(2) + 1)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivisorIdentity {
    /// Points on `X^2 + Y^2 = Z^2 + 1` with `1 <= Z <= R`.
    pub lhs: i128,
    /// `4 sum_{n <= R} d_o(n^2 + 1)`.
    pub rhs: i128,
    pub equal: bool,
    /// Points with `|Z| <= R`; equals `2 lhs + 4` (the `Z = 0` slice holds
    /// the four unit points).
    pub lhs_all_z: i128,
}

/// Lattice count on `X^2 + Y^2 = Z^2 + 1` against the odd-divisor sum.
///
/// The divisor sum matches the count over one sign of `Z` (each `Z >= 1`
/// contributes `r_2(Z^2 + 1) = 4 d_o(Z^2 + 1)`); the symmetric `|Z| <= R`
/// count is reported alongside.
pub fn divisor_identity_check(r: u64) -> Result<DivisorIdentity> {
    if r == 0 {
        return Err(invalid("R must be a positive integer"));
    }
    let lhs = positive_z_count(1, r);
    let rhs = 4 * (1..=r).map(|n| odd_divisors(n * n + 1)).sum::<i128>();
    let lhs_all_z = 2 * lhs + two_square_reps(1);
    Ok(DivisorIdentity {
        lhs,
        rhs,
        equal: lhs == rhs,
        lhs_all_z,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivisorCombination {
    /// `sum_{n <= R} d(n^2 + 1)`.
    pub direct: i128,
    /// `N_1(R)/2 - N_2(R/2)/4` with both counts over `1 <= Z`.
    pub combined: f64,
    pub equal: bool,
}

/// `sum_{n <= R} d(n^2 + 1)` recovered from the counts on
/// `X^2 + Y^2 = Z^2 + 1` and `X^2 + Y^2 = 4Z^2 + 1`.
pub fn divisor_combination(r: u64) -> Result<DivisorCombination> {
    if r == 0 || r % 2 != 0 {
        return Err(invalid(format!("R must be a positive even integer, got {r}")));
    }
    let direct: i128 = (1..=r).map(|n| divisors(n * n + 1)).sum();
    let n1 = positive_z_count(1, r);
    let n2 = positive_z_count(2, r / 2);
    let four_times = 2 * n1 - n2;
    Ok(DivisorCombination {
        direct,
        combined: four_times as f64 / 4.0,
        equal: four_times % 4 == 0 && four_times / 4 == direct,
    })
}
