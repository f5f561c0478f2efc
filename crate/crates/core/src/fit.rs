//! Least-squares fits of count series against `X^a (log X)^b` bases,
//! log-log slopes, and the with-log / without-log model comparison.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::lattice::CountSeries;

/// Relative pivot below which a normalised design column counts as
/// dependent on the earlier ones.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisTerm {
    pub exponent: f64,
    pub log_power: u32,
}

impl BasisTerm {
    pub const fn new(exponent: f64, log_power: u32) -> Self {
        Self { exponent, log_power }
    }

    pub fn eval(&self, x: f64) -> f64 {
        x.powf(self.exponent) * x.ln().powi(self.log_power as i32)
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log_power {
            0 => write!(f, "X^{}", self.exponent),
            1 => write!(f, "X^{} log X", self.exponent),
            p => write!(f, "X^{} log^{p} X", self.exponent),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFit {
    pub model: Vec<BasisTerm>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    /// Log-log slope of the raw series (NaN when some value is not positive).
    pub slope_estimate: f64,
    /// Smallest `|R_jj| / max |R_ii|` of the normalised design.
    pub min_pivot: f64,
}

impl AsymptoticFit {
    pub fn coefficient(&self, term: &BasisTerm) -> Option<f64> {
        self.model.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }
}

struct Solution {
    coefficients: Vec<f64>,
    residual_norm: f64,
    min_pivot: f64,
}

fn least_squares(xs: &[f64], ys: &[f64], model: &[BasisTerm]) -> Result<Solution> {
    let (m, n) = (xs.len(), model.len());
    let mut a = DMatrix::from_fn(m, n, |i, j| model[j].eval(xs[i]));
    let mut scales = vec![1.0; n];
    for (j, scale) in scales.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::RankDeficient { column: j, pivot: 0.0 });
        }
        a.column_mut(j).scale_mut(1.0 / norm);
        *scale = norm;
    }
    let y = DVector::from_column_slice(ys);
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = (0..n).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let p = r[(j, j)].abs() / diag_max;
        min_pivot = min_pivot.min(p);
        if !(p > RANK_TOLERANCE) {
            return Err(Error::RankDeficient { column: j, pivot: p });
        }
    }
    let qty = qr.q().transpose() * &y;
    let c = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { column: n - 1, pivot: 0.0 })?;
    let residual_norm = (&a * &c - &y).norm();
    Ok(Solution {
        coefficients: c.iter().zip(&scales).map(|(v, s)| v / s).collect(),
        residual_norm,
        min_pivot,
    })
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if ys.iter().any(|&y| !(y > 0.0)) || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// Ordinary least squares on `[X_i^{a_j} (log X_i)^{b_j}]` via Householder QR
/// with unit-normalised columns.
pub fn fit_model(series: &CountSeries, model: &[BasisTerm]) -> Result<AsymptoticFit> {
    if model.is_empty() {
        return Err(invalid("model needs at least one basis term"));
    }
    if series.grid.len() < model.len() + 2 {
        return Err(invalid(format!(
            "{} grid points cannot support a {}-term fit (need {})",
            series.grid.len(),
            model.len(),
            model.len() + 2
        )));
    }
    let sol = least_squares(&series.grid, &series.values, model)?;
    Ok(AsymptoticFit {
        model: model.to_vec(),
        coefficients: sol.coefficients,
        residual_norm: sol.residual_norm,
        slope_estimate: log_log_slope(&series.grid, &series.values).unwrap_or(f64::NAN),
        min_pivot: sol.min_pivot,
    })
}

/// Least-squares slope of `log value` against `log X`.
pub fn estimate_exponent(series: &CountSeries) -> Result<f64> {
    if series.grid.len() < 3 {
        return Err(invalid("exponent estimate needs at least 3 grid points"));
    }
    log_log_slope(&series.grid, &series.values)
        .ok_or_else(|| invalid("exponent estimate needs positive values"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Log,
    NoLog,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Log => "log",
            Verdict::NoLog => "no-log",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictConfig {
    /// Required ratio of without-log to with-log residual.
    pub reduction_factor: f64,
    /// Required `|log coefficient| / standard error`.
    pub sigmas: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            reduction_factor: 5.0,
            sigmas: 3.0,
            resamples: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerdictRecord {
    pub verdict: Verdict,
    pub with_log: AsymptoticFit,
    pub without_log: AsymptoticFit,
    pub log_term: BasisTerm,
    pub log_coefficient: f64,
    /// Bootstrap spread of the log coefficient.
    pub standard_error: f64,
    pub residual_reduction: f64,
    /// Bootstrap resamples that produced a usable fit.
    pub resamples_used: usize,
    pub config: VerdictConfig,
}

/// Decides whether the series needs the log term that the with-log model
/// adds over the without-log model.
///
/// The standard error comes from refitting the with-log model on grid
/// points resampled with replacement, from a seeded generator.
pub fn log_term_verdict(
    series: &CountSeries,
    with_log: &[BasisTerm],
    without_log: &[BasisTerm],
    config: &VerdictConfig,
) -> Result<VerdictRecord> {
    let log_term = *with_log
        .iter()
        .find(|t| t.log_power > 0 && !without_log.contains(t))
        .ok_or_else(|| invalid("with-log model must add a log term absent from the other model"))?;
    let fit_with = fit_model(series, with_log)?;
    let fit_without = fit_model(series, without_log)?;
    let idx = with_log.iter().position(|t| *t == log_term).unwrap();
    let coef = fit_with.coefficients[idx];

    let n = series.grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draws = Vec::with_capacity(config.resamples);
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    for _ in 0..config.resamples {
        for i in 0..n {
            let j = rng.gen_range(0..n);
            xs[i] = series.grid[j];
            ys[i] = series.values[j];
        }
        if let Ok(sol) = least_squares(&xs, &ys, with_log) {
            draws.push(sol.coefficients[idx]);
        }
    }
    let se = if draws.len() * 2 >= config.resamples.max(1) && draws.len() >= 2 {
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        var.sqrt()
    } else {
        f64::INFINITY
    };

    // A log coefficient that contributes nothing at double precision is
    // noise whatever the bootstrap says.
    let y_scale = series.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let basis_scale = series.grid.iter().fold(0.0f64, |m, &x| m.max(log_term.eval(x).abs()));
    let negligible = (coef * basis_scale).abs() <= 1e-9 * y_scale;

    let tiny = f64::MIN_POSITIVE;
    let reduction = fit_without.residual_norm / fit_with.residual_norm.max(tiny);
    let significant = !negligible && coef.abs() >= config.sigmas * se;
    let verdict = if significant && coef > 0.0 && reduction >= config.reduction_factor {
        Verdict::Log
    } else if !significant {
        Verdict::NoLog
    } else {
        Verdict::Inconclusive
    };
    Ok(VerdictRecord {
        verdict,
        with_log: fit_with,
        without_log: fit_without,
        log_term,
        log_coefficient: coef,
        standard_error: se,
        residual_reduction: reduction,
        resamples_used: draws.len(),
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CountKind;
    use rand_distr::{Distribution, Normal};

    fn geometric(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|e| 2f64.powi(e)).collect()
    }

    fn series(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> CountSeries {
        let values = grid.iter().map(|&x| f(x)).collect();
        CountSeries::real(grid, values, CountKind::SmoothedExp, "synthetic").unwrap()
    }

    const ROOT_LOG: BasisTerm = BasisTerm::new(0.5, 1);
    const ROOT: BasisTerm = BasisTerm::new(0.5, 0);

    #[test]
    fn exact_recovery() {
        let s = series(geometric(4, 14), |x| 3.0 * x.powf(1.5));
        let f = fit_model(&s, &[BasisTerm::new(1.5, 0)]).unwrap();
        assert!((f.coefficients[0] - 3.0).abs() < 1e-9);
        assert!((f.slope_estimate - 1.5).abs() < 1e-12);

        let s = series(geometric(4, 20), |x| 2.0 * x.sqrt() * x.ln() + 5.0 * x.sqrt());
        let f = fit_model(&s, &[ROOT_LOG, ROOT]).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-6);
        assert!((f.coefficients[1] - 5.0).abs() < 1e-6);
        assert_eq!(f.coefficient(&ROOT), Some(f.coefficients[1]));
        assert_eq!(f, fit_model(&s, &[ROOT_LOG, ROOT]).unwrap());
    }

    #[test]
    fn rejects_collinear_and_small_grids() {
        let s = series(geometric(1, 10), |x| x);
        let dup = [BasisTerm::new(1.0, 0), BasisTerm::new(1.0, 0)];
        assert!(matches!(fit_model(&s, &dup), Err(Error::RankDeficient { .. })));
        let s = series(geometric(1, 3), |x| x);
        assert!(fit_model(&s, &[ROOT, ROOT_LOG]).is_err());
    }

    #[test]
    fn exponent_examples() {
        let s = series(geometric(2, 12), |x| 7.0 * x * x);
        assert!((estimate_exponent(&s).unwrap() - 2.0).abs() < 1e-9);
        let scaled = series(geometric(2, 12), |x| 7e5 * x * x);
        assert!((estimate_exponent(&s).unwrap() - estimate_exponent(&scaled).unwrap()).abs() < 1e-12);
        let bad = CountSeries::real(vec![1.0, 2.0, 3.0], vec![1.0, -1.0, 2.0], CountKind::Concentrated, "x").unwrap();
        assert!(estimate_exponent(&bad).is_err());
    }

    #[test]
    fn pure_power_law_has_no_log() {
        let s = series(geometric(10, 20), |x| 4.0 * x.sqrt());
        let v = log_term_verdict(&s, &[ROOT_LOG, ROOT], &[ROOT], &VerdictConfig::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NoLog);
    }

    #[test]
    fn planted_log_term_is_found() {
        let s = series(geometric(10, 20), |x| x.sqrt() * x.ln() + 2.0 * x.sqrt());
        let v = log_term_verdict(&s, &[ROOT_LOG, ROOT], &[ROOT], &VerdictConfig::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Log, "{v:?}");
    }

    #[test]
    fn verdicts_under_noise() {
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let grid = geometric(10, 20);
        let mut agree_log = 0;
        let mut agree_plain = 0;
        for trial in 0..50 {
            let cfg = VerdictConfig { seed: trial, ..VerdictConfig::default() };
            let mut noisy = |f: &dyn Fn(f64) -> f64| {
                let values = grid.iter().map(|&x| f(x) * (1.0 + noise.sample(&mut rng))).collect();
                CountSeries::real(grid.clone(), values, CountKind::Concentrated, "noisy").unwrap()
            };
            let with = noisy(&|x: f64| x.sqrt() * x.ln());
            let plain = noisy(&|x: f64| x.sqrt());
            if log_term_verdict(&with, &[ROOT_LOG, ROOT], &[ROOT], &cfg).unwrap().verdict == Verdict::Log {
                agree_log += 1;
            }
            if log_term_verdict(&plain, &[ROOT_LOG, ROOT], &[ROOT], &cfg).unwrap().verdict == Verdict::NoLog {
                agree_plain += 1;
            }
        }
        assert!(agree_log >= 45, "log verdicts {agree_log}/50");
        assert!(agree_plain >= 45, "no-log verdicts {agree_plain}/50");
    }

    #[test]
    fn verdict_requires_a_distinct_log_term() {
        let s = series(geometric(10, 20), |x| x.sqrt());
        assert!(log_term_verdict(&s, &[ROOT], &[ROOT], &VerdictConfig::default()).is_err());
    }
}
