use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use gv_core::arith::{cache, factorize, gcd, is_square, kronecker, r_d_table, valuation, CoefficientTable};
use gv_core::charsums::{
    d2_sum, factorization_check, gauss_sum_g, gauss_sum_simplified, gauss_sum_two_piece, h_sum,
    reduction_check, Weight,
};
use gv_core::cuspform::{
    partial_sums, rankin_constant, short_interval_average, short_interval_width, sign_changes,
    smoothed_second_moment, tau_table, CuspFormSeries, DELTA_LABEL,
};
use gv_core::fit::{estimate_exponent, fit_model, log_term_verdict, AsymptoticFit, BasisTerm, VerdictConfig, VerdictRecord};
use gv_core::kernels::{
    apply_kernel, apply_kernel_truncated, cesaro_closed, cesaro_contour, compact_mellin, concentrating_closed,
    concentrating_contour, exp_contour, KernelKind, KernelSpec, Quadrature,
};
use gv_core::lattice::{
    divisor_combination, divisor_identity_check, hardy_identity, mean_square_p2, short_interval_saving, BallCounts,
    CountKind, CountSeries, Hyperboloid,
};

use crate::grid::parse_grid;
use crate::report::{finite, fmt_f, Check, CsvTable, Report};
use crate::{CliError, RunConfig};

type Res<T> = Result<T, CliError>;

/// Name, accepted flags, CSV columns.
pub const SUBCOMMANDS: &[(&str, &[&str], &str)] = &[
    ("tau", &["table-size"], "n,tau"),
    ("second-moment", &["grid", "table-size"], "X,moment,ratio"),
    ("sign-scan", &["grid", "nu", "r", "table-size"], "X,windowEnd,changes,firstChange"),
    ("short-interval", &["grid", "table-size"], "X,halfWidth,average,normalized"),
    ("count-circle", &["d", "grid"], "R,count,discrepancy"),
    ("mean-square-p2", &["grid"], "X,meanSquare"),
    ("hardy", &["grid", "terms", "seed"], "R,series,discrepancy,error"),
    ("count-hyperboloid", &["d", "h", "grid", "seed"], "R,count"),
    ("smooth-hyperboloid", &["d", "h", "grid", "kernel", "seed"], "X,value"),
    ("short-hyperboloid", &["d", "h", "grid"], "X,width,sum,normalized,concentratedLowerBound,dominates"),
    (
        "divisor-identity",
        &["R"],
        "R,lhs,rhs,lhsAllZ,identityEqual,direct,combined,combinationEqual",
    ),
    ("gauss-sums", &[], "check,cases,maxResidual,tolerance,pass"),
    ("eisenstein-check", &["table-size"], "identity,h,k,w,residual,bound,pass"),
    ("kernels-verify", &[], "identity,a,b,contour,closed,residual,tolerance,pass"),
    ("fit", &["input", "model", "without", "seed"], "term,exponent,logPower,coefficient"),
];

pub fn allowed_keys(name: &str) -> Option<&'static [&'static str]> {
    SUBCOMMANDS.iter().find(|(n, _, _)| *n == name).map(|(_, k, _)| *k)
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Res<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("cannot parse --{key} value `{v}`"))),
        }
    }

    fn grid(&self, default: &str) -> Res<Vec<f64>> {
        parse_grid(self.raw("grid").unwrap_or(default)).map_err(CliError::Config)
    }
}

pub fn dispatch(cfg: &RunConfig) -> Res<Report> {
    let p = Params(&cfg.params);
    let cache = cfg.effective_cache_dir();
    match cfg.subcommand.as_str() {
        "tau" => tau(&p, cache.as_deref()),
        "second-moment" => second_moment(&p, cache.as_deref()),
        "sign-scan" => sign_scan(&p, cache.as_deref()),
        "short-interval" => short_interval(&p, cache.as_deref()),
        "count-circle" => count_circle(&p),
        "mean-square-p2" => mean_square(&p),
        "hardy" => hardy(&p),
        "count-hyperboloid" => count_hyperboloid(&p),
        "smooth-hyperboloid" => smooth_hyperboloid(&p),
        "short-hyperboloid" => short_hyperboloid(&p),
        "divisor-identity" => divisor_identity(&p),
        "gauss-sums" => gauss_sums(),
        "eisenstein-check" => eisenstein_check(&p),
        "kernels-verify" => kernels_verify(),
        "fit" => fit(&p),
        other => Err(CliError::Config(format!("unknown subcommand `{other}`"))),
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn report(csv: CsvTable, results: Map<String, Value>, checks: Vec<Check>) -> Res<Report> {
    Ok(Report {
        csv: csv.to_bytes()?,
        results,
        checks,
    })
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

// ---------------------------------------------------------------- cusp forms

/// Loads `delta-N.gvct` from the cache directory or builds and stores it.
fn load_tau(n: usize, cache_dir: Option<&Path>) -> Res<(CoefficientTable, &'static str, Option<PathBuf>)> {
    let Some(dir) = cache_dir else {
        return Ok((tau_table(n)?, "computed", None));
    };
    let path = dir.join(format!("{DELTA_LABEL}-{n}.gvct"));
    if path.exists() {
        let t = cache::read_table(&path)?;
        if t.label() != DELTA_LABEL || t.len() != n {
            return Err(CliError::Runtime(format!(
                "cache file {} holds `{}` up to {}, expected `{DELTA_LABEL}` up to {n}",
                path.display(),
                t.label(),
                t.len()
            )));
        }
        return Ok((t, "cache", Some(path)));
    }
    let t = tau_table(n)?;
    cache::write_table(&path, &t)?;
    Ok((t, "computed", Some(path)))
}

fn delta_series(n: usize, cache_dir: Option<&Path>) -> Res<(CuspFormSeries, Value)> {
    let (table, source, path) = load_tau(n, cache_dir)?;
    let meta = json!({
        "tableSize": n,
        "source": source,
        "cacheFile": path.map(|p| p.display().to_string()),
    });
    Ok((CuspFormSeries::new(12, table)?, meta))
}

fn tau(p: &Params, cache_dir: Option<&Path>) -> Res<Report> {
    let n: usize = p.get("table-size", 1000)?;
    let (f, meta) = delta_series(n, cache_dir)?;
    let t = f.coeffs();
    let mut csv = CsvTable::new(&["n", "tau"]);
    for i in 1..=n {
        csv.push(vec![i.to_string(), t.values()[i].to_string()]);
    }
    let mut worst = 0u64;
    let mut cases = 0u64;
    for a in 1..=100usize {
        for b in 1..=100usize {
            if a * b <= n && gcd(a as u64, b as u64) == 1 {
                cases += 1;
                if t.values()[a * b] != t.values()[a] * t.values()[b] {
                    worst += 1;
                }
            }
        }
    }
    let (divs, _) = gv_core::arith::divisor_counts(n)?;
    let mut deligne_worst: f64 = 0.0;
    for i in 1..=n {
        let bound = divs.values()[i] as f64 * (i as f64).powf(5.5);
        deligne_worst = deligne_worst.max((t.values()[i] as f64).abs() / bound);
    }
    let checks = vec![
        Check::new(
            "|tau(n)| <= d(n) n^(11/2)",
            deligne_worst <= 1.0 + 1e-9,
            deligne_worst,
            "ratio <= 1",
        ),
        Check::new("tau(1) = 1", t.values()[1] == 1, t.values()[1] as f64, "exact"),
        Check::new(
            "tau(mn) = tau(m) tau(n) for coprime m, n <= 100 with mn <= N",
            worst == 0,
            worst as f64,
            "0 mismatches",
        ),
    ];
    let mut results = obj(meta);
    results.insert("multiplicativityCases".into(), json!(cases));
    results.insert("maxDeligneRatio".into(), json!(deligne_worst));
    report(csv, results, checks)
}

fn second_moment(p: &Params, cache_dir: Option<&Path>) -> Res<Report> {
    let grid = p.grid("2^8..2^12")?;
    let xmax = *grid.last().unwrap();
    let n: usize = p.get("table-size", (40.0 * xmax).floor() as usize)?;
    let (f, meta) = delta_series(n, cache_dir)?;
    let c = rankin_constant(&f, n)?;
    let mut csv = CsvTable::new(&["X", "moment", "ratio"]);
    let mut values = Vec::new();
    for &x in &grid {
        let m = smoothed_second_moment(&f, x)?;
        values.push(m);
        csv.push(vec![fmt_f(x), fmt_f(m), fmt_f(m / x.powf(1.5))]);
    }
    let last_ratio = values.last().unwrap() / xmax.powf(1.5);
    let gap = last_ratio / c.value - 1.0;
    let mut checks = vec![Check::new(
        format!("moment / X^1.5 at X = {xmax} within 5% of the Rankin constant"),
        gap.abs() < 0.05,
        gap,
        "|relative gap| < 0.05",
    )];
    let mut results = obj(json!({
        "rankinConstant": c.value,
        "rankinTailBound": c.tail_bound,
        "rankinTailEstimate": c.tail_estimate,
        "relativeGapAtMaxX": gap,
        "table": meta,
    }));
    if grid.len() >= 3 {
        let s = CountSeries::real(grid.clone(), values, CountKind::SmoothedExp, "second moment")?;
        let e = estimate_exponent(&s)?;
        results.insert("exponent".into(), json!(e));
        checks.push(Check::new("log-log exponent 1.5 +- 0.1", (e - 1.5).abs() <= 0.1, e, "1.5 +- 0.1"));
    }
    report(csv, results, checks)
}

fn sign_scan(p: &Params, cache_dir: Option<&Path>) -> Res<Report> {
    let grid = p.grid("10,100,1000,10000")?;
    let nu: f64 = p.get("nu", 5.5 + 1.0 / 6.0 - 0.01)?;
    let r: f64 = p.get("r", 1.0)?;
    let ends: Vec<u64> = grid.iter().map(|&x| (x.floor() + x.floor().powf(r)).floor() as u64).collect();
    let n: usize = p.get("table-size", *ends.iter().max().unwrap() as usize)?;
    let (f, meta) = delta_series(n, cache_dir)?;
    let s = partial_sums(&f, nu)?;
    let mut csv = CsvTable::new(&["X", "windowEnd", "changes", "firstChange"]);
    let mut checks = Vec::new();
    for (&x, &end) in grid.iter().zip(&ends) {
        let xi = x.floor() as u64;
        let changes = sign_changes(&s, xi, r)?;
        let first = changes.first().map(|c| c.to_string()).unwrap_or_default();
        csv.push(vec![xi.to_string(), end.to_string(), changes.len().to_string(), first]);
        checks.push(Check::new(
            format!("sign change of S^nu in [{xi}, {end}]"),
            !changes.is_empty(),
            changes.len() as f64,
            ">= 1",
        ));
    }
    let mut results = obj(json!({ "nu": nu, "windowExponent": r }));
    results.insert("table".into(), meta);
    report(csv, results, checks)
}

fn short_interval(p: &Params, cache_dir: Option<&Path>) -> Res<Report> {
    let grid = p.grid("2^10..2^16")?;
    let need = grid
        .iter()
        .map(|&x| (x + short_interval_width(x.floor() as u64)).ceil() as usize + 1)
        .max()
        .unwrap();
    let n: usize = p.get("table-size", need)?;
    let (f, meta) = delta_series(n, cache_dir)?;
    let k = f.weight() as f64;
    let mut csv = CsvTable::new(&["X", "halfWidth", "average", "normalized"]);
    let mut worst: f64 = 0.0;
    for &x in &grid {
        let xi = x.floor() as u64;
        let avg = short_interval_average(&f, xi)?;
        let norm = avg / (xi as f64).powf(k - 0.5);
        worst = worst.max(norm);
        csv.push(vec![xi.to_string(), fmt_f(short_interval_width(xi)), fmt_f(avg), fmt_f(norm)]);
    }
    let checks = vec![Check::new(
        "window average / X^(k-1/2) stays below 10",
        worst <= 10.0,
        worst,
        "<= 10",
    )];
    let mut results = obj(json!({ "maxNormalized": worst }));
    results.insert("table".into(), meta);
    report(csv, results, checks)
}

// ------------------------------------------------------------------ lattice

fn count_circle(p: &Params) -> Res<Report> {
    let d: u32 = p.get("d", 2)?;
    let grid = p.grid("2^4..2^16")?;
    let n = grid.last().unwrap().floor() as usize;
    let balls = BallCounts::new(d, n)?;
    let mut csv = CsvTable::new(&["R", "count", "discrepancy"]);
    for &r in &grid {
        csv.push(vec![fmt_f(r), balls.count(r)?.to_string(), fmt_f(balls.discrepancy(r)?)]);
    }
    report(csv, obj(json!({ "d": d })), Vec::new())
}

fn mean_square(p: &Params) -> Res<Report> {
    let grid = p.grid("2^10..2^18")?;
    let circle = BallCounts::new(2, grid.last().unwrap().floor() as usize)?;
    let mut csv = CsvTable::new(&["X", "meanSquare"]);
    let mut values = Vec::new();
    for &x in &grid {
        let v = mean_square_p2(&circle, x)?;
        values.push(v);
        csv.push(vec![fmt_f(x), fmt_f(v)]);
    }
    let mut checks = Vec::new();
    let mut results = Map::new();
    if grid.len() >= 3 {
        let e = estimate_exponent(&CountSeries::real(grid, values, CountKind::Moment, "mean square")?)?;
        results.insert("exponent".into(), json!(e));
        checks.push(Check::new("log-log exponent 1.5 +- 0.05", (e - 1.5).abs() <= 0.05, e, "1.5 +- 0.05"));
    }
    report(csv, results, checks)
}

fn hardy(p: &Params) -> Res<Report> {
    let terms: u64 = p.get("terms", 1_000_000)?;
    let seed: u64 = p.get("seed", VerdictConfig::default().seed)?;
    let radii: Vec<f64> = match p.raw("grid") {
        Some(_) => p.grid("")?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..20).map(|_| rng.gen_range(10.0..1000.0)).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
    };
    if let Some(r) = radii.iter().find(|r| r.fract() == 0.0) {
        return Err(config_err(format!("Hardy's identity is evaluated at non-integer R only, got {r}")));
    }
    let r2 = r_d_table(2, terms.max(radii.last().unwrap().floor() as u64) as usize)?;
    let circle = BallCounts::from_table(2, &r2)?;
    let mut csv = CsvTable::new(&["R", "series", "discrepancy", "error"]);
    let mut worst: f64 = 0.0;
    for &r in &radii {
        let s = hardy_identity(&r2, r, terms)?;
        let disc = circle.discrepancy(r)?;
        worst = worst.max((s - disc).abs());
        csv.push(vec![fmt_f(r), fmt_f(s), fmt_f(disc), fmt_f(s - disc)]);
    }
    let checks = vec![Check::new(
        format!("truncated Hardy series within 0.05 of the discrepancy ({terms} terms)"),
        worst < 0.05,
        worst,
        "< 0.05",
    )];
    report(csv, obj(json!({ "terms": terms, "maxError": worst, "seed": seed })), checks)
}

fn hyperboloid_args(p: &Params) -> Res<(u32, u64)> {
    let d: u32 = p.get("d", 3)?;
    let h: u64 = p.get("h", 1)?;
    if d < 3 || h == 0 {
        return Err(config_err("hyperboloids need --d >= 3 and --h >= 1"));
    }
    Ok((d, h))
}

fn log_models(d: u32) -> ([BasisTerm; 2], [BasisTerm; 1]) {
    let k = (d as f64 - 2.0) / 2.0;
    ([BasisTerm::new(k, 1), BasisTerm::new(k, 0)], [BasisTerm::new(k, 0)])
}

fn fit_json(f: &AsymptoticFit) -> Value {
    json!({
        "model": f.model.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "coefficients": f.coefficients.iter().map(|&c| finite(c)).collect::<Vec<_>>(),
        "residualNorm": finite(f.residual_norm),
        "slopeEstimate": finite(f.slope_estimate),
        "minPivot": finite(f.min_pivot),
    })
}

fn verdict_json(v: &VerdictRecord) -> Value {
    json!({
        "verdict": v.verdict.as_str(),
        "logTerm": v.log_term.to_string(),
        "logCoefficient": finite(v.log_coefficient),
        "standardError": finite(v.standard_error),
        "residualReduction": finite(v.residual_reduction),
        "resamplesUsed": v.resamples_used,
        "thresholds": {
            "reductionFactor": v.config.reduction_factor,
            "sigmas": v.config.sigmas,
            "resamples": v.config.resamples,
            "seed": v.config.seed,
        },
        "withLog": fit_json(&v.with_log),
        "withoutLog": fit_json(&v.without_log),
    })
}

fn dichotomy(series: &CountSeries, d: u32, h: u64, seed: u64) -> Res<(Value, Vec<Check>)> {
    let (with, without) = log_models(d);
    let cfg = VerdictConfig { seed, ..VerdictConfig::default() };
    let mut checks = Vec::new();
    let v = match log_term_verdict(series, &with, &without, &cfg) {
        Ok(v) => v,
        Err(gv_core::Error::InvalidArgument(msg)) => return Ok((json!({ "skipped": msg }), checks)),
        Err(e) => return Err(e.into()),
    };
    if d == 3 {
        let want = if is_square(h) { "log" } else { "no-log" };
        checks.push(Check::new(
            format!("log-term verdict for d = 3, h = {h} is `{want}`"),
            v.verdict.as_str() == want,
            v.log_coefficient,
            want,
        ));
    }
    Ok((verdict_json(&v), checks))
}

fn count_hyperboloid(p: &Params) -> Res<Report> {
    let (d, h) = hyperboloid_args(p)?;
    let grid = p.grid("2^10..2^20")?;
    let seed: u64 = p.get("seed", VerdictConfig::default().seed)?;
    let hyp = Hyperboloid::new(d, h, *grid.last().unwrap())?;
    let mut csv = CsvTable::new(&["R", "count"]);
    let mut counts = Vec::new();
    for &r in &grid {
        let c = hyp.count(r)?;
        counts.push(c);
        csv.push(vec![fmt_f(r), c.to_string()]);
    }
    let series = CountSeries::sharp(grid, counts, format!("N_{d},{h}"))?;
    let (verdict, checks) = dichotomy(&series, d, h, seed)?;
    report(csv, obj(json!({ "d": d, "h": h, "logTermVerdict": verdict })), checks)
}

/// Beyond this a dense shell table is refused rather than allocated.
const SHELL_LIMIT: u64 = 50_000_000;

fn smooth_hyperboloid(p: &Params) -> Res<Report> {
    let (d, h) = hyperboloid_args(p)?;
    let grid = p.grid("2^8..2^16")?;
    let seed: u64 = p.get("seed", VerdictConfig::default().seed)?;
    let kind: KernelKind = p.raw("kernel").unwrap_or("exp").parse().map_err(CliError::from)?;
    let xmax = *grid.last().unwrap();
    let mut values = Vec::new();
    let count_kind = match kind {
        KernelKind::Exponential => {
            let hyp = Hyperboloid::new(d, h, 40.0 * xmax + h as f64)?;
            for &x in &grid {
                values.push(hyp.smoothed(x)?);
            }
            CountKind::SmoothedExp
        }
        _ => {
            let need = kind.coverage_needed(xmax) as u64;
            if need > SHELL_LIMIT {
                return Err(CliError::Coverage(format!(
                    "kernel {kind} at X = {xmax} needs shells up to {need}, above the {SHELL_LIMIT} limit"
                )));
            }
            let hyp = Hyperboloid::new(d, h, need as f64)?;
            let shells = hyp.shell_table(need)?;
            let spec = KernelSpec::with_defaults(kind)?;
            for &x in &grid {
                values.push(apply_kernel(&shells, 0.0, &spec, x)?);
            }
            match kind {
                KernelKind::Cesaro { .. } => CountKind::Cesaro,
                KernelKind::Concentrating { .. } => CountKind::Concentrated,
                _ => CountKind::CompactCutoff,
            }
        }
    };
    let mut csv = CsvTable::new(&["X", "value"]);
    for (&x, &v) in grid.iter().zip(&values) {
        csv.push(vec![fmt_f(x), fmt_f(v)]);
    }
    let series = CountSeries::real(grid, values, count_kind, format!("smoothed N_{d},{h}"))?;
    let (verdict, checks) = dichotomy(&series, d, h, seed)?;
    report(
        csv,
        obj(json!({ "d": d, "h": h, "kernel": kind.to_string(), "logTermVerdict": verdict })),
        checks,
    )
}

fn short_hyperboloid(p: &Params) -> Res<Report> {
    let (d, h) = hyperboloid_args(p)?;
    let grid = p.grid("2^10..2^20")?;
    let xmax = *grid.last().unwrap();
    let shells_to = (8.0 * xmax).ceil() as u64 + h;
    if shells_to > SHELL_LIMIT {
        return Err(CliError::Coverage(format!("shell table up to {shells_to} exceeds {SHELL_LIMIT}")));
    }
    let hyp = Hyperboloid::new(d, h, shells_to as f64)?;
    let shells = hyp.shell_table(shells_to)?;
    let k = (d as f64 - 2.0) / 2.0;
    let lambda = short_interval_saving(k);
    let mut csv = CsvTable::new(&["X", "width", "sum", "normalized", "concentratedLowerBound", "dominates"]);
    let mut worst: f64 = 0.0;
    let mut all_dominate = true;
    let mut min_margin = f64::INFINITY;
    for &x in &grid {
        let w = hyp.short_interval(x)?;
        worst = worst.max(w.normalized);
        // Concentrating weights at Y = X^lambda are at least w_min across the
        // window |n - X| < X / Y, and every shell count is nonnegative.
        let y = x.powf(lambda);
        let spec = KernelSpec::with_defaults(KernelKind::Concentrating { y })?;
        let conc = apply_kernel_truncated(&shells, 0.0, &spec, x);
        let w_min = concentrating_closed(1.0 / (1.0 - 1.0 / y), y).min(concentrating_closed(1.0 + 1.0 / y, y));
        let dominates = conc >= w_min * w.sum as f64;
        if w.sum > 0 {
            min_margin = min_margin.min(conc / (w_min * w.sum as f64));
        }
        all_dominate &= dominates;
        csv.push(vec![
            fmt_f(x),
            fmt_f(w.width),
            w.sum.to_string(),
            fmt_f(w.normalized),
            fmt_f(conc),
            dominates.to_string(),
        ]);
    }
    let checks = vec![Check::new(
        "concentrated sum (Y = X^lambda) dominates w_min times the sharp window sum",
        all_dominate,
        min_margin,
        "ratio >= 1",
    )];
    report(
        csv,
        obj(json!({ "d": d, "h": h, "lambda": lambda, "maxNormalized": worst })),
        checks,
    )
}

fn divisor_identity(p: &Params) -> Res<Report> {
    let r_max: u64 = p.get("R", 200)?;
    if r_max == 0 {
        return Err(config_err("--R must be a positive integer"));
    }
    let mut csv = CsvTable::new(&[
        "R",
        "lhs",
        "rhs",
        "lhsAllZ",
        "identityEqual",
        "direct",
        "combined",
        "combinationEqual",
    ]);
    let mut identity_ok = true;
    let mut combination_ok = true;
    let mut small = Vec::new();
    for r in 1..=r_max {
        let c = divisor_identity_check(r)?;
        identity_ok &= c.equal;
        if r <= 5 {
            small.push(json!({ "R": r, "positiveZ": c.lhs as i64, "allZ": c.lhs_all_z as i64, "divisorSum": c.rhs as i64 }));
        }
        let (direct, combined, comb_eq) = if r % 2 == 0 {
            let m = divisor_combination(r)?;
            combination_ok &= m.equal;
            (m.direct.to_string(), fmt_f(m.combined), m.equal.to_string())
        } else {
            (String::new(), String::new(), String::new())
        };
        csv.push(vec![
            r.to_string(),
            c.lhs.to_string(),
            c.rhs.to_string(),
            c.lhs_all_z.to_string(),
            c.equal.to_string(),
            direct,
            combined,
            comb_eq,
        ]);
    }
    let all = identity_ok && combination_ok;
    let checks = vec![
        Check::new("lattice count equals 4 sum d_o(n^2+1) for all R", identity_ok, identity_ok as u8 as f64, "exact"),
        Check::new("N_1(R)/2 - N_2(R/2)/4 equals sum d(n^2+1) for even R", combination_ok, combination_ok as u8 as f64, "exact"),
    ];
    report(
        csv,
        obj(json!({
            "allEqual": all,
            "identityAllEqual": identity_ok,
            "combinationAllEqual": combination_ok,
            "zConvention": "counts use 1 <= Z <= R; the |Z| <= R count equals 2 * lhs + 4",
            "smallR": small,
        })),
        checks,
    )
}

// ------------------------------------------------------------ character sums

fn odd_primes_upto(n: u64) -> Vec<u64> {
    (3..=n).step_by(2).filter(|&p| factorize(p).len() == 1 && factorize(p)[0].1 == 1).collect()
}

fn half_weights() -> [Weight; 3] {
    [Weight::half(1), Weight::half(3), Weight::half(5)]
}

fn gauss_sums() -> Res<Report> {
    let tol = 1e-9;
    let mut rows: Vec<(String, u64, f64, f64)> = Vec::new();

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for h in 1..=8i64 {
        for n1 in (3..=49u64).step_by(2) {
            for n2 in (n1..=49u64).step_by(2) {
                if gcd(n1, n2) != 1 {
                    continue;
                }
                cases += 1;
                let lhs = h_sum(h, n1 * n2)?;
                worst = worst.max((lhs - h_sum(h, n1)? * h_sum(h, n2)?).norm());
            }
        }
    }
    rows.push(("H multiplicative on coprime odd n1, n2 <= 49, h <= 8".into(), cases, worst, tol));

    let (mut worst, mut cases): (f64, u64) = (0.0, 0);
    for h in 1..=20i64 {
        for p in odd_primes_upto(97) {
            if h as u64 % p == 0 {
                continue;
            }
            cases += 1;
            let want = kronecker(-h, p as i64) as f64 * (p as f64).sqrt();
            worst = worst.max((h_sum(h, p)? - want).norm());
        }
    }
    rows.push(("H(h, p) = (-h/p) sqrt(p) for odd p <= 97, p not dividing h, h <= 20".into(), cases, worst, tol));

    let (mut worst, mut cases): (f64, u64) = (0.0, 0);
    for p in [3u64, 5, 7] {
        for j in 2..=4u32 {
            let pj = p.pow(j);
            for h in 1..=60i64 {
                if (h as u64) % p.pow(j - 1) != 0 {
                    cases += 1;
                    worst = worst.max(h_sum(h, pj)?.norm());
                }
            }
        }
    }
    rows.push(("H(h, p^j) = 0 when p^(j-1) does not divide h".into(), cases, worst, tol));

    let (mut worst, mut cases): (f64, u64) = (0.0, 0);
    for k in half_weights() {
        for h in 1..=10i64 {
            for c in 1..=30u64 {
                let g = gauss_sum_g(h, 4 * c, k)?;
                cases += 1;
                worst = worst
                    .max((g - gauss_sum_two_piece(h, 4 * c, k)?).norm())
                    .max((g - gauss_sum_simplified(h, 4 * c, k)?).norm());
            }
        }
    }
    rows.push(("g_h(4c) equals its two-piece and simplified products, c <= 30".into(), cases, worst, tol));

    let (mut worst, mut cases): (f64, u64) = (0.0, 0);
    for k in half_weights() {
        for h in 1..=64i64 {
            let v = valuation(h as u64, 2);
            for alpha in v + 4..=v + 7 {
                cases += 1;
                worst = worst.max(d2_sum(h, alpha, k)?.norm());
            }
        }
    }
    rows.push(("d2 sum vanishes for alpha >= v_2(h) + 4, h <= 64".into(), cases, worst, tol));

    let (mut worst, mut cases): (f64, u64) = (0.0, 0);
    for k in [1i64, 2] {
        for h in 1..=20i64 {
            for c in 1..=50u64 {
                cases += 1;
                worst = worst.max(reduction_check(h, c, k)? / (4 * c) as f64);
            }
        }
    }
    rows.push(("integral-weight reduction residual / 4c, h <= 20, c <= 50".into(), cases, worst, tol));

    let mut csv = CsvTable::new(&["check", "cases", "maxResidual", "tolerance", "pass"]);
    let mut checks = Vec::new();
    for (name, cases, worst, tol) in rows {
        let pass = worst < tol;
        csv.push(vec![name.clone(), cases.to_string(), fmt_f(worst), fmt_f(tol), pass.to_string()]);
        checks.push(Check::new(name, pass, worst, format!("< {tol:e}")));
    }
    report(csv, Map::new(), checks)
}

fn eisenstein_check(p: &Params) -> Res<Report> {
    let n: u64 = p.get("table-size", 3000)?;
    let mut csv = CsvTable::new(&["identity", "h", "k", "w", "residual", "bound", "pass"]);
    let mut checks = Vec::new();
    let mut reduction_worst: f64 = 0.0;
    for k in [1i64, 2] {
        for h in 1..=20i64 {
            let mut worst: f64 = 0.0;
            for c in 1..=50u64 {
                worst = worst.max(reduction_check(h, c, k)? / (4 * c) as f64);
            }
            reduction_worst = reduction_worst.max(worst);
            csv.push(vec![
                "reduction".into(),
                h.to_string(),
                k.to_string(),
                String::new(),
                fmt_f(worst),
                fmt_f(1e-9),
                (worst < 1e-9).to_string(),
            ]);
        }
    }
    checks.push(Check::new("reduction residual < 1e-9 * 4c", reduction_worst < 1e-9, reduction_worst, "< 1e-9"));
    let mut details = Vec::new();
    let mut all = true;
    let mut worst_ratio: f64 = 0.0;
    for h in [1u64, 2, 3, 4, 9] {
        for k in [Weight::half(1), Weight::half(3)] {
            for w in [1.75, 2.0] {
                let f = factorization_check(h, Complex64::new(w, 0.0), k, n)?;
                all &= f.holds();
                worst_ratio = worst_ratio.max(f.residual / f.tail_bound);
                csv.push(vec![
                    "factorization".into(),
                    h.to_string(),
                    k.to_string(),
                    fmt_f(w),
                    fmt_f(f.residual),
                    fmt_f(f.tail_bound),
                    f.holds().to_string(),
                ]);
                details.push(json!({
                    "h": h, "k": k.to_string(), "w": w,
                    "lhs": [f.lhs.re, f.lhs.im], "rhs": [f.rhs.re, f.rhs.im],
                }));
            }
        }
    }
    checks.push(Check::new(
        "half-integral factorisation residual within truncation tail bounds",
        all,
        worst_ratio,
        "residual / bound <= 1",
    ));
    report(csv, obj(json!({ "truncation": n, "factorization": details })), checks)
}

// ------------------------------------------------------------------ kernels

fn kernels_verify() -> Res<Report> {
    let mut csv = CsvTable::new(&["identity", "a", "b", "contour", "closed", "residual", "tolerance", "pass"]);
    let mut maxima: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut row = |csv: &mut CsvTable, id: &'static str, a: f64, b: f64, got: f64, want: f64, tol: f64| {
        let res = (got - want).abs();
        let e = maxima.entry(id).or_insert((0.0, tol));
        e.0 = e.0.max(res);
        csv.push(vec![
            id.into(),
            fmt_f(a),
            fmt_f(b),
            fmt_f(got),
            fmt_f(want),
            fmt_f(res),
            fmt_f(tol),
            (res <= tol).to_string(),
        ]);
    };
    for y in [0.5, 1.5, 2.0, 10.0] {
        for k in 1..=3u32 {
            let q = Quadrature::default_for(&KernelKind::Cesaro { k });
            row(&mut csv, "cesaro", y, k as f64, cesaro_contour(y, k, &q)?, cesaro_closed(y, k), 1e-6);
        }
    }
    for x in [1.0, std::f64::consts::E, 3.0, 10.0] {
        for y in [1.0, 2.0, 4.0] {
            let q = Quadrature::default_for(&KernelKind::Concentrating { y });
            row(&mut csv, "concentrating", x, y, concentrating_contour(x, y, &q), concentrating_closed(x, y), 1e-8);
        }
    }
    let q = Quadrature::default_for(&KernelKind::Exponential);
    for x in [0.1, 1.0, 5.0, 20.0, 50.0] {
        row(&mut csv, "exponential", x, q.sigma, exp_contour(x, &q)?, (-x).exp(), 1e-6);
    }
    for y in [4.0, 16.0, 100.0] {
        for t in [0.0, 1.0, y / 4.0] {
            let s = Complex64::new(1.0, t);
            let phi = compact_mellin(y, s, 1e-13)?;
            let gap = (phi - 1.0 / s).norm();
            // recorded as |Phi - 1/s| against 0 with budget 2/Y
            row(&mut csv, "compact-pole", y, t, gap, 0.0, 2.0 / y);
        }
    }
    let mut checks = Vec::new();
    let mut results = Map::new();
    for (id, (worst, tol)) in maxima {
        results.insert(format!("{id}MaxResidual"), json!(worst));
        checks.push(Check::new(format!("{id} identity"), worst <= tol, worst, format!("<= {tol:e}")));
    }
    report(csv, results, checks)
}

// ---------------------------------------------------------------------- fit

fn parse_model(s: &str) -> Res<Vec<BasisTerm>> {
    s.split(',')
        .map(|t| {
            let (a, b) = t
                .trim()
                .split_once(':')
                .ok_or_else(|| config_err(format!("basis terms look like exponent:logPower, got `{t}`")))?;
            let a: f64 = a.trim().parse().map_err(|_| config_err(format!("bad exponent `{a}`")))?;
            let b: u32 = b.trim().parse().map_err(|_| config_err(format!("bad log power `{b}`")))?;
            Ok(BasisTerm::new(a, b))
        })
        .collect()
}

fn read_series(path: &str) -> Res<CountSeries> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| config_err(format!("{path}: {e}")))?;
        let num = |i: usize| -> Res<f64> {
            rec.get(i)
                .ok_or_else(|| config_err(format!("{path}: rows need at least two columns")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("{path}: non-numeric entry in row {:?}", rec)))
        };
        grid.push(num(0)?);
        values.push(num(1)?);
    }
    Ok(CountSeries::real(grid, values, CountKind::Imported, path)?)
}

fn fit(p: &Params) -> Res<Report> {
    let input = p.raw("input").ok_or_else(|| config_err("fit needs --input CSV"))?;
    let model = parse_model(p.raw("model").unwrap_or("0.5:1,0.5:0"))?;
    let seed: u64 = p.get("seed", VerdictConfig::default().seed)?;
    let series = read_series(input)?;
    let f = fit_model(&series, &model)?;
    let mut csv = CsvTable::new(&["term", "exponent", "logPower", "coefficient"]);
    for (t, c) in f.model.iter().zip(&f.coefficients) {
        csv.push(vec![t.to_string(), fmt_f(t.exponent), t.log_power.to_string(), fmt_f(*c)]);
    }
    let mut results = obj(json!({ "fit": fit_json(&f), "points": series.grid.len() }));
    if let Some(w) = p.raw("without") {
        let without = parse_model(w)?;
        let cfg = VerdictConfig { seed, ..VerdictConfig::default() };
        let v = log_term_verdict(&series, &model, &without, &cfg)?;
        results.insert("logTermVerdict".into(), verdict_json(&v));
    }
    if let Ok(e) = estimate_exponent(&series) {
        results.insert("exponent".into(), json!(e));
    }
    report(csv, results, Vec::new())
}
