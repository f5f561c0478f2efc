//! Grid syntax: `2^a..2^b` (doubling), `a:b:s` (arithmetic, inclusive),
//! or a comma-separated list.

const MAX_POINTS: usize = 1_000_000;

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let points = if let Some((lo, hi)) = spec.split_once("..") {
        let exp = |s: &str| -> Result<i32, String> {
            s.trim()
                .strip_prefix("2^")
                .ok_or_else(|| format!("geometric grid bounds must look like 2^a, got `{s}`"))?
                .parse::<i32>()
                .map_err(|_| format!("bad exponent in `{s}`"))
        };
        let (a, b) = (exp(lo)?, exp(hi)?);
        if a > b || !(-60..=62).contains(&a) || !(-60..=62).contains(&b) {
            return Err(format!("geometric grid 2^{a}..2^{b} is empty or out of range"));
        }
        (a..=b).map(|e| 2f64.powi(e)).collect()
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("arithmetic grid must be a:b:s, got `{spec}`"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in grid"));
        let (a, b, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(s > 0.0) || !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(format!("arithmetic grid `{spec}` needs a <= b and s > 0"));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        if count > MAX_POINTS {
            return Err(format!("grid `{spec}` has more than {MAX_POINTS} points"));
        }
        (0..count).map(|i| a + i as f64 * s).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad grid value `{s}`")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if points.is_empty() {
        return Err("grid is empty".into());
    }
    if points.iter().any(|&x: &f64| !(x > 0.0) || !x.is_finite()) {
        return Err(format!("grid `{spec}` must contain positive values only"));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("grid `{spec}` must be strictly ascending"));
    }
    Ok(points)
}
