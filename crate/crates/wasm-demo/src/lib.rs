//! wasm-bindgen wrappers behind `www/index.html`. Each export is a thin shim
//! over a plain Rust function so the logic also runs (and is tested) natively.

use gv_core::arith::r_d_table;
use gv_core::kernels::KernelKind;
use gv_core::lattice::{hardy_identity, BallCounts, Hyperboloid};
use wasm_bindgen::prelude::*;

// Keeps a page from freezing the tab.
const MAX_POINTS: usize = 4096;
const MAX_TERMS: u64 = 200_000;
const MAX_RADIUS: f64 = 1.0e5;

/// Weights of `kind` at n = 1..=n_max, flattened as [n, w(n), ...].
pub fn weights(kind: &str, x: f64, n_max: usize) -> Result<Vec<f64>, String> {
    let kind: KernelKind = kind.parse().map_err(|e: gv_core::Error| e.to_string())?;
    if !(x > 0.0 && x.is_finite()) {
        return Err("X must be positive".into());
    }
    let n_max = n_max.clamp(1, MAX_POINTS);
    Ok((1..=n_max).flat_map(|n| [n as f64, kind.weight(n as f64, x)]).collect())
}

/// Truncated Hardy series and the exact circle discrepancy at `points`
/// radii evenly spaced in [r_lo, r_hi], flattened as [R, series, P(R), ...].
/// Integer radii are nudged off the jump.
pub fn hardy(r_lo: f64, r_hi: f64, points: usize, terms: u64) -> Result<Vec<f64>, String> {
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi <= MAX_RADIUS) {
        return Err(format!("need 0 < R_lo < R_hi <= {MAX_RADIUS}"));
    }
    let points = points.clamp(2, 400);
    let terms = terms.clamp(1, MAX_TERMS);
    let r2 = r_d_table(2, (terms as usize).max(r_hi as usize + 1)).map_err(|e| e.to_string())?;
    let circle = BallCounts::from_table(2, &r2).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let mut r = r_lo + (r_hi - r_lo) * i as f64 / (points - 1) as f64;
        if r.fract() == 0.0 {
            r += 1e-6;
        }
        let s = hardy_identity(&r2, r, terms).map_err(|e| e.to_string())?;
        let p = circle.discrepancy(r).map_err(|e| e.to_string())?;
        out.extend([r, s, p]);
    }
    Ok(out)
}

/// Integer points on x_1^2 + ... + x_{d-1}^2 = z^2 + h of squared norm at
/// most R, for R = 1..=r_max, flattened as [R, count, ...].
pub fn hyperboloid(d: u32, h: u32, r_max: u32) -> Result<Vec<f64>, String> {
    let r_max = r_max.clamp(1, 2000);
    let hyp = Hyperboloid::new(d, h as u64, r_max as f64).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * r_max as usize);
    for r in 1..=r_max {
        let c = hyp.count(r as f64).map_err(|e| e.to_string())?;
        out.extend([r as f64, c as f64]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = kernelWeights)]
pub fn kernel_weights(kind: &str, x: f64, n_max: usize) -> Result<Vec<f64>, JsError> {
    weights(kind, x, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = hardySeries)]
pub fn hardy_series(r_lo: f64, r_hi: f64, points: usize, terms: u32) -> Result<Vec<f64>, JsError> {
    hardy(r_lo, r_hi, points, terms as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = hyperboloidCounts)]
pub fn hyperboloid_counts(d: u32, h: u32, r_max: u32) -> Result<Vec<f64>, JsError> {
    hyperboloid(d, h, r_max).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_rows() {
        let w = weights("exp", 10.0, 3).unwrap();
        assert_eq!(w.len(), 6);
        assert!((w[1] - (-0.1f64).exp()).abs() < 1e-15);
        assert!(weights("cesaro:0", 10.0, 3).is_err());
        assert!(weights("nope", 10.0, 3).is_err());
    }

    #[test]
    fn hardy_tracks_discrepancy() {
        let rows = hardy(20.3, 30.3, 5, 100_000).unwrap();
        for c in rows.chunks(3) {
            assert!((c[1] - c[2]).abs() < 0.3, "{c:?}");
        }
    }

    #[test]
    fn hyperboloid_small() {
        // d = 3, h = 1, R = 1: only z = 0, giving the 4 unit vectors.
        let rows = hyperboloid(3, 1, 3).unwrap();
        assert_eq!(&rows[..2], &[1.0, 4.0]);
        assert!(rows.chunks(2).zip(rows.chunks(2).skip(1)).all(|(a, b)| a[1] <= b[1]));
    }
}
