//! Box-counting fractal dimension of a sampled waveform's graph.
//!
//! The series is read in the unit square (sample `i` at `x = i/n`,
//! amplitude min-max scaled to `[0, 1]`). At box size `ε` the square is cut
//! into columns of width `ε`; each column needs `⌈(max − min)/ε⌉` boxes (at
//! least one) to cover the curve's vertical extent over the samples it spans,
//! boundary samples included. The dimension is the least-squares slope of
//! `ln N(ε)` against `ln(1/ε)` over `ε = 2^-j`, `j = 2..=j_max`, `2^j_max ≤ n/4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum series length: gives the three ladder points `ε = 1/4, 1/8, 1/16`.
pub const MIN_LEN: usize = 64;

/// Soft plausibility band for graphs of bounded sampled functions.
pub const SANITY_BAND: (f64, f64) = (0.9, 2.1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountCurve {
    /// Box edges, decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbdEstimate {
    pub dimension: f64,
    pub fit_r2: f64,
    pub curve: BoxCountCurve,
    /// Constant input; `dimension` is set to 1 by convention.
    pub degenerate: bool,
}

impl FbdEstimate {
    pub fn in_sanity_band(&self) -> bool {
        (SANITY_BAND.0..=SANITY_BAND.1).contains(&self.dimension)
    }
}

/// Min-max scales `x` into `[0, 1]`. `None` for a constant series.
pub fn normalize_unit(x: &[f64]) -> Option<Vec<f64>> {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return None;
    }
    Some(x.iter().map(|v| (v - lo) / range).collect())
}

/// Number of `eps`-boxes covering the graph of `y`, which must already lie in
/// the unit square.
pub fn box_count(y: &[f64], eps: f64) -> Result<u64> {
    count_boxes(y, eps, 1.0)
}

/// Box count of `x` as if min-max scaled by `range`. Column extents are
/// taken on the raw values so that `a·x + b` yields identical counts
/// whenever its extents are exact multiples of `|a|`.
fn count_boxes(x: &[f64], eps: f64, range: f64) -> Result<u64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("box size must be in (0, 1], got {eps}")));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidSignal("box counting needs at least 2 samples".into()));
    }
    let spacing = 1.0 / n as f64;
    if eps < spacing {
        return Err(Error::ScaleTooFine { eps, spacing });
    }
    let columns = (1.0 / eps).ceil() as usize;
    let width = eps * n as f64;
    let box_height = eps * range;
    let mut total = 0u64;
    for c in 0..columns {
        let start = ((c as f64 * width).floor() as usize).min(n - 1);
        let end = (((c + 1) as f64 * width).ceil() as usize).min(n - 1);
        let (lo, hi) = x[start..=end]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let boxes = ((hi - lo) / box_height - 1e-9).ceil().max(1.0);
        total += boxes as u64;
    }
    Ok(total)
}

/// Dyadic ladder exponents `j` for a series of length `n`.
pub fn ladder(n: usize) -> Vec<u32> {
    (2..).take_while(|&j| (1usize << j) <= n / 4).collect()
}

/// Box-counting dimension with fit diagnostics.
pub fn fractal_box_dimension(x: &[f64]) -> Result<FbdEstimate> {
    if x.len() < MIN_LEN {
        return Err(Error::InvalidSignal(format!(
            "box dimension needs at least {MIN_LEN} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSignal("non-finite sample".into()));
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let degenerate = !(range > 0.0);

    let mut scales = Vec::new();
    let mut counts = Vec::new();
    for j in ladder(x.len()) {
        let eps = 1.0 / (1u64 << j) as f64;
        scales.push(eps);
        counts.push(count_boxes(x, eps, if degenerate { 1.0 } else { range })?);
    }
    let curve = BoxCountCurve { scales, counts };
    if degenerate {
        return Ok(FbdEstimate {
            dimension: 1.0,
            fit_r2: 1.0,
            curve,
            degenerate,
        });
    }

    let xs: Vec<f64> = curve.scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = curve.counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, r2) = least_squares(&xs, &ys);
    Ok(FbdEstimate {
        dimension: slope,
        fit_r2: r2,
        curve,
        degenerate,
    })
}

/// Slope and coefficient of determination of an ordinary least-squares line.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_counts() {
        let y = vec![0.5; 256];
        for m in [4u64, 8, 16, 64] {
            assert_eq!(box_count(&y, 1.0 / m as f64).unwrap(), m);
        }
    }

    #[test]
    fn ramp_counts_between_m_and_2m() {
        let n = 1024;
        let y: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        for m in [4u64, 16, 64, 256] {
            let c = box_count(&y, 1.0 / m as f64).unwrap();
            assert!(c >= m && c <= 2 * m, "m={m} c={c}");
        }
    }

    #[test]
    fn box_count_errors() {
        let y = vec![0.0; 64];
        assert!(matches!(box_count(&y, 1.0 / 128.0), Err(Error::ScaleTooFine { .. })));
        assert!(box_count(&y, 0.0).is_err());
        assert!(box_count(&y, 1.5).is_err());
    }

    #[test]
    fn ladder_bounds() {
        assert_eq!(ladder(64), vec![2, 3, 4]);
        assert_eq!(ladder(4096), (2..=10).collect::<Vec<_>>());
        assert_eq!(ladder(100), vec![2, 3, 4]);
    }

    #[test]
    fn constant_is_degenerate() {
        let est = fractal_box_dimension(&[3.0; 128]).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.dimension, 1.0);
    }

    #[test]
    fn short_input_rejected() {
        assert!(fractal_box_dimension(&[1.0; 63]).is_err());
    }

    #[test]
    fn ramp_dimension_is_one() {
        let x: Vec<f64> = (0..4096).map(|i| i as f64).collect();
        let est = fractal_box_dimension(&x).unwrap();
        assert!((est.dimension - 1.0).abs() < 0.05, "{}", est.dimension);
        assert!(est.fit_r2 > 0.99);
    }

    #[test]
    fn counts_increase_as_boxes_shrink() {
        let x: Vec<f64> = (0..1024).map(|i| ((i * i) % 97) as f64).collect();
        let est = fractal_box_dimension(&x).unwrap();
        assert!(est.curve.counts.windows(2).all(|w| w[1] > w[0]));
        assert!(est.curve.scales.windows(2).all(|w| w[1] < w[0]));
    }
}
