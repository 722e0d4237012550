//! EMD and EEMD, for comparison against the VMD pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hht::instantaneous_attributes;
use crate::parallel::ordered_map;
use crate::signal::{mean_square, white_noise, SampledSignal, ToneSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Sifting stops once `Σ(h_prev − h)² / Σ h_prev²` falls below this.
    pub sift_sd_threshold: f64,
    pub max_sifts_per_imf: usize,
    pub ensemble_size: usize,
    /// EEMD noise standard deviation as a fraction of the signal's.
    pub noise_std_fraction: f64,
    pub seed: u64,
    /// Worker threads for EEMD trials.
    #[serde(skip_serializing, default = "crate::parallel::serial")]
    pub threads: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imfs: 10,
            sift_sd_threshold: 0.3,
            max_sifts_per_imf: 50,
            ensemble_size: 100,
            noise_std_fraction: 0.2,
            seed: 0,
            threads: 1,
        }
    }
}

impl EmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_imfs == 0 || self.max_sifts_per_imf == 0 || self.ensemble_size == 0 {
            return Err(Error::InvalidParameter(
                "max_imfs, max_sifts_per_imf and ensemble_size must be at least 1".into(),
            ));
        }
        if !(self.sift_sd_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sift threshold must be positive, got {}",
                self.sift_sd_threshold
            )));
        }
        if !(self.noise_std_fraction >= 0.0 && self.noise_std_fraction.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction must be non-negative, got {}",
                self.noise_std_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmdResult {
    /// Highest frequency first.
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

/// Indices of local maxima and minima. Plateaus count once, at their first sample.
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        if x[i] > x[i - 1] && x[i] > x[j + 1] {
            maxima.push(i);
        } else if x[i] < x[i - 1] && x[i] < x[j + 1] {
            minima.push(i);
        }
        i = j + 1;
    }
    (maxima, minima)
}

pub fn zero_crossings(x: &[f64]) -> usize {
    x.windows(2).filter(|w| (w[0] < 0.0 && w[1] >= 0.0) || (w[0] >= 0.0 && w[1] < 0.0)).count()
}

/// Whether extrema and zero-crossing counts differ by at most one over
/// `x[trim .. n - trim]`.
pub fn is_imf(x: &[f64], trim: usize) -> bool {
    if x.len() <= 2 * trim + 2 {
        return false;
    }
    let core = &x[trim..x.len() - trim];
    let (mx, mn) = extrema(core);
    (mx.len() + mn.len()).abs_diff(zero_crossings(core)) <= 1
}

/// Natural cubic spline through `(xs, ys)`, evaluated at `0..n`.
/// `xs` must be strictly increasing with at least two points.
pub fn natural_cubic_spline(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    let m = xs.len();
    debug_assert!(m >= 2 && ys.len() == m);
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives; natural ends, Thomas algorithm on the interior.
    let mut second = vec![0.0; m];
    if m > 2 {
        let k = m - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        second[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            second[i + 1] = (rhs[i] - h[i + 1] * second[i + 2]) / diag[i];
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for t in 0..n {
        let t = t as f64;
        while seg + 2 < m && t > xs[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let hh = x1 - x0;
        let a = (x1 - t) / hh;
        let b = (t - x0) / hh;
        out.push(
            a * ys[seg]
                + b * ys[seg + 1]
                + ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * hh * hh / 6.0,
        );
    }
    out
}

/// Envelope through the given extrema, with the two nearest each end
/// reflected about the end samples.
fn envelope(x: &[f64], idx: &[usize]) -> Vec<f64> {
    let n = x.len();
    let last = (n - 1) as f64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 4);
    for &i in idx.iter().take(2).rev() {
        pts.push((-(i as f64), x[i]));
    }
    pts.extend(idx.iter().map(|&i| (i as f64, x[i])));
    for &i in idx.iter().rev().take(2) {
        pts.push((2.0 * last - i as f64, x[i]));
    }
    pts.dedup_by(|b, a| b.0 <= a.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    natural_cubic_spline(&xs, &ys, n)
}

/// One sifting pass; `None` when `h` lacks extrema for envelopes.
fn sift_once(h: &[f64]) -> Option<Vec<f64>> {
    let (maxima, minima) = extrema(h);
    if maxima.is_empty() || minima.is_empty() || maxima.len() + minima.len() < 2 {
        return None;
    }
    let upper = envelope(h, &maxima);
    let lower = envelope(h, &minima);
    Some(h.iter().zip(upper.iter().zip(&lower)).map(|(v, (u, l))| v - 0.5 * (u + l)).collect())
}

fn emd_samples(x: &[f64], cfg: &EmdConfig) -> EmdResult {
    let mut residual = x.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.max_imfs {
        let (mx, mn) = extrema(&residual);
        if mx.len() + mn.len() < 2 || mx.is_empty() || mn.is_empty() {
            break;
        }
        let mut h = residual.clone();
        for _ in 0..cfg.max_sifts_per_imf {
            let Some(next) = sift_once(&h) else { break };
            let num: f64 = h.iter().zip(&next).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = h.iter().map(|a| a * a).sum();
            h = next;
            if den == 0.0 || num / den < cfg.sift_sd_threshold {
                break;
            }
        }
        for (r, v) in residual.iter_mut().zip(&h) {
            *r -= v;
        }
        imfs.push(h);
    }
    EmdResult { imfs, residual }
}

fn check_input(signal: &SampledSignal) -> Result<()> {
    if signal.len() < 16 {
        return Err(Error::InvalidSignal(format!("EMD needs at least 16 samples, got {}", signal.len())));
    }
    Ok(())
}

/// Empirical mode decomposition by cubic-spline sifting.
pub fn emd(signal: &SampledSignal, cfg: &EmdConfig) -> Result<EmdResult> {
    cfg.validate()?;
    check_input(signal)?;
    Ok(emd_samples(signal.samples(), cfg))
}

/// Ensemble EMD: the mean over `ensemble_size` noisy trials, trial `i`
/// seeded with `seed + i`. Shorter IMF lists are padded with zeros.
pub fn eemd(signal: &SampledSignal, cfg: &EmdConfig) -> Result<EmdResult> {
    cfg.validate()?;
    check_input(signal)?;
    let x = signal.samples();
    let n = x.len();
    let std = mean_square(&centered(x)).sqrt() * cfg.noise_std_fraction;
    let trials: Vec<u64> = (0..cfg.ensemble_size as u64).collect();
    let runs = ordered_map(&trials, cfg.threads, |&i| {
        let noise = white_noise(n, std, cfg.seed.wrapping_add(i));
        let noisy: Vec<f64> = x.iter().zip(&noise).map(|(a, b)| a + b).collect();
        emd_samples(&noisy, cfg)
    });
    let count = runs.iter().map(|r| r.imfs.len()).max().unwrap_or(0);
    let mut imfs = vec![vec![0.0; n]; count];
    let mut residual = vec![0.0; n];
    for run in &runs {
        for (acc, imf) in imfs.iter_mut().zip(&run.imfs) {
            for (a, v) in acc.iter_mut().zip(imf) {
                *a += v;
            }
        }
        for (a, v) in residual.iter_mut().zip(&run.residual) {
            *a += v;
        }
    }
    let scale = cfg.ensemble_size as f64;
    for v in imfs.iter_mut().flatten().chain(residual.iter_mut()) {
        *v /= scale;
    }
    Ok(EmdResult { imfs, residual })
}

fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Pearson correlation; 0 when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (centered(a), centered(b));
    let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 { 0.0 } else { ab / (aa * bb).sqrt() }
}

/// Correlation at which a component counts as recovering a tone.
pub const MATCH_CORRELATION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneComparison {
    pub true_amplitude_v: f64,
    pub true_frequency_hz: f64,
    pub best_component: Option<usize>,
    pub correlation: f64,
    pub amplitude_rel_error: f64,
    pub frequency_rel_error: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodComparison {
    pub method: String,
    pub n_components: usize,
    pub tones: Vec<ToneComparison>,
    pub matched_tones: usize,
    /// Components matching no tone at [`MATCH_CORRELATION`].
    pub spurious: usize,
}

/// Scores each method's components against the known tones.
pub fn compare_methods(
    signal: &SampledSignal,
    ground_truth: &[ToneSpec],
    methods: &[(String, Vec<Vec<f64>>)],
) -> Result<Vec<MethodComparison>> {
    let fs = signal.sample_rate_hz();
    let n = signal.len();
    let truths: Vec<Vec<f64>> = ground_truth
        .iter()
        .map(|t| (0..n).map(|i| t.value_at(signal.time_of(i))).collect())
        .collect();
    let mut out = Vec::with_capacity(methods.len());
    for (name, comps) in methods {
        if let Some(c) = comps.iter().find(|c| c.len() != n) {
            return Err(Error::InvalidSignal(format!(
                "{name}: component length {} differs from signal length {n}",
                c.len()
            )));
        }
        let corr: Vec<Vec<f64>> = comps
            .iter()
            .map(|c| truths.iter().map(|t| correlation(c, t)).collect())
            .collect();
        let mut tones = Vec::with_capacity(ground_truth.len());
        for (j, tone) in ground_truth.iter().enumerate() {
            let best = (0..comps.len()).max_by(|&a, &b| corr[a][j].total_cmp(&corr[b][j]));
            let tc = match best {
                Some(b) => {
                    let active: Vec<usize> = (0..n).filter(|&i| tone.is_active(signal.time_of(i))).collect();
                    let (amp, freq) = component_estimates(&comps[b], &active, fs)?;
                    ToneComparison {
                        true_amplitude_v: tone.amplitude,
                        true_frequency_hz: tone.frequency_hz,
                        best_component: Some(b),
                        correlation: corr[b][j],
                        amplitude_rel_error: (amp - tone.amplitude).abs() / tone.amplitude.abs(),
                        frequency_rel_error: (freq - tone.frequency_hz).abs() / tone.frequency_hz.abs(),
                        matched: corr[b][j] >= MATCH_CORRELATION,
                    }
                }
                None => ToneComparison {
                    true_amplitude_v: tone.amplitude,
                    true_frequency_hz: tone.frequency_hz,
                    best_component: None,
                    correlation: 0.0,
                    amplitude_rel_error: f64::INFINITY,
                    frequency_rel_error: f64::INFINITY,
                    matched: false,
                },
            };
            tones.push(tc);
        }
        let spurious = corr
            .iter()
            .filter(|row| row.iter().all(|&c| c < MATCH_CORRELATION))
            .count();
        out.push(MethodComparison {
            method: name.clone(),
            n_components: comps.len(),
            matched_tones: tones.iter().filter(|t| t.matched).count(),
            tones,
            spurious,
        });
    }
    Ok(out)
}

/// RMS-derived amplitude and mean instantaneous frequency over the active
/// samples that lie inside the Hilbert valid range.
fn component_estimates(component: &[f64], active: &[usize], fs: f64) -> Result<(f64, f64)> {
    if active.is_empty() {
        return Ok((0.0, 0.0));
    }
    let series = instantaneous_attributes(component, fs)?;
    let inside: Vec<usize> = active
        .iter()
        .copied()
        .filter(|i| series.valid_range.contains(i))
        .collect();
    let window = if inside.is_empty() { active } else { &inside[..] };
    let ms = window.iter().map(|&i| component[i] * component[i]).sum::<f64>() / window.len() as f64;
    let freq = window.iter().map(|&i| series.frequency_hz[i]).sum::<f64>() / window.len() as f64;
    Ok(((2.0 * ms).sqrt(), freq))
}
