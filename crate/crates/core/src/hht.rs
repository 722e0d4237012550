//! Hilbert attributes of modes and the end-to-end detection pipeline.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbd::normalize_unit;
use crate::kselect::{self, mode_energy_fractions, prune_residual_modes, KSelectConfig, KSelectionTrace, PruneConfig};
use crate::parallel::ordered_map;
use crate::signal::{mean_square, SampledSignal, ToneSpec};
use crate::spectral::analytic_signal;
use crate::vmd::{VmdDecomposition, VmdParams};

pub const DEFAULT_EDGE_TRIM: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantaneousSeries {
    pub amplitude: Vec<f64>,
    pub frequency_hz: Vec<f64>,
    /// Samples not affected by end effects.
    pub valid_range: Range<usize>,
    /// The mode was identically zero; frequency is reported as 0.
    pub degenerate: bool,
}

impl InstantaneousSeries {
    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }
}

/// Envelope and instantaneous frequency of `mode`, trimming `edge_trim` of
/// the samples at each end from the valid range.
pub fn instantaneous_attributes_trimmed(mode: &[f64], fs: f64, edge_trim: f64) -> Result<InstantaneousSeries> {
    let n = mode.len();
    if n < 8 {
        return Err(Error::InvalidSignal(format!("instantaneous attributes need at least 8 samples, got {n}")));
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
    }
    if !(0.0..0.5).contains(&edge_trim) {
        return Err(Error::InvalidParameter(format!("edge trim must be in [0, 0.5), got {edge_trim}")));
    }
    let valid_range = kselect::trimmed_range(n, edge_trim);
    if mode.iter().all(|&v| v == 0.0) {
        return Ok(InstantaneousSeries {
            amplitude: vec![0.0; n],
            frequency_hz: vec![0.0; n],
            valid_range,
            degenerate: true,
        });
    }
    let z = analytic_signal(mode)?;
    let amplitude: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    // Successive wrapped phase increments; summing them unwraps the phase.
    let dphi: Vec<f64> = z.windows(2).map(|w| (w[1] * w[0].conj()).arg()).collect();
    let mut frequency_hz = Vec::with_capacity(n);
    frequency_hz.push(dphi[0] * fs / (2.0 * PI));
    for i in 1..n - 1 {
        frequency_hz.push((dphi[i - 1] + dphi[i]) * fs / (4.0 * PI));
    }
    frequency_hz.push(dphi[n - 2] * fs / (2.0 * PI));
    Ok(InstantaneousSeries {
        amplitude,
        frequency_hz,
        valid_range,
        degenerate: false,
    })
}

/// [`instantaneous_attributes_trimmed`] with the default 5% edge trim.
pub fn instantaneous_attributes(mode: &[f64], fs: f64) -> Result<InstantaneousSeries> {
    instantaneous_attributes_trimmed(mode, fs, DEFAULT_EDGE_TRIM)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportConfig {
    /// Fraction of the reference amplitude a sample must exceed.
    pub threshold_fraction: f64,
    /// Percentile of the valid-range amplitude used as reference.
    pub reference_percentile: f64,
    /// Gaps shorter than this are closed, and isolated runs shorter than
    /// this are discarded.
    pub min_gap_s: f64,
}

impl Default for SupportConfig {
    fn default() -> Self {
        Self {
            threshold_fraction: 0.25,
            reference_percentile: 95.0,
            min_gap_s: 0.04,
        }
    }
}

/// Interval where a component is active, in samples and in seconds from the
/// first sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSupport {
    pub start: usize,
    pub end: usize,
    pub start_s: f64,
    pub end_s: f64,
    /// Nothing exceeded the threshold; the interval is empty.
    pub degenerate: bool,
}

impl TimeSupport {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Linear-interpolation percentile, `p` in `[0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (p / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Active interval of a component from its envelope. A support that reaches
/// the edge of the valid range is extended to the end of the signal, since
/// the trimmed samples carry no evidence either way.
pub fn time_support(series: &InstantaneousSeries, fs: f64, cfg: &SupportConfig) -> TimeSupport {
    let n = series.len();
    let valid = series.valid_range.clone();
    let degenerate = TimeSupport {
        start: valid.start,
        end: valid.start,
        start_s: valid.start as f64 / fs,
        end_s: valid.start as f64 / fs,
        degenerate: true,
    };
    if series.degenerate || valid.is_empty() {
        return degenerate;
    }
    let amp = &series.amplitude[valid.clone()];
    let threshold = cfg.threshold_fraction * percentile(amp, cfg.reference_percentile);
    if !(threshold > 0.0) {
        return degenerate;
    }

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &a) in amp.iter().enumerate() {
        match (a > threshold, open) {
            (true, None) => open = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        runs.push((s, amp.len()));
    }
    if runs.is_empty() {
        return degenerate;
    }

    let min_len = (cfg.min_gap_s * fs).round() as usize;
    let mut closed: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for r in runs {
        match closed.last_mut() {
            Some(last) if r.0 - last.1 < min_len => last.1 = r.1,
            _ => closed.push(r),
        }
    }
    let long: Vec<&(usize, usize)> = closed.iter().filter(|r| r.1 - r.0 >= min_len).collect();
    let (mut start, mut end) = if long.is_empty() {
        (closed[0].0, closed[closed.len() - 1].1)
    } else {
        (long[0].0, long[long.len() - 1].1)
    };
    start += valid.start;
    end += valid.start;
    if start == valid.start {
        start = 0;
    }
    if end == valid.end {
        end = n;
    }
    TimeSupport {
        start,
        end,
        start_s: start as f64 / fs,
        end_s: end as f64 / fs,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Classification {
    Fundamental,
    Harmonic { order: u32 },
    Interharmonic,
}

/// Fundamental, harmonic of order `round(f/f0)`, or interharmonic.
pub fn classify_component(mean_frequency_hz: f64, fundamental_hz: f64, tolerance_hz: f64) -> Classification {
    let n = (mean_frequency_hz / fundamental_hz).round();
    if n < 1.0 || (mean_frequency_hz - n * fundamental_hz).abs() > tolerance_hz {
        return Classification::Interharmonic;
    }
    if n == 1.0 {
        Classification::Fundamental
    } else {
        Classification::Harmonic { order: n as u32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub mean_amplitude_v: f64,
    pub mean_frequency_hz: f64,
    /// Absolute signal time, seconds.
    pub support_s: (f64, f64),
    pub classification: Classification,
    pub source_mode_index: usize,
    /// Weak neighbouring modes folded into this one.
    pub merged_mode_indices: Vec<usize>,
    /// Fraction of input energy, over the interior window.
    pub energy_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneMatch {
    pub true_amplitude_v: f64,
    pub true_frequency_hz: f64,
    /// Index into `components` of the closest component in frequency.
    pub component_index: Option<usize>,
    pub amplitude_rel_error: f64,
    pub frequency_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Ascending mean frequency.
    pub components: Vec<ComponentSummary>,
    /// 0 when no selection ran.
    pub chosen_k: usize,
    pub selection_trace: Option<KSelectionTrace>,
    pub center_freqs_hz: Vec<f64>,
    pub converged: bool,
    /// The input was constant or no component survived.
    pub degenerate: bool,
    pub ground_truth: Option<Vec<ToneMatch>>,
    /// Instantaneous series of each component, parallel to `components`.
    #[serde(skip)]
    pub series: Vec<InstantaneousSeries>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Pruning while scoring each K.
    pub score_prune: PruneConfig,
    /// Pruning of the final decomposition, before attribute extraction.
    pub detect_prune: PruneConfig,
    pub plateau_epsilon: f64,
    pub persistence: usize,
    pub edge_trim: f64,
    pub support: SupportConfig,
    pub fundamental_hz: f64,
    pub harmonic_tolerance_hz: f64,
    /// A retained mode within this distance of a neighbour...
    pub merge_max_separation_hz: f64,
    /// ...and weaker than this fraction of it is folded into the neighbour.
    /// 0 disables merging.
    pub merge_max_energy_ratio: f64,
    #[serde(skip_serializing, default = "crate::parallel::serial")]
    pub threads: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        let k = KSelectConfig::default();
        Self {
            k_min: k.k_min,
            k_max: k.k_max,
            score_prune: k.prune,
            detect_prune: PruneConfig {
                edge_trim_fraction: DEFAULT_EDGE_TRIM,
                ..PruneConfig::default()
            },
            plateau_epsilon: k.plateau_epsilon,
            persistence: k.persistence,
            edge_trim: DEFAULT_EDGE_TRIM,
            support: SupportConfig::default(),
            fundamental_hz: 50.0,
            harmonic_tolerance_hz: 2.5,
            merge_max_separation_hz: 12.5,
            merge_max_energy_ratio: 0.1,
            threads: 1,
        }
    }
}

impl DetectConfig {
    pub fn with_range(mut self, k_min: usize, k_max: usize) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn kselect(&self) -> KSelectConfig {
        KSelectConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            prune: self.score_prune,
            plateau_epsilon: self.plateau_epsilon,
            persistence: self.persistence,
            threads: self.threads,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kselect().validate()?;
        self.detect_prune.validate()?;
        if !(self.fundamental_hz > 0.0 && self.fundamental_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fundamental must be positive, got {}",
                self.fundamental_hz
            )));
        }
        if !(self.harmonic_tolerance_hz >= 0.0) || !(self.merge_max_separation_hz >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.merge_max_energy_ratio) {
            return Err(Error::InvalidParameter(format!(
                "merge energy ratio must be in [0, 1), got {}",
                self.merge_max_energy_ratio
            )));
        }
        if !(self.support.threshold_fraction > 0.0 && self.support.threshold_fraction < 1.0)
            || !(0.0..=100.0).contains(&self.support.reference_percentile)
            || !(self.support.min_gap_s >= 0.0)
        {
            return Err(Error::InvalidParameter("invalid time-support settings".into()));
        }
        Ok(())
    }
}

/// Groups retained modes: each weak mode joins its strongest close neighbour.
/// Returns `(host, members)` pairs in ascending host order.
fn merge_groups(retained: &[usize], centers: &[f64], energies: &[f64], cfg: &DetectConfig) -> Vec<(usize, Vec<usize>)> {
    let mut parent: Vec<Option<usize>> = vec![None; centers.len()];
    if cfg.merge_max_energy_ratio > 0.0 {
        for (pos, &i) in retained.iter().enumerate() {
            let neighbours = [pos.checked_sub(1), Some(pos + 1)];
            let host = neighbours
                .iter()
                .flatten()
                .filter_map(|&p| retained.get(p).copied())
                .filter(|&j| {
                    (centers[i] - centers[j]).abs() <= cfg.merge_max_separation_hz
                        && energies[i] < cfg.merge_max_energy_ratio * energies[j]
                })
                .max_by(|&a, &b| energies[a].total_cmp(&energies[b]));
            parent[i] = host;
        }
    }
    let root = |mut i: usize| {
        while let Some(p) = parent[i] {
            i = p;
        }
        i
    };
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &i in retained {
        let r = root(i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups.sort_by_key(|g| g.0);
    groups
}

fn summarize(
    mode: &[f64],
    host: usize,
    members: &[usize],
    energy_fraction: f64,
    signal: &SampledSignal,
    cfg: &DetectConfig,
) -> Result<Option<(ComponentSummary, InstantaneousSeries)>> {
    let fs = signal.sample_rate_hz();
    let series = instantaneous_attributes_trimmed(mode, fs, cfg.edge_trim)?;
    let support = time_support(&series, fs, &cfg.support);
    if support.degenerate {
        log::warn!("mode {host} has no time support; dropped");
        return Ok(None);
    }
    let window = support.start.max(series.valid_range.start)..support.end.min(series.valid_range.end);
    if window.is_empty() {
        log::warn!("mode {host} is active only inside the trimmed edges; dropped");
        return Ok(None);
    }
    let len = window.len() as f64;
    let mean_amplitude_v = series.amplitude[window.clone()].iter().sum::<f64>() / len;
    let mean_frequency_hz = (series.frequency_hz[window].iter().sum::<f64>() / len).clamp(0.0, fs / 2.0);
    let summary = ComponentSummary {
        mean_amplitude_v,
        mean_frequency_hz,
        support_s: (signal.t0_s() + support.start_s, signal.t0_s() + support.end_s),
        classification: classify_component(mean_frequency_hz, cfg.fundamental_hz, cfg.harmonic_tolerance_hz),
        source_mode_index: host,
        merged_mode_indices: members.iter().copied().filter(|&m| m != host).collect(),
        energy_fraction,
    };
    Ok(Some((summary, series)))
}

/// Attribute extraction for an existing decomposition.
pub fn analyze_decomposition(
    decomp: &VmdDecomposition,
    signal: &SampledSignal,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    cfg.validate()?;
    let retained = prune_residual_modes(decomp, &cfg.detect_prune);
    let energies = mode_energy_fractions(decomp, &cfg.detect_prune);
    let groups = merge_groups(&retained, &decomp.center_freqs_hz, &energies, cfg);

    let results = ordered_map(&groups, cfg.threads, |(host, members)| {
        let mut mode = decomp.modes[*host].clone();
        for &m in members.iter().filter(|&&m| m != *host) {
            for (a, b) in mode.iter_mut().zip(&decomp.modes[m]) {
                *a += b;
            }
        }
        let energy: f64 = members.iter().map(|&m| energies[m]).sum();
        summarize(&mode, *host, members, energy, signal, cfg)
    });
    let mut pairs = Vec::with_capacity(results.len());
    for r in results {
        if let Some(p) = r? {
            pairs.push(p);
        }
    }
    pairs.sort_by(|a, b| a.0.mean_frequency_hz.total_cmp(&b.0.mean_frequency_hz));
    let (components, series): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(DetectionReport {
        degenerate: components.is_empty(),
        components,
        chosen_k: decomp.k(),
        selection_trace: None,
        center_freqs_hz: decomp.center_freqs_hz.clone(),
        converged: decomp.converged,
        ground_truth: None,
        series,
    })
}

/// Selects K, decomposes, and summarizes every retained mode.
pub fn detect_harmonics(signal: &SampledSignal, vmd_defaults: &VmdParams, cfg: &DetectConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    if normalize_unit(signal.samples()).is_none() {
        log::warn!("constant input; nothing to detect");
        return Ok(DetectionReport {
            components: Vec::new(),
            chosen_k: 0,
            selection_trace: None,
            center_freqs_hz: Vec::new(),
            converged: true,
            degenerate: true,
            ground_truth: None,
            series: Vec::new(),
        });
    }
    let kcfg = cfg.kselect();
    let entries = kselect::sweep(signal, vmd_defaults, &kcfg)?;
    let trace = kselect::trace_from(&entries, &kcfg)?;
    let decomp = entries
        .into_iter()
        .find(|e| e.k == trace.chosen_k)
        .and_then(|e| e.outcome.ok())
        .map(|(d, _)| d)
        .ok_or(Error::AllDiverged {
            k_min: cfg.k_min,
            k_max: cfg.k_max,
        })?;
    let mut report = analyze_decomposition(&decomp, signal, cfg)?;
    report.selection_trace = Some(trace);
    Ok(report)
}

/// Matches each true tone to the component nearest in frequency.
pub fn match_ground_truth(components: &[ComponentSummary], tones: &[ToneSpec]) -> Vec<ToneMatch> {
    tones
        .iter()
        .map(|t| {
            let best = components
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (a.1.mean_frequency_hz - t.frequency_hz).abs();
                    let db = (b.1.mean_frequency_hz - t.frequency_hz).abs();
                    da.total_cmp(&db)
                })
                .map(|(i, _)| i);
            let (amplitude_rel_error, frequency_rel_error) = match best {
                Some(i) => (
                    (components[i].mean_amplitude_v - t.amplitude).abs() / t.amplitude.abs(),
                    (components[i].mean_frequency_hz - t.frequency_hz).abs() / t.frequency_hz.abs(),
                ),
                None => (f64::INFINITY, f64::INFINITY),
            };
            ToneMatch {
                true_amplitude_v: t.amplitude,
                true_frequency_hz: t.frequency_hz,
                component_index: best,
                amplitude_rel_error,
                frequency_rel_error,
            }
        })
        .collect()
}

impl DetectionReport {
    pub fn attach_ground_truth(&mut self, tones: &[ToneSpec]) {
        self.ground_truth = Some(match_ground_truth(&self.components, tones));
    }

    /// `Σ A²/2 · (support / duration)` over components.
    pub fn accounted_power(&self, duration_s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.mean_amplitude_v.powi(2) / 2.0 * (c.support_s.1 - c.support_s.0) / duration_s)
            .sum()
    }
}

/// Mean square of `x` over its interior, trimming `fraction` at each end.
pub fn interior_power(x: &[f64], fraction: f64) -> f64 {
    mean_square(&x[kselect::trimmed_range(x.len(), fraction)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synth_multitone, Preset};

    fn tone(a: f64, f: f64, n: usize, fs: f64) -> Vec<f64> {
        (0..n).map(|i| a * (2.0 * PI * f * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn tone_attributes() {
        let x = tone(0.5, 250.0, 4096, 4096.0);
        let s = instantaneous_attributes(&x, 4096.0).unwrap();
        assert_eq!(s.valid_range, 204..3892);
        let v = s.valid_range.clone();
        let len = v.len() as f64;
        let a = s.amplitude[v.clone()].iter().sum::<f64>() / len;
        let f = s.frequency_hz[v].iter().sum::<f64>() / len;
        assert!((a - 0.5).abs() < 0.5 * 0.005, "{a}");
        assert!((f - 250.0).abs() < 0.5, "{f}");
        assert!(s.amplitude.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn chirp_follows_its_frequency_line() {
        // phase 2π(10 t + 5 t²): frequency 10 + 10 t over one second.
        let fs = 4096.0;
        let x: Vec<f64> = (0..4096)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * (10.0 * t + 5.0 * t * t)).cos()
            })
            .collect();
        let s = instantaneous_attributes(&x, fs).unwrap();
        for i in s.valid_range.clone() {
            let expect = 10.0 + 10.0 * i as f64 / fs;
            assert!((s.frequency_hz[i] - expect).abs() <= 0.02 * expect, "i={i} {}", s.frequency_hz[i]);
        }
    }

    #[test]
    fn zero_mode_is_degenerate() {
        let s = instantaneous_attributes(&[0.0; 64], 100.0).unwrap();
        assert!(s.degenerate);
        assert!(s.amplitude.iter().all(|&a| a == 0.0));
        assert!(s.frequency_hz.iter().all(|&f| f == 0.0));
        assert!(time_support(&s, 100.0, &SupportConfig::default()).degenerate);
        assert!(instantaneous_attributes(&[1.0; 7], 100.0).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 50.0), 3.0);
        assert_eq!(percentile(&v, 100.0), 5.0);
        assert!((percentile(&v, 95.0) - 4.8).abs() < 1e-12);
    }

    #[test]
    fn steady_tone_support_covers_everything() {
        let x = tone(1.0, 50.0, 4096, 4096.0);
        let s = instantaneous_attributes(&x, 4096.0).unwrap();
        let sup = time_support(&s, 4096.0, &SupportConfig::default());
        assert_eq!((sup.start, sup.end), (0, 4096));
    }

    #[test]
    fn gated_tone_support() {
        let fs = 4096.0;
        let sig = synth_multitone(&[ToneSpec::gated(2.0, 119.0, 0.0, 0.2, 0.5)], fs, 4096).unwrap();
        let s = instantaneous_attributes(sig.samples(), fs).unwrap();
        let sup = time_support(&s, fs, &SupportConfig::default());
        assert!((sup.start_s - 0.2).abs() < 0.01 && (sup.end_s - 0.5).abs() < 0.01, "{sup:?}");
    }

    #[test]
    fn short_gaps_close_and_blips_drop() {
        let fs = 1000.0;
        let n = 1000;
        let mut amp = vec![0.0; n];
        for (i, a) in amp.iter_mut().enumerate() {
            // two bursts 20 ms apart, plus a 5 ms blip far away
            if (200..400).contains(&i) || (420..600).contains(&i) || (800..805).contains(&i) {
                *a = 1.0;
            }
        }
        let series = InstantaneousSeries {
            frequency_hz: vec![0.0; n],
            amplitude: amp,
            valid_range: 50..950,
            degenerate: false,
        };
        let sup = time_support(&series, fs, &SupportConfig::default());
        assert_eq!((sup.start, sup.end), (200, 600));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_component(49.89, 50.0, 2.5), Classification::Fundamental);
        assert_eq!(classify_component(250.8, 50.0, 2.5), Classification::Harmonic { order: 5 });
        assert_eq!(classify_component(117.78, 50.0, 2.5), Classification::Interharmonic);
        for f in [104.0, 134.0, 147.0] {
            assert_eq!(classify_component(f, 50.0, 2.5), Classification::Interharmonic);
        }
        assert_eq!(classify_component(15.0, 50.0, 2.5), Classification::Interharmonic);
        assert_eq!(classify_component(1.0, 50.0, 2.5), Classification::Interharmonic);
    }

    #[test]
    fn constant_input_gives_empty_report() {
        let sig = SampledSignal::new(vec![1.0; 1024], 1024.0).unwrap();
        let r = detect_harmonics(&sig, &VmdParams::default(), &DetectConfig::default()).unwrap();
        assert!(r.components.is_empty());
        assert!(r.degenerate);
    }

    #[test]
    fn weak_neighbour_merges_into_host() {
        let cfg = DetectConfig::default();
        let centers = [50.0, 250.0, 258.0, 400.0];
        let energies = [0.5, 0.3, 0.01, 0.2];
        let g = merge_groups(&[0, 1, 2, 3], &centers, &energies, &cfg);
        assert_eq!(g, vec![(0, vec![0]), (1, vec![1, 2]), (3, vec![3])]);
        let off = DetectConfig {
            merge_max_energy_ratio: 0.0,
            ..cfg
        };
        assert_eq!(merge_groups(&[0, 1, 2, 3], &centers, &energies, &off).len(), 4);
        // comparable energies do not merge
        let g = merge_groups(&[0, 1], &[100.0, 104.0], &[0.1, 0.05], &cfg);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn eq14_energy_accounting() {
        let sig = Preset::Eq14.render(None).unwrap();
        let decomp = crate::vmd::vmd_decompose(&sig, &VmdParams::default().with_k(7)).unwrap();
        let mut r = analyze_decomposition(&decomp, &sig, &DetectConfig::default()).unwrap();
        assert_eq!(r.components.len(), 6);
        let p = crate::signal::signal_power(&sig);
        let acc = r.accounted_power(sig.duration_s());
        assert!((acc - p).abs() <= 0.15 * p, "{acc} vs {p}");
        r.attach_ground_truth(&Preset::Eq14.tones());
        for m in r.ground_truth.unwrap() {
            assert!(m.frequency_rel_error < 0.01 && m.amplitude_rel_error < 0.06, "{m:?}");
        }
    }
}
