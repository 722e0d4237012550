//! Choosing the VMD mode count from the minimum box dimension of its modes.
//!
//! For each `K` in the sweep the signal is decomposed from a fresh
//! initialization, low-energy residual modes are dropped, and the score of
//! `K` is the smallest box dimension among the modes that remain. Mixed
//! modes are rough, so the score falls as `K` approaches the true component
//! count and then levels off; the chosen `K` is where that plateau starts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbd::fractal_box_dimension;
use crate::parallel::ordered_map;
use crate::signal::{mean_square, SampledSignal};
use crate::vmd::{vmd_decompose, VmdDecomposition, VmdParams};

/// Which modes count as residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    /// A mode is kept when its mean-square energy is at least this fraction
    /// of the input's.
    pub energy_fraction_threshold: f64,
    /// Fraction of samples ignored at each end when measuring energies.
    /// 0 measures over the full window.
    pub edge_trim_fraction: f64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            energy_fraction_threshold: 1e-3,
            edge_trim_fraction: 0.0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_fraction_threshold > 0.0 && self.energy_fraction_threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "energy fraction threshold must be in (0, 1), got {}",
                self.energy_fraction_threshold
            )));
        }
        if !(0.0..0.5).contains(&self.edge_trim_fraction) {
            return Err(Error::InvalidParameter(format!(
                "edge trim must be in [0, 0.5), got {}",
                self.edge_trim_fraction
            )));
        }
        Ok(())
    }

    pub(crate) fn window(&self, n: usize) -> std::ops::Range<usize> {
        trimmed_range(n, self.edge_trim_fraction)
    }
}

/// `[⌊f·n⌋, n − ⌊f·n⌋)`, never empty for `n > 0`.
pub(crate) fn trimmed_range(n: usize, fraction: f64) -> std::ops::Range<usize> {
    let cut = ((fraction * n as f64).floor() as usize).min(n.saturating_sub(1) / 2);
    cut..n - cut
}

/// Energy of each mode as a fraction of the input energy, over the
/// configured window.
pub fn mode_energy_fractions(decomp: &VmdDecomposition, cfg: &PruneConfig) -> Vec<f64> {
    let window = cfg.window(decomp.len());
    let input = decomp.input();
    let total = mean_square(&input[window.clone()]);
    decomp
        .modes
        .iter()
        .map(|m| {
            let e = mean_square(&m[window.clone()]);
            if total > 0.0 { e / total } else { 0.0 }
        })
        .collect()
}

/// Indices of the modes that survive pruning, ascending. Never empty for a
/// non-empty decomposition: if everything falls below the threshold the
/// most energetic mode is kept.
pub fn prune_residual_modes(decomp: &VmdDecomposition, cfg: &PruneConfig) -> Vec<usize> {
    let fractions = mode_energy_fractions(decomp, cfg);
    let kept: Vec<usize> = fractions
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= cfg.energy_fraction_threshold)
        .map(|(i, _)| i)
        .collect();
    if !kept.is_empty() || fractions.is_empty() {
        return kept;
    }
    let best = fractions
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    vec![best]
}

/// Score of one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    /// Minimum box dimension over the retained modes.
    pub score: f64,
    pub retained: Vec<usize>,
    /// Box dimension of every retained mode, in `retained` order.
    pub dimensions: Vec<f64>,
    /// Some retained mode was constant.
    pub degenerate: bool,
}

pub fn k_score(decomp: &VmdDecomposition, cfg: &PruneConfig) -> Result<KScore> {
    if decomp.modes.is_empty() {
        return Err(Error::InvalidParameter("decomposition has no modes".into()));
    }
    let retained = prune_residual_modes(decomp, cfg);
    let mut dimensions = Vec::with_capacity(retained.len());
    let mut degenerate = false;
    for &i in &retained {
        let est = fractal_box_dimension(&decomp.modes[i])?;
        if est.degenerate {
            log::warn!("mode {i} is constant; box dimension taken as 1");
            degenerate = true;
        }
        dimensions.push(est.dimension);
    }
    let score = dimensions.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(KScore {
        score,
        retained,
        dimensions,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSelectConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub prune: PruneConfig,
    /// Scores within this of the sweep minimum count as on the plateau.
    pub plateau_epsilon: f64,
    /// How many following `K` must also be on the plateau.
    pub persistence: usize,
    /// Worker threads for the sweep; 1 runs serially. Output does not depend on it.
    #[serde(skip_serializing, default = "crate::parallel::serial")]
    pub threads: usize,
}

impl Default for KSelectConfig {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 10,
            prune: PruneConfig::default(),
            plateau_epsilon: 0.05,
            persistence: 2,
            threads: 1,
        }
    }
}

impl KSelectConfig {
    pub fn with_range(mut self, k_min: usize, k_max: usize) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_min >= 1 && self.k_min < self.k_max) {
            return Err(Error::InvalidParameter(format!(
                "K range must satisfy 1 <= k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if !(self.plateau_epsilon >= 0.0 && self.plateau_epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "plateau epsilon must be non-negative, got {}",
                self.plateau_epsilon
            )));
        }
        self.prune.validate()
    }
}

/// Per-K scores and the chosen K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelectionTrace {
    pub k_values: Vec<usize>,
    /// `+∞` where the decomposition diverged.
    pub scores: Vec<f64>,
    pub pruned_counts: Vec<usize>,
    pub converged: Vec<bool>,
    pub chosen_k: usize,
    /// K with the lowest score, which may differ from `chosen_k`.
    pub min_score_k: usize,
    pub plateau_epsilon: f64,
}

impl KSelectionTrace {
    pub fn score_of(&self, k: usize) -> Option<f64> {
        self.k_values.iter().position(|&v| v == k).map(|i| self.scores[i])
    }
}

/// Plateau-onset rule: the smallest `K` whose score, and the scores of the
/// next `persistence` values of `K` (clipped to the sweep), are all within
/// `epsilon` of the sweep minimum. Returns `(chosen, argmin)` indices.
pub fn plateau_onset(scores: &[f64], epsilon: f64, persistence: usize) -> Option<(usize, usize)> {
    let (argmin, min) = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| s.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let on = |s: f64| s.is_finite() && s <= min + epsilon;
    let last = scores.len() - 1;
    let chosen = (0..scores.len())
        .find(|&i| on(scores[i]) && (i + 1..=(i + persistence).min(last)).all(|j| on(scores[j])))
        .unwrap_or(argmin);
    Some((chosen, argmin))
}

pub(crate) struct SweepEntry {
    pub k: usize,
    pub outcome: Result<(VmdDecomposition, KScore)>,
}

pub(crate) fn sweep(signal: &SampledSignal, vmd_defaults: &VmdParams, cfg: &KSelectConfig) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    let ks: Vec<usize> = (cfg.k_min..=cfg.k_max).collect();
    let entries = ordered_map(&ks, cfg.threads, |&k| {
        let params = vmd_defaults.with_k(k);
        let outcome = vmd_decompose(signal, &params).and_then(|d| {
            let score = k_score(&d, &cfg.prune)?;
            Ok((d, score))
        });
        SweepEntry { k, outcome }
    });
    for e in &entries {
        if let Err(err) = &e.outcome {
            if !err.is_numerical() {
                return Err(err.clone());
            }
        }
    }
    Ok(entries)
}

pub(crate) fn trace_from(entries: &[SweepEntry], cfg: &KSelectConfig) -> Result<KSelectionTrace> {
    let mut k_values = Vec::with_capacity(entries.len());
    let mut scores = Vec::with_capacity(entries.len());
    let mut pruned_counts = Vec::with_capacity(entries.len());
    let mut converged = Vec::with_capacity(entries.len());
    for e in entries {
        k_values.push(e.k);
        match &e.outcome {
            Ok((d, s)) => {
                scores.push(s.score);
                pruned_counts.push(d.k() - s.retained.len());
                converged.push(d.converged);
            }
            Err(err) => {
                log::warn!("K = {} skipped: {err}", e.k);
                scores.push(f64::INFINITY);
                pruned_counts.push(0);
                converged.push(false);
            }
        }
    }
    let (chosen, argmin) = plateau_onset(&scores, cfg.plateau_epsilon, cfg.persistence).ok_or(Error::AllDiverged {
        k_min: cfg.k_min,
        k_max: cfg.k_max,
    })?;
    log::info!(
        "K sweep {}..={}: plateau onset K = {}, minimum score at K = {}",
        cfg.k_min,
        cfg.k_max,
        k_values[chosen],
        k_values[argmin]
    );
    Ok(KSelectionTrace {
        chosen_k: k_values[chosen],
        min_score_k: k_values[argmin],
        k_values,
        scores,
        pruned_counts,
        converged,
        plateau_epsilon: cfg.plateau_epsilon,
    })
}

/// Sweeps `K` over `cfg.k_min..=cfg.k_max` and picks the plateau onset.
pub fn select_k(signal: &SampledSignal, vmd_defaults: &VmdParams, cfg: &KSelectConfig) -> Result<KSelectionTrace> {
    let entries = sweep(signal, vmd_defaults, cfg)?;
    trace_from(&entries, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(modes: Vec<Vec<f64>>) -> VmdDecomposition {
        let n = modes[0].len();
        VmdDecomposition {
            center_freqs_hz: (0..modes.len()).map(|i| i as f64).collect(),
            modes,
            iterations: 1,
            converged: true,
            residual: vec![0.0; n],
            sample_rate_hz: 1.0,
        }
    }

    #[test]
    fn prune_by_energy_fraction() {
        // Orthogonal square waves so the energies add exactly.
        let n = 128;
        let a: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b: Vec<f64> = (0..n).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c: Vec<f64> = (0..n).map(|i| if (i / 4) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let scale = |v: &[f64], e: f64| v.iter().map(|x| x * e.sqrt()).collect::<Vec<_>>();
        let d = fake(vec![scale(&a, 0.7), scale(&b, 0.29), scale(&c, 1e-5)]);
        let fr = mode_energy_fractions(&d, &PruneConfig::default());
        assert!((fr[0] - 0.7 / 0.99001).abs() < 1e-12);
        assert_eq!(prune_residual_modes(&d, &PruneConfig::default()), vec![0, 1]);
    }

    #[test]
    fn prune_keeps_strongest_when_all_fall_below() {
        let n = 64;
        let d = VmdDecomposition {
            residual: vec![1.0; n],
            ..fake(vec![vec![1e-4; n], vec![2e-4; n]])
        };
        assert_eq!(prune_residual_modes(&d, &PruneConfig::default()), vec![1]);
    }

    #[test]
    fn score_is_min_dimension() {
        let n = 1024;
        let smooth: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let rough: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64).collect();
        let d = fake(vec![smooth.clone(), rough.clone()]);
        let s = k_score(&d, &PruneConfig::default()).unwrap();
        let expect = fractal_box_dimension(&smooth).unwrap().dimension;
        assert_eq!(s.score, expect.min(fractal_box_dimension(&rough).unwrap().dimension));
        assert_eq!(s.score, expect);
    }

    #[test]
    fn plateau_rule() {
        let s = [1.6, 1.58, 1.63, 1.63, 1.63, 1.63, 1.07, 1.06, 1.07, 1.07];
        assert_eq!(plateau_onset(&s, 0.05, 2), Some((6, 7)));
        // A dip that does not persist is skipped.
        let s = [1.5, 1.0, 1.4, 1.02, 1.03, 1.01];
        assert_eq!(plateau_onset(&s, 0.05, 2), Some((3, 1)));
        // Window clipped at the end of the sweep.
        let s = [1.5, 1.5, 1.0];
        assert_eq!(plateau_onset(&s, 0.05, 2), Some((2, 2)));
        // Diverged entries never qualify.
        let s = [f64::INFINITY, 1.0, f64::INFINITY, 1.0, 1.0];
        assert_eq!(plateau_onset(&s, 0.05, 2), Some((3, 1)));
        assert_eq!(plateau_onset(&[f64::INFINITY; 3], 0.05, 2), None);
    }

    #[test]
    fn config_validation() {
        let sig = SampledSignal::new(vec![0.0; 128], 1.0).unwrap();
        let bad = KSelectConfig::default().with_range(3, 3);
        assert!(select_k(&sig, &VmdParams::default(), &bad).is_err());
        let bad = KSelectConfig::default().with_range(0, 3);
        assert!(select_k(&sig, &VmdParams::default(), &bad).is_err());
    }

    #[test]
    fn trace_marks_diverged_k() {
        let good = {
            let n = 256;
            let m: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
            fake(vec![m])
        };
        let s = k_score(&good, &PruneConfig::default()).unwrap();
        let entries = vec![
            SweepEntry { k: 1, outcome: Ok((good.clone(), s.clone())) },
            SweepEntry { k: 2, outcome: Err(Error::NonFinite { iteration: 4 }) },
        ];
        let cfg = KSelectConfig::default().with_range(1, 2);
        let t = trace_from(&entries, &cfg).unwrap();
        assert_eq!(t.scores[1], f64::INFINITY);
        assert_eq!(t.chosen_k, 1);
        let all_bad = vec![SweepEntry { k: 1, outcome: Err(Error::NonFinite { iteration: 1 }) }];
        assert!(matches!(trace_from(&all_bad, &cfg), Err(Error::AllDiverged { .. })));
    }
}
