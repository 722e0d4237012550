use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use vmdfbd::hht::DetectConfig;
use vmdfbd::kselect::{KSelectConfig, PruneConfig};
use vmdfbd::signal::{add_awgn, synth_multitone, NoiseSpec, Preset, ToneSpec};
use vmdfbd::vmd::{Init, VmdParams};
use vmdfbd::SampledSignal;

use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetArg {
    Eq12,
    Eq14,
    Eq15,
    Substation,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Eq12 => Preset::Eq12,
            PresetArg::Eq14 => Preset::Eq14,
            PresetArg::Eq15 => Preset::Eq15,
            PresetArg::Substation => Preset::Substation,
        }
    }
}

/// `A,f,phase[,start,end]`.
pub fn parse_tone(s: &str) -> std::result::Result<ToneSpec, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [a, f, p] => Ok(ToneSpec::steady(a, f, p)),
        [a, f, p, t0, t1] => Ok(ToneSpec::gated(a, f, p, t0, t1)),
        _ => Err(format!("expected A,f,phase[,start,end], got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SignalArgs {
    /// Built-in synthetic signal.
    #[arg(long, value_enum, conflicts_with_all = ["input", "tone"])]
    pub preset: Option<PresetArg>,
    /// CSV file with a `t,value` header.
    #[arg(long, short, conflicts_with = "tone")]
    pub input: Option<PathBuf>,
    /// Tone `A,f,phase[,start,end]` (volts, Hz, rad, s); repeatable.
    #[arg(long, value_parser = parse_tone)]
    pub tone: Vec<ToneSpec>,
    /// Sample rate in Hz: for tones, or to override the rate inferred from a CSV.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Sample count for tones.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Add white Gaussian noise at this SNR.
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Known tones of a CSV input, for error columns; repeatable.
    #[arg(long, value_parser = parse_tone)]
    pub truth: Vec<ToneSpec>,
}

/// Where a signal came from, recorded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct SignalSource {
    pub preset: Option<PresetArg>,
    pub input: Option<String>,
    pub tones: Vec<ToneSpec>,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub noise: Option<NoiseSpec>,
}

pub struct LoadedSignal {
    pub signal: SampledSignal,
    pub truth: Vec<ToneSpec>,
    pub source: SignalSource,
}

impl SignalArgs {
    pub fn load(&self) -> Result<LoadedSignal> {
        let (clean, truth) = if let Some(p) = self.preset {
            let preset = Preset::from(p);
            (preset.render(None)?, preset.tones())
        } else if let Some(path) = &self.input {
            let sig = io::read_signal_csv(path, self.fs).with_context(|| format!("reading {}", path.display()))?;
            (sig, self.truth.clone())
        } else if !self.tone.is_empty() {
            let fs = self.fs.unwrap_or(4096.0);
            (synth_multitone(&self.tone, fs, self.n)?, self.tone.clone())
        } else {
            bail!(vmdfbd::Error::InvalidParameter(
                "one of --preset, --input or --tone is required".into()
            ));
        };
        let noise = self.snr_db.map(|snr| NoiseSpec::new(snr, self.seed));
        let signal = match &noise {
            Some(spec) => add_awgn(&clean, spec)?,
            None => clean,
        };
        let source = SignalSource {
            preset: self.preset,
            input: self.input.as_ref().map(|p| p.display().to_string()),
            tones: if self.preset.is_some() { Vec::new() } else { self.tone.clone() },
            sample_rate_hz: signal.sample_rate_hz(),
            n_samples: signal.len(),
            noise,
        };
        Ok(LoadedSignal { signal, truth, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Uniform,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct VmdArgs {
    /// Bandwidth penalty.
    #[arg(long, default_value_t = 4096.0)]
    pub alpha: f64,
    /// Dual ascent step (0 = noise-tolerant, no exact reconstruction).
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Pin the first mode at DC.
    #[arg(long)]
    pub dc: bool,
    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    pub init: InitArg,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    pub init_seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
}

impl VmdArgs {
    pub fn params(&self, k: usize) -> VmdParams {
        VmdParams {
            k,
            alpha: self.alpha,
            tau: self.tau,
            dc: self.dc,
            init: match self.init {
                InitArg::Zero => Init::Zero,
                InitArg::Uniform => Init::Uniform,
                InitArg::Random => Init::Random { seed: self.init_seed },
            },
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Modes below this fraction of the input energy are residue.
    #[arg(long, default_value_t = 1e-3)]
    pub prune_threshold: f64,
    /// Scores within this of the sweep minimum are on the plateau.
    #[arg(long, default_value_t = 0.05)]
    pub plateau_epsilon: f64,
    /// Following K values that must also be on the plateau.
    #[arg(long, default_value_t = 2)]
    pub persistence: usize,
}

impl SweepArgs {
    pub fn config(&self, threads: usize) -> KSelectConfig {
        KSelectConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            prune: PruneConfig {
                energy_fraction_threshold: self.prune_threshold,
                ..PruneConfig::default()
            },
            plateau_epsilon: self.plateau_epsilon,
            persistence: self.persistence,
            threads,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Fundamental frequency in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub fundamental: f64,
    /// Distance from n·f0 within which a component counts as harmonic.
    #[arg(long, default_value_t = 2.5)]
    pub harmonic_tolerance: f64,
    /// Fraction of samples ignored at each end by the Hilbert stage.
    #[arg(long, default_value_t = 0.05)]
    pub edge_trim: f64,
    /// Time-support threshold relative to the 95th-percentile envelope.
    #[arg(long, default_value_t = 0.25)]
    pub support_threshold: f64,
    /// Shortest gap kept open, and shortest burst kept, in seconds.
    #[arg(long, default_value_t = 0.04)]
    pub min_gap: f64,
    /// Fold weaker modes lying within this many Hz of a neighbour.
    #[arg(long, default_value_t = 12.5)]
    pub merge_separation: f64,
    /// Fold only modes below this energy ratio to the neighbour (0 disables).
    #[arg(long, default_value_t = 0.1)]
    pub merge_ratio: f64,
}

impl DetectArgs {
    pub fn config(&self, sweep: &SweepArgs, threads: usize) -> DetectConfig {
        let k = sweep.config(threads);
        let base = DetectConfig::default();
        DetectConfig {
            k_min: k.k_min,
            k_max: k.k_max,
            score_prune: k.prune,
            detect_prune: PruneConfig {
                energy_fraction_threshold: k.prune.energy_fraction_threshold,
                edge_trim_fraction: self.edge_trim,
            },
            plateau_epsilon: k.plateau_epsilon,
            persistence: k.persistence,
            edge_trim: self.edge_trim,
            support: vmdfbd::hht::SupportConfig {
                threshold_fraction: self.support_threshold,
                min_gap_s: self.min_gap,
                ..base.support
            },
            fundamental_hz: self.fundamental,
            harmonic_tolerance_hz: self.harmonic_tolerance,
            merge_max_separation_hz: self.merge_separation,
            merge_max_energy_ratio: self.merge_ratio,
            threads,
        }
    }
}

/// Output destinations shared by the analysis commands.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Primary output file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
