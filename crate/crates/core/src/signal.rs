//! Sampled waveforms, multitone synthesis and calibrated noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled real waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    t0_s: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        Self::with_t0(samples, sample_rate_hz, 0.0)
    }

    pub fn with_t0(samples: Vec<f64>, sample_rate_hz: f64, t0_s: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if !t0_s.is_finite() {
            return Err(Error::InvalidSignal("start time is not finite".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            t0_s,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i`: `t0 + i / fs`.
    pub fn time_of(&self, i: usize) -> f64 {
        self.t0_s + i as f64 / self.sample_rate_hz
    }

    /// Span covered by the samples, `n / fs`.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Same timing, new sample values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::with_t0(samples, self.sample_rate_hz, self.t0_s)
    }
}

/// One gated sinusoid `A sin(2π f t + φ)`, active on `[t_start_s, t_end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneSpec {
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub phase_rad: f64,
    pub t_start_s: f64,
    pub t_end_s: f64,
}

impl ToneSpec {
    /// A tone that is on for all time.
    pub fn steady(amplitude: f64, frequency_hz: f64, phase_rad: f64) -> Self {
        Self {
            amplitude,
            frequency_hz,
            phase_rad,
            t_start_s: f64::MIN,
            t_end_s: f64::MAX,
        }
    }

    pub fn gated(amplitude: f64, frequency_hz: f64, phase_rad: f64, t_start_s: f64, t_end_s: f64) -> Self {
        Self {
            amplitude,
            frequency_hz,
            phase_rad,
            t_start_s,
            t_end_s,
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.t_start_s <= t && t < self.t_end_s
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if self.is_active(t) {
            self.amplitude * (2.0 * PI * self.frequency_hz * t + self.phase_rad).sin()
        } else {
            0.0
        }
    }

    fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tone amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tone frequency must be finite and non-negative, got {}",
                self.frequency_hz
            )));
        }
        if !self.phase_rad.is_finite() {
            return Err(Error::InvalidParameter("tone phase is not finite".into()));
        }
        if !(self.t_start_s < self.t_end_s) {
            return Err(Error::InvalidParameter(format!(
                "tone gate [{}, {}) is empty",
                self.t_start_s, self.t_end_s
            )));
        }
        let nyquist_hz = sample_rate_hz / 2.0;
        if self.frequency_hz >= nyquist_hz {
            return Err(Error::AboveNyquist {
                frequency_hz: self.frequency_hz,
                nyquist_hz,
            });
        }
        Ok(())
    }
}

/// Additive white Gaussian noise at a target SNR. `snr_db = +∞` means no noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn none() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_none(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Sums the tones at `t = i / fs`, `i = 0..n_samples`.
pub fn synth_multitone(tones: &[ToneSpec], sample_rate_hz: f64, n_samples: usize) -> Result<SampledSignal> {
    if tones.is_empty() {
        return Err(Error::InvalidParameter("tone list is empty".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    for tone in tones {
        tone.validate(sample_rate_hz)?;
    }
    let samples = (0..n_samples)
        .map(|i| {
            let t = i as f64 / sample_rate_hz;
            tones.iter().map(|tone| tone.value_at(t)).sum()
        })
        .collect();
    SampledSignal::new(samples, sample_rate_hz)
}

/// Mean of squared samples.
pub fn signal_power(signal: &SampledSignal) -> f64 {
    mean_square(signal.samples())
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Adds zero-mean Gaussian noise of variance `P / 10^(snr/10)`, with `P` the
/// full-window power of the clean input. The sequence depends only on `seed`.
pub fn add_awgn(signal: &SampledSignal, noise: &NoiseSpec) -> Result<SampledSignal> {
    if noise.is_none() {
        return Ok(signal.clone());
    }
    if !noise.snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "SNR must be finite or +inf, got {}",
            noise.snr_db
        )));
    }
    let power = signal_power(signal);
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    let std = (power / 10f64.powf(noise.snr_db / 10.0)).sqrt();
    let noisy = white_noise(signal.len(), std, noise.seed)
        .into_iter()
        .zip(signal.samples())
        .map(|(w, x)| x + w)
        .collect();
    signal.with_samples(noisy)
}

/// `n` draws of N(0, std²) from a ChaCha8 stream seeded with `seed`.
pub fn white_noise(n: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * std
        })
        .collect()
}

/// Built-in synthetic test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `cos 6πt + ¼ sin 56πt + 1/16 cos 542πt`: the under/over-decomposition demo.
    Eq12,
    /// Fundamental, four close interharmonics and the 5th harmonic, steady state.
    Eq14,
    /// 15 Hz + 50 Hz throughout, 119 Hz gated on [0.2, 0.5) s, 250 Hz on [0.6, 1.0) s.
    Eq15,
    /// 0.2 s at 10240 Hz with a transient 105 Hz interharmonic and 250/350/1550 Hz
    /// harmonics; a synthetic stand-in for a substation voltage recording.
    Substation,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Eq12, Preset::Eq14, Preset::Eq15, Preset::Substation];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Eq12 => "eq12",
            Preset::Eq14 => "eq14",
            Preset::Eq15 => "eq15",
            Preset::Substation => "substation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn sample_rate_hz(&self) -> f64 {
        match self {
            Preset::Substation => 10240.0,
            _ => 4096.0,
        }
    }

    pub fn n_samples(&self) -> usize {
        match self {
            Preset::Substation => 2048,
            _ => 4096,
        }
    }

    pub fn tones(&self) -> Vec<ToneSpec> {
        let half_pi = PI / 2.0;
        match self {
            Preset::Eq12 => vec![
                ToneSpec::gated(1.0, 3.0, half_pi, 0.0, 1.0),
                ToneSpec::gated(0.25, 28.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(1.0 / 16.0, 271.0, half_pi, 0.0, 1.0),
            ],
            Preset::Eq14 => vec![
                ToneSpec::gated(1.0, 50.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(0.3, 104.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(0.4, 117.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(0.2, 134.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(0.2, 147.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(0.5, 250.0, 0.0, 0.0, 1.0),
            ],
            Preset::Eq15 => vec![
                ToneSpec::gated(1.0, 15.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(4.0, 50.0, 0.0, 0.0, 1.0),
                ToneSpec::gated(2.0, 119.0, 0.0, 0.2, 0.5),
                ToneSpec::gated(3.0, 250.0, 0.0, 0.6, 1.0),
            ],
            Preset::Substation => vec![
                ToneSpec::gated(1.0, 50.0, 0.3, 0.0, 0.2),
                ToneSpec::gated(0.3, 105.0, 0.0, 0.06, 0.14),
                ToneSpec::gated(0.2, 250.0, 1.1, 0.0, 0.2),
                ToneSpec::gated(0.15, 350.0, 0.4, 0.0, 0.2),
                ToneSpec::gated(0.1, 1550.0, 2.0, 0.0, 0.2),
            ],
        }
    }

    /// Renders the preset, optionally with noise.
    pub fn render(&self, noise: Option<&NoiseSpec>) -> Result<SampledSignal> {
        let clean = synth_multitone(&self.tones(), self.sample_rate_hz(), self.n_samples())?;
        match noise {
            Some(spec) => add_awgn(&clean, spec),
            None => Ok(clean),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tone_matches_formula() {
        let sig = synth_multitone(&[ToneSpec::steady(1.0, 50.0, 0.0)], 4096.0, 4096).unwrap();
        for (i, v) in sig.samples().iter().enumerate() {
            assert_eq!(*v, (2.0 * PI * 50.0 * i as f64 / 4096.0).sin());
        }
    }

    #[test]
    fn eq15_gates_are_half_open() {
        let sig = Preset::Eq15.render(None).unwrap();
        let t = 0.1;
        let i = (t * 4096.0_f64).round() as usize;
        let expected = (30.0 * PI * sig.time_of(i)).sin() + 4.0 * (100.0 * PI * sig.time_of(i)).sin();
        assert!((sig.samples()[i] - expected).abs() < 1e-12);

        // 0.5 s is exactly sample 2048: the 119 Hz gate is already closed there.
        let tones = Preset::Eq15.tones();
        let at_half = 2048;
        let t = sig.time_of(at_half);
        assert_eq!(t, 0.5);
        let steady: f64 = tones[..2].iter().map(|tone| tone.value_at(t)).sum();
        assert_eq!(sig.samples()[at_half], steady + tones[3].value_at(t));
        assert_eq!(tones[2].value_at(t), 0.0);
    }

    #[test]
    fn rejects_bad_tones() {
        assert!(matches!(
            synth_multitone(&[ToneSpec::steady(1.0, 2048.0, 0.0)], 4096.0, 16),
            Err(Error::AboveNyquist { .. })
        ));
        assert!(synth_multitone(&[], 4096.0, 16).is_err());
        assert!(synth_multitone(&[ToneSpec::gated(1.0, 5.0, 0.0, 0.5, 0.5)], 4096.0, 16).is_err());
        assert!(synth_multitone(&[ToneSpec::steady(1.0, 5.0, 0.0)], 4096.0, 1).is_err());
    }

    #[test]
    fn power_examples() {
        let c = SampledSignal::new(vec![2.0; 10], 1.0).unwrap();
        assert_eq!(signal_power(&c), 4.0);
        let s = synth_multitone(&[ToneSpec::steady(1.0, 50.0, 0.0)], 4096.0, 4096).unwrap();
        assert!((signal_power(&s) - 0.5).abs() < 1e-9);
        let eq14 = Preset::Eq14.render(None).unwrap();
        assert!((signal_power(&eq14) - 0.79).abs() < 1e-6);
    }

    #[test]
    fn awgn_unit_power_zero_db_has_unit_variance() {
        let ones = SampledSignal::new(vec![1.0; 200_000], 1000.0).unwrap();
        let noisy = add_awgn(&ones, &NoiseSpec::new(0.0, 3)).unwrap();
        let w: Vec<f64> = noisy.samples().iter().map(|v| v - 1.0).collect();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn awgn_realized_snr_near_target() {
        let clean = Preset::Eq15.render(None).unwrap();
        let noisy = add_awgn(&clean, &NoiseSpec::new(38.0, 1)).unwrap();
        let w: Vec<f64> = noisy.samples().iter().zip(clean.samples()).map(|(a, b)| a - b).collect();
        let snr = 10.0 * (signal_power(&clean) / mean_square(&w)).log10();
        assert!((snr - 38.0).abs() < 0.5, "snr {snr}");
    }

    #[test]
    fn awgn_identity_and_errors() {
        let s = Preset::Eq14.render(None).unwrap();
        assert_eq!(add_awgn(&s, &NoiseSpec::none()).unwrap(), s);
        let zero = SampledSignal::new(vec![0.0; 64], 1.0).unwrap();
        assert_eq!(add_awgn(&zero, &NoiseSpec::new(10.0, 1)), Err(Error::ZeroPower));
    }

    #[test]
    fn awgn_is_seed_deterministic() {
        let s = Preset::Eq14.render(None).unwrap();
        let a = add_awgn(&s, &NoiseSpec::new(38.0, 9)).unwrap();
        let b = add_awgn(&s, &NoiseSpec::new(38.0, 9)).unwrap();
        let c = add_awgn(&s, &NoiseSpec::new(38.0, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn signal_validation() {
        assert!(SampledSignal::new(vec![], 1.0).is_err());
        assert!(SampledSignal::new(vec![f64::NAN], 1.0).is_err());
        assert!(SampledSignal::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn presets_round_trip_names() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        let s = Preset::Substation.render(None).unwrap();
        assert_eq!(s.len(), 2048);
        assert_eq!(s.sample_rate_hz(), 10240.0);
    }
}
