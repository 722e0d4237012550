//! Variational Mode Decomposition solved by ADMM in the frequency domain.
//!
//! The input is mirror-extended to twice its length and transformed once.
//! Each sweep updates, for every mode in turn, its half-spectrum by the
//! Wiener filter
//!
//! ```text
//! û_k(f) = (f̂(f) − Σ_{i≠k} û_i(f) + λ̂(f)/2) / (1 + α (f − f_k)²)
//! ```
//!
//! and its center frequency by the power-weighted mean `Σ f |û_k|² / Σ |û_k|²`,
//! then takes a dual ascent step `λ̂ ← λ̂ + τ (f̂ − Σ û_k)`. Frequencies are
//! normalized (cycles per sample, `0..=0.5`). Modes are rebuilt by
//! Hermitian-symmetric inverse FFT and cropped back to the input span.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::spectral::{crop_mirror_slice, fft_in_place, ifft_in_place, mirror_extend_slice};

/// How the center frequencies are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Init {
    /// All centers start at 0.
    Zero,
    /// `i · 0.5 / K` for `i = 0..K`: equispaced over the half band, first at DC.
    Uniform,
    /// `K` sorted uniform draws in `[0, 0.5)`, reproducible per seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmdParams {
    /// Number of modes.
    pub k: usize,
    /// Bandwidth penalty.
    pub alpha: f64,
    /// Dual ascent step; 0 disables the multiplier update.
    pub tau: f64,
    /// Pin the first center frequency at 0.
    pub dc: bool,
    pub init: Init,
    /// Stop when the summed relative squared change of the mode spectra drops below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for VmdParams {
    fn default() -> Self {
        Self {
            k: 1,
            alpha: 4096.0,
            tau: 0.0,
            dc: false,
            init: Init::Uniform,
            tol: 1e-10,
            max_iters: 500,
        }
    }
}

impl VmdParams {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k == 0 {
            return bad("VMD needs k >= 1".into());
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad(format!("tau must be non-negative, got {}", self.tau));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }
}

/// Initial center frequencies in cycles per sample.
pub fn init_center_frequencies(params: &VmdParams) -> Vec<f64> {
    let k = params.k;
    let mut omega = match params.init {
        Init::Zero => vec![0.0; k],
        Init::Uniform => (0..k).map(|i| 0.5 * i as f64 / k as f64).collect(),
        Init::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.5)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
    };
    if params.dc && k > 0 {
        omega[0] = 0.0;
    }
    omega
}

/// Live ADMM iterate.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Half-spectra (bins `0..=T/2` of the extended series), one per mode.
    pub mode_spectra: Vec<Vec<Complex64>>,
    /// Normalized center frequencies, in `[0, 0.5]`.
    pub center_freqs: Vec<f64>,
    pub lagrangian: Vec<Complex64>,
    pub iter: usize,
    pub last_delta: f64,
}

/// Step-wise solver; [`vmd_decompose`] drives it to completion.
#[derive(Debug, Clone)]
pub struct VmdSolver {
    params: VmdParams,
    target: Vec<Complex64>,
    bin_freqs: Vec<f64>,
    extended_len: usize,
    input: Vec<f64>,
    sample_rate_hz: f64,
    state: SolverState,
}

impl VmdSolver {
    pub fn new(signal: &SampledSignal, params: &VmdParams) -> Result<Self> {
        params.validate()?;
        let n = signal.len();
        if n < 2 * params.k || n < 2 {
            return Err(Error::InvalidSignal(format!(
                "signal of {n} samples is too short for k = {}",
                params.k
            )));
        }
        let extended = mirror_extend_slice(signal.samples());
        let t = extended.len();
        let mut spectrum: Vec<Complex64> = extended.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut spectrum);
        let half = t / 2 + 1;
        spectrum.truncate(half);
        let bin_freqs = (0..half).map(|j| j as f64 / t as f64).collect();
        let zero = Complex64::new(0.0, 0.0);
        let state = SolverState {
            mode_spectra: vec![vec![zero; half]; params.k],
            center_freqs: init_center_frequencies(params),
            lagrangian: vec![zero; half],
            iter: 0,
            last_delta: f64::INFINITY,
        };
        Ok(Self {
            params: *params,
            target: spectrum,
            bin_freqs,
            extended_len: t,
            input: signal.samples().to_vec(),
            sample_rate_hz: signal.sample_rate_hz(),
            state,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// One ADMM sweep over all modes. Returns the convergence measure
    /// `Σ_k ‖û_k^{n+1} − û_k^n‖² / ‖û_k^n‖²`.
    pub fn step(&mut self) -> Result<f64> {
        let VmdParams { k, alpha, tau, dc, .. } = self.params;
        let half = self.target.len();
        let st = &mut self.state;

        let mut total = vec![Complex64::new(0.0, 0.0); half];
        for spec in &st.mode_spectra {
            for (acc, v) in total.iter_mut().zip(spec) {
                *acc += v;
            }
        }

        let mut delta = 0.0;
        for m in 0..k {
            let center = st.center_freqs[m];
            let spec = &mut st.mode_spectra[m];
            let mut diff_sq = 0.0;
            let mut old_sq = 0.0;
            let mut weighted = 0.0;
            let mut power = 0.0;
            for j in 0..half {
                let old = spec[j];
                let others = total[j] - old;
                let offset = self.bin_freqs[j] - center;
                let new = (self.target[j] - others + st.lagrangian[j] * 0.5) / (1.0 + alpha * offset * offset);
                spec[j] = new;
                total[j] = others + new;
                diff_sq += (new - old).norm_sqr();
                old_sq += old.norm_sqr();
                let p = new.norm_sqr();
                power += p;
                weighted += self.bin_freqs[j] * p;
            }
            if !(dc && m == 0) && power > 0.0 {
                st.center_freqs[m] = weighted / power;
            }
            delta += if old_sq > 0.0 {
                diff_sq / old_sq
            } else if diff_sq > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
        }

        if tau > 0.0 {
            for j in 0..half {
                st.lagrangian[j] += (self.target[j] - total[j]) * tau;
            }
        }

        st.iter += 1;
        let finite = st.center_freqs.iter().all(|w| w.is_finite())
            && !delta.is_nan()
            && total.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite {
            return Err(Error::NonFinite { iteration: st.iter });
        }
        st.last_delta = delta;
        Ok(delta)
    }

    /// Iterates to convergence or `max_iters`, then rebuilds the modes.
    pub fn run(mut self) -> Result<VmdDecomposition> {
        let mut converged = false;
        while self.state.iter < self.params.max_iters {
            if self.step()? < self.params.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            log::debug!(
                "VMD k={} stopped at max_iters={} with delta {:.3e}",
                self.params.k,
                self.params.max_iters,
                self.state.last_delta
            );
        }
        self.finish(converged)
    }

    fn finish(self, converged: bool) -> Result<VmdDecomposition> {
        let t = self.extended_len;
        let half = self.target.len();
        let mut modes = Vec::with_capacity(self.params.k);
        for spec in &self.state.mode_spectra {
            let mut full = vec![Complex64::new(0.0, 0.0); t];
            full[..half].copy_from_slice(spec);
            full[half - 1].im = 0.0;
            full[0].im = 0.0;
            for j in half..t {
                full[j] = spec[t - j].conj();
            }
            ifft_in_place(&mut full);
            let real: Vec<f64> = full.iter().map(|v| v.re).collect();
            modes.push(crop_mirror_slice(&real)?.to_vec());
        }

        let mut order: Vec<usize> = (0..modes.len()).collect();
        order.sort_by(|&a, &b| self.state.center_freqs[a].total_cmp(&self.state.center_freqs[b]));
        let modes: Vec<Vec<f64>> = order.iter().map(|&i| std::mem::take(&mut modes[i])).collect();
        let center_freqs_hz = order
            .iter()
            .map(|&i| self.state.center_freqs[i] * self.sample_rate_hz)
            .collect();

        let residual = self
            .input
            .iter()
            .enumerate()
            .map(|(i, x)| x - modes.iter().map(|m| m[i]).sum::<f64>())
            .collect();

        Ok(VmdDecomposition {
            modes,
            center_freqs_hz,
            iterations: self.state.iter,
            converged,
            residual,
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

/// Modes in ascending center-frequency order, plus what they leave over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmdDecomposition {
    pub modes: Vec<Vec<f64>>,
    pub center_freqs_hz: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `input − Σ modes`.
    pub residual: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl VmdDecomposition {
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// The decomposed input, `Σ modes + residual`.
    pub fn input(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for m in &self.modes {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v;
            }
        }
        out
    }
}

/// Decomposes `signal` into `params.k` modes. Hitting `max_iters` is reported
/// through `converged = false`; a NaN in the iterate is an error.
pub fn vmd_decompose(signal: &SampledSignal, params: &VmdParams) -> Result<VmdDecomposition> {
    VmdSolver::new(signal, params)?.run()
}
