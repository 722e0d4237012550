//! FFT services, the discrete analytic signal, and mirror extension.
//!
//! Forward transforms are unnormalized; inverses carry the `1/N`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Spectrum of a sampled series; `bins.len()` equals the series length.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub bins: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl ComplexSpectrum {
    pub fn of(signal: &SampledSignal) -> Result<Self> {
        Ok(Self {
            bins: dft_forward_real(signal.samples())?,
            sample_rate_hz: signal.sample_rate_hz(),
        })
    }

    /// Frequency of bin `k` in Hz, for `k <= N/2`.
    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.bins.len() as f64
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("DFT needs at least 2 points, got {n}")));
    }
    Ok(())
}

pub(crate) fn fft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

pub(crate) fn ifft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub fn dft_forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    Ok(buf)
}

pub fn dft_forward_real(x: &[f64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    Ok(buf)
}

pub fn dft_inverse(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(spectrum.len())?;
    let mut buf = spectrum.to_vec();
    ifft_in_place(&mut buf);
    Ok(buf)
}

/// Discrete analytic signal: DC (and Nyquist, for even `N`) kept, positive
/// bins doubled, negative bins zeroed. The real part reproduces the input.
pub fn analytic_signal(x: &[f64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "analytic signal needs at least 4 samples, got {n}"
        )));
    }
    let mut buf = dft_forward_real(x)?;
    let positive_end = n.div_ceil(2);
    for v in &mut buf[1..positive_end] {
        *v *= 2.0;
    }
    let negative_start = n / 2 + 1;
    for v in &mut buf[negative_start..] {
        *v = Complex64::new(0.0, 0.0);
    }
    ifft_in_place(&mut buf);
    Ok(buf)
}

/// Samples reflected onto the head of the extension (`N/2`, rounded down).
fn head_len(n: usize) -> usize {
    n / 2
}

/// Reflects the first `N/2` samples onto the front and the remaining
/// `N - N/2` onto the back, giving length `2N`.
pub fn mirror_extend_slice(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let head = head_len(n);
    let mut out = Vec::with_capacity(2 * n);
    out.extend(x[..head].iter().rev());
    out.extend_from_slice(x);
    out.extend(x[head..].iter().rev());
    out
}

/// Inverse of [`mirror_extend_slice`]: the central half of an even-length series.
pub fn crop_mirror_slice(y: &[f64]) -> Result<&[f64]> {
    if y.len() < 4 || y.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "mirror-extended series must have even length >= 4, got {}",
            y.len()
        )));
    }
    let n = y.len() / 2;
    let head = head_len(n);
    Ok(&y[head..head + n])
}

pub fn mirror_extend(x: &SampledSignal) -> Result<SampledSignal> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter("mirror extension needs at least 2 samples".into()));
    }
    let head = head_len(x.len());
    SampledSignal::with_t0(
        mirror_extend_slice(x.samples()),
        x.sample_rate_hz(),
        x.t0_s() - head as f64 / x.sample_rate_hz(),
    )
}

pub fn crop_mirror(y: &SampledSignal) -> Result<SampledSignal> {
    let core = crop_mirror_slice(y.samples())?;
    let head = head_len(y.len() / 2);
    SampledSignal::with_t0(
        core.to_vec(),
        y.sample_rate_hz(),
        y.t0_s() + head as f64 / y.sample_rate_hz(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(f: f64, n: usize, fs: f64, cos: bool) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let arg = 2.0 * PI * f * i as f64 / fs;
                if cos { arg.cos() } else { arg.sin() }
            })
            .collect()
    }

    #[test]
    fn impulse_and_constant() {
        let imp = [1.0, 0.0, 0.0, 0.0];
        for v in dft_forward_real(&imp).unwrap() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let c = 2.5;
        let n = 32;
        let spec = dft_forward_real(&vec![c; n]).unwrap();
        assert!((spec[0].re - n as f64 * c).abs() < 1e-12 * n as f64 * c);
        for v in &spec[1..] {
            assert!(v.norm() < 1e-12 * n as f64 * c);
        }
    }

    #[test]
    fn too_short_rejected() {
        assert!(dft_forward_real(&[1.0]).is_err());
        assert!(analytic_signal(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn analytic_of_cosine_has_unit_modulus() {
        let x = tone(50.0, 4096, 4096.0, true);
        let z = analytic_signal(&x).unwrap();
        for v in &z[10..4086] {
            assert!((v.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn analytic_phase_advance_of_sine() {
        let x = tone(50.0, 4096, 4096.0, false);
        let z = analytic_signal(&x).unwrap();
        let step = 2.0 * PI * 50.0 / 4096.0;
        for i in 100..3990 {
            let d = (z[i + 1] * z[i].conj()).arg();
            assert!((d - step).abs() < 1e-9, "i={i} d={d}");
        }
    }

    #[test]
    fn analytic_real_part_reproduces_input() {
        let a = tone(50.0, 4096, 4096.0, false);
        let b = tone(250.0, 4096, 4096.0, false);
        let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let z = analytic_signal(&x).unwrap();
        for (v, orig) in z.iter().zip(&x) {
            assert!((v.re - orig).abs() < 1e-9);
        }
        // odd length too
        let odd = &x[..1001];
        let z = analytic_signal(odd).unwrap();
        for (v, orig) in z.iter().zip(odd) {
            assert!((v.re - orig).abs() < 1e-9);
        }
    }

    #[test]
    fn mirror_example() {
        assert_eq!(mirror_extend_slice(&[1.0, 2.0, 3.0, 4.0]), vec![2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 3.0]);
        let odd = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ext = mirror_extend_slice(&odd);
        assert_eq!(ext.len(), 10);
        assert_eq!(crop_mirror_slice(&ext).unwrap(), &odd);
    }

    #[test]
    fn mirror_seams_are_continuous() {
        let x: Vec<f64> = (0..64).map(|i| (i as f64 - 31.5).abs()).collect();
        let ext = mirror_extend_slice(&x);
        let max_step = x.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        let seams = [31usize, 32 + 63];
        for s in seams {
            assert!((ext[s + 1] - ext[s]).abs() <= max_step);
        }
    }

    #[test]
    fn mirror_signal_keeps_timing() {
        let s = SampledSignal::with_t0((0..10).map(|i| i as f64).collect(), 100.0, 1.0).unwrap();
        let ext = mirror_extend(&s).unwrap();
        assert!((ext.t0_s() - 0.95).abs() < 1e-12);
        let back = crop_mirror(&ext).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert!((back.t0_s() - 1.0).abs() < 1e-12);
    }
}
