//! Harmonic and interharmonic detection for power-system waveforms.
//!
//! The pipeline decomposes a sampled signal with Variational Mode
//! Decomposition (VMD), picks the mode count `K` from the knee of the
//! per-`K` minimum box-counting fractal dimension, and then reads
//! instantaneous amplitude and frequency off each mode with the Hilbert
//! transform.
//!
//! ```no_run
//! use vmdfbd::{hht, signal, vmd::VmdParams};
//!
//! let sig = signal::Preset::Eq14.render(None).unwrap();
//! let report = hht::detect_harmonics(&sig, &VmdParams::default(), &hht::DetectConfig::default()).unwrap();
//! for c in &report.components {
//!     println!("{:8.3} Hz  {:6.4} V  {:?}", c.mean_frequency_hz, c.mean_amplitude_v, c.classification);
//! }
//! ```
//!
//! EMD and EEMD live in [`baselines`] for comparison runs.

pub mod baselines;
pub mod error;
pub mod fbd;
pub mod hht;
pub mod kselect;
pub mod signal;
pub mod spectral;
pub mod vmd;

mod parallel;

pub use error::{Error, Result};
pub use signal::SampledSignal;
