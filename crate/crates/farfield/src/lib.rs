//! Multichannel far-field speech recognition, end to end.
//!
//! The crate bundles everything needed to run desk-scale far-field ASR
//! experiments on simulated rooms:
//!
//! - [`stft`] / [`complex`] / [`wave`]: windowed spectral analysis over
//!   multichannel PCM with complex values kept as real pairs.
//! - [`room`]: image-source room impulse responses, scene mixing at
//!   controlled SNR, and deterministic synthetic dataset generation.
//! - [`baseline`]: the classical signal-processing frontend
//!   (delay-and-sum look directions, GCC-PHAT DOA, log-mel features).
//! - [`frontend`]: the learnable beamforming frontend — complex spatial
//!   filters per look direction, factored complex spectral filtering with
//!   log compression, direction pooling, and source-direction priors —
//!   with exact reverse-mode gradients.
//! - [`asr`]: a small transformer encoder/decoder trained with a joint
//!   CTC/attention objective, beam-search decoding and WER scoring.
//! - [`train`]: Adam, the warmup learning-rate schedule, deterministic
//!   training loops, checkpointing, and a finite-difference gradient
//!   verification harness.
//! - [`cli`]: experiment configuration and the command-line entry points.

pub mod asr;
pub mod baseline;
pub mod cli;
pub mod complex;
pub mod delay;
pub mod error;
pub mod frontend;
pub mod linalg;
pub mod params;
pub mod rng;
pub mod room;
pub mod stft;
pub mod train;
pub mod wave;

pub use complex::{complex_mul_as_real, log_magnitude, Cpx};
pub use error::{Error, Result};
pub use stft::{stft, ComplexSpectrogram, StftConfig, WindowKind};
pub use wave::MultichannelWaveform;
