//! Windowed short-time Fourier analysis.
//!
//! `stft` maps a [`MultichannelWaveform`] to per-frame, per-channel complex
//! spectra `X_c[t]` with `K = N/2 + 1` one-sided bins. All downstream
//! frontend filtering operates on these values through real-pair complex
//! arithmetic, so this module is the boundary between time-domain audio and
//! the differentiable part of the pipeline.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::complex::Cpx;
use crate::error::{Error, Result};
use crate::wave::MultichannelWaveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rectangular,
    Hann,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; len],
            WindowKind::Hann => (0..len)
                .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos()))
                .collect(),
        }
    }
}

/// Analysis framing. Defaults are conventional ASR choices at 16 kHz:
/// 25 ms windows, 10 ms hop, 512-point FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window_length: 400,
            hop: 160,
            fft_size: 512,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.window_length {
            return Err(Error::invalid("hop must satisfy 0 < hop <= window_length"));
        }
        if self.window_length > self.fft_size {
            return Err(Error::invalid("window_length must be <= fft_size"));
        }
        if !self.fft_size.is_power_of_two() {
            return Err(Error::invalid("fft_size must be a power of two"));
        }
        Ok(())
    }

    /// One-sided bin count `K = N/2 + 1`.
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn num_frames(&self, signal_len: usize) -> Option<usize> {
        if signal_len < self.window_length {
            None
        } else {
            Some((signal_len - self.window_length) / self.hop + 1)
        }
    }
}

/// Per-frame, per-channel one-sided complex spectra.
/// Values are laid out as `[frame][channel][bin]`.
#[derive(Debug, Clone)]
pub struct ComplexSpectrogram {
    pub frames: usize,
    pub channels: usize,
    pub bins: usize,
    pub values: Vec<Cpx>,
}

impl ComplexSpectrogram {
    pub fn zeros(frames: usize, channels: usize, bins: usize) -> Self {
        ComplexSpectrogram {
            frames,
            channels,
            bins,
            values: vec![Cpx::ZERO; frames * channels * bins],
        }
    }

    #[inline]
    pub fn at(&self, t: usize, c: usize, k: usize) -> Cpx {
        self.values[(t * self.channels + c) * self.bins + k]
    }

    #[inline]
    pub fn at_mut(&mut self, t: usize, c: usize, k: usize) -> &mut Cpx {
        &mut self.values[(t * self.channels + c) * self.bins + k]
    }

    /// Slice of all bins for one (frame, channel).
    #[inline]
    pub fn frame(&self, t: usize, c: usize) -> &[Cpx] {
        let at = (t * self.channels + c) * self.bins;
        &self.values[at..at + self.bins]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }
}

/// Windowed STFT of every channel.
///
/// Frame `t` of channel `c` covers samples `[t*hop, t*hop + L)`; bin `k`
/// holds the `N`-point DFT of the zero-padded windowed frame at index `k`.
/// Errors with "insufficient samples" when the signal is shorter than one
/// window.
pub fn stft(wave: &MultichannelWaveform, cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    cfg.validate()?;
    if wave.is_empty() {
        return Err(Error::invalid("insufficient samples: empty waveform"));
    }
    let frames = cfg.num_frames(wave.len()).ok_or_else(|| {
        Error::invalid(format!(
            "insufficient samples: {} < window_length {}",
            wave.len(),
            cfg.window_length
        ))
    })?;

    let n = cfg.fft_size;
    let bins = cfg.num_bins();
    let window = cfg.window.coefficients(cfg.window_length);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);

    let mut out = ComplexSpectrogram::zeros(frames, wave.num_channels(), bins);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (c, chan) in wave.channels.iter().enumerate() {
        for t in 0..frames {
            let start = t * cfg.hop;
            for (i, w) in window.iter().enumerate() {
                buf[i] = Complex::new(chan[start + i] * w, 0.0);
            }
            for b in buf.iter_mut().skip(cfg.window_length) {
                *b = Complex::new(0.0, 0.0);
            }
            fft.process(&mut buf);
            let base = (t * out.channels + c) * bins;
            for k in 0..bins {
                out.values[base + k] = Cpx::new(buf[k].re, buf[k].im);
            }
        }
    }
    Ok(out)
}

/// Overlap-add resynthesis of a single channel. Debugging aid only; the
/// reconstruction contract (edge effects, window compensation at the
/// boundaries) is deliberately untested.
pub fn istft_debug(
    spec: &ComplexSpectrogram,
    cfg: &StftConfig,
    channel: usize,
    out_len: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if channel >= spec.channels {
        return Err(Error::shape(format!(
            "channel {channel} out of range ({} channels)",
            spec.channels
        )));
    }
    let n = cfg.fft_size;
    let window = cfg.window.coefficients(cfg.window_length);
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);

    let mut acc = vec![0.0; out_len];
    let mut wsum = vec![0.0; out_len];
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
    for t in 0..spec.frames {
        for k in 0..spec.bins {
            let z = spec.at(t, channel, k);
            buf[k] = Complex::new(z.re, z.im);
        }
        // Hermitian extension of the one-sided spectrum.
        for k in spec.bins..n {
            let z = spec.at(t, channel, n - k);
            buf[k] = Complex::new(z.re, -z.im);
        }
        ifft.process(&mut buf);
        let start = t * cfg.hop;
        for i in 0..cfg.window_length {
            let at = start + i;
            if at < out_len {
                acc[at] += buf[i].re / n as f64 * window[i];
                wsum[at] += window[i] * window[i];
            }
        }
    }
    for (a, w) in acc.iter_mut().zip(wsum.iter()) {
        if *w > 1e-12 {
            *a /= *w;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect_cfg(l: usize, n: usize) -> StftConfig {
        StftConfig {
            window_length: l,
            hop: l,
            fft_size: n,
            window: WindowKind::Rectangular,
        }
    }

    /// Naive O(N^2) DFT of one windowed frame.
    fn naive_dft(frame: &[f64], n: usize) -> Vec<Cpx> {
        let mut out = vec![Cpx::ZERO; n / 2 + 1];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Cpx::ZERO;
            for (i, &x) in frame.iter().enumerate() {
                let theta = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                acc += Cpx::from_angle(theta).scale(x);
            }
            *o = acc;
        }
        out
    }

    #[test]
    fn zero_signal_gives_zero_spectrogram() {
        let wave = MultichannelWaveform::mono(16000, vec![0.0; 2000]).unwrap();
        let spec = stft(&wave, &StftConfig::default()).unwrap();
        assert_eq!(spec.frames, (2000 - 400) / 160 + 1);
        assert!(spec.values.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    #[test]
    fn bin_centered_cosine_concentrates_energy() {
        let n = 64;
        let k0 = 5;
        let fs = 16000u32;
        let f = k0 as f64 * fs as f64 / n as f64;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs as f64).cos())
            .collect();
        let wave = MultichannelWaveform::mono(fs, x.clone()).unwrap();
        let spec = stft(&wave, &rect_cfg(n, n)).unwrap();
        assert_eq!(spec.frames, 1);
        let peak = spec.at(0, 0, k0).abs();
        assert!((peak - n as f64 / 2.0).abs() < 1e-9);
        for k in 0..spec.bins {
            if k != k0 {
                let rel_db = 20.0 * (spec.at(0, 0, k).abs() / peak).max(1e-300).log10();
                assert!(rel_db < -60.0, "bin {k} leaked {rel_db} dB");
            }
        }
        // Cross-check the frame against the naive DFT oracle.
        let oracle = naive_dft(&x, n);
        for k in 0..spec.bins {
            let got = spec.at(0, 0, k);
            assert!((got.re - oracle[k].re).abs() < 1e-9);
            assert!((got.im - oracle[k].im).abs() < 1e-9);
        }
    }

    #[test]
    fn random_frame_matches_naive_dft_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let l = 48;
        let n = 64;
        let x: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wave = MultichannelWaveform::mono(8000, x.clone()).unwrap();
        let spec = stft(&wave, &rect_cfg(l, n)).unwrap();
        // Zero-pad the frame to N for the oracle.
        let mut frame = x.clone();
        frame.resize(n, 0.0);
        let oracle = naive_dft(&frame, n);
        for k in 0..spec.bins {
            let got = spec.at(0, 0, k);
            assert!((got.re - oracle[k].re).abs() < 1e-9);
            assert!((got.im - oracle[k].im).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicated_channel_gives_identical_planes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..1200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wave = MultichannelWaveform::new(16000, vec![x.clone(), x]).unwrap();
        let spec = stft(&wave, &StftConfig::default()).unwrap();
        for t in 0..spec.frames {
            for k in 0..spec.bins {
                assert_eq!(spec.at(t, 0, k), spec.at(t, 1, k));
            }
        }
    }

    #[test]
    fn too_short_signal_errors() {
        let wave = MultichannelWaveform::mono(16000, vec![0.1; 399]).unwrap();
        let err = stft(&wave, &StftConfig::default()).unwrap_err();
        assert!(err.to_string().contains("insufficient samples"));
    }

    #[test]
    fn parseval_rectangular_window() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let n = 256;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wave = MultichannelWaveform::mono(16000, x.clone()).unwrap();
        let spec = stft(&wave, &rect_cfg(n, n)).unwrap();
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        // One-sided spectrum: interior bins count twice for a real signal.
        let mut spec_energy = spec.at(0, 0, 0).abs_sq() + spec.at(0, 0, n / 2).abs_sq();
        for k in 1..n / 2 {
            spec_energy += 2.0 * spec.at(0, 0, k).abs_sq();
        }
        spec_energy /= n as f64;
        let rel = (time_energy - spec_energy).abs() / time_energy;
        assert!(rel < 1e-6, "Parseval mismatch: rel {rel}");
    }

    #[test]
    fn istft_debug_roughly_reconstructs_interior() {
        let cfg = StftConfig {
            window_length: 64,
            hop: 16,
            fft_size: 64,
            window: WindowKind::Hann,
        };
        let x: Vec<f64> = (0..512).map(|i| (i as f64 * 0.1).sin()).collect();
        let wave = MultichannelWaveform::mono(8000, x.clone()).unwrap();
        let spec = stft(&wave, &cfg).unwrap();
        let y = istft_debug(&spec, &cfg, 0, 512).unwrap();
        for i in 64..400 {
            assert!((y[i] - x[i]).abs() < 1e-6, "sample {i}: {} vs {}", y[i], x[i]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn stft_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let len = 700;
            let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(xv, yv)| a * xv + b * yv).collect();
            let cfg = StftConfig {
                window_length: 128,
                hop: 64,
                fft_size: 128,
                window: WindowKind::Hann,
            };
            let sx = stft(&MultichannelWaveform::mono(16000, x).unwrap(), &cfg).unwrap();
            let sy = stft(&MultichannelWaveform::mono(16000, y).unwrap(), &cfg).unwrap();
            let sm = stft(&MultichannelWaveform::mono(16000, mix).unwrap(), &cfg).unwrap();
            let scale: f64 = sm.values.iter().map(|z| z.abs()).fold(0.0, f64::max).max(1.0);
            for i in 0..sm.values.len() {
                let want = sx.values[i].scale(a) + sy.values[i].scale(b);
                let got = sm.values[i];
                prop_assert!((want.re - got.re).abs() <= 1e-9 * scale);
                prop_assert!((want.im - got.im).abs() <= 1e-9 * scale);
            }
        }
    }
}

/// Shared FFT plan cache for repeated fixed-size transforms.
pub struct FftPlans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
    pub size: usize,
}

impl FftPlans {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        FftPlans {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            size,
        }
    }
}
