//! The complete baseline frontend (beamform, analyze, mel-compress) and
//! the binary feature cache shared with the training harness.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::room::ArrayGeometry;
use crate::stft::{stft, StftConfig};
use crate::wave::MultichannelWaveform;

use super::{delay_and_sum, estimate_doa_gccphat, select_direction, LookDirectionBank, MelFilterbank};

/// Row-major `[frames x dim]` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrames {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl FeatureFrames {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % dim.max(1), 0);
        FeatureFrames { dim, data }
    }

    pub fn num_frames(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }
}

/// Classical frontend: estimate the DOA, pick a look direction from the
/// bank (possibly with injected errors), delay-and-sum, then 40-band
/// log-mel features per frame.
pub fn dsp_frontend(
    wave: &MultichannelWaveform,
    geometry: &ArrayGeometry,
    bank: &LookDirectionBank,
    error_rate: f64,
    rng: &mut impl Rng,
    cfg: &StftConfig,
    mel: &MelFilterbank,
) -> Result<FeatureFrames> {
    let enhanced = if wave.num_channels() >= 2 {
        let doa = estimate_doa_gccphat(wave, geometry)?;
        let steer = select_direction(bank, &doa, error_rate, rng)?;
        delay_and_sum(wave, geometry, steer)?
    } else {
        wave.channels[0].clone()
    };
    let mono = MultichannelWaveform::mono(wave.sample_rate, enhanced)?;
    let spec = stft(&mono, cfg)?;
    let mut data = Vec::with_capacity(spec.frames * mel.num_filters);
    let mut power = vec![0.0; spec.bins];
    for t in 0..spec.frames {
        for (k, p) in power.iter_mut().enumerate() {
            *p = spec.at(t, 0, k).abs_sq();
        }
        data.extend(mel.apply_log(&power)?);
    }
    Ok(FeatureFrames::new(mel.num_filters, data))
}

/// Write features as little-endian 32-bit floats with a (frames, dim)
/// header of little-endian u32s.
pub fn write_feature_cache(path: &Path, frames: &FeatureFrames) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = Vec::with_capacity(8 + 4 * frames.data.len());
    out.extend_from_slice(&(frames.num_frames() as u32).to_le_bytes());
    out.extend_from_slice(&(frames.dim as u32).to_le_bytes());
    for v in &frames.data {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

pub fn read_feature_cache(path: &Path) -> Result<FeatureFrames> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 8 {
        return Err(Error::invalid(format!(
            "{}: feature cache too short",
            path.display()
        )));
    }
    let t = u32::from_le_bytes(buf[0..4].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let need = 8 + 4 * t * dim;
    if buf.len() != need {
        return Err(Error::invalid(format!(
            "{}: feature cache length {} != expected {need}",
            path.display(),
            buf.len()
        )));
    }
    let data = buf[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(FeatureFrames::new(dim, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::DEFAULT_LOOK_DIRECTIONS;
    use crate::rng::derive_rng;

    fn setup() -> (ArrayGeometry, LookDirectionBank, StftConfig, MelFilterbank) {
        let geom = ArrayGeometry::linear([2.0, 2.0, 1.3], 2, 0.04).unwrap();
        let bank = LookDirectionBank::new(&geom, &DEFAULT_LOOK_DIRECTIONS).unwrap();
        let cfg = StftConfig::default();
        let mel = MelFilterbank::new(40, 16000, cfg.fft_size, 0.0, 8000.0).unwrap();
        (geom, bank, cfg, mel)
    }

    #[test]
    fn silence_gives_log_eps_frames() {
        let (geom, bank, cfg, mel) = setup();
        let wave =
            MultichannelWaveform::new(16000, vec![vec![0.0; 4000], vec![0.0; 4000]]).unwrap();
        let mut rng = derive_rng(0, "t", 0);
        let feats = dsp_frontend(&wave, &geom, &bank, 0.0, &mut rng, &cfg, &mel).unwrap();
        assert_eq!(feats.dim, 40);
        let want = (1e-7f64).ln();
        for v in &feats.data {
            assert!((v - want).abs() < 1e-9);
        }
    }

    #[test]
    fn white_noise_has_flat_mel_spectrum() {
        use rand::Rng;
        let (geom, bank, cfg, mel) = setup();
        let mut nrng = derive_rng(5, "noise", 1);
        // 100+ frames of 2-channel white noise.
        let len = 160 * 105 + 400;
        let ch: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..len).map(|_| nrng.gen_range(-0.5..0.5)).collect())
            .collect();
        let wave = MultichannelWaveform::new(16000, ch).unwrap();
        let mut rng = derive_rng(0, "t", 0);
        let feats = dsp_frontend(&wave, &geom, &bank, 0.0, &mut rng, &cfg, &mel).unwrap();
        assert!(feats.num_frames() >= 100);
        let mut mean = vec![0.0; 40];
        for t in 0..feats.num_frames() {
            for (m, v) in mean.iter_mut().zip(feats.frame(t)) {
                *m += v.exp();
            }
        }
        let to_db = |x: f64| 10.0 * x.log10();
        let lo = mean.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Delay-and-sum at broadside-ish steering keeps the average flat;
        // allow the spec'd 6 dB spread.
        assert!(to_db(hi) - to_db(lo) < 6.0, "spread {}", to_db(hi) - to_db(lo));
    }

    #[test]
    fn feature_dim_is_forty() {
        let (geom, bank, cfg, mel) = setup();
        let x: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.3).sin() * 0.2).collect();
        let wave = MultichannelWaveform::new(16000, vec![x.clone(), x]).unwrap();
        let mut rng = derive_rng(0, "t", 0);
        let feats = dsp_frontend(&wave, &geom, &bank, 0.0, &mut rng, &cfg, &mel).unwrap();
        assert_eq!(feats.dim, 40);
        assert_eq!(feats.num_frames(), (4000 - 400) / 160 + 1);
    }

    #[test]
    fn feature_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let frames = FeatureFrames::new(
            3,
            vec![0.5f32 as f64, -1.25, 3.75, 0.0, 100.0, -0.015625],
        );
        write_feature_cache(&path, &frames).unwrap();
        let back = read_feature_cache(&path).unwrap();
        // Values chosen representable in f32: exact round trip.
        assert_eq!(frames, back);
    }

    #[test]
    fn truncated_cache_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, [1, 0, 0, 0, 2, 0, 0, 0, 9]).unwrap();
        assert!(read_feature_cache(&path).is_err());
    }
}
