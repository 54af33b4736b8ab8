//! Multichannel time-domain waveforms and 16-bit PCM WAV I/O.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Time-domain samples for `C >= 1` microphones at a fixed sample rate.
/// All channels have equal length; samples are `f64` in roughly [-1, 1]
/// when read from PCM.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelWaveform {
    pub sample_rate: u32,
    /// One sample buffer per channel, equal lengths.
    pub channels: Vec<Vec<f64>>,
}

impl MultichannelWaveform {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate must be > 0"));
        }
        if channels.is_empty() {
            return Err(Error::invalid("waveform needs at least one channel"));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::invalid("all channels must have equal length"));
        }
        if channels
            .iter()
            .any(|c| c.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::invalid("waveform contains non-finite samples"));
        }
        Ok(MultichannelWaveform {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }
}

fn rd_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn rd_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes(b[at..at + 2].try_into().unwrap())
}

/// Read a PCM 16-bit little-endian WAV file (mono or interleaved
/// multichannel). Any other encoding is rejected.
pub fn read_wav(path: &Path) -> Result<MultichannelWaveform> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 44 || &buf[0..4] != b"RIFF" || &buf[8..12] != b"WAVE" {
        return Err(Error::Wav(format!("{}: not a RIFF/WAVE file", path.display())));
    }

    // Walk chunks; require a PCM16 fmt chunk before data.
    let mut pos = 12;
    let mut fmt: Option<(u16, u32)> = None; // (channels, sample_rate)
    let mut data: Option<(usize, usize)> = None; // (offset, len)
    while pos + 8 <= buf.len() {
        let id = &buf[pos..pos + 4];
        let size = rd_u32(&buf, pos + 4) as usize;
        let body = pos + 8;
        if body + size > buf.len() {
            return Err(Error::Wav(format!("{}: truncated chunk", path.display())));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Wav("fmt chunk too short".into()));
                }
                let audio_format = rd_u16(&buf, body);
                let channels = rd_u16(&buf, body + 2);
                let sample_rate = rd_u32(&buf, body + 4);
                let bits = rd_u16(&buf, body + 14);
                if audio_format != 1 {
                    return Err(Error::Wav(format!(
                        "unsupported audio format {audio_format}; only PCM (1) is supported"
                    )));
                }
                if bits != 16 {
                    return Err(Error::Wav(format!(
                        "unsupported bit depth {bits}; only 16-bit PCM is supported"
                    )));
                }
                if channels == 0 {
                    return Err(Error::Wav("zero channels".into()));
                }
                fmt = Some((channels, sample_rate));
            }
            b"data" => data = Some((body, size)),
            _ => {}
        }
        pos = body + size + (size & 1); // chunks are word-aligned
    }

    let (n_ch, sample_rate) =
        fmt.ok_or_else(|| Error::Wav(format!("{}: missing fmt chunk", path.display())))?;
    let (off, len) =
        data.ok_or_else(|| Error::Wav(format!("{}: missing data chunk", path.display())))?;
    let n_ch = n_ch as usize;
    let n_frames = len / (2 * n_ch);
    let mut channels = vec![Vec::with_capacity(n_frames); n_ch];
    for f in 0..n_frames {
        for (c, chan) in channels.iter_mut().enumerate() {
            let at = off + 2 * (f * n_ch + c);
            let v = i16::from_le_bytes([buf[at], buf[at + 1]]);
            chan.push(v as f64 / 32768.0);
        }
    }
    MultichannelWaveform::new(sample_rate, channels)
}

/// Write a PCM 16-bit little-endian WAV file, interleaving channels.
/// Samples are clamped to [-1, 1) before quantization.
pub fn write_wav(path: &Path, wave: &MultichannelWaveform) -> Result<()> {
    let n_ch = wave.num_channels();
    let n_frames = wave.len();
    let data_len = (n_frames * n_ch * 2) as u32;
    let byte_rate = wave.sample_rate * n_ch as u32 * 2;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&(n_ch as u16).to_le_bytes());
    out.extend_from_slice(&wave.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&((n_ch * 2) as u16).to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for f in 0..n_frames {
        for chan in &wave.channels {
            let v = (chan[f] * 32768.0).clamp(-32768.0, 32767.0) as i16;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}
