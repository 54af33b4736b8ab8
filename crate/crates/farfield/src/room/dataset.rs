//! Deterministic synthetic dataset generation.
//!
//! Each "word" of the 12-word lexicon is a 200 ms sum of three sinusoids
//! with a shared Hann amplitude envelope. Tone triples are drawn from an
//! 18-tone quarter-octave-spaced pool arranged so any two words share at
//! most one tone and every tone appears in exactly two words, which keeps
//! the desk-scale recognition task learnable but not trivial.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::wave::{write_wav, MultichannelWaveform};

use super::rir::{simulate_rir_with_beta, wall_reflection, RoomConfig};
use super::scene::mix_scene;
use super::{wrap_azimuth, ArrayGeometry};

pub const NUM_WORDS: usize = 12;
const TONE_POOL: usize = 18;
const WORD_SECONDS: f64 = 0.2;

/// Tone frequencies (Hz) for one word.
fn word_tones(word: usize) -> [f64; 3] {
    assert!(word < NUM_WORDS);
    let pool: Vec<f64> = (0..TONE_POOL)
        .map(|k| 300.0 * 2f64.powf(k as f64 / 6.0))
        .collect();
    // Two interleaved groups of six; every tone is used exactly twice and
    // any two words share at most one tone.
    let idx = if word < 6 {
        [word, word + 6, word + 12]
    } else {
        let w = word - 6;
        [w, 6 + (w + 1) % 6, 12 + (w + 2) % 6]
    };
    [pool[idx[0]], pool[idx[1]], pool[idx[2]]]
}

/// Dry 200 ms waveform for one word at `fs`.
pub fn synthesize_word(word: usize, fs: u32) -> Vec<f64> {
    let n = (WORD_SECONDS * fs as f64).round() as usize;
    let tones = word_tones(word);
    (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            let env = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            env * tones
                .iter()
                .map(|f| (2.0 * std::f64::consts::PI * f * t).sin() * 0.25)
                .sum::<f64>()
        })
        .collect()
}

/// Word token names: "w0" .. "w11".
pub fn word_name(word: usize) -> String {
    format!("w{word}")
}

pub fn word_index(name: &str) -> Option<usize> {
    let idx: usize = name.strip_prefix('w')?.parse().ok()?;
    (idx < NUM_WORDS).then_some(idx)
}

/// SNR sampling scheme: normal, truncated to [min_db, max_db].
/// `enabled: false` generates noise-free scenes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrSpec {
    pub enabled: bool,
    pub mean_db: f64,
    pub std_db: f64,
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for SnrSpec {
    fn default() -> Self {
        SnrSpec {
            enabled: true,
            mean_db: 10.0,
            std_db: 3.3,
            min_db: 0.0,
            max_db: 20.0,
        }
    }
}

impl SnrSpec {
    pub fn sample(&self, rng: &mut impl Rng) -> Option<f64> {
        if !self.enabled {
            return None;
        }
        let dist = Normal::new(self.mean_db, self.std_db).expect("valid normal");
        loop {
            let v = dist.sample(rng);
            if v >= self.min_db && v <= self.max_db {
                return Some(v);
            }
        }
    }
}

/// Sampling ranges for scene generation. All randomness is derived from
/// (seed, split, utterance index), so regenerating with the same spec and
/// seed is byte-identical, and changing only `spacing_m` keeps every other
/// draw fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub sample_rate: u32,
    pub channels: usize,
    pub spacing_m: f64,
    pub room_min: [f64; 3],
    pub room_max: [f64; 3],
    pub rt60_range: [f64; 2],
    pub snr: SnrSpec,
    /// Source azimuth range in degrees relative to broadside.
    pub azimuth_range: [f64; 2],
    /// Horizontal source-to-array distance range in meters.
    pub distance_range: [f64; 2],
    /// Words per utterance, inclusive range.
    pub words_range: [usize; 2],
    /// Source height band in meters.
    pub source_height: [f64; 2],
    /// Noise height band in meters.
    pub noise_height: [f64; 2],
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            sample_rate: 16000,
            channels: 2,
            spacing_m: 0.04,
            room_min: [2.8, 2.8, 2.2],
            room_max: [6.0, 6.0, 3.2],
            rt60_range: [0.05, 0.5],
            snr: SnrSpec::default(),
            azimuth_range: [-90.0, 90.0],
            distance_range: [0.5, 7.0],
            words_range: [2, 8],
            source_height: [0.6, 2.0],
            noise_height: [0.4, 3.0],
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::Config("sample_rate must be > 0".into()));
        }
        if self.channels < 1 {
            return Err(Error::Config("channels must be >= 1".into()));
        }
        if self.spacing_m <= 0.0 {
            return Err(Error::Config("spacing_m must be positive".into()));
        }
        for (lo, hi, name) in [
            (self.rt60_range[0], self.rt60_range[1], "rt60_range"),
            (self.azimuth_range[0], self.azimuth_range[1], "azimuth_range"),
            (self.distance_range[0], self.distance_range[1], "distance_range"),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("{name}: lo > hi")));
            }
        }
        if self.rt60_range[0] <= 0.0 {
            return Err(Error::Config("rt60_range must be positive".into()));
        }
        if self.words_range[0] < 1 || self.words_range[0] > self.words_range[1] {
            return Err(Error::Config("words_range invalid".into()));
        }
        if self
            .room_min
            .iter()
            .zip(&self.room_max)
            .any(|(lo, hi)| *lo <= 0.0 || lo > hi)
        {
            return Err(Error::Config("room bounds invalid".into()));
        }
        Ok(())
    }
}

/// One manifest line. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtteranceRecord {
    pub path: String,
    pub transcript: String,
    pub azimuth_deg: f64,
    /// None for noise-free scenes.
    pub snr_db: Option<f64>,
    pub rt60_s: f64,
    pub spacing_m: f64,
    pub split: String,
}

impl UtteranceRecord {
    pub fn utt_id(&self) -> String {
        Path::new(&self.path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.clone())
    }

    pub fn resolve(&self, manifest_dir: &Path) -> PathBuf {
        manifest_dir.join(&self.path)
    }

    pub fn words(&self) -> Vec<String> {
        self.transcript
            .split_whitespace()
            .map(|s| s.to_string())
            .collect()
    }
}

/// Generate `n` utterances for `split` under `out_dir` and return the
/// records. WAVs land in `out_dir/wav/`; the caller writes the manifest.
pub fn generate_split(
    spec: &DatasetSpec,
    n: usize,
    seed: u64,
    split: &str,
    out_dir: &Path,
) -> Result<Vec<UtteranceRecord>> {
    spec.validate()?;
    let wav_dir = out_dir.join("wav");
    std::fs::create_dir_all(&wav_dir)?;

    let results: Vec<Result<UtteranceRecord>> = (0..n)
        .into_par_iter()
        .map(|i| generate_utterance(spec, seed, split, i, out_dir))
        .collect();
    results.into_iter().collect()
}

fn generate_utterance(
    spec: &DatasetSpec,
    seed: u64,
    split: &str,
    index: usize,
    out_dir: &Path,
) -> Result<UtteranceRecord> {
    let fs = spec.sample_rate;
    let mut rng = derive_rng(seed, &format!("utt/{split}"), index as u64);

    // Order matters: everything before the array build must not depend on
    // spacing so spacing sweeps reuse identical scenes.
    let dims = [
        rng.gen_range(spec.room_min[0]..=spec.room_max[0]),
        rng.gen_range(spec.room_min[1]..=spec.room_max[1]),
        rng.gen_range(spec.room_min[2]..=spec.room_max[2]),
    ];
    let mut room = RoomConfig::new(dims, rng.gen_range(spec.rt60_range[0]..=spec.rt60_range[1]));
    // Clamp up to what the room can physically realize.
    let min_rt60 = room.min_feasible_rt60(0.95);
    if room.rt60 < min_rt60 {
        room.rt60 = min_rt60;
    }

    let center = [
        dims[0] / 2.0 + rng.gen_range(-0.3..0.3),
        dims[1] / 2.0 + rng.gen_range(-0.3..0.3),
        rng.gen_range(1.0..1.4f64).clamp(0.5, dims[2] - 0.4),
    ];

    let azimuth = wrap_azimuth(rng.gen_range(spec.azimuth_range[0]..=spec.azimuth_range[1]));
    let src_dist = rng.gen_range(spec.distance_range[0]..=spec.distance_range[1]);
    let src_height = rng
        .gen_range(spec.source_height[0]..=spec.source_height[1])
        .clamp(0.3, dims[2] - 0.2);
    let src = place_in_room(&dims, center, azimuth, src_dist, src_height);

    let noise_az = rng.gen_range(-180.0..180.0);
    let noise_dist = rng.gen_range(0.5..6.0);
    let noise_height = rng
        .gen_range(spec.noise_height[0]..=spec.noise_height[1])
        .clamp(0.2, dims[2] - 0.2);
    let noise_pos = place_in_room(&dims, center, noise_az, noise_dist, noise_height);

    let snr_db = spec.snr.sample(&mut rng);

    let n_words = rng.gen_range(spec.words_range[0]..=spec.words_range[1]);
    let words: Vec<usize> = (0..n_words).map(|_| rng.gen_range(0..NUM_WORDS)).collect();

    // Dry utterance: lead/tail silence and short gaps between words.
    let lead = (0.06 * fs as f64) as usize;
    let mut clean = vec![0.0; lead];
    for (wi, w) in words.iter().enumerate() {
        if wi > 0 {
            let gap = rng.gen_range(0.02..0.05);
            clean.extend(std::iter::repeat(0.0).take((gap * fs as f64) as usize));
        }
        clean.extend(synthesize_word(*w, fs));
    }
    clean.extend(std::iter::repeat(0.0).take(lead));

    // Array geometry (spacing enters only here).
    let geom = ArrayGeometry::linear(center, spec.channels, spec.spacing_m)?;

    let beta = wall_reflection(&room)?;
    let rirs_src: Vec<Vec<f64>> = geom
        .mic_positions
        .iter()
        .map(|m| simulate_rir_with_beta(&room, beta, *m, src, None, fs))
        .collect::<Result<_>>()?;
    let mixed = if snr_db.is_some() {
        let noise_len = clean.len() + (room.rt60 * fs as f64) as usize + 1024;
        let noise: Vec<f64> = (0..noise_len)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                v * 0.3
            })
            .collect();
        let rirs_noise: Vec<Vec<f64>> = geom
            .mic_positions
            .iter()
            .map(|m| simulate_rir_with_beta(&room, beta, *m, noise_pos, None, fs))
            .collect::<Result<_>>()?;
        mix_scene(&clean, &noise, &rirs_src, &rirs_noise, snr_db, fs)?
    } else {
        mix_scene(&clean, &[], &rirs_src, &[], None, fs)?
    };

    // Normalize to a fixed peak so PCM16 quantization noise is uniform.
    let peak = mixed
        .channels
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { 0.9 / peak } else { 1.0 };
    let channels = mixed
        .channels
        .iter()
        .map(|c| c.iter().map(|v| v * scale).collect())
        .collect();
    let wave = MultichannelWaveform::new(fs, channels)?;

    let rel_path = format!("wav/{split}_{index:06}.wav");
    write_wav(&out_dir.join(&rel_path), &wave)?;

    Ok(UtteranceRecord {
        path: rel_path,
        transcript: words
            .iter()
            .map(|w| word_name(*w))
            .collect::<Vec<_>>()
            .join(" "),
        azimuth_deg: azimuth,
        snr_db,
        rt60_s: room.rt60,
        spacing_m: spec.spacing_m,
        split: split.to_string(),
    })
}

/// Position at (azimuth, horizontal distance, height) from `center`,
/// pulled inside the walls with a 0.3 m margin if necessary.
fn place_in_room(
    dims: &[f64; 3],
    center: [f64; 3],
    azimuth_deg: f64,
    dist: f64,
    height: f64,
) -> [f64; 3] {
    let margin = 0.3;
    let az = azimuth_deg.to_radians();
    let dir = [az.sin(), az.cos()];
    // Largest distance that stays inside the margin box.
    let mut max_d = f64::INFINITY;
    for (axis, d) in dir.iter().enumerate() {
        if d.abs() > 1e-9 {
            let bound = if *d > 0.0 {
                dims[axis] - margin - center[axis]
            } else {
                center[axis] - margin
            };
            max_d = max_d.min(bound.max(0.05) / d.abs());
        }
    }
    let r = dist.min(max_d).max(0.05);
    [
        center[0] + r * dir[0],
        center[1] + r * dir[1],
        height.clamp(margin, dims[2] - margin),
    ]
}

pub fn write_manifest(path: &Path, records: &[UtteranceRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut f, rec)
            .map_err(|e| Error::Config(format!("manifest serialize: {e}")))?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<UtteranceRecord>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: UtteranceRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
