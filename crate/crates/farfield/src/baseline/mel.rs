//! Triangular mel filterbank over one-sided power spectra.

use crate::error::{Error, Result};

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// `num_filters` triangular filters spaced uniformly on the mel scale
/// between `fmin` and `fmax`. Each filter is normalized to unit weight sum
/// so white noise excites every band equally.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    pub num_filters: usize,
    pub num_bins: usize,
    /// Dense weights, `[filter][bin]`.
    weights: Vec<f64>,
    pub log_eps: f64,
}

impl MelFilterbank {
    pub fn new(
        num_filters: usize,
        sample_rate: u32,
        fft_size: usize,
        fmin: f64,
        fmax: f64,
    ) -> Result<Self> {
        if num_filters == 0 {
            return Err(Error::invalid("need at least one mel filter"));
        }
        let nyquist = sample_rate as f64 / 2.0;
        if !(0.0..nyquist + 1e-9).contains(&fmin) || fmax <= fmin || fmax > nyquist + 1e-9 {
            return Err(Error::invalid(format!(
                "mel band [{fmin}, {fmax}] outside [0, {nyquist}]"
            )));
        }
        let num_bins = fft_size / 2 + 1;
        let edges: Vec<f64> = {
            let m0 = hz_to_mel(fmin);
            let m1 = hz_to_mel(fmax);
            (0..num_filters + 2)
                .map(|i| mel_to_hz(m0 + (m1 - m0) * i as f64 / (num_filters + 1) as f64))
                .collect()
        };
        let bin_hz = sample_rate as f64 / fft_size as f64;
        let mut weights = vec![0.0; num_filters * num_bins];
        for f in 0..num_filters {
            let (lo, mid, hi) = (edges[f], edges[f + 1], edges[f + 2]);
            let row = &mut weights[f * num_bins..(f + 1) * num_bins];
            for (k, w) in row.iter_mut().enumerate() {
                let freq = k as f64 * bin_hz;
                *w = if freq <= lo || freq >= hi {
                    0.0
                } else if freq <= mid {
                    (freq - lo) / (mid - lo)
                } else {
                    (hi - freq) / (hi - mid)
                };
            }
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                for w in row.iter_mut() {
                    *w /= sum;
                }
            }
        }
        Ok(MelFilterbank {
            num_filters,
            num_bins,
            weights,
            log_eps: 1e-7,
        })
    }

    /// Log-compressed band energies of a one-sided power spectrum.
    pub fn apply_log(&self, power: &[f64]) -> Result<Vec<f64>> {
        if power.len() != self.num_bins {
            return Err(Error::shape(format!(
                "power spectrum has {} bins, filterbank expects {}",
                power.len(),
                self.num_bins
            )));
        }
        Ok((0..self.num_filters)
            .map(|f| {
                let row = &self.weights[f * self.num_bins..(f + 1) * self.num_bins];
                let e: f64 = row.iter().zip(power).map(|(w, p)| w * p).sum();
                (e + self.log_eps).ln()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mel_scale_round_trip() {
        for f in [0.0, 150.0, 1000.0, 4000.0, 7999.0] {
            assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-6);
        }
    }

    #[test]
    fn forty_filters_cover_all_bins_once_normalized() {
        let fb = MelFilterbank::new(40, 16000, 512, 0.0, 8000.0).unwrap();
        assert_eq!(fb.num_filters, 40);
        assert_eq!(fb.num_bins, 257);
        // Every filter touches at least one bin.
        for f in 0..40 {
            let sum: f64 = fb.weights[f * 257..(f + 1) * 257].iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "filter {f} sum {sum}");
        }
    }

    #[test]
    fn silence_maps_to_log_eps() {
        let fb = MelFilterbank::new(40, 16000, 512, 0.0, 8000.0).unwrap();
        let out = fb.apply_log(&vec![0.0; 257]).unwrap();
        for v in out {
            assert!((v - (1e-7f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_is_roughly_flat() {
        // Expected band energy is equal across filters thanks to the unit
        // weight-sum normalization; averaging many frames kills variance.
        let fb = MelFilterbank::new(40, 16000, 512, 0.0, 8000.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let frames = 400;
        let mut mean = vec![0.0; 40];
        for _ in 0..frames {
            // Flat expected power spectrum.
            let power: Vec<f64> = (0..257).map(|_| rng.gen_range(0.0..2.0)).collect();
            let bands = fb.apply_log(&power).unwrap();
            for (m, b) in mean.iter_mut().zip(&bands) {
                *m += b.exp();
            }
        }
        let to_db = |x: f64| 10.0 * x.log10();
        let lo = mean.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            to_db(hi) - to_db(lo) < 6.0,
            "band spread {} dB",
            to_db(hi) - to_db(lo)
        );
    }
}
