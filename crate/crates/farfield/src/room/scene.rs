//! Scene mixing: spatialize a dry source and a noise source through
//! per-microphone impulse responses and combine them at a target SNR.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::wave::MultichannelWaveform;

/// Linear convolution via FFT; output length is `signal + kernel - 1`.
pub fn convolve(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    if signal.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let out_len = signal.len() + kernel.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut a: Vec<Complex<f64>> = signal.iter().map(|x| Complex::new(*x, 0.0)).collect();
    a.resize(n, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = kernel.iter().map(|x| Complex::new(*x, 0.0)).collect();
    b.resize(n, Complex::new(0.0, 0.0));
    fft.process(&mut a);
    fft.process(&mut b);
    for (av, bv) in a.iter_mut().zip(&b) {
        *av *= bv;
    }
    ifft.process(&mut a);
    let scale = 1.0 / n as f64;
    a[..out_len].iter().map(|z| z.re * scale).collect()
}

/// Convolve `clean` and `noise` with their per-mic RIRs and mix them so the
/// reverberant-speech-to-noise power ratio over the active region equals
/// `snr_db`. `snr_db = None` means no noise at all (the +inf sentinel).
///
/// The same noise realization feeds every microphone; only the RIRs differ.
/// The noise is looped or cropped as needed to cover the speech.
pub fn mix_scene(
    clean: &[f64],
    noise: &[f64],
    rirs_src: &[Vec<f64>],
    rirs_noise: &[Vec<f64>],
    snr_db: Option<f64>,
    sample_rate: u32,
) -> Result<MultichannelWaveform> {
    if rirs_src.is_empty() {
        return Err(Error::invalid("need at least one source RIR"));
    }
    let with_noise = match snr_db {
        None => false,
        Some(v) if v.is_infinite() && v > 0.0 => false,
        Some(v) if !v.is_finite() => return Err(Error::invalid("snr_db must be finite or +inf")),
        Some(_) => true,
    };
    if with_noise && rirs_noise.len() != rirs_src.len() {
        return Err(Error::shape(format!(
            "{} noise RIRs for {} source RIRs",
            rirs_noise.len(),
            rirs_src.len()
        )));
    }

    // Reverberant speech per mic.
    let speech: Vec<Vec<f64>> = rirs_src.iter().map(|r| convolve(clean, r)).collect();
    let out_len = speech.iter().map(|s| s.len()).max().unwrap();
    let mut channels: Vec<Vec<f64>> = speech
        .into_iter()
        .map(|mut s| {
            s.resize(out_len, 0.0);
            s
        })
        .collect();

    // Active region: where the reverberant speech carries energy.
    let peak = channels
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if peak <= 0.0 {
        return Err(Error::invalid("zero-power source"));
    }
    let thresh = 1e-4 * peak;
    let first = channels
        .iter()
        .filter_map(|c| c.iter().position(|v| v.abs() > thresh))
        .min()
        .unwrap_or(0);
    let last = channels
        .iter()
        .filter_map(|c| c.iter().rposition(|v| v.abs() > thresh))
        .max()
        .unwrap_or(out_len - 1);

    if with_noise {
        let snr = snr_db.unwrap();
        // Loop the noise to cover the full output once convolved.
        let needed = out_len;
        let mut looped = Vec::with_capacity(needed);
        while looped.len() < needed {
            let take = (needed - looped.len()).min(noise.len());
            if take == 0 {
                return Err(Error::invalid("zero-length noise with finite snr"));
            }
            looped.extend_from_slice(&noise[..take]);
        }
        let spatial_noise: Vec<Vec<f64>> = rirs_noise
            .iter()
            .map(|r| {
                let mut n = convolve(&looped, r);
                n.resize(out_len, 0.0);
                n
            })
            .collect();

        let p_speech: f64 = channels
            .iter()
            .map(|c| c[first..=last].iter().map(|v| v * v).sum::<f64>())
            .sum();
        let p_noise: f64 = spatial_noise
            .iter()
            .map(|c| c[first..=last].iter().map(|v| v * v).sum::<f64>())
            .sum();
        if p_noise <= 0.0 {
            return Err(Error::invalid("zero-power noise with finite snr"));
        }
        let gain = (p_speech / (p_noise * 10f64.powf(snr / 10.0))).sqrt();
        for (ch, nz) in channels.iter_mut().zip(&spatial_noise) {
            for (c, n) in ch.iter_mut().zip(nz) {
                *c += gain * n;
            }
        }
    }

    MultichannelWaveform::new(sample_rate, channels)
}

/// Measured speech-to-noise power ratio in dB given the separated parts.
/// Test oracle helper; mirrors the active-region rule used by `mix_scene`.
pub fn measure_snr_db(speech: &[Vec<f64>], noise: &[Vec<f64>]) -> f64 {
    let peak = speech
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let thresh = 1e-4 * peak;
    let first = speech
        .iter()
        .filter_map(|c| c.iter().position(|v| v.abs() > thresh))
        .min()
        .unwrap_or(0);
    let last = speech
        .iter()
        .filter_map(|c| c.iter().rposition(|v| v.abs() > thresh))
        .max()
        .unwrap_or(0);
    let ps: f64 = speech
        .iter()
        .map(|c| c[first..=last].iter().map(|v| v * v).sum::<f64>())
        .sum();
    let pn: f64 = noise
        .iter()
        .map(|c| c[first..=last].iter().map(|v| v * v).sum::<f64>())
        .sum();
    10.0 * (ps / pn).log10()
}

/// Inter-channel lag of the strongest cross-correlation peak, in samples,
/// refined by parabolic interpolation. Positive means `b` lags `a`.
pub fn xcorr_tdoa(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let fft_len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let ifft = planner.plan_fft_inverse(fft_len);

    let mut fa: Vec<Complex<f64>> = a.iter().map(|x| Complex::new(*x, 0.0)).collect();
    fa.resize(fft_len, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|x| Complex::new(*x, 0.0)).collect();
    fb.resize(fft_len, Complex::new(0.0, 0.0));
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = y * x.conj();
    }
    ifft.process(&mut fa);
    let corr: Vec<f64> = fa.iter().map(|z| z.re).collect();

    // Strongest positive correlation over circular lags, interpreted as
    // signed lags. (Searching |corr| would lock onto the anti-correlation
    // peak half a period away on tonal signals.)
    let peak_idx = corr
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .unwrap()
        .0;
    let prev = corr[(peak_idx + fft_len - 1) % fft_len];
    let next = corr[(peak_idx + 1) % fft_len];
    let cur = corr[peak_idx];
    let denom = prev - 2.0 * cur + next;
    let frac = if denom.abs() > 1e-30 {
        0.5 * (prev - next) / denom
    } else {
        0.0
    };
    let signed = if peak_idx > fft_len / 2 {
        peak_idx as f64 - fft_len as f64
    } else {
        peak_idx as f64
    };
    signed + frac
}
