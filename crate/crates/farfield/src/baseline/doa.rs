//! GCC-PHAT direction-of-arrival estimation and look-direction selection
//! with controlled error injection.

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::room::{wrap_azimuth, ArrayGeometry, SPEED_OF_SOUND};
use crate::wave::MultichannelWaveform;

use super::LookDirectionBank;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaEstimate {
    /// Degrees in (-180, 180]; a 2-mic line resolves only the front
    /// half-plane, so estimates land in [-90, 90].
    pub azimuth_deg: f64,
    /// Heuristic peak sharpness in [0, 1].
    pub confidence: f64,
}

/// Estimate the source azimuth of a 2-channel recording from the
/// phase-transform cross-correlation peak, inverted through the arcsine of
/// the inter-mic time difference. Front/back ambiguity resolves to the
/// front half-plane by convention.
pub fn estimate_doa_gccphat(
    wave: &MultichannelWaveform,
    geometry: &ArrayGeometry,
) -> Result<DoaEstimate> {
    if wave.num_channels() != 2 || geometry.num_mics() != 2 {
        return Err(Error::invalid(
            "estimate_doa_gccphat expects exactly 2 channels",
        ));
    }
    let fs = wave.sample_rate as f64;
    let spacing = (geometry.mic_positions[1][0] - geometry.mic_positions[0][0]).abs();
    let max_lag = spacing * fs / SPEED_OF_SOUND;
    if max_lag < 1.0 {
        return Err(Error::invalid(format!(
            "array too small to resolve: spacing {spacing} m spans {max_lag:.2} samples"
        )));
    }

    let n = wave.len();
    let fft_len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let ifft = planner.plan_fft_inverse(fft_len);

    let load = |x: &[f64]| -> Vec<Complex<f64>> {
        let mut v: Vec<Complex<f64>> = x.iter().map(|s| Complex::new(*s, 0.0)).collect();
        v.resize(fft_len, Complex::new(0.0, 0.0));
        v
    };
    let mut f0 = load(&wave.channels[0]);
    let mut f1 = load(&wave.channels[1]);
    fft.process(&mut f0);
    fft.process(&mut f1);
    // Phase transform: keep only the cross-spectrum phase.
    for (a, b) in f0.iter_mut().zip(&f1) {
        let g = *a * b.conj();
        let mag = g.norm();
        *a = if mag > 1e-12 { g / mag } else { Complex::new(0.0, 0.0) };
    }
    ifft.process(&mut f0);

    // Search lags within the physical span (plus one sample of slack).
    let span = max_lag.ceil() as isize + 1;
    let at = |lag: isize| -> f64 {
        let idx = lag.rem_euclid(fft_len as isize) as usize;
        f0[idx].re
    };
    let (mut best_lag, mut best_val) = (0isize, f64::NEG_INFINITY);
    let mut total = 0.0;
    for lag in -span..=span {
        let v = at(lag);
        total += v.max(0.0);
        if v > best_val {
            best_val = v;
            best_lag = lag;
        }
    }
    // Parabolic refinement around the integer peak.
    let (prev, cur, next) = (at(best_lag - 1), at(best_lag), at(best_lag + 1));
    let denom = prev - 2.0 * cur + next;
    let frac = if denom.abs() > 1e-30 {
        (0.5 * (prev - next) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let lag = best_lag as f64 + frac;

    // Positive lag means channel 0 lags channel 1, i.e. the source sits on
    // the +x side (positive azimuth).
    let sin_theta = (lag / max_lag).clamp(-1.0, 1.0);
    let azimuth_deg = wrap_azimuth(sin_theta.asin().to_degrees());
    let confidence = if total > 0.0 {
        (best_val / total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DoaEstimate {
        azimuth_deg,
        confidence,
    })
}

/// Pick a look direction for the estimated DOA. With probability
/// `1 - error_rate` this is the angularly nearest bank direction; otherwise
/// a uniformly random *different* direction, which simulates a DOA module
/// with a controlled failure rate.
pub fn select_direction(
    bank: &LookDirectionBank,
    doa: &DoaEstimate,
    error_rate: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    if bank.is_empty() {
        return Err(Error::invalid("empty look-direction bank"));
    }
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(Error::invalid(format!(
            "error_rate {error_rate} outside [0, 1]"
        )));
    }
    let nearest = bank.nearest(doa.azimuth_deg);
    if bank.len() > 1 && rng.gen::<f64>() < error_rate {
        let mut pick = rng.gen_range(0..bank.len() - 1);
        if pick >= nearest {
            pick += 1;
        }
        Ok(bank.directions[pick])
    } else {
        Ok(bank.directions[nearest])
    }
}
