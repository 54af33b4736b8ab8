//! Windowed-sinc fractional delays.
//!
//! Both the room simulator (sub-sample direct-path arrival times) and the
//! delay-and-sum beamformer (steering delays) need signals shifted by
//! non-integer sample counts. A 16-tap Hann-windowed sinc keeps sub-sample
//! timing representable while staying exact for integer delays.

/// Number of taps on each side of the interpolation center.
pub const SINC_HALF_TAPS: usize = 8;

/// Windowed-sinc interpolation kernel for a fractional offset in [0, 1).
/// Tap `j` multiplies the sample at integer position `floor(pos) - 7 + j`;
/// the kernel spans 16 samples. Exact unit impulse when `frac == 0`.
pub fn sinc_kernel(frac: f64) -> [f64; 2 * SINC_HALF_TAPS] {
    let mut taps = [0.0; 2 * SINC_HALF_TAPS];
    // sin(pi*(j - 7 - frac)) for integer j alternates sign with
    // |sin(pi*frac)|, so one sine evaluation covers every tap.
    let s = (std::f64::consts::PI * frac).sin();
    for (j, tap) in taps.iter_mut().enumerate() {
        // Offset of this tap from the interpolation point.
        let x = j as f64 - (SINC_HALF_TAPS - 1) as f64 - frac;
        let sinc = if x.abs() < 1e-12 {
            1.0
        } else {
            // sin(pi*x) = (-1)^j * sin(pi*frac)
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * s / (std::f64::consts::PI * x)
        };
        // Hann window centered on the sinc peak, zero at |x| = 8.
        let w = if x.abs() >= SINC_HALF_TAPS as f64 {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * x / SINC_HALF_TAPS as f64).cos())
        };
        *tap = sinc * w;
    }
    taps
}

/// Add `gain * delta(t - delay_samples)` into `out` using windowed-sinc
/// interpolation. `delay_samples` may be fractional; taps that fall outside
/// the buffer are dropped.
pub fn add_impulse_at(out: &mut [f64], delay_samples: f64, gain: f64) {
    let floor = delay_samples.floor();
    let frac = delay_samples - floor;
    let taps = sinc_kernel(frac);
    let base = floor as isize - (SINC_HALF_TAPS as isize - 1);
    for (j, tap) in taps.iter().enumerate() {
        let at = base + j as isize;
        if at >= 0 && (at as usize) < out.len() {
            out[at as usize] += gain * tap;
        }
    }
}

/// Shift a signal by `delay_samples` (positive delays move content later).
/// Output has the same length; edges are zero-filled.
pub fn fractional_delay(signal: &[f64], delay_samples: f64) -> Vec<f64> {
    let mut out = vec![0.0; signal.len()];
    let floor = delay_samples.floor();
    let frac = delay_samples - floor;
    let taps = sinc_kernel(frac);
    let shift = floor as isize;
    // y[n] = sum_j taps[j] * x[n - shift - j + (HALF-1)]
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, tap) in taps.iter().enumerate() {
            let src = n as isize - shift - j as isize + (SINC_HALF_TAPS as isize - 1);
            if src >= 0 && (src as usize) < signal.len() {
                acc += tap * signal[src as usize];
            }
        }
        *o = acc;
    }
    out
}
