//! Image-source room impulse responses for shoebox rooms with
//! frequency-independent walls.

use crate::delay::add_impulse_at;
use crate::error::{Error, Result};

use super::SPEED_OF_SOUND;

/// Shoebox room with a target reverberation time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RoomConfig {
    /// Interior dimensions in meters (Lx, Ly, Lz).
    pub dimensions: [f64; 3],
    /// Target RT60 in seconds.
    pub rt60: f64,
    pub speed_of_sound: f64,
}

impl RoomConfig {
    pub fn new(dimensions: [f64; 3], rt60: f64) -> Self {
        RoomConfig {
            dimensions,
            rt60,
            speed_of_sound: SPEED_OF_SOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.iter().any(|d| *d <= 0.0) {
            return Err(Error::invalid("room dimensions must be positive"));
        }
        if self.rt60 <= 0.0 {
            return Err(Error::invalid("rt60 must be positive"));
        }
        if self.speed_of_sound <= 0.0 {
            return Err(Error::invalid("speed of sound must be positive"));
        }
        self.sabine_absorption().map(|_| ())
    }

    pub fn volume(&self) -> f64 {
        self.dimensions[0] * self.dimensions[1] * self.dimensions[2]
    }

    pub fn surface_area(&self) -> f64 {
        let [lx, ly, lz] = self.dimensions;
        2.0 * (lx * ly + ly * lz + lx * lz)
    }

    /// Sabine absorption coefficient for the target RT60. Errors with
    /// "absorption out of range" when the room cannot realize the target.
    pub fn sabine_absorption(&self) -> Result<f64> {
        let alpha = 24.0 * 10f64.ln() / self.speed_of_sound * self.volume()
            / (self.surface_area() * self.rt60);
        if alpha > 1.0 {
            return Err(Error::invalid(format!(
                "absorption out of range: rt60 {:.3} s needs Sabine absorption {:.3} > 1 in a {:.1}x{:.1}x{:.1} m room",
                self.rt60, alpha, self.dimensions[0], self.dimensions[1], self.dimensions[2]
            )));
        }
        Ok(alpha)
    }

    /// Smallest RT60 this room can realize with `alpha <= limit`.
    pub fn min_feasible_rt60(&self, limit: f64) -> f64 {
        24.0 * 10f64.ln() / self.speed_of_sound * self.volume() / (self.surface_area() * limit)
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        p.iter()
            .zip(&self.dimensions)
            .all(|(x, l)| *x > 0.0 && *x < *l)
    }
}

/// Wall amplitude reflection coefficient that realizes the target RT60.
///
/// Diffuse-field inversions (Sabine or Eyring) miss the measured decay of
/// an image-source RIR: the field is a mixture of direction-dependent
/// exponentials, and slowly decaying near-axial directions flatten the
/// Schroeder curve well before -60 dB. Instead the coefficient is solved
/// numerically so the T20 reading of the model's own directional decay
/// mixture hits the target.
///
/// For energy loss rate `lambda = -ln(beta^2)` per reflection, a ray along
/// unit direction `u` reflects `rho(u) = sum_i |u_i| / L_i` times per
/// meter, giving instantaneous power `p(t) ~ E_u[exp(-c lambda rho(u) t)]`
/// and the closed-form decay curve
/// `EDC(t) = E_u[exp(-c lambda rho(u) t) / (c lambda rho(u))]`.
pub fn wall_reflection(room: &RoomConfig) -> Result<f64> {
    // Keep Sabine feasibility as the validity gate for (room, rt60) pairs.
    room.sabine_absorption()?;
    let gamma_eyring = 24.0 * 10f64.ln() / room.speed_of_sound * room.volume()
        / (room.surface_area() * room.rt60);

    // Per-direction reflection densities over one octant (symmetry).
    let grid = 24;
    let mut rho = Vec::with_capacity(grid * grid);
    let mut weight = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let theta = (i as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / grid as f64;
        for j in 0..grid {
            let phi = (j as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / grid as f64;
            let u = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            rho.push(
                u[0] / room.dimensions[0] + u[1] / room.dimensions[1] + u[2] / room.dimensions[2],
            );
            weight.push(theta.sin());
        }
    }
    let wsum: f64 = weight.iter().sum();

    let c = room.speed_of_sound;
    // EDC of the mixture at time t for decay rate lambda.
    let edc = |lambda: f64, t: f64| -> f64 {
        rho.iter()
            .zip(&weight)
            .map(|(r, w)| w * (-c * lambda * r * t).exp() / (c * lambda * r))
            .sum::<f64>()
            / wsum
    };
    // T20 reading of the model curve: time from -5 dB to -25 dB, times 3.
    let t20_rt60 = |lambda: f64| -> f64 {
        let e0 = edc(lambda, 0.0);
        let cross = |db: f64| -> f64 {
            let target = e0 * 10f64.powf(db / 10.0);
            let (mut lo, mut hi) = (0.0, room.rt60 * 20.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if edc(lambda, mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        3.0 * (cross(-25.0) - cross(-5.0))
    };

    // Larger lambda decays faster; bisect to hit the target RT60.
    let (mut lo, mut hi) = (0.2 * gamma_eyring, 8.0 * gamma_eyring);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if t20_rt60(mid) > room.rt60 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    Ok((-lambda / 2.0).exp())
}

/// Image-source RIR from `src` to `mic` at sample rate `fs`.
///
/// `max_order` limits the total reflection order (`Some(0)` keeps only the
/// free-field direct path); `None` includes every image that arrives inside
/// the simulated length. The response is long enough to cover the direct
/// delay plus 1.35x the target RT60, so Schroeder backward integration can
/// reach -60 dB without truncation bias.
pub fn simulate_rir(
    room: &RoomConfig,
    mic: [f64; 3],
    src: [f64; 3],
    max_order: Option<i64>,
    fs: u32,
) -> Result<Vec<f64>> {
    let beta = wall_reflection(room)?;
    simulate_rir_with_beta(room, beta, mic, src, max_order, fs)
}

/// Same as [`simulate_rir`] with the wall coefficient already calibrated,
/// so one calibration can serve every mic/source pair in a room.
pub fn simulate_rir_with_beta(
    room: &RoomConfig,
    beta: f64,
    mic: [f64; 3],
    src: [f64; 3],
    max_order: Option<i64>,
    fs: u32,
) -> Result<Vec<f64>> {
    room.validate()?;
    if !room.contains(mic) {
        return Err(Error::invalid("point outside room: microphone"));
    }
    if !room.contains(src) {
        return Err(Error::invalid("point outside room: source"));
    }
    if fs == 0 {
        return Err(Error::invalid("sample rate must be > 0"));
    }
    let c = room.speed_of_sound;
    let direct_dist = dist(mic, src);
    let direct_delay = direct_dist / c * fs as f64;

    let n_samples = if max_order == Some(0) {
        direct_delay.ceil() as usize + 32
    } else {
        (direct_delay + 1.35 * room.rt60 * fs as f64).ceil() as usize + 32
    };
    let mut rir = vec![0.0; n_samples];

    // Maximum distance that can land inside the buffer.
    let max_dist = n_samples as f64 * c / fs as f64;
    let max_dist_sq = max_dist * max_dist;

    // Per-axis image positions relative to the mic, with reflection counts
    // folded into per-axis beta powers: for image index m and parity q,
    // coordinate = (1-2q)*src + 2*m*L - mic, power = beta^(|m-q| + |m|).
    let axis = |l: f64, s: f64, r: f64| -> Vec<(f64, f64, i64)> {
        let n_img = (max_dist / (2.0 * l)).ceil() as i64;
        let mut out = Vec::with_capacity((4 * n_img + 2) as usize);
        for m in -n_img..=n_img {
            for q in 0..=1i64 {
                let coord = (1 - 2 * q) as f64 * s + 2.0 * m as f64 * l - r;
                let refl = (m - q).abs() as i32 + m.abs() as i32;
                let order = (2 * m - q).abs();
                out.push((coord, beta.powi(refl), order));
            }
        }
        out
    };
    let xs = axis(room.dimensions[0], src[0], mic[0]);
    let ys = axis(room.dimensions[1], src[1], mic[1]);
    let zs = axis(room.dimensions[2], src[2], mic[2]);

    let four_pi = 4.0 * std::f64::consts::PI;
    for &(x, px, ox) in &xs {
        let xx = x * x;
        if xx > max_dist_sq {
            continue;
        }
        for &(y, py, oy) in &ys {
            let xy = xx + y * y;
            if xy > max_dist_sq {
                continue;
            }
            let pxy = px * py;
            let oxy = ox + oy;
            if let Some(mo) = max_order {
                if oxy > mo {
                    continue;
                }
            }
            for &(z, pz, oz) in &zs {
                if let Some(mo) = max_order {
                    if oxy + oz > mo {
                        continue;
                    }
                }
                let d_sq = xy + z * z;
                if d_sq > max_dist_sq {
                    continue;
                }
                let d = d_sq.sqrt().max(1e-3);
                let gain = pxy * pz / (four_pi * d);
                add_impulse_at(&mut rir, d / c * fs as f64, gain);
            }
        }
    }
    if max_order != Some(0) {
        highpass_allen_berkley(&mut rir, fs);
    }
    Ok(rir)
}

/// 100 Hz high-pass on the raw image response. Every image carries a
/// positive gain, so the coherent sum builds a DC component that decays at
/// half the reverberant rate and flattens the Schroeder curve; this filter
/// is part of the original image method for that reason.
fn highpass_allen_berkley(rir: &mut [f64], fs: u32) {
    let w = 2.0 * std::f64::consts::PI * 100.0 / fs as f64;
    let r1 = (-w).exp();
    let b1 = 2.0 * r1 * w.cos();
    let b2 = -r1 * r1;
    let a1 = -(1.0 + r1);
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in rir.iter_mut() {
        let y0 = b1 * y1 + b2 * y2 + *v;
        *v = y0 + a1 * y1 + r1 * y2;
        y2 = y1;
        y1 = y0;
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Schroeder backward-integrated energy decay curve in dB, normalized to
/// 0 dB at the first sample.
pub fn schroeder_edc_db(rir: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut edc: Vec<f64> = rir
        .iter()
        .rev()
        .map(|h| {
            acc += h * h;
            acc
        })
        .collect();
    edc.reverse();
    let total = edc[0].max(1e-300);
    edc.iter()
        .map(|e| 10.0 * (e / total).max(1e-300).log10())
        .collect()
}

/// RT60 from the Schroeder curve: least-squares line through the decay
/// between -5 and -25 dB, extrapolated to -60 dB (the standard T20
/// reading). The raw -60 dB crossing is dominated by slowly decaying
/// axial image directions and overshoots the diffuse-field target.
pub fn measure_rt60(rir: &[f64], fs: u32) -> Option<f64> {
    let peak = rir.iter().map(|h| h.abs()).fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let direct = rir.iter().position(|h| h.abs() >= 0.3 * peak)?;
    let edc = schroeder_edc_db(&rir[direct..]);
    let start = edc.iter().position(|e| *e <= -5.0)?;
    let end = edc.iter().position(|e| *e <= -25.0)?;
    if end <= start + 2 {
        return None;
    }
    // Least-squares slope of EDC[start..=end] in dB per sample.
    let n = (end - start + 1) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (i, e) in edc[start..=end].iter().enumerate() {
        let x = i as f64;
        sx += x;
        sy += e;
        sxx += x * x;
        sxy += x * e;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if slope >= 0.0 {
        return None;
    }
    Some(-60.0 / slope / fs as f64)
}
