//! Far-field scene simulation: shoebox rooms, image-source impulse
//! responses, SNR-controlled mixing, and deterministic dataset generation.

mod dataset;
mod rir;
mod scene;

pub use dataset::{
    generate_split, read_manifest, write_manifest, DatasetSpec, SnrSpec, UtteranceRecord,
};
pub use rir::{
    measure_rt60, schroeder_edc_db, simulate_rir, simulate_rir_with_beta, wall_reflection,
    RoomConfig,
};
pub use scene::{convolve, measure_snr_db, mix_scene, xcorr_tdoa};

use crate::error::{Error, Result};

pub const SPEED_OF_SOUND: f64 = 343.0;

/// Linear microphone array along the x axis. Azimuths are measured from
/// broadside (+y): 0 degrees faces the array, +/-90 degrees is endfire.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    /// Microphone positions in meters.
    pub mic_positions: Vec<[f64; 3]>,
    /// Spacing between adjacent mics (meters), kept for manifests.
    pub spacing: f64,
}

impl ArrayGeometry {
    /// Uniform linear array centered at `center`, lying along x.
    pub fn linear(center: [f64; 3], num_mics: usize, spacing: f64) -> Result<Self> {
        if num_mics < 1 {
            return Err(Error::invalid("array needs at least one microphone"));
        }
        if spacing <= 0.0 {
            return Err(Error::invalid("mic spacing must be positive"));
        }
        let mid = (num_mics as f64 - 1.0) / 2.0;
        let mic_positions = (0..num_mics)
            .map(|c| {
                [
                    center[0] + (c as f64 - mid) * spacing,
                    center[1],
                    center[2],
                ]
            })
            .collect();
        Ok(ArrayGeometry {
            mic_positions,
            spacing,
        })
    }

    pub fn num_mics(&self) -> usize {
        self.mic_positions.len()
    }

    pub fn center(&self) -> [f64; 3] {
        let n = self.mic_positions.len() as f64;
        let mut c = [0.0; 3];
        for p in &self.mic_positions {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi / n;
            }
        }
        c
    }

    /// Far-field arrival delay (seconds) at mic `c` relative to the array
    /// center for a plane wave from `azimuth_deg`. Mics toward the source
    /// get negative delays (the wave reaches them first).
    pub fn steering_delay(&self, c: usize, azimuth_deg: f64) -> f64 {
        let center = self.center();
        let offset = self.mic_positions[c][0] - center[0];
        -offset * azimuth_deg.to_radians().sin() / SPEED_OF_SOUND
    }
}

/// Source and noise placement for one simulated utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePlacement {
    pub source_position: [f64; 3],
    pub noise_positions: Vec<[f64; 3]>,
    /// Source azimuth in degrees, (-180, 180], relative to array broadside.
    pub source_azimuth: f64,
    pub snr_db: Option<f64>,
    pub source_distance: f64,
}

/// Normalize an azimuth to (-180, 180].
pub fn wrap_azimuth(az: f64) -> f64 {
    let mut a = az % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}
