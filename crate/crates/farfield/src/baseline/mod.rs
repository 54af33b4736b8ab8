//! Conventional signal-processing frontend: fixed delay-and-sum beams at a
//! few look directions, GCC-PHAT direction-of-arrival estimation to pick
//! one, and 40-band log-mel features for the recognizer.

mod das;
mod doa;
mod features;
mod mel;

pub use das::delay_and_sum;
pub use doa::{estimate_doa_gccphat, select_direction, DoaEstimate};
pub use features::{dsp_frontend, read_feature_cache, write_feature_cache, FeatureFrames};
pub use mel::MelFilterbank;

use crate::error::{Error, Result};
use crate::room::{wrap_azimuth, ArrayGeometry};

/// Default look directions of the baseline beamformer bank, degrees.
pub const DEFAULT_LOOK_DIRECTIONS: [f64; 5] = [-90.0, -45.0, 0.0, 45.0, 90.0];

/// Fixed steering bank: one set of per-mic delays per look direction.
#[derive(Debug, Clone)]
pub struct LookDirectionBank {
    /// Azimuths in degrees, (-180, 180], pairwise distinct.
    pub directions: Vec<f64>,
    /// Steering delays in seconds, `[direction][mic]`.
    pub delays: Vec<Vec<f64>>,
}

impl LookDirectionBank {
    pub fn new(geometry: &ArrayGeometry, directions: &[f64]) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("empty look-direction bank"));
        }
        let dirs: Vec<f64> = directions.iter().map(|d| wrap_azimuth(*d)).collect();
        for (i, a) in dirs.iter().enumerate() {
            for b in &dirs[i + 1..] {
                if (a - b).abs() < 1e-9 {
                    return Err(Error::invalid(format!(
                        "duplicate look direction {a} deg"
                    )));
                }
            }
        }
        let delays = dirs
            .iter()
            .map(|az| {
                (0..geometry.num_mics())
                    .map(|c| geometry.steering_delay(c, *az))
                    .collect()
            })
            .collect();
        Ok(LookDirectionBank {
            directions: dirs,
            delays,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of the bank direction angularly nearest to `azimuth_deg`.
    pub fn nearest(&self, azimuth_deg: f64) -> usize {
        let dist = |a: f64, b: f64| wrap_azimuth(a - b).abs();
        self.directions
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                dist(**a, azimuth_deg)
                    .partial_cmp(&dist(**b, azimuth_deg))
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    }
}
