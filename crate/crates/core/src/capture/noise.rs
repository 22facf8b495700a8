//! Distance-dependent depth-sensor noise.

use serde::{Deserialize, Serialize};

use crate::model::{ConfigError, SENSOR_MAX_DEPTH, SENSOR_MIN_DEPTH};

/// Per-axis zero-mean Gaussian noise whose standard deviation grows
/// linearly with distance from the sensor, clamped outside the tracking
/// envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// σ at the near edge of the envelope (0.5 m).
    pub sigma_near: f64,
    /// σ at the far edge of the envelope (5.0 m).
    pub sigma_far: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_near: 0.002,
            sigma_far: 0.040,
        }
    }
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        sigma_near: 0.0,
        sigma_far: 0.0,
    };

    pub fn constant(sigma: f64) -> Self {
        Self {
            sigma_near: sigma,
            sigma_far: sigma,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma_near.is_finite() && self.sigma_far.is_finite()) {
            return Err(ConfigError::Noise("non-finite sigma".into()));
        }
        if !(0.0 <= self.sigma_near && self.sigma_near <= self.sigma_far) {
            return Err(ConfigError::Noise(
                "require 0 <= sigma_near <= sigma_far".into(),
            ));
        }
        Ok(())
    }

    pub fn sigma(&self, distance: f64) -> f64 {
        noise_sigma(self, distance)
    }
}

/// Standard deviation of the per-axis error at sensor distance `distance`.
pub fn noise_sigma(model: &NoiseModel, distance: f64) -> f64 {
    let d = distance.clamp(SENSOR_MIN_DEPTH, SENSOR_MAX_DEPTH);
    let frac = (d - SENSOR_MIN_DEPTH) / (SENSOR_MAX_DEPTH - SENSOR_MIN_DEPTH);
    model.sigma_near + (model.sigma_far - model.sigma_near) * frac
}
