//! Scripted synthetic patient: a hand trajectory with optional tremor and
//! slowed transit, sampled at a fixed rate through the sensor noise model.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, and Gaussian draws from `rand_distr::StandardNormal`.
//! Both are platform independent, so a `(script, noise, seed, fps)` tuple
//! always yields the same bit-exact stream.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::noise::{noise_sigma, NoiseModel};
use super::{CaptureError, FrameSource};
use crate::model::{HandState, JointId, SkeletonFrame, Vec3, SENSOR_MAX_DEPTH, SENSOR_MIN_DEPTH};

/// Elbow position relative to the hand in generated frames.
pub const ELBOW_OFFSET: Vec3 = Vec3::new(0.05, 0.20, 0.20);
/// Shoulder position relative to the hand in generated frames.
pub const SHOULDER_OFFSET: Vec3 = Vec3::new(0.10, 0.45, 0.35);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    /// Nominal (unimpaired) time in microseconds.
    pub t_us: u64,
    pub hand: Vec3,
}

/// Hand state that takes effect at nominal time `t_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandCue {
    pub t_us: u64,
    pub state: HandState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Impairment {
    /// Peak lateral (x) tremor displacement in meters.
    pub tremor_amplitude: f64,
    pub tremor_frequency: f64,
    /// Transit time multiplier is `1 / speed_scale`; 1.0 is unimpaired.
    pub speed_scale: f64,
}

impl Default for Impairment {
    fn default() -> Self {
        Self {
            tremor_amplitude: 0.0,
            tremor_frequency: 0.0,
            speed_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovementScript {
    pub waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub hand_states: Vec<HandCue>,
    #[serde(default)]
    pub impairment: Impairment,
}

impl MovementScript {
    pub fn validate(&self) -> Result<(), CaptureError> {
        let bad = |m: &str| Err(CaptureError::InvalidScript(m.to_string()));
        if self.waypoints.is_empty() {
            return Err(CaptureError::EmptyScript);
        }
        if self.waypoints.windows(2).any(|w| w[0].t_us >= w[1].t_us) {
            return bad("waypoint timestamps must be strictly increasing");
        }
        if self.hand_states.windows(2).any(|w| w[0].t_us > w[1].t_us) {
            return bad("hand-state cues must be in time order");
        }
        let imp = &self.impairment;
        if !(imp.tremor_amplitude.is_finite() && imp.tremor_amplitude >= 0.0) {
            return bad("tremor_amplitude must be >= 0");
        }
        if !(imp.tremor_frequency.is_finite() && imp.tremor_frequency >= 0.0) {
            return bad("tremor_frequency must be >= 0");
        }
        if !(imp.speed_scale > 0.0 && imp.speed_scale <= 1.0) {
            return bad("speed_scale must be in (0, 1]");
        }
        Ok(())
    }

    fn start_us(&self) -> u64 {
        self.waypoints[0].t_us
    }

    /// Hand position at a nominal time, linear between waypoints.
    fn hand_at(&self, nominal_us: f64) -> Vec3 {
        let wps = &self.waypoints;
        if nominal_us <= wps[0].t_us as f64 {
            return wps[0].hand;
        }
        for w in wps.windows(2) {
            let (a, b) = (w[0].t_us as f64, w[1].t_us as f64);
            if nominal_us <= b {
                let f = (nominal_us - a) / (b - a);
                return w[0].hand + (w[1].hand - w[0].hand) * f;
            }
        }
        wps[wps.len() - 1].hand
    }

    fn hand_state_at(&self, nominal_us: f64) -> HandState {
        self.hand_states
            .iter()
            .take_while(|c| c.t_us as f64 <= nominal_us)
            .last()
            .map_or(HandState::Open, |c| c.state)
    }
}

/// Lazily generated, deterministic frame stream.
pub struct SyntheticSource {
    script: MovementScript,
    noise: NoiseModel,
    fps: f64,
    rng: ChaCha8Rng,
    next_index: u64,
    frame_count: u64,
}

/// Samples `script` at `fps` through `noise`, seeded by `seed`.
pub fn generate(
    script: MovementScript,
    noise: NoiseModel,
    seed: u64,
    fps: f64,
) -> Result<SyntheticSource, CaptureError> {
    script.validate()?;
    noise
        .validate()
        .map_err(|e| CaptureError::InvalidScript(e.to_string()))?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(CaptureError::InvalidScript("fps must be positive".into()));
    }
    let span = (script.waypoints.last().unwrap().t_us - script.start_us()) as f64;
    let duration_s = span / script.impairment.speed_scale / 1e6;
    // tolerance so an exact multiple of the frame period includes its endpoint
    let frame_count = (duration_s * fps + 1e-9).floor() as u64 + 1;
    Ok(SyntheticSource {
        script,
        noise,
        fps,
        rng: ChaCha8Rng::seed_from_u64(seed),
        next_index: 0,
        frame_count,
    })
}

impl SyntheticSource {
    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    fn jitter(&mut self, p: Vec3) -> Vec3 {
        let sigma = noise_sigma(&self.noise, p.norm());
        let mut draw = || -> f64 { StandardNormal.sample(&mut self.rng) };
        let (nx, ny, nz) = (draw(), draw(), draw());
        p + Vec3::new(nx, ny, nz) * sigma
    }

    fn make_frame(&mut self, k: u64) -> SkeletonFrame {
        let t_s = k as f64 / self.fps;
        let imp = self.script.impairment;
        let nominal_us = self.script.start_us() as f64 + t_s * 1e6 * imp.speed_scale;
        let mut hand = self.script.hand_at(nominal_us);
        if imp.tremor_amplitude > 0.0 {
            hand.x += imp.tremor_amplitude * (TAU * imp.tremor_frequency * t_s).sin();
        }
        let hand_state = self.script.hand_state_at(nominal_us);

        let truth = [
            (JointId::ShoulderRight, hand + SHOULDER_OFFSET),
            (JointId::ElbowRight, hand + ELBOW_OFFSET),
            (JointId::HandRight, hand),
        ];
        let mut joints = BTreeMap::new();
        for (joint, p) in truth {
            joints.insert(joint, self.jitter(p));
        }
        let tracked = joints
            .values()
            .all(|p| (SENSOR_MIN_DEPTH..=SENSOR_MAX_DEPTH).contains(&p.z));
        SkeletonFrame {
            ts_us: self.script.start_us() + (k as f64 * 1e6 / self.fps).round() as u64,
            tracked,
            hand_state,
            joints,
        }
    }
}

impl FrameSource for SyntheticSource {
    fn next_frame(&mut self) -> Option<Result<SkeletonFrame, CaptureError>> {
        if self.next_index >= self.frame_count {
            return None;
        }
        let k = self.next_index;
        self.next_index += 1;
        Some(Ok(self.make_frame(k)))
    }
}

impl Iterator for SyntheticSource {
    type Item = Result<SkeletonFrame, CaptureError>;
    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame()
    }
}
