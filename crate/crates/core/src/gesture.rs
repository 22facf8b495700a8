//! Debounced grab/release detection.
//!
//! A grab needs `n_grab` consecutive frames with a closed hand within the
//! grab radius of the ball. A release needs `n_release` consecutive open
//! frames. Any other frame, `Unknown` included, resets the streak.

use serde::{Deserialize, Serialize};

use crate::model::{ConfigError, HandState, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureConfig {
    pub n_grab: u32,
    pub n_release: u32,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            n_grab: 3,
            n_release: 2,
        }
    }
}

impl GestureConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_grab == 0 || self.n_release == 0 {
            return Err(ConfigError::Gesture(
                "n_grab and n_release must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureMode {
    #[default]
    Released,
    Held,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureEvent {
    Grab,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GestureFsm {
    pub mode: GestureMode,
    pub streak: u32,
}

impl GestureFsm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops any partial streak without changing mode.
    pub fn reset_streak(self) -> Self {
        Self { streak: 0, ..self }
    }
}

pub fn gesture_step(
    fsm: GestureFsm,
    cfg: &GestureConfig,
    hand_state: HandState,
    hand_pos: Vec3,
    ball_pos: Vec3,
    grab_radius: f64,
) -> (GestureFsm, Option<GestureEvent>) {
    let (qualifies, needed, next_mode, event) = match fsm.mode {
        GestureMode::Released => (
            hand_state == HandState::Closed && hand_pos.distance(ball_pos) <= grab_radius,
            cfg.n_grab,
            GestureMode::Held,
            GestureEvent::Grab,
        ),
        GestureMode::Held => (
            hand_state == HandState::Open,
            cfg.n_release,
            GestureMode::Released,
            GestureEvent::Release,
        ),
    };
    if !qualifies {
        return (fsm.reset_streak(), None);
    }
    let streak = fsm.streak + 1;
    if streak >= needed {
        (
            GestureFsm {
                mode: next_mode,
                streak: 0,
            },
            Some(event),
        )
    } else {
        (
            GestureFsm {
                mode: fsm.mode,
                streak,
            },
            None,
        )
    }
}
