//! Ready-made player scripts for the grab-move-drop task.

use std::fmt;
use std::str::FromStr;

use super::synthetic::{HandCue, Impairment, MovementScript, Waypoint};
use super::CaptureError;
use crate::model::{HandState, PlanePoint, SceneConfig, Vec3};

/// Nominal length of one repetition.
pub const REPETITION_US: u64 = 4_500_000;
/// Extra clearance beyond the largest target radius for deliberate misses.
pub const MISS_MARGIN: f64 = 0.08;

const REST_OFFSET: Vec3 = Vec3::new(0.0, 0.15, 0.10);
const GRIP_LIFT: f64 = 0.02;
const CARRY_LIFT: f64 = 0.15;
const RELEASE_LIFT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptPreset {
    /// Releases directly over the target center every time.
    Perfect,
    /// Releases well outside the largest allowed target every time.
    AlwaysMiss,
    /// Perfect aim with a 6 Hz, 1.5 cm lateral tremor.
    Tremor,
    /// Perfect aim at half speed.
    Slow,
}

impl ScriptPreset {
    pub const ALL: [ScriptPreset; 4] = [
        ScriptPreset::Perfect,
        ScriptPreset::AlwaysMiss,
        ScriptPreset::Tremor,
        ScriptPreset::Slow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScriptPreset::Perfect => "perfect",
            ScriptPreset::AlwaysMiss => "miss",
            ScriptPreset::Tremor => "tremor",
            ScriptPreset::Slow => "slow",
        }
    }

    fn impairment(self) -> Impairment {
        match self {
            ScriptPreset::Tremor => Impairment {
                tremor_amplitude: 0.015,
                tremor_frequency: 6.0,
                speed_scale: 1.0,
            },
            ScriptPreset::Slow => Impairment {
                speed_scale: 0.5,
                ..Impairment::default()
            },
            _ => Impairment::default(),
        }
    }
}

impl fmt::Display for ScriptPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptPreset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScriptPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown script preset `{s}`"))
    }
}

/// Point on the table at least `distance` from the target, searched along
/// the four table axes in a fixed order.
pub fn miss_point(scene: &SceneConfig, distance: f64) -> Result<PlanePoint, CaptureError> {
    let t = scene.target_center;
    [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        .into_iter()
        .map(|(dx, dz)| PlanePoint::new(t.x + dx * distance, t.z + dz * distance))
        .find(|p| scene.on_table(*p))
        .ok_or_else(|| {
            CaptureError::InvalidScript(format!(
                "no on-table point {distance} m away from the target"
            ))
        })
}

/// Builds `drops` back-to-back repetitions of the task for a preset player.
/// `largest_radius` is the biggest target radius the game can reach.
pub fn preset_script(
    preset: ScriptPreset,
    scene: &SceneConfig,
    drops: usize,
    largest_radius: f64,
) -> Result<MovementScript, CaptureError> {
    if drops == 0 {
        return Err(CaptureError::EmptyScript);
    }
    let drop_at = match preset {
        ScriptPreset::AlwaysMiss => miss_point(scene, largest_radius + MISS_MARGIN)?,
        _ => scene.target_center,
    };
    let mut script = repetitions(scene, drop_at, drops);
    script.impairment = preset.impairment();
    Ok(script)
}

/// One repetition: reach the ball, close, lift, carry over `drop_at`,
/// lower, open, and return to rest while the feedback cue plays.
pub fn repetitions(scene: &SceneConfig, drop_at: PlanePoint, drops: usize) -> MovementScript {
    let ball = scene.ball_home;
    let rest = ball + REST_OFFSET;
    let at = |p: PlanePoint, lift: f64| Vec3::new(p.x, scene.resting_height() + lift, p.z);
    let ms = |m: u64| m * 1_000;

    let mut waypoints = Vec::new();
    let mut hand_states = Vec::new();
    for rep in 0..drops as u64 {
        let t0 = rep * REPETITION_US;
        let mut wp = |offset_ms: u64, hand: Vec3| {
            waypoints.push(Waypoint {
                t_us: t0 + ms(offset_ms),
                hand,
            });
        };
        wp(0, rest);
        wp(500, at(ball.xz(), GRIP_LIFT));
        wp(1_000, at(ball.xz(), GRIP_LIFT));
        wp(1_300, at(ball.xz(), CARRY_LIFT));
        wp(2_000, at(drop_at, CARRY_LIFT));
        wp(2_300, at(drop_at, RELEASE_LIFT));
        wp(3_000, at(drop_at, RELEASE_LIFT));
        wp(3_300, rest);
        hand_states.push(HandCue {
            t_us: t0 + ms(500),
            state: HandState::Closed,
        });
        hand_states.push(HandCue {
            t_us: t0 + ms(2_600),
            state: HandState::Open,
        });
    }
    waypoints.push(Waypoint {
        t_us: drops as u64 * REPETITION_US,
        hand: rest,
    });

    MovementScript {
        waypoints,
        hand_states,
        impairment: Impairment::default(),
    }
}
