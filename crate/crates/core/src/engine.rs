//! The grab-move-drop task loop.
//!
//! Each validated frame advances the game by one step: the ball is attached
//! to the hand on a debounced grab, follows it while held, and drops
//! vertically onto the table on release. The drop is scored against the
//! target disc, feedback plays for a fixed number of frames, and the ball
//! returns home. Time is measured in frames only.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::difficulty::{dda_update, DdaConfig, DifficultyState, Outcome};
use crate::gesture::{gesture_step, GestureConfig, GestureEvent, GestureFsm};
use crate::model::{ConfigError, PlanePoint, SceneConfig, ValidFrame, Vec3};

/// Everything that parameterizes a game session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub scene: SceneConfig,
    pub gesture: GestureConfig,
    pub dda: DdaConfig,
    /// Frames the Success / Try Again cue stays up before the ball resets.
    pub feedback_frames: u32,
    /// Repetitions per block.
    pub block_size: u32,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            gesture: GestureConfig::default(),
            dda: DdaConfig::default(),
            feedback_frames: 30,
            block_size: 10,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scene.validate()?;
        self.gesture.validate()?;
        self.dda.validate()?;
        if self.block_size == 0 {
            return Err(ConfigError::Game("block_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Success,
    TryAgain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GamePhase {
    AwaitingGrab,
    Holding,
    Feedback {
        kind: FeedbackKind,
        frames_remaining: u32,
    },
}

/// Outcome of one release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropRecord {
    pub release_pos: Vec3,
    /// Where the ball came to rest, clamped to the table top.
    pub landing_xz: PlanePoint,
    /// Distance from `landing_xz` to the target center.
    pub radial_error: f64,
    pub target_radius_at_drop: f64,
    /// Target radius after the difficulty update this drop triggered.
    pub radius_after: f64,
    pub hit: bool,
    /// Released beyond the table edge; always a miss.
    #[serde(default)]
    pub off_table: bool,
    pub grabbed_at_us: u64,
    pub timestamp_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Grabbed,
    Released,
    Success,
    TryAgain,
    RadiusChanged { new_radius: f64 },
    TrackingLost,
    TrackingRegained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    pub ts_us: u64,
}

impl GameEvent {
    pub fn new(kind: EventKind, ts_us: u64) -> Self {
        Self { kind, ts_us }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub phase: GamePhase,
    pub ball_pos: Vec3,
    pub target_center: PlanePoint,
    pub difficulty: DifficultyState,
    pub score: u32,
    pub drops: Vec<DropRecord>,
    pub frames_seen: u64,
    pub gesture: GestureFsm,
    /// False between a TrackingLost and the following TrackingRegained.
    pub tracking: bool,
    pub repetitions_in_block: u32,
    pub blocks_completed: u32,
    grabbed_at_us: u64,
}

impl GameState {
    pub fn new(cfg: &GameConfig) -> Self {
        Self {
            phase: GamePhase::AwaitingGrab,
            ball_pos: cfg.scene.ball_home,
            target_center: cfg.scene.target_center,
            difficulty: cfg.dda.initial_state(),
            score: 0,
            drops: Vec::new(),
            frames_seen: 0,
            gesture: GestureFsm::new(),
            tracking: true,
            repetitions_in_block: 0,
            blocks_completed: 0,
            grabbed_at_us: 0,
        }
    }

    pub fn radius(&self) -> f64 {
        self.difficulty.radius
    }

    /// Checks the state invariants that hold between steps.
    pub fn check_invariants(&self, cfg: &GameConfig) -> Result<(), String> {
        let hits = self.drops.iter().filter(|d| d.hit).count();
        if hits != self.score as usize {
            return Err(format!("score {} but {hits} hit drops", self.score));
        }
        for d in &self.drops {
            if d.hit != (!d.off_table && d.radial_error <= d.target_radius_at_drop) {
                return Err(format!("inconsistent drop record {d:?}"));
            }
        }
        let r = self.difficulty.radius;
        if !(cfg.dda.r_min <= r && r <= cfg.dda.r_max) {
            return Err(format!("radius {r} outside bounds"));
        }
        if self.phase == GamePhase::AwaitingGrab && self.ball_pos != cfg.scene.ball_home {
            return Err("ball not at home while awaiting grab".into());
        }
        let held = self.gesture.mode == crate::gesture::GestureMode::Held;
        if held != (self.phase == GamePhase::Holding) {
            return Err("gesture mode disagrees with phase".into());
        }
        Ok(())
    }
}

/// Whether a landing point lies on the target disc, boundary included.
pub fn hit_test(landing_xz: PlanePoint, target_center: PlanePoint, radius: f64) -> bool {
    landing_xz.distance(target_center) <= radius
}

/// Advances the game by one frame.
pub fn engine_step(
    mut state: GameState,
    cfg: &GameConfig,
    frame: &ValidFrame,
) -> (GameState, Vec<GameEvent>) {
    let ts = frame.ts_us;
    let mut events = Vec::new();
    state.frames_seen += 1;

    if !frame.tracked {
        if state.tracking {
            state.tracking = false;
            events.push(GameEvent::new(EventKind::TrackingLost, ts));
        }
        state.gesture = state.gesture.reset_streak();
        return (state, events);
    }
    if !state.tracking {
        state.tracking = true;
        events.push(GameEvent::new(EventKind::TrackingRegained, ts));
    }
    let hand = frame
        .hand_right()
        .expect("validated tracked frames carry the right hand");
    let scene = &cfg.scene;

    match state.phase {
        GamePhase::Feedback {
            kind,
            frames_remaining,
        } => {
            state.gesture = state.gesture.reset_streak();
            let left = frames_remaining.saturating_sub(1);
            if left == 0 {
                state.phase = GamePhase::AwaitingGrab;
                state.ball_pos = scene.ball_home;
            } else {
                state.phase = GamePhase::Feedback {
                    kind,
                    frames_remaining: left,
                };
            }
        }
        GamePhase::AwaitingGrab => {
            let (fsm, ev) = gesture_step(
                state.gesture,
                &cfg.gesture,
                frame.hand_state,
                hand,
                state.ball_pos,
                scene.grab_radius,
            );
            state.gesture = fsm;
            if ev == Some(GestureEvent::Grab) {
                state.phase = GamePhase::Holding;
                state.ball_pos = hand;
                state.grabbed_at_us = ts;
                events.push(GameEvent::new(EventKind::Grabbed, ts));
            }
        }
        GamePhase::Holding => {
            state.ball_pos = hand;
            let (fsm, ev) = gesture_step(
                state.gesture,
                &cfg.gesture,
                frame.hand_state,
                hand,
                state.ball_pos,
                scene.grab_radius,
            );
            state.gesture = fsm;
            if ev == Some(GestureEvent::Release) {
                release(&mut state, cfg, hand, ts, &mut events);
            }
        }
    }
    (state, events)
}

fn release(
    state: &mut GameState,
    cfg: &GameConfig,
    hand: Vec3,
    ts: u64,
    events: &mut Vec<GameEvent>,
) {
    let scene = &cfg.scene;
    let raw = hand.xz();
    let off_table = !scene.on_table(raw);
    let landing = scene.clamp_to_table(raw);
    let radius = state.difficulty.radius;
    let hit = !off_table && hit_test(landing, state.target_center, radius);

    let before = state.difficulty;
    state.difficulty = dda_update(before, &cfg.dda, Outcome::from_hit(hit));

    events.push(GameEvent::new(EventKind::Released, ts));
    let kind = if hit {
        state.score += 1;
        events.push(GameEvent::new(EventKind::Success, ts));
        FeedbackKind::Success
    } else {
        events.push(GameEvent::new(EventKind::TryAgain, ts));
        FeedbackKind::TryAgain
    };
    if state.difficulty.radius != before.radius {
        events.push(GameEvent::new(
            EventKind::RadiusChanged {
                new_radius: state.difficulty.radius,
            },
            ts,
        ));
    }

    state.drops.push(DropRecord {
        release_pos: hand,
        landing_xz: landing,
        radial_error: landing.distance(state.target_center),
        target_radius_at_drop: radius,
        radius_after: state.difficulty.radius,
        hit,
        off_table,
        grabbed_at_us: state.grabbed_at_us,
        timestamp_us: ts,
    });
    state.repetitions_in_block += 1;
    if state.repetitions_in_block >= cfg.block_size {
        state.repetitions_in_block = 0;
        state.blocks_completed += 1;
    }

    if cfg.feedback_frames == 0 {
        state.phase = GamePhase::AwaitingGrab;
        state.ball_pos = scene.ball_home;
    } else {
        state.phase = GamePhase::Feedback {
            kind,
            frames_remaining: cfg.feedback_frames,
        };
        state.ball_pos = Vec3::new(landing.x, scene.resting_height(), landing.z);
    }
}

pub fn encode_event(ev: &GameEvent) -> String {
    serde_json::to_string(ev).expect("events always serialize")
}

/// Writes an event log, one JSON object per line.
pub fn write_event_log<'a, W: Write>(
    mut out: W,
    events: impl IntoIterator<Item = &'a GameEvent>,
) -> io::Result<()> {
    for ev in events {
        out.write_all(encode_event(ev).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
