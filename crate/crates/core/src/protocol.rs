//! Wire messages exchanged with live clients. Every message is a JSON
//! object with a `type` field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{GameConfig, GameEvent, GamePhase, GameState};
use crate::ik::{solve_arm, ArmChain};
use crate::metrics::SessionMetrics;
use crate::model::{HandState, JointId, PlanePoint, SceneConfig, SkeletonFrame, Vec3};
use crate::persistence::{SessionRecord, SessionSummary};

/// Height of a pointer-driven hand above the table surface.
pub const POINTER_HOVER_OFFSET: f64 = 0.05;
/// Timestamp step between consecutive pointer inputs (30 Hz).
pub const POINTER_PERIOD_US: u64 = 33_333;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerInput {
    pub x: f64,
    pub z: f64,
    pub grab: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Start,
    Stop,
    Load,
    Delete,
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionCommand {
    pub cmd: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Overrides merged onto the server's defaults on `start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Frame(SkeletonFrame),
    PointerInput(PointerInput),
    SessionCmd(SessionCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvatarJoints {
    pub shoulder: Vec3,
    pub elbow: Vec3,
    pub hand: Vec3,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub phase: GamePhase,
    pub ball_pos: Vec3,
    pub target_center: PlanePoint,
    pub radius: f64,
    pub score: u32,
    pub drops: u64,
    pub frames_seen: u64,
    pub tracking: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avatar: Option<AvatarJoints>,
}

impl StateSnapshot {
    /// Captures the game state, posing the avatar arm toward the ball.
    /// The frame's own shoulder is used as the IK root when present.
    pub fn capture(state: &GameState, chain: &ArmChain, frame: Option<&SkeletonFrame>) -> Self {
        let mut chain = *chain;
        if let Some(s) = frame.and_then(|f| f.joints.get(&JointId::ShoulderRight)) {
            chain.shoulder = *s;
        }
        let avatar = solve_arm(&chain, state.ball_pos)
            .ok()
            .map(|p| AvatarJoints {
                shoulder: chain.shoulder,
                elbow: p.elbow,
                hand: p.hand,
                reached: p.reached,
            });
        Self {
            phase: state.phase,
            ball_pos: state.ball_pos,
            target_center: state.target_center,
            radius: state.radius(),
            score: state.score,
            drops: state.drops.len() as u64,
            frames_seen: state.frames_seen,
            tracking: state.tracking,
            avatar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CmdPayload {
    Started {
        config: GameConfig,
    },
    Stopped {
        session_id: String,
        metrics: SessionMetrics,
    },
    Sessions {
        sessions: Vec<SessionSummary>,
    },
    Loaded {
        record: Box<SessionRecord>,
    },
    Deleted {
        session_id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdResult {
    pub cmd: Command,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<CmdPayload>,
}

impl CmdResult {
    pub fn ok(cmd: Command, payload: CmdPayload) -> Self {
        Self {
            cmd,
            ok: true,
            message: None,
            payload: Some(payload),
        }
    }

    pub fn err(cmd: Command, message: impl Into<String>) -> Self {
        Self {
            cmd,
            ok: false,
            message: Some(message.into()),
            payload: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedMessage,
    NoActiveSession,
    InvalidFrame,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(StateSnapshot),
    Event { event: GameEvent },
    CmdResult(CmdResult),
    Error { code: ErrorCode, message: String },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            message: message.into(),
        }
    }
}

pub fn encode<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages always serialize")
}

pub fn decode_client(text: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn decode_server(text: &str) -> Result<ServerMessage, serde_json::Error> {
    serde_json::from_str(text)
}

/// Turns a pointer position on the table into a tracked frame with the hand
/// hovering above it. Positions off the table are clamped to its edge.
pub fn pointer_to_frame(input: &PointerInput, scene: &SceneConfig, ts_us: u64) -> SkeletonFrame {
    let p = scene.clamp_to_table(PlanePoint::new(input.x, input.z));
    let hand = Vec3::new(p.x, scene.table_height + POINTER_HOVER_OFFSET, p.z);
    SkeletonFrame {
        ts_us,
        tracked: true,
        hand_state: if input.grab {
            HandState::Closed
        } else {
            HandState::Open
        },
        joints: BTreeMap::from([(JointId::HandRight, hand)]),
    }
}
