//! Helpers shared by the integration tests: fixture access, random value
//! generators, and reference implementations written independently of the
//! library code they check.

#![allow(dead_code)]

pub mod ws;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tabletop_core::difficulty::DdaConfig;
use tabletop_core::engine::{DropRecord, EventKind, FeedbackKind, GameEvent, GamePhase};
use tabletop_core::metrics::compute_metrics;
use tabletop_core::persistence::{SessionRecord, SessionSummary};
use tabletop_core::protocol::{
    AvatarJoints, ClientMessage, CmdPayload, CmdResult, Command, ErrorCode, PointerInput,
    ServerMessage, SessionCommand, StateSnapshot,
};
use tabletop_core::{GameConfig, HandState, JointId, PlanePoint, SkeletonFrame, Vec3};

pub const FIXTURES: [&str; 3] = ["success", "near_miss", "noop"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_lines(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

pub fn hand_frame(ts_us: u64, hand_state: HandState, hand: Vec3) -> SkeletonFrame {
    SkeletonFrame {
        ts_us,
        tracked: true,
        hand_state,
        joints: BTreeMap::from([(JointId::HandRight, hand)]),
    }
}

// ---------------------------------------------------------------------------
// Reference implementations
// ---------------------------------------------------------------------------

/// Radius after each outcome, found by counting the run of equal outcomes
/// since the last radius change.
pub fn dda_oracle(cfg: &DdaConfig, hits: &[bool]) -> Vec<f64> {
    let mut radius = cfg.r0;
    let mut last_change = 0usize;
    let mut out = Vec::with_capacity(hits.len());
    for i in 0..hits.len() {
        let run = hits[last_change..=i]
            .iter()
            .rev()
            .take_while(|&&h| h == hits[i])
            .count() as u32;
        let needed = if hits[i] { cfg.s_streak } else { cfg.f_streak };
        if run == needed {
            radius = if hits[i] {
                f64::max(radius * cfg.alpha, cfg.r_min)
            } else {
                f64::min(radius * cfg.beta, cfg.r_max)
            };
            last_change = i + 1;
        }
        out.push(radius);
    }
    out
}

/// One input sample of a gesture stream: hand state plus whether the hand
/// is within grab range of the ball.
#[derive(Debug, Clone, Copy)]
pub struct GestureSample {
    pub state: HandState,
    pub near: bool,
}

/// Checks an emitted gesture event sequence against its input by scanning
/// windows directly. `events[i]` is the event emitted at input index `i`
/// (`Some(true)` for grab, `Some(false)` for release).
pub fn check_gesture_trace(
    input: &[GestureSample],
    events: &[Option<bool>],
    n_grab: usize,
    n_release: usize,
) -> Result<(), String> {
    let mut expect_grab = true;
    let mut prev_event: Option<usize> = None;
    for (i, ev) in events.iter().enumerate() {
        let Some(is_grab) = *ev else { continue };
        if is_grab != expect_grab {
            return Err(format!("index {i}: events do not alternate grab/release"));
        }
        let n = if is_grab { n_grab } else { n_release };
        let qualifies = |s: &GestureSample| {
            if is_grab {
                s.state == HandState::Closed && s.near
            } else {
                s.state == HandState::Open
            }
        };
        let start = prev_event.map_or(0, |p| p + 1);
        if i + 1 < start + n {
            return Err(format!(
                "index {i}: event with fewer than {n} frames since the last one"
            ));
        }
        if !input[i + 1 - n..=i].iter().all(qualifies) {
            return Err(format!("index {i}: no qualifying window of {n} frames"));
        }
        // It must also be the first complete window since the last event.
        for j in start + n - 1..i {
            if input[j + 1 - n..=j].iter().all(qualifies) {
                return Err(format!(
                    "index {i}: a qualifying window already ended at {j}"
                ));
            }
        }
        expect_grab = !expect_grab;
        prev_event = Some(i);
    }
    // No complete window may go unanswered after the last event.
    let start = prev_event.map_or(0, |p| p + 1);
    let n = if expect_grab { n_grab } else { n_release };
    for j in (start + n).saturating_sub(1)..input.len() {
        let w = &input[j + 1 - n..=j];
        let ok = if expect_grab {
            w.iter().all(|s| s.state == HandState::Closed && s.near)
        } else {
            w.iter().all(|s| s.state == HandState::Open)
        };
        if ok {
            return Err(format!("window ending at {j} produced no event"));
        }
    }
    Ok(())
}

/// Session metrics computed directly from landing points in two passes.
pub struct BatchMetrics {
    pub hit_rate: f64,
    pub mre: f64,
    pub rms: f64,
}

pub fn batch_metrics(drops: &[DropRecord], target: PlanePoint) -> Option<BatchMetrics> {
    if drops.is_empty() {
        return None;
    }
    let n = drops.len() as f64;
    let hits = drops.iter().filter(|d| d.hit).count() as f64;
    let mre = drops
        .iter()
        .map(|d| ((d.landing_xz.x - target.x).powi(2) + (d.landing_xz.z - target.z).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    let cx = drops.iter().map(|d| d.landing_xz.x).sum::<f64>() / n;
    let cz = drops.iter().map(|d| d.landing_xz.z).sum::<f64>() / n;
    let ss = drops
        .iter()
        .map(|d| (d.landing_xz.x - cx).powi(2) + (d.landing_xz.z - cz).powi(2))
        .sum::<f64>();
    Some(BatchMetrics {
        hit_rate: hits / n,
        mre,
        rms: (ss / n).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Random values
// ---------------------------------------------------------------------------

pub fn rand_vec3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.5..5.0),
    )
}

pub fn rand_drop(rng: &mut ChaCha8Rng, target: PlanePoint) -> DropRecord {
    let landing = PlanePoint::new(
        target.x + rng.gen_range(-0.3..0.3),
        target.z + rng.gen_range(-0.3..0.3),
    );
    let radius = rng.gen_range(0.03..0.30);
    let err = landing.distance(target);
    let off_table = rng.gen_bool(0.05);
    let grabbed = rng.gen_range(0..1_000_000_000u64);
    DropRecord {
        release_pos: Vec3::new(landing.x, rng.gen_range(0.8..1.2), landing.z),
        landing_xz: landing,
        radial_error: err,
        target_radius_at_drop: radius,
        radius_after: rng.gen_range(0.03..0.30),
        hit: !off_table && err <= radius,
        off_table,
        grabbed_at_us: grabbed,
        timestamp_us: grabbed + rng.gen_range(0..10_000_000u64),
    }
}

pub fn rand_event(rng: &mut ChaCha8Rng) -> GameEvent {
    let kind = match rng.gen_range(0..7) {
        0 => EventKind::Grabbed,
        1 => EventKind::Released,
        2 => EventKind::Success,
        3 => EventKind::TryAgain,
        4 => EventKind::RadiusChanged {
            new_radius: rng.gen_range(0.03..0.30),
        },
        5 => EventKind::TrackingLost,
        _ => EventKind::TrackingRegained,
    };
    GameEvent::new(kind, rng.gen())
}

pub fn rand_game_config(rng: &mut ChaCha8Rng) -> GameConfig {
    let mut cfg = GameConfig::default();
    cfg.scene.table_height = rng.gen_range(0.6..0.9);
    cfg.scene.grab_radius = rng.gen_range(0.04..0.12);
    cfg.gesture.n_grab = rng.gen_range(1..6);
    cfg.gesture.n_release = rng.gen_range(1..6);
    cfg.dda.alpha = rng.gen_range(0.5..0.95);
    cfg.dda.beta = rng.gen_range(1.05..1.5);
    cfg.feedback_frames = rng.gen_range(0..60);
    cfg.block_size = rng.gen_range(1..20);
    cfg
}

pub fn rand_record(rng: &mut ChaCha8Rng, id: String) -> SessionRecord {
    let cfg = rand_game_config(rng);
    let drops = (0..rng.gen_range(0..40))
        .map(|_| rand_drop(rng, cfg.scene.target_center))
        .collect();
    let events = (0..rng.gen_range(0..80)).map(|_| rand_event(rng)).collect();
    SessionRecord::new(id, rng.gen_range(0..u64::MAX / 2), &cfg, drops, events)
}

pub fn rand_frame(rng: &mut ChaCha8Rng) -> SkeletonFrame {
    let all = [
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::SpineBase,
        JointId::Head,
    ];
    let mut joints = BTreeMap::new();
    for j in all {
        if rng.gen_bool(0.6) {
            joints.insert(j, rand_vec3(rng));
        }
    }
    SkeletonFrame {
        ts_us: rng.gen(),
        tracked: rng.gen(),
        hand_state: [HandState::Open, HandState::Closed, HandState::Unknown][rng.gen_range(0..3)],
        joints,
    }
}

fn rand_id(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{:016}-{:08x}",
        rng.gen_range(0..10u64.pow(15)),
        rng.gen::<u32>()
    )
}

fn rand_command(rng: &mut ChaCha8Rng) -> Command {
    [
        Command::Start,
        Command::Stop,
        Command::Load,
        Command::Delete,
        Command::List,
    ][rng.gen_range(0..5)]
}

pub fn rand_client_message(rng: &mut ChaCha8Rng) -> ClientMessage {
    match rng.gen_range(0..3) {
        0 => ClientMessage::Frame(rand_frame(rng)),
        1 => ClientMessage::PointerInput(PointerInput {
            x: rng.gen_range(-1.0..1.0),
            z: rng.gen_range(0.5..3.0),
            grab: rng.gen(),
        }),
        _ => ClientMessage::SessionCmd(SessionCommand {
            cmd: rand_command(rng),
            id: rng.gen_bool(0.5).then(|| rand_id(rng)),
            config: rng.gen_bool(0.5).then(|| {
                serde_json::json!({
                    "dda": { "r0": rng.gen_range(0.03..0.30) },
                    "gesture": { "n_grab": rng.gen_range(1..6u32) },
                })
            }),
        }),
    }
}

fn rand_phase(rng: &mut ChaCha8Rng) -> GamePhase {
    match rng.gen_range(0..3) {
        0 => GamePhase::AwaitingGrab,
        1 => GamePhase::Holding,
        _ => GamePhase::Feedback {
            kind: if rng.gen() {
                FeedbackKind::Success
            } else {
                FeedbackKind::TryAgain
            },
            frames_remaining: rng.gen_range(0..100),
        },
    }
}

pub fn rand_server_message(rng: &mut ChaCha8Rng) -> ServerMessage {
    match rng.gen_range(0..4) {
        0 => ServerMessage::State(StateSnapshot {
            phase: rand_phase(rng),
            ball_pos: rand_vec3(rng),
            target_center: PlanePoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0)),
            radius: rng.gen_range(0.03..0.30),
            score: rng.gen_range(0..1000),
            drops: rng.gen_range(0..1000),
            frames_seen: rng.gen(),
            tracking: rng.gen(),
            avatar: rng.gen_bool(0.5).then(|| AvatarJoints {
                shoulder: rand_vec3(rng),
                elbow: rand_vec3(rng),
                hand: rand_vec3(rng),
                reached: rng.gen(),
            }),
        }),
        1 => ServerMessage::Event {
            event: rand_event(rng),
        },
        2 => {
            let cmd = rand_command(rng);
            if rng.gen_bool(0.3) {
                return ServerMessage::CmdResult(CmdResult::err(
                    cmd,
                    format!("failure {}", rng.gen::<u16>()),
                ));
            }
            let payload = match rng.gen_range(0..5) {
                0 => CmdPayload::Started {
                    config: rand_game_config(rng),
                },
                1 => {
                    let cfg = rand_game_config(rng);
                    let drops: Vec<_> = (0..rng.gen_range(0..10))
                        .map(|_| rand_drop(rng, cfg.scene.target_center))
                        .collect();
                    CmdPayload::Stopped {
                        session_id: rand_id(rng),
                        metrics: compute_metrics(&drops, cfg.scene.target_center),
                    }
                }
                2 => CmdPayload::Sessions {
                    sessions: (0..rng.gen_range(0..5))
                        .map(|_| SessionSummary {
                            session_id: rand_id(rng),
                            created_at_us: rng.gen_range(0..u64::MAX / 2),
                            n_drops: rng.gen_range(0..100),
                            hit_rate: rng.gen_bool(0.8).then(|| rng.gen_range(0.0..=1.0)),
                        })
                        .collect(),
                },
                3 => {
                    let id = rand_id(rng);
                    CmdPayload::Loaded {
                        record: Box::new(rand_record(rng, id)),
                    }
                }
                _ => CmdPayload::Deleted {
                    session_id: rand_id(rng),
                },
            };
            ServerMessage::CmdResult(CmdResult::ok(cmd, payload))
        }
        _ => ServerMessage::error(
            [
                ErrorCode::MalformedMessage,
                ErrorCode::NoActiveSession,
                ErrorCode::InvalidFrame,
                ErrorCode::Internal,
            ][rng.gen_range(0..4)],
            format!("problem \"{}\"\n", rng.gen::<u32>()),
        ),
    }
}
