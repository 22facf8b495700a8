//! A running game: engine state plus the bookkeeping shared by offline
//! replay and the live service.

use thiserror::Error;

use crate::capture::{CaptureError, FrameSource};
use crate::engine::{engine_step, GameConfig, GameEvent, GameState};
use crate::metrics::{compute_metrics, MetricsAccumulator, SessionMetrics};
use crate::model::{validate_frame, ConfigError, FrameRejection, SkeletonFrame};
use crate::persistence::SessionRecord;

#[derive(Debug)]
pub struct Session {
    config: GameConfig,
    state: GameState,
    prev_ts: Option<u64>,
    events: Vec<GameEvent>,
    live: MetricsAccumulator,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("frame {index}: {rejection}")]
    Rejected {
        index: usize,
        rejection: FrameRejection,
    },
}

impl Session {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let state = GameState::new(&config);
        let live = MetricsAccumulator::new(config.scene.target_center);
        Ok(Self {
            config,
            state,
            prev_ts: None,
            events: Vec::new(),
            live,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.events
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.prev_ts
    }

    /// Validates and applies one frame, returning the events it produced.
    /// A rejected frame leaves the session untouched.
    pub fn push_frame(&mut self, frame: SkeletonFrame) -> Result<&[GameEvent], FrameRejection> {
        let valid = validate_frame(frame, self.prev_ts)?;
        self.prev_ts = Some(valid.ts_us);
        let state = std::mem::replace(&mut self.state, GameState::new(&self.config));
        let n_drops = state.drops.len();
        let (next, new_events) = engine_step(state, &self.config, &valid);
        for d in &next.drops[n_drops..] {
            self.live.push(d);
        }
        self.state = next;
        let start = self.events.len();
        self.events.extend(new_events);
        Ok(&self.events[start..])
    }

    /// Running metrics, updated incrementally per drop.
    pub fn live_metrics(&self) -> SessionMetrics {
        self.live.metrics()
    }

    pub fn metrics(&self) -> SessionMetrics {
        compute_metrics(&self.state.drops, self.config.scene.target_center)
    }

    pub fn into_record(self, session_id: String, created_at_us: u64) -> SessionRecord {
        SessionRecord::new(
            session_id,
            created_at_us,
            &self.config,
            self.state.drops,
            self.events,
        )
    }
}

/// Runs a fresh session over every frame of `source`.
pub fn run_source(config: GameConfig, source: &mut dyn FrameSource) -> Result<Session, RunError> {
    let mut session = Session::new(config)?;
    let mut index = 0;
    while let Some(frame) = source.next_frame() {
        session
            .push_frame(frame?)
            .map_err(|rejection| RunError::Rejected { index, rejection })?;
        index += 1;
    }
    Ok(session)
}
