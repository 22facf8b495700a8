//! Tabletop grab-move-drop rehabilitation game driven by skeleton-frame
//! streams.
//!
//! The engine is deterministic: time is the frame stream, and every frame
//! source (file replay, the synthetic patient generator, or a live client)
//! feeds the same [`session::Session`].

pub mod capture;
pub mod cli;
pub mod config;
pub mod difficulty;
pub mod engine;
pub mod gesture;
pub mod ik;
pub mod metrics;
pub mod model;
pub mod persistence;
pub mod protocol;
pub mod report;
pub mod service;
pub mod session;

pub use config::AppConfig;
pub use engine::{engine_step, hit_test, GameConfig, GameEvent, GameState};
pub use model::{HandState, JointId, PlanePoint, SceneConfig, SkeletonFrame, Vec3};
pub use session::Session;
