//! Frame sources: file replay and the synthetic patient generator.

mod frame_file;
mod noise;
pub mod scripts;
mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::SkeletonFrame;

pub use frame_file::{encode_frame, open_replay, write_frame_file, write_frames, ReplaySource};
pub use noise::{noise_sigma, NoiseModel};
pub use synthetic::{
    generate, HandCue, Impairment, MovementScript, SyntheticSource, Waypoint, ELBOW_OFFSET,
    SHOULDER_OFFSET,
};

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("frame file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: timestamp {ts_us} precedes previous timestamp {prev_us}")]
    NonMonotonicTimestamp {
        line: usize,
        ts_us: u64,
        prev_us: u64,
    },
    #[error("movement script has no waypoints")]
    EmptyScript,
    #[error("invalid movement script: {0}")]
    InvalidScript(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single-consumer producer of time-ordered skeleton frames.
///
/// Frames come out in non-decreasing timestamp order. Once `next_frame`
/// returns `None` or an error, every later call returns `None`.
pub trait FrameSource {
    fn next_frame(&mut self) -> Option<Result<SkeletonFrame, CaptureError>>;
}

impl<S: FrameSource + ?Sized> FrameSource for Box<S> {
    fn next_frame(&mut self) -> Option<Result<SkeletonFrame, CaptureError>> {
        (**self).next_frame()
    }
}

/// Drains a source into memory, stopping at the first error.
pub fn collect_frames(source: &mut dyn FrameSource) -> Result<Vec<SkeletonFrame>, CaptureError> {
    let mut out = Vec::new();
    while let Some(item) = source.next_frame() {
        out.push(item?);
    }
    Ok(out)
}

/// Frames already held in memory.
pub struct MemorySource(std::vec::IntoIter<SkeletonFrame>);

impl From<Vec<SkeletonFrame>> for MemorySource {
    fn from(frames: Vec<SkeletonFrame>) -> Self {
        Self(frames.into_iter())
    }
}

impl FrameSource for MemorySource {
    fn next_frame(&mut self) -> Option<Result<SkeletonFrame, CaptureError>> {
        self.0.next().map(Ok)
    }
}
