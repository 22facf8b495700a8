//! Analytic two-bone IK for the avatar's right arm.
//!
//! The solve is display-only: it poses the arm toward the ball for clients
//! and never feeds back into game logic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Vec3;

/// Smallest distance kept between a fully folded arm's hand and shoulder.
pub const FOLD_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmChain {
    pub shoulder: Vec3,
    pub l_upper: f64,
    pub l_fore: f64,
    /// Direction the elbow should bend toward.
    pub pole_hint: Vec3,
}

impl Default for ArmChain {
    fn default() -> Self {
        // an adult right arm standing behind the default table
        Self {
            shoulder: Vec3::new(0.2, 1.35, 2.0),
            l_upper: 0.30,
            l_fore: 0.28,
            pole_hint: Vec3::new(0.3, -1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmPose {
    pub elbow: Vec3,
    pub hand: Vec3,
    /// Whether the target was inside the reachable annulus.
    pub reached: bool,
}

impl ArmPose {
    /// Interior elbow angle in radians (π for a straight arm).
    pub fn elbow_angle(&self, chain: &ArmChain) -> f64 {
        let a = chain.shoulder - self.elbow;
        let b = self.hand - self.elbow;
        (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IkError {
    #[error("target coincides with the shoulder")]
    DegenerateChain,
    #[error("arm chain has a non-positive bone length")]
    InvalidChain,
}

/// World axis most orthogonal to `dir`.
fn fallback_axis(dir: Vec3) -> Vec3 {
    let (ax, ay, az) = (dir.x.abs(), dir.y.abs(), dir.z.abs());
    if ax <= ay && ax <= az {
        Vec3::X
    } else if ay <= az {
        Vec3::Y
    } else {
        Vec3::Z
    }
}

/// Unit vector perpendicular to `dir` in the plane of `dir` and `hint`.
fn bend_direction(dir: Vec3, hint: Vec3) -> Vec3 {
    let project = |h: Vec3| (h - dir * h.dot(dir)).normalized();
    let hint_ok = hint.normalized().and_then(|h| {
        // near-parallel hints give an unstable plane
        (h.cross(dir).norm() > 1e-6).then_some(h)
    });
    hint_ok
        .and_then(project)
        .or_else(|| project(fallback_axis(dir)))
        .expect("fallback axis is never parallel to the ray")
}

pub fn solve_arm(chain: &ArmChain, target: Vec3) -> Result<ArmPose, IkError> {
    let (l1, l2) = (chain.l_upper, chain.l_fore);
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(IkError::InvalidChain);
    }
    let to_target = target - chain.shoulder;
    let dist = to_target.norm();
    let dir = to_target.normalized().ok_or(IkError::DegenerateChain)?;

    let min_reach = (l1 - l2).abs() + FOLD_EPSILON;
    let max_reach = l1 + l2;
    let reached = (min_reach..=max_reach).contains(&dist);
    let d = dist.clamp(min_reach, max_reach);

    // angle between the upper arm and the shoulder->hand ray
    let cos_shoulder = ((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d)).clamp(-1.0, 1.0);
    let sin_shoulder = (1.0 - cos_shoulder * cos_shoulder).max(0.0).sqrt();
    let bend = bend_direction(dir, chain.pole_hint);

    let elbow = chain.shoulder + (dir * cos_shoulder + bend * sin_shoulder) * l1;
    let hand = if reached {
        target
    } else {
        chain.shoulder + dir * d
    };
    Ok(ArmPose {
        elbow,
        hand,
        reached,
    })
}
