//! Geometric and sensory domain types shared by every other module.
//!
//! Coordinates are sensor space: right-handed, y-up, meters, with the depth
//! sensor at the origin looking along +z.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nearest depth the sensor tracks reliably, in meters.
pub const SENSOR_MIN_DEPTH: f64 = 0.5;
/// Farthest depth the sensor tracks reliably, in meters.
pub const SENSOR_MAX_DEPTH: f64 = 5.0;
/// Nominal sampling rate of the depth sensor.
pub const NOMINAL_FPS: f64 = 30.0;

/// A point or direction in sensor space. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("vector component is not finite")]
pub struct NonFiniteError;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    pub const X: Vec3 = Vec3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Vec3 = Vec3 {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Builds a vector from components the caller knows to be finite.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self, NonFiniteError> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(NonFiniteError)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for (near) zero length.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > f64::EPSILON {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Horizontal (table-plane) projection.
    pub fn xz(self) -> PlanePoint {
        PlanePoint::new(self.x, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl TryFrom<[f64; 3]> for Vec3 {
    type Error = NonFiniteError;
    fn try_from(a: [f64; 3]) -> Result<Self, Self::Error> {
        Vec3::try_new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

/// A point on the horizontal table plane, `(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct PlanePoint {
    pub x: f64,
    pub z: f64,
}

impl PlanePoint {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(self, other: PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

impl TryFrom<[f64; 2]> for PlanePoint {
    type Error = NonFiniteError;
    fn try_from(a: [f64; 2]) -> Result<Self, Self::Error> {
        if a[0].is_finite() && a[1].is_finite() {
            Ok(PlanePoint::new(a[0], a[1]))
        } else {
            Err(NonFiniteError)
        }
    }
}

impl From<PlanePoint> for [f64; 2] {
    fn from(p: PlanePoint) -> Self {
        [p.x, p.z]
    }
}

/// Tracked joints. Only the right arm is required; the rest are optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    SpineBase,
    Head,
}

impl JointId {
    pub const ALL: [JointId; 6] = [
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::SpineBase,
        JointId::Head,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JointId::ShoulderRight => "shoulder_right",
            JointId::ElbowRight => "elbow_right",
            JointId::WristRight => "wrist_right",
            JointId::HandRight => "hand_right",
            JointId::SpineBase => "spine_base",
            JointId::Head => "head",
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandState {
    Open,
    Closed,
    Unknown,
}

/// One timestamped sample from a skeleton tracker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonFrame {
    pub ts_us: u64,
    pub tracked: bool,
    pub hand_state: HandState,
    pub joints: BTreeMap<JointId, Vec3>,
}

impl SkeletonFrame {
    pub fn hand_right(&self) -> Option<Vec3> {
        self.joints.get(&JointId::HandRight).copied()
    }

    /// Untracked frame with no joints, as produced during a tracking dropout.
    pub fn untracked(ts_us: u64) -> Self {
        Self {
            ts_us,
            tracked: false,
            hand_state: HandState::Unknown,
            joints: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameRejection {
    #[error("timestamp {ts_us} precedes previous timestamp {prev_us}")]
    NonMonotonicTimestamp { ts_us: u64, prev_us: u64 },
    #[error("joint {joint} at depth {z} m is outside the tracking envelope")]
    OutOfRangeJoint { joint: JointId, z: f64 },
    #[error("tracked frame is missing required joint {0}")]
    MissingRequiredJoint(JointId),
}

/// A frame that has passed [`validate_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidFrame(SkeletonFrame);

impl ValidFrame {
    pub fn frame(&self) -> &SkeletonFrame {
        &self.0
    }

    pub fn into_inner(self) -> SkeletonFrame {
        self.0
    }
}

impl std::ops::Deref for ValidFrame {
    type Target = SkeletonFrame;
    fn deref(&self) -> &SkeletonFrame {
        &self.0
    }
}

/// Checks frame invariants and ordering against the previous timestamp.
pub fn validate_frame(
    frame: SkeletonFrame,
    prev_timestamp: Option<u64>,
) -> Result<ValidFrame, FrameRejection> {
    if let Some(prev_us) = prev_timestamp {
        if frame.ts_us < prev_us {
            return Err(FrameRejection::NonMonotonicTimestamp {
                ts_us: frame.ts_us,
                prev_us,
            });
        }
    }
    if frame.tracked {
        if !frame.joints.contains_key(&JointId::HandRight) {
            return Err(FrameRejection::MissingRequiredJoint(JointId::HandRight));
        }
        for (&joint, p) in &frame.joints {
            if !(SENSOR_MIN_DEPTH..=SENSOR_MAX_DEPTH).contains(&p.z) {
                return Err(FrameRejection::OutOfRangeJoint { joint, z: p.z });
            }
        }
    }
    Ok(ValidFrame(frame))
}

/// Static layout of the play area: a table with a ball and a target disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Height (y) of the table surface.
    pub table_height: f64,
    /// Center of the table top in the horizontal plane.
    pub table_center: PlanePoint,
    /// Half-sizes of the table top along x and z.
    pub table_extent: PlanePoint,
    pub ball_radius: f64,
    /// Resting position of the ball; sits on the table surface.
    pub ball_home: Vec3,
    pub target_center: PlanePoint,
    /// Maximum hand-to-ball distance for a grab to count.
    pub grab_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("invalid gesture config: {0}")]
    Gesture(String),
    #[error("invalid difficulty config: {0}")]
    Difficulty(String),
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error("invalid game config: {0}")]
    Game(String),
}

impl Default for SceneConfig {
    fn default() -> Self {
        let table_height = 0.75;
        let ball_radius = 0.03;
        Self {
            table_height,
            table_center: PlanePoint::new(0.0, 1.6),
            table_extent: PlanePoint::new(0.6, 0.35),
            ball_radius,
            ball_home: Vec3::new(0.3, table_height + ball_radius, 1.6),
            target_center: PlanePoint::new(-0.15, 1.6),
            grab_radius: 0.08,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError::Scene(m.to_string()));
        let finite = [
            self.table_height,
            self.table_center.x,
            self.table_center.z,
            self.table_extent.x,
            self.table_extent.z,
            self.ball_radius,
            self.grab_radius,
        ];
        if finite.iter().any(|v| !v.is_finite()) || !self.ball_home.is_finite() {
            return err("non-finite value");
        }
        if self.table_extent.x <= 0.0 || self.table_extent.z <= 0.0 {
            return err("table_extent must be positive");
        }
        if self.ball_radius <= 0.0 {
            return err("ball_radius must be positive");
        }
        if self.grab_radius <= 0.0 {
            return err("grab_radius must be positive");
        }
        if (self.ball_home.y - (self.table_height + self.ball_radius)).abs() > 1e-9 {
            return err("ball_home must rest on the table (y = table_height + ball_radius)");
        }
        if !self.on_table(self.ball_home.xz()) {
            return err("ball_home lies outside the table");
        }
        if !self.on_table(self.target_center) {
            return err("target_center lies outside the table");
        }
        Ok(())
    }

    pub fn on_table(&self, p: PlanePoint) -> bool {
        (p.x - self.table_center.x).abs() <= self.table_extent.x
            && (p.z - self.table_center.z).abs() <= self.table_extent.z
    }

    /// Nearest point of the table top to `p`.
    pub fn clamp_to_table(&self, p: PlanePoint) -> PlanePoint {
        let c = self.table_center;
        let e = self.table_extent;
        PlanePoint::new(
            p.x.clamp(c.x - e.x, c.x + e.x),
            p.z.clamp(c.z - e.z, c.z + e.z),
        )
    }

    /// Height of the ball center when resting on the table.
    pub fn resting_height(&self) -> f64 {
        self.table_height + self.ball_radius
    }
}
