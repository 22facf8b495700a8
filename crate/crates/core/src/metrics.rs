//! Accuracy and precision of ball placement.
//!
//! Accuracy is the mean radial error of the landing points from the target
//! center. Precision is the RMS distance of the landing points from their
//! own centroid, so it ignores where the target is. With no drops every
//! metric is absent rather than zero.

use serde::{Deserialize, Serialize};

use crate::engine::DropRecord;
use crate::model::PlanePoint;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionMetrics {
    pub n_drops: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_mre: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_rms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_radius: Option<f64>,
}

impl SessionMetrics {
    pub fn absent() -> Self {
        Self::default()
    }

    pub fn is_absent(&self) -> bool {
        self.n_drops == 0
    }
}

/// Batch computation over a complete list of drops.
pub fn compute_metrics(drops: &[DropRecord], target_center: PlanePoint) -> SessionMetrics {
    if drops.is_empty() {
        return SessionMetrics::absent();
    }
    let n = drops.len() as f64;
    let hits = drops.iter().filter(|d| d.hit).count() as f64;
    let mre = drops
        .iter()
        .map(|d| d.landing_xz.distance(target_center))
        .sum::<f64>()
        / n;
    let cx = drops.iter().map(|d| d.landing_xz.x).sum::<f64>() / n;
    let cz = drops.iter().map(|d| d.landing_xz.z).sum::<f64>() / n;
    let scatter = drops
        .iter()
        .map(|d| {
            let dx = d.landing_xz.x - cx;
            let dz = d.landing_xz.z - cz;
            dx * dx + dz * dz
        })
        .sum::<f64>()
        / n;
    SessionMetrics {
        n_drops: drops.len() as u64,
        hit_rate: Some(hits / n),
        accuracy_mre: Some(mre),
        precision_rms: Some(scatter.sqrt()),
        final_radius: drops.last().map(|d| d.radius_after),
    }
}

/// Running-moment version of [`compute_metrics`] for live sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator {
    target_center: PlanePoint,
    n: u64,
    hits: u64,
    error_sum: f64,
    mean_x: f64,
    mean_z: f64,
    // sum of squared distances from the running centroid
    m2: f64,
    last_radius: Option<f64>,
}

impl MetricsAccumulator {
    pub fn new(target_center: PlanePoint) -> Self {
        Self {
            target_center,
            n: 0,
            hits: 0,
            error_sum: 0.0,
            mean_x: 0.0,
            mean_z: 0.0,
            m2: 0.0,
            last_radius: None,
        }
    }

    pub fn push(&mut self, drop: &DropRecord) {
        let p = drop.landing_xz;
        self.n += 1;
        self.hits += drop.hit as u64;
        self.error_sum += p.distance(self.target_center);
        let n = self.n as f64;
        let dx = p.x - self.mean_x;
        let dz = p.z - self.mean_z;
        self.mean_x += dx / n;
        self.mean_z += dz / n;
        self.m2 += dx * (p.x - self.mean_x) + dz * (p.z - self.mean_z);
        self.last_radius = Some(drop.radius_after);
    }

    pub fn metrics(&self) -> SessionMetrics {
        if self.n == 0 {
            return SessionMetrics::absent();
        }
        let n = self.n as f64;
        SessionMetrics {
            n_drops: self.n,
            hit_rate: Some(self.hits as f64 / n),
            accuracy_mre: Some(self.error_sum / n),
            precision_rms: Some((self.m2 / n).max(0.0).sqrt()),
            final_radius: self.last_radius,
        }
    }
}

/// Metrics for the drops made at one target radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusLevel {
    pub radius: f64,
    pub metrics: SessionMetrics,
}

/// Groups drops by the target radius in force when they were made,
/// largest radius first.
pub fn metrics_by_radius(drops: &[DropRecord], target_center: PlanePoint) -> Vec<RadiusLevel> {
    let mut radii: Vec<f64> = drops.iter().map(|d| d.target_radius_at_drop).collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    radii
        .into_iter()
        .map(|radius| {
            let group: Vec<DropRecord> = drops
                .iter()
                .filter(|d| d.target_radius_at_drop == radius)
                .copied()
                .collect();
            let mut metrics = compute_metrics(&group, target_center);
            // radius after the last drop at this level is not a per-level quantity
            metrics.final_radius = None;
            RadiusLevel { radius, metrics }
        })
        .collect()
}
