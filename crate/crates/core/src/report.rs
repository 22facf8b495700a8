//! Session reports: a printable table and a line-delimited JSON form with
//! one record per target radius plus a session summary.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::DropRecord;
use crate::metrics::{compute_metrics, metrics_by_radius, RadiusLevel, SessionMetrics};
use crate::model::PlanePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summary: SessionMetrics,
    pub levels: Vec<RadiusLevel>,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ReportLine<'a> {
    Level {
        radius: f64,
        #[serde(flatten)]
        metrics: &'a SessionMetrics,
    },
    Summary {
        #[serde(flatten)]
        metrics: &'a SessionMetrics,
    },
}

impl Report {
    pub fn build(drops: &[DropRecord], target_center: PlanePoint) -> Self {
        Self {
            summary: compute_metrics(drops, target_center),
            levels: metrics_by_radius(drops, target_center),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for level in &self.levels {
            let line = ReportLine::Level {
                radius: level.radius,
                metrics: &level.metrics,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(
            &mut out,
            &ReportLine::Summary {
                metrics: &self.summary,
            },
        )?;
        out.write_all(b"\n")?;
        out.flush()
    }

    /// Human-readable table. Lengths are shown in whole millimeters.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let m = &self.summary;
        let _ = writeln!(s, "Session summary");
        let _ = writeln!(s, "  drops            {}", m.n_drops);
        let _ = writeln!(s, "  hit rate         {}", pct(m.hit_rate));
        let _ = writeln!(s, "  accuracy (MRE)   {}", mm(m.accuracy_mre));
        let _ = writeln!(s, "  precision (RMS)  {}", mm(m.precision_rms));
        let _ = writeln!(s, "  final radius     {}", mm(m.final_radius));
        if !self.levels.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "{:>12}  {:>6}  {:>9}  {:>14}  {:>15}",
                "radius (mm)", "drops", "hit rate", "accuracy (mm)", "precision (mm)"
            );
            for l in &self.levels {
                let _ = writeln!(
                    s,
                    "{:>12.0}  {:>6}  {:>9}  {:>14}  {:>15}",
                    l.radius * 1000.0,
                    l.metrics.n_drops,
                    pct(l.metrics.hit_rate),
                    num_mm(l.metrics.accuracy_mre),
                    num_mm(l.metrics.precision_rms),
                );
            }
        }
        s
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{:.1}%", v * 100.0))
}

fn mm(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{:.0} mm", v * 1000.0))
}

fn num_mm(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{:.0}", v * 1000.0))
}
