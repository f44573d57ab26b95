//! The five readability metrics.
//!
//! * [`oracle`] is the serial brute-force ground truth.
//! * [`parallel`] expresses the same computations as joins, explodes and
//!   aggregations over the [`dataflow`](crate::dataflow) layer.
//! * [`enhanced`] holds the grid and strip-sweep algorithms for node
//!   occlusion, edge crossing and crossing angle.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataflow::DataflowError;
use crate::geometry::GeometryError;
use crate::graph::GraphError;

pub mod enhanced;
pub mod oracle;
pub mod parallel;
pub mod range2d;

/// 70 degrees.
pub const DEFAULT_IDEAL_ANGLE: f64 = 7.0 * PI / 18.0;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("radius must be finite and positive, got {0}")]
    InvalidRadius(f64),
    #[error("ideal angle must lie in (0, π/2] radians, got {0}")]
    InvalidIdealAngle(f64),
    #[error("strip width must be finite and positive (fractions below 1), got {0}")]
    InvalidStripWidth(f64),
    #[error("layout has zero extent along the {0} strip axis")]
    DegenerateExtent(&'static str),
    #[error("strip division would create {0} strips")]
    TooManyStrips(u64),
    #[error("min_gap needs at least one angle")]
    EmptyAngles,
    #[error(transparent)]
    Dataflow(#[from] DataflowError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn check_radius(radius: f64) -> Result<(), MetricError> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(MetricError::InvalidRadius(radius))
    }
}

pub fn check_ideal_angle(ideal: f64) -> Result<(), MetricError> {
    if ideal > 0.0 && ideal <= PI / 2.0 {
        Ok(())
    } else {
        Err(MetricError::InvalidIdealAngle(ideal))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    NodeOcclusion,
    MinimumAngle,
    EdgeLengthVariation,
    EdgeCrossing,
    EdgeCrossingAngle,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::NodeOcclusion,
        MetricKind::MinimumAngle,
        MetricKind::EdgeLengthVariation,
        MetricKind::EdgeCrossing,
        MetricKind::EdgeCrossingAngle,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            MetricKind::NodeOcclusion => "nc",
            MetricKind::MinimumAngle => "ma",
            MetricKind::EdgeLengthVariation => "ml",
            MetricKind::EdgeCrossing => "ec",
            MetricKind::EdgeCrossingAngle => "eca",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.short_name() == s.trim())
            .ok_or_else(|| format!("unknown metric `{s}` (expected one of nc, ma, ml, ec, eca)"))
    }
}

/// Smallest angular gap between consecutive directions around a vertex,
/// including the wrap-around gap from the largest back to the smallest.
pub fn min_gap(angles: &[f64]) -> Result<f64, MetricError> {
    if angles.is_empty() {
        return Err(MetricError::EmptyAngles);
    }
    if angles.len() == 1 {
        return Ok(TAU);
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wrap = TAU - sorted[sorted.len() - 1] + sorted[0];
    Ok(sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min))
}

/// Normalized shortfall of a vertex's smallest gap against the ideal
/// `2π / degree`.
pub(crate) fn angular_deviation(angles: &[f64]) -> Result<f64, MetricError> {
    let ideal = TAU / angles.len() as f64;
    Ok((ideal - min_gap(angles)?) / ideal)
}

/// Relative-or-absolute float comparison used across the metric paths.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-3)
}
