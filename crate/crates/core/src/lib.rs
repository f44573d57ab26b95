//! Readability metrics for straight-line graph drawings.
//!
//! Five metrics are provided: node occlusion, minimum angle, edge length
//! variation, edge crossing and edge crossing angle. Each has a serial
//! brute-force implementation ([`metrics::oracle`]) and a data-parallel one
//! built from joins and aggregations ([`metrics::parallel`]); the two agree
//! exactly. Node occlusion, edge crossing and crossing angle also have
//! grid and strip-sweep versions ([`metrics::enhanced`]) that avoid
//! all-pairs work, the strip versions trading exactness for speed.

pub mod dataflow;
pub mod geometry;
pub mod graph;
pub mod graphio;
pub mod metrics;
pub mod report;

pub use geometry::Point;
pub use graph::{LayoutGraph, VertexId};
pub use metrics::{MetricError, MetricKind};
pub use report::{evaluate, EvalParams, Mode, ReadabilityReport};
