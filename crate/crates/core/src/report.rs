//! Evaluation driver and the report it produces.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize};

use crate::dataflow::Executor;
use crate::graph::{IngestStats, LayoutGraph};
use crate::metrics::enhanced::{self, StripOrientation, StripWidth};
use crate::metrics::{oracle, parallel, MetricError, MetricKind, DEFAULT_IDEAL_ANGLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Oracle,
    ExactParallel,
    Enhanced,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Oracle => "oracle",
            Mode::ExactParallel => "exact-parallel",
            Mode::Enhanced => "enhanced",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(Mode::Oracle),
            "exact" | "exact-parallel" => Ok(Mode::ExactParallel),
            "enhanced" => Ok(Mode::Enhanced),
            _ => Err(format!("unknown mode `{s}` (expected oracle, exact or enhanced)")),
        }
    }
}

// Option fields must be present in the document, even if null.
fn required<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Option::<T>::deserialize(d)
}

/// Parameters every metric path reads. `ideal_angle` is in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    pub radius: f64,
    pub ideal_angle: f64,
    pub strip_width: StripWidth,
    pub orientation: StripOrientation,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            radius: 0.5,
            ideal_angle: DEFAULT_IDEAL_ANGLE,
            strip_width: StripWidth::Fraction(0.05),
            orientation: StripOrientation::Vertical,
        }
    }
}

/// Metric values; `None` for metrics that were not requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricValues {
    #[serde(deserialize_with = "required")]
    pub node_occlusion: Option<u64>,
    #[serde(deserialize_with = "required")]
    pub minimum_angle: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub edge_length_variation: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub edge_crossing: Option<u64>,
    #[serde(deserialize_with = "required")]
    pub edge_crossing_angle: Option<f64>,
}

impl MetricValues {
    /// The value of one metric as a float.
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::NodeOcclusion => self.node_occlusion.map(|v| v as f64),
            MetricKind::MinimumAngle => self.minimum_angle,
            MetricKind::EdgeLengthVariation => self.edge_length_variation,
            MetricKind::EdgeCrossing => self.edge_crossing.map(|v| v as f64),
            MetricKind::EdgeCrossingAngle => self.edge_crossing_angle,
        }
    }
}

/// Wall-clock seconds per metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    #[serde(deserialize_with = "required")]
    pub node_occlusion: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub minimum_angle: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub edge_length_variation: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub edge_crossing: Option<f64>,
    #[serde(deserialize_with = "required")]
    pub edge_crossing_angle: Option<f64>,
}

impl Timings {
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::NodeOcclusion => self.node_occlusion,
            MetricKind::MinimumAngle => self.minimum_angle,
            MetricKind::EdgeLengthVariation => self.edge_length_variation,
            MetricKind::EdgeCrossing => self.edge_crossing,
            MetricKind::EdgeCrossingAngle => self.edge_crossing_angle,
        }
    }

    fn set(&mut self, kind: MetricKind, seconds: f64) {
        let slot = match kind {
            MetricKind::NodeOcclusion => &mut self.node_occlusion,
            MetricKind::MinimumAngle => &mut self.minimum_angle,
            MetricKind::EdgeLengthVariation => &mut self.edge_length_variation,
            MetricKind::EdgeCrossing => &mut self.edge_crossing,
            MetricKind::EdgeCrossingAngle => &mut self.edge_crossing_angle,
        };
        *slot = Some(seconds);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl GraphSummary {
    pub fn new(g: &LayoutGraph, stats: IngestStats) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            self_loops_dropped: stats.self_loops,
            duplicates_dropped: stats.duplicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadabilityReport {
    pub mode: Mode,
    pub workers: usize,
    pub params: EvalParams,
    pub graph: GraphSummary,
    pub metrics: MetricValues,
    pub elapsed: Timings,
    pub warnings: Vec<String>,
}

impl ReadabilityReport {
    /// Name of the first float field that is NaN or infinite.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        let checks = [
            ("params.radius", Some(self.params.radius)),
            ("params.ideal_angle", Some(self.params.ideal_angle)),
            ("params.strip_width", Some(self.params.strip_width.value())),
            ("metrics.minimum_angle", self.metrics.minimum_angle),
            ("metrics.edge_length_variation", self.metrics.edge_length_variation),
            ("metrics.edge_crossing_angle", self.metrics.edge_crossing_angle),
            ("elapsed.node_occlusion", self.elapsed.node_occlusion),
            ("elapsed.minimum_angle", self.elapsed.minimum_angle),
            ("elapsed.edge_length_variation", self.elapsed.edge_length_variation),
            ("elapsed.edge_crossing", self.elapsed.edge_crossing),
            ("elapsed.edge_crossing_angle", self.elapsed.edge_crossing_angle),
        ];
        checks
            .into_iter()
            .find(|(_, v)| v.is_some_and(|v| !v.is_finite()))
            .map(|(name, _)| name)
    }

    /// Copy with all timings cleared, for comparing runs.
    pub fn without_timings(&self) -> Self {
        Self { elapsed: Timings::default(), ..self.clone() }
    }
}

fn timed<T>(elapsed: &mut Timings, kind: MetricKind, f: impl FnOnce() -> Result<T, MetricError>) -> Result<T, MetricError> {
    let start = Instant::now();
    let out = f()?;
    elapsed.set(kind, start.elapsed().as_secs_f64());
    Ok(out)
}

/// Computes the requested metrics on one path.
///
/// In enhanced mode `M_a` and `M_l` come from the exact dataflow path,
/// since neither has a strip or grid formulation. The oracle path ignores
/// the executor.
pub fn evaluate(
    g: &LayoutGraph,
    stats: IngestStats,
    mode: Mode,
    params: &EvalParams,
    metrics: &[MetricKind],
    ex: &Executor,
) -> Result<ReadabilityReport, MetricError> {
    let mut values = MetricValues::default();
    let mut elapsed = Timings::default();
    let mut warnings = Vec::new();
    let p = params;
    for &kind in MetricKind::ALL.iter().filter(|k| metrics.contains(k)) {
        let t = &mut elapsed;
        match kind {
            MetricKind::NodeOcclusion => {
                values.node_occlusion = Some(timed(t, kind, || match mode {
                    Mode::Oracle => oracle::node_occlusion(g, p.radius),
                    Mode::ExactParallel => parallel::node_occlusion(ex, g, p.radius),
                    Mode::Enhanced => enhanced::node_occlusion_grid(g, p.radius, ex),
                })?);
            }
            MetricKind::MinimumAngle => {
                if g.edge_count() == 0 {
                    warnings.push("minimum_angle: graph has no edges; reported as 1".to_string());
                }
                values.minimum_angle = Some(timed(t, kind, || match mode {
                    Mode::Oracle => oracle::minimum_angle(g),
                    Mode::ExactParallel | Mode::Enhanced => parallel::minimum_angle(ex, g),
                })?);
            }
            MetricKind::EdgeLengthVariation => {
                if g.edge_count() <= 1 {
                    warnings.push("edge_length_variation: fewer than two edges; reported as 0".to_string());
                }
                values.edge_length_variation = Some(timed(t, kind, || match mode {
                    Mode::Oracle => Ok(oracle::edge_length_variation(g)),
                    Mode::ExactParallel | Mode::Enhanced => parallel::edge_length_variation(ex, g),
                })?);
            }
            MetricKind::EdgeCrossing => {
                values.edge_crossing = Some(timed(t, kind, || match mode {
                    Mode::Oracle => Ok(oracle::edge_crossing(g)),
                    Mode::ExactParallel => parallel::edge_crossing(ex, g),
                    Mode::Enhanced => enhanced::edge_crossing_enhanced(g, p.strip_width, p.orientation, ex),
                })?);
            }
            MetricKind::EdgeCrossingAngle => {
                values.edge_crossing_angle = Some(timed(t, kind, || match mode {
                    Mode::Oracle => oracle::edge_crossing_angle(g, p.ideal_angle),
                    Mode::ExactParallel => parallel::edge_crossing_angle(ex, g, p.ideal_angle),
                    Mode::Enhanced => enhanced::edge_crossing_angle_enhanced(
                        g,
                        p.strip_width,
                        p.ideal_angle,
                        p.orientation,
                        ex,
                    ),
                })?);
            }
        }
    }
    if mode == Mode::Enhanced
        && metrics
            .iter()
            .any(|k| matches!(k, MetricKind::MinimumAngle | MetricKind::EdgeLengthVariation))
    {
        warnings.push("minimum_angle and edge_length_variation use the exact path in enhanced mode".to_string());
    }
    Ok(ReadabilityReport {
        mode,
        workers: if mode == Mode::Oracle { 1 } else { ex.config().workers },
        params: *params,
        graph: GraphSummary::new(g, stats),
        metrics: values,
        elapsed,
        warnings,
    })
}

/// All five metrics on the dataflow path.
pub fn evaluate_exact(g: &LayoutGraph, params: &EvalParams, ex: &Executor) -> Result<ReadabilityReport, MetricError> {
    evaluate(g, IngestStats::default(), Mode::ExactParallel, params, &MetricKind::ALL, ex)
}

/// All five metrics on the serial oracle.
pub fn evaluate_oracle(g: &LayoutGraph, params: &EvalParams) -> Result<ReadabilityReport, MetricError> {
    let ex = Executor::new(crate::dataflow::ExecConfig::serial())?;
    evaluate(g, IngestStats::default(), Mode::Oracle, params, &MetricKind::ALL, &ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::ExecConfig;
    use crate::geometry::Point;

    fn graph(points: &[(f64, f64)], edges: &[(u64, u64)]) -> LayoutGraph {
        let verts = points.iter().enumerate().map(|(i, &(x, y))| (i as u64, Point::new(x, y)));
        LayoutGraph::new(verts, edges).unwrap().0
    }

    fn x_graph() -> LayoutGraph {
        graph(&[(0.0, 0.0), (2.0, 1.9), (0.0, 1.7), (2.0, 0.1)], &[(0, 1), (2, 3)])
    }

    #[test]
    fn exact_matches_oracle_on_x() {
        let g = x_graph();
        let p = EvalParams::default();
        let ex = Executor::new(ExecConfig::new(2).unwrap()).unwrap();
        let a = evaluate_exact(&g, &p, &ex).unwrap();
        let b = evaluate_oracle(&g, &p).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.metrics.edge_crossing, Some(1));
        assert_eq!(a.mode, Mode::ExactParallel);
    }

    #[test]
    fn empty_edge_list_defaults() {
        let g = graph(&[(0.0, 0.0), (5.0, 5.0)], &[]);
        let r = evaluate_exact(&g, &EvalParams::default(), &Executor::new(ExecConfig::serial()).unwrap()).unwrap();
        assert_eq!(r.metrics.edge_crossing, Some(0));
        assert_eq!(r.metrics.edge_crossing_angle, Some(1.0));
        assert_eq!(r.metrics.edge_length_variation, Some(0.0));
        assert_eq!(r.metrics.minimum_angle, Some(1.0));
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn only_requested_metrics_are_filled() {
        let g = x_graph();
        let ex = Executor::new(ExecConfig::serial()).unwrap();
        let r = evaluate(
            &g,
            IngestStats::default(),
            Mode::Enhanced,
            &EvalParams::default(),
            &[MetricKind::EdgeCrossing],
            &ex,
        )
        .unwrap();
        assert_eq!(r.metrics.edge_crossing, Some(1));
        assert!(r.metrics.node_occlusion.is_none() && r.elapsed.node_occlusion.is_none());
        assert!(r.elapsed.edge_crossing.is_some());
    }

    #[test]
    fn worker_count_keeps_counts() {
        let g = x_graph();
        let p = EvalParams::default();
        let one = evaluate_exact(&g, &p, &Executor::new(ExecConfig::new(1).unwrap()).unwrap()).unwrap();
        let eight = evaluate_exact(&g, &p, &Executor::new(ExecConfig::new(8).unwrap()).unwrap()).unwrap();
        assert_eq!(one.metrics, eight.metrics);
    }

    #[test]
    fn non_finite_fields_are_named() {
        let g = x_graph();
        let mut r = evaluate_oracle(&g, &EvalParams::default()).unwrap();
        assert_eq!(r.first_non_finite(), None);
        r.metrics.minimum_angle = Some(f64::NAN);
        assert_eq!(r.first_non_finite(), Some("metrics.minimum_angle"));
    }

    #[test]
    fn mode_names() {
        for m in [Mode::Oracle, Mode::ExactParallel, Mode::Enhanced] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("exact".parse::<Mode>().unwrap(), Mode::ExactParallel);
        assert_eq!(serde_json::to_string(&Mode::ExactParallel).unwrap(), "\"exact-parallel\"");
    }
}
