//! Straightforward serial implementations used as ground truth.

use crate::geometry::{axis_angle, crossing_angle, incident_angle, properly_intersect, Segment};
use crate::graph::LayoutGraph;

use super::{angular_deviation, check_ideal_angle, check_radius, MetricError};

/// Unordered vertex pairs whose centers are closer than `2r`.
pub fn node_occlusion(g: &LayoutGraph, radius: f64) -> Result<u64, MetricError> {
    check_radius(radius)?;
    let limit = 4.0 * radius * radius;
    let pos = g.positions();
    let mut count = 0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i].distance_squared(&pos[j]) < limit {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `1 - mean(d_v)` over vertices with at least one edge; 1 when there are
/// no edges.
pub fn minimum_angle(g: &LayoutGraph) -> Result<f64, MetricError> {
    let pos = g.positions();
    let mut incident: Vec<Vec<f64>> = vec![Vec::new(); g.vertex_count()];
    for &(a, b) in g.edges() {
        incident[a].push(incident_angle(pos[a], pos[b])?);
        incident[b].push(incident_angle(pos[b], pos[a])?);
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for angles in incident.iter().filter(|a| !a.is_empty()) {
        sum += angular_deviation(angles)?;
        n += 1;
    }
    Ok(if n == 0 { 1.0 } else { 1.0 - sum / n as f64 })
}

/// Normalized coefficient of variation of edge lengths; 0 for fewer than
/// two edges.
pub fn edge_length_variation(g: &LayoutGraph) -> f64 {
    let lengths: Vec<f64> = g.segments().map(|s| s.length()).collect();
    let n = lengths.len();
    if n <= 1 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = lengths.iter().sum::<f64>() / nf;
    let spread = lengths
        .iter()
        .map(|l| (l - mean).powi(2) / (nf * mean * mean))
        .sum::<f64>()
        .sqrt();
    spread / (nf - 1.0).sqrt()
}

/// Calls `f(i, j)` for every non-adjacent pair `i < j` passing the
/// orientation predicate.
fn for_each_crossing(g: &LayoutGraph, mut f: impl FnMut(usize, usize)) {
    let segments: Vec<Segment> = g.segments().collect();
    let ends = g.edges();
    for (i, si) in segments.iter().enumerate() {
        let (a1, b1) = ends[i];
        for (j, sj) in segments.iter().enumerate().skip(i + 1) {
            if properly_intersect(si, sj) {
                let (a2, b2) = ends[j];
                if a1 != a2 && a1 != b2 && b1 != a2 && b1 != b2 {
                    f(i, j);
                }
            }
        }
    }
}

/// Non-adjacent edge pairs satisfying the orientation crossing predicate.
pub fn edge_crossing(g: &LayoutGraph) -> u64 {
    let segments: Vec<Segment> = g.segments().collect();
    let ends = g.edges();
    let mut count = 0u64;
    for (i, si) in segments.iter().enumerate() {
        let (a1, b1) = ends[i];
        for (sj, &(a2, b2)) in segments[i + 1..].iter().zip(&ends[i + 1..]) {
            let apart = (a1 != a2) & (a1 != b2) & (b1 != a2) & (b1 != b2);
            count += u64::from(apart & properly_intersect(si, sj));
        }
    }
    count
}

/// Every crossing pair as `(i, j)` edge indices with `i < j`.
pub fn crossing_pairs(g: &LayoutGraph) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for_each_crossing(g, |i, j| pairs.push((i, j)));
    pairs
}

/// `1 - mean(|ϑ - a_c| / ϑ)` over crossing pairs; 1 when nothing crosses.
pub fn edge_crossing_angle(g: &LayoutGraph, ideal: f64) -> Result<f64, MetricError> {
    check_ideal_angle(ideal)?;
    let angles = g.segments().map(|s| axis_angle(&s)).collect::<Result<Vec<_>, _>>()?;
    let mut sum = 0.0;
    let mut n = 0u64;
    for_each_crossing(g, |i, j| {
        sum += (ideal - crossing_angle(angles[i], angles[j])).abs() / ideal;
        n += 1;
    });
    Ok(if n == 0 { 1.0 } else { 1.0 - sum / n as f64 })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::geometry::Point;
    use crate::metrics::DEFAULT_IDEAL_ANGLE;

    fn graph(points: &[(f64, f64)], edges: &[(u64, u64)]) -> LayoutGraph {
        let verts = points.iter().enumerate().map(|(i, &(x, y))| (i as u64, Point::new(x, y)));
        LayoutGraph::new(verts, edges).unwrap().0
    }

    #[test]
    fn occlusion_examples() {
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (10.0, 10.0)], &[]);
        assert_eq!(node_occlusion(&g, 1.0).unwrap(), 1);
        let g = graph(&[(3.0, 3.0); 5], &[]);
        assert_eq!(node_occlusion(&g, 1.0).unwrap(), 10);
        let g = graph(&[(0.0, 0.0), (2.0, 0.0)], &[]);
        assert_eq!(node_occlusion(&g, 1.0).unwrap(), 0);
        assert!(node_occlusion(&g, 0.0).is_err());
    }

    #[test]
    fn minimum_angle_examples() {
        // path through the middle vertex: gap π equals ideal π
        let g = graph(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], &[(0, 1), (1, 2)]);
        assert_eq!(minimum_angle(&g).unwrap(), 1.0);
        // center with edges at 0 and π/2: d = 0.5; leaves contribute 0
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], &[(0, 1), (0, 2)]);
        assert!((minimum_angle(&g).unwrap() - (1.0 - 0.5 / 3.0)).abs() < 1e-15);
        // evenly spaced star
        let k = 7;
        let mut pts = vec![(0.0, 0.0)];
        pts.extend((0..k).map(|i| {
            let a = TAU * i as f64 / k as f64;
            (a.cos(), a.sin())
        }));
        let edges: Vec<(u64, u64)> = (1..=k as u64).map(|i| (0, i)).collect();
        assert!((minimum_angle(&graph(&pts, &edges)).unwrap() - 1.0).abs() < 1e-12);
        // no edges
        assert_eq!(minimum_angle(&graph(&[(0.0, 0.0)], &[])).unwrap(), 1.0);
    }

    #[test]
    fn length_variation_examples() {
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], &[(0, 1), (1, 2)]);
        assert_eq!(edge_length_variation(&g), 0.0);
        // lengths {1, 3}: mean 2, l_a = sqrt(2 / 8) = 0.5, divided by sqrt(1)
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (1.0, 3.0)], &[(0, 1), (1, 2)]);
        assert!((edge_length_variation(&g) - 0.5).abs() < 1e-15);
        let g10 = g.map_positions(|p| Point::new(p.x * 10.0, p.y * 10.0)).unwrap();
        assert!((edge_length_variation(&g10) - 0.5).abs() < 1e-14);
        assert_eq!(edge_length_variation(&graph(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)])), 0.0);
    }

    #[test]
    fn crossing_examples() {
        let x = graph(&[(0.0, 0.0), (2.0, 2.0), (0.0, 2.0), (2.0, 0.0)], &[(0, 1), (2, 3)]);
        assert_eq!(edge_crossing(&x), 1);
        let star = graph(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)],
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
        );
        assert_eq!(edge_crossing(&star), 0);
        // K4 with vertex 3 inside the outer triangle
        let k4 = graph(
            &[(0.0, 0.0), (4.0, 0.0), (2.0, 4.0), (2.0, 1.0)],
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        );
        assert_eq!(edge_crossing(&k4), 0);
        assert_eq!(crossing_pairs(&x), vec![(0, 1)]);
    }

    #[test]
    fn crossing_angle_examples() {
        // single crossing at exactly 70 degrees
        let t = DEFAULT_IDEAL_ANGLE;
        let g = graph(
            &[(-1.0, 0.0), (1.0, 0.0), (-t.cos(), -t.sin()), (t.cos(), t.sin())],
            &[(0, 1), (2, 3)],
        );
        assert!((edge_crossing_angle(&g, t).unwrap() - 1.0).abs() < 1e-12);
        // perpendicular: deviation (90 - 70) / 70 = 2/7
        let g = graph(&[(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)], &[(0, 1), (2, 3)]);
        assert!((edge_crossing_angle(&g, t).unwrap() - 5.0 / 7.0).abs() < 1e-12);
        let g = graph(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)]);
        assert_eq!(edge_crossing_angle(&g, t).unwrap(), 1.0);
        assert!(edge_crossing_angle(&g, PI).is_err());
    }
}
