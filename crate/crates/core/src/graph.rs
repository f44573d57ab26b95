use std::collections::{BTreeSet, HashSet};

use log::warn;
use thiserror::Error;

use crate::geometry::{Point, Segment};

pub type VertexId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("vertex {id} has a non-finite position ({x}, {y})")]
    NonFinite { id: VertexId, x: f64, y: f64 },
    #[error("edge ({0}, {1}) references a vertex with no position")]
    MissingEndpoint(VertexId, VertexId),
    #[error("edge ({0}, {1}) has zero length")]
    ZeroLengthEdge(VertexId, VertexId),
}

/// Edges dropped while normalizing an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Normalizes an undirected edge list to `(min, max)` pairs, dropping
/// self-loops and repeated edges while keeping first-seen order.
pub fn normalize_edges(edges: &[(VertexId, VertexId)]) -> (Vec<(VertexId, VertexId)>, IngestStats) {
    let mut stats = IngestStats::default();
    let mut seen = HashSet::with_capacity(edges.len());
    let mut out = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a == b {
            stats.self_loops += 1;
            continue;
        }
        let e = (a.min(b), a.max(b));
        if seen.insert(e) {
            out.push(e);
        } else {
            stats.duplicates += 1;
        }
    }
    if stats.self_loops > 0 || stats.duplicates > 0 {
        warn!(
            "dropped {} self-loop(s) and {} duplicate edge(s)",
            stats.self_loops, stats.duplicates
        );
    }
    (out, stats)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Vertex positions plus an undirected edge list.
///
/// Vertices are stored sorted by id and addressed by dense index, so index
/// order and id order agree. Every edge is stored as `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutGraph {
    ids: Vec<VertexId>,
    positions: Vec<Point>,
    edges: Vec<(usize, usize)>,
}

impl LayoutGraph {
    /// Builds a graph, normalizing edges first.
    ///
    /// Fails on duplicate ids, non-finite coordinates, edges to unknown
    /// vertices, and edges whose endpoints share a position.
    pub fn new(
        vertices: impl IntoIterator<Item = (VertexId, Point)>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<(Self, IngestStats), GraphError> {
        let mut verts: Vec<(VertexId, Point)> = vertices.into_iter().collect();
        verts.sort_by_key(|&(id, _)| id);
        for w in verts.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GraphError::DuplicateVertex(w[0].0));
            }
        }
        if let Some(&(id, p)) = verts.iter().find(|(_, p)| !p.is_finite()) {
            return Err(GraphError::NonFinite { id, x: p.x, y: p.y });
        }
        let ids: Vec<VertexId> = verts.iter().map(|&(id, _)| id).collect();
        let positions: Vec<Point> = verts.iter().map(|&(_, p)| p).collect();

        let (normalized, stats) = normalize_edges(edges);
        let mut indexed = Vec::with_capacity(normalized.len());
        for (a, b) in normalized {
            let (Ok(ia), Ok(ib)) = (ids.binary_search(&a), ids.binary_search(&b)) else {
                return Err(GraphError::MissingEndpoint(a, b));
            };
            if positions[ia] == positions[ib] {
                return Err(GraphError::ZeroLengthEdge(a, b));
            }
            indexed.push((ia, ib));
        }
        Ok((Self { ids, positions, edges: indexed }, stats))
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Edges as dense index pairs `(a, b)`, `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.ids[a], self.ids[b]))
    }

    pub fn segment(&self, edge: usize) -> Segment {
        let (a, b) = self.edges[edge];
        Segment::new(self.positions[a], self.positions[b])
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| Segment::new(self.positions[a], self.positions[b]))
    }

    pub fn vertices_with_edges(&self) -> BTreeSet<usize> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let first = *self.positions.first()?;
        let mut bb = BoundingBox { min: first, max: first };
        for p in &self.positions[1..] {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    /// Applies `f` to every position, keeping the topology.
    pub fn map_positions(&self, f: impl Fn(Point) -> Point) -> Result<Self, GraphError> {
        let vertices: Vec<(VertexId, Point)> =
            self.ids.iter().zip(&self.positions).map(|(&id, &p)| (id, f(p))).collect();
        let edges: Vec<(VertexId, VertexId)> = self.edge_ids().collect();
        Self::new(vertices, &edges).map(|(g, _)| g)
    }

    /// The same drawing mirrored across `y = x`.
    pub fn transposed(&self) -> Self {
        Self {
            ids: self.ids.clone(),
            positions: self.positions.iter().map(Point::transposed).collect(),
            edges: self.edges.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_drops_loops_and_duplicates() {
        let (edges, stats) = normalize_edges(&[(0, 1), (0, 1), (1, 0), (3, 3), (2, 1)]);
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
        assert_eq!(stats, IngestStats { self_loops: 1, duplicates: 2 });
    }

    #[test]
    fn construction_errors() {
        let p = Point::new(0.0, 0.0);
        let q = Point::new(1.0, 0.0);
        assert_eq!(
            LayoutGraph::new([(1, p), (1, q)], &[]).unwrap_err(),
            GraphError::DuplicateVertex(1)
        );
        assert!(matches!(
            LayoutGraph::new([(1, Point::new(f64::NAN, 0.0))], &[]).unwrap_err(),
            GraphError::NonFinite { id: 1, .. }
        ));
        assert_eq!(
            LayoutGraph::new([(1, p)], &[(1, 2)]).unwrap_err(),
            GraphError::MissingEndpoint(1, 2)
        );
        assert_eq!(
            LayoutGraph::new([(1, p), (2, p)], &[(2, 1)]).unwrap_err(),
            GraphError::ZeroLengthEdge(1, 2)
        );
    }

    #[test]
    fn edges_are_index_ordered() {
        let (g, _) = LayoutGraph::new(
            [(10, Point::new(0.0, 0.0)), (5, Point::new(1.0, 0.0)), (7, Point::new(0.0, 1.0))],
            &[(10, 5), (7, 5)],
        )
        .unwrap();
        assert_eq!(g.ids(), &[5, 7, 10]);
        assert_eq!(g.edges(), &[(0, 2), (0, 1)]);
        assert_eq!(g.edge_ids().collect::<Vec<_>>(), vec![(5, 10), (5, 7)]);
    }
}
