//! Grid and strip algorithms.
//!
//! Node occlusion maps every vertex to the `2r × 2r` cells its disc touches
//! and only compares vertices that share a cell, which is exact.
//!
//! Edge crossing cuts the layout into parallel strips. Inside one strip only
//! the pieces of edges that span it completely are kept; two such pieces
//! cross inside the strip exactly when their order on the left boundary is
//! the reverse of their order on the right boundary, so counting crossings
//! is counting inversions. Crossings whose strip is not spanned by both
//! edges are missed, which makes the result a lower bound that tightens as
//! strips get narrower.
//!
//! The crossing-angle variant runs the same sweep but keeps every swept
//! piece in a [`RangeStructure2D`], so the deviations of all partners of a
//! piece can be summed from per-class counts and angle sums.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataflow::{CollectList, Column, ColumnKind, Executor, Schema, Value};
use crate::geometry::{ordinate_at, undirected_angle, Point};
use crate::graph::{LayoutGraph, VertexId};

use super::range2d::{category_stats, deviation_from_categories, RangeStructure2D};
use super::{check_ideal_angle, check_radius, parallel, MetricError};

/// Refuse plans that would allocate more boundaries than this.
const MAX_STRIPS: u64 = 1 << 24;

/// Strip width, either as a fraction of the layout's extent along the strip
/// axis or in layout units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "value", rename_all = "lowercase")]
pub enum StripWidth {
    Fraction(f64),
    Absolute(f64),
}

impl StripWidth {
    pub fn value(self) -> f64 {
        match self {
            StripWidth::Fraction(v) | StripWidth::Absolute(v) => v,
        }
    }

    fn strip_count(self, extent: f64) -> Result<u64, MetricError> {
        let raw = match self {
            StripWidth::Fraction(f) if f.is_finite() && f > 0.0 && f < 1.0 => (1.0 / f).ceil(),
            StripWidth::Absolute(w) if w.is_finite() && w > 0.0 => (extent / w).ceil(),
            other => return Err(MetricError::InvalidStripWidth(other.value())),
        };
        if !raw.is_finite() || raw > MAX_STRIPS as f64 {
            return Err(MetricError::TooManyStrips(if raw.is_finite() { raw as u64 } else { u64::MAX }));
        }
        Ok((raw as u64).max(1))
    }
}

/// Which coordinate the strips partition. Vertical strips are bands of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripAxis {
    Vertical,
    Horizontal,
}

impl StripAxis {
    fn name(self) -> &'static str {
        match self {
            StripAxis::Vertical => "vertical",
            StripAxis::Horizontal => "horizontal",
        }
    }

    /// Maps a point into coordinates where the strips are vertical.
    #[inline]
    fn local(self, p: Point) -> Point {
        match self {
            StripAxis::Vertical => p,
            StripAxis::Horizontal => p.transposed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripOrientation {
    #[default]
    Vertical,
    Horizontal,
    Both,
}

impl StripOrientation {
    fn axes(self) -> &'static [StripAxis] {
        match self {
            StripOrientation::Vertical => &[StripAxis::Vertical],
            StripOrientation::Horizontal => &[StripAxis::Horizontal],
            StripOrientation::Both => &[StripAxis::Vertical, StripAxis::Horizontal],
        }
    }
}

impl fmt::Display for StripOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StripOrientation::Vertical => "vertical",
            StripOrientation::Horizontal => "horizontal",
            StripOrientation::Both => "both",
        })
    }
}

impl FromStr for StripOrientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertical" => Ok(StripOrientation::Vertical),
            "horizontal" => Ok(StripOrientation::Horizontal),
            "both" => Ok(StripOrientation::Both),
            _ => Err(format!("unknown orientation `{s}` (expected vertical, horizontal or both)")),
        }
    }
}

/// One edge clipped to one strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSegment {
    pub edge_id: (VertexId, VertexId),
    /// Ordinate on the strip's left boundary.
    pub l: f64,
    /// Ordinate on the strip's right boundary.
    pub r: f64,
    /// Axis angle of the edge in strip-local coordinates, in `[0, π)`.
    pub theta: f64,
}

/// Equal-width strips covering the layout's extent along one axis.
#[derive(Debug, Clone)]
pub struct StripPlan {
    axis: StripAxis,
    boundaries: Vec<f64>,
}

impl StripPlan {
    pub fn new(g: &LayoutGraph, width: StripWidth, axis: StripAxis) -> Result<Self, MetricError> {
        let bb = g.bounding_box().ok_or(MetricError::DegenerateExtent(axis.name()))?;
        let (lo, hi) = match axis {
            StripAxis::Vertical => (bb.min.x, bb.max.x),
            StripAxis::Horizontal => (bb.min.y, bb.max.y),
        };
        let extent = hi - lo;
        if extent.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(MetricError::DegenerateExtent(axis.name()));
        }
        let n = width.strip_count(extent)? as usize;
        let mut boundaries: Vec<f64> = (0..=n).map(|k| lo + extent * (k as f64 / n as f64)).collect();
        boundaries[n] = hi;
        Ok(Self { axis, boundaries })
    }

    pub fn axis(&self) -> StripAxis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `len() + 1` boundary coordinates along the strip axis.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }
}

/// The run of strips an edge spans completely.
#[derive(Debug, Clone, Copy)]
struct Span {
    edge: u32,
    first: u32,
    last: u32,
    p: Point,
    q: Point,
    theta: f64,
}

fn spans(g: &LayoutGraph, plan: &StripPlan) -> Vec<Span> {
    let b = &plan.boundaries;
    let mut out: Vec<Span> = g
        .segments()
        .enumerate()
        .filter_map(|(e, s)| {
            let (a, c) = (plan.axis.local(s.a), plan.axis.local(s.b));
            let (p, q) = if a.x <= c.x { (a, c) } else { (c, a) };
            if p.x == q.x {
                return None;
            }
            let first = b.partition_point(|&x| x < p.x);
            let upto = b.partition_point(|&x| x <= q.x);
            if upto < first + 2 {
                return None;
            }
            Some(Span {
                edge: e as u32,
                first: first as u32,
                last: (upto - 2) as u32,
                p,
                q,
                theta: undirected_angle(q.x - p.x, q.y - p.y),
            })
        })
        .collect();
    out.sort_by_key(|s| s.first);
    out
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    l: f64,
    r: f64,
    theta: f64,
    edge: u32,
}

/// Runs `per_strip` on the pieces of every strip, distributing contiguous
/// strip ranges over the executor's workers. Results come back in strip
/// order.
fn for_each_strip<T, F>(plan: &StripPlan, spans: &[Span], ex: &Executor, per_strip: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Vec<Piece>) -> T + Sync,
{
    let n = plan.len();
    let chunks = (ex.config().target_partitions * 4).clamp(1, n.max(1));
    let per_chunk = n.div_ceil(chunks);
    let b = &plan.boundaries;
    let per_chunk_results: Vec<Vec<T>> = ex.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let (s0, s1) = ((c * per_chunk).min(n), ((c + 1) * per_chunk).min(n));
                let mut out = Vec::with_capacity(s1 - s0);
                if s0 == s1 {
                    return out;
                }
                let mut next = spans.partition_point(|s| s.first as usize <= s0);
                let mut active: Vec<usize> = (0..next).filter(|&i| spans[i].last as usize >= s0).collect();
                let mut pieces = Vec::new();
                for s in s0..s1 {
                    if s > s0 {
                        while next < spans.len() && spans[next].first as usize <= s {
                            active.push(next);
                            next += 1;
                        }
                        active.retain(|&i| spans[i].last as usize >= s);
                    }
                    pieces.clear();
                    pieces.extend(active.iter().map(|&i| {
                        let sp = &spans[i];
                        Piece {
                            l: ordinate_at(sp.p, sp.q, b[s]),
                            r: ordinate_at(sp.p, sp.q, b[s + 1]),
                            theta: sp.theta,
                            edge: sp.edge,
                        }
                    }));
                    out.push(per_strip(&mut pieces));
                }
                out
            })
            .collect()
    });
    per_chunk_results.into_iter().flatten().collect()
}

/// Every strip's pieces, keyed by strip index. Strips no edge spans are
/// omitted.
pub fn build_strips(
    g: &LayoutGraph,
    width: StripWidth,
    axis: StripAxis,
) -> Result<BTreeMap<usize, Vec<StripSegment>>, MetricError> {
    let plan = StripPlan::new(g, width, axis)?;
    let spans = spans(g, &plan);
    let b = &plan.boundaries;
    let ids = g.ids();
    let mut strips: BTreeMap<usize, Vec<StripSegment>> = BTreeMap::new();
    for sp in &spans {
        let (a, c) = g.edges()[sp.edge as usize];
        for s in sp.first as usize..=sp.last as usize {
            strips.entry(s).or_default().push(StripSegment {
                edge_id: (ids[a], ids[c]),
                l: ordinate_at(sp.p, sp.q, b[s]),
                r: ordinate_at(sp.p, sp.q, b[s + 1]),
                theta: sp.theta,
            });
        }
    }
    Ok(strips)
}

struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks `<= i`.
    fn at_most(&self, i: usize) -> u64 {
        let mut i = i + 1;
        let mut s = 0u64;
        while i > 0 {
            s += u64::from(self.tree[i]);
            i &= i - 1;
        }
        s
    }
}

fn ranks(values: impl Iterator<Item = f64> + Clone) -> (Vec<f64>, Vec<usize>) {
    let mut sorted: Vec<f64> = values.clone().collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let ranks = values.map(|v| sorted.partition_point(|&x| x < v)).collect();
    (sorted, ranks)
}

/// Iterates over maximal runs of equal `l` in pieces already sorted by `l`.
fn l_groups(pieces: &[Piece]) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= pieces.len() {
            return None;
        }
        let l = pieces[start].l;
        let end = start + pieces[start..].iter().take_while(|p| p.l == l).count();
        let range = start..end;
        start = end;
        Some(range)
    })
}

fn count_inversions(pieces: &mut [Piece]) -> u64 {
    if pieces.len() < 2 {
        return 0;
    }
    pieces.sort_by(|a, b| a.l.total_cmp(&b.l));
    let (distinct, rank) = ranks(pieces.iter().map(|p| p.r));
    let mut tree = Fenwick::new(distinct.len());
    let mut inserted = 0u64;
    let mut crossings = 0u64;
    for group in l_groups(pieces) {
        for i in group.clone() {
            crossings += inserted - tree.at_most(rank[i]);
        }
        for i in group {
            tree.add(rank[i]);
            inserted += 1;
        }
    }
    crossings
}

/// Pairs `(i, j)` with `(l_j - l_i)(r_j - r_i) < 0`, counted in
/// `O(n log n)`. Ties on either boundary never count.
pub fn count_strip_crossings(segments: &[StripSegment]) -> u64 {
    let mut pieces: Vec<Piece> = segments
        .iter()
        .map(|s| Piece { l: s.l, r: s.r, theta: s.theta, edge: 0 })
        .collect();
    count_inversions(&mut pieces)
}

/// Crossing count and summed `|ϑ - a_c|` from one or more strip sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AngleSweep {
    pub crossings: u64,
    pub deviation_sum: f64,
}

impl AngleSweep {
    /// `1 - mean(|ϑ - a_c| / ϑ)`, or 1 when nothing was found.
    pub fn edge_crossing_angle(&self, ideal: f64) -> f64 {
        if self.crossings == 0 {
            1.0
        } else {
            1.0 - (self.deviation_sum / ideal) / self.crossings as f64
        }
    }
}

fn sweep_angles(pieces: &mut [Piece], ideal: f64) -> AngleSweep {
    if pieces.len() < 2 {
        return AngleSweep::default();
    }
    pieces.sort_by(|a, b| a.l.total_cmp(&b.l));
    let (distinct, rank) = ranks(pieces.iter().map(|p| p.r));
    let universe: Vec<(f64, f64)> = pieces.iter().map(|p| (p.theta, p.r)).collect();
    let mut index = RangeStructure2D::new(&universe);
    let mut tree = Fenwick::new(distinct.len());
    let mut inserted = 0u64;
    let mut out = AngleSweep::default();
    for group in l_groups(pieces) {
        for i in group.clone() {
            // most pieces have no partner; skip the 2-D query for them
            if inserted == tree.at_most(rank[i]) {
                continue;
            }
            let stats = category_stats(&index, pieces[i].theta, pieces[i].r, ideal);
            let (n, dev) = deviation_from_categories(&stats, pieces[i].theta, ideal);
            debug_assert_eq!(n, inserted - tree.at_most(rank[i]));
            out.crossings += n;
            out.deviation_sum += dev;
        }
        for i in group {
            index.insert(i);
            tree.add(rank[i]);
            inserted += 1;
        }
    }
    out
}

fn strip_crossings_on_axis(
    g: &LayoutGraph,
    width: StripWidth,
    axis: StripAxis,
    ex: &Executor,
) -> Result<u64, MetricError> {
    let plan = StripPlan::new(g, width, axis)?;
    let spans = spans(g, &plan);
    Ok(for_each_strip(&plan, &spans, ex, |pieces| count_inversions(pieces))
        .into_iter()
        .sum())
}

fn angle_sweep_on_axis(
    g: &LayoutGraph,
    width: StripWidth,
    axis: StripAxis,
    ideal: f64,
    ex: &Executor,
) -> Result<AngleSweep, MetricError> {
    let plan = StripPlan::new(g, width, axis)?;
    let spans = spans(g, &plan);
    let per_strip = for_each_strip(&plan, &spans, ex, |pieces| sweep_angles(pieces, ideal));
    Ok(per_strip.into_iter().fold(AngleSweep::default(), |acc, s| AngleSweep {
        crossings: acc.crossings + s.crossings,
        deviation_sum: acc.deviation_sum + s.deviation_sum,
    }))
}

/// Approximate edge crossing count. With [`StripOrientation::Both`] the
/// larger of the two single-axis counts is returned.
pub fn edge_crossing_enhanced(
    g: &LayoutGraph,
    width: StripWidth,
    orientation: StripOrientation,
    ex: &Executor,
) -> Result<u64, MetricError> {
    if g.edge_count() < 2 {
        return Ok(0);
    }
    let mut best = 0;
    for &axis in orientation.axes() {
        best = best.max(strip_crossings_on_axis(g, width, axis, ex)?);
    }
    Ok(best)
}

/// Strip-sweep crossing count and deviation sum. With
/// [`StripOrientation::Both`] the statistics of the axis that found more
/// crossings are kept (vertical on ties).
pub fn crossing_angle_sweep(
    g: &LayoutGraph,
    width: StripWidth,
    ideal: f64,
    orientation: StripOrientation,
    ex: &Executor,
) -> Result<AngleSweep, MetricError> {
    check_ideal_angle(ideal)?;
    if g.edge_count() < 2 {
        return Ok(AngleSweep::default());
    }
    let mut best: Option<AngleSweep> = None;
    for &axis in orientation.axes() {
        let s = angle_sweep_on_axis(g, width, axis, ideal, ex)?;
        if best.map_or(true, |b| s.crossings > b.crossings) {
            best = Some(s);
        }
    }
    Ok(best.unwrap_or_default())
}

pub fn edge_crossing_angle_enhanced(
    g: &LayoutGraph,
    width: StripWidth,
    ideal: f64,
    orientation: StripOrientation,
    ex: &Executor,
) -> Result<f64, MetricError> {
    Ok(crossing_angle_sweep(g, width, ideal, orientation, ex)?.edge_crossing_angle(ideal))
}

/// Debug enumeration of the pairs each strip counts, as
/// `(strip, edge_i, edge_j)` with `edge_i < edge_j`. Quadratic per strip.
pub fn enumerate_strip_crossings(
    g: &LayoutGraph,
    width: StripWidth,
    axis: StripAxis,
) -> Result<Vec<(usize, usize, usize)>, MetricError> {
    let plan = StripPlan::new(g, width, axis)?;
    let spans = spans(g, &plan);
    let b = &plan.boundaries;
    let mut by_strip: BTreeMap<usize, Vec<Piece>> = BTreeMap::new();
    for sp in &spans {
        for s in sp.first as usize..=sp.last as usize {
            by_strip.entry(s).or_default().push(Piece {
                l: ordinate_at(sp.p, sp.q, b[s]),
                r: ordinate_at(sp.p, sp.q, b[s + 1]),
                theta: sp.theta,
                edge: sp.edge,
            });
        }
    }
    let mut out = Vec::new();
    for (s, pieces) in by_strip {
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                let (a, c) = (&pieces[i], &pieces[j]);
                if (c.l - a.l) * (c.r - a.r) < 0.0 {
                    let (e1, e2) = (a.edge.min(c.edge) as usize, a.edge.max(c.edge) as usize);
                    out.push((s, e1, e2));
                }
            }
        }
    }
    Ok(out)
}

/// Exact node occlusion through a `2r × 2r` grid.
///
/// Each vertex is emitted once per cell touched by its disc's bounding
/// square (at most four). Any two discs that overlap share the cell holding
/// the midpoint of their centers, so pairwise tests inside cells followed by
/// a distinct over pairs count every occluding pair once.
pub fn node_occlusion_grid(g: &LayoutGraph, radius: f64, ex: &Executor) -> Result<u64, MetricError> {
    check_radius(radius)?;
    let cell = 2.0 * radius;
    let limit = cell * cell;
    let positions = parallel::positions_table(ex, g)?;
    let schema = Schema::new(vec![
        Column::new("cx", ColumnKind::Int),
        Column::new("cy", ColumnKind::Int),
        Column::new("id", ColumnKind::Int),
        Column::new("pos", ColumnKind::Pair),
    ])?;
    let mapped = ex.flat_map(&positions, schema, |row, out| {
        let (x, y) = row[1].as_pair().expect("pair column");
        let (x0, x1) = (((x - radius) / cell).floor() as i64, ((x + radius) / cell).floor() as i64);
        let (y0, y1) = (((y - radius) / cell).floor() as i64, ((y + radius) / cell).floor() as i64);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                out.push(vec![Value::Int(cx), Value::Int(cy), row[0].clone(), row[1].clone()]);
            }
        }
    })?;
    let collect = CollectList::new(mapped.schema(), &["id", "pos"], "members")?;
    let cells = ex.group_aggregate(&mapped, &["cx", "cy"], &collect)?;
    let members = cells.schema().index_of("members")?;
    let pair_schema = Schema::new(vec![
        Column::new("v", ColumnKind::Int),
        Column::new("u", ColumnKind::Int),
    ])?;
    let pairs = ex.flat_map(&cells, pair_schema, |row, out| {
        let items: Vec<(i64, Point)> = row[members]
            .as_array()
            .unwrap_or(&[])
            .iter()
            .filter_map(|t| {
                let t = t.as_tuple()?;
                let (x, y) = t[1].as_pair()?;
                Some((t[0].as_int()?, Point::new(x, y)))
            })
            .collect();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i].1.distance_squared(&items[j].1) < limit {
                    let (a, b) = (items[i].0.min(items[j].0), items[i].0.max(items[j].0));
                    out.push(vec![Value::Int(a), Value::Int(b)]);
                }
            }
        }
    })?;
    Ok(ex.count(&ex.distinct(&pairs)) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::ExecConfig;
    use crate::geometry::{clip_to_strip, crossing_angle, Segment};
    use crate::metrics::{oracle, DEFAULT_IDEAL_ANGLE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;
    use std::f64::consts::PI;

    fn serial() -> Executor {
        Executor::new(ExecConfig::serial()).unwrap()
    }

    fn graph(points: &[(f64, f64)], edges: &[(u64, u64)]) -> LayoutGraph {
        let verts = points.iter().enumerate().map(|(i, &(x, y))| (i as u64, Point::new(x, y)));
        LayoutGraph::new(verts, edges).unwrap().0
    }

    fn random_graph(seed: u64, n: usize, m: usize, extent: f64) -> LayoutGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.gen_range(0.0..extent), rng.gen_range(0.0..extent))).collect();
        let edges: Vec<(u64, u64)> = (0..m)
            .map(|_| (rng.gen_range(0..n as u64), rng.gen_range(0..n as u64)))
            .collect();
        graph(&pts, &edges)
    }

    fn seg(l: f64, r: f64) -> StripSegment {
        StripSegment { edge_id: (0, 1), l, r, theta: 0.0 }
    }

    fn brute_inversions(segments: &[StripSegment]) -> u64 {
        let mut n = 0;
        for i in 0..segments.len() {
            for j in i + 1..segments.len() {
                if (segments[j].l - segments[i].l) * (segments[j].r - segments[i].r) < 0.0 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn strip_count_examples() {
        assert_eq!(count_strip_crossings(&[seg(0.0, 1.0), seg(1.0, 0.0)]), 1);
        assert_eq!(count_strip_crossings(&[seg(0.0, 0.0), seg(1.0, 1.0), seg(2.0, 2.0)]), 0);
        // ties on either side never count
        assert_eq!(count_strip_crossings(&[seg(0.0, 1.0), seg(0.0, 0.0)]), 0);
        assert_eq!(count_strip_crossings(&[seg(0.0, 1.0), seg(1.0, 1.0)]), 0);
        assert_eq!(count_strip_crossings(&[]), 0);
    }

    #[test]
    fn strip_count_matches_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(0..100);
            let segs: Vec<StripSegment> = (0..n)
                .map(|_| seg(rng.gen_range(0..20) as f64, rng.gen_range(0..20) as f64))
                .collect();
            assert_eq!(count_strip_crossings(&segs), brute_inversions(&segs));
        }
    }

    #[test]
    fn build_strips_examples() {
        // horizontal edge across the whole box
        let g = graph(&[(0.0, 1.0), (8.0, 1.0), (3.0, 0.0), (3.0, 2.0)], &[(0, 1)]);
        let strips = build_strips(&g, StripWidth::Fraction(0.25), StripAxis::Vertical).unwrap();
        assert_eq!(strips.len(), 4);
        assert!(strips.values().all(|s| s.len() == 1 && s[0].l == 1.0 && s[0].r == 1.0));

        // shorter than one strip
        let g = graph(&[(0.0, 0.0), (8.0, 0.0), (0.5, 1.0), (1.5, 2.0)], &[(2, 3)]);
        let strips = build_strips(&g, StripWidth::Fraction(0.25), StripAxis::Vertical).unwrap();
        assert!(strips.is_empty());

        let g = graph(&[(0.0, 0.0), (0.0, 5.0)], &[(0, 1)]);
        assert!(matches!(
            build_strips(&g, StripWidth::Fraction(0.5), StripAxis::Vertical),
            Err(MetricError::DegenerateExtent("vertical"))
        ));
        assert!(build_strips(&g, StripWidth::Fraction(0.0), StripAxis::Horizontal).is_err());
        assert!(build_strips(&g, StripWidth::Absolute(-1.0), StripAxis::Horizontal).is_err());
    }

    #[test]
    fn strips_agree_with_clip() {
        let g = random_graph(5, 30, 60, 10.0);
        let plan = StripPlan::new(&g, StripWidth::Absolute(0.7), StripAxis::Vertical).unwrap();
        let strips = build_strips(&g, StripWidth::Absolute(0.7), StripAxis::Vertical).unwrap();
        let b = plan.boundaries();
        for (e, s) in g.segments().enumerate() {
            let id = g.edge_ids().nth(e).unwrap();
            for k in 0..plan.len() {
                let clipped = clip_to_strip(&s, b[k], b[k + 1]);
                let built = strips
                    .get(&k)
                    .and_then(|v| v.iter().find(|p| p.edge_id == id))
                    .map(|p| (p.l, p.r));
                assert_eq!(clipped, built, "edge {e} strip {k}");
            }
        }
    }

    #[test]
    fn horizontal_is_transposed_vertical() {
        let g = random_graph(8, 40, 80, 10.0);
        let t = g.transposed();
        let a = build_strips(&g, StripWidth::Fraction(0.1), StripAxis::Horizontal).unwrap();
        let b = build_strips(&t, StripWidth::Fraction(0.1), StripAxis::Vertical).unwrap();
        assert_eq!(a, b);
        let ex = serial();
        assert_eq!(
            edge_crossing_enhanced(&g, StripWidth::Fraction(0.1), StripOrientation::Horizontal, &ex).unwrap(),
            edge_crossing_enhanced(&t, StripWidth::Fraction(0.1), StripOrientation::Vertical, &ex).unwrap()
        );
    }

    #[test]
    fn long_x_counted_once() {
        // crossing at (47.9.., 43.1..), away from every strip boundary
        let g = graph(&[(0.0, 0.0), (100.0, 90.0), (0.0, 80.0), (100.0, 3.0)], &[(0, 1), (2, 3)]);
        let ex = serial();
        for width in [StripWidth::Fraction(0.05), StripWidth::Fraction(0.3), StripWidth::Absolute(7.0)] {
            assert_eq!(edge_crossing_enhanced(&g, width, StripOrientation::Vertical, &ex).unwrap(), 1);
            assert_eq!(edge_crossing_enhanced(&g, width, StripOrientation::Both, &ex).unwrap(), 1);
        }
    }

    #[test]
    fn lower_bound_and_no_double_counting() {
        for seed in 0..8 {
            let g = random_graph(seed, 60, 150, 100.0);
            let truth: HashSet<(usize, usize)> = oracle::crossing_pairs(&g).into_iter().collect();
            for axis in [StripAxis::Vertical, StripAxis::Horizontal] {
                let width = StripWidth::Absolute(2.0);
                let found = enumerate_strip_crossings(&g, width, axis).unwrap();
                let unique: HashSet<(usize, usize)> = found.iter().map(|&(_, a, b)| (a, b)).collect();
                assert_eq!(unique.len(), found.len(), "pair counted in two strips");
                assert!(unique.is_subset(&truth));
                let orientation = match axis {
                    StripAxis::Vertical => StripOrientation::Vertical,
                    StripAxis::Horizontal => StripOrientation::Horizontal,
                };
                let count = edge_crossing_enhanced(&g, width, orientation, &serial()).unwrap();
                assert_eq!(count as usize, found.len());
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let g = random_graph(21, 300, 900, 100.0);
        let width = StripWidth::Absolute(0.5);
        let one = Executor::new(ExecConfig::new(1).unwrap()).unwrap();
        let eight = Executor::new(ExecConfig::new(8).unwrap()).unwrap();
        for o in [StripOrientation::Vertical, StripOrientation::Both] {
            assert_eq!(
                edge_crossing_enhanced(&g, width, o, &one).unwrap(),
                edge_crossing_enhanced(&g, width, o, &eight).unwrap()
            );
            assert_eq!(
                crossing_angle_sweep(&g, width, DEFAULT_IDEAL_ANGLE, o, &one).unwrap(),
                crossing_angle_sweep(&g, width, DEFAULT_IDEAL_ANGLE, o, &eight).unwrap()
            );
        }
    }

    #[test]
    fn angle_sweep_matches_enumerated_pairs() {
        let ideal = DEFAULT_IDEAL_ANGLE;
        for seed in 0..6 {
            let g = random_graph(seed + 100, 50, 120, 100.0);
            let width = StripWidth::Absolute(3.0);
            let ex = serial();
            let sweep = crossing_angle_sweep(&g, width, ideal, StripOrientation::Vertical, &ex).unwrap();
            let count = edge_crossing_enhanced(&g, width, StripOrientation::Vertical, &ex).unwrap();
            assert_eq!(sweep.crossings, count);

            let segments: Vec<Segment> = g.segments().collect();
            let theta: Vec<f64> = segments.iter().map(|s| crate::geometry::axis_angle(s).unwrap()).collect();
            let direct: f64 = enumerate_strip_crossings(&g, width, StripAxis::Vertical)
                .unwrap()
                .iter()
                .map(|&(_, a, b)| (ideal - crossing_angle(theta[a], theta[b])).abs())
                .sum();
            assert!((sweep.deviation_sum - direct).abs() < 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn crossing_at_ideal_angle() {
        let t = DEFAULT_IDEAL_ANGLE;
        let g = graph(
            &[(-10.0, 0.0), (10.0, 0.0), (-10.0 * t.cos(), -10.0 * t.sin()), (10.0 * t.cos(), 10.0 * t.sin())],
            &[(0, 1), (2, 3)],
        );
        let v = edge_crossing_angle_enhanced(&g, StripWidth::Fraction(0.01), t, StripOrientation::Vertical, &serial())
            .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let none = graph(&[(0.0, 0.0), (1.0, 1.0)], &[(0, 1)]);
        assert_eq!(
            edge_crossing_angle_enhanced(&none, StripWidth::Fraction(0.1), t, StripOrientation::Both, &serial())
                .unwrap(),
            1.0
        );
        assert!(crossing_angle_sweep(&g, StripWidth::Fraction(0.1), 2.0, StripOrientation::Vertical, &serial())
            .is_err());
        let _ = PI;
    }

    #[test]
    fn grid_occlusion_examples() {
        let ex = serial();
        let single = graph(&[(1.0, 1.0)], &[]);
        assert_eq!(node_occlusion_grid(&single, 1.0, &ex).unwrap(), 0);
        let far = graph(&[(0.5, 0.5), (50.0, 50.0)], &[]);
        assert_eq!(node_occlusion_grid(&far, 1.0, &ex).unwrap(), 0);
        let coincident = graph(&[(3.0, 3.0); 6], &[]);
        assert_eq!(node_occlusion_grid(&coincident, 0.5, &ex).unwrap(), 15);
        assert!(node_occlusion_grid(&single, -1.0, &ex).is_err());
        // straddling a cell corner
        let corner = graph(&[(1.95, 1.95), (2.05, 2.05), (1.9, 2.1)], &[]);
        assert_eq!(node_occlusion_grid(&corner, 1.0, &ex).unwrap(), 3);
    }

    #[test]
    fn grid_occlusion_matches_oracle() {
        for seed in 0..10 {
            let g = random_graph(seed, 400, 0, 30.0);
            let r = 0.2 + seed as f64 * 0.15;
            let ex = Executor::new(ExecConfig::new(1 + seed as usize % 3).unwrap()).unwrap();
            assert_eq!(node_occlusion_grid(&g, r, &ex).unwrap(), oracle::node_occlusion(&g, r).unwrap());
        }
    }
}
