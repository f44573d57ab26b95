//! The metrics written as table pipelines over the dataflow layer.
//!
//! Vertices enter as `(id, pos)` rows and edges as `(src, dst)` rows, with
//! ids being dense vertex indices (index order equals id order). Pair
//! enumeration is a predicate join; per-vertex collection mirrors a
//! message aggregation: edge rows fan out one message per receiving vertex,
//! then a group-by collects them.

use crate::dataflow::{
    CollectList, Column, ColumnKind, Executor, Row, Schema, SumCount, Table, Value,
};
use crate::geometry::{axis_angle, crossing_angle, incident_angle, properly_intersect, Point, Segment};
use crate::graph::LayoutGraph;

use super::{angular_deviation, check_ideal_angle, check_radius, MetricError};

fn point(v: &Value) -> Point {
    let (x, y) = v.as_pair().expect("pair column");
    Point::new(x, y)
}

fn int(v: &Value) -> i64 {
    v.as_int().expect("int column")
}

fn float(v: &Value) -> f64 {
    v.as_float().expect("float column")
}

pub fn positions_table(ex: &Executor, g: &LayoutGraph) -> Result<Table, MetricError> {
    let schema = Schema::new(vec![
        Column::new("id", ColumnKind::Int),
        Column::new("pos", ColumnKind::Pair),
    ])?;
    let rows = g
        .positions()
        .iter()
        .enumerate()
        .map(|(i, p)| vec![Value::Int(i as i64), Value::Pair(p.x, p.y)])
        .collect();
    Ok(ex.table(schema, rows)?)
}

pub fn edges_table(ex: &Executor, g: &LayoutGraph) -> Result<Table, MetricError> {
    let schema = Schema::new(vec![
        Column::new("src", ColumnKind::Int),
        Column::new("dst", ColumnKind::Int),
    ])?;
    let rows = g
        .edges()
        .iter()
        .map(|&(a, b)| vec![Value::Int(a as i64), Value::Int(b as i64)])
        .collect();
    Ok(ex.table(schema, rows)?)
}

/// Edges with both endpoint positions, `(v, vpos, u, upos)` with `v < u`,
/// built by two equi-joins against the position table.
pub fn edge_positions(ex: &Executor, g: &LayoutGraph) -> Result<Table, MetricError> {
    let edges = edges_table(ex, g)?;
    let pos_v = positions_table(ex, g)?.rename(&["v", "vpos"])?;
    let pos_u = positions_table(ex, g)?.rename(&["u", "upos"])?;
    let with_v = ex.join(&edges, &pos_v, Some(&[("src", "v")]), |_, _| true)?;
    let joined = ex.join(&with_v, &pos_u, Some(&[("dst", "u")]), |_, _| true)?;
    let s = joined.schema();
    let (v, vpos, u, upos) = (s.index_of("v")?, s.index_of("vpos")?, s.index_of("u")?, s.index_of("upos")?);
    let schema = Schema::new(vec![
        Column::new("v", ColumnKind::Int),
        Column::new("vpos", ColumnKind::Pair),
        Column::new("u", ColumnKind::Int),
        Column::new("upos", ColumnKind::Pair),
    ])?;
    Ok(ex.flat_map(&joined, schema, |row, out| {
        out.push(vec![row[v].clone(), row[vpos].clone(), row[u].clone(), row[upos].clone()]);
    })?)
}

pub fn node_occlusion(ex: &Executor, g: &LayoutGraph, radius: f64) -> Result<u64, MetricError> {
    check_radius(radius)?;
    let limit = 4.0 * radius * radius;
    let pos1 = positions_table(ex, g)?.rename(&["v", "pos1"])?;
    let pos2 = positions_table(ex, g)?.rename(&["u", "pos2"])?;
    let pairs = ex.join(&pos1, &pos2, None, |l, r| {
        int(&l[0]) < int(&r[0]) && point(&l[1]).distance_squared(&point(&r[1])) < limit
    })?;
    Ok(ex.count(&pairs) as u64)
}

/// One message per endpoint carrying the direction of the edge as seen from
/// that endpoint, collected per vertex.
fn incident_angle_lists(ex: &Executor, g: &LayoutGraph) -> Result<Table, MetricError> {
    let epos = edge_positions(ex, g)?;
    let schema = Schema::new(vec![
        Column::new("vertex", ColumnKind::Int),
        Column::new("angle", ColumnKind::Float),
    ])?;
    let messages = ex.flat_map(&epos, schema, |row, out| {
        let (p, q) = (point(&row[1]), point(&row[3]));
        // positions are distinct by graph construction
        let to_u = incident_angle(p, q).unwrap_or(0.0);
        let to_v = incident_angle(q, p).unwrap_or(0.0);
        out.push(vec![row[0].clone(), Value::Float(to_u)]);
        out.push(vec![row[2].clone(), Value::Float(to_v)]);
    })?;
    let collect = CollectList::new(messages.schema(), &["angle"], "angles")?;
    Ok(ex.group_aggregate(&messages, &["vertex"], &collect)?)
}

pub fn minimum_angle(ex: &Executor, g: &LayoutGraph) -> Result<f64, MetricError> {
    let lists = incident_angle_lists(ex, g)?;
    let idx = lists.schema().index_of("angles")?;
    let schema = Schema::new(vec![Column::new("d", ColumnKind::Float)])?;
    let deviations = ex.flat_map(&lists, schema, |row, out| {
        let angles: Vec<f64> = row[idx].as_array().unwrap_or(&[]).iter().map(float).collect();
        if let Ok(d) = angular_deviation(&angles) {
            out.push(vec![Value::Float(d)]);
        }
    })?;
    let agg = ex.aggregate(&deviations, &SumCount::new(deviations.schema(), "d", "d")?);
    let (sum, n) = (float(&agg[0]), int(&agg[1]));
    Ok(if n == 0 { 1.0 } else { 1.0 - sum / n as f64 })
}

pub fn edge_length_variation(ex: &Executor, g: &LayoutGraph) -> Result<f64, MetricError> {
    let epos = edge_positions(ex, g)?;
    let schema = Schema::new(vec![
        Column::new("vertex", ColumnKind::Int),
        Column::new("len", ColumnKind::Float),
    ])?;
    // each edge reports its length only to its smaller endpoint, so the
    // exploded column holds every edge exactly once
    let messages = ex.flat_map(&epos, schema, |row, out| {
        let len = point(&row[1]).distance(&point(&row[3]));
        out.push(vec![row[0].clone(), Value::Float(len)]);
    })?;
    let collect = CollectList::new(messages.schema(), &["len"], "lengths")?;
    let lists = ex.group_aggregate(&messages, &["vertex"], &collect)?;
    let lengths = ex.explode(&lists, "lengths")?;

    let n = ex.count(&lengths);
    if n <= 1 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let total = ex.aggregate(&lengths, &SumCount::new(lengths.schema(), "lengths", "sum")?);
    let mean = float(&total[0]) / nf;

    let idx = lengths.schema().index_of("lengths")?;
    let schema = Schema::new(vec![Column::new("sq", ColumnKind::Float)])?;
    let terms = ex.flat_map(&lengths, schema, |row, out| {
        let l = float(&row[idx]);
        out.push(vec![Value::Float((l - mean).powi(2) / (nf * mean * mean))]);
    })?;
    let spread = ex.aggregate(&terms, &SumCount::new(terms.schema(), "sq", "sum")?);
    Ok(float(&spread[0]).sqrt() / (nf - 1.0).sqrt())
}

/// Self-join of the positioned edge table keeping lexicographically ordered,
/// non-adjacent pairs that satisfy the crossing predicate.
pub fn crossing_join(ex: &Executor, g: &LayoutGraph) -> Result<Table, MetricError> {
    let epos = edge_positions(ex, g)?;
    let e1 = epos.clone().rename(&["v1", "vpos1", "u1", "upos1"])?;
    let e2 = epos.rename(&["v2", "vpos2", "u2", "upos2"])?;
    Ok(ex.join(&e1, &e2, None, |l, r| {
        let (v1, u1, v2, u2) = (int(&l[0]), int(&l[2]), int(&r[0]), int(&r[2]));
        (v1, u1) < (v2, u2)
            && v1 != v2
            && v1 != u2
            && u1 != v2
            && u1 != u2
            && properly_intersect(
                &Segment::new(point(&l[1]), point(&l[3])),
                &Segment::new(point(&r[1]), point(&r[3])),
            )
    })?)
}

pub fn edge_crossing(ex: &Executor, g: &LayoutGraph) -> Result<u64, MetricError> {
    Ok(ex.count(&crossing_join(ex, g)?) as u64)
}

pub fn edge_crossing_angle(ex: &Executor, g: &LayoutGraph, ideal: f64) -> Result<f64, MetricError> {
    check_ideal_angle(ideal)?;
    let crossings = crossing_join(ex, g)?;
    let schema = Schema::new(vec![Column::new("dev", ColumnKind::Float)])?;
    let deviations = ex.flat_map(&crossings, schema, |row: &[Value], out: &mut Vec<Row>| {
        let s1 = Segment::new(point(&row[1]), point(&row[3]));
        let s2 = Segment::new(point(&row[5]), point(&row[7]));
        if let (Ok(t1), Ok(t2)) = (axis_angle(&s1), axis_angle(&s2)) {
            let a = crossing_angle(t1, t2);
            out.push(vec![Value::Float((ideal - a).abs() / ideal)]);
        }
    })?;
    let agg = ex.aggregate(&deviations, &SumCount::new(deviations.schema(), "dev", "dev")?);
    let (sum, n) = (float(&agg[0]), int(&agg[1]));
    Ok(if n == 0 { 1.0 } else { 1.0 - sum / n as f64 })
}
