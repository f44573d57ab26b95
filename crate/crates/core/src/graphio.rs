//! Edge lists, layout files, layout generators and report files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::graph::{normalize_edges, GraphError, IngestStats, LayoutGraph, VertexId};
use crate::report::ReadabilityReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<IoError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("layout: {0}")]
    Csv(#[from] csv::Error),
    #[error("layout lists vertex {0} more than once")]
    DuplicateVertex(VertexId),
    #[error("layout gives vertex {0} a non-finite coordinate")]
    NonFinite(VertexId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report field `{0}` is not finite")]
    NonFiniteField(&'static str),
    #[error("cannot place {m} edges among {n} vertices")]
    InfeasibleEdgeCount { n: u64, m: u64 },
    #[error("{0}")]
    InvalidParameter(String),
}

impl IoError {
    fn at(self, path: &Path) -> Self {
        IoError::File { path: path.to_path_buf(), source: Box::new(self) }
    }
}

type Result<T> = std::result::Result<T, IoError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| IoError::from(e).at(path))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| IoError::from(e).at(path))
}

/// A normalized undirected edge list and the vertex ids it mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeList {
    /// Every id appearing on a data line, self-loop endpoints included.
    pub vertices: BTreeSet<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub stats: IngestStats,
}

impl EdgeList {
    pub fn from_pairs(pairs: &[(VertexId, VertexId)]) -> Self {
        let vertices = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let (edges, stats) = normalize_edges(pairs);
        Self { vertices, edges, stats }
    }
}

/// Reads whitespace-separated id pairs. Lines starting with `#` and blank
/// lines are skipped; columns after the second are ignored.
pub fn parse_edgelist(reader: impl BufRead) -> Result<EdgeList> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut id = || -> Result<VertexId> {
            let tok = tokens.next().ok_or_else(|| IoError::Malformed {
                line: i + 1,
                message: "expected two vertex ids".to_string(),
            })?;
            tok.parse().map_err(|_| IoError::Malformed {
                line: i + 1,
                message: format!("`{tok}` is not a nonnegative integer id"),
            })
        };
        let a = id()?;
        let b = id()?;
        pairs.push((a, b));
    }
    if pairs.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(EdgeList::from_pairs(&pairs))
}

pub fn read_edgelist(path: &Path) -> Result<EdgeList> {
    parse_edgelist(open(path)?).map_err(|e| e.at(path))
}

pub fn write_edgelist(mut w: impl Write, edges: &[(VertexId, VertexId)]) -> Result<()> {
    for &(a, b) in edges {
        writeln!(w, "{a} {b}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutRow {
    id: VertexId,
    x: f64,
    y: f64,
}

/// Reads a CSV layout with header `id,x,y`.
pub fn parse_layout(reader: impl Read) -> Result<Vec<(VertexId, Point)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize::<LayoutRow>() {
        let row = row?;
        if !seen.insert(row.id) {
            return Err(IoError::DuplicateVertex(row.id));
        }
        if !(row.x.is_finite() && row.y.is_finite()) {
            return Err(IoError::NonFinite(row.id));
        }
        out.push((row.id, Point::new(row.x, row.y)));
    }
    Ok(out)
}

pub fn read_layout(path: &Path) -> Result<Vec<(VertexId, Point)>> {
    parse_layout(open(path)?).map_err(|e| e.at(path))
}

/// Writes vertices in id order. Coordinates use the shortest decimal form
/// that reads back to the same value.
pub fn write_layout(w: impl Write, g: &LayoutGraph) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (&id, p) in g.ids().iter().zip(g.positions()) {
        out.serialize(LayoutRow { id, x: p.x, y: p.y })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_layout_file(path: &Path, g: &LayoutGraph) -> Result<()> {
    write_layout(create(path)?, g).map_err(|e| e.at(path))
}

/// Joins an edge list with a layout. Layout vertices with no edges are kept.
pub fn assemble(layout: Vec<(VertexId, Point)>, edges: &EdgeList) -> Result<LayoutGraph> {
    let (g, _) = LayoutGraph::new(layout, &edges.edges)?;
    Ok(g)
}

fn check_extent(extent: f64) -> Result<()> {
    if extent.is_finite() && extent > 0.0 {
        Ok(())
    } else {
        Err(IoError::InvalidParameter(format!("extent must be finite and positive, got {extent}")))
    }
}

/// Independent uniform positions in `[0, extent]²` for every vertex.
pub fn random_layout(edges: &EdgeList, extent: f64, seed: u64) -> Result<LayoutGraph> {
    check_extent(extent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout: Vec<(VertexId, Point)> = edges
        .vertices
        .iter()
        .map(|&id| (id, Point::new(rng.gen_range(0.0..=extent), rng.gen_range(0.0..=extent))))
        .collect();
    assemble(layout, edges)
}

/// Fruchterman-Reingold from a seeded random start.
///
/// Spring length `k = extent / √n`, initial temperature `extent / 10`,
/// cooled by a factor 0.95 per iteration. Positions are clamped to the frame
/// during iteration and finally rescaled uniformly into `[0, extent]²`.
pub fn fr_layout(edges: &EdgeList, iterations: usize, extent: f64, seed: u64) -> Result<LayoutGraph> {
    check_extent(extent)?;
    if iterations == 0 {
        return Err(IoError::InvalidParameter("iterations must be at least 1".to_string()));
    }
    let ids: Vec<VertexId> = edges.vertices.iter().copied().collect();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> =
        (0..n).map(|_| [rng.gen_range(0.0..=extent), rng.gen_range(0.0..=extent)]).collect();
    let index = |id: VertexId| ids.binary_search(&id).expect("edge endpoint in vertex set");
    let links: Vec<(usize, usize)> = edges.edges.iter().map(|&(a, b)| (index(a), index(b))).collect();

    let k = extent / (n.max(1) as f64).sqrt();
    let k2 = k * k;
    let floor = k * 1e-6;
    let mut t = extent / 10.0;
    let mut disp = vec![[0.0f64; 2]; n];
    for _ in 0..iterations {
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
        for i in 0..n {
            for j in i + 1..n {
                let (mut dx, dy) = (pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
                // coincident vertices get pushed apart along x
                if dx == 0.0 && dy == 0.0 {
                    dx = floor;
                }
                let d2 = (dx * dx + dy * dy).max(floor * floor);
                let s = k2 / d2;
                disp[i][0] += dx * s;
                disp[i][1] += dy * s;
                disp[j][0] -= dx * s;
                disp[j][1] -= dy * s;
            }
        }
        for &(a, b) in &links {
            let (dx, dy) = (pos[a][0] - pos[b][0], pos[a][1] - pos[b][1]);
            let s = (dx * dx + dy * dy).sqrt() / k;
            disp[a][0] -= dx * s;
            disp[a][1] -= dy * s;
            disp[b][0] += dx * s;
            disp[b][1] += dy * s;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 {
                let step = len.min(t) / len;
                p[0] = (p[0] + d[0] * step).clamp(0.0, extent);
                p[1] = (p[1] + d[1] * step).clamp(0.0, extent);
            }
        }
        t *= 0.95;
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pos {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { extent / span } else { 1.0 };
    let layout = ids
        .iter()
        .zip(&pos)
        .map(|(&id, p)| {
            let x = ((p[0] - lo[0]) * scale).min(extent);
            let y = ((p[1] - lo[1]) * scale).min(extent);
            (id, Point::new(x, y))
        })
        .collect();
    assemble(layout, edges)
}

/// Uniform simple graph on ids `0..n` with exactly `m` edges.
pub fn random_graph(n: u64, m: u64, seed: u64) -> Result<Vec<(VertexId, VertexId)>> {
    let total = n.checked_mul(n.saturating_sub(1)).map(|p| p / 2);
    let total = match total {
        Some(t) if m <= t && usize::try_from(t).is_ok() => t,
        _ => return Err(IoError::InfeasibleEdgeCount { n, m }),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, total as usize, m as usize);
    Ok(picked.into_iter().map(|k| pair_from_index(k as u64)).collect())
}

/// Inverts `k = j(j-1)/2 + i` for `0 <= i < j`.
fn pair_from_index(k: u64) -> (VertexId, VertexId) {
    let mut j = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as u64;
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

/// Pretty-printed JSON. Fields appear in declaration order.
pub fn report_to_json(report: &ReadabilityReport) -> Result<String> {
    if let Some(field) = report.first_non_finite() {
        return Err(IoError::NonFiniteField(field));
    }
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_from_json(text: &str) -> Result<ReadabilityReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_report(report: &ReadabilityReport, path: &Path) -> Result<()> {
    let text = report_to_json(report).map_err(|e| e.at(path))?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| IoError::from(e).at(path))
}

pub fn read_report(path: &Path) -> Result<ReadabilityReport> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| IoError::from(e).at(path))?;
    report_from_json(&text).map_err(|e| e.at(path))
}
