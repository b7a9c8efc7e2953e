//! Noded, undirected line network with derived nodes and an edge R-tree.

use std::collections::HashMap;
use std::fmt;

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::RTree;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::{dedup_consecutive, polyline_length, Bbox, Coord};

/// Opaque per-edge attribute bag, carried through untouched.
pub type Attributes = serde_json::Map<String, Value>;

/// Default endpoint snapping distance (exact-coincidence semantics).
pub const DEFAULT_SNAP_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u64);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    #[default]
    Original,
    Extended,
    New,
}

impl EdgeStatus {
    /// Status of an edge assembled from pieces with the given statuses.
    pub fn combine(statuses: impl IntoIterator<Item = EdgeStatus>) -> EdgeStatus {
        let mut any_new = false;
        let mut any_old = false;
        let mut any_extended = false;
        for s in statuses {
            match s {
                EdgeStatus::Original => any_old = true,
                EdgeStatus::Extended => any_extended = true,
                EdgeStatus::New => any_new = true,
            }
        }
        match (any_old, any_extended, any_new) {
            (_, true, _) | (true, _, true) => EdgeStatus::Extended,
            (false, false, true) => EdgeStatus::New,
            _ => EdgeStatus::Original,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeStatus::Original => "original",
            EdgeStatus::Extended => "extended",
            EdgeStatus::New => "new",
        }
    }
}

/// Which end of an edge's polyline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Start,
    End,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::Start => End::End,
            End::End => End::Start,
        }
    }
}

/// Edge as supplied to (or extracted from) a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub geometry: Vec<Coord>,
    #[serde(default)]
    pub status: EdgeStatus,
    #[serde(default)]
    pub attributes: Attributes,
}

impl EdgeRecord {
    pub fn new(id: u64, geometry: Vec<Coord>) -> Self {
        EdgeRecord {
            id: EdgeId(id),
            geometry,
            status: EdgeStatus::Original,
            attributes: Attributes::new(),
        }
    }

    pub fn with_status(mut self, status: EdgeStatus) -> Self {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub geometry: Vec<Coord>,
    pub endpoints: (NodeId, NodeId),
    pub status: EdgeStatus,
    pub attributes: Attributes,
}

impl Edge {
    pub fn length(&self) -> f64 {
        polyline_length(&self.geometry)
    }

    pub fn is_loop(&self) -> bool {
        self.endpoints.0 == self.endpoints.1
    }

    pub fn node_at(&self, end: End) -> NodeId {
        match end {
            End::Start => self.endpoints.0,
            End::End => self.endpoints.1,
        }
    }

    pub fn coord_at(&self, end: End) -> Coord {
        match end {
            End::Start => self.geometry[0],
            End::End => self.geometry[self.geometry.len() - 1],
        }
    }

    /// Vertex next to the given end, i.e. the direction the edge leaves in.
    pub fn next_vertex_from(&self, end: End) -> Coord {
        match end {
            End::Start => self.geometry[1],
            End::End => self.geometry[self.geometry.len() - 2],
        }
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of(self.geometry.iter().copied())
    }

    pub fn to_record(&self) -> EdgeRecord {
        EdgeRecord {
            id: self.id,
            geometry: self.geometry.clone(),
            status: self.status,
            attributes: self.attributes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub coord: Coord,
    pub degree: usize,
}

type EdgeEnvelope = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// Immutable noded network. Stages that edit geometry build a new one.
#[derive(Debug, Clone)]
pub struct Network {
    edges: Vec<Edge>,
    nodes: Vec<Node>,
    incidence: Vec<Vec<(usize, End)>>,
    by_id: HashMap<EdgeId, usize>,
    node_by_key: HashMap<(u64, u64), NodeId>,
    index: RTree<EdgeEnvelope>,
    snap_epsilon: f64,
    crs: Option<String>,
}

impl Default for Network {
    fn default() -> Self {
        Network::assemble(Vec::new(), DEFAULT_SNAP_EPSILON)
    }
}

/// Builds a network from polylines, validating coordinates and units.
pub fn build_network(lines: Vec<EdgeRecord>, snap_epsilon: f64) -> Result<Network> {
    for rec in &lines {
        if rec.geometry.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                feature: rec.id.to_string(),
            });
        }
    }
    if looks_geographic(&lines) {
        return Err(Error::GeographicCrs);
    }
    Ok(Network::assemble(lines, snap_epsilon))
}

/// Unit heuristic: every coordinate fits in lon/lat range and the median
/// segment is shorter than 1 cm, which is implausible for metric street data
/// but typical for degrees.
pub fn looks_geographic(lines: &[EdgeRecord]) -> bool {
    let mut in_range = true;
    let mut seg_lengths = Vec::new();
    for rec in lines {
        for c in &rec.geometry {
            if c.x.abs() > 180.0 || c.y.abs() > 90.0 {
                in_range = false;
            }
        }
        for w in rec.geometry.windows(2) {
            let d = w[0].dist(w[1]);
            if d > 0.0 {
                seg_lengths.push(d);
            }
        }
    }
    if !in_range || seg_lengths.is_empty() {
        return false;
    }
    seg_lengths.sort_by(f64::total_cmp);
    seg_lengths[seg_lengths.len() / 2] < 0.01
}

/// Snaps points within `eps` of an earlier point onto that point.
struct Snapper {
    eps: f64,
    cells: HashMap<(i64, i64), Vec<Coord>>,
}

impl Snapper {
    fn new(eps: f64) -> Self {
        Snapper {
            eps: eps.max(f64::MIN_POSITIVE),
            cells: HashMap::new(),
        }
    }

    fn cell(&self, c: Coord) -> (i64, i64) {
        ((c.x / self.eps).floor() as i64, (c.y / self.eps).floor() as i64)
    }

    fn snap(&mut self, c: Coord) -> Coord {
        let (cx, cy) = self.cell(c);
        let mut best: Option<(f64, Coord)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(pts) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &p in pts {
                        let d = p.dist(c);
                        if d <= self.eps && best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, p));
                        }
                    }
                }
            }
        }
        match best {
            Some((_, p)) => p,
            None => {
                self.cells.entry((cx, cy)).or_default().push(c);
                c
            }
        }
    }
}

impl Network {
    /// Builds without unit validation; used by internal stages.
    pub fn assemble(records: Vec<EdgeRecord>, snap_epsilon: f64) -> Network {
        let mut snapper = Snapper::new(snap_epsilon);
        let mut edges = Vec::with_capacity(records.len());
        let mut nodes: Vec<Node> = Vec::new();
        let mut node_by_key: HashMap<(u64, u64), NodeId> = HashMap::new();
        let mut incidence: Vec<Vec<(usize, End)>> = Vec::new();

        for rec in records {
            let mut geometry = rec.geometry;
            dedup_consecutive(&mut geometry);
            if geometry.len() < 2 {
                log::debug!("dropping zero-length edge {}", rec.id);
                continue;
            }
            let n = geometry.len();
            geometry[0] = snapper.snap(geometry[0]);
            geometry[n - 1] = snapper.snap(geometry[n - 1]);
            dedup_consecutive(&mut geometry);
            if geometry.len() < 2 {
                log::debug!("dropping edge {} collapsed by snapping", rec.id);
                continue;
            }
            let idx = edges.len();
            let mut ends = [NodeId(0); 2];
            for (k, (end, c)) in [(End::Start, geometry[0]), (End::End, geometry[geometry.len() - 1])]
                .into_iter()
                .enumerate()
            {
                let id = *node_by_key.entry(c.key()).or_insert_with(|| {
                    nodes.push(Node {
                        id: NodeId(nodes.len()),
                        coord: c,
                        degree: 0,
                    });
                    incidence.push(Vec::new());
                    NodeId(nodes.len() - 1)
                });
                nodes[id.0].degree += 1;
                incidence[id.0].push((idx, end));
                ends[k] = id;
            }
            edges.push(Edge {
                id: rec.id,
                geometry,
                endpoints: (ends[0], ends[1]),
                status: rec.status,
                attributes: rec.attributes,
            });
        }

        let by_id = edges.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
        let index = RTree::bulk_load(
            edges
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let b = e.bbox();
                    GeomWithData::new(Rectangle::from_corners(b.min.as_array(), b.max.as_array()), i)
                })
                .collect(),
        );
        Network {
            edges,
            nodes,
            incidence,
            by_id,
            node_by_key,
            index,
            snap_epsilon,
            crs: None,
        }
    }

    pub fn from_lines(lines: Vec<Vec<Coord>>) -> Network {
        let records = lines
            .into_iter()
            .enumerate()
            .map(|(i, g)| EdgeRecord::new(i as u64, g))
            .collect();
        Network::assemble(records, DEFAULT_SNAP_EPSILON)
    }

    /// Same network with different edges, keeping CRS and snapping settings.
    pub fn rebuilt(&self, records: Vec<EdgeRecord>) -> Network {
        let mut n = Network::assemble(records, self.snap_epsilon);
        n.crs = self.crs.clone();
        n
    }

    pub fn with_crs(mut self, crs: Option<String>) -> Self {
        self.crs = crs;
        self
    }

    pub fn crs(&self) -> Option<&str> {
        self.crs.as_deref()
    }

    pub fn snap_epsilon(&self) -> f64 {
        self.snap_epsilon
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_index(&self, id: EdgeId) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edge_index(id).map(|i| &self.edges[i])
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_at(&self, c: Coord) -> Option<NodeId> {
        self.node_by_key.get(&c.key()).copied()
    }

    /// Edge ends incident to a node, as `(edge index, end)`.
    pub fn incident(&self, node: NodeId) -> &[(usize, End)] {
        &self.incidence[node.0]
    }

    /// Edge indices whose envelope intersects `bbox`.
    pub fn query(&self, bbox: Bbox) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .index
            .locate_in_envelope_intersecting(&bbox.to_aabb())
            .map(|g| g.data)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(Edge::length).sum()
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of(self.nodes.iter().map(|n| n.coord))
            .union(&Bbox::of(self.edges.iter().flat_map(|e| e.geometry.iter().copied())))
    }

    pub fn records(&self) -> Vec<EdgeRecord> {
        self.edges.iter().map(Edge::to_record).collect()
    }

    pub fn next_edge_id(&self) -> u64 {
        self.edges.iter().map(|e| e.id.0 + 1).max().unwrap_or(0)
    }

    /// Canonical (sorted) geometry fingerprint, independent of edge order,
    /// orientation, and ids.
    pub fn geometry_signature(&self) -> Vec<Vec<(u64, u64)>> {
        let mut sig: Vec<Vec<(u64, u64)>> = self.edges.iter().map(|e| canonical_geometry(&e.geometry)).collect();
        sig.sort();
        sig
    }
}

/// Vertex keys oriented so the lexicographically smaller end comes first.
pub fn canonical_geometry(line: &[Coord]) -> Vec<(u64, u64)> {
    let fwd: Vec<(u64, u64)> = line.iter().map(|c| c.key()).collect();
    let mut rev = fwd.clone();
    rev.reverse();
    let first = line[0];
    let last = line[line.len() - 1];
    match first.lex_cmp(&last) {
        std::cmp::Ordering::Less => fwd,
        std::cmp::Ordering::Greater => rev,
        std::cmp::Ordering::Equal => {
            // closed ring: compare the full sequences
            let f: Vec<Coord> = line.to_vec();
            let r: Vec<Coord> = line.iter().rev().copied().collect();
            let ord = f
                .iter()
                .zip(&r)
                .map(|(a, b)| a.lex_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal);
            if ord.is_gt() {
                rev
            } else {
                fwd
            }
        }
    }
}
