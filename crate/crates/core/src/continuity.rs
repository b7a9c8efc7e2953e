//! Continuity strokes and C/E/S labelling.
//!
//! Strokes join edge ends at a shared junction when the two are each
//! other's straightest continuation and the interior angle between their
//! terminal segments is at least the threshold (180° is straight on). In
//! flow mode the joinable units are whole edges, so strokes only break at
//! nodes; otherwise every polyline segment is a unit and strokes may break
//! at interior vertices.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clustering::UnionFind;
use crate::error::{Error, Result};
use crate::geom::Coord;
use crate::network::{EdgeId, End, Network};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityParams {
    /// Minimum interior angle in degrees for two ends to join.
    pub angle_threshold: f64,
    pub flow_mode: bool,
}

impl Default for ContinuityParams {
    fn default() -> Self {
        ContinuityParams {
            angle_threshold: 120.0,
            flow_mode: true,
        }
    }
}

impl ContinuityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_threshold > 0.0 && self.angle_threshold < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "angle threshold must be in (0, 180), got {}",
                self.angle_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stroke {
    pub id: usize,
    /// Edges in chain order. In legacy (non-flow) mode an edge broken at an
    /// interior vertex appears in more than one stroke.
    pub edge_ids: Vec<EdgeId>,
    pub total_length: f64,
    /// The chain returns to its first junction.
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Junction {
    Node(usize),
    Vertex(usize, usize),
}

struct Unit {
    edge: usize,
    key: (u64, usize),
    length: f64,
    junctions: [Junction; 2],
    /// Direction of the terminal segment pointing away from each junction.
    dirs: [Coord; 2],
}

fn units(net: &Network, flow_mode: bool) -> Vec<Unit> {
    let mut out = Vec::new();
    for (ei, e) in net.edges().iter().enumerate() {
        let g = &e.geometry;
        let n = g.len();
        if flow_mode {
            out.push(Unit {
                edge: ei,
                key: (e.id.0, 0),
                length: e.length(),
                junctions: [Junction::Node(e.endpoints.0 .0), Junction::Node(e.endpoints.1 .0)],
                dirs: [
                    e.next_vertex_from(End::Start) - g[0],
                    e.next_vertex_from(End::End) - g[n - 1],
                ],
            });
            continue;
        }
        for j in 0..n - 1 {
            let a = if j == 0 {
                Junction::Node(e.endpoints.0 .0)
            } else {
                Junction::Vertex(ei, j)
            };
            let b = if j + 1 == n - 1 {
                Junction::Node(e.endpoints.1 .0)
            } else {
                Junction::Vertex(ei, j + 1)
            };
            out.push(Unit {
                edge: ei,
                key: (e.id.0, j),
                length: g[j].dist(g[j + 1]),
                junctions: [a, b],
                dirs: [g[j + 1] - g[j], g[j] - g[j + 1]],
            });
        }
    }
    out
}

/// Interior angle in degrees between two directions leaving a junction.
pub fn interior_angle(a: Coord, b: Coord) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Angle, combined length, unit pair.
type Score = (f64, f64, ((u64, usize), (u64, usize)));

/// Builds strokes. Strokes are numbered by their smallest edge id.
pub fn detect_strokes(net: &Network, params: &ContinuityParams) -> Vec<Stroke> {
    let units = units(net, params.flow_mode);
    let mut at: HashMap<Junction, Vec<(usize, usize)>> = HashMap::new();
    for (ui, u) in units.iter().enumerate() {
        for end in 0..2 {
            at.entry(u.junctions[end]).or_default().push((ui, end));
        }
    }

    // preference between candidates: larger angle, then longer combined
    // length, then the lexicographically smaller unit pair
    let score = |a: (usize, usize), b: (usize, usize)| {
        let ua = &units[a.0];
        let ub = &units[b.0];
        let angle = interior_angle(ua.dirs[a.1], ub.dirs[b.1]);
        let pair = if ua.key <= ub.key {
            (ua.key, ub.key)
        } else {
            (ub.key, ua.key)
        };
        (angle, ua.length + ub.length, pair)
    };
    let better =
        |x: &Score, y: &Score| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(y.2.cmp(&x.2)) == Ordering::Greater;

    let mut joined: Vec<[Option<(usize, usize)>; 2]> = vec![[None, None]; units.len()];
    let mut junctions: Vec<_> = at.into_values().filter(|v| v.len() >= 2).collect();
    junctions.sort_by_key(|v| v[0]);
    for ends in junctions {
        let best: Vec<usize> = (0..ends.len())
            .map(|i| {
                let mut bi = usize::MAX;
                let mut bs = None;
                for j in 0..ends.len() {
                    if i == j {
                        continue;
                    }
                    let s = score(ends[i], ends[j]);
                    if bs.as_ref().is_none_or(|b| better(&s, b)) {
                        bs = Some(s);
                        bi = j;
                    }
                }
                bi
            })
            .collect();
        for i in 0..ends.len() {
            let j = best[i];
            if j > i && best[j] == i && score(ends[i], ends[j]).0 >= params.angle_threshold {
                let (a, b) = (ends[i], ends[j]);
                joined[a.0][a.1] = Some(b);
                joined[b.0][b.1] = Some(a);
            }
        }
    }

    let mut uf = UnionFind::new(units.len());
    for (ui, j) in joined.iter().enumerate() {
        for &(other, _) in j.iter().flatten() {
            uf.union(ui, other);
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ui in 0..units.len() {
        comps.entry(uf.find(ui)).or_default().push(ui);
    }

    let edges = net.edges();
    let mut strokes: Vec<Stroke> = comps
        .into_values()
        .map(|members| {
            // open chains start at a free end; closed ones at the smallest unit
            let start = members
                .iter()
                .flat_map(|&u| [(u, 0), (u, 1)])
                .filter(|&(u, e)| joined[u][e].is_none())
                .min_by_key(|&(u, e)| (units[u].key, e));
            let closed = start.is_none();
            let (mut u, mut entered) =
                start.unwrap_or_else(|| (*members.iter().min_by_key(|&&u| units[u].key).unwrap(), 0));
            let mut chain = Vec::with_capacity(members.len());
            let mut total = 0.0;
            for _ in 0..members.len() {
                chain.push(edges[units[u].edge].id);
                total += units[u].length;
                match joined[u][1 - entered] {
                    Some((v, ve)) => {
                        u = v;
                        entered = ve;
                    }
                    None => break,
                }
            }
            chain.dedup();
            if closed && chain.len() > 1 && chain.first() == chain.last() {
                chain.pop();
            }
            Stroke {
                id: 0,
                edge_ids: chain,
                total_length: total,
                closed,
            }
        })
        .collect();
    strokes.sort_by_key(|s| s.edge_ids.iter().min().copied());
    for (i, s) in strokes.iter_mut().enumerate() {
        s.id = i;
    }
    strokes
}

/// Strokes with an edge lookup. Built from flow-mode strokes, where every
/// edge belongs to exactly one stroke.
#[derive(Debug, Clone, Default)]
pub struct StrokeSet {
    pub strokes: Vec<Stroke>,
    of_edge: HashMap<EdgeId, (usize, usize)>,
}

impl StrokeSet {
    pub fn new(strokes: Vec<Stroke>) -> Self {
        let mut of_edge = HashMap::new();
        for (si, s) in strokes.iter().enumerate() {
            for (pos, &e) in s.edge_ids.iter().enumerate() {
                of_edge.entry(e).or_insert((si, pos));
            }
        }
        StrokeSet { strokes, of_edge }
    }

    pub fn detect(net: &Network, params: &ContinuityParams) -> Self {
        Self::new(detect_strokes(net, params))
    }

    pub fn stroke_of(&self, e: EdgeId) -> Option<&Stroke> {
        self.of_edge.get(&e).map(|&(s, _)| &self.strokes[s])
    }

    pub fn position_of(&self, e: EdgeId) -> Option<(usize, usize)> {
        self.of_edge.get(&e).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CesLabel {
    C,
    E,
    S,
}

impl fmt::Display for CesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CesLabel::C => "C",
            CesLabel::E => "E",
            CesLabel::S => "S",
        })
    }
}

/// Label of one edge's stroke relative to the artifact edge set: does the
/// stroke leave the artifact before and after the run containing the edge?
pub fn edge_label(strokes: &StrokeSet, artifact_edges: &BTreeSet<EdgeId>, e: EdgeId) -> CesLabel {
    let Some((si, pos)) = strokes.position_of(e) else {
        return CesLabel::S;
    };
    let s = &strokes.strokes[si];
    let inside = |k: usize| artifact_edges.contains(&s.edge_ids[k]);
    if s.closed {
        return if (0..s.edge_ids.len()).all(inside) {
            CesLabel::S
        } else {
            CesLabel::C
        };
    }
    let mut lo = pos;
    while lo > 0 && inside(lo - 1) {
        lo -= 1;
    }
    let mut hi = pos;
    while hi + 1 < s.edge_ids.len() && inside(hi + 1) {
        hi += 1;
    }
    match (lo > 0, hi + 1 < s.edge_ids.len()) {
        (true, true) => CesLabel::C,
        (false, false) => CesLabel::S,
        _ => CesLabel::E,
    }
}

/// C/E/S label for each boundary edge of an artifact. `artifact_edges`
/// holds every edge on or inside the artifact; `boundary` must be a subset.
pub fn label_ces(
    boundary: &[EdgeId],
    strokes: &StrokeSet,
    artifact_edges: &BTreeSet<EdgeId>,
) -> Result<BTreeMap<EdgeId, CesLabel>> {
    boundary
        .iter()
        .map(|&e| {
            if !artifact_edges.contains(&e) {
                return Err(Error::NotOnBoundary(e));
            }
            Ok((e, edge_label(strokes, artifact_edges, e)))
        })
        .collect()
}
