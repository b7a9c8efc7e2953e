//! Artifact grouping by contiguity and CES typing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::artifacts::Detection;
use crate::clustering::UnionFind;
use crate::continuity::{edge_label, CesLabel, StrokeSet};
use crate::faces::{FaceId, FacePolygon, HalfEdge};
use crate::geom::{Coord, Region};
use crate::network::{EdgeId, Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Isolate,
    Pair,
    Cluster,
}

impl GroupKind {
    pub fn of_size(n: usize) -> GroupKind {
        match n {
            0 | 1 => GroupKind::Isolate,
            2 => GroupKind::Pair,
            _ => GroupKind::Cluster,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::Isolate => "isolate",
            GroupKind::Pair => "pair",
            GroupKind::Cluster => "cluster",
        }
    }
}

/// Boundary nodes lying inside a single stroke's run along the artifact,
/// split by that stroke's label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VertexPartition {
    pub on_c: usize,
    pub on_e_or_s: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CesType {
    pub node_count: usize,
    /// One label per distinct boundary stroke, sorted.
    pub labels: Vec<CesLabel>,
    pub vertex_partition: VertexPartition,
}

impl CesType {
    pub fn has(&self, l: CesLabel) -> bool {
        self.labels.contains(&l)
    }
}

impl fmt::Display for CesType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node_count)?;
        for l in &self.labels {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Merged outline of one or more faces.
#[derive(Debug, Clone, Serialize)]
pub struct Outline {
    pub region: Region,
    /// Boundary rings as half-edge cycles, region on the left.
    pub rings: Vec<Vec<HalfEdge>>,
    pub boundary_edges: Vec<EdgeId>,
    pub boundary_nodes: Vec<NodeId>,
    /// Edges between two member faces.
    pub shared_edges: Vec<EdgeId>,
    /// Other edges lying inside the outline (dangles, loose pieces).
    pub inner_edges: Vec<EdgeId>,
}

impl Outline {
    /// Every edge on or inside the outline.
    pub fn all_edges(&self) -> BTreeSet<EdgeId> {
        self.boundary_edges
            .iter()
            .chain(&self.shared_edges)
            .chain(&self.inner_edges)
            .copied()
            .collect()
    }
}

pub(crate) fn half_edge_nodes(net: &Network, h: HalfEdge) -> (NodeId, NodeId) {
    let e = net.edge(h.edge).expect("half-edge of a network edge");
    if h.forward {
        e.endpoints
    } else {
        (e.endpoints.1, e.endpoints.0)
    }
}

pub(crate) fn half_edge_coords(net: &Network, h: HalfEdge) -> Vec<Coord> {
    let e = net.edge(h.edge).expect("half-edge of a network edge");
    if h.forward {
        e.geometry.clone()
    } else {
        e.geometry.iter().rev().copied().collect()
    }
}

/// Union of faces: opposite half-edges cancel, the rest chain into rings.
pub fn outline(net: &Network, faces: &[&FacePolygon]) -> Outline {
    let mut hs: BTreeSet<HalfEdge> = BTreeSet::new();
    let mut shared = BTreeSet::new();
    for f in faces {
        for &h in &f.half_edges {
            let twin = HalfEdge {
                edge: h.edge,
                forward: !h.forward,
            };
            if hs.remove(&twin) {
                shared.insert(h.edge);
            } else {
                hs.insert(h);
            }
        }
    }
    let mut from: BTreeMap<NodeId, Vec<HalfEdge>> = BTreeMap::new();
    for &h in &hs {
        from.entry(half_edge_nodes(net, h).0).or_default().push(h);
    }
    // in- and out-degree agree at every node, so each walk closes
    let mut rings = Vec::new();
    while let Some((&n0, _)) = from.iter().find(|(_, v)| !v.is_empty()) {
        let mut ring = Vec::new();
        let mut at = n0;
        while let Some(h) = from.get_mut(&at).and_then(|v| v.pop()) {
            ring.push(h);
            at = half_edge_nodes(net, h).1;
        }
        rings.push(ring);
    }

    let coord_rings: Vec<Vec<Coord>> = rings
        .iter()
        .map(|r| {
            let mut c: Vec<Coord> = Vec::new();
            for &h in r {
                let g = half_edge_coords(net, h);
                if c.is_empty() {
                    c.extend(g);
                } else {
                    c.extend(g.into_iter().skip(1));
                }
            }
            c
        })
        .collect();
    let region = Region::new(coord_rings);

    let boundary_edges: BTreeSet<EdgeId> = hs.iter().map(|h| h.edge).collect();
    let boundary_nodes: BTreeSet<NodeId> = hs.iter().map(|&h| half_edge_nodes(net, h).0).collect();
    let mut inner = Vec::new();
    for i in net.query(region.bbox()) {
        let e = &net.edges()[i];
        if boundary_edges.contains(&e.id) || shared.contains(&e.id) {
            continue;
        }
        if region.covers_polyline(&e.geometry, 1e-6) {
            inner.push(e.id);
        }
    }
    inner.sort();
    Outline {
        region,
        rings,
        boundary_edges: boundary_edges.into_iter().collect(),
        boundary_nodes: boundary_nodes.into_iter().collect(),
        shared_edges: shared.into_iter().collect(),
        inner_edges: inner,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactGroup {
    pub id: usize,
    pub kind: GroupKind,
    pub faces: Vec<FaceId>,
    pub outline: Outline,
    /// Set for isolates and pairs (pairs are typed as their merged outline).
    pub ces_type: Option<CesType>,
}

/// Connected components of the artifact adjacency graph.
pub fn group_by_contiguity(net: &Network, faces: &[FacePolygon], detection: &Detection) -> Vec<ArtifactGroup> {
    let is_art: Vec<bool> = detection.faces.iter().map(|f| f.is_artifact).collect();
    let mut uf = UnionFind::new(faces.len());
    for f in faces {
        if !is_art[f.id.0] {
            continue;
        }
        for &n in &f.neighbors {
            if is_art[n.0] {
                uf.union(f.id.0, n.0);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<FaceId>> = BTreeMap::new();
    for f in faces {
        if is_art[f.id.0] {
            comps.entry(uf.find(f.id.0)).or_default().push(f.id);
        }
    }
    comps
        .into_values()
        .enumerate()
        .map(|(id, members)| {
            let refs: Vec<&FacePolygon> = members.iter().map(|m| &faces[m.0]).collect();
            ArtifactGroup {
                id,
                kind: GroupKind::of_size(members.len()),
                outline: outline(net, &refs),
                faces: members,
                ces_type: None,
            }
        })
        .collect()
}

/// Label of every boundary stroke of an outline, keyed by stroke id.
pub fn stroke_labels(outline: &Outline, strokes: &StrokeSet) -> BTreeMap<usize, CesLabel> {
    let art = outline.all_edges();
    let mut out: BTreeMap<usize, CesLabel> = BTreeMap::new();
    for &e in &outline.boundary_edges {
        let Some((s, _)) = strokes.position_of(e) else {
            continue;
        };
        let l = edge_label(strokes, &art, e);
        out.entry(s).and_modify(|x| *x = (*x).min(l)).or_insert(l);
    }
    out
}

pub fn classify_ces(net: &Network, outline: &Outline, strokes: &StrokeSet) -> CesType {
    let labels = stroke_labels(outline, strokes);
    let stroke_of = |e: EdgeId| strokes.position_of(e).map(|p| p.0);
    // a boundary node is inside a stroke run when the boundary arrives and
    // leaves on the same stroke
    let mut arrivals: HashMap<NodeId, Vec<EdgeId>> = HashMap::new();
    for ring in &outline.rings {
        for (k, &h) in ring.iter().enumerate() {
            let next = ring[(k + 1) % ring.len()];
            if half_edge_nodes(net, h).1 == half_edge_nodes(net, next).0 && h.edge != next.edge {
                arrivals
                    .entry(half_edge_nodes(net, h).1)
                    .or_default()
                    .extend([h.edge, next.edge]);
            }
        }
    }
    let mut vp = VertexPartition::default();
    for (_, pair) in arrivals {
        if pair.len() != 2 {
            continue;
        }
        match (stroke_of(pair[0]), stroke_of(pair[1])) {
            (Some(a), Some(b)) if a == b => {
                if labels.get(&a) == Some(&CesLabel::C) {
                    vp.on_c += 1;
                } else {
                    vp.on_e_or_s += 1;
                }
            }
            _ => {}
        }
    }
    let mut l: Vec<CesLabel> = labels.into_values().collect();
    l.sort();
    CesType {
        node_count: outline.boundary_nodes.len(),
        labels: l,
        vertex_partition: vp,
    }
}

/// Groups faces and types every isolate and pair.
pub fn classify(
    net: &Network,
    faces: &[FacePolygon],
    detection: &Detection,
    strokes: &StrokeSet,
) -> Vec<ArtifactGroup> {
    let mut groups = group_by_contiguity(net, faces, detection);
    for g in &mut groups {
        if g.kind != GroupKind::Cluster {
            g.ces_type = Some(classify_ces(net, &g.outline, strokes));
        }
    }
    groups
}

/// Count of typed groups per CES type name.
pub fn ces_histogram(groups: &[ArtifactGroup]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for g in groups {
        if let Some(t) = &g.ces_type {
            *h.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    h
}
