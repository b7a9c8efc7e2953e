//! Polygonization: bounded faces of the planar embedding of a network.
//!
//! Faces are traced with a half-edge walk (turn to the clockwise neighbour
//! at each node, keeping the face on the left). Cut edges are dropped first,
//! so dangles and bridges never appear in a face boundary; the outer
//! boundary of a component nested inside a face is attached to it as a hole.

use std::collections::{BTreeMap, BTreeSet};

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::RTree;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{signed_area, Coord, Region};
use crate::network::{EdgeId, End, Network, NodeId};
use crate::topology::endpoint_touches;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FaceId(pub usize);

/// One traversal step along an edge; the face lies on its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HalfEdge {
    pub edge: EdgeId,
    pub forward: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacePolygon {
    pub id: FaceId,
    pub region: Region,
    pub area: f64,
    pub perimeter: f64,
    /// Oriented boundary, face on the left; holes included.
    pub half_edges: Vec<HalfEdge>,
    pub boundary_edges: Vec<EdgeId>,
    pub boundary_nodes: Vec<NodeId>,
    pub neighbors: Vec<FaceId>,
}

impl FacePolygon {
    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.boundary_edges.binary_search(&e).is_ok()
    }
}

fn half_edge_coords(net: &Network, he: usize) -> Vec<Coord> {
    let e = &net.edges()[he / 2];
    if he.is_multiple_of(2) {
        e.geometry.clone()
    } else {
        e.geometry.iter().rev().copied().collect()
    }
}

fn origin(net: &Network, he: usize) -> NodeId {
    let e = &net.edges()[he / 2];
    if he.is_multiple_of(2) {
        e.endpoints.0
    } else {
        e.endpoints.1
    }
}

fn departure_angle(net: &Network, he: usize) -> f64 {
    let e = &net.edges()[he / 2];
    let end = if he.is_multiple_of(2) { End::Start } else { End::End };
    let d = e.next_vertex_from(end) - e.coord_at(end);
    d.y.atan2(d.x)
}

/// Cut edges (bridges and dangles) of the network multigraph.
pub fn cut_edges(net: &Network) -> Vec<bool> {
    let n_nodes = net.node_count();
    let mut disc = vec![usize::MAX; n_nodes];
    let mut low = vec![0usize; n_nodes];
    let mut is_bridge = vec![false; net.edge_count()];
    let mut timer = 0;
    for root in 0..n_nodes {
        if disc[root] != usize::MAX {
            continue;
        }
        // frame: (node, parent edge, next incidence position)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&(v, parent_edge, pos)) = stack.last() {
            let inc = net.incident(NodeId(v));
            if pos < inc.len() {
                let (ei, end) = inc[pos];
                stack.last_mut().unwrap().2 += 1;
                if Some(ei) == parent_edge {
                    continue;
                }
                let e = &net.edges()[ei];
                if e.is_loop() {
                    continue;
                }
                let w = e.node_at(end.other()).0;
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, Some(ei), 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let (Some(pe), Some(&(u, _, _))) = (parent_edge, stack.last()) {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        is_bridge[pe] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// All bounded faces of a noded network.
///
/// Errors if an edge endpoint touches another edge's interior without a
/// node there; interior-interior crossings are treated as non-planar and
/// tolerated.
pub fn polygonize(net: &Network) -> Result<Vec<FacePolygon>> {
    if let Some(t) = endpoint_touches(net).first() {
        return Err(Error::UnnodedTouch {
            a: net.edges()[t.edge].id,
            b: net.edges()[t.touched].id,
        });
    }
    Ok(trace_faces(net))
}

pub(crate) fn trace_faces(net: &Network) -> Vec<FacePolygon> {
    let bridges = cut_edges(net);
    let n_he = net.edge_count() * 2;

    // outgoing half-edges per node, sorted counter-clockwise
    let mut outgoing: Vec<Vec<(f64, usize)>> = vec![Vec::new(); net.node_count()];
    for he in 0..n_he {
        if bridges[he / 2] {
            continue;
        }
        outgoing[origin(net, he).0].push((departure_angle(net, he), he));
    }
    let mut slot = vec![usize::MAX; n_he];
    for list in &mut outgoing {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (i, &(_, he)) in list.iter().enumerate() {
            slot[he] = i;
        }
    }
    let next = |he: usize| -> usize {
        let twin = he ^ 1;
        let list = &outgoing[origin(net, twin).0];
        let i = slot[twin];
        list[(i + list.len() - 1) % list.len()].1
    };

    let mut visited = vec![false; n_he];
    let mut positive: Vec<Vec<usize>> = Vec::new();
    let mut negative: Vec<Vec<usize>> = Vec::new();
    for start in 0..n_he {
        if bridges[start / 2] || visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut he = start;
        while !visited[he] {
            visited[he] = true;
            cycle.push(he);
            he = next(he);
        }
        let ring = cycle_ring(net, &cycle);
        if signed_area(&ring) > 0.0 {
            positive.push(cycle);
        } else {
            negative.push(cycle);
        }
    }

    // connected components (over non-bridge edges) for hole assignment
    let component = edge_components(net, &bridges);

    let mut faces: Vec<(Vec<Vec<usize>>, usize)> = positive
        .into_iter()
        .map(|c| {
            let comp = component[c[0] / 2];
            (vec![c], comp)
        })
        .collect();

    if !negative.is_empty() && !faces.is_empty() {
        let shells: Vec<Region> = faces
            .iter()
            .map(|(c, _)| Region::new(vec![cycle_ring(net, &c[0])]))
            .collect();
        let areas: Vec<f64> = shells.iter().map(Region::area).collect();
        let tree = RTree::bulk_load(
            shells
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let b = r.bbox();
                    GeomWithData::new(Rectangle::from_corners(b.min.as_array(), b.max.as_array()), i)
                })
                .collect::<Vec<_>>(),
        );
        for cycle in negative {
            let comp = component[cycle[0] / 2];
            let coords = half_edge_coords(net, cycle[0]);
            let probe = coords[0].lerp(coords[1], 0.5);
            let host = tree
                .locate_all_at_point(&probe.as_array())
                .map(|g| g.data)
                .filter(|&i| faces[i].1 != comp && shells[i].contains(probe))
                .min_by(|&a, &b| areas[a].total_cmp(&areas[b]).then(a.cmp(&b)));
            if let Some(h) = host {
                faces[h].0.push(cycle);
            }
        }
    }

    let mut out: Vec<FacePolygon> = faces
        .into_iter()
        .enumerate()
        .map(|(i, (cycles, _))| {
            let rings: Vec<Vec<Coord>> = cycles.iter().map(|c| cycle_ring(net, c)).collect();
            let region = Region::new(rings);
            let half_edges: Vec<HalfEdge> = cycles
                .iter()
                .flatten()
                .map(|&he| HalfEdge {
                    edge: net.edges()[he / 2].id,
                    forward: he.is_multiple_of(2),
                })
                .collect();
            let boundary_edges: BTreeSet<EdgeId> = half_edges.iter().map(|h| h.edge).collect();
            let boundary_nodes: BTreeSet<NodeId> = cycles.iter().flatten().map(|&he| origin(net, he)).collect();
            FacePolygon {
                id: FaceId(i),
                area: region.area(),
                perimeter: region.perimeter(),
                region,
                half_edges,
                boundary_edges: boundary_edges.into_iter().collect(),
                boundary_nodes: boundary_nodes.into_iter().collect(),
                neighbors: Vec::new(),
            }
        })
        .collect();

    let mut by_edge: BTreeMap<EdgeId, Vec<FaceId>> = BTreeMap::new();
    for f in &out {
        for &e in &f.boundary_edges {
            by_edge.entry(e).or_default().push(f.id);
        }
    }
    let mut neighbors: Vec<BTreeSet<FaceId>> = vec![BTreeSet::new(); out.len()];
    for faces in by_edge.values() {
        for &a in faces {
            for &b in faces {
                if a != b {
                    neighbors[a.0].insert(b);
                }
            }
        }
    }
    for (f, n) in out.iter_mut().zip(neighbors) {
        f.neighbors = n.into_iter().collect();
    }
    out
}

fn cycle_ring(net: &Network, cycle: &[usize]) -> Vec<Coord> {
    let mut ring = Vec::new();
    for &he in cycle {
        let coords = half_edge_coords(net, he);
        if ring.is_empty() {
            ring.extend(coords);
        } else {
            ring.extend(coords.into_iter().skip(1));
        }
    }
    ring
}

fn edge_components(net: &Network, skip: &[bool]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..net.node_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, e) in net.edges().iter().enumerate() {
        if skip[i] {
            continue;
        }
        let a = find(&mut parent, e.endpoints.0 .0);
        let b = find(&mut parent, e.endpoints.1 .0);
        if a != b {
            parent[a] = b;
        }
    }
    net.edges()
        .iter()
        .map(|e| find(&mut parent, e.endpoints.0 .0))
        .collect()
}
